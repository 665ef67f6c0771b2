//! Run configuration: the JSON document consumed by `slspec run` and the
//! structure every subcommand is normalized into before execution.

use serde::{Deserialize, Serialize};
use slspec_core::coeffs::CoefficientSet;
use slspec_core::qtree::TreeSpec;
use slspec_core::subordinacy::ClassifyPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Mfun,
    Scan,
    Weidmann,
    TreeBands,
    TreeScan,
    TreeDecompose,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Command::Mfun => "mfun",
            Command::Scan => "scan",
            Command::Weidmann => "weidmann",
            Command::TreeBands => "tree-bands",
            Command::TreeScan => "tree-scan",
            Command::TreeDecompose => "tree-decompose",
        };
        f.write_str(s)
    }
}

/// Operator source: a path to a coefficient JSON file or the document
/// inlined.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSource {
    Path(String),
    Inline(CoefficientSet),
}

/// Tree source mirroring the wire format:
/// `{"t": […], "b": […]}` or `{"homogeneous": {"b": 2, "c": 1.0}, "levels": 600}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homogeneous: Option<Homogeneous>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Homogeneous {
    pub b: u32,
    pub c: f64,
}

pub const DEFAULT_TREE_LEVELS: usize = 600;

impl TreeSource {
    pub fn build(&self) -> Result<TreeSpec, slspec_core::Error> {
        match (&self.homogeneous, &self.t, &self.b) {
            (Some(h), None, None) => {
                TreeSpec::homogeneous(h.b, h.c, self.levels.unwrap_or(DEFAULT_TREE_LEVELS))
            }
            (None, Some(t), Some(b)) => TreeSpec::new(t.clone(), b.clone()),
            _ => Err(slspec_core::Error::InvalidTree(
                "provide either {t, b} or {homogeneous: {b, c}}".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let n = self.count;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.lo + (self.hi - self.lo) * f,
                    Spacing::Geometric => self.lo * (self.hi / self.lo).powf(f),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    pub tol: f64,
    /// Deepest spatial grid point of the ε–x walk.
    pub xmax: f64,
    pub delta: f64,
    pub delta_sub: f64,
    /// Imaginary offset used by `mfun` grids.
    pub imz: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            tol: 1e-10,
            xmax: 256.0,
            delta: 1e-3,
            delta_sub: 1e-3,
            imz: 1.0,
        }
    }
}

impl PolicyConfig {
    pub fn classify_policy(&self) -> ClassifyPolicy {
        let mut policy = ClassifyPolicy::default().with_grid_up_to(self.xmax);
        policy.tol = self.tol;
        policy.delta = self.delta;
        policy.delta_sub = self.delta_sub;
        policy.x_max_truncation = (8.0 * self.xmax).max(1024.0);
        policy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub format: Format,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            path: None,
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    /// q₂ of the Weidmann split, as an expression in x.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2_prime: Option<String>,
    /// Asymptotic cut for the Weidmann hypothesis scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut: Option<f64>,
}

/// One validation finding, addressed by a JSON-pointer-style path.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Every invariant violation yields one diagnostic; an empty list means
/// the configuration is runnable.
pub fn validate(config: &RunConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let diag = |out: &mut Vec<Diagnostic>, path: &str, message: String| {
        out.push(Diagnostic {
            path: path.to_owned(),
            message,
        });
    };

    if let Some(grid) = &config.grid {
        if grid.count < 1 {
            diag(
                &mut out,
                "/grid/count",
                "grid count must be at least 1".into(),
            );
        }
        if grid.count > 1 && !(grid.lo < grid.hi) {
            diag(
                &mut out,
                "/grid",
                format!("need lo < hi, got lo = {}, hi = {}", grid.lo, grid.hi),
            );
        }
        if grid.spacing == Spacing::Geometric && grid.lo <= 0.0 {
            diag(
                &mut out,
                "/grid/spacing",
                "geometric spacing requires lo > 0".into(),
            );
        }
    }
    if !(config.policy.tol > 0.0) {
        diag(
            &mut out,
            "/policy/tol",
            format!("tolerance must be positive, got {}", config.policy.tol),
        );
    }
    if !(config.policy.xmax > 0.0) {
        diag(
            &mut out,
            "/policy/xmax",
            format!("xmax must be positive, got {}", config.policy.xmax),
        );
    }
    if !(config.policy.delta > 0.0) || !(config.policy.delta_sub > 0.0) {
        diag(
            &mut out,
            "/policy",
            "delta and delta_sub must be positive".into(),
        );
    }
    if config.command == Command::Mfun && config.policy.imz == 0.0 {
        diag(
            &mut out,
            "/policy/imz",
            "mfun needs Im z ≠ 0; boundary values are limits only".into(),
        );
    }
    if let Some(threads) = config.threads {
        if threads == 0 {
            diag(
                &mut out,
                "/threads",
                "thread count must be at least 1".into(),
            );
        }
    }

    let needs_operator = matches!(
        config.command,
        Command::Mfun | Command::Scan | Command::Weidmann
    );
    let needs_tree = matches!(
        config.command,
        Command::TreeBands | Command::TreeScan | Command::TreeDecompose
    );
    if needs_operator && config.operator.is_none() {
        diag(
            &mut out,
            "/operator",
            format!("command {} requires an operator", config.command),
        );
    }
    if needs_tree && config.tree.is_none() {
        diag(
            &mut out,
            "/tree",
            format!("command {} requires a tree", config.command),
        );
    }
    let needs_grid = matches!(
        config.command,
        Command::Mfun | Command::Scan | Command::Weidmann | Command::TreeScan
    );
    if needs_grid && config.grid.is_none() {
        diag(
            &mut out,
            "/grid",
            format!("command {} requires a λ grid", config.command),
        );
    }

    if let Some(OperatorSource::Path(p)) = &config.operator {
        match std::fs::read_to_string(p) {
            Ok(text) => {
                if let Err(e) = CoefficientSet::from_json(&text) {
                    diag(&mut out, "/operator", format!("{p}: {e}"));
                }
            }
            Err(e) => diag(&mut out, "/operator", format!("cannot read {p}: {e}")),
        }
    }
    if let Some(tree) = &config.tree {
        // surface tree-shape violations with pointer-precision where cheap
        if let (Some(_), Some(b)) = (&tree.t, &tree.b) {
            for (k, bk) in b.iter().enumerate() {
                if k == 0 && *bk != 1 {
                    diag(
                        &mut out,
                        "/tree/b/0",
                        format!("regularity requires b₀ = 1, got {bk}"),
                    );
                } else if k > 0 && *bk < 2 {
                    diag(
                        &mut out,
                        &format!("/tree/b/{k}"),
                        format!("regularity requires b_k ≥ 2 for k ≥ 1, got {bk}"),
                    );
                }
            }
        }
        if let Err(e) = tree.build() {
            diag(&mut out, "/tree", e.to_string());
        }
    }
    if let Some(expr) = &config.potential {
        if let Err(e) = slspec_core::expr::Expr::parse(expr) {
            diag(&mut out, "/potential", e.to_string());
        }
    }
    for (field, value) in [("q2", &config.q2), ("q2_prime", &config.q2_prime)] {
        if let Some(expr) = value {
            if let Err(e) = slspec_core::expr::Expr::parse(expr) {
                diag(&mut out, &format!("/{field}"), e.to_string());
            }
        }
    }
    if config.command == Command::TreeBands && config.lmax.is_none() {
        diag(&mut out, "/lmax", "tree-bands requires lmax ≥ 1".into());
    }
    if let Some(lmax) = config.lmax {
        if lmax < 1 {
            diag(&mut out, "/lmax", "lmax must be at least 1".into());
        }
    }
    if config.command == Command::TreeDecompose && config.kmax.is_none() {
        diag(&mut out, "/kmax", "tree-decompose requires kmax".into());
    }
    out
}

/// Resolve the operator source to a coefficient set.
pub fn load_operator(source: &OperatorSource) -> Result<CoefficientSet, String> {
    match source {
        OperatorSource::Inline(c) => Ok(c.clone()),
        OperatorSource::Path(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {p}: {e}"))?;
            CoefficientSet::from_json(&text).map_err(|e| e.to_string())
        }
    }
}
