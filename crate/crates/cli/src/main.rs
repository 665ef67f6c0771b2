//! `slspec` — spectral scans for Sturm-Liouville operators and radial
//! quantum trees.
//!
//! Subcommands normalize their flags into one `RunConfig`, which can also
//! be supplied whole as a JSON file via `slspec run --config …`. Exit
//! codes: 0 success, 2 configuration rejected, 3 numerical failure with
//! partial results flushed.

// negated float comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{
    validate, Command as RunCommand, Format, GridSpec, Homogeneous, OperatorSource, OutputSpec,
    PolicyConfig, RunConfig, Spacing, TreeSource,
};
use log::error;

#[derive(Parser)]
#[command(name = "slspec", version, about = "Sturm-Liouville spectral analysis")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Single λ (shorthand for a one-point grid).
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    lambda_lo: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    lambda_hi: f64,
    #[arg(long, default_value_t = 8)]
    lambda_count: usize,
    /// linear | geometric
    #[arg(long, default_value = "linear")]
    lambda_spacing: String,
}

impl GridArgs {
    fn to_spec(&self) -> Result<GridSpec, String> {
        let spacing = match self.lambda_spacing.as_str() {
            "linear" => Spacing::Linear,
            "geometric" => Spacing::Geometric,
            other => return Err(format!("unknown spacing '{other}'")),
        };
        Ok(match self.lambda {
            Some(l) => GridSpec {
                lo: l,
                hi: l,
                count: 1,
                spacing,
            },
            None => GridSpec {
                lo: self.lambda_lo,
                hi: self.lambda_hi,
                count: self.lambda_count,
                spacing,
            },
        })
    }
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Deepest spatial scale of the ε–x walk / truncation for mfun.
    #[arg(long, default_value_t = 256.0)]
    xmax: f64,
    /// Worker threads (default: number of cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    output: Option<String>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
}

impl CommonArgs {
    fn output_spec(&self) -> Result<OutputSpec, String> {
        let format = match self.format.as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(format!("unknown format '{other}'")),
        };
        Ok(OutputSpec {
            path: self.output.clone(),
            format,
        })
    }

    fn policy(&self, imz: f64) -> PolicyConfig {
        PolicyConfig {
            tol: self.tol,
            xmax: self.xmax,
            imz,
            ..PolicyConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct TreeArgs {
    /// Tree description file ({"t": […], "b": […]} or {"homogeneous": …}).
    #[arg(long)]
    tree: Option<String>,
    /// Homogeneous branching number (with --c).
    #[arg(long)]
    b: Option<u32>,
    /// Homogeneous edge length.
    #[arg(long)]
    c: Option<f64>,
    /// Materialized levels for homogeneous trees.
    #[arg(long)]
    levels: Option<usize>,
}

impl TreeArgs {
    fn to_source(&self) -> Result<TreeSource, String> {
        match (&self.tree, self.b, self.c) {
            (Some(path), None, None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {path}: {e}"))?;
                let mut src: TreeSource =
                    serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
                if src.levels.is_none() {
                    src.levels = self.levels;
                }
                Ok(src)
            }
            (None, Some(b), Some(c)) => Ok(TreeSource {
                t: None,
                b: None,
                homogeneous: Some(Homogeneous { b, c }),
                levels: self.levels,
            }),
            _ => Err("provide either --tree FILE or both --b and --c".into()),
        }
    }
}

#[derive(Subcommand)]
enum CliCommand {
    /// Weyl m-function estimates on a λ grid at fixed Im z.
    Mfun {
        /// Operator coefficient file (JSON).
        #[arg(long)]
        operator: String,
        /// Imaginary offset of z = λ + i·imz.
        #[arg(long, default_value_t = 1.0)]
        imz: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Subordinacy classification of a λ grid.
    Scan {
        #[arg(long)]
        operator: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Asymptotically-Schrödinger hypotheses and classification.
    Weidmann {
        #[arg(long)]
        operator: String,
        /// q₂ of the split q = q₁ + q₂ (expression in x).
        #[arg(long)]
        q2: Option<String>,
        /// q₂′ (required with --q2).
        #[arg(long)]
        q2p: Option<String>,
        /// Asymptotic cut c.
        #[arg(long, default_value_t = 1.0)]
        cut: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Closed-form band table of a homogeneous tree.
    TreeBands {
        #[arg(long)]
        b: u32,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        lmax: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Subordinacy scan on a radial tree (optionally with a potential).
    TreeScan {
        #[command(flatten)]
        tree: TreeArgs,
        /// Radial potential V(x) as an expression.
        #[arg(long)]
        potential: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Orthogonal-sum decomposition multiplicities.
    TreeDecompose {
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        kmax: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Execute a full RunConfig JSON document.
    Run {
        #[arg(long)]
        config: String,
    },
    /// Validate a RunConfig and print diagnostics.
    Validate {
        #[arg(long)]
        config: String,
    },
}

fn build_config(cmd: &CliCommand) -> Result<RunConfig, String> {
    Ok(match cmd {
        CliCommand::Mfun {
            operator,
            imz,
            grid,
            common,
        } => RunConfig {
            command: RunCommand::Mfun,
            operator: Some(OperatorSource::Path(operator.clone())),
            tree: None,
            grid: Some(grid.to_spec()?),
            policy: common.policy(*imz),
            output: common.output_spec()?,
            threads: common.threads,
            lmax: None,
            kmax: None,
            potential: None,
            q2: None,
            q2_prime: None,
            cut: None,
        },
        CliCommand::Scan {
            operator,
            grid,
            common,
        } => RunConfig {
            command: RunCommand::Scan,
            operator: Some(OperatorSource::Path(operator.clone())),
            tree: None,
            grid: Some(grid.to_spec()?),
            policy: common.policy(1.0),
            output: common.output_spec()?,
            threads: common.threads,
            lmax: None,
            kmax: None,
            potential: None,
            q2: None,
            q2_prime: None,
            cut: None,
        },
        CliCommand::Weidmann {
            operator,
            q2,
            q2p,
            cut,
            grid,
            common,
        } => RunConfig {
            command: RunCommand::Weidmann,
            operator: Some(OperatorSource::Path(operator.clone())),
            tree: None,
            grid: Some(grid.to_spec()?),
            policy: common.policy(1.0),
            output: common.output_spec()?,
            threads: common.threads,
            lmax: None,
            kmax: None,
            potential: None,
            q2: q2.clone(),
            q2_prime: q2p.clone(),
            cut: Some(*cut),
        },
        CliCommand::TreeBands { b, c, lmax, common } => RunConfig {
            command: RunCommand::TreeBands,
            operator: None,
            tree: Some(TreeSource {
                t: None,
                b: None,
                homogeneous: Some(Homogeneous { b: *b, c: *c }),
                levels: Some(8),
            }),
            grid: None,
            policy: common.policy(1.0),
            output: common.output_spec()?,
            threads: common.threads,
            lmax: Some(*lmax),
            kmax: None,
            potential: None,
            q2: None,
            q2_prime: None,
            cut: None,
        },
        CliCommand::TreeScan {
            tree,
            potential,
            grid,
            common,
        } => RunConfig {
            command: RunCommand::TreeScan,
            operator: None,
            tree: Some(tree.to_source()?),
            grid: Some(grid.to_spec()?),
            policy: common.policy(1.0),
            output: common.output_spec()?,
            threads: common.threads,
            lmax: None,
            kmax: None,
            potential: potential.clone(),
            q2: None,
            q2_prime: None,
            cut: None,
        },
        CliCommand::TreeDecompose { tree, kmax, common } => RunConfig {
            command: RunCommand::TreeDecompose,
            operator: None,
            tree: Some(tree.to_source()?),
            grid: None,
            policy: common.policy(1.0),
            output: common.output_spec()?,
            threads: common.threads,
            lmax: None,
            kmax: Some(*kmax),
            potential: None,
            q2: None,
            q2_prime: None,
            cut: None,
        },
        CliCommand::Run { config } | CliCommand::Validate { config } => {
            let text = std::fs::read_to_string(config)
                .map_err(|e| format!("cannot read {config}: {e}"))?;
            serde_json::from_str(&text).map_err(|e| format!("{config}: {e}"))?
        }
    })
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SLSPEC_LOG")).init();
    let cli = Cli::parse();

    let config = match build_config(&cli.command) {
        Ok(c) => c,
        Err(msg) => {
            error!("{msg}");
            eprintln!("configuration error: {msg}");
            std::process::exit(2);
        }
    };

    let diagnostics = validate(&config);
    if matches!(cli.command, CliCommand::Validate { .. }) {
        for d in &diagnostics {
            println!("{d}");
        }
        std::process::exit(if diagnostics.is_empty() { 0 } else { 2 });
    }
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("invalid configuration at {d}");
        }
        std::process::exit(2);
    }

    match commands::execute(&config) {
        Ok(exec) => {
            if let Err(e) = exec
                .report
                .write(config.output.path.as_deref(), config.output.format)
            {
                eprintln!("cannot write output: {e}");
                std::process::exit(3);
            }
            if exec.numerical_failures > 0 {
                eprintln!(
                    "{} grid point(s) failed numerically; partial results flushed",
                    exec.numerical_failures
                );
                std::process::exit(3);
            }
        }
        Err(msg) => {
            eprintln!("execution failed: {msg}");
            std::process::exit(3);
        }
    }
}
