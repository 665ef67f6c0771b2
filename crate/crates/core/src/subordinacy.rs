//! Subordinacy analysis: the ε–x correspondence, the Jitomirskaya–Last
//! two-sided bound, per-λ spectral classification, and the solution-estimate
//! criteria that rule out subordinate solutions.
//!
//! A nonzero solution u is subordinate at b when ‖u‖_(a,x)/‖v‖_(a,x) → 0
//! for an independent solution v. Points λ with no subordinate solution
//! form a minimal support of the absolutely continuous spectrum; λ where
//! the Dirichlet solution s is subordinate support the singular part. The
//! classifier pairs each spatial scale x with the off-axis distance
//! ε_λ(x) = (2‖s‖‖c‖)⁻¹ and watches Im m(λ+iε) along that path, together
//! with decay evidence for candidate subordinate directions.
//!
//! Every verdict is a numerical classification with an evidence trail,
//! never a proof: the defining limits are not decidable from finite data,
//! so thresholds and grid depth are explicit policy inputs.

use crate::coeffs::CoefficientSet;
use crate::error::Error;
use crate::propagate::{evolve_projective, propagate, SolutionState};
use crate::quad::{integrate_window, r_extrema};
use crate::weyl::m_function_auto;
use crate::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Two-sided Jitomirskaya–Last bounds (5 − √24, 5 + √24).
pub fn jl_bounds() -> (f64, f64) {
    (5.0 - 24f64.sqrt(), 5.0 + 24f64.sqrt())
}

/// Norm accumulators beyond this are treated as numerically saturated and
/// stop a scan early.
const NORM_SQ_GUARD: f64 = 1e240;

// --- ε–x correspondence -------------------------------------------------------

/// One point on the ε–x correspondence for a fixed λ.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpsXPair {
    pub lambda: f64,
    pub x: f64,
    pub eps: f64,
    pub s_norm: f64,
    pub c_norm: f64,
}

/// ε_λ(x) = (2 ‖s(λ)‖_(a,x) ‖c(λ)‖_(a,x))⁻¹ from the fundamental-pair
/// accumulators.
pub fn eps_from_x(coeffs: &CoefficientSet, lambda: f64, x: f64, tol: f64) -> Result<EpsXPair> {
    let z = Complex64::new(lambda, 0.0);
    let (c, s) = crate::propagate::fundamental_pair(coeffs, z, x, tol)?;
    let (c_norm, s_norm) = (c.norm(), s.norm());
    if s_norm == 0.0 {
        return Err(Error::DegenerateNorm { x });
    }
    Ok(EpsXPair {
        lambda,
        x,
        eps: 1.0 / (2.0 * s_norm * c_norm),
        s_norm,
        c_norm,
    })
}

/// Invert the strictly decreasing map x ↦ ε_λ(x) by bisection;
/// `x_max` is the truncation beyond which the search gives up.
pub fn x_from_eps(
    coeffs: &CoefficientSet,
    lambda: f64,
    eps: f64,
    tol: f64,
    x_max: f64,
) -> Result<EpsXPair> {
    let a = coeffs.a();
    let cap = if coeffs.b().is_finite() {
        x_max.min(0.99 * coeffs.b())
    } else {
        x_max
    };
    let mut lo = a + 1e-12 * (1.0 + a.abs());
    let mut hi = (a + 1.0).min(cap);
    // expand until the target is bracketed
    while eps_from_x(coeffs, lambda, hi, tol)?.eps > eps {
        if hi >= cap {
            return Err(Error::RangeExceeded { eps, x_max: cap });
        }
        lo = hi;
        hi = (2.0 * (hi - a) + a).min(cap);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let pair = eps_from_x(coeffs, lambda, mid, tol)?;
        if (pair.eps - eps).abs() <= tol * eps {
            return Ok(pair);
        }
        if pair.eps > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    eps_from_x(coeffs, lambda, 0.5 * (lo + hi), tol)
}

/// The Jitomirskaya–Last ratio t = |m(λ+iε_λ(x))| ‖s‖/‖c‖, with the
/// m-truncation grown until the Weyl-disk radius is below tol·|m|.
pub fn jl_ratio(coeffs: &CoefficientSet, lambda: f64, x: f64, tol: f64) -> Result<f64> {
    let pair = eps_from_x(coeffs, lambda, x, 1e-10)?;
    let z = Complex64::new(lambda, pair.eps);
    let est = m_function_auto(
        coeffs,
        z,
        (4.0 * x).max(64.0),
        tol,
        1e-10,
        f64::from(1 << 21),
    )?;
    Ok(est.m.norm() * pair.s_norm / pair.c_norm)
}

// --- per-λ classification ------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    /// No subordinate solution: λ belongs to the a.c. support.
    InN,
    /// The Dirichlet solution s is subordinate (singular support).
    SubordinateDirichlet,
    /// A non-Dirichlet direction is subordinate.
    SubordinateOther,
    Inconclusive,
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictKind::InN => "InN",
            VerdictKind::SubordinateDirichlet => "SubordinateDirichlet",
            VerdictKind::SubordinateOther => "SubordinateOther",
            VerdictKind::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatioSample {
    pub x: f64,
    pub eps: f64,
    /// ‖s‖/‖c‖.
    pub s_over_c: f64,
    /// ‖u_cand‖/‖s‖ for the backward-detected candidate direction, when it
    /// is distinct from s.
    pub candidate: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MSample {
    pub x: f64,
    pub eps: f64,
    #[serde(with = "crate::mat2::complex_serde")]
    pub m: Complex64,
    pub radius: f64,
    pub jl_ratio: f64,
}

/// Thresholds and grid depth used for a verdict, echoed into the evidence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    pub delta: f64,
    pub delta_sub: f64,
    pub m_rel_radius: f64,
    pub jl_slack: f64,
    pub x_grid_max: f64,
}

/// Classification policy. The defaults follow the library conventions:
/// geometric x-grid up to 2¹⁰, δ = δ_sub = 10⁻³.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyPolicy {
    /// Ascending spatial grid along which the ε–x correspondence is walked.
    pub x_grid: Vec<f64>,
    /// Im m(λ+i0) counts as "finite and positive" inside (delta, 1/delta).
    pub delta: f64,
    /// A ratio trace must fall below this to count as subordinate decay.
    pub delta_sub: f64,
    /// Propagation tolerance.
    pub tol: f64,
    /// m-truncations grow until radius ≤ m_rel_radius·|m|.
    pub m_rel_radius: f64,
    /// Cap for m-function truncation ladders.
    pub x_max_truncation: f64,
    /// Slack admitted on the JL bounds.
    pub jl_slack: f64,
}

impl Default for ClassifyPolicy {
    fn default() -> Self {
        ClassifyPolicy {
            x_grid: (0..=10).map(|k| f64::from(1 << k)).collect(),
            delta: 1e-3,
            delta_sub: 1e-3,
            tol: 1e-10,
            m_rel_radius: 0.05,
            x_max_truncation: 8192.0,
            jl_slack: 1e-3,
        }
    }
}

impl ClassifyPolicy {
    /// Geometric grid 1, 2, 4, … up to `x_max`.
    pub fn with_grid_up_to(mut self, x_max: f64) -> Self {
        let mut grid = Vec::new();
        let mut x = 1.0;
        while x <= x_max * (1.0 + 1e-12) {
            grid.push(x);
            x *= 2.0;
        }
        self.x_grid = grid;
        self
    }
}

/// Per-λ verdict with its full evidence trail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubordinacyVerdict {
    pub lambda: f64,
    pub kind: VerdictKind,
    pub ratio_trace: Vec<RatioSample>,
    pub m_trace: Vec<MSample>,
    pub thresholds: Thresholds,
    /// Im m(λ+i0) from the last stabilized samples, when they stabilized.
    pub im_m_extrapolated: Option<f64>,
    pub jl_min: Option<f64>,
    pub jl_max: Option<f64>,
    /// Eventful notes: overflow guards, skipped samples.
    pub notes: Vec<String>,
}

/// Classify λ through the ε–x correspondence. Uncertainty, including any
/// internal numerical failure, is reported as `Inconclusive` with the
/// partial evidence retained.
pub fn classify_lambda(
    coeffs: &CoefficientSet,
    lambda: f64,
    policy: &ClassifyPolicy,
) -> SubordinacyVerdict {
    let thresholds = Thresholds {
        delta: policy.delta,
        delta_sub: policy.delta_sub,
        m_rel_radius: policy.m_rel_radius,
        jl_slack: policy.jl_slack,
        x_grid_max: policy.x_grid.last().copied().unwrap_or(0.0),
    };
    let mut verdict = SubordinacyVerdict {
        lambda,
        kind: VerdictKind::Inconclusive,
        ratio_trace: Vec::new(),
        m_trace: Vec::new(),
        thresholds,
        im_m_extrapolated: None,
        jl_min: None,
        jl_max: None,
        notes: Vec::new(),
    };
    if !lambda.is_finite() || policy.x_grid.is_empty() {
        verdict.notes.push("empty grid or non-finite lambda".into());
        return verdict;
    }

    let a = coeffs.a();
    let grid: Vec<f64> = policy
        .x_grid
        .iter()
        .copied()
        .filter(|&x| x > a && (!coeffs.b().is_finite() || x < 0.45 * coeffs.b()))
        .collect();
    if grid.is_empty() {
        verdict
            .notes
            .push("grid does not intersect the domain".into());
        return verdict;
    }

    let z = Complex64::new(lambda, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);

    // candidate subordinate direction from backward propagation at twice the
    // deepest grid point
    let x_dir = {
        let desired = 2.0 * grid.last().unwrap();
        if coeffs.b().is_finite() {
            desired.min(0.995 * coeffs.b())
        } else {
            desired
        }
    };
    let mut candidate_init: Option<(f64, f64)> = None;
    let mut candidate_is_dirichlet = false;
    match evolve_projective(coeffs, z, x_dir, a, zero, -one, policy.tol) {
        Ok((u0, w0)) => {
            let mag = u0.norm().hypot(w0.norm());
            if mag > 0.0 {
                let (u0, w0) = (u0.re / mag, w0.re / mag);
                if u0.abs() < 1e-8 {
                    candidate_is_dirichlet = true;
                } else {
                    candidate_init = Some((u0, w0));
                }
            }
        }
        Err(e) => verdict
            .notes
            .push(format!("candidate direction unavailable: {e}")),
    }

    // incremental forward walk of c, s (and the candidate) along the grid
    let mut st_c = SolutionState::at_left(coeffs, z, one, zero);
    let mut st_s = SolutionState::at_left(coeffs, z, zero, one);
    let mut st_cand = candidate_init.map(|(u0, w0)| {
        SolutionState::at_left(coeffs, z, Complex64::new(u0, 0.0), Complex64::new(w0, 0.0))
    });

    for &x in &grid {
        let step = (|| -> Result<()> {
            st_c = propagate(coeffs, &st_c, x, policy.tol)?;
            st_s = propagate(coeffs, &st_s, x, policy.tol)?;
            if let Some(st) = st_cand.as_mut() {
                *st = propagate(coeffs, st, x, policy.tol)?;
            }
            Ok(())
        })();
        if let Err(e) = step {
            verdict.notes.push(format!("grid stopped at x = {x}: {e}"));
            break;
        }
        if st_c.norm_sq > NORM_SQ_GUARD || st_s.norm_sq > NORM_SQ_GUARD {
            verdict.notes.push(format!("overflow guard at x = {x}"));
            break;
        }
        let (c_norm, s_norm) = (st_c.norm(), st_s.norm());
        if s_norm == 0.0 || c_norm == 0.0 {
            verdict.notes.push(format!("degenerate norm at x = {x}"));
            break;
        }
        let eps = 1.0 / (2.0 * s_norm * c_norm);
        let cand_ratio = st_cand.as_ref().map(|st| st.norm() / s_norm);
        verdict.ratio_trace.push(RatioSample {
            x,
            eps,
            s_over_c: s_norm / c_norm,
            candidate: cand_ratio,
        });

        // m along the induced ε value
        let zeps = Complex64::new(lambda, eps);
        let cap = if coeffs.b().is_finite() {
            policy.x_max_truncation.min(0.995 * coeffs.b())
        } else {
            policy.x_max_truncation
        };
        match m_function_auto(
            coeffs,
            zeps,
            (4.0 * x).max(64.0),
            policy.m_rel_radius,
            policy.tol,
            cap,
        ) {
            Ok(est) => {
                let t = est.m.norm() * s_norm / c_norm;
                verdict.m_trace.push(MSample {
                    x,
                    eps,
                    m: est.m,
                    radius: est.radius,
                    jl_ratio: t,
                });
            }
            Err(e) => verdict
                .notes
                .push(format!("m sample skipped at x = {x}: {e}")),
        }
    }

    decide(&mut verdict, policy, candidate_is_dirichlet);
    verdict
}

/// Monotone decay over the final decade of the grid: every sample below the
/// threshold and nonincreasing within a factor-2 noise allowance per step.
fn decays_over_final_decade(samples: &[(f64, f64)], threshold: f64) -> bool {
    let Some(&(x_last, _)) = samples.last() else {
        return false;
    };
    let decade: Vec<f64> = samples
        .iter()
        .filter(|(x, _)| *x >= x_last / 10.0)
        .map(|(_, r)| *r)
        .collect();
    if decade.len() < 2 {
        return false;
    }
    decade.iter().all(|r| *r < threshold) && decade.windows(2).all(|w| w[1] <= 2.0 * w[0])
}

fn decide(verdict: &mut SubordinacyVerdict, policy: &ClassifyPolicy, candidate_is_dirichlet: bool) {
    let (jl_lo, jl_hi) = jl_bounds();
    if !verdict.m_trace.is_empty() {
        verdict.jl_min = Some(
            verdict
                .m_trace
                .iter()
                .map(|m| m.jl_ratio)
                .fold(f64::INFINITY, f64::min),
        );
        verdict.jl_max = Some(
            verdict
                .m_trace
                .iter()
                .map(|m| m.jl_ratio)
                .fold(f64::NEG_INFINITY, f64::max),
        );
    }

    // subordinate-decay evidence first: if any direction collapses, the
    // boundary value of m is real or infinite and λ is not in the a.c. support
    let s_trace: Vec<(f64, f64)> = verdict
        .ratio_trace
        .iter()
        .map(|r| (r.x, r.s_over_c))
        .collect();
    if decays_over_final_decade(&s_trace, policy.delta_sub) {
        verdict.kind = VerdictKind::SubordinateDirichlet;
        return;
    }
    let cand_trace: Vec<(f64, f64)> = verdict
        .ratio_trace
        .iter()
        .filter_map(|r| r.candidate.map(|c| (r.x, c)))
        .collect();
    if !candidate_is_dirichlet && decays_over_final_decade(&cand_trace, policy.delta_sub) {
        verdict.kind = VerdictKind::SubordinateOther;
        return;
    }

    // a.c. evidence: Im m stabilized inside (δ, 1/δ) and the JL ratio in
    // bounds at every tested ε–x pair
    if verdict.m_trace.len() >= 3 {
        let tail = &verdict.m_trace[verdict.m_trace.len() - 3..];
        let ims: Vec<f64> = tail.iter().map(|m| m.m.im).collect();
        let scale = ims.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let stabilized = scale > 0.0 && ims.windows(2).all(|w| (w[1] - w[0]).abs() <= 0.10 * scale);
        let im_last = ims[2];
        let jl_ok = verdict.m_trace.iter().all(|m| {
            m.jl_ratio >= jl_lo - policy.jl_slack && m.jl_ratio <= jl_hi + policy.jl_slack
        });
        if stabilized {
            verdict.im_m_extrapolated = Some(im_last);
        }
        if stabilized && im_last > policy.delta && im_last < 1.0 / policy.delta && jl_ok {
            verdict.kind = VerdictKind::InN;
        }
    }
}

// --- solution-estimate criteria (derivative bound, coefficient scan, growth) ---

/// Which real solution a check runs on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolutionSelector {
    /// c: u(a) = 1, pu′(a) = 0.
    NeumannC,
    /// s: u(a) = 0, pu′(a) = 1.
    DirichletS,
    /// Arbitrary real initial data (u(a), pu′(a)).
    Direction { u0: f64, pu0: f64 },
}

impl SolutionSelector {
    fn initial(&self) -> (Complex64, Complex64) {
        match self {
            SolutionSelector::NeumannC => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            SolutionSelector::DirichletS => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            SolutionSelector::Direction { u0, pu0 } => {
                (Complex64::new(*u0, 0.0), Complex64::new(*pu0, 0.0))
            }
        }
    }
}

/// Both sides of the local derivative bound
/// (pu′)(x)²/r(x) ≤ γ(x)·∫[2/(P r) + |q/r − λ|]² · ∫u² r over [x−1, x+1].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DerivativeBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub gamma: f64,
    pub p_window: f64,
}

pub fn derivative_bound_check(
    coeffs: &CoefficientSet,
    lambda: f64,
    u: &SolutionSelector,
    x: f64,
    tol: f64,
) -> Result<DerivativeBound> {
    let (lo, hi) = (x - 1.0, x + 1.0);
    if lo <= coeffs.a() || hi >= coeffs.b() {
        return Err(Error::WindowOutOfDomain {
            lo,
            hi,
            a: coeffs.a(),
            b: coeffs.b(),
        });
    }
    let p_window = integrate_window(coeffs, x - 0.5, x + 0.5, &|p, _, _| 1.0 / p, 1e-12)?;
    let (r_min, r_max) = r_extrema(coeffs, lo, hi)?;
    let gamma = r_max / r_min;
    let bracket = integrate_window(
        coeffs,
        lo,
        hi,
        &|_, q, r| {
            let v = 2.0 / (p_window * r) + (q / r - lambda).abs();
            v * v
        },
        1e-12,
    )?;

    let (u0, pu0) = u.initial();
    let z = Complex64::new(lambda, 0.0);
    let st0 = SolutionState::at_left(coeffs, z, u0, pu0);
    let st_lo = propagate(coeffs, &st0, lo, tol.min(1e-9))?;
    let st_x = propagate(coeffs, &st_lo, x, tol.min(1e-9))?;
    let st_hi = propagate(coeffs, &st_x, hi, tol.min(1e-9))?;
    let imag = st_x.u.im.abs().max(st_x.pu.im.abs());
    let scale = st_x.u.norm().max(st_x.pu.norm()).max(1.0);
    if imag > 1e-10 * scale {
        return Err(Error::NonRealSolution { imag });
    }
    let window_norm = (st_hi.norm_sq - st_lo.norm_sq).max(0.0);
    let (_, _, r_at_x) = coeffs.eval(x)?;
    let lhs = st_x.pu.re * st_x.pu.re / r_at_x;
    let rhs = gamma * bracket * window_norm;
    Ok(DerivativeBound {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + tol),
        gamma,
        p_window,
    })
}

/// Window quantities of the boundedness criteria and the Stolz-type
/// conditions, scanned over a grid. Sups and infs are over the scanned
/// range only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub gamma_sup: f64,
    /// sup over x of (2/P(x))²·∫_{x−1}^{x+1} r⁻² dy.
    pub p_term_sup: f64,
    /// sup over x of ∫_{x−1}^{x+1} |q/r − λ|² dy.
    pub q_term_sup: f64,
    /// sup over x of ∫_x^{x+1} q₋/r dy.
    pub qminus_sup: f64,
    /// inf over x of ∫_x^{x+1} r/p dy.
    pub i_minus: f64,
    pub r_monotone: bool,
    pub scan_range: (f64, f64),
}

pub fn criteria_scan(
    coeffs: &CoefficientSet,
    lambda: f64,
    x_lo: f64,
    x_hi: f64,
    step: f64,
) -> Result<CriteriaReport> {
    if x_lo - 1.0 <= coeffs.a() || x_hi + 1.0 >= coeffs.b() || !(x_lo < x_hi) || !(step > 0.0) {
        return Err(Error::WindowOutOfDomain {
            lo: x_lo - 1.0,
            hi: x_hi + 1.0,
            a: coeffs.a(),
            b: coeffs.b(),
        });
    }
    let mut gamma_sup = f64::NEG_INFINITY;
    let mut p_term_sup = f64::NEG_INFINITY;
    let mut q_term_sup = f64::NEG_INFINITY;
    let mut qminus_sup = f64::NEG_INFINITY;
    let mut i_minus = f64::INFINITY;
    let mut r_monotone = true;
    let mut prev_r: Option<f64> = None;

    let mut x = x_lo;
    while x <= x_hi * (1.0 + 1e-12) {
        let (r_min, r_max) = r_extrema(coeffs, x - 1.0, x + 1.0)?;
        gamma_sup = gamma_sup.max(r_max / r_min);
        let p_window = integrate_window(coeffs, x - 0.5, x + 0.5, &|p, _, _| 1.0 / p, 1e-12)?;
        let inv_r2 = integrate_window(coeffs, x - 1.0, x + 1.0, &|_, _, r| 1.0 / (r * r), 1e-12)?;
        p_term_sup = p_term_sup.max((2.0 / p_window) * (2.0 / p_window) * inv_r2);
        let q_term = integrate_window(
            coeffs,
            x - 1.0,
            x + 1.0,
            &|_, q, r| {
                let v = q / r - lambda;
                v * v
            },
            1e-12,
        )?;
        q_term_sup = q_term_sup.max(q_term);
        qminus_sup = qminus_sup.max(integrate_window(
            coeffs,
            x,
            x + 1.0,
            &|_, q, r| (-q).max(0.0) / r,
            1e-12,
        )?);
        i_minus = i_minus.min(integrate_window(
            coeffs,
            x,
            x + 1.0,
            &|p, _, r| r / p,
            1e-12,
        )?);

        // sampled monotonicity of r along the grid
        for k in 0..8 {
            let xs = x + step * k as f64 / 8.0;
            if xs > x_hi {
                break;
            }
            if let Ok((_, _, r)) = coeffs.eval(xs) {
                if let Some(pr) = prev_r {
                    if r < pr * (1.0 - 1e-12) {
                        r_monotone = false;
                    }
                }
                prev_r = Some(r);
            }
        }
        x += step;
    }
    Ok(CriteriaReport {
        gamma_sup,
        p_term_sup,
        q_term_sup,
        qminus_sup,
        i_minus,
        r_monotone,
        scan_range: (x_lo, x_hi),
    })
}

/// Growth diagnostics of one fundamental solution over [a, X].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolutionGrowth {
    /// sup of √r·|u| over the sample grid.
    pub sup_sqrt_r_u: f64,
    /// sup of |pu′|/√r.
    pub sup_du_over_sqrt_r: f64,
    /// Least-squares slope of ∫|u|²r versus x over the final half.
    pub c3_slope: f64,
    /// Relative RMS residual of that linear fit.
    pub fit_residual: f64,
    pub bounded_u: bool,
    pub bounded_du: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    /// c first, s second.
    pub per_solution: [SolutionGrowth; 2],
    pub bounded_u: bool,
    pub bounded_du: bool,
    /// The smaller of the two fitted slopes.
    pub linear_growth_c3: f64,
    pub ceiling: f64,
    pub x_max: f64,
}

/// Default boundedness ceiling for √r|u| and |pu′|/√r on unit-scale
/// initial data.
pub const GROWTH_CEILING: f64 = 100.0;

pub fn growth_checks(
    coeffs: &CoefficientSet,
    lambda: f64,
    x_max: f64,
    tol: f64,
) -> Result<GrowthReport> {
    growth_checks_with_ceiling(coeffs, lambda, x_max, tol, GROWTH_CEILING)
}

pub fn growth_checks_with_ceiling(
    coeffs: &CoefficientSet,
    lambda: f64,
    x_max: f64,
    tol: f64,
    ceiling: f64,
) -> Result<GrowthReport> {
    if !(x_max > coeffs.a()) || x_max >= coeffs.b() {
        return Err(Error::OutOfDomain {
            x: x_max,
            a: coeffs.a(),
            b: coeffs.b(),
        });
    }
    let z = Complex64::new(lambda, 0.0);
    let a = coeffs.a();

    // sample grid: 8 per unit, plus every segment boundary
    let mut xs: Vec<f64> = Vec::new();
    let n = (((x_max - a) * 8.0).ceil() as usize).clamp(16, 20_000);
    for i in 1..=n {
        xs.push(a + (x_max - a) * i as f64 / n as f64);
    }
    xs.extend(coeffs.boundaries_in(a, x_max));
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xs.dedup();

    let selectors = [SolutionSelector::NeumannC, SolutionSelector::DirichletS];
    let mut growths = Vec::with_capacity(2);
    for sel in &selectors {
        let (u0, pu0) = sel.initial();
        let mut st = SolutionState::at_left(coeffs, z, u0, pu0);
        let mut sup_u = 0.0f64;
        let mut sup_du = 0.0f64;
        let mut trail: Vec<(f64, f64)> = Vec::new();
        let mut overflowed = false;
        for &x in &xs {
            match propagate(coeffs, &st, x, tol) {
                Ok(next) => st = next,
                Err(Error::Overflow(_)) => {
                    overflowed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
            let (_, _, r) = coeffs.eval(x.min(a + (x_max - a) * (1.0 - 1e-12)))?;
            sup_u = sup_u.max(r.sqrt() * st.u.norm());
            sup_du = sup_du.max(st.pu.norm() / r.sqrt());
            trail.push((x, st.norm_sq));
            if st.norm_sq > NORM_SQ_GUARD {
                overflowed = true;
                break;
            }
        }
        if overflowed {
            sup_u = f64::INFINITY;
            sup_du = f64::INFINITY;
        }
        let half: Vec<(f64, f64)> = trail
            .iter()
            .copied()
            .filter(|(x, _)| *x >= 0.5 * (a + x_max))
            .collect();
        let (c3_slope, fit_residual) = least_squares_slope(&half);
        growths.push(SolutionGrowth {
            sup_sqrt_r_u: sup_u,
            sup_du_over_sqrt_r: sup_du,
            c3_slope,
            fit_residual,
            bounded_u: sup_u <= ceiling,
            bounded_du: sup_du <= ceiling,
        });
    }
    let per_solution = [growths[0], growths[1]];
    Ok(GrowthReport {
        bounded_u: per_solution.iter().all(|g| g.bounded_u),
        bounded_du: per_solution.iter().all(|g| g.bounded_du),
        linear_growth_c3: per_solution[0].c3_slope.min(per_solution[1].c3_slope),
        per_solution,
        ceiling,
        x_max,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> (f64, f64) {
    if points.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / n;
    (slope, ss.sqrt() / my.abs().max(1e-300))
}
