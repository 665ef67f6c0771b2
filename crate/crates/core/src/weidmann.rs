//! Asymptotically-Schrödinger hypotheses and the Lyapunov monitor behind
//! the half-line result that the spectrum on (0, ∞) is purely absolutely
//! continuous when the coefficients settle down integrably.
//!
//! The hypotheses are L¹ tails: 1 − 1/p and 1 − r integrable beyond some
//! cut c, and q = q₁ + q₂ with q₁ ∈ L¹, q₂ absolutely continuous, q₂′ ∈ L¹
//! and q₂ → 0. Since L¹ membership is not finitely checkable, the scan
//! reports partial integrals on an increasing truncation list; flattening
//! Cauchy tails are the numerical evidence. The monitor tracks
//! h(t) = (λ − q₂)u² + (pu′)², whose logarithmic derivative is L¹ under
//! the hypotheses, so small tail variation of ln h certifies that u and
//! pu′ stay bounded.

use crate::coeffs::{CoeffFn, CoefficientSet};
use crate::error::Error;
use crate::propagate::{propagate, SolutionState};
use crate::quad::adaptive_simpson;
use crate::subordinacy::{classify_lambda, ClassifyPolicy, SubordinacyVerdict, VerdictKind};
use crate::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// The user-supplied split q = q₁ + q₂ together with q₂′. The default
/// split puts everything into q₁, which is the right choice when q itself
/// is integrable.
#[derive(Clone)]
pub struct QSplit {
    pub q1: CoeffFn,
    pub q2: CoeffFn,
    pub q2_prime: CoeffFn,
}

impl QSplit {
    /// q₁ = q, q₂ = 0.
    pub fn all_in_q1(coeffs: &CoefficientSet) -> Self {
        let c = coeffs.clone();
        QSplit {
            q1: Arc::new(move |x| c.eval(x).map(|(_, q, _)| q).unwrap_or(0.0)),
            q2: Arc::new(|_| 0.0),
            q2_prime: Arc::new(|_| 0.0),
        }
    }

    pub fn new(q1: CoeffFn, q2: CoeffFn, q2_prime: CoeffFn) -> Self {
        QSplit { q1, q2, q2_prime }
    }
}

/// Partial integrals of the hypothesis quantities over [c, X].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeidmannHypotheses {
    pub c: f64,
    /// ∫_c^X |1 − 1/p|.
    pub l1_p_defect: f64,
    /// ∫_c^X |1 − r|.
    pub l1_r_defect: f64,
    /// ∫_c^X |q₁|.
    pub q1_l1: f64,
    /// ∫_c^X |q₂′|.
    pub q2_prime_l1: f64,
    /// q₂(X), which should tend to 0.
    pub q2_limit_estimate: f64,
    #[serde(rename = "X")]
    pub x: f64,
}

/// Partial hypothesis integrals at each listed truncation; nondecreasing
/// in X with shrinking increments when the hypotheses hold.
pub fn hypotheses_scan(
    coeffs: &CoefficientSet,
    q_split: &QSplit,
    c: f64,
    x_list: &[f64],
) -> Result<Vec<WeidmannHypotheses>> {
    if x_list.iter().any(|&x| x <= c || x >= coeffs.b()) {
        return Err(Error::OutOfDomain {
            x: *x_list.last().unwrap_or(&c),
            a: c,
            b: coeffs.b(),
        });
    }
    let tol = 1e-11;
    let mut out = Vec::with_capacity(x_list.len());
    let (mut p_def, mut r_def, mut q1_acc, mut q2p_acc) = (0.0, 0.0, 0.0, 0.0);
    let mut prev = c;
    for &x in x_list {
        let cs = coeffs.clone();
        p_def += adaptive_simpson(
            &|y| {
                cs.eval(y)
                    .map(|(p, _, _)| (1.0 - 1.0 / p).abs())
                    .unwrap_or(0.0)
            },
            prev,
            x,
            tol,
        );
        let cs = coeffs.clone();
        r_def += adaptive_simpson(
            &|y| cs.eval(y).map(|(_, _, r)| (1.0 - r).abs()).unwrap_or(0.0),
            prev,
            x,
            tol,
        );
        let q1 = q_split.q1.clone();
        q1_acc += adaptive_simpson(&|y| q1(y).abs(), prev, x, tol);
        let q2p = q_split.q2_prime.clone();
        q2p_acc += adaptive_simpson(&|y| q2p(y).abs(), prev, x, tol);
        out.push(WeidmannHypotheses {
            c,
            l1_p_defect: p_def,
            l1_r_defect: r_def,
            q1_l1: q1_acc,
            q2_prime_l1: q2p_acc,
            q2_limit_estimate: (q_split.q2)(x),
            x,
        });
        prev = x;
    }
    Ok(out)
}

/// h(t) along the grid for one solution, plus the total variation of ln h
/// over the tail half.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HTrace {
    pub h_values: Vec<f64>,
    pub log_h_variation_tail: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HMonitorReport {
    pub lambda: f64,
    /// Traces for the fundamental pair, c first.
    pub traces: [HTrace; 2],
    /// max of the two tail variations.
    pub log_h_variation_tail: f64,
    pub x_grid: Vec<f64>,
}

/// Evaluate h(t) = (λ − q₂(t))·u(t)² + (pu′(t))² for both fundamental
/// solutions along an ascending grid. A finite limit of ln h is
/// operationalized as small total variation over the tail half of the
/// grid.
pub fn h_monitor(
    coeffs: &CoefficientSet,
    q2: &CoeffFn,
    lambda: f64,
    x_grid: &[f64],
    tol: f64,
) -> Result<HMonitorReport> {
    if x_grid.is_empty() {
        return Ok(HMonitorReport {
            lambda,
            traces: [
                HTrace {
                    h_values: vec![],
                    log_h_variation_tail: 0.0,
                },
                HTrace {
                    h_values: vec![],
                    log_h_variation_tail: 0.0,
                },
            ],
            log_h_variation_tail: 0.0,
            x_grid: vec![],
        });
    }
    for &t in x_grid {
        let v = lambda - q2(t);
        if v <= 0.0 {
            return Err(Error::NonpositiveH { t, value: v });
        }
    }
    let z = Complex64::new(lambda, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let inits = [(one, zero), (zero, one)];
    let mut traces = Vec::with_capacity(2);
    for (u0, pu0) in inits {
        let mut st = SolutionState::at_left(coeffs, z, u0, pu0);
        let mut h_values = Vec::with_capacity(x_grid.len());
        for &t in x_grid {
            st = propagate(coeffs, &st, t, tol)?;
            let h = (lambda - q2(t)) * st.u.re * st.u.re + st.pu.re * st.pu.re;
            h_values.push(h);
        }
        let tail_from = x_grid.len() / 2;
        let mut variation = 0.0;
        for i in tail_from..x_grid.len().saturating_sub(1) {
            if h_values[i] > 0.0 && h_values[i + 1] > 0.0 {
                variation += (h_values[i + 1].ln() - h_values[i].ln()).abs();
            } else {
                variation = f64::INFINITY;
            }
        }
        traces.push(HTrace {
            h_values,
            log_h_variation_tail: variation,
        });
    }
    let worst = traces
        .iter()
        .map(|t| t.log_h_variation_tail)
        .fold(0.0f64, f64::max);
    Ok(HMonitorReport {
        lambda,
        traces: [traces[0].clone(), traces[1].clone()],
        log_h_variation_tail: worst,
        x_grid: x_grid.to_vec(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeidmannRow {
    pub lambda: f64,
    pub verdict: VerdictKind,
    pub im_m_extrapolated: Option<f64>,
    pub h_tail_variation: f64,
}

/// Combined report: per-λ classification plus the h-monitor evidence, and
/// the expected outcome (every λ > 0 in the a.c. support) as a pass/fail
/// summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeidmannReport {
    pub rows: Vec<WeidmannRow>,
    pub fraction_inn: f64,
    pub all_positive_inn: bool,
    #[serde(skip)]
    pub verdicts: Vec<SubordinacyVerdict>,
}

pub fn weidmann_report(
    coeffs: &CoefficientSet,
    q_split: &QSplit,
    lambda_grid: &[f64],
    policy: &ClassifyPolicy,
) -> Result<WeidmannReport> {
    let mut rows = Vec::with_capacity(lambda_grid.len());
    let mut verdicts = Vec::with_capacity(lambda_grid.len());
    let mut inn = 0usize;
    for &lambda in lambda_grid {
        let verdict = classify_lambda(coeffs, lambda, policy);
        // h-monitor on a linear grid past the point where λ − q₂ > 0
        let h_grid: Vec<f64> = (1..=120).map(|i| 0.5 * i as f64).collect();
        let h_tail = match h_monitor(coeffs, &q_split.q2, lambda, &h_grid, policy.tol) {
            Ok(rep) => rep.log_h_variation_tail,
            Err(_) => f64::INFINITY,
        };
        if verdict.kind == VerdictKind::InN {
            inn += 1;
        }
        rows.push(WeidmannRow {
            lambda,
            verdict: verdict.kind,
            im_m_extrapolated: verdict.im_m_extrapolated,
            h_tail_variation: h_tail,
        });
        verdicts.push(verdict);
    }
    let fraction = if rows.is_empty() {
        0.0
    } else {
        inn as f64 / rows.len() as f64
    };
    Ok(WeidmannReport {
        fraction_inn: fraction,
        all_positive_inn: rows
            .iter()
            .all(|r| r.lambda <= 0.0 || r.verdict == VerdictKind::InN)
            && !rows.is_empty(),
        rows,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp_decay_operator() -> CoefficientSet {
        CoefficientSet::from_exprs(0.0, f64::INFINITY, "1", "exp(-x)", "1").unwrap()
    }

    #[test]
    fn hypothesis_integrals_exact_cases() {
        // p = r = 1, q = e⁻ˣ as q₁: defects vanish, ∫₁^∞ e⁻ˣ → e⁻¹
        let coeffs = exp_decay_operator();
        let split = QSplit::all_in_q1(&coeffs);
        let scans = hypotheses_scan(&coeffs, &split, 1.0, &[5.0, 10.0, 20.0, 40.0]).unwrap();
        assert_eq!(scans.len(), 4);
        assert_eq!(scans[3].l1_p_defect, 0.0);
        assert_eq!(scans[3].l1_r_defect, 0.0);
        assert_relative_eq!(scans[3].q1_l1, (-1.0f64).exp(), max_relative = 1e-8);
        // monotone in X with shrinking increments
        for w in scans.windows(2) {
            assert!(w[1].q1_l1 >= w[0].q1_l1);
        }
        assert!(scans[3].q1_l1 - scans[2].q1_l1 < scans[1].q1_l1 - scans[0].q1_l1);
    }

    #[test]
    fn p_defect_converges() {
        let coeffs =
            CoefficientSet::from_exprs(0.0, f64::INFINITY, "1 + exp(-x)", "0", "1").unwrap();
        let split = QSplit::all_in_q1(&coeffs);
        let scans = hypotheses_scan(&coeffs, &split, 1.0, &[10.0, 20.0, 40.0]).unwrap();
        // |1 − 1/p| = e⁻ˣ/(1+e⁻ˣ) ≤ e⁻ˣ: the tail flattens
        let d1 = scans[1].l1_p_defect - scans[0].l1_p_defect;
        let d2 = scans[2].l1_p_defect - scans[1].l1_p_defect;
        assert!(d2 < d1);
        assert!(scans[2].l1_p_defect < (-1.0f64).exp());
    }

    #[test]
    fn q2_tail_quantities() {
        // q₂ = (1+x)⁻¹: ∫_c^∞ |q₂′| = (1+c)⁻¹ and q₂(X) → 0
        let coeffs = CoefficientSet::free_half_line();
        let split = QSplit::new(
            Arc::new(|_| 0.0),
            Arc::new(|x: f64| 1.0 / (1.0 + x)),
            Arc::new(|x: f64| -1.0 / ((1.0 + x) * (1.0 + x))),
        );
        let scans = hypotheses_scan(&coeffs, &split, 1.0, &[100.0, 400.0]).unwrap();
        assert_relative_eq!(scans[1].q2_prime_l1, 0.5, max_relative = 1e-2);
        assert!(scans[1].q2_limit_estimate < 3e-3);
    }

    #[test]
    fn h_constant_for_free_sine() {
        // p = r = 1, q = 0, λ = 1: h = sin² + cos² = 1 exactly
        let coeffs = CoefficientSet::free_half_line();
        let q2: CoeffFn = Arc::new(|_| 0.0);
        let grid: Vec<f64> = (1..=100).map(|i| 0.4 * i as f64).collect();
        let rep = h_monitor(&coeffs, &q2, 1.0, &grid, 1e-12).unwrap();
        assert!(
            rep.log_h_variation_tail < 1e-12,
            "variation {}",
            rep.log_h_variation_tail
        );
        for h in &rep.traces[1].h_values {
            assert_relative_eq!(*h, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn h_tail_variation_small_past_decay() {
        let coeffs = exp_decay_operator();
        let q2: CoeffFn = Arc::new(|_| 0.0);
        let grid: Vec<f64> = (1..=120).map(|i| 0.5 * i as f64).collect(); // tail half starts at 30
        for lambda in [0.5, 1.0, 2.0] {
            let rep = h_monitor(&coeffs, &q2, lambda, &grid, 1e-11).unwrap();
            assert!(
                rep.log_h_variation_tail < 1e-3,
                "λ = {lambda}: variation {}",
                rep.log_h_variation_tail
            );
        }
    }

    #[test]
    fn nonpositive_h_is_rejected() {
        let coeffs = CoefficientSet::free_half_line();
        let q2: CoeffFn = Arc::new(|_| 2.0);
        let grid = [1.0, 2.0];
        assert!(matches!(
            h_monitor(&coeffs, &q2, 1.0, &grid, 1e-10),
            Err(Error::NonpositiveH { .. })
        ));
    }

    #[test]
    fn empty_grid_gives_empty_report() {
        let coeffs = exp_decay_operator();
        let split = QSplit::all_in_q1(&coeffs);
        let rep = weidmann_report(&coeffs, &split, &[], &ClassifyPolicy::default()).unwrap();
        assert!(rep.rows.is_empty());
        assert!(!rep.all_positive_inn);
    }
}
