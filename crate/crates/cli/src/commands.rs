//! Command execution: one worker pool, grid points as work items, results
//! merged in input order.

use crate::config::{load_operator, Command, RunConfig, TreeSource};
use crate::output::{fmt_f64, fmt_opt, Report};
use log::{debug, info};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use slspec_core::coeffs::{CoeffFn, CoefficientSet};
use slspec_core::expr::Expr;
use slspec_core::qtree::{
    band_spectrum, band_spectrum_numeric, decomposition_multiplicities, tree_to_sl,
};
use slspec_core::subordinacy::{classify_lambda, growth_checks, SubordinacyVerdict};
use slspec_core::weidmann::{hypotheses_scan, weidmann_report, QSplit};
use slspec_core::weyl::{m_function, MFunctionEstimate};
use std::sync::Arc;

pub struct Execution {
    pub report: Report,
    pub numerical_failures: usize,
}

pub fn execute(config: &RunConfig) -> Result<Execution, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0)) // 0 = number of cores
        .build()
        .map_err(|e| format!("thread pool: {e}"))?;
    debug!("worker pool with {} thread(s)", pool.current_num_threads());
    match config.command {
        Command::Mfun => mfun(config, &pool),
        Command::Scan => scan(config, &pool),
        Command::Weidmann => weidmann(config),
        Command::TreeBands => tree_bands(config),
        Command::TreeScan => tree_scan(config, &pool),
        Command::TreeDecompose => tree_decompose(config),
    }
}

fn operator_of(config: &RunConfig) -> Result<CoefficientSet, String> {
    load_operator(config.operator.as_ref().ok_or("operator missing")?)
}

fn tree_of(config: &RunConfig) -> Result<(slspec_core::qtree::TreeSpec, &TreeSource), String> {
    let src = config.tree.as_ref().ok_or("tree missing")?;
    Ok((src.build().map_err(|e| e.to_string())?, src))
}

fn grid_of(config: &RunConfig) -> Result<Vec<f64>, String> {
    Ok(config.grid.as_ref().ok_or("grid missing")?.points())
}

#[derive(Serialize)]
struct MfunRow {
    #[serde(flatten)]
    estimate: Option<MFunctionEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn mfun(config: &RunConfig, pool: &rayon::ThreadPool) -> Result<Execution, String> {
    let coeffs = operator_of(config)?;
    let lambdas = grid_of(config)?;
    let x_trunc = if coeffs.b().is_finite() {
        config.policy.xmax.min(0.99 * coeffs.b())
    } else {
        config.policy.xmax
    };
    let tol = config.policy.tol;
    let imz = config.policy.imz;
    let results: Vec<Result<MFunctionEstimate, String>> = pool.install(|| {
        lambdas
            .par_iter()
            .map(|&lam| {
                m_function(&coeffs, Complex64::new(lam, imz), x_trunc, tol)
                    .map_err(|e| e.to_string())
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut payload = Vec::new();
    let mut failures = 0;
    for res in results {
        match res {
            Ok(est) => {
                rows.push(vec![
                    fmt_f64(est.z.re),
                    fmt_f64(est.z.im),
                    fmt_f64(est.m.re),
                    fmt_f64(est.m.im),
                    fmt_f64(est.x_trunc),
                    fmt_f64(est.radius),
                    fmt_f64(est.bc_alpha),
                ]);
                payload.push(MfunRow {
                    estimate: Some(est),
                    error: None,
                });
            }
            Err(msg) => {
                failures += 1;
                rows.push(vec![
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    "nan".into(),
                    fmt_f64(x_trunc),
                    "nan".into(),
                    "nan".into(),
                ]);
                payload.push(MfunRow {
                    estimate: None,
                    error: Some(msg),
                });
            }
        }
    }
    Ok(Execution {
        report: Report::new(
            "mfun",
            vec!["re_z", "im_z", "re_m", "im_m", "X", "radius", "bc_alpha"],
            rows,
            &payload,
        ),
        numerical_failures: failures,
    })
}

#[derive(Serialize)]
struct ScanEvidence {
    verdict: SubordinacyVerdict,
    c3_slope: f64,
    bounded_u: bool,
}

fn scan(config: &RunConfig, pool: &rayon::ThreadPool) -> Result<Execution, String> {
    let coeffs = operator_of(config)?;
    let lambdas = grid_of(config)?;
    let policy = config.policy.classify_policy();
    let x_growth = if coeffs.b().is_finite() {
        config.policy.xmax.min(0.45 * coeffs.b())
    } else {
        config.policy.xmax
    };
    type ScanResult = (SubordinacyVerdict, Result<(f64, bool), String>);
    let results: Vec<ScanResult> = pool.install(|| {
        lambdas
            .par_iter()
            .map(|&lam| {
                let verdict = classify_lambda(&coeffs, lam, &policy);
                let growth = growth_checks(&coeffs, lam, x_growth, policy.tol)
                    .map(|g| (g.linear_growth_c3, g.bounded_u))
                    .map_err(|e| e.to_string());
                (verdict, growth)
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut payload = Vec::new();
    let mut failures = 0;
    for (verdict, growth) in results {
        let (c3, bounded) = match &growth {
            Ok((c3, b)) => (*c3, *b),
            Err(_) => {
                failures += 1;
                (f64::NAN, false)
            }
        };
        rows.push(vec![
            fmt_f64(verdict.lambda),
            verdict.kind.to_string(),
            fmt_opt(verdict.im_m_extrapolated),
            fmt_opt(verdict.jl_min),
            fmt_opt(verdict.jl_max),
            fmt_f64(c3),
        ]);
        payload.push(ScanEvidence {
            verdict,
            c3_slope: c3,
            bounded_u: bounded,
        });
    }
    Ok(Execution {
        report: Report::new(
            "scan",
            vec![
                "lambda",
                "verdict",
                "im_m_extrapolated",
                "jl_min",
                "jl_max",
                "c3_slope",
            ],
            rows,
            &payload,
        ),
        numerical_failures: failures,
    })
}

fn weidmann(config: &RunConfig) -> Result<Execution, String> {
    let coeffs = operator_of(config)?;
    let lambdas = grid_of(config)?;
    let policy = config.policy.classify_policy();
    let split = match (&config.q2, &config.q2_prime) {
        (None, _) => QSplit::all_in_q1(&coeffs),
        (Some(q2_src), q2p_src) => {
            let q2 = Expr::parse(q2_src).map_err(|e| e.to_string())?;
            let q2p = q2p_src
                .as_ref()
                .map(|s| Expr::parse(s).map_err(|e| e.to_string()))
                .transpose()?
                .ok_or("q2_prime is required when q2 is given")?;
            let cs = coeffs.clone();
            let q2_for_q1 = q2.clone();
            QSplit::new(
                Arc::new(move |x| {
                    cs.eval(x)
                        .map(|(_, q, _)| q - q2_for_q1.eval(x))
                        .unwrap_or(0.0)
                }),
                Arc::new(move |x| q2.eval(x)),
                Arc::new(move |x| q2p.eval(x)),
            )
        }
    };
    let cut = config.cut.unwrap_or(1.0);
    let x_list: Vec<f64> = (1..=5)
        .map(|k| cut + (config.policy.xmax - cut).max(1.0) * k as f64 / 5.0)
        .collect();
    let hypotheses = hypotheses_scan(&coeffs, &split, cut, &x_list).map_err(|e| e.to_string())?;
    let report = weidmann_report(&coeffs, &split, &lambdas, &policy).map_err(|e| e.to_string())?;
    info!(
        "weidmann: fraction InN = {:.3}, expected all λ > 0 InN: {}",
        report.fraction_inn,
        if report.all_positive_inn {
            "pass"
        } else {
            "fail"
        }
    );
    let mut rows = Vec::new();
    for row in &report.rows {
        rows.push(vec![
            fmt_f64(row.lambda),
            row.verdict.to_string(),
            fmt_opt(row.im_m_extrapolated),
            fmt_f64(row.h_tail_variation),
        ]);
    }
    #[derive(Serialize)]
    struct Payload<'a> {
        report: &'a slspec_core::weidmann::WeidmannReport,
        hypotheses: &'a [slspec_core::weidmann::WeidmannHypotheses],
    }
    Ok(Execution {
        report: Report::new(
            "weidmann",
            vec!["lambda", "verdict", "im_m_extrapolated", "h_tail_variation"],
            rows,
            &Payload {
                report: &report,
                hypotheses: &hypotheses,
            },
        ),
        numerical_failures: 0,
    })
}

fn tree_bands(config: &RunConfig) -> Result<Execution, String> {
    let (tree_src, lmax) = (
        config.tree.as_ref().ok_or("tree missing")?,
        config.lmax.ok_or("lmax missing")?,
    );
    let homogeneous = tree_src
        .homogeneous
        .ok_or("tree-bands needs a homogeneous tree ({\"homogeneous\": {\"b\": …, \"c\": …}})")?;
    let spec = band_spectrum(homogeneous.b, homogeneous.c, lmax).map_err(|e| e.to_string())?;
    // numeric cross-check of the edges at the library tolerance
    let lambda_hi = spec.bands.last().map(|&(_, hi)| hi * 1.05).unwrap_or(1.0);
    if let Ok(numeric) = band_spectrum_numeric(homogeneous.b, homogeneous.c, lambda_hi, 1e-12) {
        let worst = spec
            .bands
            .iter()
            .zip(numeric.bands.iter())
            .map(|(c, n)| (c.0 - n.0).abs().max((c.1 - n.1).abs()))
            .fold(0.0f64, f64::max);
        debug!("closed-form vs numeric band edges: worst deviation {worst:.3e}");
    }
    let mut rows = Vec::new();
    for (i, &(lo, hi)) in spec.bands.iter().enumerate() {
        let gap_to_next = spec.bands.get(i + 1).map(|&(next_lo, _)| next_lo - hi);
        rows.push(vec![
            (i + 1).to_string(),
            fmt_f64(lo),
            fmt_f64(hi),
            fmt_opt(gap_to_next),
            fmt_f64(spec.point_spectrum[i]),
            fmt_f64(spec.theta),
        ]);
    }
    Ok(Execution {
        report: Report::new(
            "tree-bands",
            vec![
                "l",
                "lower_edge",
                "upper_edge",
                "gap_to_next",
                "point_eigenvalue",
                "theta",
            ],
            rows,
            &spec,
        ),
        numerical_failures: 0,
    })
}

#[derive(Serialize)]
struct TreeScanEvidence {
    row: slspec_core::qtree::TreeScanRow,
    verdict: SubordinacyVerdict,
}

fn tree_scan(config: &RunConfig, pool: &rayon::ThreadPool) -> Result<Execution, String> {
    let (tree, _) = tree_of(config)?;
    let lambdas = grid_of(config)?;
    let policy = config.policy.classify_policy();
    let potential: Option<CoeffFn> = match &config.potential {
        None => None,
        Some(src) => {
            let expr = Expr::parse(src).map_err(|e| e.to_string())?;
            Some(Arc::new(move |x| expr.eval(x)))
        }
    };
    let coeffs = tree_to_sl(&tree, potential.as_ref()).map_err(|e| e.to_string())?;
    let x_growth = config
        .policy
        .xmax
        .min(0.45 * tree.height())
        .max(tree.min_edge());
    let results: Vec<Result<TreeScanEvidence, String>> = pool.install(|| {
        lambdas
            .par_iter()
            .map(|&lam| {
                let verdict = classify_lambda(&coeffs, lam, &policy);
                let growth =
                    growth_checks(&coeffs, lam, x_growth, policy.tol).map_err(|e| e.to_string())?;
                Ok(TreeScanEvidence {
                    row: slspec_core::qtree::TreeScanRow {
                        lambda: lam,
                        verdict: verdict.kind,
                        bounded_u: growth.bounded_u,
                        c3_slope: growth.linear_growth_c3,
                        im_m_extrapolated: verdict.im_m_extrapolated,
                    },
                    verdict,
                })
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut payload = Vec::new();
    let mut failures = 0;
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok(ev) => {
                rows.push(vec![
                    fmt_f64(ev.row.lambda),
                    ev.row.verdict.to_string(),
                    ev.row.bounded_u.to_string(),
                    fmt_f64(ev.row.c3_slope),
                    fmt_opt(ev.row.im_m_extrapolated),
                ]);
                payload.push(Some(ev));
            }
            Err(msg) => {
                failures += 1;
                log::warn!("λ = {}: {msg}", lambdas[i]);
                rows.push(vec![
                    fmt_f64(lambdas[i]),
                    "error".into(),
                    "false".into(),
                    "nan".into(),
                    "nan".into(),
                ]);
                payload.push(None);
            }
        }
    }
    Ok(Execution {
        report: Report::new(
            "tree-scan",
            vec![
                "lambda",
                "verdict",
                "bounded_u",
                "c3_slope",
                "im_m_extrapolated",
            ],
            rows,
            &payload,
        ),
        numerical_failures: failures,
    })
}

fn tree_decompose(config: &RunConfig) -> Result<Execution, String> {
    let (tree, _) = tree_of(config)?;
    let kmax = config.kmax.ok_or("kmax missing")?.min(tree.truncation_n());
    let entries = decomposition_multiplicities(&tree, kmax).map_err(|e| e.to_string())?;
    let rows = entries
        .iter()
        .map(|e| vec![e.k.to_string(), fmt_f64(e.t_k), e.multiplicity.to_string()])
        .collect();
    Ok(Execution {
        report: Report::new(
            "tree-decompose",
            vec!["k", "t_k", "multiplicity"],
            rows,
            &entries,
        ),
        numerical_failures: 0,
    })
}
