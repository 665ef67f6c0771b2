//! Cross-module invariants: classification against the closed-form band
//! structure, Floquet growth rates against propagated solutions, and the
//! consistency chain between the boundedness criteria and the verdicts.

use num_complex::Complex64;
use slspec_core::coeffs::CoefficientSet;
use slspec_core::propagate::{propagate, SolutionState};
use slspec_core::qtree::{
    band_spectrum, floquet_exponent, homogeneous_transfer_matrix, tree_to_sl, TreeSpec,
};
use slspec_core::subordinacy::{
    classify_lambda, criteria_scan, growth_checks, ClassifyPolicy, VerdictKind,
};
use slspec_core::weidmann::h_monitor;
use slspec_core::weyl::{herglotz_scan, m_function, m_function_with_bc, TruncationBc};
use std::f64::consts::PI;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tree_b2() -> CoefficientSet {
    tree_to_sl(&TreeSpec::homogeneous(2, 1.0, 900).unwrap(), None).unwrap()
}

/// Independent Floquet oracle for the tree m-function: the square-summable
/// solution is the eigenvector of the one-period monodromy for its
/// smaller-modulus eigenvalue, and m = u′(0)/u(0) reads off that
/// eigenvector in the (u′, u) chart (p = 1 on the first cell).
fn tree_m_oracle(b: u32, c: f64, z: Complex64) -> Complex64 {
    let m = homogeneous_transfer_matrix(b, c, z).m;
    let (big, small) = m.eigenvalues();
    debug_assert!(small.norm() < big.norm());
    // eigenvector (v1, v2) of [[A, B], [C, D]] for μ: (B, μ − A)
    let v1 = m.b;
    let v2 = small - m.a;
    v1 / v2
}

#[test]
fn truncated_m_matches_the_floquet_oracle() {
    let coeffs = tree_b2();
    for z in [
        c64(4.0, 0.1),
        c64(2.0, 0.5),
        c64(9.0, 0.05),
        c64(-1.0, 0.2),
        c64(11.0, 1.0),
    ] {
        let est = m_function(&coeffs, z, 120.0, 1e-11).unwrap();
        let oracle = tree_m_oracle(2, 1.0, z);
        let dev = (est.m - oracle).norm();
        assert!(
            dev <= est.radius + 1e-8 * oracle.norm().max(1.0),
            "z = {z}: truncated m = {} vs Floquet oracle {} (dev {dev:.3e}, radius {:.3e})",
            est.m,
            oracle,
            est.radius
        );
        // the oracle must itself be Herglotz in the upper half-plane
        assert!(oracle.im > 0.0);
    }
}

#[test]
fn band_gap_dichotomy_matches_closed_form() {
    let coeffs = tree_b2();
    let spec = band_spectrum(2, 1.0, 3).unwrap();
    let policy = ClassifyPolicy::default().with_grid_up_to(256.0);
    // interior samples of the first three bands
    for &(lo, hi) in &spec.bands {
        for frac in [0.25, 0.5, 0.75] {
            let lambda = lo + frac * (hi - lo);
            let v = classify_lambda(&coeffs, lambda, &policy);
            assert_eq!(
                v.kind,
                VerdictKind::InN,
                "band interior λ = {lambda}: {:?} notes {:?}",
                v.kind,
                v.notes
            );
        }
    }
    // gap samples, avoiding the embedded point eigenvalues (πl)²
    for w in spec.bands.windows(2) {
        let (gap_lo, gap_hi) = (w[0].1, w[1].0);
        for frac in [0.15, 0.85] {
            let lambda = gap_lo + frac * (gap_hi - gap_lo);
            let v = classify_lambda(&coeffs, lambda, &policy);
            assert_ne!(v.kind, VerdictKind::InN, "gap λ = {lambda} classified InN");
        }
    }
}

#[test]
fn gap_solution_grows_at_the_floquet_rate() {
    // for gap λ the generic solution obeys √g(x)|u(x)| ~ e^{Re α · x}:
    // the per-period growth ratio converges to e^{Re α} within 1%
    let coeffs = tree_b2();
    let lambda = 9.0;
    let alpha = floquet_exponent(2, 1.0, c64(lambda, 0.0)).re;
    assert!(alpha > 0.0);
    let z = c64(lambda, 0.0);
    let mut st = SolutionState::at_left(&coeffs, z, c64(0.0, 0.0), c64(1.0, 0.0));
    let mut values = Vec::new();
    for n in 0..30 {
        let x = n as f64 + 0.5;
        st = propagate(&coeffs, &st, x, 1e-12).unwrap();
        let g = 2f64.powi(n); // g on cell [n, n+1)
        values.push(g.sqrt() * st.u.norm());
    }
    for n in 20..29 {
        let ratio = values[n + 1] / values[n];
        assert!(
            (ratio / alpha.exp() - 1.0).abs() < 0.01,
            "period ratio {ratio} vs e^α = {} at n = {n}",
            alpha.exp()
        );
    }
}

#[test]
fn inn_verdicts_come_with_bounded_growth() {
    // InN ⇒ both fundamental solutions bounded (in the √r sense) with
    // positive linear norm growth
    let policy = ClassifyPolicy::default().with_grid_up_to(128.0);
    let cases: Vec<(CoefficientSet, f64)> = vec![
        (CoefficientSet::free_half_line(), 1.0),
        (tree_b2(), 4.0),
        (
            CoefficientSet::from_exprs(0.0, f64::INFINITY, "1", "exp(-x)", "1").unwrap(),
            1.0,
        ),
    ];
    for (coeffs, lambda) in cases {
        let v = classify_lambda(&coeffs, lambda, &policy);
        assert_eq!(v.kind, VerdictKind::InN);
        let g = growth_checks(&coeffs, lambda, 64.0, 1e-10).unwrap();
        assert!(g.bounded_u && g.bounded_du, "λ = {lambda}: {:?}", g);
        for sol in &g.per_solution {
            assert!(sol.c3_slope > 0.0);
        }
    }
}

#[test]
fn tree_criteria_window_values() {
    // r = p = g ⇒ r/p ≡ 1, and r₊/r₋ over a unit-radius window spans at
    // most two vertices, so γ ≤ b²
    let coeffs = tree_b2();
    let lambda = 4.0;
    let rep = criteria_scan(&coeffs, lambda, 2.0, 12.0, 0.25).unwrap();
    assert!(rep.gamma_sup <= 4.0 + 1e-12, "γ_sup = {}", rep.gamma_sup);
    assert!(
        rep.gamma_sup >= 4.0 - 1e-12,
        "windows straddling two vertices reach b²"
    );
    assert!((rep.i_minus - 1.0).abs() < 1e-12);
    assert!((rep.q_term_sup - 2.0 * lambda * lambda).abs() < 1e-10);
    assert!(rep.r_monotone);
}

#[test]
fn gap_lambda_fails_boundedness() {
    let coeffs = tree_b2();
    let g = growth_checks(&coeffs, 9.0, 64.0, 1e-10).unwrap();
    assert!(!g.bounded_u, "gap λ must have an unbounded √r·u direction");
}

#[test]
fn weidmann_consistency_chain() {
    // bounded h for both solutions + the Stolz-type coefficient conditions
    // + a stabilized Im m together certify InN
    let coeffs = CoefficientSet::from_exprs(0.0, f64::INFINITY, "1", "exp(-x)", "1").unwrap();
    let lambda = 1.0;
    let grid: Vec<f64> = (1..=100).map(|i| 0.6 * i as f64).collect();
    let q2: slspec_core::coeffs::CoeffFn = std::sync::Arc::new(|_| 0.0);
    let h = h_monitor(&coeffs, &q2, lambda, &grid, 1e-11).unwrap();
    assert!(h.log_h_variation_tail < 1e-3);

    let crit = criteria_scan(&coeffs, lambda, 2.0, 20.0, 1.0).unwrap();
    assert!(crit.gamma_sup < 1.0 + 1e-12);
    assert!(crit.i_minus > 0.9);
    assert!(crit.qminus_sup < 1e-12); // q ≥ 0 here
    assert!(crit.q_term_sup.is_finite());

    let v = classify_lambda(
        &coeffs,
        lambda,
        &ClassifyPolicy::default().with_grid_up_to(256.0),
    );
    assert_eq!(v.kind, VerdictKind::InN);
}

#[test]
fn herglotz_scan_on_the_tree() {
    let coeffs = tree_b2();
    let grid = [c64(0.5, 0.1), c64(1.0, 1.0), c64(2.0, 0.5)];
    let report = herglotz_scan(&coeffs, &grid, 60.0).unwrap();
    for e in &report.entries {
        assert!(e.m.im > 0.0, "Im m = {} at z = {}", e.m.im, e.z);
    }
    assert!(report.min_margin.unwrap() > 0.0);
}

#[test]
fn nested_disks_and_bc_coherence_on_the_tree() {
    let coeffs = tree_b2();
    let z = c64(4.0, 0.05);
    let e1 = m_function(&coeffs, z, 40.0, 1e-10).unwrap();
    let e2 = m_function(&coeffs, z, 80.0, 1e-10).unwrap();
    assert!((e2.m - e1.m).norm() <= e1.radius * (1.0 + 1e-9));
    assert!(e2.radius <= e1.radius);
    let n1 = m_function_with_bc(&coeffs, z, 40.0, 1e-10, TruncationBc::Neumann).unwrap();
    assert!((n1.m - e1.m).norm() <= 2.0 * e1.radius * (1.0 + 1e-9));
}

#[test]
fn point_spectrum_cell_decay_on_other_trees() {
    // the second point eigenvalue (2π)² and a b = 3 tree: increments decay
    // by 1/b per period within 10%
    for (b, l) in [(2u32, 2usize), (3, 1)] {
        let tree = TreeSpec::homogeneous(b, 1.0, 64).unwrap();
        let coeffs = tree_to_sl(&tree, None).unwrap();
        let lambda = (PI * l as f64).powi(2);
        let z = c64(lambda, 0.0);
        let mut st = SolutionState::at_left(&coeffs, z, c64(0.0, 0.0), c64(1.0, 0.0));
        let mut prev = 0.0;
        let mut incs = Vec::new();
        for n in 1..=10 {
            st = propagate(&coeffs, &st, n as f64, 1e-11).unwrap();
            incs.push(st.norm_sq - prev);
            prev = st.norm_sq;
        }
        let expect = 1.0 / f64::from(b);
        for w in incs.windows(2) {
            let ratio = w[1] / w[0];
            assert!(
                (ratio - expect).abs() <= 0.1 * expect,
                "b = {b}, λ = (π{l})²: ratio {ratio} vs {expect}"
            );
        }
    }
}
