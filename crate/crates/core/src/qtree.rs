//! Radially symmetric quantum trees.
//!
//! A rooted metric tree with branching numbers bₙ at radii tₙ reduces, on
//! radial functions, to the half-line operator with p = r = g (the
//! branching function, the product of branching numbers inside radius t)
//! and Dirichlet condition at the root; a radial potential V enters as
//! q = g·V. The non-radial part decomposes into Dirichlet restrictions
//! beyond each vertex with combinatorial multiplicities.
//!
//! For the homogeneous tree (tₙ = c·n, bₙ = b) the one-period monodromy is
//! explicit and yields the Floquet exponent α(z); Re α = 0 carves out the
//! absolutely continuous bands in closed form.

use crate::coeffs::{CoeffFn, CoefficientSet, Segment};
use crate::error::Error;
use crate::mat2::{cos_sqrt, sinc_sqrt, Mat2};
use crate::subordinacy::{
    classify_lambda, growth_checks, ClassifyPolicy, SubordinacyVerdict, VerdictKind,
};
use crate::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Keep the deepest branching-function value inside f64 range.
const MAX_LOG_G: f64 = 690.0;

/// A rooted radially symmetric metric tree, materialized to finitely many
/// levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeSpec {
    /// Vertex radii, ascending, t₀ = 0.
    t: Vec<f64>,
    /// Branching numbers, b₀ = 1 and bₖ ≥ 2 for k ≥ 1.
    b: Vec<u32>,
    truncation_n: usize,
}

impl TreeSpec {
    pub fn new(t: Vec<f64>, b: Vec<u32>) -> Result<Self> {
        if t.len() != b.len() || t.len() < 2 {
            return Err(Error::InvalidTree(format!(
                "need matching t/b lists with at least two levels, got {} and {}",
                t.len(),
                b.len()
            )));
        }
        if t[0] != 0.0 {
            return Err(Error::InvalidTree(format!("t₀ must be 0, got {}", t[0])));
        }
        if !t.windows(2).all(|w| w[1] > w[0] && w[1].is_finite()) {
            return Err(Error::InvalidTree(
                "vertex radii must be strictly increasing and finite".into(),
            ));
        }
        if b[0] != 1 {
            return Err(Error::InvalidTree(format!(
                "regularity requires b₀ = 1, got {}",
                b[0]
            )));
        }
        if let Some((k, bk)) = b.iter().enumerate().skip(1).find(|(_, bk)| **bk < 2) {
            return Err(Error::InvalidTree(format!(
                "regularity requires b_k ≥ 2 for k ≥ 1; b_{k} = {bk}"
            )));
        }
        Self::finish(t, b)
    }

    fn finish(t: Vec<f64>, b: Vec<u32>) -> Result<Self> {
        let log_g: f64 = b.iter().map(|&bk| f64::from(bk).ln()).sum();
        if log_g > MAX_LOG_G {
            return Err(Error::InvalidTree(format!(
                "branching function overflows f64 at the deepest level (Σ ln b = {log_g:.1}); \
                 materialize fewer levels"
            )));
        }
        let truncation_n = t.len() - 1;
        Ok(TreeSpec { t, b, truncation_n })
    }

    /// Homogeneous tree tₙ = c·n, bₙ = b, materialized to `levels` cells.
    /// `b = 1` is admitted as the degenerate reduction to the free
    /// half-line (g ≡ 1).
    pub fn homogeneous(b: u32, c: f64, levels: usize) -> Result<Self> {
        if b < 1 || !(c > 0.0) || levels < 1 {
            return Err(Error::InvalidTree(format!(
                "need b ≥ 1, c > 0, levels ≥ 1; got b={b}, c={c}, levels={levels}"
            )));
        }
        let t: Vec<f64> = (0..=levels).map(|n| c * n as f64).collect();
        let mut bs = vec![1u32; levels + 1];
        for bk in bs.iter_mut().skip(1) {
            *bk = b;
        }
        Self::finish(t, bs)
    }

    pub fn radii(&self) -> &[f64] {
        &self.t
    }

    pub fn branching_numbers(&self) -> &[u32] {
        &self.b
    }

    pub fn truncation_n(&self) -> usize {
        self.truncation_n
    }

    pub fn height(&self) -> f64 {
        *self.t.last().unwrap()
    }

    /// Smallest materialized edge length (positive by validation).
    pub fn min_edge(&self) -> f64 {
        self.t
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// g_Γ(t) = ∏_{n: tₙ < t} bₙ. The strict inequality makes g left-continuous
/// at the vertices.
pub fn branching_function(tree: &TreeSpec, t: f64) -> Result<f64> {
    if !(0.0..=tree.height()).contains(&t) {
        return Err(Error::BeyondTruncation {
            t,
            t_max: tree.height(),
        });
    }
    let k = tree.t.partition_point(|&tn| tn < t);
    Ok(tree.b[..k].iter().map(|&bk| f64::from(bk)).product())
}

/// Reduce the tree (plus an optional radial potential) to half-line
/// coefficients: p = r = g_Γ on each cell, q = g_Γ·V. The Dirichlet
/// condition at the root is the m-function convention already used
/// throughout.
pub fn tree_to_sl(tree: &TreeSpec, potential: Option<&CoeffFn>) -> Result<CoefficientSet> {
    let mut segments = Vec::with_capacity(tree.truncation_n);
    let mut g = 1.0;
    for k in 0..tree.truncation_n {
        g *= f64::from(tree.b[k]);
        let (lo, hi) = (tree.t[k], tree.t[k + 1]);
        segments.push(match potential {
            None => Segment::constant(lo, hi, g, 0.0, g),
            Some(v) => {
                let v = v.clone();
                let gq = g;
                Segment::callable(
                    lo,
                    hi,
                    std::sync::Arc::new(move |_| g),
                    std::sync::Arc::new(move |x| gq * v(x)),
                    std::sync::Arc::new(move |_| g),
                )
            }
        });
    }
    CoefficientSet::new(0.0, tree.height(), segments)
}

/// One summand of the orthogonal decomposition of the full tree operator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecompositionEntry {
    pub k: usize,
    pub t_k: f64,
    /// b₀⋯b_{k−1}·(b_k − 1) copies of the restriction beyond t_k
    /// (k = 0 is the root summand, one copy of the whole operator).
    pub multiplicity: u128,
}

pub fn decomposition_multiplicities(
    tree: &TreeSpec,
    k_max: usize,
) -> Result<Vec<DecompositionEntry>> {
    if k_max > tree.truncation_n {
        return Err(Error::InvalidTree(format!(
            "k_max = {k_max} exceeds the materialized {} levels",
            tree.truncation_n
        )));
    }
    let mut out = vec![DecompositionEntry {
        k: 0,
        t_k: 0.0,
        multiplicity: 1,
    }];
    let mut prefix: u128 = 1;
    for k in 1..=k_max {
        prefix = prefix
            .checked_mul(u128::from(tree.b[k - 1]))
            .ok_or_else(|| Error::Overflow("decomposition multiplicity exceeds u128".into()))?;
        let mult = prefix
            .checked_mul(u128::from(tree.b[k]) - 1)
            .ok_or_else(|| Error::Overflow("decomposition multiplicity exceeds u128".into()))?;
        out.push(DecompositionEntry {
            k,
            t_k: tree.t[k],
            multiplicity: mult,
        });
    }
    Ok(out)
}

/// One-period monodromy of the homogeneous tree in the (u′, u) chart,
/// where the vertex condition divides u′ by b. Its determinant is 1/b;
/// conjugation by the chart map (u, pu′) ↦ (pu′/p, u) relates it to the
/// det-1 transfer matrix of the reduced coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Monodromy {
    pub m: Mat2,
    pub b: u32,
    pub c: f64,
    pub z: Complex64,
}

impl Monodromy {
    pub fn det(&self) -> Complex64 {
        self.m.det()
    }
}

pub fn homogeneous_transfer_matrix(b: u32, c: f64, z: Complex64) -> Monodromy {
    // free block over length c in the (u′, u) chart, entire in z
    let zc2 = z * (c * c);
    let cosv = cos_sqrt(zc2);
    let sincv = sinc_sqrt(zc2);
    let bf = f64::from(b);
    let m = Mat2::new(
        cosv / bf,
        -z * c * sincv / bf,
        Complex64::new(c, 0.0) * sincv,
        cosv,
    );
    Monodromy { m, b, c, z }
}

/// Floquet exponent α(z) with Re α ≥ 0; Re α = 0 exactly on the a.c.
/// bands. The branch is chosen through the half-trace
/// D = (1+b)/(2√b)·cos(c√z).
pub fn floquet_exponent(b: u32, c: f64, z: Complex64) -> Complex64 {
    let bf = f64::from(b);
    let pref = (1.0 + bf) / (2.0 * bf.sqrt());
    let d = cos_sqrt(z * (c * c)) * pref;
    if z.im == 0.0 && d.im == 0.0 {
        let dr = d.re;
        if dr.abs() <= 1.0 {
            return Complex64::new(0.0, dr.acos());
        }
        let alpha = dr.abs().acosh();
        return if dr > 0.0 {
            Complex64::new(alpha, 0.0)
        } else {
            Complex64::new(alpha, PI)
        };
    }
    let mut w = d + (d * d - Complex64::new(1.0, 0.0)).sqrt();
    if w.norm() < 1.0 {
        w = w.inv();
    }
    let mut alpha = w.ln();
    if alpha.re < 0.0 {
        alpha = -alpha;
    }
    alpha
}

/// Band/gap structure of the homogeneous tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandSpectrum {
    /// θ = arccos(2/(√b + 1/√b)), in [0, π/2).
    pub theta: f64,
    /// Closed a.c. bands [((π(l−1)+θ)/c)², ((πl−θ)/c)²], l = 1….
    pub bands: Vec<(f64, f64)>,
    /// (πl/c)², each in an open gap when b > 1.
    pub point_spectrum: Vec<f64>,
    pub b: u32,
    pub c: f64,
    pub l_max: usize,
}

impl BandSpectrum {
    /// Locate λ: `Some(l)` if inside the closed band l (1-based).
    pub fn band_containing(&self, lambda: f64) -> Option<usize> {
        self.bands
            .iter()
            .position(|&(lo, hi)| lambda >= lo && lambda <= hi)
            .map(|i| i + 1)
    }
}

pub fn band_spectrum(b: u32, c: f64, l_max: usize) -> Result<BandSpectrum> {
    if b < 1 || !(c > 0.0) || l_max < 1 {
        return Err(Error::InvalidTree(format!(
            "need b ≥ 1, c > 0, l_max ≥ 1; got b={b}, c={c}, l_max={l_max}"
        )));
    }
    let bf = f64::from(b);
    let theta = (2.0 / (bf.sqrt() + 1.0 / bf.sqrt())).acos();
    let bands = (1..=l_max)
        .map(|l| {
            let lo = (PI * (l as f64 - 1.0) + theta) / c;
            let hi = (PI * l as f64 - theta) / c;
            (lo * lo, hi * hi)
        })
        .collect();
    let point_spectrum = (1..=l_max).map(|l| (PI * l as f64 / c).powi(2)).collect();
    Ok(BandSpectrum {
        theta,
        bands,
        point_spectrum,
        b,
        c,
        l_max,
    })
}

/// Band edges located numerically as roots of |cos(c√λ)| = 2√b/(1+b) by
/// bisection on each monotone half-arc of the cosine. For b = 1 the
/// equation degenerates to tangency points at c√λ = lπ, which are taken
/// exactly.
pub fn band_spectrum_numeric(b: u32, c: f64, lambda_hi: f64, tol: f64) -> Result<BandSpectrum> {
    if b < 1 || !(c > 0.0) || !(lambda_hi > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidTree(format!(
            "need b ≥ 1, c > 0, lambda_hi > 0, tol > 0; got b={b}, c={c}, lambda_hi={lambda_hi}"
        )));
    }
    let bf = f64::from(b);
    let target = 2.0 * bf.sqrt() / (1.0 + bf);
    let t_hi = c * lambda_hi.sqrt();
    let mut roots: Vec<f64> = Vec::new();
    if b == 1 {
        // tangency: |cos| touches 1 at every multiple of π
        let mut l = 0usize;
        loop {
            let t = PI * l as f64;
            if t > t_hi {
                break;
            }
            // interior tangency points are double edges (bands touch)
            if l > 0 {
                roots.push(t);
                roots.push(t);
            } else {
                roots.push(t);
            }
            l += 1;
        }
    } else {
        let f = |t: f64| t.cos().abs() - target;
        let mut k = 0usize;
        loop {
            let arc_lo = 0.5 * PI * k as f64;
            let arc_hi = 0.5 * PI * (k + 1) as f64;
            if arc_lo > t_hi {
                break;
            }
            let (flo, fhi) = (f(arc_lo), f(arc_hi));
            if flo * fhi < 0.0 {
                let (mut lo, mut hi) = (arc_lo, arc_hi);
                let mut glo = flo;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let gm = f(mid);
                    if gm == 0.0 || hi - lo < 1e-15 {
                        lo = mid;
                        break;
                    }
                    if glo * gm < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        glo = gm;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            k += 1;
        }
    }
    let theta = if b == 1 {
        0.0
    } else {
        roots.first().copied().unwrap_or(0.0)
    };
    let mut bands = Vec::new();
    let mut it = roots.chunks_exact(2);
    for pair in &mut it {
        let (lo, hi) = (pair[0] / c, pair[1] / c);
        bands.push((lo * lo, hi * hi));
    }
    let l_max = bands.len().max(1);
    let point_spectrum = (1..=bands.len())
        .map(|l| (PI * l as f64 / c).powi(2))
        .collect();
    Ok(BandSpectrum {
        theta,
        bands,
        point_spectrum,
        b,
        c,
        l_max,
    })
}

/// Per-λ result of the tree a.c. scan: subordinacy verdict plus the
/// boundedness of √g_Γ·u = √r·u, the quantity the tree criterion tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeScanRow {
    pub lambda: f64,
    pub verdict: VerdictKind,
    pub bounded_u: bool,
    pub c3_slope: f64,
    pub im_m_extrapolated: Option<f64>,
}

/// Classify each λ on the reduced tree operator and measure √r·u
/// boundedness; the truncation and m-ladders are capped by the
/// materialized height automatically.
pub fn tree_ac_scan(
    tree: &TreeSpec,
    potential: Option<&CoeffFn>,
    lambda_grid: &[f64],
    policy: &ClassifyPolicy,
) -> Result<Vec<(TreeScanRow, SubordinacyVerdict)>> {
    let coeffs = tree_to_sl(tree, potential)?;
    let x_growth = policy
        .x_grid
        .last()
        .copied()
        .unwrap_or(64.0)
        .min(0.45 * tree.height())
        .max(tree.min_edge());
    let mut out = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let verdict = classify_lambda(&coeffs, lambda, policy);
        let growth = growth_checks(&coeffs, lambda, x_growth, policy.tol)?;
        let row = TreeScanRow {
            lambda,
            verdict: verdict.kind,
            bounded_u: growth.bounded_u,
            c3_slope: growth.linear_growth_c3,
            im_m_extrapolated: verdict.im_m_extrapolated,
        };
        out.push((row, verdict));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagate::transfer_matrix;
    use approx::assert_relative_eq;

    #[test]
    fn branching_function_products() {
        let tree = TreeSpec::homogeneous(2, 1.0, 8).unwrap();
        assert_eq!(branching_function(&tree, 0.5).unwrap(), 1.0);
        assert_eq!(branching_function(&tree, 1.5).unwrap(), 2.0);
        assert_eq!(branching_function(&tree, 2.5).unwrap(), 4.0);
        // left-continuous at vertices: t₁ = 1 not counted at t = 1
        assert_eq!(branching_function(&tree, 1.0).unwrap(), 1.0);
        assert!(matches!(
            branching_function(&tree, 9.0),
            Err(Error::BeyondTruncation { .. })
        ));
        // mixed tree
        let tree = TreeSpec::new(vec![0.0, 1.0, 2.5], vec![1, 3, 2]).unwrap();
        assert_eq!(branching_function(&tree, 2.0).unwrap(), 3.0);
        assert_eq!(branching_function(&tree, 2.5).unwrap(), 3.0);
    }

    #[test]
    fn regularity_is_validated() {
        assert!(TreeSpec::new(vec![0.0, 1.0], vec![1, 1]).is_err());
        assert!(TreeSpec::new(vec![0.0, 1.0], vec![2, 2]).is_err());
        assert!(TreeSpec::new(vec![0.1, 1.0], vec![1, 2]).is_err());
        assert!(TreeSpec::new(vec![0.0, 0.0], vec![1, 2]).is_err());
        // deep homogeneous trees that would overflow g are rejected
        assert!(TreeSpec::homogeneous(2, 1.0, 1200).is_err());
        assert!(TreeSpec::homogeneous(2, 1.0, 900).is_ok());
    }

    #[test]
    fn tree_reduction_coefficients() {
        let tree = TreeSpec::homogeneous(2, 1.0, 6).unwrap();
        let coeffs = tree_to_sl(&tree, None).unwrap();
        for n in 0..6 {
            let g = 2f64.powi(n);
            let (p, q, r) = coeffs.eval(n as f64 + 0.5).unwrap();
            assert_eq!((p, q, r), (g, 0.0, g));
        }
        // degenerate b = 1 reduces to the free half-line
        let line = TreeSpec::homogeneous(1, 1.0, 6).unwrap();
        let coeffs = tree_to_sl(&line, None).unwrap();
        assert_eq!(coeffs.eval(3.3).unwrap(), (1.0, 0.0, 1.0));
        // radial potential enters as q = g·V
        let v: CoeffFn = std::sync::Arc::new(|x: f64| (-x).exp());
        let tree = TreeSpec::homogeneous(2, 1.0, 6).unwrap();
        let coeffs = tree_to_sl(&tree, Some(&v)).unwrap();
        let (p, q, r) = coeffs.eval(2.5).unwrap();
        assert_eq!(p, 4.0);
        assert_eq!(r, 4.0);
        assert_relative_eq!(q, 4.0 * (-2.5f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn decomposition_counts() {
        let tree = TreeSpec::homogeneous(2, 1.0, 8).unwrap();
        let entries = decomposition_multiplicities(&tree, 3).unwrap();
        let mults: Vec<u128> = entries.iter().map(|e| e.multiplicity).collect();
        assert_eq!(mults, vec![1, 1, 2, 4]);
        let tree = TreeSpec::new(vec![0.0, 1.0, 2.0], vec![1, 3, 2]).unwrap();
        let entries = decomposition_multiplicities(&tree, 2).unwrap();
        assert_eq!(entries[1].multiplicity, 2); // 1·(3−1)
        assert_eq!(entries[2].multiplicity, 3); // 1·3·(2−1)
    }

    #[test]
    fn decomposition_telescopes() {
        // 1 + Σ_{k≤K} b₀⋯b_{k−1}(b_k − 1) = ∏_{n≤K} bₙ
        let tree = TreeSpec::new(vec![0.0, 0.5, 1.5, 2.0, 3.7], vec![1, 3, 2, 5, 4]).unwrap();
        for k_max in 1..=4usize {
            let entries = decomposition_multiplicities(&tree, k_max).unwrap();
            let total: u128 = entries.iter().map(|e| e.multiplicity).sum();
            let product: u128 = tree.branching_numbers()[..=k_max]
                .iter()
                .map(|&b| u128::from(b))
                .product();
            assert_eq!(total, product);
        }
    }

    #[test]
    fn monodromy_spot_values() {
        // b=2, c=1, z=π²: M = [[−1/2, 0], [0, −1]]
        let z = Complex64::new(PI * PI, 0.0);
        let m = homogeneous_transfer_matrix(2, 1.0, z);
        assert_relative_eq!(m.m.a.re, -0.5, max_relative = 1e-12);
        assert!(m.m.b.norm() < 1e-12);
        assert!(m.m.c.norm() < 1e-12);
        assert_relative_eq!(m.m.d.re, -1.0, max_relative = 1e-12);
        // det M = 1/b for several z
        for z in [
            Complex64::new(3.0, 0.0),
            Complex64::new(-2.0, 0.4),
            Complex64::new(0.0, 0.0),
        ] {
            for b in [1u32, 2, 3, 5] {
                let m = homogeneous_transfer_matrix(b, 0.7, z);
                assert_relative_eq!(m.det().re, 1.0 / f64::from(b), max_relative = 1e-12);
                assert!(m.det().im.abs() < 1e-12);
            }
        }
        // b = 1 is the plain free rotation
        let z = Complex64::new(4.0, 0.0);
        let m = homogeneous_transfer_matrix(1, 1.0, z);
        assert_relative_eq!(m.m.a.re, (2.0f64).cos(), max_relative = 1e-12);
        assert_relative_eq!(m.m.c.re, (2.0f64).sin() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn monodromy_matches_reduced_transfer_matrix() {
        // conjugate the (u, pu′) transfer over one period by the chart map
        // (u, w) ↦ (w/p, u) on each side; p jumps from 1 to b across the
        // period's closing vertex
        let b = 2u32;
        let c = 1.0;
        let tree = TreeSpec::homogeneous(b, c, 4).unwrap();
        let coeffs = tree_to_sl(&tree, None).unwrap();
        for z in [
            Complex64::new(4.0, 0.0),
            Complex64::new(9.87, 0.0),
            Complex64::new(1.0, 0.5),
        ] {
            let t_sl = transfer_matrix(&coeffs, z, 0.0, c, 1e-12).unwrap();
            let bf = f64::from(b);
            // S(p) = [[0, 1/p], [1, 0]] maps (u, w) to (u′, u)
            let s_b = Mat2::new(
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0 / bf, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            );
            let s_1_inv = Mat2::new(
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            );
            let conj = s_b.mul(&t_sl.entries).mul(&s_1_inv);
            let m = homogeneous_transfer_matrix(b, c, z).m;
            for (x, y) in [(conj.a, m.a), (conj.b, m.b), (conj.c, m.c), (conj.d, m.d)] {
                assert!((x - y).norm() < 1e-10, "{x} vs {y} at z = {z}");
            }
        }
    }

    #[test]
    fn floquet_spot_values() {
        // α(π²) = ln √2 for b = 2, c = 1
        let alpha = floquet_exponent(2, 1.0, Complex64::new(PI * PI, 0.0));
        assert_relative_eq!(alpha.re, 0.5 * (2.0f64).ln(), epsilon = 1e-12);
        assert_relative_eq!(alpha.re, 0.346574, epsilon = 1e-6);
        // band interior: Re α = 0 exactly
        let alpha = floquet_exponent(2, 1.0, Complex64::new(4.0, 0.0));
        assert_eq!(alpha.re, 0.0);
        // free line: pure phase for z > 0
        let alpha = floquet_exponent(1, 1.0, Complex64::new(2.25, 0.0));
        assert_eq!(alpha.re, 0.0);
        assert_relative_eq!(alpha.im, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn floquet_multiplier_matches_monodromy_eigenvalue() {
        // |larger eigenvalue of √b·M(z)| = e^{Re α(z)}
        for b in [2u32, 3] {
            for lam in [0.5, 4.0, 9.0, 12.0, 20.0] {
                let z = Complex64::new(lam, 0.0);
                let m = homogeneous_transfer_matrix(b, 1.0, z);
                let scaled = m.m.scale(Complex64::new(f64::from(b).sqrt(), 0.0));
                let (big, _) = scaled.eigenvalues();
                let alpha = floquet_exponent(b, 1.0, z);
                assert_relative_eq!(big.norm().ln(), alpha.re, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn closed_form_bands_b2() {
        let spec = band_spectrum(2, 1.0, 3).unwrap();
        assert_relative_eq!(spec.theta, 0.339837, epsilon = 1e-6);
        assert_relative_eq!(
            spec.theta,
            (2.0 * 2f64.sqrt() / 3.0).acos(),
            max_relative = 1e-14
        );
        assert_relative_eq!(spec.bands[0].0, 0.115489, epsilon = 1e-6);
        assert_relative_eq!(
            spec.bands[0].1,
            (PI - spec.theta).powi(2),
            max_relative = 1e-15
        );
        assert_relative_eq!(spec.bands[0].1, 7.849835, epsilon = 1e-5);
        assert_relative_eq!(spec.bands[1].0, 12.120351, epsilon = 1e-6);
        // π² sits in the first gap, between the point eigenvalues' band
        let pi2 = PI * PI;
        assert!(spec.bands[0].1 < pi2 && pi2 < spec.bands[1].0);
        assert_relative_eq!(spec.point_spectrum[0], pi2, max_relative = 1e-14);
        // gaps are nonempty for b > 1
        for w in spec.bands.windows(2) {
            assert!(w[0].1 < w[1].0);
        }
    }

    #[test]
    fn b1_bands_tile() {
        let spec = band_spectrum(1, 1.0, 5).unwrap();
        assert_eq!(spec.theta, 0.0);
        for (l, &(lo, hi)) in spec.bands.iter().enumerate() {
            let l = l + 1;
            assert_relative_eq!(
                lo,
                (PI * (l as f64 - 1.0)).powi(2),
                max_relative = 1e-13,
                epsilon = 1e-13
            );
            assert_relative_eq!(hi, (PI * l as f64).powi(2), max_relative = 1e-13);
        }
        // consecutive bands share endpoints
        for w in spec.bands.windows(2) {
            assert_relative_eq!(w[0].1, w[1].0, max_relative = 1e-14);
        }
    }

    #[test]
    fn band_scaling_in_c() {
        let unit = band_spectrum(3, 1.0, 4).unwrap();
        let scaled = band_spectrum(3, 2.0, 4).unwrap();
        for (u, s) in unit.bands.iter().zip(scaled.bands.iter()) {
            assert_relative_eq!(s.0, u.0 / 4.0, max_relative = 1e-14);
            assert_relative_eq!(s.1, u.1 / 4.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn numeric_bands_match_closed_form() {
        for b in [2u32, 3, 4] {
            for c in [0.5, 1.0, 2.0] {
                let closed = band_spectrum(b, c, 5).unwrap();
                let lambda_hi = closed.bands[4].1 * 1.02;
                let numeric = band_spectrum_numeric(b, c, lambda_hi, 1e-12).unwrap();
                assert!(numeric.bands.len() >= 5, "b={b}, c={c}");
                for l in 0..5 {
                    assert_relative_eq!(numeric.bands[l].0, closed.bands[l].0, epsilon = 1e-8);
                    assert_relative_eq!(numeric.bands[l].1, closed.bands[l].1, epsilon = 1e-8);
                }
            }
        }
        let numeric = band_spectrum_numeric(2, 1.0, 260.0, 1e-12).unwrap();
        // numeric agreement of α's sign structure: inside bands Re α = 0,
        // inside gaps Re α > 0
        for (lo, hi) in numeric.bands.iter().take(3) {
            let mid = 0.5 * (lo + hi);
            assert_eq!(floquet_exponent(2, 1.0, Complex64::new(mid, 0.0)).re, 0.0);
        }
        for w in numeric.bands.windows(2).take(3) {
            let gap_mid = 0.5 * (w[0].1 + w[1].0);
            assert!(floquet_exponent(2, 1.0, Complex64::new(gap_mid, 0.0)).re > 0.0);
        }
        // b = 1 tangency edges are exact multiples of π squared
        let numeric = band_spectrum_numeric(1, 1.0, 100.0, 1e-12).unwrap();
        assert_relative_eq!(numeric.bands[1].0, PI * PI, max_relative = 1e-14);
    }
}
