//! Adaptive Simpson quadrature and coefficient-window integrals.

use crate::coeffs::{CoefficientSet, SegmentKind};
use crate::error::Error;
use crate::Result;

/// Adaptive Simpson on [lo, hi] with absolute/relative tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> f64 {
    if lo == hi {
        return 0.0;
    }
    let mid = 0.5 * (lo + hi);
    let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    simpson_rec(f, lo, hi, flo, fmid, fhi, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let lmid = 0.5 * (lo + mid);
    let rmid = 0.5 * (mid + hi);
    let (flm, frm) = (f(lmid), f(rmid));
    let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol * (1.0 + (left + right).abs()) {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, lo, mid, flo, flm, fmid, left, tol * 0.5, depth - 1)
            + simpson_rec(f, mid, hi, fmid, frm, fhi, right, tol * 0.5, depth - 1)
    }
}

/// ∫ g(p(y), q(y), r(y)) dy over [lo, hi], split at segment boundaries so
/// constant segments contribute exactly.
pub fn integrate_window<G: Fn(f64, f64, f64) -> f64>(
    coeffs: &CoefficientSet,
    lo: f64,
    hi: f64,
    g: &G,
    tol: f64,
) -> Result<f64> {
    check_window(coeffs, lo, hi)?;
    let mut cuts = vec![lo];
    cuts.extend(coeffs.boundaries_in(lo, hi));
    cuts.push(hi);
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (x0, x1) = (pair[0], pair[1]);
        if x1 <= x0 {
            continue;
        }
        let seg = &coeffs.segments()[coeffs.segment_index(0.5 * (x0 + x1))];
        total += match &seg.kind {
            SegmentKind::Constant { p, q, r } => g(*p, *q, *r) * (x1 - x0),
            SegmentKind::Callable { .. } => {
                let f = |y: f64| {
                    let (p, q, r) = seg.values_at(y);
                    g(p, q, r)
                };
                adaptive_simpson(&f, x0, x1, tol)
            }
        };
    }
    Ok(total)
}

/// (inf, sup) of r over [lo, hi]; exact on constant segments, sampled
/// densely on callable ones.
pub fn r_extrema(coeffs: &CoefficientSet, lo: f64, hi: f64) -> Result<(f64, f64)> {
    check_window(coeffs, lo, hi)?;
    let mut cuts = vec![lo];
    cuts.extend(coeffs.boundaries_in(lo, hi));
    cuts.push(hi);
    let mut r_min = f64::INFINITY;
    let mut r_max = f64::NEG_INFINITY;
    for pair in cuts.windows(2) {
        let (x0, x1) = (pair[0], pair[1]);
        if x1 <= x0 {
            continue;
        }
        let seg = &coeffs.segments()[coeffs.segment_index(0.5 * (x0 + x1))];
        match &seg.kind {
            SegmentKind::Constant { r, .. } => {
                r_min = r_min.min(*r);
                r_max = r_max.max(*r);
            }
            SegmentKind::Callable { .. } => {
                let n = 256;
                for i in 0..=n {
                    let x = x0 + (x1 - x0) * i as f64 / n as f64;
                    let (_, _, r) = seg.values_at(x);
                    r_min = r_min.min(r);
                    r_max = r_max.max(r);
                }
            }
        }
    }
    Ok((r_min, r_max))
}

fn check_window(coeffs: &CoefficientSet, lo: f64, hi: f64) -> Result<()> {
    if lo < coeffs.a() || hi > coeffs.b() || lo > hi {
        return Err(Error::WindowOutOfDomain {
            lo,
            hi,
            a: coeffs.a(),
            b: coeffs.b(),
        });
    }
    Ok(())
}
