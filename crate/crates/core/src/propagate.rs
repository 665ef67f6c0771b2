//! Solution propagation for τu = zu written as the first-order system
//! `u′ = (pu′)/p`, `(pu′)′ = (q − z r) u` in the (u, pu′) chart.
//!
//! Constant-coefficient segments use the exact 2×2 propagator built from
//! the entire functions cos(√w) and sin(√w)/√w of w = ω² = (zr − q)/p, so
//! oscillatory (w > 0), hyperbolic (w < 0) and degenerate (w = 0) segments
//! share one formula. The L²-norm accumulators are advanced with the exact
//! antiderivatives on such segments. Callable segments fall back to an
//! adaptive Dormand–Prince 5(4) stepper that integrates the accumulators
//! as extra components, so quadrature error is controlled together with
//! the local step error.

use crate::coeffs::{CoefficientSet, Segment, SegmentKind};
use crate::error::Error;
use crate::mat2::{cos_sqrt, cosm1_over, sinc, sinc_diff_ratio, sinc_sqrt, Mat2};
use crate::Result;
use num_complex::Complex64;

/// Solution value, quasi-derivative and running norm accumulators at x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionState {
    pub x: f64,
    pub u: Complex64,
    /// The quasi-derivative p·u′.
    pub pu: Complex64,
    /// ∫_a^x |u|² r dy.
    pub norm_sq: f64,
    /// ∫_a^x |pu′|²/r dy.
    pub dnorm_sq: f64,
    pub z: Complex64,
}

impl SolutionState {
    /// Initial data at the regular left endpoint.
    pub fn at_left(coeffs: &CoefficientSet, z: Complex64, u: Complex64, pu: Complex64) -> Self {
        SolutionState {
            x: coeffs.a(),
            u,
            pu,
            norm_sq: 0.0,
            dnorm_sq: 0.0,
            z,
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite()
            && self.pu.is_finite()
            && self.norm_sq.is_finite()
            && self.dnorm_sq.is_finite()
    }
}

/// Transfer matrix in the (u, pu′) chart; the flow preserves the Wronskian,
/// so the determinant is 1 up to integration error.
#[derive(Debug, Clone, Copy)]
pub struct TransferMatrix {
    pub entries: Mat2,
    pub x0: f64,
    pub x1: f64,
    pub z: Complex64,
}

impl TransferMatrix {
    pub fn det(&self) -> Complex64 {
        self.entries.det()
    }
}

// --- exact constant-segment kernel ------------------------------------------

/// Keep |Im ω|·L per exact chunk below this to avoid overflow inside
/// cosh-type terms; renormalization or the caller's guards handle growth
/// across chunks.
const MAX_HYPERBOLIC_PHASE: f64 = 150.0;

/// Much tighter per-chunk phase cap while accumulating norms: the exact
/// antiderivatives decompose |u|² over the (cos, sin) basis, and for a
/// decaying solution the basis terms exceed the integral by e^{2·Im ω·L},
/// so the span is split to keep that amplification harmless.
const MAX_NORM_PHASE: f64 = 2.0;

/// Magnitude at which the projective evolution rescales (u, pu).
const RENORM_THRESHOLD: f64 = 1e100;

struct ConstStep {
    /// New (u, pu) transfer over the signed length.
    t: Mat2,
    /// ∫ |u|² r over the chunk (forward lengths only).
    norm_inc: f64,
    /// ∫ |pu′|²/r over the chunk.
    dnorm_inc: f64,
}

/// Exact propagation data over a signed length `len` of a segment with
/// constant (p, q, r), starting from (u0, pu0). Norm increments are only
/// meaningful for `len >= 0`.
#[allow(clippy::too_many_arguments)]
fn const_step(
    p: f64,
    q: f64,
    r: f64,
    z: Complex64,
    len: f64,
    u0: Complex64,
    pu0: Complex64,
    want_norms: bool,
) -> ConstStep {
    let w = (z * r - q) / p; // ω²
    let wl2 = w * (len * len);
    let big_c = cos_sqrt(wl2);
    let big_s = sinc_sqrt(wl2); // sin(ωL)/(ωL)
    let ls = big_s * len; // sin(ωL)/ω, odd in len
    let t = Mat2::new(big_c, ls / p, -w * ls * p, big_c);

    if !want_norms || len == 0.0 {
        return ConstStep {
            t,
            norm_inc: 0.0,
            dnorm_inc: 0.0,
        };
    }

    // Exact ∫₀^L of |α cos(ωξ) + β sin(ωξ)/ω|² with α = u0, β = pu0/p,
    // via J1 = ∫|cos(ωξ)|², J2 = ∫|sin(ωξ)/ω|², J3 = ∫ (sin(ωξ)/ω) conj(cos(ωξ)).
    let omega = w.sqrt();
    let d = omega - omega.conj(); // 2i·Im ω
    let s = omega + omega.conj(); // 2·Re ω
    let j1 = 0.5 * len * (sinc(d * len) + sinc(s * len)).re;
    let j2 = 2.0 * len * len * len * sinc_diff_ratio(d * len, s * len).re;
    let j3 = if (omega * len).norm() <= 0.5 {
        j3_series(s, d, len)
    } else {
        0.5 * len * (cosm1_over(s * len) + cosm1_over(d * len)) / omega
    };

    let alpha = u0;
    let beta = pu0 / p;
    let norm_inc =
        r * (alpha.norm_sqr() * j1 + beta.norm_sqr() * j2 + 2.0 * (alpha.conj() * beta * j3).re);
    // pu(ξ)/p = β cos(ωξ) − α w · sin(ωξ)/ω; p·(p/r) keeps huge weights
    // (tree cells) in range where p² alone would overflow
    let dnorm_inc = (p * (p / r))
        * (beta.norm_sqr() * j1 + alpha.norm_sqr() * w.norm_sqr() * j2
            - 2.0 * (beta.conj() * alpha * w * j3).re);

    ConstStep {
        t,
        norm_inc: norm_inc.max(0.0),
        dnorm_inc: dnorm_inc.max(0.0),
    }
}

/// Power series for J3 = ∫₀^L (sin(ωξ)/ω)·conj(cos(ωξ)) dξ around ω = 0:
/// Σ_k (−1)^k [Σ_{j=0..2k} (−1)^j s^{2k−j} d^j] L^{2k+2}/(2k+2)!.
fn j3_series(s: Complex64, d: Complex64, len: f64) -> Complex64 {
    const KMAX: usize = 12;
    let mut spow = [Complex64::new(1.0, 0.0); 2 * KMAX + 1];
    let mut dpow = [Complex64::new(1.0, 0.0); 2 * KMAX + 1];
    for i in 1..=2 * KMAX {
        spow[i] = spow[i - 1] * s;
        dpow[i] = dpow[i - 1] * d;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut lpow = len * len; // L^{2k+2}
    let mut factorial = 2.0; // (2k+2)!
    let mut sign = 1.0;
    for k in 0..KMAX {
        let mut inner = Complex64::new(0.0, 0.0);
        for j in 0..=2 * k {
            let t = spow[2 * k - j] * dpow[j];
            inner += if j % 2 == 0 { t } else { -t };
        }
        sum += inner * (sign * lpow / factorial);
        sign = -sign;
        lpow *= len * len;
        factorial *= (2 * k + 3) as f64 * (2 * k + 4) as f64;
        if inner.norm() * lpow / factorial < 1e-22 {
            break;
        }
    }
    sum
}

/// Advance within one constant segment, splitting the span so hyperbolic
/// phases stay representable (and, when accumulating, well conditioned).
#[allow(clippy::too_many_arguments)]
fn advance_constant(
    p: f64,
    q: f64,
    r: f64,
    z: Complex64,
    x0: f64,
    x1: f64,
    u: &mut Complex64,
    pu: &mut Complex64,
    norm_sq: &mut f64,
    dnorm_sq: &mut f64,
    want_norms: bool,
    renormalize: bool,
) {
    let len = x1 - x0;
    let w = (z * r - q) / p;
    let im_rate = w.sqrt().im.abs();
    let phase_cap = if want_norms {
        MAX_NORM_PHASE
    } else {
        MAX_HYPERBOLIC_PHASE
    };
    let chunks = if im_rate * len.abs() > phase_cap {
        ((im_rate * len.abs()) / phase_cap).ceil() as usize
    } else {
        1
    };
    let h = len / chunks as f64;
    for _ in 0..chunks {
        let step = const_step(p, q, r, z, h, *u, *pu, want_norms);
        let (nu, npu) = step.t.apply((*u, *pu));
        *u = nu;
        *pu = npu;
        if want_norms {
            *norm_sq += step.norm_inc;
            *dnorm_sq += step.dnorm_inc;
        }
        if renormalize {
            let mag = u.norm().max(pu.norm());
            if mag > RENORM_THRESHOLD {
                *u /= mag;
                *pu /= mag;
            }
        }
    }
}

// --- adaptive Dormand–Prince 5(4) for callable segments ----------------------

type Vec6 = [f64; 6];

fn rhs(seg: &Segment, z: Complex64, accumulate: bool, x: f64, y: &Vec6) -> Vec6 {
    let (p, q, r) = seg.values_at(x);
    let u = Complex64::new(y[0], y[1]);
    let w = Complex64::new(y[2], y[3]);
    let du = w / p;
    let dw = (Complex64::new(q, 0.0) - z * r) * u;
    if accumulate {
        [
            du.re,
            du.im,
            dw.re,
            dw.im,
            u.norm_sqr() * r,
            w.norm_sqr() / r,
        ]
    } else {
        [du.re, du.im, dw.re, dw.im, 0.0, 0.0]
    }
}

fn axpy(y: &Vec6, h: f64, ks: &[(&Vec6, f64)]) -> Vec6 {
    let mut out = *y;
    for (k, c) in ks {
        for i in 0..6 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One adaptive integration over [x0, x1] (either direction) within a single
/// segment. Local error per step is controlled against tol·(1 + |y|).
#[allow(clippy::too_many_arguments)]
fn advance_adaptive(
    seg: &Segment,
    z: Complex64,
    x0: f64,
    x1: f64,
    y: &mut Vec6,
    tol: f64,
    accumulate: bool,
    renormalize: bool,
) -> Result<()> {
    if x0 == x1 {
        return Ok(());
    }
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut x = x0;
    let mut h = dir * span.min(0.01);
    let h_min = 1e-14 * (1.0 + x0.abs().max(x1.abs()));
    let mut steps: u64 = 0;
    const MAX_STEPS: u64 = 20_000_000;

    while (x1 - x) * dir > 0.0 {
        if h.abs() > (x1 - x).abs() {
            h = x1 - x;
        }
        if h.abs() < h_min {
            return Err(Error::ToleranceNotMet {
                x,
                tol,
                step: h.abs(),
            });
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::ToleranceNotMet {
                x,
                tol,
                step: h.abs(),
            });
        }

        let k1 = rhs(seg, z, accumulate, x, y);
        let k2 = rhs(seg, z, accumulate, x + 0.2 * h, &axpy(y, h, &[(&k1, 0.2)]));
        let k3 = rhs(
            seg,
            z,
            accumulate,
            x + 0.3 * h,
            &axpy(y, h, &[(&k1, 3.0 / 40.0), (&k2, 9.0 / 40.0)]),
        );
        let k4 = rhs(
            seg,
            z,
            accumulate,
            x + 0.8 * h,
            &axpy(
                y,
                h,
                &[(&k1, 44.0 / 45.0), (&k2, -56.0 / 15.0), (&k3, 32.0 / 9.0)],
            ),
        );
        let k5 = rhs(
            seg,
            z,
            accumulate,
            x + 8.0 / 9.0 * h,
            &axpy(
                y,
                h,
                &[
                    (&k1, 19372.0 / 6561.0),
                    (&k2, -25360.0 / 2187.0),
                    (&k3, 64448.0 / 6561.0),
                    (&k4, -212.0 / 729.0),
                ],
            ),
        );
        let k6 = rhs(
            seg,
            z,
            accumulate,
            x + h,
            &axpy(
                y,
                h,
                &[
                    (&k1, 9017.0 / 3168.0),
                    (&k2, -355.0 / 33.0),
                    (&k3, 46732.0 / 5247.0),
                    (&k4, 49.0 / 176.0),
                    (&k5, -5103.0 / 18656.0),
                ],
            ),
        );
        let y5 = axpy(
            y,
            h,
            &[
                (&k1, 35.0 / 384.0),
                (&k3, 500.0 / 1113.0),
                (&k4, 125.0 / 192.0),
                (&k5, -2187.0 / 6784.0),
                (&k6, 11.0 / 84.0),
            ],
        );
        let k7 = rhs(seg, z, accumulate, x + h, &y5);

        // embedded 4th-order error estimate
        let mut err_ratio: f64 = 0.0;
        for i in 0..6 {
            let e = h
                * (71.0 / 57600.0 * k1[i] - 71.0 / 16695.0 * k3[i] + 71.0 / 1920.0 * k4[i]
                    - 17253.0 / 339200.0 * k5[i]
                    + 22.0 / 525.0 * k6[i]
                    - k7[i] / 40.0);
            let sc = tol * (1.0 + y[i].abs().max(y5[i].abs()));
            err_ratio = err_ratio.max((e / sc).abs());
        }

        if err_ratio <= 1.0 {
            x += h;
            *y = y5;
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::Overflow(format!("solution overflowed near x = {x}")));
            }
            if renormalize {
                let mag = y[..4].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if mag > RENORM_THRESHOLD {
                    for v in y[..4].iter_mut() {
                        *v /= mag;
                    }
                }
            }
        }
        let factor = if err_ratio > 0.0 {
            0.9 * err_ratio.powf(-0.2)
        } else {
            5.0
        };
        h *= factor.clamp(0.2, 5.0);
    }
    Ok(())
}

// --- multi-segment drivers ---------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Forward propagation carrying the norm accumulators.
    Accumulate,
    /// Either direction, no accumulators, rescaled to stay representable.
    Projective,
    /// No accumulators and no rescaling (transfer-matrix columns).
    Plain,
}

#[allow(clippy::too_many_arguments)]
fn advance_in_segment(
    seg: &Segment,
    z: Complex64,
    x0: f64,
    x1: f64,
    u: &mut Complex64,
    pu: &mut Complex64,
    norm_sq: &mut f64,
    dnorm_sq: &mut f64,
    tol: f64,
    mode: Mode,
) -> Result<()> {
    let want_norms = mode == Mode::Accumulate;
    let renormalize = mode == Mode::Projective;
    match &seg.kind {
        SegmentKind::Constant { p, q, r } => {
            advance_constant(
                *p,
                *q,
                *r,
                z,
                x0,
                x1,
                u,
                pu,
                norm_sq,
                dnorm_sq,
                want_norms,
                renormalize,
            );
            Ok(())
        }
        SegmentKind::Callable { .. } => {
            let mut y = [u.re, u.im, pu.re, pu.im, 0.0, 0.0];
            advance_adaptive(seg, z, x0, x1, &mut y, tol, want_norms, renormalize)?;
            *u = Complex64::new(y[0], y[1]);
            *pu = Complex64::new(y[2], y[3]);
            if want_norms {
                *norm_sq += y[4].max(0.0);
                *dnorm_sq += y[5].max(0.0);
            }
            Ok(())
        }
    }
}

/// Propagate a state forward to `x_target`, updating the norm accumulators.
///
/// `x_target` may equal `state.x`, in which case the state is returned
/// unchanged. At segment boundaries (vertices) both `u` and `pu′` carry
/// over continuously.
pub fn propagate(
    coeffs: &CoefficientSet,
    state: &SolutionState,
    x_target: f64,
    tol: f64,
) -> Result<SolutionState> {
    let past_b = coeffs.b().is_finite() && x_target >= coeffs.b();
    if x_target < state.x || past_b || state.x < coeffs.a() {
        return Err(Error::OutOfDomain {
            x: x_target,
            a: state.x,
            b: coeffs.b(),
        });
    }
    let mut cur = *state;
    while cur.x < x_target {
        let seg = &coeffs.segments()[coeffs.segment_index(cur.x)];
        let end = seg.x_hi.min(x_target);
        advance_in_segment(
            seg,
            cur.z,
            cur.x,
            end,
            &mut cur.u,
            &mut cur.pu,
            &mut cur.norm_sq,
            &mut cur.dnorm_sq,
            tol,
            Mode::Accumulate,
        )?;
        cur.x = end;
        if !cur.is_finite() {
            return Err(Error::Overflow(format!(
                "state overflowed near x = {}",
                cur.x
            )));
        }
    }
    Ok(cur)
}

/// The fundamental pair at x: c with c(a) = 1, pc′(a) = 0 and s with
/// s(a) = 0, ps′(a) = 1.
pub fn fundamental_pair(
    coeffs: &CoefficientSet,
    z: Complex64,
    x: f64,
    tol: f64,
) -> Result<(SolutionState, SolutionState)> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let c0 = SolutionState::at_left(coeffs, z, one, zero);
    let s0 = SolutionState::at_left(coeffs, z, zero, one);
    Ok((
        propagate(coeffs, &c0, x, tol)?,
        propagate(coeffs, &s0, x, tol)?,
    ))
}

/// Modified Wronskian u·(pv′) − (pu′)·v of two states at the same point.
pub fn wronskian(u: &SolutionState, v: &SolutionState) -> Result<Complex64> {
    if u.x != v.x || u.z != v.z {
        return Err(Error::MismatchedStates {
            x1: u.x,
            x2: v.x,
            z1: u.z,
            z2: v.z,
        });
    }
    Ok(u.u * v.pu - u.pu * v.u)
}

/// Transfer matrix from x0 to x1 in the (u, pu′) chart; `x0 = a` and
/// `x0 = x1` (identity) are allowed.
pub fn transfer_matrix(
    coeffs: &CoefficientSet,
    z: Complex64,
    x0: f64,
    x1: f64,
    tol: f64,
) -> Result<TransferMatrix> {
    if x0 < coeffs.a() || x1 < x0 || (coeffs.b().is_finite() && x1 >= coeffs.b()) {
        return Err(Error::OutOfDomain {
            x: x1,
            a: coeffs.a(),
            b: coeffs.b(),
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut entries = Mat2::identity();
    if x1 > x0 {
        let mut col_c = (one, zero);
        let mut col_s = (zero, one);
        for col in [&mut col_c, &mut col_s] {
            let (mut u, mut pu) = *col;
            let mut x = x0;
            let (mut nsq, mut dnsq) = (0.0, 0.0);
            while x < x1 {
                let seg = &coeffs.segments()[coeffs.segment_index(x)];
                let end = seg.x_hi.min(x1);
                advance_in_segment(
                    seg,
                    z,
                    x,
                    end,
                    &mut u,
                    &mut pu,
                    &mut nsq,
                    &mut dnsq,
                    tol,
                    Mode::Plain,
                )?;
                x = end;
            }
            *col = (u, pu);
        }
        entries = Mat2::new(col_c.0, col_s.0, col_c.1, col_s.1);
    }
    Ok(TransferMatrix { entries, x0, x1, z })
}

/// Evolve (u, pu) between two points in either direction, renormalizing to
/// keep magnitudes representable. The result is the true state up to an
/// overall positive real factor; norm accumulators are not tracked.
pub(crate) fn evolve_projective(
    coeffs: &CoefficientSet,
    z: Complex64,
    from_x: f64,
    to_x: f64,
    mut u: Complex64,
    mut pu: Complex64,
    tol: f64,
) -> Result<(Complex64, Complex64)> {
    let mut x = from_x;
    let (mut nsq, mut dnsq) = (0.0, 0.0);
    while x != to_x {
        let seg = if to_x > x {
            &coeffs.segments()[coeffs.segment_index(x)]
        } else {
            // moving left: the governing segment is the one to the left of x
            let idx = coeffs.segment_index(x);
            let seg = &coeffs.segments()[idx];
            if seg.x_lo == x && idx > 0 {
                &coeffs.segments()[idx - 1]
            } else {
                seg
            }
        };
        let end = if to_x > x {
            seg.x_hi.min(to_x)
        } else {
            seg.x_lo.max(to_x)
        };
        advance_in_segment(
            seg,
            z,
            x,
            end,
            &mut u,
            &mut pu,
            &mut nsq,
            &mut dnsq,
            tol,
            Mode::Projective,
        )?;
        x = end;
        let mag = u.norm().max(pu.norm());
        if !mag.is_finite() {
            return Err(Error::Overflow(format!(
                "projective state overflowed near x = {x}"
            )));
        }
        if mag > 1e100 {
            u /= mag;
            pu /= mag;
        }
    }
    Ok((u, pu))
}
