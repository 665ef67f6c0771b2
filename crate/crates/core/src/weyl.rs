//! Weyl m-function estimation by truncation.
//!
//! With c, s the fundamental pair at the regular endpoint a, any solution is
//! u(a)·c + pu′(a)·s, and the Weyl solution is normalized as
//! u_b = c + m·s, so m = pu′(a)/u(a) for the solution that satisfies the
//! truncation condition at X. The truncated m lies on the Weyl circle of
//! radius (2·|Im z|·‖s‖²_{(a,X)})⁻¹, which contains the true m_b for every
//! larger truncation; that radius is the convergence control reported with
//! each estimate.

use crate::coeffs::CoefficientSet;
use crate::error::Error;
use crate::propagate::{evolve_projective, propagate, SolutionState};
use crate::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Boundary condition imposed at the truncation point X.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationBc {
    Dirichlet,
    Neumann,
}

/// An m-function value with its truncation provenance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MFunctionEstimate {
    #[serde(with = "crate::mat2::complex_serde")]
    pub z: Complex64,
    #[serde(with = "crate::mat2::complex_serde")]
    pub m: Complex64,
    /// Truncation point.
    #[serde(rename = "X")]
    pub x_trunc: f64,
    /// Weyl-disk radius bound; finite only when Im z ≠ 0.
    pub radius: f64,
    /// Boundary angle at a; 0 is Dirichlet, the convention of `m_function`.
    pub bc_alpha: f64,
}

/// Dirichlet-truncated m-function estimate at z (Im z ≠ 0).
///
/// Propagates (u, pu′) = (0, −1) backward from X — the decaying solution
/// dominates in that direction — and reads m = pu′(a)/u(a).
pub fn m_function(
    coeffs: &CoefficientSet,
    z: Complex64,
    x_trunc: f64,
    tol: f64,
) -> Result<MFunctionEstimate> {
    m_function_with_bc(coeffs, z, x_trunc, tol, TruncationBc::Dirichlet)
}

/// As [`m_function`] with a selectable truncation condition; Dirichlet and
/// Neumann truncations differ by at most the Weyl-disk diameter.
pub fn m_function_with_bc(
    coeffs: &CoefficientSet,
    z: Complex64,
    x_trunc: f64,
    tol: f64,
    bc: TruncationBc,
) -> Result<MFunctionEstimate> {
    if z.im == 0.0 {
        return Err(Error::RealAxis { z });
    }
    if !(x_trunc > coeffs.a()) || x_trunc >= coeffs.b() {
        return Err(Error::OutOfDomain {
            x: x_trunc,
            a: coeffs.a(),
            b: coeffs.b(),
        });
    }
    let (u_init, pu_init) = match bc {
        TruncationBc::Dirichlet => (Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)),
        TruncationBc::Neumann => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
    };
    let (u_a, pu_a) = evolve_projective(coeffs, z, x_trunc, coeffs.a(), u_init, pu_init, tol)?;
    if u_a.norm() == 0.0 {
        return Err(Error::TruncationUnstable { mag: u_a.norm() });
    }
    let m = pu_a / u_a;
    if !m.is_finite() {
        return Err(Error::TruncationUnstable { mag: u_a.norm() });
    }
    let radius = weyl_disk_radius(coeffs, z, x_trunc, tol)?;
    Ok(MFunctionEstimate {
        z,
        m,
        x_trunc,
        radius,
        bc_alpha: 0.0,
    })
}

/// (2·|Im z|·‖s(z)‖²_{(a,X)})⁻¹; collapses to 0 when the norm overflows.
fn weyl_disk_radius(coeffs: &CoefficientSet, z: Complex64, x_trunc: f64, tol: f64) -> Result<f64> {
    let s0 = SolutionState::at_left(
        coeffs,
        z,
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    );
    match propagate(coeffs, &s0, x_trunc, tol) {
        Ok(s) => Ok(1.0 / (2.0 * z.im.abs() * s.norm_sq)),
        Err(Error::Overflow(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Double the truncation until the disk radius falls below
/// `rel_radius`·|m| (or the cap is reached); returns the last estimate.
pub fn m_function_auto(
    coeffs: &CoefficientSet,
    z: Complex64,
    x_start: f64,
    rel_radius: f64,
    tol: f64,
    x_cap: f64,
) -> Result<MFunctionEstimate> {
    let cap = if coeffs.b().is_finite() {
        x_cap.min(0.995 * coeffs.b())
    } else {
        x_cap
    };
    let mut x = x_start.min(cap).max(coeffs.a() + 1e-6);
    loop {
        let est = m_function(coeffs, z, x, tol)?;
        if est.radius <= rel_radius * est.m.norm() || x >= cap {
            return Ok(est);
        }
        x = (2.0 * x).min(cap);
    }
}

/// Möbius change of the boundary angle at a:
/// m_α = (cos(α−β)·m_β + sin(α−β)) / (cos(α−β) − sin(α−β)·m_β),
/// projectively complete (∞ ↦ −cot(α−β)).
pub fn rotate_bc(m: Complex64, alpha: f64, beta: f64) -> Complex64 {
    let d = alpha - beta;
    let (sd, cd) = d.sin_cos();
    if !m.is_finite() {
        return if sd == 0.0 {
            Complex64::new(f64::INFINITY, f64::INFINITY)
        } else {
            Complex64::new(-cd / sd, 0.0)
        };
    }
    let denom = Complex64::new(cd, 0.0) - m * sd;
    if denom.norm() == 0.0 {
        return Complex64::new(f64::INFINITY, f64::INFINITY);
    }
    (m * cd + sd) / denom
}

/// Relative defect of Im m = Im z · ‖u_b‖²_{(a,X)} for the truncated
/// problem, with u_b = c + m·s re-propagated forward. Small values certify
/// that backward propagation, forward propagation and the norm quadrature
/// agree with each other.
pub fn im_identity_residual(
    coeffs: &CoefficientSet,
    z: Complex64,
    x_trunc: f64,
    tol: f64,
) -> Result<f64> {
    if z.im <= 0.0 {
        return Err(Error::RealAxis { z });
    }
    let est = m_function(coeffs, z, x_trunc, tol)?;
    let ub0 = SolutionState::at_left(coeffs, z, Complex64::new(1.0, 0.0), est.m);
    let ub = propagate(coeffs, &ub0, x_trunc, tol)?;
    Ok((est.m.im - z.im * ub.norm_sq).abs() / est.m.im.abs())
}

/// One Herglotz-property scan result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HerglotzReport {
    pub entries: Vec<MFunctionEstimate>,
    /// min over the grid of Im m + radius; `None` for an empty grid.
    pub min_margin: Option<f64>,
}

/// Check Im m > −radius over a grid in the upper half-plane; a violation
/// signals an integration bug, not a property of the operator.
pub fn herglotz_scan(
    coeffs: &CoefficientSet,
    z_grid: &[Complex64],
    x_trunc: f64,
) -> Result<HerglotzReport> {
    let tol = 1e-10;
    let mut entries = Vec::with_capacity(z_grid.len());
    let mut min_margin: Option<f64> = None;
    let mut violations = 0usize;
    let mut worst: Option<(Complex64, f64)> = None;
    for &z in z_grid {
        if z.im <= 0.0 {
            return Err(Error::RealAxis { z });
        }
        let est = m_function(coeffs, z, x_trunc, tol)?;
        let margin = est.m.im + est.radius;
        if margin <= 0.0 {
            violations += 1;
            if worst.is_none_or(|(_, w)| margin < w) {
                worst = Some((z, margin));
            }
        }
        min_margin = Some(min_margin.map_or(margin, |m: f64| m.min(margin)));
        entries.push(est);
    }
    if violations > 0 {
        let (worst_z, worst_margin) = worst.unwrap();
        return Err(Error::HerglotzViolation {
            count: violations,
            worst_z,
            worst_margin,
        });
    }
    Ok(HerglotzReport {
        entries,
        min_margin,
    })
}
