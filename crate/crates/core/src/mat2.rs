//! Small complex 2×2 matrix type and the entire functions of ω² that
//! back the closed-form constant-coefficient propagator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dense 2×2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2::new(one, zero, zero, one)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    pub fn apply(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Eigenvalues, larger modulus first.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let tr = self.a + self.d;
        let half = tr * 0.5;
        let disc = (half * half - self.det()).sqrt();
        let (l1, l2) = (half + disc, half - disc);
        if l1.norm() >= l2.norm() {
            (l1, l2)
        } else {
            (l2, l1)
        }
    }
}

const SERIES_CUTOFF: f64 = 0.25;

/// cos(√w), entire in w.
pub fn cos_sqrt(w: Complex64) -> Complex64 {
    if w.norm() <= SERIES_CUTOFF {
        // Σ (-w)^k / (2k)!
        let mut sum = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..=24u32 {
            term = term * (-w) / ((2 * k - 1) as f64 * (2 * k) as f64);
            sum += term;
            if term.norm() <= 1e-20 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        w.sqrt().cos()
    }
}

/// sin(√w)/√w, entire in w; equals 1 at w = 0.
pub fn sinc_sqrt(w: Complex64) -> Complex64 {
    if w.norm() <= SERIES_CUTOFF {
        // Σ (-w)^k / (2k+1)!
        let mut sum = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..=24u32 {
            term = term * (-w) / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
            if term.norm() <= 1e-20 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        let s = w.sqrt();
        s.sin() / s
    }
}

/// sin(t)/t for complex t, with the removable singularity handled.
pub fn sinc(t: Complex64) -> Complex64 {
    sinc_sqrt(t * t)
}

/// (1 - cos(t))/t for complex t; equals 0 at t = 0.
pub fn cosm1_over(t: Complex64) -> Complex64 {
    if t.norm() <= SERIES_CUTOFF {
        // t/2! - t³/4! + t⁵/6! - ...
        let t2 = t * t;
        let mut term = t * 0.5;
        let mut sum = term;
        for k in 1..=24u32 {
            term = term * (-t2) / ((2 * k + 1) as f64 * (2 * k + 2) as f64);
            sum += term;
            if term.norm() <= 1e-20 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (Complex64::new(1.0, 0.0) - t.cos()) / t
    }
}

/// (sinc(a) - sinc(b)) / (b² - a²), extended continuously to a = b = 0
/// where it equals 1/6. `a` and `b` may be complex.
pub fn sinc_diff_ratio(a: Complex64, b: Complex64) -> Complex64 {
    let a2 = a * a;
    let b2 = b * b;
    if a.norm().max(b.norm()) <= 0.5 {
        // Σ_{k≥1} (-1)^{k+1} h_{k-1}(a², b²) / (2k+1)!  with
        // h_m the complete homogeneous symmetric polynomial of degree m.
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sign = 1.0;
        let mut factorial = 6.0; // (2·1+1)! = 6
        for k in 1..=16u32 {
            let mut h = Complex64::new(0.0, 0.0);
            let mut apow = Complex64::new(1.0, 0.0);
            for j in 0..k {
                // a^{2j} b^{2(k-1-j)}
                let mut bpow = Complex64::new(1.0, 0.0);
                for _ in 0..(k - 1 - j) {
                    bpow *= b2;
                }
                h += apow * bpow;
                apow *= a2;
            }
            sum += h * (sign / factorial);
            sign = -sign;
            factorial *= (2 * k + 2) as f64 * (2 * k + 3) as f64;
        }
        sum
    } else {
        (sinc(a) - sinc(b)) / (b2 - a2)
    }
}

/// Serialize `Complex64` as `{"re": …, "im": …}` (the report wire format)
/// instead of num-complex's tuple form. Use with `#[serde(with = …)]`.
pub mod complex_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct ReIm {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(v: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ReIm { re: v.re, im: v.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let v = ReIm::deserialize(d)?;
        Ok(Complex64::new(v.re, v.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn entire_functions_match_closed_forms() {
        // real positive w: plain trig
        let w = c(4.0, 0.0);
        assert_relative_eq!(cos_sqrt(w).re, (2.0f64).cos(), max_relative = 1e-14);
        assert_relative_eq!(sinc_sqrt(w).re, (2.0f64).sin() / 2.0, max_relative = 1e-14);
        // negative w: hyperbolic continuation
        let w = c(-4.0, 0.0);
        assert_relative_eq!(cos_sqrt(w).re, (2.0f64).cosh(), max_relative = 1e-14);
        assert_relative_eq!(sinc_sqrt(w).re, (2.0f64).sinh() / 2.0, max_relative = 1e-14);
        // series region continuity against the direct formula just outside it
        for &s in &[1e-9, 1e-4, 0.2, 0.3] {
            let w = c(s, s / 3.0);
            let direct = w.sqrt().cos();
            assert_relative_eq!(cos_sqrt(w).re, direct.re, max_relative = 1e-13);
            assert_relative_eq!(
                cos_sqrt(w).im,
                direct.im,
                epsilon = 1e-16,
                max_relative = 1e-13
            );
        }
        assert_eq!(cos_sqrt(c(0.0, 0.0)), c(1.0, 0.0));
        assert_eq!(sinc_sqrt(c(0.0, 0.0)), c(1.0, 0.0));
    }

    #[test]
    fn cosm1_limits() {
        assert_eq!(cosm1_over(c(0.0, 0.0)), c(0.0, 0.0));
        let t = c(1e-5, 0.0);
        assert_relative_eq!(cosm1_over(t).re, 0.5e-5, max_relative = 1e-9);
        let t = c(2.0, 0.0);
        assert_relative_eq!(
            cosm1_over(t).re,
            (1.0 - (2.0f64).cos()) / 2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn sinc_diff_ratio_limits() {
        assert_relative_eq!(
            sinc_diff_ratio(c(0.0, 0.0), c(0.0, 0.0)).re,
            1.0 / 6.0,
            max_relative = 1e-15
        );
        // compare series against direct evaluation at the boundary
        let a = c(0.4, 0.1);
        let b = c(0.3, -0.2);
        let direct = (sinc(a) - sinc(b)) / (b * b - a * a);
        let series = sinc_diff_ratio(a, b);
        // the direct route cancels ~2 digits at small arguments; the series
        // is the accurate one there
        assert_relative_eq!(series.re, direct.re, max_relative = 1e-10);
        assert_relative_eq!(series.im, direct.im, max_relative = 1e-10);
    }

    #[test]
    fn matrix_algebra() {
        let m = Mat2::new(c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0));
        assert_eq!(m.det(), c(-2.0, 0.0));
        let id = Mat2::identity();
        assert_eq!(m.mul(&id), m);
        let (l1, l2) = m.eigenvalues();
        // eigenvalues of [[1,2],[3,4]] are (5 ± √33)/2
        assert_relative_eq!(l1.re, (5.0 + 33f64.sqrt()) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(l2.re, (5.0 - 33f64.sqrt()) / 2.0, max_relative = 1e-13);
    }
}
