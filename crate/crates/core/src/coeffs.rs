//! Coefficient triples (p, q, r) on (a, b) as an ordered list of segments.
//!
//! A segment either carries constant coefficients, on which propagation and
//! norm accumulation are exact, or pointwise evaluators (parsed expressions
//! or closures) handled by adaptive stepping. Vertex-type jumps live at
//! segment boundaries: `u` and the quasi-derivative `pu′` are continuous
//! there, so a jump in `p` encodes the matching condition
//! `u′(x−) = (p₊/p₋)·u′(x+)` automatically.
//!
//! JSON document shape:
//!
//! ```json
//! {"a": 0.0, "b": "inf",
//!  "segments": [
//!     {"lo": 0.0, "hi": 1.0, "p": 1.0, "q": 0.0, "r": 1.0},
//!     {"lo": 1.0, "hi": "inf", "expr_p": "1", "expr_q": "exp(-x)", "expr_r": "1"}]}
//! ```
//!
//! Round-trips preserve all values to full precision; constant segments are
//! bit-exact and expression segments re-parse their original source text.

use crate::error::Error;
use crate::expr::Expr;
use crate::Result;
use serde::de::Error as DeError;
use serde::ser::Error as SerError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::sync::Arc;

/// Pointwise coefficient evaluator on a segment.
pub type CoeffFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Declared local-integrability flags for callable segments. They are
/// spot-checked by sampling at construction, not proven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Integrability {
    pub p_inv: bool,
    pub q: bool,
    pub r: bool,
}

impl Default for Integrability {
    fn default() -> Self {
        Integrability {
            p_inv: true,
            q: true,
            r: true,
        }
    }
}

#[derive(Clone)]
pub enum Evaluator {
    Expr(Expr),
    Closure(CoeffFn),
}

impl Evaluator {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Evaluator::Expr(e) => e.eval(x),
            Evaluator::Closure(f) => f(x),
        }
    }

    fn expr_source(&self) -> Option<&str> {
        match self {
            Evaluator::Expr(e) => Some(e.source()),
            Evaluator::Closure(_) => None,
        }
    }
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluator::Expr(e) => write!(f, "Expr({})", e.source()),
            Evaluator::Closure(_) => write!(f, "Closure"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SegmentKind {
    Constant {
        p: f64,
        q: f64,
        r: f64,
    },
    Callable {
        p: Evaluator,
        q: Evaluator,
        r: Evaluator,
        integrability: Integrability,
    },
}

/// One coefficient segment `[x_lo, x_hi)`.
#[derive(Debug, Clone)]
pub struct Segment {
    pub x_lo: f64,
    pub x_hi: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn constant(x_lo: f64, x_hi: f64, p: f64, q: f64, r: f64) -> Self {
        Segment {
            x_lo,
            x_hi,
            kind: SegmentKind::Constant { p, q, r },
        }
    }

    pub fn callable(x_lo: f64, x_hi: f64, p: CoeffFn, q: CoeffFn, r: CoeffFn) -> Self {
        Segment {
            x_lo,
            x_hi,
            kind: SegmentKind::Callable {
                p: Evaluator::Closure(p),
                q: Evaluator::Closure(q),
                r: Evaluator::Closure(r),
                integrability: Integrability::default(),
            },
        }
    }

    pub fn from_exprs(x_lo: f64, x_hi: f64, p: &str, q: &str, r: &str) -> Result<Self> {
        Ok(Segment {
            x_lo,
            x_hi,
            kind: SegmentKind::Callable {
                p: Evaluator::Expr(Expr::parse(p)?),
                q: Evaluator::Expr(Expr::parse(q)?),
                r: Evaluator::Expr(Expr::parse(r)?),
                integrability: Integrability::default(),
            },
        })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, SegmentKind::Constant { .. })
    }

    /// Pointwise values; caller guarantees `x_lo <= x <= x_hi`.
    pub fn values_at(&self, x: f64) -> (f64, f64, f64) {
        match &self.kind {
            SegmentKind::Constant { p, q, r } => (*p, *q, *r),
            SegmentKind::Callable { p, q, r, .. } => (p.eval(x), q.eval(x), r.eval(x)),
        }
    }
}

/// The operator's identity: the triple (p, q, r) on (a, b), with `a` finite
/// and regular and `b` finite or +∞.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    a: f64,
    b: f64,
    segments: Vec<Segment>,
}

impl CoefficientSet {
    pub fn new(a: f64, b: f64, segments: Vec<Segment>) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidCoefficients(format!(
                "left endpoint a = {a} must be finite"
            )));
        }
        if !(b > a) {
            return Err(Error::InvalidCoefficients(format!(
                "need b > a, got a = {a}, b = {b}"
            )));
        }
        if segments.is_empty() {
            return Err(Error::InvalidCoefficients("no segments".into()));
        }
        let tol = |x: f64| 1e-9 * x.abs().max(1.0);
        if (segments[0].x_lo - a).abs() > tol(a) {
            return Err(Error::InvalidCoefficients(format!(
                "first segment starts at {} but a = {a}",
                segments[0].x_lo
            )));
        }
        for w in segments.windows(2) {
            if (w[0].x_hi - w[1].x_lo).abs() > tol(w[0].x_hi) {
                return Err(Error::InvalidCoefficients(format!(
                    "gap or overlap between segments at {} vs {}",
                    w[0].x_hi, w[1].x_lo
                )));
            }
            if !(w[1].x_lo > w[0].x_lo) {
                return Err(Error::InvalidCoefficients(
                    "segment x_lo not strictly increasing".into(),
                ));
            }
        }
        let last_hi = segments.last().unwrap().x_hi;
        let tiles_to_b = if b.is_infinite() {
            last_hi.is_infinite()
        } else {
            (last_hi - b).abs() <= tol(b)
        };
        if !tiles_to_b {
            return Err(Error::InvalidCoefficients(format!(
                "segments end at {last_hi} but b = {b}"
            )));
        }
        for seg in &segments {
            Self::spot_check(seg)?;
        }
        Ok(CoefficientSet { a, b, segments })
    }

    /// Single constant-coefficient segment covering all of (a, b).
    pub fn constant(a: f64, b: f64, p: f64, q: f64, r: f64) -> Result<Self> {
        CoefficientSet::new(a, b, vec![Segment::constant(a, b, p, q, r)])
    }

    /// Single expression segment covering all of (a, b).
    pub fn from_exprs(a: f64, b: f64, p: &str, q: &str, r: &str) -> Result<Self> {
        CoefficientSet::new(a, b, vec![Segment::from_exprs(a, b, p, q, r)?])
    }

    /// The free half-line: p = r = 1, q = 0 on (0, ∞).
    pub fn free_half_line() -> Self {
        CoefficientSet::constant(0.0, f64::INFINITY, 1.0, 0.0, 1.0).unwrap()
    }

    fn spot_check(seg: &Segment) -> Result<()> {
        match &seg.kind {
            SegmentKind::Constant { p, q, r } => {
                if !(p.is_finite() && *p > 0.0) || !(r.is_finite() && *r > 0.0) || !q.is_finite() {
                    return Err(Error::InvalidCoefficients(format!(
                        "segment [{}, {}): need finite p > 0, r > 0, q; got p={p}, q={q}, r={r}",
                        seg.x_lo, seg.x_hi
                    )));
                }
            }
            SegmentKind::Callable { .. } => {
                let span = if seg.x_hi.is_finite() {
                    seg.x_hi - seg.x_lo
                } else {
                    10.0
                };
                let span = span.min(10.0);
                for k in 0..5 {
                    let x = seg.x_lo + span * (0.05 + 0.225 * k as f64);
                    let (p, q, r) = seg.values_at(x);
                    if !(p.is_finite() && p > 0.0) || !(r.is_finite() && r > 0.0) || !q.is_finite()
                    {
                        return Err(Error::InvalidCoefficients(format!(
                            "callable segment [{}, {}): sampled p={p}, q={q}, r={r} at x={x}",
                            seg.x_lo, seg.x_hi
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Index of the segment whose half-open interval `[x_lo, x_hi)` contains x.
    pub(crate) fn segment_index(&self, x: f64) -> usize {
        let idx = self.segments.partition_point(|s| s.x_lo <= x);
        idx.saturating_sub(1)
    }

    /// Segment boundaries strictly inside (lo, hi), ascending.
    pub(crate) fn boundaries_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.segments
            .iter()
            .map(|s| s.x_lo)
            .filter(|&t| t > lo && t < hi)
            .collect()
    }

    /// Pointwise coefficient values; at a segment boundary this is the
    /// right limit.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        if !(x > self.a && x < self.b) {
            return Err(Error::OutOfDomain {
                x,
                a: self.a,
                b: self.b,
            });
        }
        let seg = &self.segments[self.segment_index(x)];
        Ok(seg.values_at(x))
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = RawCoeffs::try_from(self)
            .map_err(|e| Error::InvalidCoefficients(format!("not serializable: {e}")))?;
        serde_json::to_string_pretty(&raw)
            .map_err(|e| Error::InvalidCoefficients(format!("json: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawCoeffs = serde_json::from_str(text)
            .map_err(|e| Error::InvalidCoefficients(format!("json: {e}")))?;
        raw.build()
    }
}

/// Free function mirror of [`CoefficientSet::eval`].
pub fn eval_coefficients(coeffs: &CoefficientSet, x: f64) -> Result<(f64, f64, f64)> {
    coeffs.eval(x)
}

// --- JSON wire form ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawBound {
    Num(f64),
    Word(String),
}

impl RawBound {
    fn to_f64(&self) -> std::result::Result<f64, String> {
        match self {
            RawBound::Num(v) => Ok(*v),
            RawBound::Word(w) if w == "inf" => Ok(f64::INFINITY),
            RawBound::Word(w) => Err(format!("expected a number or \"inf\", got {w:?}")),
        }
    }

    fn from_f64(v: f64) -> Self {
        if v.is_infinite() {
            RawBound::Word("inf".into())
        } else {
            RawBound::Num(v)
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawSegment {
    Constant {
        lo: f64,
        hi: RawBound,
        p: f64,
        q: f64,
        r: f64,
    },
    Exprs {
        lo: f64,
        hi: RawBound,
        expr_p: String,
        expr_q: String,
        expr_r: String,
    },
}

#[derive(Serialize, Deserialize)]
struct RawCoeffs {
    a: f64,
    b: RawBound,
    segments: Vec<RawSegment>,
}

impl RawCoeffs {
    fn build(self) -> Result<CoefficientSet> {
        let b = self.b.to_f64().map_err(Error::InvalidCoefficients)?;
        let mut segments = Vec::with_capacity(self.segments.len());
        for raw in self.segments {
            segments.push(match raw {
                RawSegment::Constant { lo, hi, p, q, r } => Segment::constant(
                    lo,
                    hi.to_f64().map_err(Error::InvalidCoefficients)?,
                    p,
                    q,
                    r,
                ),
                RawSegment::Exprs {
                    lo,
                    hi,
                    expr_p,
                    expr_q,
                    expr_r,
                } => Segment::from_exprs(
                    lo,
                    hi.to_f64().map_err(Error::InvalidCoefficients)?,
                    &expr_p,
                    &expr_q,
                    &expr_r,
                )?,
            });
        }
        CoefficientSet::new(self.a, b, segments)
    }
}

impl TryFrom<&CoefficientSet> for RawCoeffs {
    type Error = String;

    fn try_from(c: &CoefficientSet) -> std::result::Result<Self, String> {
        let mut segments = Vec::with_capacity(c.segments.len());
        for seg in &c.segments {
            let hi = RawBound::from_f64(seg.x_hi);
            segments.push(match &seg.kind {
                SegmentKind::Constant { p, q, r } => RawSegment::Constant {
                    lo: seg.x_lo,
                    hi,
                    p: *p,
                    q: *q,
                    r: *r,
                },
                SegmentKind::Callable { p, q, r, .. } => {
                    let (sp, sq, sr) = match (p.expr_source(), q.expr_source(), r.expr_source()) {
                        (Some(sp), Some(sq), Some(sr)) => (sp, sq, sr),
                        _ => {
                            return Err(format!(
                                "segment [{}, {}) holds opaque closures",
                                seg.x_lo, seg.x_hi
                            ))
                        }
                    };
                    RawSegment::Exprs {
                        lo: seg.x_lo,
                        hi,
                        expr_p: sp.to_owned(),
                        expr_q: sq.to_owned(),
                        expr_r: sr.to_owned(),
                    }
                }
            });
        }
        Ok(RawCoeffs {
            a: c.a,
            b: RawBound::from_f64(c.b),
            segments,
        })
    }
}

impl Serialize for CoefficientSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawCoeffs::try_from(self).map_err(S::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoefficientSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCoeffs::deserialize(deserializer)?;
        raw.build().map_err(D::Error::custom)
    }
}
