//! Coefficient functions on the closed half line [0, ∞].
//!
//! Two concrete classes cover everything the projection library needs:
//!
//! * [`StepFunction`] — piecewise-constant with rational values and
//!   `r·q^m` breakpoints, kept in an exact normal form so that sums,
//!   products, the q-dilation action and equality are all exact.
//! * [`SmoothFunction`] — an arbitrary f64 evaluator together with declared
//!   boundary values at 0 and ∞ and an optional support hint (an interval
//!   outside which the function is identically zero).
//!
//! [`QFunction`] is the tagged union the crossed-product layer works with;
//! operations stay exact as long as both operands are step functions and
//! fall back to composed evaluators otherwise. All functions here are
//! real-valued: every element this crate constructs has real coefficients,
//! so conjugation is the identity.

use crate::scaled::{q_pow_f64, ScaledRational};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FuncError {
    #[error("evaluation point {0} is negative")]
    NegativePoint(f64),
    #[error("bump index must be at least 1")]
    BadBumpIndex,
    #[error("invalid step pieces: {0}")]
    InvalidPieces(String),
}

/// Right endpoint of an interval on [0, ∞].
#[derive(Clone, Debug)]
pub enum Endpoint {
    Finite(ScaledRational),
    Infinity,
}

/// An interval on the half line with `r·q^m` endpoints.
#[derive(Clone, Debug)]
pub struct Interval {
    pub lo: ScaledRational,
    pub lo_closed: bool,
    pub hi: Endpoint,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: ScaledRational, lo_closed: bool, hi: Endpoint, hi_closed: bool) -> Self {
        let hi_closed = match hi {
            Endpoint::Infinity => false,
            Endpoint::Finite(_) => hi_closed,
        };
        Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
    }

    pub fn closed(lo: ScaledRational, hi: ScaledRational) -> Self {
        Self::new(lo, true, Endpoint::Finite(hi), true)
    }

    pub fn open(lo: ScaledRational, hi: ScaledRational) -> Self {
        Self::new(lo, false, Endpoint::Finite(hi), false)
    }

    /// [lo, hi)
    pub fn clopen(lo: ScaledRational, hi: ScaledRational) -> Self {
        Self::new(lo, true, Endpoint::Finite(hi), false)
    }

    pub fn is_empty(&self, q: &BigRational) -> bool {
        match &self.hi {
            Endpoint::Infinity => false,
            Endpoint::Finite(h) => match self.lo.cmp_in(h, q) {
                Ordering::Greater => true,
                Ordering::Equal => !(self.lo_closed && self.hi_closed),
                Ordering::Less => false,
            },
        }
    }

    pub fn contains(&self, t: &ScaledRational, q: &BigRational) -> bool {
        let above = match t.cmp_in(&self.lo, q) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        if !above {
            return false;
        }
        match &self.hi {
            Endpoint::Infinity => true,
            Endpoint::Finite(h) => match t.cmp_in(h, q) {
                Ordering::Less => true,
                Ordering::Equal => self.hi_closed,
                Ordering::Greater => false,
            },
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{},", if self.lo_closed { '[' } else { '(' }, self.lo)?;
        match &self.hi {
            Endpoint::Infinity => write!(f, "inf)"),
            Endpoint::Finite(h) => write!(f, "{}{}", h, if self.hi_closed { ']' } else { ')' }),
        }
    }
}

#[derive(Clone, Debug)]
struct Piece {
    interval: Interval,
    value: BigRational,
}

/// A piecewise-constant function on [0, ∞] in exact normal form: pieces are
/// sorted, pairwise disjoint, carry nonzero rational values, and adjacent
/// pieces that could be merged have been. The function is 0 off the pieces;
/// its value at ∞ is the value of the unbounded piece (0 if none).
#[derive(Clone, Debug, Default)]
pub struct StepFunction {
    pieces: Vec<Piece>,
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction { pieces: Vec::new() }
    }

    /// The constant function `v` on all of [0, ∞].
    pub fn constant(v: BigRational) -> Self {
        if v.is_zero() {
            return Self::zero();
        }
        StepFunction {
            pieces: vec![Piece {
                interval: Interval::new(ScaledRational::zero(), true, Endpoint::Infinity, false),
                value: v,
            }],
        }
    }

    /// Indicator of an interval (value 1 on it, 0 elsewhere).
    pub fn indicator(interval: Interval, q: &BigRational) -> Result<Self, FuncError> {
        if interval.lo.is_negative() {
            return Err(FuncError::InvalidPieces(
                "interval extends below zero".into(),
            ));
        }
        if interval.is_empty(q) {
            return Ok(Self::zero());
        }
        Ok(StepFunction {
            pieces: vec![Piece {
                interval,
                value: BigRational::from_integer(1.into()),
            }],
        })
    }

    /// Build from explicit (interval, value) pairs; the pieces must be
    /// pairwise disjoint. The result is renormalized (zero values dropped,
    /// touching equal-valued pieces merged).
    pub fn from_pieces(
        pieces: Vec<(Interval, BigRational)>,
        q: &BigRational,
    ) -> Result<Self, FuncError> {
        let mut kept: Vec<Piece> = Vec::new();
        for (interval, value) in pieces {
            if interval.lo.is_negative() {
                return Err(FuncError::InvalidPieces(
                    "interval extends below zero".into(),
                ));
            }
            if interval.is_empty(q) {
                continue;
            }
            kept.push(Piece { interval, value });
        }
        kept.sort_by(|a, b| a.interval.lo.cmp_in(&b.interval.lo, q));
        for w in kept.windows(2) {
            let overlap = match &w[0].interval.hi {
                Endpoint::Infinity => true,
                Endpoint::Finite(h) => match h.cmp_in(&w[1].interval.lo, q) {
                    Ordering::Greater => true,
                    Ordering::Equal => w[0].interval.hi_closed && w[1].interval.lo_closed,
                    Ordering::Less => false,
                },
            };
            if overlap {
                return Err(FuncError::InvalidPieces(format!(
                    "pieces {} and {} overlap",
                    w[0].interval, w[1].interval
                )));
            }
        }
        let raw = StepFunction { pieces: kept };
        // Re-run the scanline against zero to reach the canonical form.
        Ok(raw.combine(&StepFunction::zero(), q, |a, _| a.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn value_at_zero(&self) -> BigRational {
        match self.pieces.first() {
            Some(p) if p.interval.lo.is_zero() && p.interval.lo_closed => p.value.clone(),
            _ => BigRational::zero(),
        }
    }

    /// Value at the point ∞ of the compactified half line (the unbounded
    /// piece's value; the function is continuous at ∞ by construction).
    pub fn value_at_infinity(&self) -> BigRational {
        match self.pieces.last() {
            Some(p) if matches!(p.interval.hi, Endpoint::Infinity) => p.value.clone(),
            _ => BigRational::zero(),
        }
    }

    pub fn value_at(&self, t: &ScaledRational, q: &BigRational) -> Result<BigRational, FuncError> {
        if t.is_negative() {
            return Err(FuncError::NegativePoint(t.to_f64(q)));
        }
        for p in &self.pieces {
            if p.interval.contains(t, q) {
                return Ok(p.value.clone());
            }
        }
        Ok(BigRational::zero())
    }

    fn value_at_rational(&self, x: &BigRational, q: &BigRational) -> BigRational {
        self.value_at(&ScaledRational::from_rational(x.clone()), q)
            .expect("nonnegative point")
    }

    /// All finite positive breakpoints, as exact scaled rationals.
    pub fn breakpoints(&self) -> Vec<ScaledRational> {
        let mut out = Vec::new();
        for p in &self.pieces {
            if !p.interval.lo.is_zero() {
                out.push(p.interval.lo.clone());
            }
            if let Endpoint::Finite(h) = &p.interval.hi {
                out.push(h.clone());
            }
        }
        out
    }

    /// Limit from the right at 0 (the value just above 0).
    pub fn value_near_zero(&self, q: &BigRational) -> BigRational {
        let cuts: Vec<BigRational> = self
            .breakpoints()
            .iter()
            .map(|c| c.value(q))
            .filter(|v| v.is_positive())
            .collect();
        let sample = match cuts.iter().min() {
            None => BigRational::from_integer(1.into()),
            Some(min) => min / BigRational::from_integer(2.into()),
        };
        self.value_at_rational(&sample, q)
    }

    /// Limit at ∞ along the real line (the value beyond the last breakpoint).
    pub fn value_near_infinity(&self, q: &BigRational) -> BigRational {
        let cuts: Vec<BigRational> = self.breakpoints().iter().map(|c| c.value(q)).collect();
        let sample = match cuts.iter().max() {
            None => BigRational::from_integer(1.into()),
            Some(max) => max * BigRational::from_integer(2.into()) + BigRational::from_integer(1.into()),
        };
        self.value_at_rational(&sample, q)
    }

    /// Scanline combination: evaluates `op` on every elementary region of the
    /// common refinement and rebuilds the normal form. Exact.
    fn combine(
        &self,
        other: &StepFunction,
        q: &BigRational,
        op: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> StepFunction {
        let mut cuts: Vec<BigRational> = vec![BigRational::zero()];
        for f in [self, other] {
            for p in &f.pieces {
                cuts.push(p.interval.lo.value(q));
                if let Endpoint::Finite(h) = &p.interval.hi {
                    cuts.push(h.value(q));
                }
            }
        }
        cuts.sort();
        cuts.dedup();

        // Elementary regions in order: {c0}, (c0,c1), {c1}, ..., {cn}, (cn, ∞).
        // Start/end data: (start, start_closed, end, end_closed); end None = ∞.
        struct Region {
            start: BigRational,
            start_closed: bool,
            end: Option<BigRational>,
            value: BigRational,
        }
        let two = BigRational::from_integer(2.into());
        let one = BigRational::from_integer(1.into());
        let mut regions: Vec<Region> = Vec::with_capacity(2 * cuts.len());
        for (i, c) in cuts.iter().enumerate() {
            let v = op(
                &self.value_at_rational(c, q),
                &other.value_at_rational(c, q),
            );
            regions.push(Region {
                start: c.clone(),
                start_closed: true,
                end: Some(c.clone()),
                value: v,
            });
            let (sample, end) = match cuts.get(i + 1) {
                Some(next) => ((c + next) / &two, Some(next.clone())),
                None => (c + &one, None),
            };
            let v = op(
                &self.value_at_rational(&sample, q),
                &other.value_at_rational(&sample, q),
            );
            regions.push(Region {
                start: c.clone(),
                start_closed: false,
                end,
                value: v,
            });
        }

        // Merge runs of equal nonzero values into pieces. A point region {c}
        // contributes a closed endpoint, an open region an open one.
        struct Run {
            lo: BigRational,
            lo_closed: bool,
            hi: Option<BigRational>,
            hi_closed: bool,
            value: BigRational,
        }
        fn finish(run: Run) -> Piece {
            let (hi, hi_closed) = match run.hi {
                None => (Endpoint::Infinity, false),
                Some(c) => (
                    Endpoint::Finite(ScaledRational::from_rational(c)),
                    run.hi_closed,
                ),
            };
            Piece {
                interval: Interval {
                    lo: ScaledRational::from_rational(run.lo),
                    lo_closed: run.lo_closed,
                    hi,
                    hi_closed,
                },
                value: run.value,
            }
        }
        let mut pieces: Vec<Piece> = Vec::new();
        let mut current: Option<Run> = None;
        for r in regions {
            let is_point = r.end.as_ref() == Some(&r.start);
            if let Some(cur) = &mut current {
                if !r.value.is_zero() && cur.value == r.value {
                    cur.hi = r.end;
                    cur.hi_closed = is_point;
                    continue;
                }
                pieces.push(finish(current.take().unwrap()));
            }
            if !r.value.is_zero() {
                current = Some(Run {
                    lo: r.start,
                    lo_closed: r.start_closed,
                    hi: r.end,
                    hi_closed: is_point,
                    value: r.value,
                });
            }
        }
        if let Some(cur) = current {
            pieces.push(finish(cur));
        }
        StepFunction { pieces }
    }

    pub fn add(&self, other: &StepFunction, q: &BigRational) -> StepFunction {
        self.combine(other, q, |a, b| a + b)
    }

    pub fn sub(&self, other: &StepFunction, q: &BigRational) -> StepFunction {
        self.combine(other, q, |a, b| a - b)
    }

    pub fn mul(&self, other: &StepFunction, q: &BigRational) -> StepFunction {
        self.combine(other, q, |a, b| a * b)
    }

    pub fn neg(&self) -> StepFunction {
        StepFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    interval: p.interval.clone(),
                    value: -p.value.clone(),
                })
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> StepFunction {
        if c.is_zero() {
            return StepFunction::zero();
        }
        StepFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    interval: p.interval.clone(),
                    value: &p.value * c,
                })
                .collect(),
        }
    }

    /// The q-dilation action: `(α^m f)(x) = f(q^m x)`. Exact — every
    /// breakpoint exponent shifts by −m, values are untouched.
    pub fn alpha_shift(&self, m: i64) -> StepFunction {
        StepFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    interval: Interval {
                        lo: p.interval.lo.mul_q_pow(-m),
                        lo_closed: p.interval.lo_closed,
                        hi: match &p.interval.hi {
                            Endpoint::Infinity => Endpoint::Infinity,
                            Endpoint::Finite(h) => Endpoint::Finite(h.mul_q_pow(-m)),
                        },
                        hi_closed: p.interval.hi_closed,
                    },
                    value: p.value.clone(),
                })
                .collect(),
        }
    }

    /// Exact equality (both sides are in normal form, so this is piecewise).
    pub fn eq_in(&self, other: &StepFunction, q: &BigRational) -> bool {
        if self.pieces.len() != other.pieces.len() {
            return false;
        }
        self.pieces.iter().zip(&other.pieces).all(|(a, b)| {
            a.value == b.value
                && a.interval.lo.eq_in(&b.interval.lo, q)
                && a.interval.lo_closed == b.interval.lo_closed
                && a.interval.hi_closed == b.interval.hi_closed
                && match (&a.interval.hi, &b.interval.hi) {
                    (Endpoint::Infinity, Endpoint::Infinity) => true,
                    (Endpoint::Finite(x), Endpoint::Finite(y)) => x.eq_in(y, q),
                    _ => false,
                }
        })
    }

    /// Exact sup of |f| over [0, ∞].
    pub fn sup_abs(&self) -> BigRational {
        self.pieces
            .iter()
            .map(|p| p.value.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Freeze the pieces into f64 form for use inside smooth evaluators.
    pub fn compile_f64(&self, q: &BigRational) -> CompiledStep {
        CompiledStep {
            pieces: self
                .pieces
                .iter()
                .map(|p| {
                    let lo = p.interval.lo.to_f64(q);
                    let hi = match &p.interval.hi {
                        Endpoint::Infinity => f64::INFINITY,
                        Endpoint::Finite(h) => h.to_f64(q),
                    };
                    (
                        lo,
                        p.interval.lo_closed,
                        hi,
                        p.interval.hi_closed,
                        p.value.to_f64().unwrap_or(f64::NAN),
                    )
                })
                .collect(),
        }
    }
}

/// f64 snapshot of a step function for use inside smooth closures.
#[derive(Clone, Debug)]
pub struct CompiledStep {
    pieces: Vec<(f64, bool, f64, bool, f64)>,
}

impl CompiledStep {
    pub fn eval(&self, t: f64) -> f64 {
        for (lo, lo_c, hi, hi_c, v) in &self.pieces {
            let above = t > *lo || (*lo_c && t == *lo);
            let below = t < *hi || (*hi_c && t == *hi);
            if above && below {
                return *v;
            }
        }
        0.0
    }
}

/// A real function on [0, ∞] given by an f64 evaluator plus declared boundary
/// values and an optional support interval (closed hull, outside which the
/// function is identically zero).
#[derive(Clone)]
pub struct SmoothFunction {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    at_zero: f64,
    at_infinity: f64,
    support: Option<(ScaledRational, ScaledRational)>,
}

impl fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("at_zero", &self.at_zero)
            .field("at_infinity", &self.at_infinity)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl SmoothFunction {
    pub fn new(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        at_zero: f64,
        at_infinity: f64,
        support: Option<(ScaledRational, ScaledRational)>,
    ) -> Self {
        SmoothFunction {
            eval: Arc::new(eval),
            at_zero,
            at_infinity,
            support,
        }
    }

    pub fn from_step(s: &StepFunction, q: &BigRational) -> Self {
        let compiled = s.compile_f64(q);
        let at_zero = s.value_at_zero().to_f64().unwrap_or(f64::NAN);
        let at_infinity = s.value_at_infinity().to_f64().unwrap_or(f64::NAN);
        let support = match (s.pieces.first(), s.pieces.last()) {
            (Some(first), Some(last)) => match &last.interval.hi {
                Endpoint::Infinity => None,
                Endpoint::Finite(h) => Some((first.interval.lo.clone(), h.clone())),
            },
            _ => Some((ScaledRational::zero(), ScaledRational::zero())),
        };
        SmoothFunction::new(move |t| compiled.eval(t), at_zero, at_infinity, support)
    }

    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    pub fn at_infinity(&self) -> f64 {
        self.at_infinity
    }

    pub fn support(&self) -> Option<&(ScaledRational, ScaledRational)> {
        self.support.as_ref()
    }

    pub fn eval_f64(&self, t: f64) -> Result<f64, FuncError> {
        if t < 0.0 {
            return Err(FuncError::NegativePoint(t));
        }
        if t == 0.0 {
            return Ok(self.at_zero);
        }
        if t.is_infinite() {
            return Ok(self.at_infinity);
        }
        Ok((self.eval)(t))
    }

    pub fn add(&self, other: &SmoothFunction, q: &BigRational) -> SmoothFunction {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let support = match (&self.support, &other.support) {
            (Some((alo, ahi)), Some((blo, bhi))) => {
                let lo = if alo.cmp_in(blo, q) == Ordering::Less {
                    alo.clone()
                } else {
                    blo.clone()
                };
                let hi = if ahi.cmp_in(bhi, q) == Ordering::Greater {
                    ahi.clone()
                } else {
                    bhi.clone()
                };
                Some((lo, hi))
            }
            _ => None,
        };
        SmoothFunction {
            eval: Arc::new(move |t| a(t) + b(t)),
            at_zero: self.at_zero + other.at_zero,
            at_infinity: self.at_infinity + other.at_infinity,
            support,
        }
    }

    pub fn mul(&self, other: &SmoothFunction, q: &BigRational) -> SmoothFunction {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let support = match (&self.support, &other.support) {
            (Some((alo, ahi)), Some((blo, bhi))) => {
                let lo = if alo.cmp_in(blo, q) == Ordering::Greater {
                    alo.clone()
                } else {
                    blo.clone()
                };
                let hi = if ahi.cmp_in(bhi, q) == Ordering::Less {
                    ahi.clone()
                } else {
                    bhi.clone()
                };
                // An empty intersection means the product vanishes; keep a
                // degenerate hint so downstream windows stay tight.
                if lo.cmp_in(&hi, q) == Ordering::Greater {
                    Some((lo.clone(), lo))
                } else {
                    Some((lo, hi))
                }
            }
            (Some(s), None) | (None, Some(s)) => Some(s.clone()),
            (None, None) => None,
        };
        SmoothFunction {
            eval: Arc::new(move |t| a(t) * b(t)),
            at_zero: self.at_zero * other.at_zero,
            at_infinity: self.at_infinity * other.at_infinity,
            support,
        }
    }

    pub fn neg(&self) -> SmoothFunction {
        let a = self.eval.clone();
        SmoothFunction {
            eval: Arc::new(move |t| -a(t)),
            at_zero: -self.at_zero,
            at_infinity: -self.at_infinity,
            support: self.support.clone(),
        }
    }

    pub fn scale(&self, c: f64) -> SmoothFunction {
        let a = self.eval.clone();
        SmoothFunction {
            eval: Arc::new(move |t| c * a(t)),
            at_zero: c * self.at_zero,
            at_infinity: c * self.at_infinity,
            support: if c == 0.0 {
                Some((ScaledRational::zero(), ScaledRational::zero()))
            } else {
                self.support.clone()
            },
        }
    }

    /// The q-dilation action `(α^m f)(x) = f(q^m x)`; boundary values are
    /// unchanged and the support hint shifts by the exact exponent −m.
    pub fn alpha_shift(&self, m: i64, q: &BigRational) -> SmoothFunction {
        let a = self.eval.clone();
        let qm = q_pow_f64(q.to_f64().unwrap_or(f64::NAN), m);
        SmoothFunction {
            eval: Arc::new(move |t| a(qm * t)),
            at_zero: self.at_zero,
            at_infinity: self.at_infinity,
            support: self
                .support
                .as_ref()
                .map(|(lo, hi)| (lo.mul_q_pow(-m), hi.mul_q_pow(-m))),
        }
    }

    /// |evaluator(0) − declared at_zero| and |evaluator(q^-40) − declared
    /// at_infinity| — a spot check that the declared boundary metadata
    /// matches the evaluator's actual limits.
    pub fn boundary_consistency(&self, q: &BigRational) -> (f64, f64) {
        let qf = q.to_f64().unwrap_or(f64::NAN);
        let big = q_pow_f64(qf, -40);
        let z = ((self.eval)(0.0) - self.at_zero).abs();
        let i = ((self.eval)(big) - self.at_infinity).abs();
        (z, i)
    }
}

/// A coefficient function: exact step or declared-evaluator smooth.
#[derive(Clone, Debug)]
pub enum QFunction {
    Step(StepFunction),
    Smooth(SmoothFunction),
}

impl QFunction {
    pub fn zero() -> Self {
        QFunction::Step(StepFunction::zero())
    }

    pub fn is_step(&self) -> bool {
        matches!(self, QFunction::Step(_))
    }

    /// True only for a step function that is identically zero (a smooth
    /// function is never *known* to be zero).
    pub fn is_exactly_zero(&self) -> bool {
        matches!(self, QFunction::Step(s) if s.is_zero())
    }

    pub fn as_step(&self) -> Option<&StepFunction> {
        match self {
            QFunction::Step(s) => Some(s),
            QFunction::Smooth(_) => None,
        }
    }

    fn to_smooth(&self, q: &BigRational) -> SmoothFunction {
        match self {
            QFunction::Step(s) => SmoothFunction::from_step(s, q),
            QFunction::Smooth(s) => s.clone(),
        }
    }

    pub fn add(&self, other: &QFunction, q: &BigRational) -> QFunction {
        match (self, other) {
            (QFunction::Step(a), QFunction::Step(b)) => QFunction::Step(a.add(b, q)),
            _ => QFunction::Smooth(self.to_smooth(q).add(&other.to_smooth(q), q)),
        }
    }

    pub fn mul(&self, other: &QFunction, q: &BigRational) -> QFunction {
        match (self, other) {
            (QFunction::Step(a), QFunction::Step(b)) => QFunction::Step(a.mul(b, q)),
            _ => QFunction::Smooth(self.to_smooth(q).mul(&other.to_smooth(q), q)),
        }
    }

    pub fn sub(&self, other: &QFunction, q: &BigRational) -> QFunction {
        self.add(&other.neg(), q)
    }

    pub fn neg(&self) -> QFunction {
        match self {
            QFunction::Step(s) => QFunction::Step(s.neg()),
            QFunction::Smooth(s) => QFunction::Smooth(s.neg()),
        }
    }

    pub fn scale(&self, c: &BigRational) -> QFunction {
        match self {
            QFunction::Step(s) => QFunction::Step(s.scale(c)),
            QFunction::Smooth(s) => QFunction::Smooth(s.scale(c.to_f64().unwrap_or(f64::NAN))),
        }
    }

    /// Complex conjugation — the identity for these real-valued coefficients.
    pub fn conj(&self) -> QFunction {
        self.clone()
    }

    pub fn alpha_shift(&self, m: i64, q: &BigRational) -> QFunction {
        match self {
            QFunction::Step(s) => QFunction::Step(s.alpha_shift(m)),
            QFunction::Smooth(s) => QFunction::Smooth(s.alpha_shift(m, q)),
        }
    }

    pub fn at_zero_f64(&self) -> f64 {
        match self {
            QFunction::Step(s) => s.value_at_zero().to_f64().unwrap_or(f64::NAN),
            QFunction::Smooth(s) => s.at_zero(),
        }
    }

    pub fn at_infinity_f64(&self) -> f64 {
        match self {
            QFunction::Step(s) => s.value_at_infinity().to_f64().unwrap_or(f64::NAN),
            QFunction::Smooth(s) => s.at_infinity(),
        }
    }

    pub fn at_zero_exact(&self) -> Option<BigRational> {
        self.as_step().map(|s| s.value_at_zero())
    }

    pub fn at_infinity_exact(&self) -> Option<BigRational> {
        self.as_step().map(|s| s.value_at_infinity())
    }

    /// True when the declared boundary value at 0 (resp. ∞) is exactly zero.
    pub fn vanishes_at_zero(&self) -> bool {
        match self {
            QFunction::Step(s) => s.value_at_zero().is_zero(),
            QFunction::Smooth(s) => s.at_zero() == 0.0,
        }
    }

    pub fn vanishes_at_infinity(&self) -> bool {
        match self {
            QFunction::Step(s) => s.value_at_infinity().is_zero(),
            QFunction::Smooth(s) => s.at_infinity() == 0.0,
        }
    }

    pub fn eval_f64(&self, t: f64, q: &BigRational) -> Result<f64, FuncError> {
        match self {
            QFunction::Step(s) => {
                if t < 0.0 {
                    return Err(FuncError::NegativePoint(t));
                }
                if t.is_infinite() {
                    return Ok(s.value_at_infinity().to_f64().unwrap_or(f64::NAN));
                }
                Ok(s.compile_f64(q).eval(t))
            }
            QFunction::Smooth(s) => s.eval_f64(t),
        }
    }

    pub fn eval_scaled(&self, t: &ScaledRational, q: &BigRational) -> Result<f64, FuncError> {
        match self {
            QFunction::Step(s) => Ok(s.value_at(t, q)?.to_f64().unwrap_or(f64::NAN)),
            QFunction::Smooth(s) => s.eval_f64(t.to_f64(q)),
        }
    }
}

/// Sampling density for numerical sup norms: `points_per_domain` samples in
/// each fundamental domain (q^{k+1}, q^k], k ranging over ±`half_domains`
/// when no support hint narrows the window.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub points_per_domain: usize,
    pub half_domains: i64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_domain: 1024,
            half_domains: 64,
        }
    }
}

/// Estimated sup of |f|; exact for step functions.
#[derive(Clone, Copy, Debug)]
pub struct SupEstimate {
    pub sup: f64,
    pub exact: bool,
}

pub fn sup_abs(f: &QFunction, q: &BigRational, grid: &GridSpec) -> SupEstimate {
    match f {
        QFunction::Step(s) => SupEstimate {
            sup: s.sup_abs().to_f64().unwrap_or(f64::NAN),
            exact: true,
        },
        QFunction::Smooth(s) => {
            let qf = q.to_f64().unwrap_or(f64::NAN);
            let mut sup = s.at_zero().abs().max(s.at_infinity().abs());
            let (k_min, k_max) = match s.support() {
                Some((lo, hi)) => {
                    if lo.is_zero() && hi.is_zero() {
                        // declared identically zero
                        return SupEstimate { sup, exact: false };
                    }
                    let top = hi
                        .normalized_exponent(q)
                        .unwrap_or(-grid.half_domains);
                    let bot = lo
                        .normalized_exponent(q)
                        .map(|e| e + 1)
                        .unwrap_or(grid.half_domains);
                    (top, bot.max(top))
                }
                None => (-grid.half_domains, grid.half_domains),
            };
            for k in k_min..=k_max {
                let t_hi = q_pow_f64(qf, k);
                let t_lo = q_pow_f64(qf, k + 1);
                if !t_hi.is_finite() || t_hi == 0.0 {
                    continue;
                }
                let n = grid.points_per_domain.max(1);
                for j in 0..=n {
                    let t = t_lo + (t_hi - t_lo) * (j as f64) / (n as f64);
                    let v = (s.eval)(t).abs();
                    if v.is_nan() {
                        return SupEstimate {
                            sup: f64::INFINITY,
                            exact: false,
                        };
                    }
                    if v > sup {
                        sup = v;
                    }
                }
            }
            SupEstimate { sup, exact: false }
        }
    }
}

/// Grid-based approximate equality (exact for two step functions).
pub fn approx_eq(a: &QFunction, b: &QFunction, q: &BigRational, grid: &GridSpec, tol: f64) -> bool {
    match (a, b) {
        (QFunction::Step(x), QFunction::Step(y)) => x.eq_in(y, q),
        _ => sup_abs(&a.sub(b, q), q, grid).sup <= tol,
    }
}

/// The ramp, its half-circle companion, and the plateau bump used by the
/// one-dimensional projections.
pub struct BumpFunctions {
    /// Linear ramp from 0 at q to 1 at 1, clamped outside [q, 1].
    pub phi: SmoothFunction,
    /// √(φ(1−φ)) on [q, 1], zero elsewhere.
    pub h: SmoothFunction,
    /// Ramp up on [q,1], plateau 1 on (1, q^{1−n}), ramp down (via φ(qⁿt))
    /// on [q^{1−n}, q^{−n}], zero elsewhere.
    pub f_n: SmoothFunction,
}

pub fn bump_functions(q: &BigRational, n: u32) -> Result<BumpFunctions, FuncError> {
    if n == 0 {
        return Err(FuncError::BadBumpIndex);
    }
    let qf = q.to_f64().unwrap_or(f64::NAN);
    let ramp = move |t: f64| ((t - qf) / (1.0 - qf)).clamp(0.0, 1.0);

    let phi = SmoothFunction::new(ramp, 0.0, 1.0, None);

    let h = SmoothFunction::new(
        move |t: f64| {
            if !(qf..=1.0).contains(&t) {
                0.0
            } else {
                let p = ramp(t);
                (p * (1.0 - p)).sqrt()
            }
        },
        0.0,
        0.0,
        Some((ScaledRational::q_power(1), ScaledRational::q_power(0))),
    );

    let ni = n as i64;
    let q_up = q_pow_f64(qf, ni); // q^n
    let plateau_hi = q_pow_f64(qf, 1 - ni); // q^{1-n}
    let top = q_pow_f64(qf, -ni); // q^{-n}
    let f_n = SmoothFunction::new(
        move |t: f64| {
            if t < qf {
                0.0
            } else if t <= 1.0 {
                ramp(t)
            } else if t < plateau_hi {
                1.0
            } else if t <= top {
                1.0 - ramp(q_up * t)
            } else {
                0.0
            }
        },
        0.0,
        0.0,
        Some((ScaledRational::q_power(1), ScaledRational::q_power(-ni))),
    );

    Ok(BumpFunctions { phi, h, f_n })
}
