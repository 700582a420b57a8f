//! Exact arithmetic on numbers of the form `r · q^m`.
//!
//! The deformation parameter `q` is a fixed rational in (0,1) chosen by the
//! caller. Points of a q-scaled spectrum are rationals times integer powers
//! of `q`; keeping the rational factor and the exponent separate makes
//! multiplication by `q` an exact exponent shift and keeps every comparison
//! in exact integer arithmetic. Powers of `q` are only materialized for the
//! (small) exponent differences that actually show up in a computation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// `q^k` as an exact rational, for signed `k`.
pub fn q_pow(q: &BigRational, k: i64) -> BigRational {
    if k == 0 {
        return BigRational::one();
    }
    debug_assert!(k.unsigned_abs() <= u32::MAX as u64, "q exponent out of range");
    let e = k.unsigned_abs() as u32;
    let n: BigInt = Pow::pow(q.numer(), e);
    let d: BigInt = Pow::pow(q.denom(), e);
    if k > 0 {
        BigRational::new(n, d)
    } else {
        BigRational::new(d, n)
    }
}

/// `q^k` in floating point; underflows to 0 / overflows to +inf for huge |k|.
pub fn q_pow_f64(q: f64, k: i64) -> f64 {
    let k32 = k.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    q.powi(k32)
}

/// A nonnegative number `r · q^m` with `r` rational and `m` a signed exponent.
///
/// The representation is not unique; [`ScaledRational::normalized`] reduces a
/// positive value to the canonical form with `r ∈ (q, 1]`. All value-level
/// operations take `q` explicitly.
#[derive(Clone, Debug)]
pub struct ScaledRational {
    r: BigRational,
    m: i64,
}

impl ScaledRational {
    pub fn new(r: BigRational, m: i64) -> Self {
        ScaledRational { r, m }
    }

    pub fn from_rational(r: BigRational) -> Self {
        ScaledRational { r, m: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        ScaledRational {
            r: BigRational::from_integer(BigInt::from(n)),
            m: 0,
        }
    }

    /// `q^m` itself.
    pub fn q_power(m: i64) -> Self {
        ScaledRational {
            r: BigRational::one(),
            m,
        }
    }

    pub fn zero() -> Self {
        ScaledRational {
            r: BigRational::zero(),
            m: 0,
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.r
    }

    pub fn exponent(&self) -> i64 {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.r.is_negative()
    }

    /// Materialize the exact value `r · q^m`.
    pub fn value(&self, q: &BigRational) -> BigRational {
        if self.r.is_zero() {
            return BigRational::zero();
        }
        &self.r * q_pow(q, self.m)
    }

    pub fn to_f64(&self, q: &BigRational) -> f64 {
        let rf = self.r.to_f64().unwrap_or(f64::NAN);
        let qf = q.to_f64().unwrap_or(f64::NAN);
        rf * q_pow_f64(qf, self.m)
    }

    /// Exact multiplication by `q^k`: a pure exponent shift.
    pub fn mul_q_pow(&self, k: i64) -> Self {
        if self.r.is_zero() {
            return self.clone();
        }
        ScaledRational {
            r: self.r.clone(),
            m: self.m + k,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        ScaledRational {
            r: &self.r * c,
            m: self.m,
        }
    }

    /// Canonical form of a positive value: rational part in `(q, 1]`.
    /// Zero is returned unchanged.
    pub fn normalized(&self, q: &BigRational) -> Self {
        if self.r.is_zero() {
            return Self::zero();
        }
        debug_assert!(self.r.is_positive(), "normalized() needs a nonnegative value");
        let one = BigRational::one();
        let mut r = self.r.clone();
        let mut m = self.m;
        while r > one {
            r *= q;
            m -= 1;
        }
        while r <= *q {
            r /= q;
            m += 1;
        }
        ScaledRational { r, m }
    }

    /// Exponent of the canonical form, i.e. the unique `k` with the value in
    /// `(q^{k+1}, q^k]`. `None` for zero.
    pub fn normalized_exponent(&self, q: &BigRational) -> Option<i64> {
        if self.r.is_zero() {
            None
        } else {
            Some(self.normalized(q).m)
        }
    }

    /// Exact value comparison.
    pub fn cmp_in(&self, other: &Self, q: &BigRational) -> Ordering {
        // Signs first: the scale factor q^m is positive.
        match (self.r.is_zero(), other.r.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => {
                return if other.r.is_positive() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (false, true) => {
                return if self.r.is_positive() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            _ => {}
        }
        // Compare r_a · q^(m_a - m_b) against r_b; only the exponent
        // difference is ever materialized.
        let d = self.m - other.m;
        let lhs = &self.r * q_pow(q, d);
        lhs.cmp(&other.r)
    }

    pub fn eq_in(&self, other: &Self, q: &BigRational) -> bool {
        self.cmp_in(other, q) == Ordering::Equal
    }

    /// Exact midpoint `(a + b)/2`.
    pub fn midpoint(&self, other: &Self, q: &BigRational) -> Self {
        let m0 = self.m.min(other.m);
        let a = &self.r * q_pow(q, self.m - m0);
        let b = &other.r * q_pow(q, other.m - m0);
        ScaledRational {
            r: (a + b) / BigRational::from_integer(BigInt::from(2)),
            m: m0,
        }
    }
}

impl fmt::Display for ScaledRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.r.is_zero() {
            return write!(f, "0");
        }
        match (self.m, self.r.is_one()) {
            (0, _) => write!(f, "{}", self.r),
            (1, true) => write!(f, "q"),
            (1, false) => write!(f, "{}*q", self.r),
            (m, true) => write!(f, "q^{}", m),
            (m, false) => write!(f, "{}*q^{}", self.r, m),
        }
    }
}
