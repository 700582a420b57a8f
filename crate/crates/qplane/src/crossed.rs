//! Finite sums Σₖ fₖ·Uᵏ (+ c·1) over a q-scaled spectrum, and matrices of
//! them.
//!
//! `U` implements the q-dilation: moving a function across a power of `U`
//! applies the exact exponent-shift action, `Uᵐ f = (α^m f) Uᵐ` with
//! `(α^m f)(x) = f(qᵐ x)`. Products and adjoints therefore stay in the
//! normal form "function to the left of the shift":
//!
//! * `(f Uᵐ)(g Uⁿ) = f · (α^m g) · U^{m+n}`
//! * `(f Uⁿ)* = (α^{-n} f̄) · U^{-n}`
//!
//! The optional scalar `c·1` adjoins a unit. Membership in the non-unitized
//! algebra requires every coefficient to vanish at ∞, the k ≠ 0 coefficients
//! to vanish at 0, and c = 0; membership in the unitization frees the k = 0
//! coefficient and the scalar.

use crate::funcspace::{FuncError, QFunction};
use crate::spectral::SpectralSet;
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CrossedError {
    #[error("elements live over different spectra")]
    AmbientMismatch,
    #[error("element is not in the unitized algebra (a k≠0 coefficient fails to vanish at 0 or ∞)")]
    NotInUnitization,
    #[error("matrix dimensions {0}x{0} and {1}x{1} do not match")]
    SizeMismatch(usize, usize),
    #[error("matrix needs {expected} entries, got {got}")]
    BadEntryCount { expected: usize, got: usize },
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// One element Σₖ fₖ·Uᵏ + c·1 in normal form (zero step coefficients are
/// pruned; a smooth coefficient is kept even if it happens to be zero).
#[derive(Clone, Debug)]
pub struct CrossedElement {
    ambient: SpectralSet,
    unital: BigRational,
    coeffs: BTreeMap<i64, QFunction>,
}

impl CrossedElement {
    pub fn zero(ambient: SpectralSet) -> Self {
        CrossedElement {
            ambient,
            unital: BigRational::zero(),
            coeffs: BTreeMap::new(),
        }
    }

    /// The adjoined unit `1` (unitization only).
    pub fn unit(ambient: SpectralSet) -> Self {
        Self::scalar(ambient, BigRational::from_integer(1.into()))
    }

    pub fn scalar(ambient: SpectralSet, c: BigRational) -> Self {
        CrossedElement {
            ambient,
            unital: c,
            coeffs: BTreeMap::new(),
        }
    }

    /// A multiplication operator: f·U⁰.
    pub fn from_function(ambient: SpectralSet, f: QFunction) -> Self {
        Self::monomial(ambient, 0, f)
    }

    /// A single term f·Uᵏ.
    pub fn monomial(ambient: SpectralSet, k: i64, f: QFunction) -> Self {
        let mut coeffs = BTreeMap::new();
        if !f.is_exactly_zero() {
            coeffs.insert(k, f);
        }
        CrossedElement {
            ambient,
            unital: BigRational::zero(),
            coeffs,
        }
    }

    pub fn ambient(&self) -> &SpectralSet {
        &self.ambient
    }

    pub fn unital_part(&self) -> &BigRational {
        &self.unital
    }

    pub fn coefficient(&self, k: i64) -> Option<&QFunction> {
        self.coeffs.get(&k)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&i64, &QFunction)> {
        self.coeffs.iter()
    }

    /// Largest |k| among the shift powers present.
    pub fn max_power(&self) -> i64 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    fn check_ambient(&self, other: &Self) -> Result<(), CrossedError> {
        if self.ambient != other.ambient {
            return Err(CrossedError::AmbientMismatch);
        }
        Ok(())
    }

    fn insert_term(coeffs: &mut BTreeMap<i64, QFunction>, q: &BigRational, k: i64, f: QFunction) {
        if f.is_exactly_zero() {
            return;
        }
        match coeffs.remove(&k) {
            None => {
                coeffs.insert(k, f);
            }
            Some(existing) => {
                let sum = existing.add(&f, q);
                if !sum.is_exactly_zero() {
                    coeffs.insert(k, sum);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, CrossedError> {
        self.check_ambient(other)?;
        let q = self.ambient.q().clone();
        let mut coeffs = self.coeffs.clone();
        for (k, f) in &other.coeffs {
            Self::insert_term(&mut coeffs, &q, *k, f.clone());
        }
        Ok(CrossedElement {
            ambient: self.ambient.clone(),
            unital: &self.unital + &other.unital,
            coeffs,
        })
    }

    pub fn neg(&self) -> Self {
        CrossedElement {
            ambient: self.ambient.clone(),
            unital: -self.unital.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, f)| (*k, f.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CrossedError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.ambient.clone());
        }
        CrossedElement {
            ambient: self.ambient.clone(),
            unital: &self.unital * c,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, f)| (*k, f.scale(c)))
                .collect(),
        }
    }

    /// Product in normal form: cross terms pick up the dilation action.
    pub fn multiply(&self, other: &Self) -> Result<Self, CrossedError> {
        self.check_ambient(other)?;
        let q = self.ambient.q().clone();
        let mut coeffs: BTreeMap<i64, QFunction> = BTreeMap::new();
        for (m, f) in &self.coeffs {
            for (n, g) in &other.coeffs {
                let term = f.mul(&g.alpha_shift(*m, &q), &q);
                Self::insert_term(&mut coeffs, &q, m + n, term);
            }
        }
        if !self.unital.is_zero() {
            for (n, g) in &other.coeffs {
                Self::insert_term(&mut coeffs, &q, *n, g.scale(&self.unital));
            }
        }
        if !other.unital.is_zero() {
            for (m, f) in &self.coeffs {
                Self::insert_term(&mut coeffs, &q, *m, f.scale(&other.unital));
            }
        }
        Ok(CrossedElement {
            ambient: self.ambient.clone(),
            unital: &self.unital * &other.unital,
            coeffs,
        })
    }

    /// Adjoint: (f Uⁿ)* = (α^{-n} f̄) U^{-n}; the scalar part is real.
    pub fn adjoint(&self) -> Self {
        let q = self.ambient.q().clone();
        CrossedElement {
            ambient: self.ambient.clone(),
            unital: self.unital.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(n, f)| (-n, f.conj().alpha_shift(-n, &q)))
                .collect(),
        }
    }

    /// Membership test. `unital = false` asks for the algebra generated by
    /// the operator pair itself; `unital = true` for its unitization.
    pub fn is_member(&self, unital: bool) -> bool {
        for (k, f) in &self.coeffs {
            if *k != 0 && !(f.vanishes_at_zero() && f.vanishes_at_infinity()) {
                return false;
            }
            if *k == 0 && !unital && !f.vanishes_at_infinity() {
                return false;
            }
        }
        if !unital && !self.unital.is_zero() {
            return false;
        }
        true
    }

    /// Character at the fixed point 0: Σₖ fₖ(0) + c.
    pub fn ev_zero(&self) -> f64 {
        let mut s = self.unital.to_f64().unwrap_or(f64::NAN);
        for f in self.coeffs.values() {
            s += f.at_zero_f64();
        }
        s
    }

    /// Exact version of [`ev_zero`](Self::ev_zero), available when every
    /// coefficient is a step function.
    pub fn ev_zero_exact(&self) -> Option<BigRational> {
        let mut s = self.unital.clone();
        for f in self.coeffs.values() {
            s += f.at_zero_exact()?;
        }
        Some(s)
    }

    /// Character at ∞ of the unitization: f₀(∞) + c. Errors when the element
    /// is not in the unitized algebra.
    pub fn ev_infinity(&self) -> Result<f64, CrossedError> {
        if !self.is_member(true) {
            return Err(CrossedError::NotInUnitization);
        }
        let f0 = self
            .coeffs
            .get(&0)
            .map(|f| f.at_infinity_f64())
            .unwrap_or(0.0);
        Ok(f0 + self.unital.to_f64().unwrap_or(f64::NAN))
    }

    pub fn ev_infinity_exact(&self) -> Result<Option<BigRational>, CrossedError> {
        if !self.is_member(true) {
            return Err(CrossedError::NotInUnitization);
        }
        let f0 = match self.coeffs.get(&0) {
            None => Some(BigRational::zero()),
            Some(f) => f.at_infinity_exact(),
        };
        Ok(f0.map(|v| v + &self.unital))
    }

    /// The k = 0 coefficient with the unital constant folded in, as one
    /// function. This is the function whose values (against its own limits at
    /// 0 and ∞) drive traces and index sums; constants cancel there term by
    /// term, so folding them in is harmless and keeps call sites uniform.
    pub fn k0_with_unit(&self) -> QFunction {
        let c = QFunction::Step(crate::funcspace::StepFunction::constant(self.unital.clone()));
        match self.coeffs.get(&0) {
            None => c,
            Some(f) => {
                if self.unital.is_zero() {
                    f.clone()
                } else {
                    f.add(&c, self.ambient.q())
                }
            }
        }
    }

    /// Exact equality, decidable when every coefficient on both sides is a
    /// step function; `None` otherwise.
    pub fn eq_exact(&self, other: &Self) -> Option<bool> {
        if self.ambient != other.ambient {
            return Some(false);
        }
        if self.unital != other.unital {
            return Some(false);
        }
        let q = self.ambient.q();
        // Zero step coefficients are pruned, so the key sets must agree.
        let keys: std::collections::BTreeSet<i64> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .collect();
        for k in keys {
            match (self.coeffs.get(&k), other.coeffs.get(&k)) {
                (None, None) => {}
                (Some(f), None) | (None, Some(f)) => {
                    if !f.is_exactly_zero() {
                        return if f.is_step() { Some(false) } else { None };
                    }
                }
                (Some(a), Some(b)) => match (a.as_step(), b.as_step()) {
                    (Some(x), Some(y)) => {
                        if !x.eq_in(y, q) {
                            return Some(false);
                        }
                    }
                    _ => return None,
                },
            }
        }
        Some(true)
    }
}

/// A square matrix over the crossed-product algebra, row-major.
#[derive(Clone, Debug)]
pub struct CrossedMatrix {
    ambient: SpectralSet,
    n: usize,
    entries: Vec<CrossedElement>,
}

impl CrossedMatrix {
    pub fn new(
        ambient: SpectralSet,
        n: usize,
        entries: Vec<CrossedElement>,
    ) -> Result<Self, CrossedError> {
        if entries.len() != n * n {
            return Err(CrossedError::BadEntryCount {
                expected: n * n,
                got: entries.len(),
            });
        }
        for e in &entries {
            if e.ambient() != &ambient {
                return Err(CrossedError::AmbientMismatch);
            }
        }
        Ok(CrossedMatrix {
            ambient,
            n,
            entries,
        })
    }

    pub fn zero(ambient: SpectralSet, n: usize) -> Self {
        let entries = (0..n * n)
            .map(|_| CrossedElement::zero(ambient.clone()))
            .collect();
        CrossedMatrix {
            ambient,
            n,
            entries,
        }
    }

    pub fn identity(ambient: SpectralSet, n: usize) -> Self {
        let mut m = Self::zero(ambient.clone(), n);
        for i in 0..n {
            m.entries[i * n + i] = CrossedElement::unit(ambient.clone());
        }
        m
    }

    /// 1×1 wrapper around a single element.
    pub fn from_element(e: CrossedElement) -> Self {
        CrossedMatrix {
            ambient: e.ambient().clone(),
            n: 1,
            entries: vec![e],
        }
    }

    pub fn from_diagonal(diag: Vec<CrossedElement>) -> Result<Self, CrossedError> {
        let n = diag.len();
        let ambient = diag
            .first()
            .map(|e| e.ambient().clone())
            .ok_or(CrossedError::BadEntryCount {
                expected: 1,
                got: 0,
            })?;
        let mut m = Self::zero(ambient.clone(), n);
        for (i, e) in diag.into_iter().enumerate() {
            if e.ambient() != &ambient {
                return Err(CrossedError::AmbientMismatch);
            }
            m.entries[i * n + i] = e;
        }
        Ok(m)
    }

    pub fn ambient(&self) -> &SpectralSet {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &CrossedElement {
        &self.entries[i * self.n + j]
    }

    pub fn max_power(&self) -> i64 {
        self.entries.iter().map(|e| e.max_power()).max().unwrap_or(0)
    }

    fn check_shape(&self, other: &Self) -> Result<(), CrossedError> {
        if self.ambient != other.ambient {
            return Err(CrossedError::AmbientMismatch);
        }
        if self.n != other.n {
            return Err(CrossedError::SizeMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, CrossedError> {
        self.check_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CrossedMatrix {
            ambient: self.ambient.clone(),
            n: self.n,
            entries,
        })
    }

    pub fn neg(&self) -> Self {
        CrossedMatrix {
            ambient: self.ambient.clone(),
            n: self.n,
            entries: self.entries.iter().map(|e| e.neg()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CrossedError> {
        self.add(&other.neg())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, CrossedError> {
        self.check_shape(other)?;
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = CrossedElement::zero(self.ambient.clone());
                for k in 0..n {
                    acc = acc.add(&self.entry(i, k).multiply(other.entry(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(CrossedMatrix {
            ambient: self.ambient.clone(),
            n,
            entries,
        })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.entry(j, i).adjoint());
            }
        }
        CrossedMatrix {
            ambient: self.ambient.clone(),
            n,
            entries,
        }
    }

    /// Direct sum along the diagonal.
    pub fn block_diag(&self, other: &Self) -> Result<Self, CrossedError> {
        if self.ambient != other.ambient {
            return Err(CrossedError::AmbientMismatch);
        }
        let n = self.n + other.n;
        let mut m = Self::zero(self.ambient.clone(), n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.entries[i * n + j] = self.entry(i, j).clone();
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                m.entries[(self.n + i) * n + (self.n + j)] = other.entry(i, j).clone();
            }
        }
        Ok(m)
    }

    pub fn is_member(&self, unital: bool) -> bool {
        self.entries.iter().all(|e| e.is_member(unital))
    }

    /// The numeric matrix of characters at 0.
    pub fn ev_zero_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).ev_zero())
    }

    /// The numeric matrix of characters at ∞ (unitization membership required).
    pub fn ev_infinity_matrix(&self) -> Result<DMatrix<f64>, CrossedError> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.entry(i, j).ev_infinity()?;
            }
        }
        Ok(m)
    }
}
