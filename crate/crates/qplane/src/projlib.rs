//! The standard projections over a q-scaled spectrum.
//!
//! Four families:
//!
//! * [`bott`] — 2×2 dilation-twisted projections P_n (n ≠ 0), built from the
//!   rational functions u/(1+u), √u/(1+u) of u = q^{-n(n-1)}t^{2n} and their
//!   v = q^{n(n+1)}t^{2n} partners, with the off-diagonal parts riding shift
//!   powers ∓n. They live in the unitization (the character at ∞ is nonzero).
//! * [`powers_rieffel`] — 1×1 plateau projections R_n carrying winding n,
//!   inside the non-unitized algebra.
//! * [`indicator`] — clopen indicators χ_I for intervals whose finite
//!   endpoints avoid the spectrum (so the restriction is continuous).
//! * [`unit`] — the adjoined unit as a 1×1 matrix.
//!
//! [`verify_projection`] measures ‖p² − p‖ and ‖p* − p‖ in the sup norm,
//! exactly for step entries and on a geometric grid for smooth ones.
//!
//! The 2×2 entries are evaluated in log space: with L = ln u, the diagonal
//! u/(1+u) is the logistic function of L and the off-diagonal √u/(1+u) is
//! 1/(2·cosh(L/2)). Both forms stay finite and NaN-free for every t in
//! [0, ∞], including points where u itself would overflow or underflow.

use crate::crossed::{CrossedElement, CrossedError, CrossedMatrix};
use crate::funcspace::{
    bump_functions, sup_abs, Endpoint, FuncError, GridSpec, Interval, QFunction, SmoothFunction,
    StepFunction,
};
use crate::scaled::ScaledRational;
use crate::spectral::SpectralSet;
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProjError {
    #[error("index {0} is not valid for this projection family")]
    BadIndex(i64),
    #[error("interval endpoint {0} lies in the spectrum; the indicator would be discontinuous")]
    EndpointInSpectrum(ScaledRational),
    #[error("0 belongs to every spectrum here, so an indicator must be closed at 0")]
    OpenAtZero,
    #[error("interval reaches below 0, outside the half line")]
    NegativeEndpoint,
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Crossed(#[from] CrossedError),
}

#[derive(Clone, Debug)]
pub enum ProjectionKind {
    /// 2×2 dilation-twisted projection with signed index n ≠ 0.
    Bott(i64),
    /// 1×1 plateau projection with winding n ≥ 1.
    PowersRieffel(i64),
    /// Indicator of a clopen subset cut out by one interval.
    Indicator(Interval),
    /// The adjoined unit.
    Unit,
}

/// A named projection (or at least a candidate — see [`verify_projection`]).
#[derive(Clone, Debug)]
pub struct Projection {
    label: String,
    kind: ProjectionKind,
    matrix: CrossedMatrix,
}

impl Projection {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &ProjectionKind {
        &self.kind
    }

    pub fn matrix(&self) -> &CrossedMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CrossedMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_member(&self, unital: bool) -> bool {
        self.matrix.is_member(unital)
    }

    pub fn verify(&self, tol: f64, grid: &GridSpec) -> Result<ProjectionReport, CrossedError> {
        verify_projection(&self.matrix, &self.label, tol, grid)
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// e^{x/2} / (1 + e^x) = 1 / (2·cosh(x/2)), finite for every x.
fn sech_half(x: f64) -> f64 {
    1.0 / (2.0 * (x / 2.0).cosh())
}

/// The 2×2 dilation-twisted projection with signed index n ≠ 0.
pub fn bott(n: i64, x: &SpectralSet) -> Result<Projection, ProjError> {
    if n == 0 {
        return Err(ProjError::BadIndex(0));
    }
    let m = n.unsigned_abs() as i64;
    let mf = m as f64;
    let lnq = x.q_f64().ln();
    let two_m = 2.0 * mf;
    // L_u(t) = ln(q^{-m(m-1)} t^{2m}),  L_v(t) = ln(q^{m(m+1)} t^{2m})
    let a_u = -(mf * (mf - 1.0)) * lnq;
    let a_v = (mf * (mf + 1.0)) * lnq;

    // u/(1+u): 0 at t=0, 1 at t=∞
    let diag_u = SmoothFunction::new(move |t: f64| logistic(a_u + two_m * t.ln()), 0.0, 1.0, None);
    // 1/(1+v): 1 at t=0, 0 at t=∞
    let diag_v = SmoothFunction::new(
        move |t: f64| logistic(-(a_v + two_m * t.ln())),
        1.0,
        0.0,
        None,
    );
    // v/(1+v) and 1/(1+u), the same pair with the roles of 0 and ∞ kept
    let diag_v_dir = SmoothFunction::new(move |t: f64| logistic(a_v + two_m * t.ln()), 0.0, 1.0, None);
    let diag_u_inv = SmoothFunction::new(
        move |t: f64| logistic(-(a_u + two_m * t.ln())),
        1.0,
        0.0,
        None,
    );
    // √u/(1+u) and √v/(1+v): vanish at both ends
    let off_u = SmoothFunction::new(move |t: f64| sech_half(a_u + two_m * t.ln()), 0.0, 0.0, None);
    let off_v = SmoothFunction::new(move |t: f64| sech_half(a_v + two_m * t.ln()), 0.0, 0.0, None);

    let entries = if n > 0 {
        vec![
            CrossedElement::from_function(x.clone(), QFunction::Smooth(diag_u)),
            CrossedElement::monomial(x.clone(), -m, QFunction::Smooth(off_u)),
            CrossedElement::monomial(x.clone(), m, QFunction::Smooth(off_v)),
            CrossedElement::from_function(x.clone(), QFunction::Smooth(diag_v)),
        ]
    } else {
        vec![
            CrossedElement::from_function(x.clone(), QFunction::Smooth(diag_v_dir)),
            CrossedElement::monomial(x.clone(), m, QFunction::Smooth(off_v)),
            CrossedElement::monomial(x.clone(), -m, QFunction::Smooth(off_u)),
            CrossedElement::from_function(x.clone(), QFunction::Smooth(diag_u_inv)),
        ]
    };
    Ok(Projection {
        label: format!("P_{}", n),
        kind: ProjectionKind::Bott(n),
        matrix: CrossedMatrix::new(x.clone(), 2, entries)?,
    })
}

/// The 1×1 plateau projection with winding n ≥ 1: (αⁿh)·Uⁿ + f_n + h·U⁻ⁿ.
pub fn powers_rieffel(n: i64, x: &SpectralSet) -> Result<Projection, ProjError> {
    if n < 1 {
        return Err(ProjError::BadIndex(n));
    }
    let q = x.q();
    let bumps = bump_functions(q, n as u32)?;
    let h = QFunction::Smooth(bumps.h);
    let f_n = QFunction::Smooth(bumps.f_n);
    let e = CrossedElement::monomial(x.clone(), n, h.alpha_shift(n, q))
        .add(&CrossedElement::from_function(x.clone(), f_n))?
        .add(&CrossedElement::monomial(x.clone(), -n, h))?;
    Ok(Projection {
        label: format!("R_{}", n),
        kind: ProjectionKind::PowersRieffel(n),
        matrix: CrossedMatrix::from_element(e),
    })
}

/// Indicator projection of a clopen subset: the interval's finite endpoints
/// must avoid the spectrum (0 may be swallowed by closing the interval
/// there; ∞ is always fine — the result then lives in the unitization only).
pub fn indicator(iv: &Interval, x: &SpectralSet) -> Result<Projection, ProjError> {
    if iv.lo.is_negative() {
        return Err(ProjError::NegativeEndpoint);
    }
    if iv.lo.is_zero() {
        if !iv.lo_closed {
            return Err(ProjError::OpenAtZero);
        }
    } else if x.in_spectrum(&iv.lo) {
        return Err(ProjError::EndpointInSpectrum(iv.lo.clone()));
    }
    if let Endpoint::Finite(h) = &iv.hi {
        if x.in_spectrum(h) {
            return Err(ProjError::EndpointInSpectrum(h.clone()));
        }
    }
    let step = StepFunction::indicator(iv.clone(), x.q())?;
    let e = CrossedElement::from_function(x.clone(), QFunction::Step(step));
    Ok(Projection {
        label: format!("χ_{}", iv),
        kind: ProjectionKind::Indicator(iv.clone()),
        matrix: CrossedMatrix::from_element(e),
    })
}

/// The adjoined unit as a 1×1 projection.
pub fn unit(x: &SpectralSet) -> Projection {
    Projection {
        label: "1".to_string(),
        kind: ProjectionKind::Unit,
        matrix: CrossedMatrix::from_element(CrossedElement::unit(x.clone())),
    }
}

/// χ_[0, q): the indicator of the part of the spectrum below the fundamental
/// window.
pub fn chi_zero_q(x: &SpectralSet) -> Result<Projection, ProjError> {
    indicator(
        &Interval::new(
            ScaledRational::zero(),
            true,
            Endpoint::Finite(ScaledRational::q_power(1)),
            false,
        ),
        x,
    )
}

/// χ_(c, 1) for a point c in a gap of the spectrum (e.g. a gap sample).
pub fn chi_gap(c: &BigRational, x: &SpectralSet) -> Result<Projection, ProjError> {
    indicator(
        &Interval::new(
            ScaledRational::from_rational(c.clone()),
            false,
            Endpoint::Finite(ScaledRational::q_power(0)),
            false,
        ),
        x,
    )
}

/// χ_(qⁿ, 1): the n-scale window below 1 (n ≥ 1).
pub fn chi_window(n: i64, x: &SpectralSet) -> Result<Projection, ProjError> {
    if n < 1 {
        return Err(ProjError::BadIndex(n));
    }
    indicator(
        &Interval::new(
            ScaledRational::q_power(n),
            false,
            Endpoint::Finite(ScaledRational::q_power(0)),
            false,
        ),
        x,
    )
}

/// Sup-norm residuals of the projection equations p² = p and p* = p.
#[derive(Clone, Debug)]
pub struct ProjectionReport {
    pub label: String,
    pub sup_err_idempotent: f64,
    pub sup_err_selfadjoint: f64,
    /// True when both residuals were computed exactly (all step data), in
    /// which case the sups are true values rather than grid estimates.
    pub exact: bool,
    pub pass: bool,
}

/// Largest coefficient sup over all entries, unital constants folded into
/// the k = 0 coefficients.
fn matrix_sup(m: &CrossedMatrix, grid: &GridSpec) -> (f64, bool) {
    let q = m.ambient().q();
    let mut worst = 0.0f64;
    let mut exact = true;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            let e = m.entry(i, j);
            let est = sup_abs(&e.k0_with_unit(), q, grid);
            worst = worst.max(est.sup);
            exact &= est.exact;
            for (k, f) in e.coefficients() {
                if *k != 0 {
                    let est = sup_abs(f, q, grid);
                    worst = worst.max(est.sup);
                    exact &= est.exact;
                }
            }
        }
    }
    (worst, exact)
}

pub fn verify_projection(
    m: &CrossedMatrix,
    label: &str,
    tol: f64,
    grid: &GridSpec,
) -> Result<ProjectionReport, CrossedError> {
    let d_idem = m.multiply(m)?.sub(m)?;
    let d_adj = m.adjoint().sub(m)?;
    let (sup_err_idempotent, e1) = matrix_sup(&d_idem, grid);
    let (sup_err_selfadjoint, e2) = matrix_sup(&d_adj, grid);
    Ok(ProjectionReport {
        label: label.to_string(),
        sup_err_idempotent,
        sup_err_selfadjoint,
        exact: e1 && e2,
        pass: sup_err_idempotent <= tol && sup_err_selfadjoint <= tol,
    })
}

/// Trace of the character matrix at 0, exact when all entries are steps.
pub fn trace_ev_zero_exact(m: &CrossedMatrix) -> Option<BigRational> {
    let mut s = BigRational::from_integer(0.into());
    for i in 0..m.dim() {
        s += m.entry(i, i).ev_zero_exact()?;
    }
    Some(s)
}

pub fn trace_ev_zero(m: &CrossedMatrix) -> f64 {
    (0..m.dim()).map(|i| m.entry(i, i).ev_zero()).sum()
}

/// Trace of the character matrix at ∞ (unitization members only).
pub fn trace_ev_infinity(m: &CrossedMatrix) -> Result<f64, CrossedError> {
    let mut s = 0.0;
    for i in 0..m.dim() {
        s += m.entry(i, i).ev_infinity()?;
    }
    Ok(s)
}

pub fn trace_ev_infinity_exact(m: &CrossedMatrix) -> Result<Option<BigRational>, CrossedError> {
    let mut s = BigRational::from_integer(0.into());
    for i in 0..m.dim() {
        match m.entry(i, i).ev_infinity_exact()? {
            None => return Ok(None),
            Some(v) => s += v,
        }
    }
    Ok(Some(s))
}
