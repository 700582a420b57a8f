//! The index-pairing engine.
//!
//! A K-homology class here is one of the two characters (at 0 and at ∞) or a
//! Fredholm comparison F_y = (π_y, π₀⊕π_∞) at a witness point y. Pairing a
//! projection matrix p with F_y means summing the diagonal of
//! π_y(p) − (π₀⊕π_∞)(p): with g_i the k = 0 coefficient of the i-th diagonal
//! entry (unital constant folded in), the series is
//!
//! ```text
//!   Σ_i Σ_{n∈ℤ}  g_i(qⁿ·y) − (g_i(0) if n > 0 else g_i(∞))
//! ```
//!
//! The engine picks the cheapest sound evaluation:
//!
//! 1. **exact** — every g_i is a step function: a window large enough to
//!    contain every breakpoint scale makes the series literally finite, and
//!    it is summed in exact rational arithmetic;
//! 2. **windowed** — every smooth g_i carries a support hint and vanishes at
//!    both ends: the same finite-window argument applies, summed in f64;
//! 3. **adaptive** — otherwise, windows double from `initial_window` until
//!    two successive traces agree within `tol` (Kahan-compensated sums), or
//!    `max_window` is exceeded.
//!
//! Every result reports the window it used, whether that window was provably
//! complete, and how far the value sits from the nearest integer.

use crate::crossed::{CrossedError, CrossedMatrix};
use crate::funcspace::{FuncError, QFunction, StepFunction};
use crate::projlib::{trace_ev_infinity, trace_ev_infinity_exact, trace_ev_zero, trace_ev_zero_exact};
use crate::scaled::{q_pow_f64, ScaledRational};
use crate::spectral::GapStructure;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PairError {
    #[error("trace pairing did not converge within the window cap {window}: last traces {prev} and {last}")]
    NonConvergence { prev: f64, last: f64, window: usize },
    #[error("witness {0} is not a positive point of the spectrum")]
    InvalidWitness(BigRational),
    #[error("diagonal entry {entry}: the value at {} differs from the nearby limit, so the index series cannot be summable", if *at_zero { "0" } else { "∞" })]
    NonSummable { entry: usize, at_zero: bool },
    #[error("telescoping index must be ≥ 1, got {0}")]
    BadTelescopeIndex(i64),
    #[error(transparent)]
    Crossed(#[from] CrossedError),
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// Tolerances and window policy for the adaptive trace.
#[derive(Clone, Debug)]
pub struct PairOptions {
    /// Successive-window agreement threshold for the adaptive tier.
    pub tol: f64,
    /// How far from an integer a pairing may sit and still be flagged
    /// integral. Kept separate from `tol`: it distinguishes numerical noise
    /// from a genuinely non-projection input.
    pub integer_tol: f64,
    pub initial_window: usize,
    pub max_window: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            tol: 1e-9,
            integer_tol: 1e-6,
            initial_window: 64,
            max_window: 8192,
        }
    }
}

/// The K-homology side of the pairing.
#[derive(Clone, Debug)]
pub enum KHomClass {
    /// Character at the fixed point 0.
    Ev0,
    /// Character at ∞ (unitization members only).
    EvInf,
    /// Fredholm comparison at witness y; `gamma` is the descending component
    /// index when the witness came from a gap structure (labeling only).
    Fredholm {
        gamma: Option<usize>,
        y: BigRational,
    },
}

impl fmt::Display for KHomClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KHomClass::Ev0 => write!(f, "ev_0"),
            KHomClass::EvInf => write!(f, "ev_inf"),
            KHomClass::Fredholm { gamma: Some(g), .. } => write!(f, "F[{}]", g),
            KHomClass::Fredholm { gamma: None, y } => write!(f, "F(y={})", y),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PairingResult {
    pub raw: f64,
    pub rounded: i64,
    pub residual: f64,
    pub window_used: usize,
    /// The window provably contained every nonzero term (exact and windowed
    /// tiers); false means adaptive truncation decided by `tol`.
    pub window_exact: bool,
    /// residual ≤ integer_tol.
    pub integral: bool,
}

fn finish(raw: f64, window_used: usize, window_exact: bool, opts: &PairOptions) -> PairingResult {
    let rounded = raw.round() as i64;
    let residual = (raw - rounded as f64).abs();
    PairingResult {
        raw,
        rounded,
        residual,
        window_used,
        window_exact,
        integral: residual <= opts.integer_tol,
    }
}

fn exact_result(v: &BigRational, window_used: usize, opts: &PairOptions) -> PairingResult {
    let raw = v.to_f64().unwrap_or(f64::NAN);
    if v.is_integer() {
        let rounded = v.to_integer().to_i64().unwrap_or(i64::MAX);
        PairingResult {
            raw,
            rounded,
            residual: 0.0,
            window_used,
            window_exact: true,
            integral: true,
        }
    } else {
        let mut r = finish(raw, window_used, true, opts);
        // exact non-integer: never call it integral, however close
        r.integral = false;
        r
    }
}

/// Compensated (Kahan) accumulator for the diagonal trace sums: they
/// subtract two near-constant diagonals, so cancellation matters.
#[derive(Clone, Copy, Debug, Default)]
struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = x - self.c;
        let s = self.sum + t;
        self.c = (s - self.sum) - t;
        self.sum = s;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// One diagonal entry prepared for repeated evaluation.
enum DiagEval {
    Step {
        f: StepFunction,
        compiled: crate::funcspace::CompiledStep,
        at_zero: BigRational,
        at_infinity: BigRational,
    },
    Smooth {
        f: crate::funcspace::SmoothFunction,
    },
}

struct Prepared {
    diags: Vec<DiagEval>,
    /// Exponent range [m_min, m_max] such that every breakpoint/support
    /// endpoint has normalized exponent inside it; None when some smooth
    /// entry gave no hint (adaptive tier only).
    exponent_hull: Option<(i64, i64)>,
    all_step: bool,
}

fn prepare(p: &CrossedMatrix) -> Result<Prepared, PairError> {
    let q = p.ambient().q();
    let mut diags = Vec::with_capacity(p.dim());
    let mut hull: Option<(i64, i64)> = Some((0, 0));
    let mut all_step = true;
    let widen = |hull: &mut Option<(i64, i64)>, m: i64| {
        if let Some((lo, hi)) = hull {
            *hull = Some(((*lo).min(m), (*hi).max(m)));
        }
    };
    for i in 0..p.dim() {
        let g = p.entry(i, i).k0_with_unit();
        match g {
            QFunction::Step(s) => {
                // Summability: the value at the point 0 (resp. the limit at
                // ∞) must agree with the nearby limit, else the tail terms
                // do not vanish.
                if s.value_at_zero() != s.value_near_zero(q) {
                    return Err(PairError::NonSummable {
                        entry: i,
                        at_zero: true,
                    });
                }
                if s.value_at_infinity() != s.value_near_infinity(q) {
                    return Err(PairError::NonSummable {
                        entry: i,
                        at_zero: false,
                    });
                }
                for b in s.breakpoints() {
                    if let Some(m) = b.normalized_exponent(q) {
                        widen(&mut hull, m);
                    }
                }
                diags.push(DiagEval::Step {
                    compiled: s.compile_f64(q),
                    at_zero: s.value_at_zero(),
                    at_infinity: s.value_at_infinity(),
                    f: s,
                });
            }
            QFunction::Smooth(s) => {
                all_step = false;
                let windowable = s.at_zero() == 0.0
                    && s.at_infinity() == 0.0
                    && match s.support() {
                        None => false,
                        Some((lo, hi)) => {
                            // a degenerate zero support means "identically 0"
                            if lo.is_zero() && hi.is_zero() {
                                true
                            } else if lo.is_zero() || hi.is_zero() {
                                false
                            } else {
                                if let (Some(a), Some(b)) =
                                    (lo.normalized_exponent(q), hi.normalized_exponent(q))
                                {
                                    widen(&mut hull, a);
                                    widen(&mut hull, b);
                                    true
                                } else {
                                    false
                                }
                            }
                        }
                    };
                if !windowable {
                    hull = None;
                }
                diags.push(DiagEval::Smooth { f: s });
            }
        }
    }
    Ok(Prepared {
        diags,
        exponent_hull: hull,
        all_step,
    })
}

/// Window size that provably contains every nonzero term: qⁿy must be able
/// to fall strictly below every breakpoint scale (n + m_y ≥ m_max + 1) and
/// strictly above every one (n + m_y ≤ m_min − 1) outside it.
fn complete_window(hull: (i64, i64), m_y: i64) -> usize {
    let (m_min, m_max) = hull;
    let up = (m_max + 1 - m_y).max(1);
    let down = (m_y + 1 - m_min).max(1);
    up.max(down) as usize
}

fn fredholm_trace_exact(
    prep: &Prepared,
    y: &BigRational,
    q: &BigRational,
    window: usize,
) -> Result<BigRational, PairError> {
    let k = window as i64;
    let mut acc = BigRational::zero();
    for d in &prep.diags {
        let DiagEval::Step {
            f,
            at_zero,
            at_infinity,
            ..
        } = d
        else {
            unreachable!("exact tier requires step diagonals");
        };
        for n in -k..=k {
            let t = ScaledRational::new(y.clone(), n);
            let boundary = if n > 0 { at_zero } else { at_infinity };
            acc += f.value_at(&t, q)? - boundary;
        }
    }
    Ok(acc)
}

fn fredholm_trace_f64(prep: &Prepared, y: &BigRational, q: &BigRational, window: usize) -> f64 {
    let qf = q.to_f64().unwrap_or(f64::NAN);
    let yf = y.to_f64().unwrap_or(f64::NAN);
    let k = window as i64;
    let mut acc = KahanSum::default();
    for d in &prep.diags {
        match d {
            DiagEval::Step {
                compiled,
                at_zero,
                at_infinity,
                ..
            } => {
                let b0 = at_zero.to_f64().unwrap_or(f64::NAN);
                let binf = at_infinity.to_f64().unwrap_or(f64::NAN);
                for n in -k..=k {
                    let t = q_pow_f64(qf, n) * yf;
                    let v = if t.is_infinite() { binf } else { compiled.eval(t) };
                    acc.add(v - if n > 0 { b0 } else { binf });
                }
            }
            DiagEval::Smooth { f } => {
                let b0 = f.at_zero();
                let binf = f.at_infinity();
                for n in -k..=k {
                    let t = q_pow_f64(qf, n) * yf;
                    // t has degraded to 0/∞ exactly when the true point left
                    // the f64 range; the declared limits are the right values
                    let v = f.eval_f64(t).unwrap_or(f64::NAN);
                    acc.add(v - if n > 0 { b0 } else { binf });
                }
            }
        }
    }
    acc.value()
}

/// Pair a K-homology class with a matrix over the algebra.
///
/// The matrix is taken on trust to be a projection (see
/// [`verify_projection`](crate::projlib::verify_projection)); what is
/// checked here is everything the trace itself needs: positivity and
/// spectrum membership of the witness, unitization membership when a
/// character at ∞ is involved, and summability of the diagonal series.
pub fn pair(
    class: &KHomClass,
    p: &CrossedMatrix,
    opts: &PairOptions,
) -> Result<PairingResult, PairError> {
    match class {
        KHomClass::Ev0 => match trace_ev_zero_exact(p) {
            Some(v) => Ok(exact_result(&v, 0, opts)),
            None => Ok(finish(trace_ev_zero(p), 0, true, opts)),
        },
        KHomClass::EvInf => match trace_ev_infinity_exact(p)? {
            Some(v) => Ok(exact_result(&v, 0, opts)),
            None => Ok(finish(trace_ev_infinity(p)?, 0, true, opts)),
        },
        KHomClass::Fredholm { y, .. } => {
            let x = p.ambient();
            let q = x.q();
            if y <= &BigRational::zero() {
                return Err(PairError::InvalidWitness(y.clone()));
            }
            // Over a generic spectrum the witness must be a spectrum point.
            // Over the full spectrum every y > 0 is one.
            if !x.in_spectrum(&ScaledRational::from_rational(y.clone())) {
                return Err(PairError::InvalidWitness(y.clone()));
            }
            let prep = prepare(p)?;
            match prep.exponent_hull {
                Some(hull) => {
                    let m_y = ScaledRational::from_rational(y.clone())
                        .normalized_exponent(q)
                        .expect("positive witness has a scale");
                    let window = complete_window(hull, m_y);
                    if prep.all_step {
                        let v = fredholm_trace_exact(&prep, y, q, window)?;
                        Ok(exact_result(&v, window, opts))
                    } else {
                        let raw = fredholm_trace_f64(&prep, y, q, window);
                        Ok(finish(raw, window, true, opts))
                    }
                }
                None => {
                    // adaptive: double the window until two successive
                    // traces agree
                    let k0 = opts.initial_window.min(opts.max_window).max(1);
                    let first = fredholm_trace_f64(&prep, y, q, k0);
                    let mut window = k0;
                    let mut prev = first;
                    let mut last = first;
                    while window.saturating_mul(2) <= opts.max_window {
                        window *= 2;
                        let cur = fredholm_trace_f64(&prep, y, q, window);
                        prev = last;
                        last = cur;
                        if (cur - prev).abs() < opts.tol {
                            return Ok(finish(cur, window, false, opts));
                        }
                    }
                    Err(PairError::NonConvergence {
                        prev,
                        last,
                        window,
                    })
                }
            }
        }
    }
}

/// The full pairing vector (⟨ev₀, p⟩, ⟨F_γ, p⟩ for γ descending, ⟨ev_∞, p⟩)
/// against the homology family of a generic spectrum's gap structure.
pub fn pairing_vector(
    p: &CrossedMatrix,
    g: &GapStructure,
    opts: &PairOptions,
) -> Result<Vec<(KHomClass, PairingResult)>, PairError> {
    let mut out = Vec::with_capacity(g.components.len() + 2);
    let c = KHomClass::Ev0;
    let r = pair(&c, p, opts)?;
    out.push((c, r));
    for (gamma, comp) in g.components.iter().enumerate() {
        let c = KHomClass::Fredholm {
            gamma: Some(gamma),
            y: comp.witness.clone(),
        };
        let r = pair(&c, p, opts)?;
        out.push((c, r));
    }
    let c = KHomClass::EvInf;
    let r = pair(&c, p, opts)?;
    out.push((c, r));
    Ok(out)
}

/// Report of the telescoping cross-check: the 2×2 dilation-twisted trace
/// series summed directly and after the index shift that collapses it to n.
#[derive(Clone, Debug)]
pub struct TelescopeReport {
    pub n: i64,
    pub window: usize,
    /// Partial sum of Σ_k [u_k/(1+u_k) − v_k/(1+v_k)] over k ∈ [−K, K].
    pub direct: f64,
    /// The same partial sum rearranged through v_k = u_{k+n}: the bulk
    /// cancels and only n plus two edge sums remain.
    pub reindexed: f64,
    pub difference: f64,
    /// |direct − n|: the truncation tail, geometric with ratio q^{2n}.
    pub limit_deviation: f64,
    /// Largest |term₊(k) + term₋(k)|: the mirrored (−n) series must negate
    /// the series term by term.
    pub mirror_deviation: f64,
}

impl TelescopeReport {
    pub fn agrees(&self, tol: f64) -> bool {
        self.difference <= tol
    }
}

/// φ(x) = x/(1+x), monotone onto [0,1), safe at 0 and ∞.
fn phi(x: f64) -> f64 {
    if x <= 1.0 {
        x / (1.0 + x)
    } else {
        1.0 / (1.0 + 1.0 / x)
    }
}

/// Independent numerical oracle for ⟨F_y, P_{±n}⟩ = ±n, built from the raw
/// series terms rather than the projection machinery: u_k = q^{−n(n−1)+2nk}y^{2n}
/// and v_k = u_{k+n}, so the series telescopes with step n.
pub fn telescoping_check(
    n: i64,
    y: &BigRational,
    q: &BigRational,
    window: usize,
) -> Result<TelescopeReport, PairError> {
    if n < 1 {
        return Err(PairError::BadTelescopeIndex(n));
    }
    if y <= &BigRational::zero() {
        return Err(PairError::InvalidWitness(y.clone()));
    }
    let qf = q.to_f64().unwrap_or(f64::NAN);
    let yf = y.to_f64().unwrap_or(f64::NAN);
    let y2n = yf.powi(2 * n as i32);
    let u = |k: i64| q_pow_f64(qf, -n * (n - 1) + 2 * n * k) * y2n;
    let k_win = window as i64;

    let mut direct = KahanSum::default();
    let mut mirror_deviation = 0.0f64;
    for k in -k_win..=k_win {
        let term_plus = phi(u(k)) - phi(u(k + n));
        let term_minus = phi(u(k + n)) - phi(u(k));
        direct.add(term_plus);
        mirror_deviation = mirror_deviation.max((term_plus + term_minus).abs());
    }

    // Rearranged: Σ_{k=−K}^{K} φ(u_k) − Σ_{k=−K+n}^{K+n} φ(u_k)
    //           = n + Σ_{k=−K}^{−K+n−1} (φ(u_k) − 1) − Σ_{k=K+1}^{K+n} φ(u_k).
    let mut re = KahanSum::default();
    re.add(n as f64);
    for k in -k_win..(-k_win + n) {
        re.add(phi(u(k)) - 1.0);
    }
    for k in (k_win + 1)..=(k_win + n) {
        re.add(-phi(u(k)));
    }

    let direct = direct.value();
    let reindexed = re.value();
    Ok(TelescopeReport {
        n,
        window,
        direct,
        reindexed,
        difference: (direct - reindexed).abs(),
        limit_deviation: (direct - n as f64).abs(),
        mirror_deviation,
    })
}
