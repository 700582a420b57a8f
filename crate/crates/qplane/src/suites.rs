//! Named verification suites: expected-versus-computed integer tables for
//! the trace pairings (`tip`), the generator pairing matrix (`teo`), the
//! class identities (`corollaries`), and the operator-model checks
//! (`algebra`). Each suite yields a [`SuiteReport`] with one row per
//! compared quantity; failed computations become failed rows rather than
//! aborting the table.

use crate::funcspace::GridSpec;
use crate::ktheory::{
    decompose_class, generator_pairing_matrix, homology_family, verify_identity, KClassVector,
};
use crate::pairing::{pair, telescoping_check, KHomClass, PairOptions};
use crate::projlib::{self, Projection};
use crate::rep::shift_model_check;
use crate::spectral::{SpectralSet, SpectrumKind};
use num_rational::BigRational;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("suite `{0}` requires a generic spectrum")]
    RequiresGeneric(&'static str),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

/// One compared quantity: what it is, what it should be, what came out.
#[derive(Clone, Debug)]
pub struct SuiteEntry {
    pub label: String,
    pub expected: String,
    pub computed: String,
    /// Distance from the nearest integer, when the row is a pairing.
    pub residual: Option<f64>,
    /// Truncation window used, when the row is a Fredholm pairing.
    pub window: Option<usize>,
    pub ok: bool,
}

impl SuiteEntry {
    fn plain(label: impl Into<String>, expected: impl Into<String>, computed: impl Into<String>, ok: bool) -> Self {
        SuiteEntry {
            label: label.into(),
            expected: expected.into(),
            computed: computed.into(),
            residual: None,
            window: None,
            ok,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub entries: Vec<SuiteEntry>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, entries: Vec<SuiteEntry>) -> Self {
        let pass = entries.iter().all(|e| e.ok);
        SuiteReport {
            suite: suite.to_string(),
            entries,
            pass,
        }
    }

    /// Deterministic JSON payload (keys sorted by the serializer).
    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "pass": self.pass,
            "entries": self.entries.iter().map(|e| json!({
                "label": e.label,
                "expected": e.expected,
                "computed": e.computed,
                "residual": e.residual,
                "window": e.window,
                "ok": e.ok,
            })).collect::<Vec<_>>(),
        })
    }

    /// Fixed-width human table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let w = self
            .entries
            .iter()
            .map(|e| e.label.len())
            .max()
            .unwrap_or(8)
            .max(8);
        out.push_str(&format!("suite {}\n", self.suite));
        for e in &self.entries {
            let extra = match (e.residual, e.window) {
                (Some(r), Some(k)) => format!("   (residual {:.1e}, window {})", r, k),
                (Some(r), None) => format!("   (residual {:.1e})", r),
                _ => String::new(),
            };
            out.push_str(&format!(
                "  {:<w$}  expected {:>9}  computed {:>9}  {}{}\n",
                e.label,
                e.expected,
                e.computed,
                if e.ok { "ok" } else { "MISMATCH" },
                extra,
                w = w
            ));
        }
        out.push_str(&format!(
            "suite {}: {}\n",
            self.suite,
            if self.pass { "pass" } else { "FAIL" }
        ));
        out
    }
}

/// Default Fredholm witness of a spectrum: the midpoint of the fundamental
/// window over the full spectrum, the topmost component witness otherwise.
pub fn default_witness(x: &SpectralSet) -> BigRational {
    match x.kind() {
        SpectrumKind::Full => {
            (x.q() + BigRational::from_integer(1.into())) / BigRational::from_integer(2.into())
        }
        SpectrumKind::Generic => x
            .gap_structure()
            .expect("generic spectra always carry a gap structure")
            .components[0]
            .witness
            .clone(),
    }
}

/// Pair one class against one matrix and flatten the outcome (value or
/// error) into a table row compared against an expected integer.
fn pairing_entry(
    label: String,
    expected: i64,
    class: &KHomClass,
    p: &Projection,
    opts: &PairOptions,
) -> SuiteEntry {
    match pair(class, p.matrix(), opts) {
        Ok(r) => SuiteEntry {
            label,
            expected: expected.to_string(),
            computed: r.rounded.to_string(),
            residual: Some(r.residual),
            window: Some(r.window_used),
            ok: r.rounded == expected && r.integral,
        },
        Err(e) => SuiteEntry {
            label,
            expected: expected.to_string(),
            computed: format!("error: {}", e),
            residual: None,
            window: None,
            ok: false,
        },
    }
}

/// The trace-pairing table: ⟨ev_∞, ·⟩ and ⟨F_y, ·⟩ against P_{±n}, R_n for
/// n = 1..5 and the unit. Runs over either spectrum kind; `y` defaults to
/// [`default_witness`].
pub fn run_tip(
    x: &SpectralSet,
    y: Option<&BigRational>,
    opts: &PairOptions,
) -> Result<SuiteReport, SuiteError> {
    let y = y.cloned().unwrap_or_else(|| default_witness(x));
    let f = KHomClass::Fredholm {
        gamma: None,
        y: y.clone(),
    };
    let evinf = KHomClass::EvInf;
    let mut entries = Vec::new();
    for n in 1..=5i64 {
        for (p, fred_expected, label) in [
            (projlib::bott(n, x), n, format!("P_{}", n)),
            (projlib::bott(-n, x), -n, format!("P_-{}", n)),
            (projlib::powers_rieffel(n, x), n, format!("R_{}", n)),
        ] {
            let ev_expected = if label.starts_with('R') { 0 } else { 1 };
            match p {
                Ok(p) => {
                    entries.push(pairing_entry(
                        format!("⟨ev_inf, {}⟩", label),
                        ev_expected,
                        &evinf,
                        &p,
                        opts,
                    ));
                    entries.push(pairing_entry(
                        format!("⟨F_y, {}⟩", label),
                        fred_expected,
                        &f,
                        &p,
                        opts,
                    ));
                }
                Err(e) => entries.push(SuiteEntry::plain(
                    label,
                    "projection",
                    format!("error: {}", e),
                    false,
                )),
            }
        }
    }
    let one = projlib::unit(x);
    entries.push(pairing_entry("⟨ev_inf, 1⟩".into(), 1, &evinf, &one, opts));
    entries.push(pairing_entry("⟨F_y, 1⟩".into(), 0, &f, &one, opts));
    Ok(SuiteReport::new("tip", entries))
}

/// Expected generator-pairing entry for a generic spectrum with the rows
/// and columns produced by [`generator_pairing_matrix`]: χ_[0,q) is seen
/// only by ev₀, the unit by ev₀ and ev_∞, and F_γ sees the gap indicator j
/// exactly when the gap sits at or below the component (j ≥ γ).
fn teo_expected(n_comp: usize, unital: bool, row: usize, col: usize) -> i64 {
    let unit_col = if unital { Some(n_comp + 1) } else { None };
    let ev0_row = 0usize;
    let evinf_row = if unital { Some(n_comp + 1) } else { None };
    if row == ev0_row {
        return (col == 0 || unit_col == Some(col)) as i64;
    }
    if evinf_row == Some(row) {
        return (unit_col == Some(col)) as i64;
    }
    let gamma = row - 1;
    if col == 0 || unit_col == Some(col) {
        return 0;
    }
    let j = col - 1;
    (j >= gamma) as i64
}

/// The generator-pairing-matrix table over a generic spectrum: every entry
/// of the unital and non-unital matrices against the triangular pattern,
/// exactness of every pairing, and both determinants equal to ±1.
pub fn run_teo(x: &SpectralSet, opts: &PairOptions) -> Result<SuiteReport, SuiteError> {
    if !matches!(x.kind(), SpectrumKind::Generic) {
        return Err(SuiteError::RequiresGeneric("teo"));
    }
    let n_comp = x.components().len();
    let mut entries = Vec::new();
    for unital in [true, false] {
        let tag = if unital { "unital" } else { "non-unital" };
        match generator_pairing_matrix(x, unital, opts) {
            Ok(m) => {
                for (i, row) in m.entries.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        let want = teo_expected(n_comp, unital, i, j);
                        entries.push(SuiteEntry::plain(
                            format!("{} ⟨{}, {}⟩", tag, m.row_labels[i], m.col_labels[j]),
                            want.to_string(),
                            v.to_string(),
                            v == want,
                        ));
                    }
                }
                entries.push(SuiteEntry::plain(
                    format!("{} pairings window-exact", tag),
                    "true",
                    m.window_exact.to_string(),
                    m.window_exact,
                ));
                entries.push(SuiteEntry {
                    label: format!("{} max residual", tag),
                    expected: "0".into(),
                    computed: format!("{:e}", m.max_residual),
                    residual: Some(m.max_residual),
                    window: None,
                    ok: m.max_residual == 0.0,
                });
                entries.push(SuiteEntry::plain(
                    format!("{} det", tag),
                    "±1",
                    m.det.to_string(),
                    m.det.abs() == 1,
                ));
            }
            Err(e) => entries.push(SuiteEntry::plain(
                format!("{} pairing matrix", tag),
                "computed",
                format!("error: {}", e),
                false,
            )),
        }
    }
    Ok(SuiteReport::new("teo", entries))
}

fn identity_entry(
    label: String,
    lhs: &[(i64, &Projection)],
    rhs: &[(i64, &Projection)],
    opts: &PairOptions,
) -> SuiteEntry {
    match verify_identity(lhs, rhs, opts) {
        Ok(rep) => {
            let detail = rep
                .rows
                .iter()
                .map(|r| format!("{}|{}", r.lhs, r.rhs))
                .collect::<Vec<_>>()
                .join(" ");
            SuiteEntry::plain(
                label,
                "equal",
                if rep.equal {
                    "equal".to_string()
                } else {
                    format!("mismatch: {}", detail)
                },
                rep.equal,
            )
        }
        Err(e) => SuiteEntry::plain(label, "equal", format!("error: {}", e), false),
    }
}

/// The class-identity table over a generic spectrum, n = 1..5:
/// [Pₙ] = [1] + [Rₙ] = [1] + n[χ_(q,1)], [P₋ₙ] = [1] − [Rₙ] = [1] − n[χ_(q,1)],
/// [χ_(qⁿ,1)] = n[χ_(q,1)], and the basis decompositions of P_{±n}.
pub fn run_corollaries(x: &SpectralSet, opts: &PairOptions) -> Result<SuiteReport, SuiteError> {
    if !matches!(x.kind(), SpectrumKind::Generic) {
        return Err(SuiteError::RequiresGeneric("corollaries"));
    }
    let mut entries = Vec::new();
    let one = projlib::unit(x);
    let chi1 = match projlib::chi_window(1, x) {
        Ok(p) => p,
        Err(e) => {
            entries.push(SuiteEntry::plain(
                "χ_(q,1)",
                "projection",
                format!("error: {}", e),
                false,
            ));
            return Ok(SuiteReport::new("corollaries", entries));
        }
    };
    let n_comp = x.components().len();
    for n in 1..=5i64 {
        let (pn, pmn, rn, chin) = match (
            projlib::bott(n, x),
            projlib::bott(-n, x),
            projlib::powers_rieffel(n, x),
            projlib::chi_window(n, x),
        ) {
            (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
            _ => {
                entries.push(SuiteEntry::plain(
                    format!("constructions at n={}", n),
                    "projections",
                    "error",
                    false,
                ));
                continue;
            }
        };
        let chi_n_times: Vec<(i64, &Projection)> =
            std::iter::repeat((1, &chi1)).take(n as usize).collect();

        entries.push(identity_entry(
            format!("[P_{}] = [1] + [R_{}]", n, n),
            &[(1, &pn)],
            &[(1, &one), (1, &rn)],
            opts,
        ));
        let mut rhs = vec![(1i64, &one)];
        rhs.extend(chi_n_times.iter().copied());
        entries.push(identity_entry(
            format!("[P_{}] = [1] + {}·[χ_(q,1)]", n, n),
            &[(1, &pn)],
            &rhs,
            opts,
        ));
        entries.push(identity_entry(
            format!("[P_-{}] = [1] − [R_{}]", n, n),
            &[(1, &pmn), (1, &rn)],
            &[(1, &one)],
            opts,
        ));
        let mut lhs = vec![(1i64, &pmn)];
        lhs.extend(chi_n_times.iter().copied());
        entries.push(identity_entry(
            format!("[P_-{}] = [1] − {}·[χ_(q,1)]", n, n),
            &lhs,
            &[(1, &one)],
            opts,
        ));
        entries.push(identity_entry(
            format!("[χ_(q^{},1)] = {}·[χ_(q,1)]", n, n),
            &[(1, &chin)],
            &chi_n_times,
            opts,
        ));
        // decomposition onto the basis: l = 0, n on the lowest gap, unit 1
        let mut want = vec![0i64; n_comp];
        want[n_comp - 1] = n;
        let got = decompose_class(pn.matrix(), true, opts);
        let want_v = KClassVector::Generic {
            l: 0,
            gap_coeffs: want,
            unit: Some(1),
        };
        entries.push(SuiteEntry::plain(
            format!("decompose [P_{}]", n),
            want_v.to_string(),
            match &got {
                Ok(v) => v.to_string(),
                Err(e) => format!("error: {}", e),
            },
            matches!(&got, Ok(v) if *v == want_v),
        ));
    }
    Ok(SuiteReport::new("corollaries", entries))
}

/// The operator-model table: the defining relation and modulus diagonal of
/// the shift model (exact and floating routes), projection verification for
/// P_{±n}, R_n (n = 1..5) and the indicator generators, and the telescoping
/// cross-check at n = 1..4.
pub fn run_algebra(
    x: &SpectralSet,
    opts: &PairOptions,
    grid: &GridSpec,
) -> Result<SuiteReport, SuiteError> {
    let mut entries = Vec::new();
    let y = default_witness(x);
    match shift_model_check(x, &y, 64, 1e-12) {
        Ok(r) => {
            entries.push(SuiteEntry::plain(
                "zz* = q²z*z on interior indices (exact route)",
                "true",
                r.relation_exact.to_string(),
                r.relation_exact,
            ));
            entries.push(SuiteEntry::plain(
                "diag |z| = qⁿ·y (exact route)",
                "true",
                r.modulus_diagonal_ok.to_string(),
                r.modulus_diagonal_ok,
            ));
            entries.push(SuiteEntry {
                label: "zz* − q²z*z relative residual (f64 route)".into(),
                expected: "< 1e-12".into(),
                computed: format!("{:e}", r.f64_residual),
                residual: Some(r.f64_residual),
                window: Some(r.window),
                ok: r.f64_residual < 1e-12,
            });
        }
        Err(e) => entries.push(SuiteEntry::plain(
            "shift model",
            "checked",
            format!("error: {}", e),
            false,
        )),
    }

    let mut verify_entry = |p: Result<Projection, projlib::ProjError>, must_be_exact: bool| {
        match p {
            Ok(p) => {
                let label = format!("verify {}", p.label());
                match p.verify(opts.tol, grid) {
                    Ok(rep) => {
                        let sup = rep.sup_err_idempotent.max(rep.sup_err_selfadjoint);
                        let ok = rep.pass && (!must_be_exact || rep.exact);
                        entries.push(SuiteEntry {
                            label,
                            expected: if must_be_exact {
                                "exact".to_string()
                            } else {
                                format!("≤ {:e}", opts.tol)
                            },
                            computed: if rep.exact {
                                "exact".to_string()
                            } else {
                                format!("{:e}", sup)
                            },
                            residual: Some(sup),
                            window: None,
                            ok,
                        });
                    }
                    Err(e) => entries.push(SuiteEntry::plain(
                        label,
                        "pass",
                        format!("error: {}", e),
                        false,
                    )),
                }
            }
            Err(e) => entries.push(SuiteEntry::plain(
                "construction",
                "projection",
                format!("error: {}", e),
                false,
            )),
        }
    };
    for n in 1..=5i64 {
        verify_entry(projlib::bott(n, x), false);
        verify_entry(projlib::bott(-n, x), false);
        verify_entry(projlib::powers_rieffel(n, x), false);
    }
    if matches!(x.kind(), SpectrumKind::Generic) {
        verify_entry(projlib::chi_zero_q(x), true);
        verify_entry(projlib::chi_window(1, x), true);
        let g = x
            .gap_structure()
            .expect("generic spectra always carry a gap structure");
        for c in g.gap_samples() {
            verify_entry(projlib::chi_gap(&c, x), true);
        }
    }

    for n in 1..=4i64 {
        match telescoping_check(n, &y, x.q(), 64) {
            Ok(r) => entries.push(SuiteEntry {
                label: format!("telescoping n={}", n),
                expected: "agree".into(),
                computed: format!("|Δ| = {:e}", r.difference),
                residual: Some(r.difference),
                window: Some(r.window),
                ok: r.agrees(1e-10) && r.mirror_deviation == 0.0,
            }),
            Err(e) => entries.push(SuiteEntry::plain(
                format!("telescoping n={}", n),
                "agree",
                format!("error: {}", e),
                false,
            )),
        }
    }
    Ok(SuiteReport::new("algebra", entries))
}

/// Every suite that applies to the spectrum kind: `tip` and `algebra`
/// always, `teo` and `corollaries` over generic spectra.
pub fn run_all(
    x: &SpectralSet,
    opts: &PairOptions,
    grid: &GridSpec,
) -> Result<Vec<SuiteReport>, SuiteError> {
    let mut out = vec![run_tip(x, None, opts)?];
    if matches!(x.kind(), SpectrumKind::Generic) {
        out.push(run_teo(x, opts)?);
        out.push(run_corollaries(x, opts)?);
    }
    out.push(run_algebra(x, opts, grid)?);
    Ok(out)
}

/// Look up a suite by its CLI name.
pub fn run_named(
    name: &str,
    x: &SpectralSet,
    opts: &PairOptions,
    grid: &GridSpec,
) -> Result<Vec<SuiteReport>, SuiteError> {
    match name {
        "tip" => Ok(vec![run_tip(x, None, opts)?]),
        "teo" => Ok(vec![run_teo(x, opts)?]),
        "corollaries" => Ok(vec![run_corollaries(x, opts)?]),
        "algebra" => Ok(vec![run_algebra(x, opts, grid)?]),
        "all" => run_all(x, opts, grid),
        other => Err(SuiteError::UnknownSuite(other.to_string())),
    }
}

/// Sanity check used by the homology-family plumbing: the family always
/// starts at ev₀ and ends at ev_∞.
pub fn family_labels(x: &SpectralSet) -> Vec<String> {
    homology_family(x).iter().map(|c| c.to_string()).collect()
}
