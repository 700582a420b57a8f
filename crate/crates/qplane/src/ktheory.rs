//! K-group bookkeeping: ranks and named generator bases from the spectral
//! data, decomposition of projection classes into the generator basis by
//! back-substitution against the pairing vector, rank-function decomposition
//! over the window components, and signed class-identity verification.
//!
//! Conventions. Gaps and components are indexed in *descending* position
//! (the triangular solve runs from the topmost component down). Rank
//! functions, by contrast, are recorded in ascending position order and the
//! difference formula starts at the lowest component; the two orders meet
//! only in tests, via an explicit reversal.

use crate::crossed::CrossedMatrix;
use crate::pairing::{pair, KHomClass, PairError, PairOptions, PairingResult};
use crate::projlib::Projection;
use crate::spectral::{GapStructure, SpectralSet, SpectrumKind};
use num_rational::BigRational;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KtheoryError {
    #[error("pairing ⟨{class}, p⟩ = {raw} is not integral (residual {residual:e})")]
    NonIntegral { class: String, raw: f64, residual: f64 },
    #[error("class outside generator lattice: {0}")]
    OutsideLattice(String),
    #[error(transparent)]
    Pair(#[from] PairError),
}

/// A named K₀ generator.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorName {
    /// Indicator of the part of the spectrum below the fundamental window.
    ChiZeroQ,
    /// Indicator χ_(c,1) for the gap point c, descending index j.
    ChiGap { index: usize, c: BigRational },
    /// The rank-one plateau projection R₁ (full spectrum only).
    PowersRieffelOne,
    /// The unit class (unital case only).
    Unit,
}

impl fmt::Display for GeneratorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorName::ChiZeroQ => write!(f, "[χ_[0,q)]"),
            GeneratorName::ChiGap { c, .. } => write!(f, "[χ_({},1)]", c),
            GeneratorName::PowersRieffelOne => write!(f, "[R_1]"),
            GeneratorName::Unit => write!(f, "[1]"),
        }
    }
}

/// K-groups of the operator algebra over a given spectrum.
#[derive(Clone, Debug)]
pub struct KGroupReport {
    pub k0_rank: usize,
    /// Always 0 here: the odd group vanishes for every admissible spectrum.
    pub k1_rank: usize,
    pub unital: bool,
    pub generators: Vec<GeneratorName>,
}

/// K₀ ranks and generator lists.
///
/// Generic spectrum with n window components: rank n+1 (non-unital) or n+2
/// (unital), generated by χ_[0,q), the descending gap indicators, and — in
/// the unital case — the unit. Full spectrum: rank 1 or 2, generated by R₁
/// (and the unit). Spectra here always carry finitely many components, so
/// the rank is always a plain integer.
pub fn kgroups(x: &SpectralSet, unital: bool) -> KGroupReport {
    let mut generators = Vec::new();
    match x.kind() {
        SpectrumKind::Full => generators.push(GeneratorName::PowersRieffelOne),
        SpectrumKind::Generic => {
            let g = x
                .gap_structure()
                .expect("generic spectra always carry a gap structure");
            generators.push(GeneratorName::ChiZeroQ);
            for (index, gap) in g.gaps.iter().enumerate() {
                generators.push(GeneratorName::ChiGap {
                    index,
                    c: gap.sample.clone(),
                });
            }
        }
    }
    if unital {
        generators.push(GeneratorName::Unit);
    }
    KGroupReport {
        k0_rank: generators.len(),
        k1_rank: 0,
        unital,
        generators,
    }
}

/// The K-homology family used for pairing vectors: (ev₀, F_γ descending,
/// ev_∞). Over the full spectrum there is a single Fredholm class; its
/// witness is the midpoint of the fundamental window.
pub fn homology_family(x: &SpectralSet) -> Vec<KHomClass> {
    let mut fam = vec![KHomClass::Ev0];
    match x.kind() {
        SpectrumKind::Full => {
            let y = (x.q() + BigRational::from_integer(1.into()))
                / BigRational::from_integer(2.into());
            fam.push(KHomClass::Fredholm { gamma: None, y });
        }
        SpectrumKind::Generic => {
            let g = x
                .gap_structure()
                .expect("generic spectra always carry a gap structure");
            for (gamma, comp) in g.components.iter().enumerate() {
                fam.push(KHomClass::Fredholm {
                    gamma: Some(gamma),
                    y: comp.witness.clone(),
                });
            }
        }
    }
    fam.push(KHomClass::EvInf);
    fam
}

fn integral_value(class: &KHomClass, r: &PairingResult) -> Result<i64, KtheoryError> {
    if !r.integral {
        return Err(KtheoryError::NonIntegral {
            class: class.to_string(),
            raw: r.raw,
            residual: r.residual,
        });
    }
    Ok(r.rounded)
}

/// Pair p against the whole homology family and round, insisting on
/// integrality.
fn integer_pairing_vector(
    p: &CrossedMatrix,
    opts: &PairOptions,
) -> Result<Vec<(KHomClass, i64)>, KtheoryError> {
    let fam = homology_family(p.ambient());
    let mut out = Vec::with_capacity(fam.len());
    for class in fam {
        let r = pair(&class, p, opts)?;
        let v = integral_value(&class, &r)?;
        out.push((class, v));
    }
    Ok(out)
}

/// A projection class written in the generator basis.
#[derive(Clone, Debug, PartialEq)]
pub enum KClassVector {
    /// Full spectrum: winding · [R₁] (+ unit · [1]).
    Full { winding: i64, unit: Option<i64> },
    /// Generic spectrum: l · [χ_[0,q)] + Σ_j gap_coeffs[j] · [χ_(c_j,1)]
    /// (+ unit · [1]), gap coefficients in descending gap order.
    Generic {
        l: i64,
        gap_coeffs: Vec<i64>,
        unit: Option<i64>,
    },
}

impl fmt::Display for KClassVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        let mut push = |coeff: i64, name: String| {
            if coeff == 1 {
                terms.push(name);
            } else if coeff != 0 {
                terms.push(format!("{}·{}", coeff, name));
            }
        };
        match self {
            KClassVector::Full { winding, unit } => {
                if let Some(m) = unit {
                    push(*m, "[1]".into());
                }
                push(*winding, "[R_1]".into());
            }
            KClassVector::Generic { l, gap_coeffs, unit } => {
                if let Some(m) = unit {
                    push(*m, "[1]".into());
                }
                push(*l, "[χ_[0,q)]".into());
                for (j, n) in gap_coeffs.iter().enumerate() {
                    push(*n, format!("[χ_(c_{},1)]", j));
                }
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Decompose a projection class into the generator basis from its pairing
/// vector.
///
/// Unital case: m = ⟨ev_∞, p⟩, l = ⟨ev₀, p⟩ − m, and the gap coefficients
/// solve the triangular system ⟨F_γ, p⟩ = Σ_{j ≥ γ} n_j from the topmost
/// component down. Non-unital case: additionally m must come out 0, else
/// the class does not lie in the non-unital lattice. Full spectrum: basis
/// {[R₁], [1]} with winding = ⟨F, p⟩; consistency then demands
/// ⟨ev₀, p⟩ = ⟨ev_∞, p⟩.
pub fn decompose_class(
    p: &CrossedMatrix,
    unital: bool,
    opts: &PairOptions,
) -> Result<KClassVector, KtheoryError> {
    let pairings = integer_pairing_vector(p, opts)?;
    let k = pairings.len();
    let ev0 = pairings[0].1;
    let evinf = pairings[k - 1].1;
    let fredholm: Vec<i64> = pairings[1..k - 1].iter().map(|(_, v)| v).copied().collect();
    let m = evinf;
    if !unital && m != 0 {
        return Err(KtheoryError::OutsideLattice(format!(
            "⟨ev_∞, p⟩ = {} ≠ 0, so p is not a class of the non-unital algebra",
            m
        )));
    }
    match p.ambient().kind() {
        SpectrumKind::Full => {
            if ev0 != m {
                return Err(KtheoryError::OutsideLattice(format!(
                    "full spectrum: ⟨ev₀, p⟩ = {} must equal ⟨ev_∞, p⟩ = {}",
                    ev0, m
                )));
            }
            Ok(KClassVector::Full {
                winding: fredholm[0],
                unit: unital.then_some(m),
            })
        }
        SpectrumKind::Generic => {
            let l = ev0 - m;
            // S_γ = ⟨F_γ, p⟩ = Σ_{j ≥ γ} n_j, so n_γ = S_γ − S_{γ+1}
            let mut gap_coeffs = Vec::with_capacity(fredholm.len());
            for gamma in 0..fredholm.len() {
                let s = fredholm[gamma];
                let s_next = fredholm.get(gamma + 1).copied().unwrap_or(0);
                gap_coeffs.push(s - s_next);
            }
            Ok(KClassVector::Generic {
                l,
                gap_coeffs,
                unit: unital.then_some(m),
            })
        }
    }
}

/// Integer ranks of a projection-valued function over the window
/// components, recorded in ascending position order.
#[derive(Clone, Debug, PartialEq)]
pub struct RankFunction {
    ranks: Vec<u32>,
}

impl RankFunction {
    pub fn new(ranks: Vec<u32>) -> Self {
        RankFunction { ranks }
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }
}

/// Write a rank function over the components as a combination of the gap
/// indicators sitting below each component: the lowest component's rank on
/// the lowest gap generator, then successive differences going up.
/// Coefficients are returned in the same ascending order as the input
/// ranks; negative differences are formal K₀ coefficients.
pub fn rank_decompose(r: &RankFunction, g: &GapStructure) -> Vec<i64> {
    assert_eq!(
        r.ranks.len(),
        g.components.len(),
        "one rank per window component, ascending"
    );
    let mut coeffs = Vec::with_capacity(r.ranks.len());
    let mut prev = 0i64;
    for &rank in &r.ranks {
        coeffs.push(rank as i64 - prev);
        prev = rank as i64;
    }
    coeffs
}

/// Prefix sums: the ranks (possibly formal, i.e. negative) of the
/// combination Σ coeffs[k] · χ_(gap below component k, 1), ascending.
pub fn rank_reconstruct(coeffs: &[i64], g: &GapStructure) -> Vec<i64> {
    assert_eq!(
        coeffs.len(),
        g.components.len(),
        "one coefficient per window component, ascending"
    );
    let mut ranks = Vec::with_capacity(coeffs.len());
    let mut acc = 0i64;
    for &c in coeffs {
        acc += c;
        ranks.push(acc);
    }
    ranks
}

/// The square integer matrix ⟨homology row, generator column⟩ together with
/// its determinant. Rows: ev₀, F_γ descending, ev_∞ (ev_∞ and the unit
/// column only in the unital case; over the full spectrum ev₀ is dropped
/// instead, being redundant on the lattice).
#[derive(Clone, Debug)]
pub struct GeneratorPairingMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub entries: Vec<Vec<i64>>,
    pub det: i64,
    /// Every entry came from a provably complete window.
    pub window_exact: bool,
    /// Largest distance of any raw entry from its integer.
    pub max_residual: f64,
}

/// Pair every K₀ generator against the homology family and return the
/// (square) integer matrix with its determinant; ±1 certifies that the
/// pairing is non-degenerate and the generators are a basis.
pub fn generator_pairing_matrix(
    x: &SpectralSet,
    unital: bool,
    opts: &PairOptions,
) -> Result<GeneratorPairingMatrix, KtheoryError> {
    let report = kgroups(x, unital);
    let mut cols: Vec<(String, CrossedMatrix)> = Vec::new();
    for gen in &report.generators {
        let p: Projection = match gen {
            GeneratorName::ChiZeroQ => crate::projlib::chi_zero_q(x)
                .expect("χ_[0,q) exists over every generic spectrum"),
            GeneratorName::ChiGap { c, .. } => crate::projlib::chi_gap(c, x)
                .expect("gap samples avoid the spectrum by construction"),
            GeneratorName::PowersRieffelOne => crate::projlib::powers_rieffel(1, x)
                .expect("R_1 exists over every spectrum"),
            GeneratorName::Unit => crate::projlib::unit(x),
        };
        cols.push((gen.to_string(), p.into_matrix()));
    }
    let fam = homology_family(x);
    // keep the matrix square: the family has one redundant functional
    // relative to each non-maximal basis
    let rows: Vec<KHomClass> = match (x.kind(), unital) {
        (SpectrumKind::Generic, true) => fam,
        (SpectrumKind::Generic, false) => fam[..fam.len() - 1].to_vec(),
        (SpectrumKind::Full, true) => fam[1..].to_vec(),
        (SpectrumKind::Full, false) => fam[1..fam.len() - 1].to_vec(),
    };
    let mut entries = Vec::with_capacity(rows.len());
    let mut window_exact = true;
    let mut max_residual = 0.0f64;
    for class in &rows {
        let mut row = Vec::with_capacity(cols.len());
        for (_, p) in &cols {
            let r = pair(class, p, opts)?;
            window_exact &= r.window_exact;
            max_residual = max_residual.max(r.residual);
            row.push(integral_value(class, &r)?);
        }
        entries.push(row);
    }
    let det = bareiss_det(&entries);
    Ok(GeneratorPairingMatrix {
        row_labels: rows.iter().map(|c| c.to_string()).collect(),
        col_labels: cols.iter().map(|(l, _)| l.clone()).collect(),
        entries,
        det,
        window_exact,
        max_residual,
    })
}

/// Fraction-free (Bareiss) determinant of a small integer matrix: every
/// intermediate division is exact, so the result is the exact integer
/// determinant.
fn bareiss_det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|row| row.iter().map(|&v| v as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

/// One row of an identity comparison: a homology class label and the two
/// signed pairing sums.
#[derive(Clone, Debug)]
pub struct IdentityRow {
    pub class: String,
    pub lhs: i64,
    pub rhs: i64,
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub lhs_label: String,
    pub rhs_label: String,
    pub rows: Vec<IdentityRow>,
    pub equal: bool,
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} {} {}",
            self.lhs_label,
            if self.equal { "=" } else { "≠" },
            self.rhs_label
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "  ⟨{}⟩: {} vs {}{}",
                row.class,
                row.lhs,
                row.rhs,
                if row.lhs == row.rhs { "" } else { "   ← mismatch" }
            )?;
        }
        Ok(())
    }
}

fn signed_sum_vector(
    side: &[(i64, &Projection)],
    opts: &PairOptions,
) -> Result<(String, Vec<(KHomClass, i64)>), KtheoryError> {
    let mut label_parts = Vec::new();
    let mut total: Option<Vec<(KHomClass, i64)>> = None;
    for (sign, p) in side {
        label_parts.push(format!(
            "{}[{}]",
            match *sign {
                1 => "",
                -1 => "− ",
                s => return Err(KtheoryError::OutsideLattice(format!(
                    "identity coefficients must be ±1, got {}",
                    s
                ))),
            },
            p.label()
        ));
        let v = integer_pairing_vector(p.matrix(), opts)?;
        match &mut total {
            None => {
                total = Some(
                    v.into_iter()
                        .map(|(c, x)| (c, sign * x))
                        .collect(),
                );
            }
            Some(acc) => {
                for ((_, t), (_, x)) in acc.iter_mut().zip(v) {
                    *t += sign * x;
                }
            }
        }
    }
    Ok((
        label_parts.join(" + ").replace("+ − ", "− "),
        total.unwrap_or_default(),
    ))
}

/// Check a signed K₀ identity Σ ±[pᵢ] = Σ ±[p′ⱼ] by comparing the signed
/// sums of the two pairing vectors entry by entry.
pub fn verify_identity(
    lhs: &[(i64, &Projection)],
    rhs: &[(i64, &Projection)],
    opts: &PairOptions,
) -> Result<IdentityReport, KtheoryError> {
    let (lhs_label, lv) = signed_sum_vector(lhs, opts)?;
    let (rhs_label, rv) = signed_sum_vector(rhs, opts)?;
    if lv.len() != rv.len() {
        return Err(KtheoryError::OutsideLattice(
            "the two sides pair against different homology families".into(),
        ));
    }
    let rows: Vec<IdentityRow> = lv
        .iter()
        .zip(&rv)
        .map(|((c, a), (_, b))| IdentityRow {
            class: c.to_string(),
            lhs: *a,
            rhs: *b,
        })
        .collect();
    let equal = rows.iter().all(|r| r.lhs == r.rhs);
    Ok(IdentityReport {
        lhs_label,
        rhs_label,
        rows,
        equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projlib;
    use std::str::FromStr;

    fn rat(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    fn generic3() -> SpectralSet {
        SpectralSet::generic(
            rat("1/2"),
            vec![
                (rat("13/25"), rat("11/20")),
                (rat("3/5"), rat("31/50")),
                (rat("7/10"), rat("18/25")),
            ],
        )
        .unwrap()
    }

    #[test]
    fn ranks_and_generators_by_kind() {
        let full = SpectralSet::full(rat("3/4")).unwrap();
        let r = kgroups(&full, true);
        assert_eq!((r.k0_rank, r.k1_rank), (2, 0));
        assert_eq!(
            r.generators,
            vec![GeneratorName::PowersRieffelOne, GeneratorName::Unit]
        );
        let r = kgroups(&full, false);
        assert_eq!(r.k0_rank, 1);

        let one = SpectralSet::generic(rat("1/2"), vec![(rat("3/5"), rat("7/10"))]).unwrap();
        let r = kgroups(&one, false);
        assert_eq!(r.k0_rank, 2);
        assert_eq!(r.generators[0], GeneratorName::ChiZeroQ);
        assert!(matches!(r.generators[1], GeneratorName::ChiGap { index: 0, .. }));

        let r = kgroups(&generic3(), false);
        assert_eq!(r.k0_rank, 4);
        let r = kgroups(&generic3(), true);
        assert_eq!(r.k0_rank, 5);
        assert_eq!(*r.generators.last().unwrap(), GeneratorName::Unit);
    }

    #[test]
    fn bott_classes_decompose_onto_the_lowest_gap() {
        let x = generic3();
        let opts = PairOptions::default();
        for n in 1..=3i64 {
            let p = projlib::bott(n, &x).unwrap();
            let v = decompose_class(p.matrix(), true, &opts).unwrap();
            assert_eq!(
                v,
                KClassVector::Generic {
                    l: 0,
                    gap_coeffs: vec![0, 0, n],
                    unit: Some(1)
                },
                "P_{}",
                n
            );
            let p = projlib::bott(-n, &x).unwrap();
            let v = decompose_class(p.matrix(), true, &opts).unwrap();
            assert_eq!(
                v,
                KClassVector::Generic {
                    l: 0,
                    gap_coeffs: vec![0, 0, -n],
                    unit: Some(1)
                },
                "P_-{}",
                n
            );
        }
    }

    #[test]
    fn plateau_classes_are_non_unital_multiples_of_the_lowest_gap() {
        let x = generic3();
        let opts = PairOptions::default();
        for n in 1..=3i64 {
            let p = projlib::powers_rieffel(n, &x).unwrap();
            let v = decompose_class(p.matrix(), false, &opts).unwrap();
            assert_eq!(
                v,
                KClassVector::Generic {
                    l: 0,
                    gap_coeffs: vec![0, 0, n],
                    unit: None
                }
            );
        }
    }

    #[test]
    fn unital_class_is_rejected_from_the_non_unital_lattice() {
        let x = generic3();
        let opts = PairOptions::default();
        let p = projlib::bott(1, &x).unwrap();
        let err = decompose_class(p.matrix(), false, &opts);
        assert!(matches!(err, Err(KtheoryError::OutsideLattice(_))));
    }

    #[test]
    fn lattice_combination_round_trips() {
        let x = generic3();
        let opts = PairOptions::default();
        let g = x.gap_structure().unwrap();
        // 1·χ_[0,q) ⊕ 2·χ_(c_0,1) ⊕ 1·χ_(c_2,1) ⊕ 1·1
        let samples = g.gap_samples();
        let mut m = projlib::chi_zero_q(&x).unwrap().into_matrix();
        let c0 = projlib::chi_gap(&samples[0], &x).unwrap().into_matrix();
        m = m.block_diag(&c0).unwrap();
        m = m.block_diag(&c0).unwrap();
        let c2 = projlib::chi_gap(&samples[2], &x).unwrap().into_matrix();
        m = m.block_diag(&c2).unwrap();
        m = m.block_diag(projlib::unit(&x).matrix()).unwrap();
        let v = decompose_class(&m, true, &opts).unwrap();
        assert_eq!(
            v,
            KClassVector::Generic {
                l: 1,
                gap_coeffs: vec![2, 0, 1],
                unit: Some(1)
            }
        );
        assert_eq!(format!("{}", v), "[1] + [χ_[0,q)] + 2·[χ_(c_0,1)] + [χ_(c_2,1)]");
    }

    #[test]
    fn full_spectrum_winding() {
        let x = SpectralSet::full(rat("3/4")).unwrap();
        let opts = PairOptions::default();
        let p = projlib::bott(1, &x).unwrap();
        let v = decompose_class(p.matrix(), true, &opts).unwrap();
        assert_eq!(
            v,
            KClassVector::Full {
                winding: 1,
                unit: Some(1)
            }
        );
        let r1 = projlib::powers_rieffel(1, &x).unwrap();
        let v = decompose_class(r1.matrix(), false, &opts).unwrap();
        assert_eq!(v, KClassVector::Full { winding: 1, unit: None });
    }

    #[test]
    fn rank_decomposition_difference_formula() {
        let x = generic3();
        let g = x.gap_structure().unwrap();
        // constant rank → a single coefficient on the lowest gap generator
        let r = RankFunction::new(vec![2, 2, 2]);
        assert_eq!(rank_decompose(&r, &g), vec![2, 0, 0]);
        // ascending ranks (2,3) on two components
        let x2 = SpectralSet::generic(
            rat("1/2"),
            vec![(rat("3/5"), rat("31/50")), (rat("7/10"), rat("18/25"))],
        )
        .unwrap();
        let g2 = x2.gap_structure().unwrap();
        assert_eq!(
            rank_decompose(&RankFunction::new(vec![2, 3]), &g2),
            vec![2, 1]
        );
        // descending ranks give a formal (negative) difference
        assert_eq!(
            rank_decompose(&RankFunction::new(vec![1, 0]), &g2),
            vec![1, -1]
        );
        // round trips both ways
        let r = RankFunction::new(vec![3, 1, 4]);
        let coeffs = rank_decompose(&r, &g);
        assert_eq!(rank_reconstruct(&coeffs, &g), vec![3, 1, 4]);
        let coeffs = vec![1, -1, 2];
        let ranks = rank_reconstruct(&coeffs, &g);
        let rf = RankFunction::new(ranks.iter().map(|&v| v as u32).collect());
        assert_eq!(rank_decompose(&rf, &g), coeffs);
    }

    #[test]
    fn pairing_matrix_is_unimodular() {
        let opts = PairOptions::default();
        for unital in [true, false] {
            let m = generator_pairing_matrix(&generic3(), unital, &opts).unwrap();
            assert_eq!(m.det.abs(), 1, "generic unital={}: det {}", unital, m.det);
            let m = generator_pairing_matrix(
                &SpectralSet::full(rat("1/2")).unwrap(),
                unital,
                &opts,
            )
            .unwrap();
            assert_eq!(m.det.abs(), 1, "full unital={}: det {}", unital, m.det);
        }
        // the frozen unital 3-component shape: ev₀ row (1,0,0,0,1),
        // F rows (0, triangle, 0), ev_∞ row (0,0,0,0,1)
        let m = generator_pairing_matrix(&generic3(), true, &opts).unwrap();
        assert_eq!(m.entries[0], vec![1, 0, 0, 0, 1]);
        assert_eq!(m.entries[1], vec![0, 1, 1, 1, 0]);
        assert_eq!(m.entries[2], vec![0, 0, 1, 1, 0]);
        assert_eq!(m.entries[3], vec![0, 0, 0, 1, 0]);
        assert_eq!(m.entries[4], vec![0, 0, 0, 0, 1]);
    }

    #[test]
    fn bareiss_determinants() {
        assert_eq!(bareiss_det(&[]), 1);
        assert_eq!(bareiss_det(&[vec![7]]), 7);
        assert_eq!(bareiss_det(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(
            bareiss_det(&[vec![2, 3, 1], vec![4, 7, 5], vec![6, 18, 22]]),
            2 * (7 * 22 - 5 * 18) - 3 * (4 * 22 - 5 * 6) + (4 * 18 - 7 * 6)
        );
        assert_eq!(bareiss_det(&[vec![1, 2], vec![2, 4]]), 0);
    }

    #[test]
    fn class_identities_hold() {
        let x = generic3();
        let opts = PairOptions::default();
        let one = projlib::unit(&x);
        for n in 1..=5i64 {
            let pn = projlib::bott(n, &x).unwrap();
            let rn = projlib::powers_rieffel(n, &x).unwrap();
            let rep = verify_identity(&[(1, &pn)], &[(1, &one), (1, &rn)], &opts).unwrap();
            assert!(rep.equal, "[P_n] = [1] + [R_n] failed:\n{}", rep);
            let pmn = projlib::bott(-n, &x).unwrap();
            let rep = verify_identity(&[(1, &pmn), (1, &rn)], &[(1, &one)], &opts).unwrap();
            assert!(rep.equal, "[P_-n] + [R_n] = [1] failed:\n{}", rep);
        }
        // and a deliberate mismatch is reported, not hidden
        let p2 = projlib::bott(2, &x).unwrap();
        let r1 = projlib::powers_rieffel(1, &x).unwrap();
        let rep = verify_identity(&[(1, &p2)], &[(1, &one), (1, &r1)], &opts).unwrap();
        assert!(!rep.equal);
        assert!(format!("{}", rep).contains("mismatch"));
    }

    #[test]
    fn window_indicator_is_a_multiple_of_the_lowest_gap_indicator() {
        let x = generic3();
        let opts = PairOptions::default();
        let g = x.gap_structure().unwrap();
        let lowest = g.gap_samples().last().cloned().unwrap();
        for n in 1..=4i64 {
            let w = projlib::chi_window(n, &x).unwrap();
            let c = projlib::chi_gap(&lowest, &x).unwrap();
            let side: Vec<(i64, &Projection)> = std::iter::repeat((1, &c))
                .take(n as usize)
                .collect();
            let rep = verify_identity(&[(1, &w)], &side, &opts).unwrap();
            assert!(rep.equal, "[χ_(qⁿ,1)] = n[χ_(q,1)] failed at n={}:\n{}", n, rep);
        }
    }
}
