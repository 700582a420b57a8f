//! q-invariant spectra on the half line.
//!
//! A spectrum is either the full half line [0, ∞) or the q-scaled set
//! `{0} ∪ ⋃_{n∈ℤ} qⁿ·Y` for a finite union Y of closed rational intervals
//! inside (q, 1). The generic case is what makes the K-theory interesting:
//! the gaps of (q, s] \ Y (one per component of Y) carry the indicator
//! projections, and the component midpoints serve as evaluation witnesses.

use crate::scaled::ScaledRational;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("q must satisfy 0 < q < 1, got {0}")]
    InvalidQ(BigRational),
    #[error("a generic spectrum needs at least one interval")]
    EmptySpectrum,
    #[error("interval [{lo}, {hi}] is inverted")]
    InvertedInterval { lo: BigRational, hi: BigRational },
    #[error("interval [{lo}, {hi}] must lie strictly inside (q, 1) = ({q}, 1)")]
    IntervalOutOfRange {
        lo: BigRational,
        hi: BigRational,
        q: BigRational,
    },
    #[error("intervals [{a_lo}, {a_hi}] and [{b_lo}, {b_hi}] overlap or touch")]
    OverlappingIntervals {
        a_lo: BigRational,
        a_hi: BigRational,
        b_lo: BigRational,
        b_hi: BigRational,
    },
    #[error("the full spectrum has no gap structure")]
    FullHasNoGaps,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    /// spec|z| = [0, ∞): every nonnegative real.
    Full,
    /// spec|z| = {0} ∪ ⋃ₙ qⁿ·Y with Y a finite union of closed intervals.
    Generic,
}

/// The spectrum of |z| for a q-normal operator, up to the q-scaling symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSet {
    q: BigRational,
    kind: SpectrumKind,
    /// Components of Y in ascending position order; empty for `Full`.
    components: Vec<(BigRational, BigRational)>,
}

impl SpectralSet {
    pub fn full(q: BigRational) -> Result<Self, SpectralError> {
        check_q(&q)?;
        Ok(SpectralSet {
            q,
            kind: SpectrumKind::Full,
            components: Vec::new(),
        })
    }

    /// Build a generic spectrum from closed intervals with rational endpoints.
    /// The list is sorted; intervals must be pairwise disjoint (touching
    /// counts as overlap) and lie strictly inside (q, 1). Degenerate
    /// single-point intervals are allowed.
    pub fn generic(
        q: BigRational,
        intervals: Vec<(BigRational, BigRational)>,
    ) -> Result<Self, SpectralError> {
        check_q(&q)?;
        if intervals.is_empty() {
            return Err(SpectralError::EmptySpectrum);
        }
        let one = BigRational::one();
        for (lo, hi) in &intervals {
            if lo > hi {
                return Err(SpectralError::InvertedInterval {
                    lo: lo.clone(),
                    hi: hi.clone(),
                });
            }
            if *lo <= q || *hi >= one {
                return Err(SpectralError::IntervalOutOfRange {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    q: q.clone(),
                });
            }
        }
        let mut sorted = intervals;
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for w in sorted.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(SpectralError::OverlappingIntervals {
                    a_lo: w[0].0.clone(),
                    a_hi: w[0].1.clone(),
                    b_lo: w[1].0.clone(),
                    b_hi: w[1].1.clone(),
                });
            }
        }
        Ok(SpectralSet {
            q,
            kind: SpectrumKind::Generic,
            components: sorted,
        })
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn q_f64(&self) -> f64 {
        self.q.to_f64().unwrap_or(f64::NAN)
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn is_full(&self) -> bool {
        self.kind == SpectrumKind::Full
    }

    /// Components of Y in ascending position order (empty for Full).
    pub fn components(&self) -> &[(BigRational, BigRational)] {
        &self.components
    }

    /// Exact membership test for a point of the half line.
    ///
    /// Zero always belongs; negative points never do. For a generic spectrum
    /// the point is normalized into the window (q, 1] and tested against Y.
    pub fn in_spectrum(&self, t: &ScaledRational) -> bool {
        if t.is_negative() {
            return false;
        }
        if t.is_zero() {
            return true;
        }
        if self.is_full() {
            return true;
        }
        let w = t.normalized(&self.q);
        // The window representative lies in (q, 1]; Y sits strictly inside
        // (q, 1), so the representative 1 (i.e. t = q^m) is never a member.
        let r = w.rational_part();
        self.components.iter().any(|(lo, hi)| lo <= r && r <= hi)
    }

    /// Gap data for a generic spectrum (error on Full).
    pub fn gap_structure(&self) -> Result<GapStructure, SpectralError> {
        if self.is_full() {
            return Err(SpectralError::FullHasNoGaps);
        }
        let n = self.components.len();
        let s = self.components[n - 1].1.clone();
        // Ascending gaps of (q, s] \ Y: below each component.
        let mut gaps = Vec::with_capacity(n);
        let mut prev_hi = self.q.clone();
        for (lo, hi) in &self.components {
            let sample = (&prev_hi + lo) / BigRational::from_integer(2.into());
            gaps.push(Gap {
                lo: prev_hi.clone(),
                hi: lo.clone(),
                sample,
            });
            prev_hi = hi.clone();
        }
        // Components with their witnesses.
        let mut components: Vec<Component> = self
            .components
            .iter()
            .map(|(lo, hi)| Component {
                lo: lo.clone(),
                hi: hi.clone(),
                witness: (lo + hi) / BigRational::from_integer(2.into()),
            })
            .collect();
        // Stored in descending position order: the triangular pairing
        // structure (component γ sees exactly the gaps at or below it) is
        // upper-triangular in this ordering.
        gaps.reverse();
        components.reverse();
        Ok(GapStructure {
            s,
            gaps,
            components,
        })
    }
}

fn check_q(q: &BigRational) -> Result<(), SpectralError> {
    if q <= &BigRational::zero() || q >= &BigRational::one() {
        return Err(SpectralError::InvalidQ(q.clone()));
    }
    Ok(())
}

/// One bounded open gap of (q, s] \ Y, with its rational midpoint sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Gap {
    pub lo: BigRational,
    pub hi: BigRational,
    /// Midpoint c of the gap; the indicator χ_(c,1) depends only on the gap.
    pub sample: BigRational,
}

/// One connected component of Y with its evaluation witness (the midpoint;
/// for a degenerate component, the point itself).
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub lo: BigRational,
    pub hi: BigRational,
    pub witness: BigRational,
}

/// Gaps and components of a generic spectrum, both in descending position
/// order. There are exactly as many gaps as components: one gap immediately
/// below each component, the lowest being (q, min Y).
#[derive(Clone, Debug, PartialEq)]
pub struct GapStructure {
    /// Largest point of Y (the top of the fundamental window actually used).
    /// Always strictly inside (q, 1).
    pub s: BigRational,
    pub gaps: Vec<Gap>,
    pub components: Vec<Component>,
}

impl GapStructure {
    /// Gap samples c_j in descending order.
    pub fn gap_samples(&self) -> Vec<BigRational> {
        self.gaps.iter().map(|g| g.sample.clone()).collect()
    }

    /// Component witnesses y_γ in descending order.
    pub fn witnesses(&self) -> Vec<BigRational> {
        self.components.iter().map(|c| c.witness.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn rat(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    fn sr(s: &str) -> ScaledRational {
        ScaledRational::from_rational(rat(s))
    }

    #[test]
    fn single_interval_gap_structure() {
        let x = SpectralSet::generic(rat("1/2"), vec![(rat("3/5"), rat("7/10"))]).unwrap();
        let g = x.gap_structure().unwrap();
        assert_eq!(g.s, rat("7/10"));
        assert_eq!(g.gaps.len(), 1);
        assert_eq!(g.gaps[0].lo, rat("1/2"));
        assert_eq!(g.gaps[0].hi, rat("3/5"));
        assert_eq!(g.gaps[0].sample, rat("11/20"));
        assert_eq!(g.components[0].witness, rat("13/20"));
    }

    #[test]
    fn three_interval_gap_structure_descending() {
        let x = SpectralSet::generic(
            rat("1/2"),
            vec![
                (rat("13/25"), rat("11/20")),
                (rat("3/5"), rat("31/50")),
                (rat("7/10"), rat("18/25")),
            ],
        )
        .unwrap();
        let g = x.gap_structure().unwrap();
        assert_eq!(g.gaps.len(), 3);
        assert_eq!(g.components.len(), 3);
        // Descending samples: (31/50,7/10) → 33/50, (11/20,3/5) → 23/40, (1/2,13/25) → 51/100.
        assert_eq!(g.gap_samples(), vec![rat("33/50"), rat("23/40"), rat("51/100")]);
        assert_eq!(
            g.witnesses(),
            vec![rat("71/100"), rat("61/100"), rat("107/200")]
        );
    }

    #[test]
    fn input_order_does_not_matter() {
        let a = SpectralSet::generic(
            rat("1/2"),
            vec![
                (rat("7/10"), rat("18/25")),
                (rat("13/25"), rat("11/20")),
                (rat("3/5"), rat("31/50")),
            ],
        )
        .unwrap();
        let b = SpectralSet::generic(
            rat("1/2"),
            vec![
                (rat("13/25"), rat("11/20")),
                (rat("3/5"), rat("31/50")),
                (rat("7/10"), rat("18/25")),
            ],
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.gap_structure().unwrap(), b.gap_structure().unwrap());
    }

    #[test]
    fn membership_is_q_invariant() {
        let x = SpectralSet::generic(rat("1/2"), vec![(rat("3/5"), rat("7/10"))]).unwrap();
        // (3/5)·q^3 is in the spectrum
        let t = ScaledRational::new(rat("3/5"), 3);
        assert!(x.in_spectrum(&t));
        assert!(x.in_spectrum(&t.mul_q_pow(5)));
        assert!(x.in_spectrum(&t.mul_q_pow(-9)));
        // 1 = q^0 is not (Y is strictly inside (q,1))
        assert!(!x.in_spectrum(&sr("1")));
        // 0 always is
        assert!(x.in_spectrum(&ScaledRational::zero()));
        // 23/40 in the gap (1/2, 3/5) is not, at any scale
        assert!(!x.in_spectrum(&sr("23/40")));
        assert!(!x.in_spectrum(&ScaledRational::new(rat("23/40"), 7)));
        // negative points are never members
        assert!(!x.in_spectrum(&sr("-1/2")));
    }

    #[test]
    fn full_spectrum_membership_and_gaps() {
        let x = SpectralSet::full(rat("3/4")).unwrap();
        assert!(x.in_spectrum(&sr("7/10")));
        assert!(x.in_spectrum(&ScaledRational::new(rat("5"), -20)));
        assert!(matches!(
            x.gap_structure(),
            Err(SpectralError::FullHasNoGaps)
        ));
    }

    #[test]
    fn degenerate_component_witness_is_the_point() {
        let x = SpectralSet::generic(rat("1/2"), vec![(rat("3/5"), rat("3/5"))]).unwrap();
        let g = x.gap_structure().unwrap();
        assert_eq!(g.components[0].witness, rat("3/5"));
        assert!(x.in_spectrum(&sr("3/5")));
        assert!(!x.in_spectrum(&sr("39/64")));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            SpectralSet::full(rat("5/4")),
            Err(SpectralError::InvalidQ(_))
        ));
        assert!(matches!(
            SpectralSet::generic(rat("1/2"), vec![]),
            Err(SpectralError::EmptySpectrum)
        ));
        // outside (q,1)
        assert!(SpectralSet::generic(rat("1/2"), vec![(rat("2/5"), rat("3/5"))]).is_err());
        assert!(SpectralSet::generic(rat("1/2"), vec![(rat("3/5"), rat("1"))]).is_err());
        // touching intervals
        assert!(SpectralSet::generic(
            rat("1/2"),
            vec![(rat("3/5"), rat("13/20")), (rat("13/20"), rat("7/10"))]
        )
        .is_err());
        // inverted
        assert!(SpectralSet::generic(rat("1/2"), vec![(rat("7/10"), rat("3/5"))]).is_err());
    }

    #[test]
    fn gap_count_equals_component_count() {
        for intervals in [
            vec![(rat("11/20"), rat("3/5"))],
            vec![(rat("11/20"), rat("3/5")), (rat("7/10"), rat("4/5"))],
            vec![
                (rat("21/40"), rat("11/20")),
                (rat("3/5"), rat("5/8")),
                (rat("13/20"), rat("27/40")),
                (rat("7/10"), rat("29/40")),
            ],
        ] {
            let n = intervals.len();
            let x = SpectralSet::generic(rat("1/2"), intervals).unwrap();
            let g = x.gap_structure().unwrap();
            assert_eq!(g.gaps.len(), n);
            assert_eq!(g.components.len(), n);
        }
    }
}
