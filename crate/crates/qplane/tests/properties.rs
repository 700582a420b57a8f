//! Property suites: randomized laws for the dilation action, the
//! *-algebra operations, the boundary characters, spectrum membership,
//! witness-independence of the pairings, and the rank decomposition.
//! Everything here is exact except where a law is inherently numerical.

use num_rational::BigRational;
use proptest::prelude::*;
use qplane::crossed::CrossedElement;
use qplane::funcspace::{Endpoint, Interval, QFunction, StepFunction};
use qplane::ktheory::{rank_decompose, rank_reconstruct, RankFunction};
use qplane::pairing::{pair, KHomClass, PairOptions};
use qplane::projlib;
use qplane::rep::{boundary_matrix, pi_y_matrix};
use qplane::scaled::ScaledRational;
use qplane::spectral::SpectralSet;
use std::str::FromStr;

fn rat(s: &str) -> BigRational {
    BigRational::from_str(s).unwrap()
}

fn ambient() -> SpectralSet {
    SpectralSet::generic(rat("1/2"), vec![(rat("3/5"), rat("7/10"))]).unwrap()
}

fn teo_spectrum() -> SpectralSet {
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

/// Raw material for one step function: indicator intervals with rational
/// endpoints at explicit q-scales, combined with small rational weights.
/// `from_zero` anchors the lowest interval at 0 so that the functions do
/// not all vanish there.
#[derive(Clone, Debug)]
struct RawStep {
    spans: Vec<(i64, i64, i64, bool, BigRational)>,
    from_zero: bool,
}

fn raw_step(allow_zero: bool) -> impl Strategy<Value = RawStep> {
    let span = (
        1i64..=16,
        1i64..=16,
        -2i64..=2,
        any::<bool>(),
        (-4i64..=4, 1i64..=4).prop_map(|(n, d)| BigRational::new(n.into(), d.into())),
    );
    let zero = if allow_zero {
        any::<bool>().boxed()
    } else {
        Just(false).boxed()
    };
    (proptest::collection::vec(span, 1..4), zero)
        .prop_map(|(spans, from_zero)| RawStep { spans, from_zero })
}

fn build_step(raw: &RawStep, q: &BigRational) -> StepFunction {
    let mut acc = StepFunction::zero();
    for (i, (a, b, m, closed, w)) in raw.spans.iter().enumerate() {
        let lo_r = BigRational::new((*a.min(b)).into(), 16.into());
        let hi_r = BigRational::new(((*a.max(b)) + 1).into(), 16.into());
        let lo = if raw.from_zero && i == 0 {
            ScaledRational::zero()
        } else {
            ScaledRational::new(lo_r, *m)
        };
        let hi = ScaledRational::new(hi_r, *m);
        let iv = Interval::new(lo, true, Endpoint::Finite(hi), *closed);
        let chi = StepFunction::indicator(iv, q).expect("non-negative interval");
        acc = acc.add(&chi.scale(w), q);
    }
    acc
}

/// A random element with step coefficients on powers −2..2, plus an
/// optional unital constant.
#[derive(Clone, Debug)]
struct RawElement {
    parts: Vec<(i64, RawStep)>,
    constant: Option<BigRational>,
}

fn raw_element(allow_zero: bool, with_constant: bool) -> impl Strategy<Value = RawElement> {
    let constant = if with_constant {
        proptest::option::of((-3i64..=3).prop_map(|n| BigRational::from_integer(n.into())))
            .boxed()
    } else {
        Just(None).boxed()
    };
    (
        proptest::collection::vec((-2i64..=2, raw_step(allow_zero)), 1..3),
        constant,
    )
        .prop_map(|(parts, constant)| RawElement { parts, constant })
}

fn build_element(raw: &RawElement, x: &SpectralSet) -> CrossedElement {
    let q = x.q().clone();
    let mut acc = match &raw.constant {
        Some(c) => CrossedElement::scalar(x.clone(), c.clone()),
        None => CrossedElement::zero(x.clone()),
    };
    for (k, rs) in &raw.parts {
        let f = QFunction::Step(build_step(rs, &q));
        let m = CrossedElement::monomial(x.clone(), *k, f);
        acc = acc.add(&m).expect("same ambient");
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dilation_shift_is_a_group_action(raw in raw_step(true), m in -4i64..=4, n in -4i64..=4) {
        let x = ambient();
        let q = x.q();
        let f = build_step(&raw, q);
        prop_assert!(f.alpha_shift(m).alpha_shift(n).eq_in(&f.alpha_shift(m + n), q));
        prop_assert!(f.alpha_shift(0).eq_in(&f, q));
        // the action is by algebra automorphisms
        let g = f.alpha_shift(1);
        prop_assert!(f.add(&g, q).alpha_shift(m).eq_in(&f.alpha_shift(m).add(&g.alpha_shift(m), q), q));
        prop_assert!(f.mul(&g, q).alpha_shift(m).eq_in(&f.alpha_shift(m).mul(&g.alpha_shift(m), q), q));
    }

    #[test]
    fn star_algebra_axioms_hold_exactly(
        ra in raw_element(true, true),
        rb in raw_element(true, true),
        rc in raw_element(true, true),
        lambda in (-3i64..=3).prop_map(|n| BigRational::from_integer(n.into())),
    ) {
        let x = ambient();
        let a = build_element(&ra, &x);
        let b = build_element(&rb, &x);
        let c = build_element(&rc, &x);
        let assoc_l = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let assoc_r = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(assoc_l.eq_exact(&assoc_r), Some(true));
        let dist_l = a.multiply(&b.add(&c).unwrap()).unwrap();
        let dist_r = a.multiply(&b).unwrap().add(&a.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(dist_l.eq_exact(&dist_r), Some(true));
        prop_assert_eq!(a.adjoint().adjoint().eq_exact(&a), Some(true));
        let star_l = a.multiply(&b).unwrap().adjoint();
        let star_r = b.adjoint().multiply(&a.adjoint()).unwrap();
        prop_assert_eq!(star_l.eq_exact(&star_r), Some(true));
        let sum_star = a.add(&b).unwrap().adjoint();
        prop_assert_eq!(sum_star.eq_exact(&a.adjoint().add(&b.adjoint()).unwrap()), Some(true));
        let scale_l = a.scale(&lambda).multiply(&b).unwrap();
        let scale_r = a.multiply(&b).unwrap().scale(&lambda);
        prop_assert_eq!(scale_l.eq_exact(&scale_r), Some(true));
    }

    #[test]
    fn boundary_characters_are_homomorphisms(
        ra in raw_element(true, true),
        rb in raw_element(true, true),
    ) {
        let x = ambient();
        let a = build_element(&ra, &x);
        let b = build_element(&rb, &x);
        let ab = a.multiply(&b).unwrap();
        let sum = a.add(&b).unwrap();
        let ev0 = |e: &CrossedElement| e.ev_zero_exact().expect("step coefficients");
        prop_assert_eq!(ev0(&ab), ev0(&a) * ev0(&b));
        prop_assert_eq!(ev0(&sum), ev0(&a) + ev0(&b));
        // at ∞ the same laws hold for unitization members; the generated
        // coefficients vanish at ∞, so membership only needs the k ≠ 0
        // coefficients to vanish at 0 as well
        if a.is_member(true) && b.is_member(true) {
            let evinf = |e: &CrossedElement| {
                e.ev_infinity_exact().unwrap().expect("step coefficients")
            };
            prop_assert_eq!(evinf(&ab), evinf(&a) * evinf(&b));
            prop_assert_eq!(evinf(&sum), evinf(&a) + evinf(&b));
        }
    }

    #[test]
    fn membership_is_closed_under_the_operations(
        ra in raw_element(false, false),
        rb in raw_element(false, false),
        lambda in (-3i64..=3).prop_map(|n| BigRational::from_integer(n.into())),
    ) {
        let x = ambient();
        let a = build_element(&ra, &x);
        let b = build_element(&rb, &x);
        prop_assert!(a.is_member(false));
        prop_assert!(b.is_member(false));
        prop_assert!(a.add(&b).unwrap().is_member(false));
        prop_assert!(a.multiply(&b).unwrap().is_member(false));
        prop_assert!(a.adjoint().is_member(false));
        prop_assert!(a.scale(&lambda).is_member(false));
        // adjoining a unit keeps everything inside the unitization
        let one = CrossedElement::unit(x.clone());
        let au = a.add(&one).unwrap();
        let bu = b.add(&one).unwrap();
        prop_assert!(au.is_member(true) && !au.is_member(false));
        prop_assert!(au.multiply(&bu).unwrap().is_member(true));
        prop_assert!(au.adjoint().is_member(true));
    }

    #[test]
    fn spectrum_membership_is_dilation_invariant(
        nums in proptest::collection::btree_set(51i64..99, 6),
        pick in 0usize..3,
        e in -5i64..=5,
    ) {
        let pts: Vec<BigRational> = nums
            .into_iter()
            .map(|n| BigRational::new(n.into(), 100.into()))
            .collect();
        let x = SpectralSet::generic(
            rat("1/2"),
            vec![
                (pts[0].clone(), pts[1].clone()),
                (pts[2].clone(), pts[3].clone()),
                (pts[4].clone(), pts[5].clone()),
            ],
        )
        .unwrap();
        let comp = &x.components()[pick];
        let inside = (&comp.0 + &comp.1) / BigRational::from_integer(2.into());
        prop_assert!(x.in_spectrum(&ScaledRational::new(inside, e)));
        let g = x.gap_structure().unwrap();
        for c in g.gap_samples() {
            prop_assert!(!x.in_spectrum(&ScaledRational::new(c, e)));
        }
    }

    #[test]
    fn rank_decomposition_round_trips(
        ranks in proptest::collection::vec(0u32..10, 1..=6),
        coeffs in proptest::collection::vec(-5i64..=5, 1..=6),
    ) {
        // spectra with 1..6 components, cut from one descending family
        let all: Vec<(BigRational, BigRational)> = vec![
            (rat("13/25"), rat("53/100")),
            (rat("14/25"), rat("57/100")),
            (rat("3/5"), rat("61/100")),
            (rat("16/25"), rat("13/20")),
            (rat("7/10"), rat("71/100")),
            (rat("4/5"), rat("81/100")),
        ];
        let x = SpectralSet::generic(rat("1/2"), all[..ranks.len()].to_vec()).unwrap();
        let g = x.gap_structure().unwrap();
        let rf = RankFunction::new(ranks.clone());
        let coeffs_of_ranks = rank_decompose(&rf, &g);
        let back = rank_reconstruct(&coeffs_of_ranks, &g);
        prop_assert_eq!(back, ranks.iter().map(|&r| r as i64).collect::<Vec<_>>());

        let x2 = SpectralSet::generic(rat("1/2"), all[..coeffs.len()].to_vec()).unwrap();
        let g2 = x2.gap_structure().unwrap();
        let ranks2 = rank_reconstruct(&coeffs, &g2);
        if ranks2.iter().all(|&r| r >= 0) {
            let rf2 = RankFunction::new(ranks2.iter().map(|&r| r as u32).collect());
            prop_assert_eq!(rank_decompose(&rf2, &g2), coeffs);
        }
    }
}

proptest! {
    // fewer cases: each one runs several adaptive trace pairings
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pairings_do_not_depend_on_the_witness_within_a_component(
        pick in 0usize..3,
        u in 1i64..=9,
    ) {
        let x = teo_spectrum();
        let opts = PairOptions::default();
        let g = x.gap_structure().unwrap();
        let comp = &g.components[pick];
        let y1 = comp.witness.clone();
        let spread = &comp.hi - &comp.lo;
        let y2 = &comp.lo + spread * BigRational::new(u.into(), 10.into());
        prop_assume!(y1 != y2);
        let f1 = KHomClass::Fredholm { gamma: Some(pick), y: y1 };
        let f2 = KHomClass::Fredholm { gamma: Some(pick), y: y2 };
        for p in [
            projlib::bott(2, &x).unwrap(),
            projlib::bott(-1, &x).unwrap(),
            projlib::powers_rieffel(2, &x).unwrap(),
            projlib::chi_window(3, &x).unwrap(),
        ] {
            let a = pair(&f1, p.matrix(), &opts).unwrap();
            let b = pair(&f2, p.matrix(), &opts).unwrap();
            prop_assert!(a.integral && b.integral, "{}: non-integral", p.label());
            prop_assert_eq!(a.rounded, b.rounded, "{}", p.label());
        }
    }
}

/// Independent route to the same integers: assemble the two representations
/// as explicit truncated matrices and take the literal trace of their
/// difference. Exact agreement is expected once the window covers the
/// supports (indicators), tolerance-level agreement otherwise.
#[test]
fn matrix_trace_route_matches_the_series_route() {
    let x = teo_spectrum();
    let opts = PairOptions::default();
    let y = rat("61/100");
    let f = KHomClass::Fredholm {
        gamma: None,
        y: y.clone(),
    };
    let matrix_trace = |m: &qplane::crossed::CrossedMatrix, window: usize| -> f64 {
        let a = pi_y_matrix(m, &y, window).unwrap();
        let b = boundary_matrix(m, window).unwrap();
        (a - b).trace()
    };
    // window-exact step classes: the two routes agree to rounding
    for (p, want) in [
        (projlib::chi_window(3, &x).unwrap(), 3i64),
        (projlib::chi_zero_q(&x).unwrap(), 0),
        (projlib::powers_rieffel(2, &x).unwrap(), 2),
    ] {
        let series = pair(&f, p.matrix(), &opts).unwrap();
        let direct = matrix_trace(p.matrix(), 24);
        assert_eq!(series.rounded, want, "{}", p.label());
        assert!(
            (series.raw - direct).abs() < 1e-10,
            "{}: series {} vs matrix {}",
            p.label(),
            series.raw,
            direct
        );
    }
    // adaptive classes: agreement within the trace tolerance
    for (n, want) in [(2i64, 2i64), (-2, -2)] {
        let p = projlib::bott(n, &x).unwrap();
        let series = pair(&f, p.matrix(), &opts).unwrap();
        let direct = matrix_trace(p.matrix(), 64);
        assert_eq!(series.rounded, want);
        assert!(
            (series.raw - direct).abs() < 1e-9,
            "P_{}: series {} vs matrix {}",
            n,
            series.raw,
            direct
        );
    }
}
