//! Invariants over random admissible parameter sequences.

use fatcantor::params::ChooserContext;
use fatcantor::{
    attractor_measure_bounds, build_intervals, eval_limit, generate_params, membership, nowhere_dense_witness,
    run_full_verification, validate_params, verify_self_similarity, Construction, Membership, ParamSequence, Rational,
    Status,
};
use proptest::prelude::*;

/// `eps_{k+1}` chosen as a random fraction in (0, 1) of the admissible bound.
fn arb_params(depth: usize) -> impl Strategy<Value = ParamSequence> {
    prop::collection::vec((1i64..16, 16i64..17), depth).prop_map(move |fractions| {
        let chooser = move |ctx: &ChooserContext| {
            let (n, d) = fractions[ctx.k - 1];
            ctx.bound() * Rational::new(n, d)
        };
        generate_params(depth, &chooser).expect("fractions below 1 are admissible")
    })
}

fn arb_unit() -> impl Strategy<Value = Rational> {
    (0i64..=1000, 1000i64..=1000).prop_map(|(n, d)| Rational::new(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_sequences_validate(seq in arb_params(8)) {
        prop_assert!(validate_params(&seq).passed());
    }

    #[test]
    fn lower_bound_holds_for_any_admissible_sequence(seq in arb_params(9)) {
        let mut prev_upper = None;
        for k in 2..=9 {
            let b = attractor_measure_bounds(&seq, k).unwrap();
            prop_assert!(b.lower >= Rational::new(1, 3));
            prop_assert!(b.lower <= b.upper);
            if let Some(p) = prev_upper {
                prop_assert!(b.upper < p);
            }
            prev_upper = Some(b.upper);
        }
    }

    #[test]
    fn campaign_passes_on_random_sequences(seq in arb_params(6)) {
        let report = run_full_verification(&seq, 4).unwrap();
        for c in &report.claims {
            prop_assert_ne!(c.status, Status::Fail, "{} {:?}", c.id, c.witness);
        }
    }

    #[test]
    fn self_similarity_on_random_sequences(seq in arb_params(7)) {
        for k in 1..=5 {
            prop_assert!(verify_self_similarity(&seq, k).unwrap().passed);
        }
    }

    #[test]
    fn membership_agrees_with_families(seq in arb_params(7), x in arb_unit()) {
        let first_out = (1..=7).find(|&k| !build_intervals(&seq, k).unwrap().contains(&x));
        let expected = match first_out {
            Some(k) => Membership::EjectedAtLevel(k),
            None => Membership::InAttractorUpToDepth(7),
        };
        prop_assert_eq!(membership(&seq, &x), expected);
    }

    #[test]
    fn certified_values_nest(seq in arb_params(10), x in arb_unit()) {
        let coarse = eval_limit(&seq, &x, &Rational::new(1, 4)).unwrap().value;
        let fine = eval_limit(&seq, &x, &Rational::new(1, 256)).unwrap().value;
        prop_assert!(fine.lower() >= coarse.lower());
        prop_assert!(fine.upper() <= coarse.upper());
        prop_assert!(fine.value >= Rational::zero() && fine.value <= Rational::new(1, 3));
    }

    #[test]
    fn limit_is_increasing_on_exact_points(seq in arb_params(8)) {
        let c = Construction::new(seq.clone());
        let fam = c.family(6).unwrap();
        let mut last = None;
        for m in fam.members() {
            for x in [&m.lo, &m.hi] {
                let v = eval_limit(&seq, x, &Rational::new(1, 2)).unwrap().value;
                prop_assert!(v.is_exact());
                if let Some(prev) = last.replace(v.value.clone()) {
                    prop_assert!(prev < v.value);
                }
            }
        }
    }

    #[test]
    fn witnesses_lie_in_gaps(seq in arb_params(16), c in 1i64..1023, e in 1u32..10) {
        let c = Rational::new(c, 1024);
        let r = Rational::pow2(-(e as i32)).min(c.clone()).min(Rational::one() - &c);
        let w = nowhere_dense_witness(&seq, &c, &r).unwrap();
        prop_assert!(w.gap.lo >= &c - &r && w.gap.hi <= &c + &r);
        prop_assert!(w.gap.is_subset_of(&w.component));
        let fam = build_intervals(&seq, w.level).unwrap();
        prop_assert!(!fam.contains(&w.gap.lo.midpoint(&w.gap.hi)));
    }
}
