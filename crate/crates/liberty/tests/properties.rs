//! Randomized structural invariants: ring axioms and calculus identities of
//! the exp-polynomial algebra, normal-form invariance of cyclic words, and
//! symmetries of the exact mixed-moment engine.

use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

use liberty::combinatorics::{all_permutations, enumerate_by_cycle_type, IntegerPartition};
use liberty::exp_poly::{ExpPoly, Rat, Time};
use liberty::moment_engine::MomentEngine;
use liberty::word::{Family, Letter, Word};

fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(n.into(), d.into())
}

/// Small exact rationals.
fn arb_rat() -> impl Strategy<Value = Rat> {
    (-20i64..=20, 1i64..=9).prop_map(|(n, d)| rat(n, d))
}

/// Exp-polynomials with a handful of non-positive exponents and low degree.
fn arb_exp_poly() -> impl Strategy<Value = ExpPoly> {
    prop::collection::vec(((-3i64..=0), 0usize..=2, arb_rat()), 0..=4).prop_map(|terms| {
        let mut p = ExpPoly::zero();
        for (lambda, degree, c) in terms {
            p = p.add(&ExpPoly::monomial(c, degree, rat(lambda, 1)));
        }
        p
    })
}

/// Random letters over two generators per family.
fn arb_letters() -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((prop::bool::ANY, 1u32..=2), 1..=6).prop_map(|items| {
        items
            .into_iter()
            .map(|(is_a, g)| Letter::single(if is_a { Family::A } else { Family::B }, g))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_poly_ring_axioms(p in arb_exp_poly(), q in arb_exp_poly(), r in arb_exp_poly()) {
        prop_assert_eq!(p.add(&q), q.add(&p));
        prop_assert_eq!(p.mul(&q), q.mul(&p));
        prop_assert_eq!(p.add(&q).add(&r), p.add(&q.add(&r)));
        prop_assert_eq!(p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
        prop_assert_eq!(p.mul(&q.add(&r)), p.mul(&q).add(&p.mul(&r)));
        prop_assert_eq!(p.sub(&p), ExpPoly::zero());
        prop_assert_eq!(p.mul(&ExpPoly::one()), p.clone());
    }

    #[test]
    fn integrate_then_differentiate_is_identity(p in arb_exp_poly(), c in arb_rat()) {
        let integral = p.integrate_from_zero(&c);
        prop_assert_eq!(integral.derivative(), p.clone());
        // value at t = 0 is the initial condition (evaluation is rounded
        // to the requested precision, so compare with a dyadic tolerance)
        let at_zero = integral
            .eval_rational(&Time::Finite(Rat::from_integer(0.into())), 64)
            .unwrap();
        let tol = BigRational::new(1.into(), num_bigint::BigInt::from(2).pow(50));
        prop_assert!((at_zero - &c).abs() < tol);
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in arb_exp_poly(), q in arb_exp_poly(), t in 0u32..=40) {
        let time = Time::Finite(rat(t as i64, 10));
        let vp = p.eval(&time).unwrap();
        let vq = q.eval(&time).unwrap();
        let sum = p.add(&q).eval(&time).unwrap();
        let prod = p.mul(&q).eval(&time).unwrap();
        let scale = 1.0 + vp.abs() + vq.abs();
        prop_assert!((sum - (vp + vq)).abs() < 1e-9 * scale);
        prop_assert!((prod - vp * vq).abs() < 1e-9 * scale * scale);
    }

    #[test]
    fn time_rescaling_composes(p in arb_exp_poly(), a in 1i64..=4, b in 1i64..=4) {
        let composed = p.scale_time(&rat(a, 1)).scale_time(&rat(b, 1));
        prop_assert_eq!(composed, p.scale_time(&rat(a * b, 1)));
    }

    #[test]
    fn conjugacy_classes_partition_the_symmetric_group(n in 1usize..=5) {
        let total: usize = IntegerPartition::enumerate(n)
            .iter()
            .map(|lambda| enumerate_by_cycle_type(lambda).len())
            .sum();
        prop_assert_eq!(total, all_permutations(n).len());
        prop_assert_eq!(total, (1..=n).product::<usize>());
        for lambda in IntegerPartition::enumerate(n) {
            for sigma in enumerate_by_cycle_type(&lambda) {
                prop_assert_eq!(sigma.cycle_type(), lambda.clone());
            }
        }
    }

    #[test]
    fn word_normal_form_is_rotation_invariant(letters in arb_letters(), shift in 0usize..6) {
        let w = Word::new(letters.clone());
        let k = shift % letters.len();
        let mut rotated = letters[k..].to_vec();
        rotated.extend_from_slice(&letters[..k]);
        prop_assert_eq!(Word::new(rotated), w);
    }

    #[test]
    fn moment_at_zero_is_the_independent_factorization(letters in arb_letters(),
                                                       values in prop::collection::vec(1i64..=5, 8)) {
        // assign phi(multiset) by a fixed table so both sides see one functional
        let assign = |family: Family, gens: &[u32]| -> Rat {
            let mut idx: usize = match family { Family::A => 0, Family::B => 1 };
            for g in gens {
                idx = (idx * 3 + *g as usize) % values.len();
            }
            rat(values[idx], 3)
        };
        let w = Word::new(letters.clone());
        let engine = MomentEngine::new();
        let moment = engine.mixed_moment(&w).substitute(assign);
        let at_zero = moment
            .eval_rational(&Time::Finite(Rat::from_integer(0.into())), 64)
            .unwrap();
        // classical independence: one factor per family over all generators
        let mut a_gens: Vec<u32> = Vec::new();
        let mut b_gens: Vec<u32> = Vec::new();
        for l in w.letters() {
            match l.family {
                Family::A => a_gens.extend_from_slice(l.gens()),
                Family::B => b_gens.extend_from_slice(l.gens()),
            }
        }
        a_gens.sort();
        b_gens.sort();
        let mut expected = Rat::from_integer(1.into());
        if !a_gens.is_empty() {
            expected *= assign(Family::A, &a_gens);
        }
        if !b_gens.is_empty() {
            expected *= assign(Family::B, &b_gens);
        }
        let tol = BigRational::new(1.into(), num_bigint::BigInt::from(2).pow(40));
        prop_assert!((at_zero - &expected).abs() < tol);
    }

    #[test]
    fn mixed_moment_is_symmetric_in_the_families(letters in arb_letters(),
                                                 values in prop::collection::vec(1i64..=5, 8)) {
        // swapping every letter's family and simultaneously swapping the
        // functional's families leaves the scalar moment unchanged
        let assign_for = |swap: bool| {
            let values = values.clone();
            move |family: Family, gens: &[u32]| -> Rat {
                let canonical = match (family, swap) {
                    (Family::A, false) | (Family::B, true) => 0usize,
                    _ => 1usize,
                };
                let mut idx = canonical;
                for g in gens {
                    idx = (idx * 3 + *g as usize) % values.len();
                }
                rat(values[idx], 3)
            }
        };
        let engine = MomentEngine::new();
        let w = Word::new(letters.clone());
        let swapped = Word::new(
            letters
                .iter()
                .map(|l| Letter::new(l.family.other(), l.gens().to_vec()))
                .collect(),
        );
        let direct = engine.mixed_moment(&w).substitute(assign_for(false));
        let mirrored = engine.mixed_moment(&swapped).substitute(assign_for(true));
        prop_assert_eq!(direct, mirrored);
    }
}
