//! Property tests for cocycles and the local solver.

use proptest::prelude::*;

use semilinear::cocycle::{induce_constant, random_gauge, twist, verify_cocycle, GaugeTransform, Semigroup};
use semilinear::corpus::{corpus_case, random_constant_rep};
use semilinear::localsolve::{classify_degree_one, integ_limit, trivialize};
use semilinear::matrix::SeriesMatrix;
use semilinear::scalar::{FieldDescriptor, Scalar};
use semilinear::series::LaurentSeries;

fn q() -> FieldDescriptor {
    FieldDescriptor::rationals()
}

fn semigroups() -> impl Strategy<Value = Vec<u64>> {
    prop_oneof![Just(vec![2, 3]), Just(vec![2, 5]), Just(vec![3, 4]), Just(vec![2, 3, 5])]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn twisting_is_an_action(gens in semigroups(), n in 1usize..=2, seed in any::<u64>()) {
        let s = Semigroup::new(gens).unwrap();
        let c = induce_constant(&random_constant_rep(&s, n, q(), seed), 40);
        let g = random_gauge(n, q(), seed ^ 1, 2, 40);
        let h = random_gauge(n, q(), seed ^ 2, 2, 40);
        let twice = twist(&twist(&c, &g).unwrap(), &h).unwrap();
        let once = twist(&c, &g.then(&h)).unwrap();
        for (p, v) in twice.values() {
            prop_assert!(v.agrees_with(once.value(*p)), "value at {} differs", p);
        }
    }

    #[test]
    fn induced_constants_are_cocycles(gens in semigroups(), n in 1usize..=3, seed in any::<u64>()) {
        let s = Semigroup::new(gens).unwrap();
        prop_assert!(verify_cocycle(&induce_constant(&random_constant_rep(&s, n, q(), seed), 32)).ok);
    }

    #[test]
    fn verification_is_twist_invariant(gens in semigroups(), n in 1usize..=2, seed in any::<u64>(), bad in any::<bool>()) {
        let s = Semigroup::new(gens.clone()).unwrap();
        let mut c = induce_constant(&random_constant_rep(&s, n, q(), seed), 32);
        if bad {
            // Perturb one value so the cocycle condition fails at t^1.
            let p = gens[0];
            let mut values = c.values().clone();
            let bump = SeriesMatrix::identity(q(), n, 32).shift(1);
            values.insert(p, &values[&p] + &bump);
            c = semilinear::cocycle::SemigroupCocycle::new(s.clone(), values).unwrap();
        }
        let before = verify_cocycle(&c).ok;
        let g = random_gauge(n, q(), seed ^ 7, 2, 32);
        let after = verify_cocycle(&twist(&c, &g).unwrap()).ok;
        prop_assert_eq!(before, after);
    }

    #[test]
    fn extension_is_associative(gens in semigroups(), seed in any::<u64>(), i in 0usize..3, j in 0usize..3, k in 0usize..3) {
        let s = Semigroup::new(gens.clone()).unwrap();
        let case = corpus_case(&s, 2, seed, 2, 48).unwrap();
        let c = &case.cocycle;
        let pick = |x: usize| gens[x % gens.len()];
        let (p, qq, r) = (pick(i), pick(j), pick(k));
        let left = &c.value_at(p * qq).unwrap() * &c.value_at(r).unwrap().substitute_power(p * qq);
        let right = &c.value_at(p).unwrap() * &c.value_at(qq * r).unwrap().substitute_power(p);
        prop_assert!(left.agrees_with(&right));
        prop_assert!(left.agrees_with(&c.value_at(p * qq * r).unwrap()));
    }

    #[test]
    fn integ_identity(n in 1usize..=3, p in 2u64..=3, coeffs in prop::collection::vec(-3i64..=3, 27)) {
        let f = SeriesMatrix::from_fn(q(), n, n, |i, j| {
            let k = 3 * (i * n + j);
            let mut c = coeffs[k..k + 3].to_vec();
            if i == j {
                c[0] = 2 + (c[0].abs() % 2);
            } else if i > j {
                c[0] = 0;
            }
            LaurentSeries::from_ints(q(), 0, &c, 32)
        });
        let phi = integ_limit(&f, p, 32).unwrap().g;
        prop_assert!(phi.constant_term() == semilinear::matrix::ConstantMatrix::identity(q(), n));
        let lhs = &phi * &f;
        let rhs = &SeriesMatrix::from_constant(&f.constant_term(), 32) * &phi.substitute_power(p);
        prop_assert!(lhs.precision() >= 32);
        prop_assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn degree_one_class_is_twist_invariant(
        p in prop::sample::select(vec![2u64, 3, 5]),
        m in -4i64..=4,
        a in prop::sample::select(vec![1i64, -1, 2, 3]),
        u in prop::sample::select(vec![1i64, -1, 2, -3]),
        shift in -3i64..=3,
        tail in prop::collection::vec(-2i64..=2, 4),
    ) {
        let s = Semigroup::new(vec![p]).unwrap();
        let value = LaurentSeries::monomial(Scalar::from_int(q(), a), m, 40 + m);
        let c = semilinear::cocycle::SemigroupCocycle::new(
            s,
            [(p, SeriesMatrix::new(q(), 1, 1, vec![value]).unwrap())].into_iter().collect(),
        ).unwrap();
        let mut g = vec![u];
        g.extend(tail.iter().map(|x| x * u));
        let gauge = GaugeTransform::new(
            SeriesMatrix::new(q(), 1, 1, vec![LaurentSeries::from_ints(q(), shift, &g, 40 + shift)]).unwrap(),
        );
        let base = classify_degree_one(&c).unwrap().class;
        let twisted = classify_degree_one(&twist(&c, &gauge).unwrap()).unwrap().class;
        prop_assert_eq!(&base.slope, &twisted.slope);
        prop_assert_eq!(&base.character_values, &twisted.character_values);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn trivialize_round_trip(n in 1usize..=2, seed in any::<u64>()) {
        let s = Semigroup::new(vec![2, 3]).unwrap();
        let case = corpus_case(&s, n, seed, 2, 48).unwrap();
        let cert = trivialize(&case.cocycle, 48).unwrap();
        for p in [2, 3] {
            prop_assert_eq!(cert.constant.value(p).char_poly(), case.rep.value(p).char_poly());
        }
    }

    #[test]
    fn trivialize_is_idempotent(gens in semigroups(), n in 1usize..=3, seed in any::<u64>()) {
        let s = Semigroup::new(gens).unwrap();
        let r = random_constant_rep(&s, n, q(), seed);
        let cert = trivialize(&induce_constant(&r, 32), 32).unwrap();
        prop_assert_eq!(&cert.constant, &r);
    }
}
