//! Property tests for scalars, series and matrices.

use proptest::prelude::*;

use semilinear::matrix::{eigenvector_in_field, stable_decomposition, ConstantMatrix, SeriesMatrix};
use semilinear::scalar::{poly_eval, poly_roots_in_field, root_of_unity, FieldDescriptor, Scalar};
use semilinear::series::LaurentSeries;

fn fields() -> impl Strategy<Value = FieldDescriptor> {
    prop_oneof![
        Just(FieldDescriptor::rationals()),
        Just(FieldDescriptor::cyclotomic(4).unwrap()),
        Just(FieldDescriptor::cyclotomic(3).unwrap()),
    ]
}

fn scalar_in(field: FieldDescriptor) -> impl Strategy<Value = Scalar> {
    let deg = field.degree();
    prop::collection::vec((-6i64..=6, 1i64..=4), deg).prop_map(move |parts| {
        let z = Scalar::zeta(field);
        let mut acc = Scalar::zero(field);
        let mut power = Scalar::one(field);
        for (num, den) in parts {
            acc = &acc + &(&power * &Scalar::from_frac(field, num, den));
            power = &power * &z;
        }
        acc
    })
}

fn series_in(field: FieldDescriptor, prec: i64) -> impl Strategy<Value = LaurentSeries> {
    (-2i64..=2, prop::collection::vec(scalar_in(field), 1..6))
        .prop_map(move |(v, c)| LaurentSeries::new(field, v, c, prec.max(v + 1)))
}

fn unit_series(field: FieldDescriptor, prec: i64) -> impl Strategy<Value = LaurentSeries> {
    (series_in(field, prec), scalar_in(field)).prop_map(move |(s, c)| {
        let lead = if c.is_zero() { Scalar::one(field) } else { c };
        &LaurentSeries::monomial(lead, s.valuation_bound() - 1, prec) + &s
    })
}

fn int_matrix(n: usize, bound: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-bound..=bound, n * n)
}

fn const_matrix(n: usize, entries: &[i64]) -> ConstantMatrix {
    let q = FieldDescriptor::rationals();
    ConstantMatrix::from_fn(q, n, n, |i, j| Scalar::from_int(q, entries[i * n + j]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn field_axioms((a, b, c) in fields().prop_flat_map(|f| (scalar_in(f), scalar_in(f), scalar_in(f)))) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn roots_of_unity_have_exact_order(n in 1u32..=12) {
        let field = FieldDescriptor::cyclotomic(12).unwrap();
        if let Ok(z) = root_of_unity(field, n) {
            prop_assert!(z.pow(n as i64).unwrap().is_one());
            for d in 1..n {
                prop_assert!(!z.pow(d as i64).unwrap().is_one(), "order divides {}", d);
            }
        } else {
            prop_assert!(12 % n != 0);
        }
    }

    #[test]
    fn polynomial_roots_are_roots(
        roots in prop::collection::vec(-4i64..=4, 1..4),
        extra in prop::collection::vec(-3i64..=3, 0..3),
    ) {
        let q = FieldDescriptor::rationals();
        // prod (x - r) times a random factor.
        let mut poly = vec![Scalar::one(q)];
        let mut factors: Vec<Vec<Scalar>> = roots.iter().map(|&r| vec![Scalar::from_int(q, -r), Scalar::one(q)]).collect();
        let mut tail: Vec<Scalar> = extra.iter().map(|&c| Scalar::from_int(q, c)).collect();
        tail.push(Scalar::one(q));
        factors.push(tail);
        for f in &factors {
            let mut next = vec![Scalar::zero(q); poly.len() + f.len() - 1];
            for (i, a) in poly.iter().enumerate() {
                for (j, b) in f.iter().enumerate() {
                    next[i + j] = &next[i + j] + &(a * b);
                }
            }
            poly = next;
        }
        let found = poly_roots_in_field(&poly);
        let total: usize = found.iter().map(|(_, m)| m).sum();
        prop_assert!(total < poly.len());
        for (r, _) in &found {
            prop_assert!(poly_eval(&poly, r).is_zero());
        }
        for &r in &roots {
            prop_assert!(found.iter().any(|(x, _)| *x == Scalar::from_int(q, r)));
        }
    }

    #[test]
    fn series_ring_axioms((a, b, c) in fields().prop_flat_map(|f| (series_in(f, 16), series_in(f, 20), series_in(f, 24)))) {
        prop_assert!((&(&a * &b) * &c).agrees_with(&(&a * &(&b * &c))));
        prop_assert!((&a * &(&b + &c)).agrees_with(&(&(&a * &b) + &(&a * &c))));
        prop_assert!((&a + &b).agrees_with(&(&b + &a)));
        prop_assert!((&(&a - &a)).is_zero());
    }

    #[test]
    fn series_inverse(a in fields().prop_flat_map(|f| unit_series(f, 24))) {
        let inv = a.invert().unwrap();
        let one = LaurentSeries::one(a.field(), inv.prec().max(a.prec()));
        let prod = &a * &inv;
        prop_assert!(prod.agrees_with(&one));
        prop_assert!(prod.prec() >= 1);
    }

    #[test]
    fn substitution_composes(a in fields().prop_flat_map(|f| series_in(f, 20)), p in 1u64..5, q in 1u64..5) {
        prop_assert_eq!(a.substitute_power(p).substitute_power(q), a.substitute_power(p * q));
    }

    #[test]
    fn precision_is_monotone(
        coeffs in prop::collection::vec(-5i64..=5, 1..12),
        unit in prop::collection::vec(-5i64..=5, 1..12),
        extra in 1i64..16,
        p in 2u64..4,
    ) {
        let q = FieldDescriptor::rationals();
        let mut unit = unit;
        unit[0] = 1;
        let run = |prec: i64| {
            let a = LaurentSeries::from_ints(q, -1, &coeffs, prec);
            let u = LaurentSeries::from_ints(q, 0, &unit, prec);
            let x = &(&a * &u.invert().unwrap()) + &a.substitute_power(p);
            &x * &x
        };
        let small = run(12);
        let large = run(12 + extra);
        prop_assert!(large.prec() >= small.prec());
        prop_assert!(large.truncate(small.prec()).agrees_with(&small));
        prop_assert_eq!(large.truncate(small.prec()).first_mismatch(&small), None);
    }

    #[test]
    fn matrix_inverse(n in 1usize..=4, seed in prop::collection::vec(-3i64..=3, 48)) {
        let q = FieldDescriptor::rationals();
        let a = SeriesMatrix::from_fn(q, n, n, |i, j| {
            let k = 3 * (i * n + j);
            let mut c = vec![seed[k], seed[k + 1], seed[k + 2]];
            if i == j {
                c[0] += 7;
            }
            LaurentSeries::from_ints(q, if (i + j) % 3 == 2 { -1 } else { 0 }, &c, 20)
        });
        prop_assume!(!a.det().unwrap().is_zero());
        let inv = a.invert().unwrap();
        let id = SeriesMatrix::identity(q, n, 1 << 20);
        prop_assert!((&inv * &a).agrees_with(&id));
        prop_assert!((&a * &inv).agrees_with(&id));
    }

    #[test]
    fn stable_decomposition_shape(n in 1usize..=4, entries in int_matrix(4, 2), nil in 0usize..4) {
        let mut e = entries[..n * n].to_vec();
        // Force a nontrivial nilpotent part by zeroing a column block.
        for i in 0..n {
            for j in 0..nil.min(n) {
                e[i * n + j] = if i > j { e[i * n + j] } else { 0 };
            }
        }
        let c = const_matrix(n, &e);
        let sd = stable_decomposition(&c);
        let a = &sd.basis_change;
        let conj = &(&a.inverse().unwrap() * &c) * a;
        let m = sd.rank_stable;
        prop_assert!(conj.block(0, m, m, n).is_zero());
        prop_assert!(conj.block(m, n, 0, m).is_zero());
        prop_assert!(conj.block(m, n, m, n).pow(n as u32).is_zero());
        if m > 0 {
            prop_assert!(!conj.block(0, m, 0, m).det().is_zero());
        }
    }

    #[test]
    fn eigenvectors(n in 1usize..=4, entries in int_matrix(4, 3)) {
        let c = const_matrix(n, &entries[..n * n]);
        if let Some((lambda, v)) = eigenvector_in_field(&c) {
            let cv = c.mul_vec(&v);
            for (x, y) in cv.iter().zip(&v) {
                prop_assert_eq!(x, &(&lambda * y));
            }
            prop_assert!(v.iter().any(|x| !x.is_zero()));
        }
    }
}
