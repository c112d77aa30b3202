//! Seeded test instances: constant representations twisted by random
//! Laurent-polynomial gauges, with exactly known values.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cocycle::{random_gauge, ConstantRepresentation, GaugeTransform, Semigroup, SemigroupCocycle};
use crate::error::{Error, Result};
use crate::matrix::{ConstantMatrix, SeriesMatrix};
use crate::scalar::{FieldDescriptor, Scalar};

/// Precision recorded on exact Laurent polynomials before truncation.
const EXACT: i64 = 1 << 30;

/// Version tag of the generator, embedded in corpus files.
pub const GENERATOR_VERSION: &str = "corpus-v1";

/// A twisted constant representation together with its ingredients.
#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub seed: u64,
    pub rep: ConstantRepresentation,
    pub gauge: GaugeTransform,
    pub cocycle: SemigroupCocycle,
}

fn small_int(rng: &mut ChaCha8Rng, bound: i64) -> i64 {
    rng.gen_range(-bound..=bound)
}

/// Commuting invertible matrices c0 + c1 X + c2 X^2 for one random X with
/// rational eigenvalues. X = P U P^-1 with U integral upper triangular and P
/// unimodular.
pub fn random_constant_rep(s: &Semigroup, n: usize, field: FieldDescriptor, seed: u64) -> ConstantRepresentation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = ConstantMatrix::from_fn(field, n, n, |i, j| {
        if i <= j {
            Scalar::from_int(field, small_int(&mut rng, 2))
        } else {
            Scalar::zero(field)
        }
    });
    let mut p = ConstantMatrix::identity(field, n);
    for _ in 0..2 * n {
        if n < 2 {
            break;
        }
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let mut el = ConstantMatrix::identity(field, n);
        el.set(i, j, Scalar::from_int(field, small_int(&mut rng, 1)));
        p = &p * &el;
    }
    let p_inv = p.inverse().expect("unimodular");
    let x = &(&p * &u) * &p_inv;
    let x2 = &x * &x;
    let id = ConstantMatrix::identity(field, n);
    let mut values = BTreeMap::new();
    for &q in s.generators() {
        loop {
            let c: Vec<Scalar> = (0..3).map(|_| Scalar::from_int(field, small_int(&mut rng, 2))).collect();
            let m = &(&id.scale(&c[0]) + &x.scale(&c[1])) + &x2.scale(&c[2]);
            if !m.det().is_zero() {
                values.insert(q, m);
                break;
            }
        }
    }
    ConstantRepresentation::new(s.clone(), values).expect("polynomials in one matrix commute")
}

fn exact(m: &SeriesMatrix, below: i64) -> SeriesMatrix {
    m.map(|x| x.truncate(below).with_prec(EXACT))
}

/// Exact values g^-1 r_q g(t^q) of the induced cocycle twisted by a
/// Laurent-polynomial gauge whose inverse is again a Laurent polynomial,
/// truncated to `prec`.
pub fn twisted_constant(r: &ConstantRepresentation, g: &GaugeTransform, prec: i64) -> Result<SemigroupCocycle> {
    let n = r.dim();
    let field = r.field();
    let span = g
        .g
        .entries()
        .iter()
        .filter_map(|x| x.max_exponent())
        .max()
        .unwrap_or(0)
        .max(0);
    let g_exact = exact(&g.g, span + 1);
    let bound = (n as i64 + 1) * (span + 2) + 2;
    let g_inv = exact(&g_exact.truncate(4 * bound).invert()?, bound);
    if !(&g_exact * &g_inv).agrees_with(&SeriesMatrix::identity(field, n, EXACT)) {
        return Err(Error::PreconditionViolated(
            "gauge inverse is not a Laurent polynomial".into(),
        ));
    }
    let mut values = BTreeMap::new();
    for (&q, m) in r.values() {
        let c = SeriesMatrix::from_constant(m, EXACT);
        let f = &(&g_inv * &c) * &g_exact.substitute_power(q);
        values.insert(q, f.truncate(prec));
    }
    SemigroupCocycle::new(r.semigroup().clone(), values)
}

/// Seed for case `index` of a corpus with master seed `seed`.
pub fn case_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index)
}

/// A twisted constant representation for the given semigroup and dimension.
pub fn corpus_case(s: &Semigroup, n: usize, seed: u64, complexity: usize, prec: i64) -> Result<CorpusCase> {
    let field = FieldDescriptor::rationals();
    let rep = random_constant_rep(s, n, field, seed);
    let gauge = random_gauge(n, field, seed ^ 0xa5a5, complexity, 16);
    let cocycle = twisted_constant(&rep, &gauge, prec)?;
    Ok(CorpusCase {
        seed,
        rep,
        gauge,
        cocycle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::verify_cocycle;

    #[test]
    fn corpus_values_are_cocycles() {
        let s = Semigroup::new(vec![2, 3]).unwrap();
        for seed in 0..4 {
            let case = corpus_case(&s, 2, seed, 3, 40).unwrap();
            let report = verify_cocycle(&case.cocycle);
            assert!(report.ok, "seed {seed}");
        }
    }

    #[test]
    fn reps_commute() {
        let s = Semigroup::new(vec![2, 21]).unwrap();
        let r = random_constant_rep(&s, 3, FieldDescriptor::rationals(), 7);
        assert!(r.value(2).commutes_with(r.value(21)));
    }

    #[test]
    fn deterministic() {
        let s = Semigroup::new(vec![2, 3]).unwrap();
        let a = corpus_case(&s, 2, 11, 3, 30).unwrap();
        let b = corpus_case(&s, 2, 11, 3, 30).unwrap();
        assert_eq!(a.cocycle.to_json(), b.cocycle.to_json());
    }
}
