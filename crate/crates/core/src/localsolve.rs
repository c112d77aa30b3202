//! Reduction of cocycles over k((t)) to constant representations.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cocycle::{
    twist, twist_to, twist_value, verify_certificate, ConstantRepresentation, GaugeTransform, SemigroupCocycle, TrivializationCertificate,
};
use crate::error::{Error, Result};
use crate::matrix::{eigenvector_in_field, stable_decomposition, ConstantMatrix, SeriesMatrix};
use crate::scalar::{poly_to_string, FieldDescriptor, Scalar};
use crate::series::LaurentSeries;

/// Trials used by [`trivialize`] when searching for a cyclic vector.
pub const DEFAULT_TRIALS: usize = 16;

const CYCLIC_SEED: u64 = 0x5eed_c7c1;

fn check_integral(f: &SeriesMatrix) -> Result<()> {
    match f.min_valuation() {
        Some(v) if v < 0 => Err(Error::NotIntegral { valuation: v }),
        _ => Ok(()),
    }
}

fn constant_series(c: &ConstantMatrix, prec: i64) -> SeriesMatrix {
    SeriesMatrix::from_constant(c, prec)
}

/// Returns (Phi, Phi^{-1}) with Phi f Phi(t^p)^{-1} = f(0) mod t^target.
///
/// Phi is the unique solution in 1 + t gl_N k[[t]] of Phi f = f(0) Phi(t^p),
/// solved coefficient by coefficient; Psi = Phi^{-1} solves
/// Psi = f Psi(t^p) f(0)^{-1}.
fn integ_parts(f: &SeriesMatrix, p: u64, target: i64) -> Result<(SeriesMatrix, SeriesMatrix)> {
    check_integral(f)?;
    let field = f.field();
    let n = f.dim();
    let f0 = f.constant_term();
    let f0_inv = f0.inverse().map_err(|_| Error::SingularAtZero)?;
    let prec = f.precision().min(target.max(1));
    let len = prec.max(0) as usize;
    let p = p as usize;
    let coeff = |k: usize| ConstantMatrix::from_fn(field, n, n, |i, j| f.get(i, j).coeff_or_zero(k as i64));
    let fk: Vec<ConstantMatrix> = (0..len).map(coeff).collect();
    let nonzero: Vec<usize> = (1..len).filter(|&k| !fk[k].is_zero()).collect();
    let zero = ConstantMatrix::zero(field, n, n);
    let mut phi: Vec<ConstantMatrix> = Vec::with_capacity(len);
    let mut psi: Vec<ConstantMatrix> = Vec::with_capacity(len);
    for k in 0..len {
        if k == 0 {
            phi.push(ConstantMatrix::identity(field, n));
            psi.push(ConstantMatrix::identity(field, n));
            continue;
        }
        let mut a = if k % p == 0 { &f0 * &phi[k / p] } else { zero.clone() };
        for &j in nonzero.iter().take_while(|&&j| j <= k) {
            a = &a - &(&phi[k - j] * &fk[j]);
        }
        phi.push(&a * &f0_inv);
        let mut b = zero.clone();
        for i in (0..=k / p).filter(|&i| !fk[k - p * i].is_zero()) {
            b = &b + &(&fk[k - p * i] * &psi[i]);
        }
        psi.push(&b * &f0_inv);
    }
    let assemble = |c: &[ConstantMatrix]| {
        SeriesMatrix::from_fn(field, n, n, |i, j| {
            LaurentSeries::new(field, 0, c.iter().map(|m| m.get(i, j).clone()).collect(), prec)
        })
    };
    Ok((assemble(&phi), assemble(&psi)))
}

/// Phi in 1 + t gl_N k[[t]] with Phi(t) f(t) Phi(t^p)^{-1} = f(0) modulo
/// t^target. It is the limit of f(0)^s (f(t) f(t^p) ... f(t^(p^(s-1))))^{-1}.
///
/// Twisting by the inverse of Phi makes f constant.
pub fn integ_limit(f: &SeriesMatrix, p: u64, target: i64) -> Result<GaugeTransform> {
    Ok(GaugeTransform::new(integ_parts(f, p, target)?.0))
}

/// One step of the fixed-point iteration in [`block_triangularize`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContractionStep {
    pub iteration: usize,
    /// C_j and C_(j-1) must agree below t^modulus.
    pub modulus: i64,
    /// First exponent where they differ (beyond the modulus), if any was
    /// visible within precision.
    #[serde(rename = "firstDifference")]
    pub first_difference: Option<i64>,
}

/// Output of [`block_triangularize`]: g^{-1} f g(t^l) = [[e, f], [0, h]].
#[derive(Clone, Debug)]
pub struct BlockForm {
    pub gauge: GaugeTransform,
    pub e: ConstantMatrix,
    pub f: SeriesMatrix,
    pub h: SeriesMatrix,
    pub split_dim: usize,
    pub contraction: Vec<ContractionStep>,
}

impl BlockForm {
    pub fn assembled(&self) -> SeriesMatrix {
        let prec = self.f.max_precision().max(self.h.max_precision());
        let field = self.h.field();
        let m = self.split_dim;
        let n = m + self.h.rows();
        SeriesMatrix::from_blocks(
            &constant_series(&self.e, prec),
            &self.f,
            &SeriesMatrix::zero(field, n - m, m, prec),
            &self.h,
        )
    }
}

fn mismatch_min(a: &SeriesMatrix, b: &SeriesMatrix) -> Option<i64> {
    a.first_mismatch(b).map(|(_, _, e)| e)
}

/// Splits f into an invertible constant block and a block nilpotent modulo
/// t, using the Fitting decomposition of f(0) and the contraction
/// C -> (G + H C(t^l)) (E + F C(t^l))^{-1}.
pub fn block_triangularize(f: &SeriesMatrix, l: u64, target: i64) -> Result<BlockForm> {
    check_integral(f)?;
    let field = f.field();
    let n = f.dim();
    let f = f.truncate(target.max(1));
    let prec = f.precision();
    let sd = stable_decomposition(&f.constant_term());
    let a = sd.basis_change;
    let a_inv = a.inverse()?;
    let f1 = &(&constant_series(&a_inv, prec) * &f) * &constant_series(&a, prec);
    let m = sd.rank_stable;
    let a_s = constant_series(&a, prec);
    if m == 0 {
        return Ok(BlockForm {
            gauge: GaugeTransform::new(a_s),
            e: ConstantMatrix::zero(field, 0, 0),
            f: SeriesMatrix::zero(field, 0, n, prec),
            h: f1,
            split_dim: 0,
            contraction: Vec::new(),
        });
    }
    if m == n {
        let (_, phi_inv) = integ_parts(&f1, l, target)?;
        return Ok(BlockForm {
            gauge: GaugeTransform::new(&a_s * &phi_inv),
            e: f1.constant_term(),
            f: SeriesMatrix::zero(field, n, 0, prec),
            h: SeriesMatrix::zero(field, 0, 0, prec),
            split_dim: n,
            contraction: Vec::new(),
        });
    }
    let e = f1.block(0, m, 0, m);
    let fb = f1.block(0, m, m, n);
    let g = f1.block(m, n, 0, m);
    let h = f1.block(m, n, m, n);

    let mut c = &g * &e.invert()?;
    let mut contraction = Vec::new();
    let mut modulus: i64 = 1;
    let mut j = 0;
    while modulus < target {
        j += 1;
        modulus = modulus.saturating_mul(l as i64);
        let cs = c.substitute_power(l);
        let next = &(&g + &(&h * &cs)) * &(&e + &(&fb * &cs)).invert()?;
        let diff = mismatch_min(&next, &c);
        if let Some(d) = diff {
            if d < modulus {
                return Err(Error::ContractionViolated {
                    iteration: j,
                    exponent: d,
                    modulus,
                });
            }
        }
        contraction.push(ContractionStep {
            iteration: j,
            modulus,
            first_difference: diff,
        });
        c = next;
    }
    let cs = c.substitute_power(l);
    let e1 = &e + &(&fb * &cs);
    let h1 = &h - &(&c * &fb);
    let (phi, phi_inv) = integ_parts(&e1, l, target)?;
    let e_const = e1.constant_term();
    let f_final = &phi * &fb;

    let big = prec + 1;
    let lower = SeriesMatrix::from_blocks(
        &SeriesMatrix::identity(field, m, big),
        &SeriesMatrix::zero(field, m, n - m, big),
        &c,
        &SeriesMatrix::identity(field, n - m, big),
    );
    let diag = SeriesMatrix::from_blocks(
        &phi_inv,
        &SeriesMatrix::zero(field, m, n - m, big),
        &SeriesMatrix::zero(field, n - m, m, big),
        &SeriesMatrix::identity(field, n - m, big),
    );
    Ok(BlockForm {
        gauge: GaugeTransform::new(&(&a_s * &lower) * &diag),
        e: e_const,
        f: f_final,
        h: h1,
        split_dim: m,
        contraction,
    })
}

/// Class of a rank-one cocycle: a character of S and a slope residue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeOneClass {
    pub character_values: BTreeMap<u64, Scalar>,
    /// Residue of m_p/(p-1) in [0, 1); its denominator divides d(S).
    pub slope: BigRational,
}

impl DegreeOneClass {
    /// Order of the slope residue in Q/Z.
    pub fn order(&self) -> BigInt {
        self.slope.denom().clone()
    }

    pub fn is_trivial_slope(&self) -> bool {
        self.slope.is_zero()
    }
}

impl Serialize for DegreeOneClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_json::json!({
            "characterValues": self
                .character_values
                .iter()
                .map(|(p, a)| (p.to_string(), a))
                .collect::<BTreeMap<_, _>>(),
            "slope": self.slope.to_string(),
            "order": self.order().to_string(),
        })
        .serialize(s)
    }
}

/// Result of [`classify_degree_one`]: `reduced` = twist(c, gauge) has values
/// a_p t^((p-1) slope).
#[derive(Clone, Debug)]
pub struct DegreeOneReduction {
    pub class: DegreeOneClass,
    pub gauge: GaugeTransform,
    pub reduced: SemigroupCocycle,
}

fn scalar_matrix(s: LaurentSeries) -> SeriesMatrix {
    SeriesMatrix::new(s.field(), 1, 1, vec![s]).expect("1x1")
}

/// Gauge in 1 + t k[[t]] (times a t-power) that brings a rank-one cocycle to
/// monomial values a_p t^(m_p).
fn monomialize_rank_one(c: &SemigroupCocycle, target: i64) -> Result<GaugeTransform> {
    let p0 = c.semigroup().generators()[0];
    let f = c.value(p0).get(0, 0);
    let m = f.valuation()?;
    let u = scalar_matrix(f.shift(-m));
    let (_, phi_inv) = integ_parts(&u, p0, target)?;
    Ok(GaugeTransform::new(phi_inv))
}

/// Rank-one classification: f_p = a_p t^(m_p) phi_p with phi_p in
/// 1 + t k[[t]]. The gauge kills phi and the integral part of the slope.
pub fn classify_degree_one(c: &SemigroupCocycle) -> Result<DegreeOneReduction> {
    if c.dim() != 1 {
        return Err(Error::DimMismatch("degree-one classification needs dim 1".into()));
    }
    let field = c.field();
    let target = c.precision().max(1);
    let g1 = monomialize_rank_one(c, target)?;
    let c1 = twist(c, &g1)?;
    let mut slope: Option<BigRational> = None;
    let mut chars = BTreeMap::new();
    for (&p, f) in c1.values() {
        let f = f.get(0, 0);
        let m = f.valuation()?;
        let a = f.leading_coeff()?.clone();
        if !f.shift(-m).is_constant() {
            return Err(Error::NotACocycle(format!(
                "value at {p} is not a monomial after reducing the first generator"
            )));
        }
        let s = BigRational::new(BigInt::from(m), BigInt::from(p - 1));
        match &slope {
            None => slope = Some(s),
            Some(s0) if *s0 != s => {
                return Err(Error::NotACocycle(format!("slopes {s0} and {s} disagree")));
            }
            _ => {}
        }
        chars.insert(p, a);
    }
    let slope = slope.expect("nonempty semigroup");
    let floor = slope.floor();
    let residue = &slope - &floor;
    let k = -floor.to_integer().to_i64().ok_or_else(|| Error::PreconditionViolated("slope overflow".into()))?;
    let prec = g1.g.precision();
    let tk = GaugeTransform::new(scalar_matrix(LaurentSeries::monomial(Scalar::one(field), k, prec + k)));
    let gauge = g1.then(&tk);
    let reduced = twist(c, &gauge)?;
    Ok(DegreeOneReduction {
        class: DegreeOneClass {
            character_values: chars,
            slope: residue,
        },
        gauge,
        reduced,
    })
}

/// Last column h_0..h_(N-1) of the companion matrix of sigma_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompanionData {
    pub h: Vec<LaurentSeries>,
    pub p: u64,
}

impl CompanionData {
    pub fn companion_matrix(&self) -> SeriesMatrix {
        let n = self.h.len();
        let field = self.h[0].field();
        let prec = self.h.iter().map(LaurentSeries::prec).max().unwrap_or(0);
        SeriesMatrix::from_fn(field, n, n, |i, j| {
            if j == n - 1 {
                self.h[i].clone()
            } else if i == j + 1 {
                LaurentSeries::one(field, prec)
            } else {
                LaurentSeries::zero(field, prec)
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct CyclicVector {
    pub v: SeriesMatrix,
    pub basis_change: GaugeTransform,
    pub companion: CompanionData,
    /// Index of the successful candidate (0 = e1, 1 = all ones).
    pub trial: usize,
}

/// sigma_p applied to a column vector: f_p(t) x(t^p).
fn sigma(f: &SeriesMatrix, p: u64, x: &SeriesMatrix) -> SeriesMatrix {
    f * &x.substitute_power(p)
}

fn candidate(field: FieldDescriptor, n: usize, trial: usize, rng: &mut ChaCha8Rng, prec: i64) -> SeriesMatrix {
    SeriesMatrix::from_fn(field, n, 1, |i, _| match trial {
        0 => {
            if i == 0 {
                LaurentSeries::one(field, prec)
            } else {
                LaurentSeries::zero(field, prec)
            }
        }
        1 => LaurentSeries::one(field, prec),
        _ => {
            let coeffs: Vec<Scalar> = (0..5).map(|_| Scalar::from_int(field, rng.gen_range(-2..=2))).collect();
            LaurentSeries::new(field, -2, coeffs, prec)
        }
    })
}

/// Searches v with v, sigma v, ..., sigma^(N-1) v a basis, where sigma acts
/// by c(t) -> f_p(t) c(t^p). Candidates: e1, the all-ones vector, then
/// seeded random Laurent polynomials with exponents in [-2, 2].
pub fn cyclic_vector(c: &SemigroupCocycle, p: u64, max_trials: usize) -> Result<CyclicVector> {
    let f = c.value(p);
    let n = c.dim();
    let field = c.field();
    let prec = f.max_precision().max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(CYCLIC_SEED ^ p);
    for trial in 0..max_trials {
        let v = candidate(field, n, trial, &mut rng, prec);
        let mut cols = vec![v.clone()];
        for _ in 1..=n {
            let next = sigma(f, p, cols.last().expect("nonempty"));
            cols.push(next);
        }
        let last = cols.pop().expect("n+1 columns");
        let basis = SeriesMatrix::from_columns(&cols);
        match basis.det() {
            Ok(d) if !d.is_zero() => {}
            _ => continue,
        }
        let h = match basis.solve(&last) {
            Ok(h) => h,
            Err(_) => continue,
        };
        return Ok(CyclicVector {
            v,
            basis_change: GaugeTransform::new(basis),
            companion: CompanionData {
                h: (0..n).map(|i| h.get(i, 0).clone()).collect(),
                p,
            },
            trial,
        });
    }
    Err(Error::CyclicSearchFailed { trials: max_trials })
}

/// Bookkeeping of [`rescale_companion`]: the new cyclic vector is
/// t^shift * sigma_substitution(v).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rescaling {
    pub data: CompanionData,
    pub alpha: BigRational,
    pub substitution: u64,
    pub shift: i64,
}

/// h'_j = t^((p^N - p^j) e) h_j(t^m) with m = p^(N-1) l and e = m alpha,
/// alpha = max_j v(h_j)/(p^j - p^N) over nonzero h_j.
pub fn rescale_companion(cd: &CompanionData, l: u64) -> Result<Rescaling> {
    let n = cd.h.len() as u32;
    let p = cd.p as i64;
    let pn = p.pow(n);
    let mut alpha: Option<BigRational> = None;
    for (j, h) in cd.h.iter().enumerate() {
        let Ok(v) = h.valuation() else { continue };
        let a = BigRational::new(BigInt::from(v), BigInt::from(p.pow(j as u32) - pn));
        if alpha.as_ref().is_none_or(|x| a > *x) {
            alpha = Some(a);
        }
    }
    let alpha = alpha.ok_or_else(|| Error::PreconditionViolated("companion column vanishes".into()))?;
    let m = (cd.p.pow(n - 1)) * l;
    let e = &alpha * BigRational::from_integer(BigInt::from(m));
    if !e.is_integer() {
        return Err(Error::DivisibilityViolated(format!(
            "shift {e} = {m} * {alpha} is not an integer"
        )));
    }
    let e = e.to_integer().to_i64().ok_or_else(|| Error::DivisibilityViolated("shift overflow".into()))?;
    let h = cd
        .h
        .iter()
        .enumerate()
        .map(|(j, h)| h.substitute_power(m).shift((pn - p.pow(j as u32)) * e))
        .collect();
    Ok(Rescaling {
        data: CompanionData { h, p: cd.p },
        alpha,
        substitution: m,
        shift: e,
    })
}

fn ceil_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

/// Vectors x with f(t) x(t^p) = lambda x, as a k-basis truncated at a common
/// precision. Solutions are determined by their coefficients in a window
/// [a, b]; higher coefficients follow from the equation.
struct EigenSpace {
    a: i64,
    b: i64,
    seeds: ConstantMatrix,
    vectors: Vec<SeriesMatrix>,
}

fn sigma_eigenspace(f: &SeriesMatrix, p: u64, lambda: &Scalar, cap: i64) -> Result<EigenSpace> {
    let n = f.dim();
    let field = f.field();
    let pp = p as i64;
    let v_f = f.min_valuation().ok_or(Error::SingularWithinPrecision)?;
    let v_i = f.invert()?.min_valuation().ok_or(Error::SingularWithinPrecision)?;
    let a = ceil_div(v_i, pp - 1);
    let b = a.max(ceil_div(-v_f, pp - 1));
    let prec = f.precision();
    let k = (prec + pp * a).min(cap.max(b + 1));
    if k <= b || prec + pp * a <= b {
        return Err(Error::PrecisionExhausted(format!(
            "eigenvector window [{a}, {b}] exceeds available precision {k}"
        )));
    }
    let lo = (pp * a + v_f).min(a);
    let width = (b - a + 1) as usize;
    let rows = (b - lo + 1) as usize * n;
    let system = ConstantMatrix::from_fn(field, rows, width * n, |r, col| {
        let (e, i) = (lo + (r / n) as i64, r % n);
        let (jj, j) = (a + (col / n) as i64, col % n);
        let mut x = f.get(i, j).coeff_or_zero(e - pp * jj);
        if i == j && e == jj {
            x = &x - lambda;
        }
        x
    });
    let kernel = system.kernel();
    let lambda_inv = lambda.inv()?;
    let mut vectors = Vec::new();
    for seed in &kernel {
        let mut x: Vec<Vec<Scalar>> = (0..n).map(|_| vec![Scalar::zero(field); (k - a) as usize]).collect();
        for (idx, s) in seed.iter().enumerate() {
            x[idx % n][idx / n] = s.clone();
        }
        for e in b + 1..k {
            let top = (e - v_f).div_euclid(pp);
            for i in 0..n {
                let mut acc = Scalar::zero(field);
                for jj in a..=top {
                    for (j, xj) in x.iter().enumerate() {
                        let xc = &xj[(jj - a) as usize];
                        if xc.is_zero() {
                            continue;
                        }
                        let fc = f.get(i, j).coeff_or_zero(e - pp * jj);
                        if !fc.is_zero() {
                            acc = &acc + &(&fc * xc);
                        }
                    }
                }
                x[i][(e - a) as usize] = &acc * &lambda_inv;
            }
        }
        vectors.push(SeriesMatrix::from_fn(field, n, 1, |i, _| {
            LaurentSeries::new(field, a, x[i].clone(), k)
        }));
    }
    let seeds = ConstantMatrix::from_columns(field, width * n, &kernel);
    Ok(EigenSpace { a, b, seeds, vectors })
}

/// Window coefficients of f_q(t) x(t^q), computed directly.
fn sigma_window(fq: &SeriesMatrix, q: u64, x: &SeriesMatrix, a: i64, b: i64) -> Result<Vec<Scalar>> {
    let n = fq.dim();
    let field = fq.field();
    let qq = q as i64;
    let v_f = fq.min_valuation().ok_or(Error::SingularWithinPrecision)?;
    let xa = (0..n).map(|i| x.get(i, 0).valuation_bound()).min().unwrap_or(a);
    let xk = x.precision();
    let mut out = Vec::new();
    for e in a..=b {
        let top = (e - v_f).div_euclid(qq);
        if top >= xk {
            return Err(Error::PrecisionExhausted("eigenvector too short for sigma_q".into()));
        }
        for i in 0..n {
            let mut acc = Scalar::zero(field);
            for jj in xa..=top {
                for j in 0..n {
                    let xc = x.get(j, 0).coeff_or_zero(jj);
                    if xc.is_zero() {
                        continue;
                    }
                    let fc = fq.get(i, j).coeff(e - qq * jj).ok_or_else(|| {
                        Error::PrecisionExhausted(format!("value at {q} is too short for its eigenvector action"))
                    })?;
                    if !fc.is_zero() {
                        acc = &acc + &(&fc * &xc);
                    }
                }
            }
            out.push(acc);
        }
    }
    Ok(out)
}

fn field_extension_error(m: &ConstantMatrix) -> Error {
    Error::FieldExtensionRequired {
        field: m.field(),
        polynomial: poly_to_string(&m.char_poly()),
    }
}

/// A vector fixed (up to scalars) by all the given commuting matrices.
fn common_eigenvector(ms: &[ConstantMatrix]) -> Result<Vec<Scalar>> {
    let r = ms[0].rows();
    let field = ms[0].field();
    let mut basis = ConstantMatrix::identity(field, r);
    for m in ms {
        let s = basis.cols();
        let image = m * &basis;
        let cols: Vec<Vec<Scalar>> = (0..s)
            .map(|j| {
                basis
                    .solve_vec(&image.column(j))
                    .ok_or_else(|| Error::NotACocycle("sigma actions do not commute".into()))
            })
            .collect::<Result<_>>()?;
        let restricted = ConstantMatrix::from_columns(field, s, &cols);
        let (mu, _) = eigenvector_in_field(&restricted).ok_or_else(|| field_extension_error(&restricted))?;
        let shifted = &restricted - &ConstantMatrix::identity(field, s).scale(&mu);
        let kernel = shifted.kernel();
        let sub = ConstantMatrix::from_columns(field, s, &kernel);
        basis = &basis * &sub;
    }
    Ok(basis.column(0))
}

/// Eigenvalue of sigma_p read off the constant block after cyclic vector,
/// rescaling and block triangularization.
fn sigma_eigenvalue(c: &SemigroupCocycle, p: u64, l: u64, target: i64, trials: usize) -> Result<Scalar> {
    let cv = cyclic_vector(c, p, trials)?;
    let rs = rescale_companion(&cv.companion, l)?;
    let k = rs.data.companion_matrix().truncate(target.clamp(1, 16));
    let bf = block_triangularize(&k, p, target.clamp(1, 16))?;
    if bf.split_dim == 0 {
        return Err(Error::PrecisionExhausted("rescaled companion is nilpotent at 0".into()));
    }
    eigenvector_in_field(&bf.e)
        .map(|(l, _)| l)
        .ok_or_else(|| field_extension_error(&bf.e))
}

/// Restriction of a cocycle to the lower-right block starting at r0.
fn sub_cocycle(c: &SemigroupCocycle, r0: usize) -> Result<SemigroupCocycle> {
    let n = c.dim();
    let values = c.values().iter().map(|(&p, f)| (p, f.block(r0, n, r0, n))).collect();
    SemigroupCocycle::new(c.semigroup().clone(), values)
}

fn truncated(c: &SemigroupCocycle, prec: i64) -> Result<SemigroupCocycle> {
    let values = c.values().iter().map(|(&p, f)| (p, f.truncate(prec))).collect();
    SemigroupCocycle::new(c.semigroup().clone(), values)
}

/// Identity on the first k coordinates, g on the rest.
fn embed_lower(g: &SeriesMatrix, n: usize) -> SeriesMatrix {
    let field = g.field();
    let k = n - g.rows();
    let prec = g.max_precision();
    SeriesMatrix::from_fn(field, n, n, |i, j| {
        if i >= k && j >= k {
            g.get(i - k, j - k).clone()
        } else if i == j {
            LaurentSeries::one(field, prec)
        } else {
            LaurentSeries::zero(field, prec)
        }
    })
}

/// Basis of k((t))^n whose first vector is a common eigenline of all
/// sigma_q on ker(sigma_p - lambda); the line is scaled to valuation 0 so the
/// basis change lies in GL_n k[[t]].
fn eigenline_basis(c: &SemigroupCocycle, target: i64, cap: i64, trials: usize) -> Result<SeriesMatrix> {
    let n = c.dim();
    let field = c.field();
    let (p, l) = choose_generators(c.semigroup(), n)?;
    let lambda = sigma_eigenvalue(&truncated(c, target)?, p, l, target, trials)?;
    let space = sigma_eigenspace(c.value(p), p, &lambda, cap)?;
    if space.vectors.is_empty() {
        return Err(Error::PrecisionExhausted(format!(
            "no eigenvector for eigenvalue {lambda} found within precision"
        )));
    }
    let mut reps = Vec::new();
    for &q in c.semigroup().generators() {
        let cols = space
            .vectors
            .iter()
            .map(|x| {
                let y = sigma_window(c.value(q), q, x, space.a, space.b)?;
                space
                    .seeds
                    .solve_vec(&y)
                    .ok_or_else(|| Error::NotACocycle(format!("sigma_{q} does not preserve the eigenspace")))
            })
            .collect::<Result<Vec<_>>>()?;
        reps.push(ConstantMatrix::from_columns(field, space.vectors.len(), &cols));
    }
    let u = common_eigenvector(&reps)?;
    let mut w = SeriesMatrix::zero(field, n, 1, space.vectors[0].precision());
    for (coef, x) in u.iter().zip(&space.vectors) {
        w = &w + &x.scale(coef);
    }
    let (v0, i0) = (0..n)
        .filter_map(|i| w.get(i, 0).valuation().ok().map(|v| (v, i)))
        .min()
        .ok_or_else(|| Error::PrecisionExhausted("common eigenvector vanishes".into()))?;
    let w = w.shift(-v0);
    let prec = w.precision();
    let mut cols = vec![w];
    for j in (0..n).filter(|&j| j != i0) {
        cols.push(SeriesMatrix::from_fn(field, n, 1, |i, _| {
            if i == j {
                LaurentSeries::one(field, prec)
            } else {
                LaurentSeries::zero(field, prec)
            }
        }));
    }
    Ok(SeriesMatrix::from_columns(&cols))
}

/// Eigenvector window width of sigma_p, used to size the working precision.
fn window_width(c: &SemigroupCocycle, p: u64, target: i64) -> Result<i64> {
    let f = &c.value(p).truncate(target.max(1));
    let pp = p as i64;
    let v_f = f.min_valuation().ok_or(Error::SingularWithinPrecision)?;
    let v_i = f.invert()?.min_valuation().ok_or(Error::SingularWithinPrecision)?;
    let a = ceil_div(v_i, pp - 1);
    Ok(a.max(ceil_div(-v_f, pp - 1)) - a + 1)
}

/// Gauge making c upper triangular with monomial diagonal entries. Each
/// level re-twists the input by the accumulated gauge, so large generators
/// lose precision only once.
fn triangularize(c: &SemigroupCocycle, target: i64, cap: i64, trials: usize) -> Result<SeriesMatrix> {
    let n = c.dim();
    let mut total: Option<SeriesMatrix> = None;
    for k in 0..n {
        let level = match &total {
            None => truncated(c, cap)?,
            Some(g) => {
                let tw = twist(c, &GaugeTransform::new(g.clone()))?;
                for (&q, f) in tw.values() {
                    for i in k..n {
                        for j in 0..k {
                            if !f.get(i, j).is_zero() {
                                return Err(Error::NotACocycle(format!(
                                    "flag is not stable under sigma_{q}: entry ({i}, {j}) = {}",
                                    f.get(i, j)
                                )));
                            }
                        }
                    }
                }
                sub_cocycle(&tw, k)?
            }
        };
        let step = if k == n - 1 {
            monomialize_rank_one(&level, cap)?.g
        } else {
            eigenline_basis(&level, target, cap, trials)?
        };
        let step = embed_lower(&step, n);
        total = Some(match total {
            None => step,
            Some(g) => &g * &step,
        });
    }
    total.ok_or_else(|| Error::DimMismatch("empty cocycle".into()))
}

/// Generators p <= l with lcm(p-1, p^2-1, ..., p^N-1) dividing l.
pub fn choose_generators(s: &crate::cocycle::Semigroup, n: usize) -> Result<(u64, u64)> {
    for &p in s.generators() {
        let mut lcm: u128 = 1;
        let mut pw: u128 = 1;
        let mut overflow = false;
        for _ in 0..n {
            match pw.checked_mul(p as u128) {
                Some(x) => pw = x,
                None => {
                    overflow = true;
                    break;
                }
            }
            lcm = lcm.lcm(&(pw - 1));
        }
        if overflow {
            continue;
        }
        if let Some(&l) = s.generators().iter().find(|&&l| l >= p && (l as u128) % lcm == 0) {
            return Ok((p, l));
        }
    }
    Err(Error::PreconditionViolated(format!(
        "no generators p <= l with lcm(p-1, ..., p^{n}-1) dividing l"
    )))
}

/// Single value of twist(c, g) at p.
fn twist_one(f: &SeriesMatrix, p: u64, g: &SeriesMatrix) -> Result<SeriesMatrix> {
    twist_value(f, p, g, &g.invert()?, None)
}

/// Diagonal t-powers turning monomial diagonal entries of f_p into constants.
fn diagonal_gauge(f: &SeriesMatrix, p: u64) -> Result<SeriesMatrix> {
    let field = f.field();
    let prec = f.max_precision();
    let mut entries = Vec::with_capacity(f.dim());
    for i in 0..f.dim() {
        let m = f.get(i, i).valuation()?;
        if m % (p as i64 - 1) != 0 {
            return Err(Error::NotExtendable(format!(
                "diagonal slope {m}/{} is not an integer",
                p - 1
            )));
        }
        let a = -m / (p as i64 - 1);
        entries.push(LaurentSeries::monomial(Scalar::one(field), a, prec + a));
    }
    Ok(SeriesMatrix::diagonal(entries))
}

/// Smallest generator having a coprime partner.
fn coprime_base(c: &SemigroupCocycle) -> Result<u64> {
    let gens = c.semigroup().generators();
    gens.iter()
        .copied()
        .find(|&l| gens.iter().any(|&q| q != l && l.gcd(&q) == 1))
        .ok_or(Error::MissingCoprimePair)
}

/// Column-by-column reduction of an upper triangular cocycle with constant
/// diagonal. Returns the gauge.
fn diag_to_constant_gauge(fl0: &SeriesMatrix, l: u64, target: i64) -> Result<SeriesMatrix> {
    let n = fl0.dim();
    let field = fl0.field();
    let mut fl_cur = fl0.clone();
    let mut total = SeriesMatrix::identity(field, n, fl0.max_precision().max(target) + 1);
    for k in 1..n {
        let fl = &fl_cur;
        let a = fl.block(0, k, 0, k).constant_term();
        let d = fl.get(k, k).constant_term();
        let d_inv = d.inv()?;
        let c_l = a.scale(&d_inv);
        let c_inv = c_l.inverse()?;
        let mut phi: Vec<LaurentSeries> = (0..k).map(|i| fl.get(i, k).scale(&d_inv)).collect();
        let prec = phi.iter().map(LaurentSeries::prec).min().unwrap_or(target);
        let mut b: Vec<LaurentSeries> = vec![LaurentSeries::zero(field, prec); k];
        let vmin = phi.iter().filter_map(|x| x.valuation().ok()).min().unwrap_or(0);
        let ll = l as i64;
        for e in vmin..0 {
            if e % ll != 0 {
                continue;
            }
            let h: Vec<Scalar> = phi.iter().map(|x| x.coeff_or_zero(e)).collect();
            if h.iter().all(Scalar::is_zero) {
                continue;
            }
            let ch = c_inv.mul_vec(&h);
            for i in 0..k {
                let minus = LaurentSeries::monomial(h[i].clone(), e, prec);
                let plus = LaurentSeries::monomial(ch[i].clone(), e / ll, prec);
                phi[i] = &(&phi[i] - &minus) + &plus;
                b[i] = &b[i] - &LaurentSeries::monomial(ch[i].clone(), e / ll, prec);
            }
        }
        if let Some((i, x)) = phi.iter().enumerate().find(|(_, x)| x.valuation().is_ok_and(|v| v < 0)) {
            return Err(Error::NotExtendable(format!(
                "principal part {} remains in column {k}, row {i}",
                x.principal_part()
            )));
        }
        let big = prec.max(1) + 1;
        let mut g = SeriesMatrix::identity(field, n, big);
        for (i, bi) in b.iter().enumerate() {
            g.set(i, k, bi.with_prec(big));
        }
        fl_cur = twist_one(&fl_cur, l, &g)?;
        total = &total * &g;

        let blk = fl_cur.block(0, k + 1, 0, k + 1);
        let (_, phi_inv) = integ_parts(&blk, l, target)?;
        let g2 = SeriesMatrix::from_blocks(
            &phi_inv,
            &SeriesMatrix::zero(field, k + 1, n - k - 1, big),
            &SeriesMatrix::zero(field, n - k - 1, k + 1, big),
            &SeriesMatrix::identity(field, n - k - 1, big),
        );
        fl_cur = twist_one(&fl_cur, l, &g2)?;
        total = &total * &g2;
    }
    Ok(total)
}

/// Twists by g, reads off the constants and checks them.
fn certify(c: &SemigroupCocycle, g: SeriesMatrix, target: i64) -> Result<TrivializationCertificate> {
    let gauge = GaugeTransform::new(g);
    let twisted = twist_to(c, &gauge, Some(target))?;
    let available = twisted.precision();
    let checked = target.min(available);
    if checked < 1 {
        return Err(Error::PrecisionExhausted(format!(
            "twisted values are only known modulo t^{available}"
        )));
    }
    let mut constants = BTreeMap::new();
    for (&p, f) in twisted.values() {
        if let Some((i, j, e)) = (0..f.rows())
            .flat_map(|i| (0..f.cols()).map(move |j| (i, j)))
            .find_map(|(i, j)| {
                let x = f.get(i, j);
                let v = x.valuation().ok()?;
                if v != 0 || !x.is_constant() {
                    let e = if v != 0 { v } else { x.max_exponent()? };
                    Some((i, j, e))
                } else {
                    None
                }
            })
        {
            return Err(Error::NotExtendable(format!(
                "value at {p} keeps a t^{e} term in entry ({i}, {j}) after reduction"
            )));
        }
        constants.insert(p, f.constant_term());
    }
    let constant = ConstantRepresentation::new(c.semigroup().clone(), constants)?;
    let cert = TrivializationCertificate {
        gauge,
        constant,
        checked_precision: checked,
    };
    let report = verify_certificate(c, &cert);
    if !report.ok {
        return Err(Error::NotExtendable(format!(
            "certificate does not verify: {}",
            serde_json::to_string(&report).unwrap_or_default()
        )));
    }
    Ok(cert)
}

/// Reduces an upper triangular cocycle with constant diagonal to constants.
pub fn diag_to_constant(c: &SemigroupCocycle, target: i64) -> Result<TrivializationCertificate> {
    let n = c.dim();
    for f in c.values().values() {
        for i in 0..n {
            if !f.get(i, i).is_constant() {
                return Err(Error::PreconditionViolated("diagonal is not constant".into()));
            }
            for j in 0..i {
                if !f.get(i, j).is_zero() {
                    return Err(Error::PreconditionViolated("cocycle is not upper triangular".into()));
                }
            }
        }
    }
    if c.is_constant() {
        return certify(c, SeriesMatrix::identity(c.field(), n, c.precision().max(target) + 1), target);
    }
    let l = coprime_base(c)?;
    let g = diag_to_constant_gauge(c.value(l), l, target)?;
    certify(c, g, target)
}

#[derive(Clone, Copy, Debug)]
pub struct TrivializeOptions {
    pub trials: usize,
}

impl Default for TrivializeOptions {
    fn default() -> Self {
        TrivializeOptions { trials: DEFAULT_TRIALS }
    }
}

pub fn trivialize(c: &SemigroupCocycle, target: i64) -> Result<TrivializationCertificate> {
    trivialize_with(c, target, TrivializeOptions::default())
}

/// Full reduction to a constant representation, returned as a verified
/// certificate.
pub fn trivialize_with(c: &SemigroupCocycle, target: i64, opts: TrivializeOptions) -> Result<TrivializationCertificate> {
    let n = c.dim();
    let field = c.field();
    for (&p, f) in c.values() {
        // Deep poles can leave the determinant undetermined; only a
        // determinant known to vanish modulo a positive power is rejected.
        let d = f.truncate(target.max(1)).det()?;
        if d.is_zero() && d.prec() > 0 && f.det()?.is_zero() {
            return Err(Error::PreconditionViolated(format!("value at {p} is not invertible")));
        }
    }
    if c.is_constant() {
        return certify(c, SeriesMatrix::identity(field, n, c.precision().max(target) + 1), target);
    }
    if c.semigroup().coprime_pair().is_none() {
        return Err(Error::PreconditionViolated("semigroup has no coprime pair of generators".into()));
    }
    let (p, _) = choose_generators(c.semigroup(), n)?;
    let q_max = *c.semigroup().generators().last().expect("nonempty") as i64;
    let width = window_width(c, p, target)? + 1;
    let mut factors = vec![4, 8, q_max];
    factors.retain(|&m| m <= q_max);
    let mut last = None;
    for m in factors {
        match reduce_with_cap(c, target, target + m * width, opts.trials) {
            Err(e @ (Error::PrecisionExhausted(_) | Error::NotExtendable(_) | Error::SingularWithinPrecision)) => {
                last = Some(e)
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

/// One reduction attempt, eigenvectors computed modulo t^cap.
fn reduce_with_cap(c: &SemigroupCocycle, target: i64, cap: i64, trials: usize) -> Result<TrivializationCertificate> {
    let n = c.dim();
    let g_tri = triangularize(c, target, cap, trials)?;
    let p0 = c.semigroup().generators()[0];
    let g_diag = diagonal_gauge(&twist_one(c.value(p0), p0, &g_tri)?, p0)?;
    let g = &g_tri * &g_diag;
    let g = if n > 1 {
        let l = coprime_base(c)?;
        let fl = twist_one(c.value(l), l, &g)?;
        &g * &diag_to_constant_gauge(&fl, l, cap)?
    } else {
        g
    };
    certify(c, g, target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{induce_constant, random_gauge, Semigroup};

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn ser(start: i64, c: &[i64], prec: i64) -> LaurentSeries {
        LaurentSeries::from_ints(q(), start, c, prec)
    }

    fn mat(entries: Vec<LaurentSeries>) -> SeriesMatrix {
        let n = (entries.len() as f64).sqrt() as usize;
        SeriesMatrix::new(q(), n, n, entries).unwrap()
    }

    fn cocycle(gens: &[u64], values: Vec<SeriesMatrix>) -> SemigroupCocycle {
        let s = Semigroup::new(gens.to_vec()).unwrap();
        SemigroupCocycle::new(s, gens.iter().copied().zip(values).collect()).unwrap()
    }

    fn rep(gens: &[u64], values: Vec<ConstantMatrix>) -> ConstantRepresentation {
        let s = Semigroup::new(gens.to_vec()).unwrap();
        ConstantRepresentation::new(s, gens.iter().copied().zip(values).collect()).unwrap()
    }

    #[test]
    fn integ_one_plus_t() {
        let phi = integ_limit(&mat(vec![ser(0, &[1, 1], 8)]), 2, 8).unwrap();
        assert!(phi.g.get(0, 0).truncate(8).agrees_with(&ser(0, &[1, -1], 8)));
        assert_eq!(phi.g.get(0, 0).truncate(8).max_exponent(), Some(1));
    }

    #[test]
    fn integ_diagonal() {
        let f = SeriesMatrix::diagonal(vec![ser(0, &[1, 1], 8), ser(0, &[2], 8)]);
        let phi = integ_limit(&f, 2, 8).unwrap().g.truncate(8);
        let expect = SeriesMatrix::diagonal(vec![ser(0, &[1, -1], 8), ser(0, &[1], 8)]);
        assert!(phi.agrees_with(&expect));
    }

    #[test]
    fn integ_constant_is_identity() {
        let f = SeriesMatrix::from_constant(&ConstantMatrix::from_ints(q(), &[&[1, 2], &[3, 4]]), 10);
        let phi = integ_limit(&f, 3, 10).unwrap().g;
        assert!(phi.truncate(10).agrees_with(&SeriesMatrix::identity(q(), 2, 10)));
    }

    #[test]
    fn integ_rejects_bad_input() {
        assert!(matches!(integ_limit(&mat(vec![ser(-1, &[1], 8)]), 2, 8), Err(Error::NotIntegral { .. })));
        assert!(matches!(integ_limit(&mat(vec![ser(1, &[1], 8)]), 2, 8), Err(Error::SingularAtZero)));
    }

    #[test]
    fn block_tri_two_by_two() {
        let f = mat(vec![ser(0, &[1], 16), ser(1, &[1], 16), ser(1, &[1], 16), ser(1, &[1], 16)]);
        let bf = block_triangularize(&f, 2, 8).unwrap();
        assert_eq!(bf.split_dim, 1);
        assert!(bf.contraction.iter().all(|s| s.first_difference.is_none_or(|e| e >= s.modulus)));
        let g = &bf.gauge.g;
        let lhs = &(&g.invert().unwrap() * &f) * &g.substitute_power(2);
        assert!(lhs.truncate(8).agrees_with(&bf.assembled().truncate(8)));
        assert!(bf.h.constant_term().is_zero());
    }

    #[test]
    fn block_tri_degenerate_splits() {
        let inv = SeriesMatrix::diagonal(vec![ser(0, &[1, 1], 12), ser(0, &[2], 12)]);
        assert_eq!(block_triangularize(&inv, 2, 8).unwrap().split_dim, 2);
        let nil = SeriesMatrix::diagonal(vec![ser(1, &[1], 12), ser(2, &[1], 12)]);
        assert_eq!(block_triangularize(&nil, 2, 8).unwrap().split_dim, 0);
    }

    #[test]
    fn classify_p3_slope_half() {
        let red = classify_degree_one(&cocycle(&[3], vec![mat(vec![ser(1, &[1], 20)])])).unwrap();
        assert_eq!(red.class.slope, BigRational::new(1.into(), 2.into()));
        assert_eq!(red.class.order(), BigInt::from(2));
    }

    #[test]
    fn classify_p2_trivial_with_gauge() {
        let red = classify_degree_one(&cocycle(&[2], vec![mat(vec![ser(1, &[1], 20)])])).unwrap();
        assert!(red.class.is_trivial_slope());
        assert!(red.gauge.g.get(0, 0).agrees_with(&ser(-1, &[1], red.gauge.g.get(0, 0).prec())));
        assert!(red.reduced.value(2).get(0, 0).agrees_with(&ser(0, &[1], 10)));
    }

    #[test]
    fn classify_two_three() {
        let c = cocycle(&[2, 3], vec![mat(vec![ser(1, &[1], 20)]), mat(vec![ser(2, &[1], 20)])]);
        let red = classify_degree_one(&c).unwrap();
        assert!(red.class.is_trivial_slope());
        assert!(red.reduced.is_constant());
    }

    #[test]
    fn classify_rejects_inconsistent_slopes() {
        let c = cocycle(&[2, 3], vec![mat(vec![ser(1, &[1], 20)]), mat(vec![ser(1, &[1], 20)])]);
        assert!(matches!(classify_degree_one(&c), Err(Error::NotACocycle(_))));
    }

    #[test]
    fn cyclic_diag_one_two() {
        let f = SeriesMatrix::diagonal(vec![ser(0, &[1], 16), ser(0, &[2], 16)]);
        let cv = cyclic_vector(&cocycle(&[2], vec![f]), 2, 4).unwrap();
        assert_eq!(cv.trial, 1);
        assert!(cv.companion.h[0].agrees_with(&ser(0, &[-2], 16)));
        assert!(cv.companion.h[1].agrees_with(&ser(0, &[3], 16)));
    }

    #[test]
    fn cyclic_dimension_one() {
        let cv = cyclic_vector(&cocycle(&[2], vec![mat(vec![ser(0, &[1, 1], 16)])]), 2, 4).unwrap();
        assert_eq!(cv.trial, 0);
    }

    #[test]
    fn rescale_inverse_t() {
        let cd = CompanionData {
            h: vec![ser(-1, &[1], 10)],
            p: 2,
        };
        let rs = rescale_companion(&cd, 2).unwrap();
        assert_eq!(rs.alpha, BigRational::from_integer(1.into()));
        assert!(rs.data.h[0].agrees_with(&ser(0, &[1], 10)));
        assert_eq!(rs.data.h[0].valuation().unwrap(), 0);
    }

    #[test]
    fn rescale_rejects_fractional_exponents() {
        let cd = CompanionData {
            h: vec![ser(-1, &[1], 10)],
            p: 3,
        };
        assert!(matches!(rescale_companion(&cd, 1), Err(Error::DivisibilityViolated(_))));
    }

    #[test]
    fn diag_to_constant_recovers_unipotent() {
        let u = ConstantMatrix::from_ints(q(), &[&[1, 1], &[0, 1]]);
        let u3 = ConstantMatrix::from_ints(q(), &[&[1, 2], &[0, 1]]);
        let r = rep(&[2, 3], vec![u.clone(), u3.clone()]);
        let g = mat(vec![ser(0, &[1], 40), ser(-1, &[1], 40), ser(0, &[0], 40), ser(0, &[1], 40)]);
        let c = twist(&induce_constant(&r, 40), &GaugeTransform::new(g)).unwrap();
        assert!(!c.is_constant());
        let cert = diag_to_constant(&c, 16).unwrap();
        assert_eq!(cert.constant.value(2), &u);
        assert_eq!(cert.constant.value(3), &u3);
    }

    #[test]
    fn diag_to_constant_identity_on_constants() {
        let r = rep(&[2, 3], vec![ConstantMatrix::identity(q(), 2), ConstantMatrix::identity(q(), 2)]);
        let cert = diag_to_constant(&induce_constant(&r, 20), 16).unwrap();
        assert!(cert.gauge.g.truncate(16).agrees_with(&SeriesMatrix::identity(q(), 2, 16)));
    }

    #[test]
    fn trivialize_unipotent_seed_42() {
        let u = ConstantMatrix::from_ints(q(), &[&[1, 1], &[0, 1]]);
        let r = rep(&[2, 3], vec![u.clone(), u.clone()]);
        let g = random_gauge(2, q(), 42, 3, 64);
        let c = crate::corpus::twisted_constant(&r, &g, 64).unwrap();
        let cert = trivialize(&c, 32).unwrap();
        for p in [2, 3] {
            let m = cert.constant.value(p);
            assert_eq!(m.char_poly(), u.char_poly());
            assert_ne!(m, &ConstantMatrix::identity(q(), 2));
        }
        assert!(verify_certificate(&c, &cert).ok);
    }

    #[test]
    fn trivialize_constant_is_idempotent() {
        let a = ConstantMatrix::from_ints(q(), &[&[2, 1], &[0, 3]]);
        let b = ConstantMatrix::from_ints(q(), &[&[3, 1], &[0, 4]]);
        let r = rep(&[2, 3], vec![a.clone(), b.clone()]);
        let cert = trivialize(&induce_constant(&r, 40), 32).unwrap();
        assert_eq!(cert.constant.value(2), &a);
        assert_eq!(cert.constant.value(3), &b);
    }

    #[test]
    fn trivialize_needs_coprime_pair() {
        let c = cocycle(&[2], vec![mat(vec![ser(0, &[1, 1], 20)])]);
        assert!(matches!(trivialize(&c, 16), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn trivialize_reports_missing_eigenvalues() {
        let rot = ConstantMatrix::from_ints(q(), &[&[0, -1], &[1, 0]]);
        let r = rep(&[2, 3], vec![rot.clone(), ConstantMatrix::identity(q(), 2)]);
        let g = random_gauge(2, q(), 5, 3, 64);
        let c = crate::corpus::twisted_constant(&r, &g, 64).unwrap();
        match trivialize(&c, 32) {
            Err(Error::FieldExtensionRequired { .. }) => {}
            other => panic!("expected a field extension request, got {other:?}"),
        }
    }
}
