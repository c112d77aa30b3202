//! Semigroup cocycles for the action t -> t^p on Laurent series.
//!
//! Convention: f_{pq}(t) = f_p(t) * f_q(t^p). A gauge g acts by
//! f_p(t) -> g(t)^{-1} f_p(t) g(t^p).

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ConstantMatrix, SeriesMatrix, SeriesMatrixJson};
use crate::scalar::{FieldDescriptor, Scalar};
use crate::series::LaurentSeries;

/// Finitely generated multiplicative subsemigroup of the integers >= 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Semigroup {
    generators: Vec<u64>,
}

impl TryFrom<Vec<u64>> for Semigroup {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        Semigroup::new(v)
    }
}

impl From<Semigroup> for Vec<u64> {
    fn from(s: Semigroup) -> Self {
        s.generators
    }
}

impl Semigroup {
    pub fn new(mut generators: Vec<u64>) -> Result<Self> {
        generators.sort_unstable();
        generators.dedup();
        if generators.is_empty() {
            return Err(Error::PreconditionViolated("semigroup needs a generator".into()));
        }
        if generators[0] < 2 {
            return Err(Error::PreconditionViolated("generators must be at least 2".into()));
        }
        Ok(Semigroup { generators })
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    /// gcd of (g - 1) over the generators, equal to gcd of s - 1 over S.
    pub fn d(&self) -> u64 {
        self.generators.iter().fold(0, |acc, &g| acc.gcd(&(g - 1)))
    }

    /// Some pair of coprime generators, smallest first.
    pub fn coprime_pair(&self) -> Option<(u64, u64)> {
        for (i, &a) in self.generators.iter().enumerate() {
            for &b in &self.generators[i + 1..] {
                if a.gcd(&b) == 1 {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Writes n as a product of generators (in nondecreasing order).
    pub fn factorize(&self, n: u64) -> Option<Vec<u64>> {
        let mut memo = HashMap::new();
        self.factorize_memo(n, &mut memo)
    }

    fn factorize_memo(&self, n: u64, memo: &mut HashMap<u64, Option<Vec<u64>>>) -> Option<Vec<u64>> {
        if n == 1 {
            return Some(Vec::new());
        }
        if let Some(r) = memo.get(&n) {
            return r.clone();
        }
        let mut found = None;
        for &g in &self.generators {
            if n % g == 0 {
                if let Some(mut rest) = self.factorize_memo(n / g, memo) {
                    rest.insert(0, g);
                    found = Some(rest);
                    break;
                }
            }
        }
        memo.insert(n, found.clone());
        found
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= 2 && self.factorize(n).is_some()
    }
}

/// Matrix cocycle stored by its generator values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemigroupCocycle {
    semigroup: Semigroup,
    dim: usize,
    field: FieldDescriptor,
    values: BTreeMap<u64, SeriesMatrix>,
}

impl SemigroupCocycle {
    pub fn new(semigroup: Semigroup, values: BTreeMap<u64, SeriesMatrix>) -> Result<Self> {
        let first = values
            .values()
            .next()
            .ok_or_else(|| Error::PreconditionViolated("cocycle has no values".into()))?;
        let dim = first.rows();
        let field = first.field();
        for g in semigroup.generators() {
            let f = values
                .get(g)
                .ok_or_else(|| Error::PreconditionViolated(format!("missing value for generator {g}")))?;
            if !f.is_square() || f.rows() != dim {
                return Err(Error::DimMismatch(format!("value at {g} is not {dim}x{dim}")));
            }
            if f.field() != field {
                return Err(Error::FieldMismatch(field, f.field()));
            }
        }
        if values.len() != semigroup.generators().len() {
            return Err(Error::PreconditionViolated("values given for non-generators".into()));
        }
        Ok(SemigroupCocycle {
            semigroup,
            dim,
            field,
            values,
        })
    }

    pub fn semigroup(&self) -> &Semigroup {
        &self.semigroup
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn values(&self) -> &BTreeMap<u64, SeriesMatrix> {
        &self.values
    }

    pub fn value(&self, p: u64) -> &SeriesMatrix {
        &self.values[&p]
    }

    /// Smallest entry precision across all values.
    pub fn precision(&self) -> i64 {
        self.values.values().map(SeriesMatrix::precision).min().unwrap_or(0)
    }

    /// f_n for any n in S via the extension rule.
    pub fn value_at(&self, n: u64) -> Result<SeriesMatrix> {
        let factors = self
            .semigroup
            .factorize(n)
            .filter(|f| !f.is_empty())
            .ok_or_else(|| Error::PreconditionViolated(format!("{n} is not in the semigroup")))?;
        let mut acc = self.values[&factors[0]].clone();
        let mut m = factors[0];
        for &g in &factors[1..] {
            acc = &acc * &self.values[&g].substitute_power(m);
            m *= g;
        }
        Ok(acc)
    }

    pub fn is_constant(&self) -> bool {
        self.values.values().all(SeriesMatrix::is_constant)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairReport {
    pub p: u64,
    pub q: u64,
    pub ok: bool,
    #[serde(rename = "firstMismatchExponent")]
    pub first_mismatch: Option<i64>,
    #[serde(rename = "checkedPrecision")]
    pub checked_precision: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CocycleReport {
    pub ok: bool,
    pub pairs: Vec<PairReport>,
}

/// Checks f_p(t) f_q(t^p) = f_q(t) f_p(t^q) for every generator pair.
pub fn verify_cocycle(c: &SemigroupCocycle) -> CocycleReport {
    let gens = c.semigroup.generators();
    let mut pairs = Vec::new();
    for (i, &p) in gens.iter().enumerate() {
        for &q in &gens[i + 1..] {
            let lhs = c.value(p) * &c.value(q).substitute_power(p);
            let rhs = c.value(q) * &c.value(p).substitute_power(q);
            let first_mismatch = lhs.first_mismatch(&rhs).map(|(_, _, e)| e);
            let checked_precision = lhs.precision().min(rhs.precision());
            pairs.push(PairReport {
                p,
                q,
                ok: first_mismatch.is_none(),
                first_mismatch,
                checked_precision,
            });
        }
    }
    CocycleReport {
        ok: pairs.iter().all(|r| r.ok),
        pairs,
    }
}

/// Change of basis g in GL_N of Laurent series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeTransform {
    pub g: SeriesMatrix,
}

impl GaugeTransform {
    pub fn new(g: SeriesMatrix) -> Self {
        GaugeTransform { g }
    }

    pub fn identity(field: FieldDescriptor, n: usize, prec: i64) -> Self {
        GaugeTransform {
            g: SeriesMatrix::identity(field, n, prec),
        }
    }

    /// Twisting by self then by h equals twisting by the product self * h.
    pub fn then(&self, h: &GaugeTransform) -> GaugeTransform {
        GaugeTransform { g: &self.g * &h.g }
    }

    pub fn inverse(&self) -> Result<GaugeTransform> {
        Ok(GaugeTransform { g: self.g.invert()? })
    }
}

pub fn twist(c: &SemigroupCocycle, g: &GaugeTransform) -> Result<SemigroupCocycle> {
    twist_to(c, g, None)
}

/// g^-1 f g(t^p), with operands cut to what can reach the result. With a
/// limit, f is also cut so that the result is only computed modulo
/// t^limit (when the inputs allow that much).
pub fn twist_value(f: &SeriesMatrix, p: u64, g: &SeriesMatrix, ginv: &SeriesMatrix, limit: Option<i64>) -> Result<SeriesMatrix> {
    let gsub = g.substitute_power(p);
    let (Some(v_sub), Some(v_inv)) = (gsub.min_valuation(), ginv.min_valuation()) else {
        return Err(Error::SingularWithinPrecision);
    };
    let f = match limit {
        Some(m) => f.truncate(m - v_inv - v_sub),
        None => f.clone(),
    };
    let gsub = match f.min_valuation() {
        Some(v_f) => gsub.truncate(f.precision() + v_sub - v_f),
        None => gsub,
    };
    ginv.mat_mul(&f.mat_mul(&gsub)?)
}

/// Twist computed modulo t^limit when a limit is given.
pub fn twist_to(c: &SemigroupCocycle, g: &GaugeTransform, limit: Option<i64>) -> Result<SemigroupCocycle> {
    if g.g.field() != c.field {
        return Err(Error::FieldMismatch(c.field, g.g.field()));
    }
    if g.g.rows() != c.dim || !g.g.is_square() {
        return Err(Error::DimMismatch("gauge and cocycle dimensions differ".into()));
    }
    let ginv = g.g.invert()?;
    let values = c
        .values
        .iter()
        .map(|(&p, f)| Ok((p, twist_value(f, p, &g.g, &ginv, limit)?)))
        .collect::<Result<_>>()?;
    Ok(SemigroupCocycle {
        semigroup: c.semigroup.clone(),
        dim: c.dim,
        field: c.field,
        values,
    })
}

/// Commuting invertible constant matrices, one per generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantRepresentation {
    semigroup: Semigroup,
    dim: usize,
    field: FieldDescriptor,
    values: BTreeMap<u64, ConstantMatrix>,
}

impl ConstantRepresentation {
    pub fn new(semigroup: Semigroup, values: BTreeMap<u64, ConstantMatrix>) -> Result<Self> {
        let first = values
            .values()
            .next()
            .ok_or_else(|| Error::PreconditionViolated("representation has no values".into()))?;
        let dim = first.rows();
        let field = first.field();
        if values.len() != semigroup.generators().len() {
            return Err(Error::PreconditionViolated("one value per generator required".into()));
        }
        for g in semigroup.generators() {
            let m = values
                .get(g)
                .ok_or_else(|| Error::PreconditionViolated(format!("missing value for generator {g}")))?;
            if !m.is_square() || m.rows() != dim {
                return Err(Error::DimMismatch(format!("value at {g} is not {dim}x{dim}")));
            }
            if m.field() != field {
                return Err(Error::FieldMismatch(field, m.field()));
            }
            if m.det().is_zero() {
                return Err(Error::SingularWithinPrecision);
            }
        }
        let ms: Vec<&ConstantMatrix> = values.values().collect();
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                if !ms[i].commutes_with(ms[j]) {
                    return Err(Error::NotACocycle("constant values do not commute".into()));
                }
            }
        }
        Ok(ConstantRepresentation {
            semigroup,
            dim,
            field,
            values,
        })
    }

    pub fn semigroup(&self) -> &Semigroup {
        &self.semigroup
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn values(&self) -> &BTreeMap<u64, ConstantMatrix> {
        &self.values
    }

    pub fn value(&self, p: u64) -> &ConstantMatrix {
        &self.values[&p]
    }
}

pub fn induce_constant(r: &ConstantRepresentation, prec: i64) -> SemigroupCocycle {
    SemigroupCocycle {
        semigroup: r.semigroup.clone(),
        dim: r.dim,
        field: r.field,
        values: r
            .values
            .iter()
            .map(|(&p, m)| (p, SeriesMatrix::from_constant(m, prec)))
            .collect(),
    }
}

/// Seeded gauge: a product of `complexity` elementary matrices
/// 1 + c t^e E_ij (c in [-2,2] nonzero, e in [-1,1]) followed by a diagonal
/// matrix of signed t-powers. Complexity 0 gives the identity.
pub fn random_gauge(dim: usize, field: FieldDescriptor, seed: u64, complexity: usize, prec: i64) -> GaugeTransform {
    let mut g = SeriesMatrix::identity(field, dim, prec);
    if complexity == 0 {
        return GaugeTransform { g };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if dim > 1 {
        for _ in 0..complexity {
            let i = rng.gen_range(0..dim);
            let mut j = rng.gen_range(0..dim - 1);
            if j >= i {
                j += 1;
            }
            let mut c = rng.gen_range(1..=2i64);
            if rng.gen_bool(0.5) {
                c = -c;
            }
            let e = rng.gen_range(-1..=1i64);
            let mut el = SeriesMatrix::identity(field, dim, prec);
            el.set(i, j, LaurentSeries::monomial(Scalar::from_int(field, c), e, prec));
            g = &g * &el;
        }
    }
    let diag = (0..dim)
        .map(|_| {
            let a = rng.gen_range(-1..=1i64);
            let u = [1i64, -1, 2][rng.gen_range(0..3)];
            LaurentSeries::monomial(Scalar::from_int(field, u), a, prec)
        })
        .collect();
    g = &g * &SeriesMatrix::diagonal(diag);
    GaugeTransform { g }
}

/// A gauge together with the constant representation it reaches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrivializationCertificate {
    pub gauge: GaugeTransform,
    pub constant: ConstantRepresentation,
    pub checked_precision: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorCheck {
    pub p: u64,
    pub ok: bool,
    /// (row, col, exponent) of the first coefficient that differs.
    #[serde(rename = "firstMismatch")]
    pub first_mismatch: Option<(usize, usize, i64)>,
    /// Precision actually available for the comparison.
    #[serde(rename = "availablePrecision")]
    pub available_precision: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub ok: bool,
    #[serde(rename = "checkedPrecision")]
    pub checked_precision: i64,
    pub generators: Vec<GeneratorCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Recomputes g^{-1} f_p g(t^p) and compares it with M_p below
/// t^checkedPrecision. A comparison that cannot reach that precision fails.
pub fn verify_certificate(c: &SemigroupCocycle, cert: &TrivializationCertificate) -> CertificateReport {
    let fail = |msg: String| CertificateReport {
        ok: false,
        checked_precision: cert.checked_precision,
        generators: Vec::new(),
        error: Some(msg),
    };
    if cert.constant.semigroup != c.semigroup || cert.constant.dim != c.dim {
        return fail("certificate does not match the cocycle's semigroup or dimension".into());
    }
    let twisted = match twist_to(c, &cert.gauge, Some(cert.checked_precision)) {
        Ok(t) => t,
        Err(e) => return fail(e.to_string()),
    };
    let m = cert.checked_precision;
    let generators: Vec<GeneratorCheck> = c
        .semigroup
        .generators()
        .iter()
        .map(|&p| {
            let lhs = twisted.value(p);
            let rhs = SeriesMatrix::from_constant(cert.constant.value(p), m);
            let available = lhs.precision();
            let first_mismatch = lhs.truncate(m).first_mismatch(&rhs);
            GeneratorCheck {
                p,
                ok: first_mismatch.is_none() && available >= m,
                first_mismatch,
                available_precision: available,
            }
        })
        .collect();
    CertificateReport {
        ok: generators.iter().all(|g| g.ok),
        checked_precision: m,
        generators,
        error: None,
    }
}

#[derive(Serialize, Deserialize)]
struct CocycleJson {
    semigroup: Vec<u64>,
    dim: usize,
    values: BTreeMap<String, SeriesMatrixJson>,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    gauge: SeriesMatrixJson,
    constant: BTreeMap<String, ConstantMatrix>,
    #[serde(rename = "checkedPrecision")]
    checked_precision: i64,
}

fn parse_key(k: &str) -> Result<u64> {
    k.parse().map_err(|_| Error::Parse(format!("bad generator key {k:?}")))
}

impl SemigroupCocycle {
    /// Parses the cocycle document. Fields are read from the first scalar
    /// present; `default_field` applies when every entry is zero.
    pub fn from_json(text: &str, default_field: FieldDescriptor) -> Result<Self> {
        let raw: CocycleJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let semigroup = Semigroup::new(raw.semigroup)?;
        let field = raw
            .values
            .values()
            .find_map(SeriesMatrixJson::first_field)
            .unwrap_or(default_field);
        let mut values = BTreeMap::new();
        for (k, m) in raw.values {
            if m.dim != raw.dim {
                return Err(Error::DimMismatch(format!("value {k} has dim {}", m.dim)));
            }
            values.insert(parse_key(&k)?, m.into_matrix(field)?);
        }
        SemigroupCocycle::new(semigroup, values)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "semigroup": self.semigroup.generators,
            "dim": self.dim,
            "values": self.values.iter().map(|(p, m)| (p.to_string(), m)).collect::<BTreeMap<_, _>>(),
        })
    }
}

impl TrivializationCertificate {
    pub fn from_json(text: &str, semigroup: &Semigroup) -> Result<Self> {
        let raw: CertificateJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut values = BTreeMap::new();
        for (k, m) in raw.constant {
            values.insert(parse_key(&k)?, m);
        }
        let constant = ConstantRepresentation::new(semigroup.clone(), values)?;
        let g = raw.gauge.into_matrix(constant.field())?;
        Ok(TrivializationCertificate {
            gauge: GaugeTransform::new(g),
            constant,
            checked_precision: raw.checked_precision,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "gauge": self.gauge.g,
            "constant": self.constant.values.iter().map(|(p, m)| (p.to_string(), m)).collect::<BTreeMap<_, _>>(),
            "checkedPrecision": self.checked_precision,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn one_dim(gens: &[u64], vals: &[(u64, LaurentSeries)]) -> SemigroupCocycle {
        let values = vals
            .iter()
            .map(|(p, s)| (*p, SeriesMatrix::new(q(), 1, 1, vec![s.clone()]).unwrap()))
            .collect();
        SemigroupCocycle::new(Semigroup::new(gens.to_vec()).unwrap(), values).unwrap()
    }

    #[test]
    fn semigroup_basics() {
        let s = Semigroup::new(vec![3, 2]).unwrap();
        assert_eq!(s.generators(), &[2, 3]);
        assert_eq!(s.d(), 1);
        assert!(s.contains(6) && s.contains(9) && !s.contains(5));
        assert_eq!(Semigroup::new(vec![3, 5]).unwrap().d(), 2);
        assert_eq!(Semigroup::new(vec![4, 6]).unwrap().coprime_pair(), None);
        assert!(Semigroup::new(vec![1]).is_err());
    }

    #[test]
    fn incompatible_pair_detected() {
        let c = one_dim(
            &[2, 3],
            &[
                (2, LaurentSeries::from_ints(q(), 0, &[1, 1], 16)),
                (3, LaurentSeries::one(q(), 16)),
            ],
        );
        let r = verify_cocycle(&c);
        assert!(!r.ok);
        assert_eq!(r.pairs[0].first_mismatch, Some(1));
    }

    #[test]
    fn twist_monomial() {
        let c = one_dim(&[2], &[(2, LaurentSeries::from_ints(q(), 1, &[1], 16))]);
        let g = GaugeTransform::new(SeriesMatrix::new(q(), 1, 1, vec![LaurentSeries::from_ints(q(), -1, &[1], 16)]).unwrap());
        let t = twist(&c, &g).unwrap();
        assert!(t.value(2).get(0, 0).agrees_with(&LaurentSeries::one(q(), 16)));
    }

    #[test]
    fn constant_rep_and_extension_rule() {
        let s = Semigroup::new(vec![2, 3]).unwrap();
        let mut v = BTreeMap::new();
        v.insert(2, ConstantMatrix::from_ints(q(), &[&[2, 0], &[0, 3]]));
        v.insert(3, ConstantMatrix::from_ints(q(), &[&[5, 0], &[0, 7]]));
        let r = ConstantRepresentation::new(s, v).unwrap();
        let c = induce_constant(&r, 32);
        assert!(verify_cocycle(&c).ok);
        let f6 = c.value_at(6).unwrap();
        assert_eq!(f6.constant_term(), ConstantMatrix::from_ints(q(), &[&[10, 0], &[0, 21]]));
        assert!(c.value_at(5).is_err());
    }

    #[test]
    fn noncommuting_rep_rejected() {
        let s = Semigroup::new(vec![2, 3]).unwrap();
        let mut v = BTreeMap::new();
        v.insert(2, ConstantMatrix::from_ints(q(), &[&[1, 1], &[0, 1]]));
        v.insert(3, ConstantMatrix::from_ints(q(), &[&[1, 0], &[1, 1]]));
        assert!(matches!(ConstantRepresentation::new(s, v), Err(Error::NotACocycle(_))));
    }

    #[test]
    fn random_gauge_properties() {
        let id = random_gauge(3, q(), 7, 0, 32);
        assert_eq!(id.g, SeriesMatrix::identity(q(), 3, 32));
        let a = random_gauge(2, q(), 0, 4, 32);
        assert_eq!(a, random_gauge(2, q(), 0, 4, 32));
        let det = a.g.det().unwrap();
        let v = det.valuation().unwrap();
        assert!(det.shift(-v).agrees_with(&LaurentSeries::constant(det.leading_coeff().unwrap().clone(), 16)));
    }

    #[test]
    fn certificate_roundtrip_json() {
        let s = Semigroup::new(vec![2, 3]).unwrap();
        let mut v = BTreeMap::new();
        v.insert(2, ConstantMatrix::from_ints(q(), &[&[1, 1], &[0, 1]]));
        v.insert(3, ConstantMatrix::from_ints(q(), &[&[1, 2], &[0, 1]]));
        let r = ConstantRepresentation::new(s.clone(), v).unwrap();
        let c = induce_constant(&r, 32);
        let cert = TrivializationCertificate {
            gauge: GaugeTransform::identity(q(), 2, 32),
            constant: r.clone(),
            checked_precision: 32,
        };
        assert!(verify_certificate(&c, &cert).ok);
        let text = cert.to_json().to_string();
        let back = TrivializationCertificate::from_json(&text, &s).unwrap();
        assert_eq!(back, cert);
        let ctext = c.to_json().to_string();
        assert_eq!(SemigroupCocycle::from_json(&ctext, q()).unwrap(), c);

        let mut bad = cert.clone();
        let mut tampered = r.values().clone();
        tampered.insert(3, ConstantMatrix::from_ints(q(), &[&[1, 3], &[0, 1]]));
        bad.constant = ConstantRepresentation::new(s, tampered).unwrap();
        let rep = verify_certificate(&c, &bad);
        assert!(!rep.ok);
        assert_eq!(rep.generators[1].first_mismatch, Some((0, 1, 0)));
    }
}
