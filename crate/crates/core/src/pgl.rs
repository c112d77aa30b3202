//! Degree-one cocycles of PGL_(n+1) on k(x1..xn), a few Cremona maps and
//! the functional equations for h.
//!
//! A projective transform A acts on functions by (A f)(x) = f(img_A(x)),
//! where img_A(x) is the affine part of the row vector (x, 1) A. Then
//! (AB) f = A (B f), and a cocycle satisfies f_AB = f_A A(f_B).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::ConstantMatrix;
use crate::ratfunc::{jacobian_det, RationalFunction, RfOp};
use crate::scalar::{FieldDescriptor, Scalar};

/// Invertible (n+1)x(n+1) matrix modulo scalars, scaled so that the first
/// nonzero entry in row-major order is 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectiveTransform {
    mat: ConstantMatrix,
}

impl ProjectiveTransform {
    pub fn new(mat: ConstantMatrix) -> Result<Self> {
        if !mat.is_square() || mat.rows() < 2 {
            return Err(Error::DimMismatch("a projective transform needs a square matrix of size at least 2".into()));
        }
        if mat.det().is_zero() {
            return Err(Error::PreconditionViolated("projective transform is singular".into()));
        }
        let n = mat.rows();
        let lead = (0..n * n)
            .map(|k| mat.get(k / n, k % n))
            .find(|x| !x.is_zero())
            .expect("nonsingular")
            .inv()?;
        Ok(ProjectiveTransform { mat: mat.scale(&lead) })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::new(ConstantMatrix::from_ints(FieldDescriptor::rationals(), rows))
    }

    pub fn identity(field: FieldDescriptor, n: usize) -> Self {
        ProjectiveTransform {
            mat: ConstantMatrix::identity(field, n + 1),
        }
    }

    /// Dimension n of the projective space.
    pub fn n(&self) -> usize {
        self.mat.rows() - 1
    }

    pub fn field(&self) -> FieldDescriptor {
        self.mat.field()
    }

    pub fn matrix(&self) -> &ConstantMatrix {
        &self.mat
    }

    pub fn det(&self) -> Scalar {
        self.mat.det()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Self::new(&self.mat * &other.mat)
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::new(self.mat.inverse()?)
    }

    /// The affine form A_(1,n+1) x1 + ... + A_(n,n+1) xn + A_(n+1,n+1).
    pub fn affine_form(&self) -> RationalFunction {
        self.column_form(self.n())
    }

    fn column_form(&self, j: usize) -> RationalFunction {
        let n = self.n();
        let field = self.field();
        let mut acc = RationalFunction::constant(self.mat.get(n, j).clone(), n);
        for i in 0..n {
            let term = RationalFunction::var(field, n, i).scale(self.mat.get(i, j));
            acc = acc.arith(&term, RfOp::Add).expect("same ring");
        }
        acc
    }

    /// Images of x1..xn.
    pub fn images(&self) -> Vec<RationalFunction> {
        let den = self.affine_form();
        (0..self.n())
            .map(|j| self.column_form(j).arith(&den, RfOp::Div).expect("nonzero affine form"))
            .collect()
    }

    pub fn to_birational(&self) -> BirationalMap {
        BirationalMap::new(self.images())
    }
}

pub fn transform_action(a: &ProjectiveTransform, f: &RationalFunction) -> Result<RationalFunction> {
    f.substitute(&a.images())
}

/// A character of k^x given by its values on finitely many points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Character {
    Trivial,
    Table(Vec<(Scalar, Scalar)>),
}

impl Character {
    pub fn eval(&self, x: &Scalar) -> Result<Scalar> {
        match self {
            Character::Trivial => Ok(Scalar::one(x.field())),
            Character::Table(t) => t
                .iter()
                .find(|(a, _)| a == x)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::PreconditionViolated(format!("character is not given at {x}"))),
        }
    }
}

/// The class (m, phi) of A -> phi(det A) (affine form)^(-m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PGLDegreeOneClass {
    pub m: i64,
    pub character: Character,
}

impl PGLDegreeOneClass {
    pub fn trivial(m: i64) -> Self {
        PGLDegreeOneClass {
            m,
            character: Character::Trivial,
        }
    }

    /// With the trivial character the formula is well defined on PGL
    /// exactly when n+1 divides m.
    pub fn lifts_to_pgl(&self, n: usize) -> bool {
        self.m.rem_euclid(n as i64 + 1) == 0
    }
}

/// (affine form)^(-m) of the normalized representative, with no
/// determinant factor.
pub fn affine_form_power(a: &ProjectiveTransform, m: i64) -> Result<RationalFunction> {
    a.affine_form().pow(-m)
}

/// f_A = phi(det A) (affine form)^(-m). When n+1 divides m the factor
/// det(A)^(m/(n+1)) is included, which makes the value independent of the
/// representative of A; otherwise the normalized representative is used.
pub fn degree_one_cocycle_value(a: &ProjectiveTransform, cls: &PGLDegreeOneClass) -> Result<RationalFunction> {
    let det = a.det();
    let mut c = cls.character.eval(&det)?;
    if cls.lifts_to_pgl(a.n()) {
        c = &c * &det.pow(cls.m / (a.n() as i64 + 1))?;
    }
    Ok(affine_form_power(a, cls.m)?.scale(&c))
}

/// A report in the common {check, ok, witness?} shape.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

fn matrix_json(a: &ProjectiveTransform) -> Value {
    let n = a.n() + 1;
    Value::Array(
        (0..n)
            .map(|i| Value::Array((0..n).map(|j| Value::String(a.matrix().get(i, j).to_string())).collect()))
            .collect(),
    )
}

/// f_AB = f_A A(f_B) on one pair; Err carries the two sides.
fn chain_rule_pair(
    a: &ProjectiveTransform,
    b: &ProjectiveTransform,
    value: &dyn Fn(&ProjectiveTransform) -> Result<RationalFunction>,
) -> Result<std::result::Result<(), (RationalFunction, RationalFunction)>> {
    let lhs = value(&a.mul(b)?)?;
    let rhs = value(a)?.arith(&transform_action(a, &value(b)?)?, RfOp::Mul)?;
    Ok(if lhs == rhs { Ok(()) } else { Err((lhs, rhs)) })
}

fn chain_rule_with(
    check: &str,
    pairs: &[(ProjectiveTransform, ProjectiveTransform)],
    value: &dyn Fn(&ProjectiveTransform) -> Result<RationalFunction>,
) -> Result<CheckReport> {
    let mut failures = Vec::new();
    for (a, b) in pairs {
        if let Err((lhs, rhs)) = chain_rule_pair(a, b, value)? {
            failures.push(json!({
                "A": matrix_json(a),
                "B": matrix_json(b),
                "f_AB": lhs.to_string(),
                "f_A*A(f_B)": rhs.to_string(),
            }));
        }
    }
    Ok(CheckReport {
        check: check.into(),
        ok: failures.is_empty(),
        witness: failures.first().cloned(),
        details: json!({ "pairsChecked": pairs.len(), "failures": failures.len() }),
    })
}

fn all_pairs(list: &[ProjectiveTransform]) -> Vec<(ProjectiveTransform, ProjectiveTransform)> {
    list.iter()
        .flat_map(|a| list.iter().map(move |b| (a.clone(), b.clone())))
        .collect()
}

/// Checks f_AB = f_A A(f_B) for all ordered pairs from the list.
pub fn verify_chain_rule(list: &[ProjectiveTransform], cls: &PGLDegreeOneClass) -> Result<CheckReport> {
    verify_chain_rule_on_pairs(&all_pairs(list), cls)
}

/// Checks f_AB = f_A A(f_B) on the given pairs.
pub fn verify_chain_rule_on_pairs(
    pairs: &[(ProjectiveTransform, ProjectiveTransform)],
    cls: &PGLDegreeOneClass,
) -> Result<CheckReport> {
    let mut r = chain_rule_with("chain-rule", pairs, &|a| degree_one_cocycle_value(a, cls))?;
    r.details["m"] = json!(cls.m);
    Ok(r)
}

/// The same check for A -> jacobian of img_A.
pub fn verify_jacobian_chain_rule(list: &[ProjectiveTransform]) -> Result<CheckReport> {
    chain_rule_with("jacobian-chain-rule", &all_pairs(list), &|a| jacobian_det(&a.images()))
}

/// `count` seeded pairs of transforms with entries in [-3, 3].
pub fn random_pairs(n: usize, seed: u64, count: usize) -> Vec<(ProjectiveTransform, ProjectiveTransform)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = random_transform(n, &mut rng, 3);
            (a, random_transform(n, &mut rng, 3))
        })
        .collect()
}

/// Seeded transform with integer entries in [-bound, bound].
pub fn random_transform(n: usize, rng: &mut ChaCha8Rng, bound: i64) -> ProjectiveTransform {
    let field = FieldDescriptor::rationals();
    loop {
        let m = ConstantMatrix::from_fn(field, n + 1, n + 1, |_, _| Scalar::from_int(field, rng.gen_range(-bound..=bound)));
        if let Ok(t) = ProjectiveTransform::new(m) {
            return t;
        }
    }
}

/// Searches seeded random pairs for a violation of the chain rule.
pub fn find_chain_rule_witness(
    n: usize,
    cls: &PGLDegreeOneClass,
    seed: u64,
    tries: usize,
) -> Result<Option<(ProjectiveTransform, ProjectiveTransform)>> {
    for (a, b) in random_pairs(n, seed, tries) {
        if chain_rule_pair(&a, &b, &|t| degree_one_cocycle_value(t, cls))?.is_err() {
            return Ok(Some((a, b)));
        }
    }
    Ok(None)
}

/// Generators of PGL_(n+1) used by the omega check: transvections
/// 1 + E_ij, diagonal scalings by 2 and -1, the swap of coordinates 1 and
/// n+1, and (for n >= 2) the involution g0.
pub fn omega_sample(n: usize) -> Vec<(String, ProjectiveTransform)> {
    let field = FieldDescriptor::rationals();
    let size = n + 1;
    let mut out = Vec::new();
    for i in 0..size {
        for j in 0..size {
            if i != j {
                let mut m = ConstantMatrix::identity(field, size);
                m.set(i, j, Scalar::one(field));
                out.push((format!("1+E{}{}", i + 1, j + 1), ProjectiveTransform::new(m).expect("unipotent")));
            }
        }
    }
    for i in 0..size {
        for c in [2, -1] {
            let mut m = ConstantMatrix::identity(field, size);
            m.set(i, i, Scalar::from_int(field, c));
            out.push((format!("diag{}({c})", i + 1), ProjectiveTransform::new(m).expect("diagonal")));
        }
    }
    let mut swap = ConstantMatrix::identity(field, size);
    swap.set(0, 0, Scalar::zero(field));
    swap.set(n, n, Scalar::zero(field));
    swap.set(0, n, Scalar::one(field));
    swap.set(n, 0, Scalar::one(field));
    out.push(("swap(1,n+1)".into(), ProjectiveTransform::new(swap).expect("permutation")));
    if n >= 2 {
        out.push(("g0".into(), g0_transform(n)));
    }
    out
}

/// x_i -> x_i / (x1 - 1).
pub fn g0_transform(n: usize) -> ProjectiveTransform {
    let field = FieldDescriptor::rationals();
    let mut m = ConstantMatrix::identity(field, n + 1);
    m.set(0, n, Scalar::one(field));
    m.set(n, n, Scalar::from_int(field, -1));
    ProjectiveTransform::new(m).expect("involution")
}

/// For each sample transform: the Jacobian of img_A equals the m = n+1
/// value det(A) (affine form)^(-(n+1)), and differs from the bare power of
/// the affine form by the constant det(A).
pub fn omega_class_check(n: usize) -> Result<CheckReport> {
    if n == 0 {
        return Err(Error::PreconditionViolated("n must be at least 1".into()));
    }
    let cls = PGLDegreeOneClass::trivial(n as i64 + 1);
    let mut rows = Vec::new();
    let mut witness = None;
    for (name, a) in omega_sample(n) {
        let jac = jacobian_det(&a.images())?;
        let lifted = degree_one_cocycle_value(&a, &cls)?;
        let raw = affine_form_power(&a, cls.m)?;
        let ratio = jac.arith(&raw, RfOp::Div)?;
        let factor = ratio.constant_value();
        let ok = jac == lifted && factor.as_ref() == Some(&a.det());
        let row = json!({
            "transform": name,
            "jacobian": jac.to_string(),
            "formula": raw.to_string(),
            "factor": factor.map(|c| c.to_string()),
            "det": a.det().to_string(),
            "ok": ok,
        });
        if !ok && witness.is_none() {
            witness = Some(row.clone());
        }
        rows.push(row);
    }
    Ok(CheckReport {
        check: "omega-class".into(),
        ok: witness.is_none(),
        witness,
        details: json!({ "n": n, "m": n + 1, "transforms": rows }),
    })
}

/// Element of the Cremona group, acting on functions by substitution.
#[derive(Clone, Debug, PartialEq)]
pub struct BirationalMap {
    pub images: Vec<RationalFunction>,
}

impl BirationalMap {
    pub fn new(images: Vec<RationalFunction>) -> Self {
        BirationalMap { images }
    }

    pub fn identity(field: FieldDescriptor, n: usize) -> Self {
        Self::new(RationalFunction::identity_images(field, n))
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// Product in the group acting on functions: (self * other) f =
    /// self (other f), so its images are other's images evaluated at self's.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(other.images.iter().map(|f| f.substitute(&self.images)).collect::<Result<_>>()?))
    }

    pub fn apply(&self, f: &RationalFunction) -> Result<RationalFunction> {
        f.substitute(&self.images)
    }
}

fn rf(s: &str, n: usize) -> RationalFunction {
    crate::ratfunc::parse_rational_function(s, n, FieldDescriptor::rationals()).expect("valid literal")
}

fn map_from(n: usize, f: impl Fn(usize) -> String) -> BirationalMap {
    BirationalMap::new((1..=n).map(|i| rf(&f(i), n)).collect())
}

/// The named maps: sigma, xi, iota01, s0, s1, g0 and iota_1j.
pub struct CremonaMaps {
    pub n: usize,
}

impl CremonaMaps {
    pub fn sigma(&self) -> BirationalMap {
        map_from(self.n, |i| if i == 1 { "1/x1".into() } else { format!("x{i}") })
    }

    pub fn xi(&self) -> BirationalMap {
        map_from(self.n, |i| match i {
            1 => "1/x1".into(),
            2 => "x2/x1".into(),
            _ => format!("x{i}"),
        })
    }

    pub fn iota01(&self) -> BirationalMap {
        map_from(self.n, |i| if i == 1 { "1/x1".into() } else { format!("x{i}/x1") })
    }

    pub fn s0(&self) -> BirationalMap {
        map_from(self.n, |i| format!("1/x{i}"))
    }

    pub fn s1(&self) -> BirationalMap {
        map_from(self.n, |i| if i == 1 { "1/x1".into() } else { format!("x{i}/x1^2") })
    }

    pub fn g0(&self) -> BirationalMap {
        map_from(self.n, |i| format!("x{i}/(x1-1)"))
    }

    /// Swaps x1 and xj.
    pub fn iota1(&self, j: usize) -> BirationalMap {
        map_from(self.n, |i| {
            if i == 1 {
                format!("x{j}")
            } else if i == j {
                "x1".into()
            } else {
                format!("x{i}")
            }
        })
    }
}

fn product(maps: &[BirationalMap]) -> Result<BirationalMap> {
    let mut acc = maps[0].clone();
    for m in &maps[1..] {
        acc = acc.mul(m)?;
    }
    Ok(acc)
}

fn identity_entry(name: &str, lhs: &BirationalMap, rhs: &BirationalMap) -> Value {
    let ok = lhs == rhs;
    let mut v = json!({ "identity": name, "ok": ok });
    if !ok {
        v["lhs"] = json!(lhs.images.iter().map(ToString::to_string).collect::<Vec<_>>());
        v["rhs"] = json!(rhs.images.iter().map(ToString::to_string).collect::<Vec<_>>());
    }
    v
}

/// sigma^2 = xi^2 = 1, s1 = iota01 sigma iota01, s1 = g0 s0 g0 s0 g0 and
/// s0 = prod_j iota_1j sigma iota_1j, as maps of k(x1..xn).
pub fn cremona_identities(n: usize) -> Result<CheckReport> {
    if n < 2 {
        return Err(Error::PreconditionViolated("Cremona identities need n >= 2".into()));
    }
    let c = CremonaMaps { n };
    let id = BirationalMap::identity(FieldDescriptor::rationals(), n);
    let (sigma, xi, iota, s0, s1, g0) = (c.sigma(), c.xi(), c.iota01(), c.s0(), c.s1(), c.g0());
    let mut parts: Vec<BirationalMap> = Vec::new();
    for j in 1..=n {
        let i = c.iota1(j);
        parts.extend([i.clone(), sigma.clone(), i]);
    }
    let entries = vec![
        identity_entry("sigma^2 = 1", &sigma.mul(&sigma)?, &id),
        identity_entry("xi^2 = 1", &xi.mul(&xi)?, &id),
        identity_entry("s1 = iota01 sigma iota01", &s1, &product(&[iota.clone(), sigma.clone(), iota])?),
        identity_entry(
            "s1 = g0 s0 g0 s0 g0",
            &s1,
            &product(&[g0.clone(), s0.clone(), g0.clone(), s0.clone(), g0])?,
        ),
        identity_entry("s0 = prod iota1j sigma iota1j", &s0, &product(&parts)?),
    ];
    let witness = entries.iter().find(|e| e["ok"] == false).cloned();
    Ok(CheckReport {
        check: "cremona".into(),
        ok: witness.is_none(),
        witness,
        details: json!({ "n": n, "identities": entries }),
    })
}

/// Square matrix of rational functions of one variable x1.
#[derive(Clone, Debug)]
pub struct UnivariateMatrix {
    pub entries: Vec<Vec<RationalFunction>>,
}

impl UnivariateMatrix {
    pub fn new(entries: Vec<Vec<RationalFunction>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::DimMismatch("h must be a nonempty square matrix".into()));
        }
        if entries.iter().flatten().any(|f| f.nvars() != 1) {
            return Err(Error::DimMismatch("entries of h must be functions of x1 alone".into()));
        }
        Ok(UnivariateMatrix { entries })
    }

    pub fn parse(rows: &[Vec<String>], field: FieldDescriptor) -> Result<Self> {
        let entries = rows
            .iter()
            .map(|r| r.iter().map(|s| crate::ratfunc::parse_rational_function(s, 1, field)).collect())
            .collect::<Result<_>>()?;
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Entries evaluated at a function u (of any number of variables).
    fn at(&self, u: &RationalFunction) -> Result<Vec<Vec<RationalFunction>>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|f| f.substitute(std::slice::from_ref(u))).collect())
            .collect()
    }
}

fn mat_mul(a: &[Vec<RationalFunction>], b: &[Vec<RationalFunction>]) -> Result<Vec<Vec<RationalFunction>>> {
    let n = a.len();
    let field = a[0][0].field();
    let nv = a[0][0].nvars();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = RationalFunction::zero(field, nv);
                    for (k, row) in b.iter().enumerate() {
                        if a[i][k].is_zero() || row[j].is_zero() {
                            continue;
                        }
                        acc = acc.arith(&a[i][k].arith(&row[j], RfOp::Mul)?, RfOp::Add)?;
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect()
}

fn first_difference(a: &[Vec<RationalFunction>], b: &[Vec<RationalFunction>]) -> Option<Value> {
    for (i, (ra, rb)) in a.iter().zip(b).enumerate() {
        for (j, (x, y)) in ra.iter().zip(rb).enumerate() {
            if x != y {
                return Some(json!({ "entry": [i, j], "lhs": x.to_string(), "rhs": y.to_string() }));
            }
        }
    }
    None
}

fn identity_report(name: &str, lhs: &[Vec<RationalFunction>], rhs: &[Vec<RationalFunction>]) -> Value {
    match first_difference(lhs, rhs) {
        None => json!({ "identity": name, "ok": true }),
        Some(w) => json!({ "identity": name, "ok": false, "witness": w }),
    }
}

/// Checks h(1/x) h(x) = 1, h(x)h(y) = h(xy-x+1) h(xy/(xy-x+1)) and
/// h(x)h(y) = h(xy), with x = x1 and y = x2.
pub fn h_functional_equation_check(h: &UnivariateMatrix) -> Result<CheckReport> {
    let field = h.entries[0][0].field();
    let n = h.dim();
    let x = RationalFunction::var(field, 2, 0);
    let y = RationalFunction::var(field, 2, 1);
    let one = RationalFunction::one(field, 2);
    let xy = x.arith(&y, RfOp::Mul)?;
    let u = xy.arith(&x, RfOp::Sub)?.arith(&one, RfOp::Add)?;
    let v = xy.arith(&u, RfOp::Div)?;
    let ident: Vec<Vec<RationalFunction>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { one.clone() } else { RationalFunction::zero(field, 2) }).collect())
        .collect();
    let hx = h.at(&x)?;
    let hy = h.at(&y)?;
    let hxhy = mat_mul(&hx, &hy)?;
    let inversion = mat_mul(&h.at(&one.arith(&x, RfOp::Div)?)?, &hx)?;
    let entries = vec![
        identity_report("h(1/x) = h(x)^-1", &inversion, &ident),
        identity_report("h(x)h(y) = h(xy-x+1)h(xy/(xy-x+1))", &hxhy, &mat_mul(&h.at(&u)?, &h.at(&v)?)?),
        identity_report("h(x)h(y) = h(xy)", &hxhy, &h.at(&xy)?),
    ];
    let witness = entries.iter().find(|e| e["ok"] == false).cloned();
    Ok(CheckReport {
        check: "h-equations".into(),
        ok: witness.is_none(),
        witness,
        details: json!({ "identities": entries }),
    })
}
