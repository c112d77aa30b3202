//! Exact coefficient fields: the rationals and cyclotomic fields Q(zeta_n).
//!
//! An element of Q(zeta_n) is stored as its coordinate vector in the power
//! basis 1, zeta, ..., zeta^(phi(n)-1), reduced modulo the n-th cyclotomic
//! polynomial, so two elements are equal exactly when their coordinates are.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which exact field the coefficients live in. Conductor 1 is the rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldDescriptor {
    conductor: u32,
}

impl FieldDescriptor {
    pub const RATIONALS: FieldDescriptor = FieldDescriptor { conductor: 1 };

    pub fn rationals() -> Self {
        Self::RATIONALS
    }

    pub fn cyclotomic(conductor: u32) -> Result<Self> {
        if conductor == 0 {
            return Err(Error::Parse("cyclotomic conductor must be at least 1".into()));
        }
        Ok(FieldDescriptor { conductor })
    }

    pub fn conductor(self) -> u32 {
        self.conductor
    }

    pub fn is_rationals(self) -> bool {
        self.conductor == 1
    }

    /// Degree over Q, i.e. Euler's phi of the conductor.
    pub fn degree(self) -> usize {
        cyclotomic_poly(self.conductor).len() - 1
    }

    /// Number of roots of unity in the field: lcm(2, n).
    pub fn roots_of_unity_count(self) -> u32 {
        self.conductor.lcm(&2)
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rationals() {
            write!(f, "q")
        } else {
            write!(f, "cyclo:{}", self.conductor)
        }
    }
}

impl FromStr for FieldDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("q") || s.eq_ignore_ascii_case("rationals") {
            return Ok(Self::RATIONALS);
        }
        if let Some(rest) = s.strip_prefix("cyclo:") {
            let n: u32 = rest
                .parse()
                .map_err(|_| Error::Parse(format!("bad conductor in field {s:?}")))?;
            return Self::cyclotomic(n);
        }
        Err(Error::Parse(format!("unknown field {s:?}; expected q or cyclo:N")))
    }
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    kind: String,
    #[serde(default)]
    conductor: Option<u32>,
}

impl Serialize for FieldDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let kind = if self.is_rationals() { "rationals" } else { "cyclotomic" };
        FieldJson {
            kind: kind.into(),
            conductor: Some(self.conductor),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FieldJson::deserialize(d)?;
        match raw.kind.as_str() {
            "rationals" => Ok(FieldDescriptor::RATIONALS),
            "cyclotomic" => {
                let n = raw
                    .conductor
                    .ok_or_else(|| serde::de::Error::custom("cyclotomic field needs a conductor"))?;
                FieldDescriptor::cyclotomic(n).map_err(serde::de::Error::custom)
            }
            other => Err(serde::de::Error::custom(format!("unknown field kind {other:?}"))),
        }
    }
}

type PolyCache = RwLock<HashMap<u32, Arc<Vec<BigInt>>>>;

fn poly_cache() -> &'static PolyCache {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Coefficients (constant term first) of the n-th cyclotomic polynomial,
/// obtained by dividing x^n - 1 by Phi_d for every proper divisor d of n.
pub fn cyclotomic_poly(n: u32) -> Arc<Vec<BigInt>> {
    if let Some(p) = poly_cache().read().unwrap().get(&n) {
        return p.clone();
    }
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            let div = cyclotomic_poly(d);
            num = exact_int_poly_div(&num, &div);
        }
    }
    let p = Arc::new(num);
    poly_cache().write().unwrap().insert(n, p.clone());
    p
}

/// Quotient of integer polynomials when the divisor is monic and divides exactly.
fn exact_int_poly_div(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if !c.is_zero() {
            for (j, dc) in den.iter().enumerate() {
                rem[i + j] -= &c * dc;
            }
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quot
}

/// An exact element of a [`FieldDescriptor`] field.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Scalar {
    field: FieldDescriptor,
    coeffs: Vec<BigRational>,
}

impl Scalar {
    pub fn zero(field: FieldDescriptor) -> Self {
        Scalar {
            field,
            coeffs: vec![BigRational::zero(); field.degree()],
        }
    }

    pub fn one(field: FieldDescriptor) -> Self {
        Self::from_rational(field, BigRational::one())
    }

    pub fn from_int(field: FieldDescriptor, n: i64) -> Self {
        Self::from_rational(field, BigRational::from_integer(n.into()))
    }

    pub fn from_frac(field: FieldDescriptor, num: i64, den: i64) -> Self {
        Self::from_rational(field, BigRational::new(num.into(), den.into()))
    }

    pub fn from_rational(field: FieldDescriptor, q: BigRational) -> Self {
        let mut s = Self::zero(field);
        s.coeffs[0] = q;
        s
    }

    /// Builds sum c_i zeta^i, reducing an arbitrary-length coordinate list.
    pub fn from_coeffs(field: FieldDescriptor, coeffs: Vec<BigRational>) -> Self {
        Scalar {
            field,
            coeffs: reduce(field, coeffs),
        }
    }

    /// The generator zeta_n of the field (1 for the rationals).
    pub fn zeta(field: FieldDescriptor) -> Self {
        let mut c = vec![BigRational::zero(); 2];
        c[1] = BigRational::one();
        Self::from_coeffs(field, c)
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The value as a rational number when it lies in Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check_field(&self, other: &Scalar) -> Result<()> {
        if self.field != other.field {
            Err(Error::FieldMismatch(self.field, other.field))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        self.check_field(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.check_field(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.check_field(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        self.check_field(other)?;
        let inv = other.inv()?;
        Ok(self.mul_unchecked(&inv))
    }

    fn add_unchecked(&self, other: &Scalar) -> Scalar {
        Scalar {
            field: self.field,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    fn sub_unchecked(&self, other: &Scalar) -> Scalar {
        Scalar {
            field: self.field,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    fn mul_unchecked(&self, other: &Scalar) -> Scalar {
        if self.coeffs.len() == 1 {
            return Scalar {
                field: self.field,
                coeffs: vec![&self.coeffs[0] * &other.coeffs[0]],
            };
        }
        if self.is_zero() || other.is_zero() {
            return Scalar::zero(self.field);
        }
        let n = self.coeffs.len();
        let mut prod = vec![BigRational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Scalar {
            field: self.field,
            coeffs: reduce(self.field, prod),
        }
    }

    /// Multiplicative inverse; uses the extended Euclidean algorithm against
    /// the cyclotomic polynomial for proper extensions.
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.coeffs.len() == 1 {
            return Ok(Scalar {
                field: self.field,
                coeffs: vec![self.coeffs[0].recip()],
            });
        }
        let modulus: Vec<BigRational> = cyclotomic_poly(self.field.conductor)
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let inv = qpoly_inverse_mod(&self.coeffs, &modulus);
        Ok(Scalar::from_coeffs(self.field, inv))
    }

    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Scalar::one(self.field);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Image under the Galois automorphism zeta -> zeta^a (a prime to n).
    pub fn galois(&self, a: u32) -> Scalar {
        let n = self.field.conductor as u64;
        if n <= 2 {
            return self.clone();
        }
        let mut c = vec![BigRational::zero(); n as usize];
        for (i, x) in self.coeffs.iter().enumerate() {
            let k = (i as u64 * a as u64 % n) as usize;
            c[k] += x;
        }
        Scalar::from_coeffs(self.field, c)
    }

    /// Ordering used whenever a deterministic choice among field elements is
    /// needed: the rational coordinate ascending, then the remaining
    /// cyclotomic coordinates descending.
    pub fn canonical_cmp(&self, other: &Scalar) -> Ordering {
        self.coeffs[0].cmp(&other.coeffs[0]).then_with(|| {
            for (a, b) in self.coeffs[1..].iter().zip(&other.coeffs[1..]) {
                match b.cmp(a) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

fn reduce(field: FieldDescriptor, mut c: Vec<BigRational>) -> Vec<BigRational> {
    let phi = cyclotomic_poly(field.conductor);
    let d = phi.len() - 1;
    if c.len() > d {
        for i in (d..c.len()).rev() {
            let top = std::mem::take(&mut c[i]);
            if top.is_zero() {
                continue;
            }
            for (j, pc) in phi.iter().enumerate().take(d) {
                if !pc.is_zero() {
                    c[i - d + j] -= &top * pc;
                }
            }
        }
        c.truncate(d);
    }
    c.resize(d, BigRational::zero());
    c
}

fn qpoly_trim(p: &mut Vec<BigRational>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn qpoly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = a.to_vec();
    qpoly_trim(&mut rem);
    let db = b.len() - 1;
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let lead = &b[db];
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + db] / lead;
        if !c.is_zero() {
            for (j, bc) in b.iter().enumerate() {
                rem[i + j] -= &c * bc;
            }
        }
        quot[i] = c;
    }
    qpoly_trim(&mut rem);
    (quot, rem)
}

fn qpoly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn qpoly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out: Vec<BigRational> = (0..n)
        .map(|i| {
            a.get(i).cloned().unwrap_or_else(BigRational::zero)
                - b.get(i).cloned().unwrap_or_else(BigRational::zero)
        })
        .collect();
    qpoly_trim(&mut out);
    out
}

/// u with a*u = 1 mod m, for a prime to m.
fn qpoly_inverse_mod(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    qpoly_trim(&mut r1);
    let (mut s0, mut s1): (Vec<BigRational>, Vec<BigRational>) = (vec![], vec![BigRational::one()]);
    while r1.len() > 1 {
        let (q, r) = qpoly_divmod(&r0, &r1);
        let s2 = qpoly_sub(&s0, &qpoly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
    }
    let c = r1[0].recip();
    s1.into_iter().map(|x| x * &c).collect()
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        assert_eq!(self.field, rhs.field, "field mismatch in scalar addition");
        self.add_unchecked(rhs)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        assert_eq!(self.field, rhs.field, "field mismatch in scalar subtraction");
        self.sub_unchecked(rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        assert_eq!(self.field, rhs.field, "field mismatch in scalar multiplication");
        self.mul_unchecked(rhs)
    }
}

/// Panics on division by zero; use [`Scalar::checked_div`] otherwise.
impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self.checked_div(rhs).expect("scalar division")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            field: self.field,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{q}");
        }
        let mut first = true;
        write!(f, "(")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{mag}*z")?,
                (_, true) => write!(f, "z^{i}")?,
                (_, false) => write!(f, "{mag}*z^{i}")?,
            }
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarJson {
    field: FieldDescriptor,
    coeffs: Vec<[String; 2]>,
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScalarJson {
            field: self.field,
            coeffs: self
                .coeffs
                .iter()
                .map(|q| [q.numer().to_string(), q.denom().to_string()])
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ScalarJson::deserialize(d)?;
        let mut coeffs = Vec::with_capacity(raw.coeffs.len());
        for [n, m] in raw.coeffs {
            let n: BigInt = n.parse().map_err(serde::de::Error::custom)?;
            let m: BigInt = m.parse().map_err(serde::de::Error::custom)?;
            if m.is_zero() {
                return Err(serde::de::Error::custom("zero denominator"));
            }
            coeffs.push(BigRational::new(n, m));
        }
        if coeffs.len() > raw.field.degree() {
            return Err(serde::de::Error::custom(format!(
                "{} coordinates for a field of degree {}",
                coeffs.len(),
                raw.field.degree()
            )));
        }
        Ok(Scalar::from_coeffs(raw.field, coeffs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact field arithmetic with field checking.
pub fn scalar_arith(a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Div => a.checked_div(b),
    }
}

/// A primitive root of unity of the given order. Q(zeta_n) contains exactly
/// the roots of unity of order dividing lcm(2, n).
pub fn root_of_unity(field: FieldDescriptor, order: u32) -> Result<Scalar> {
    let n = field.conductor();
    if order == 0 || field.roots_of_unity_count() % order != 0 {
        return Err(Error::OrderNotAvailable { field, order });
    }
    let z = Scalar::zeta(field);
    if n % order == 0 {
        z.pow((n / order) as i64)
    } else {
        // n odd and order = 2d with d | n: -zeta^(n/d) has order 2d.
        let d = order / 2;
        Ok(-&z.pow((n / d) as i64)?)
    }
}

/// Evaluates a polynomial given by coefficients, constant term first.
pub fn poly_eval(coeffs: &[Scalar], x: &Scalar) -> Scalar {
    let mut acc = Scalar::zero(x.field());
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

/// Synthetic division by (T - r); returns (quotient, remainder).
pub fn poly_div_linear(coeffs: &[Scalar], r: &Scalar) -> (Vec<Scalar>, Scalar) {
    if coeffs.is_empty() {
        return (vec![], Scalar::zero(r.field()));
    }
    let n = coeffs.len();
    let mut q = vec![Scalar::zero(r.field()); n - 1];
    let mut carry = coeffs[n - 1].clone();
    for i in (0..n - 1).rev() {
        q[i] = carry.clone();
        carry = &coeffs[i] + &(&carry * r);
    }
    (q, carry)
}

/// Human-readable form "T^2 - 3*T + 2" for error messages and reports.
pub fn poly_to_string(coeffs: &[Scalar]) -> String {
    let mut terms = Vec::new();
    for (i, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "T".to_string(),
            _ => format!("T^{i}"),
        };
        let t = if mono.is_empty() {
            c.to_string()
        } else if c.is_one() {
            mono
        } else {
            format!("{c}*{mono}")
        };
        terms.push(t);
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// All roots of the polynomial that lie in its coefficient field, with
/// multiplicities, sorted by [`Scalar::canonical_cmp`].
///
/// Only roots of the form q*omega with q rational and omega a root of unity
/// of the field are searched for: for each omega the norm of P(omega*T) is a
/// rational polynomial whose rational roots give the candidates q.
pub fn poly_roots_in_field(coeffs: &[Scalar]) -> Vec<(Scalar, usize)> {
    let mut p: Vec<Scalar> = coeffs.to_vec();
    while p.last().is_some_and(Scalar::is_zero) {
        p.pop();
    }
    if p.len() <= 1 {
        return vec![];
    }
    let field = p[0].field();
    let mut roots: Vec<(Scalar, usize)> = Vec::new();

    let zeros = p.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        roots.push((Scalar::zero(field), zeros));
        p.drain(..zeros);
    }

    let mut candidates: Vec<Scalar> = Vec::new();
    if field.is_rationals() {
        let q: Vec<BigRational> = p.iter().map(|c| c.coeffs[0].clone()).collect();
        for r in rational_roots(&q) {
            candidates.push(Scalar::from_rational(field, r));
        }
    } else {
        let w = field.roots_of_unity_count();
        let omega = root_of_unity(field, w).expect("field contains its own roots of unity");
        let units: Vec<u32> = (1..field.conductor())
            .filter(|a| a.gcd(&field.conductor()) == 1)
            .collect();
        let units = if units.is_empty() { vec![1] } else { units };
        let mut om = Scalar::one(field);
        for _ in 0..w {
            let mut scaled = Vec::with_capacity(p.len());
            let mut pw = Scalar::one(field);
            for c in &p {
                scaled.push(c * &pw);
                pw = &pw * &om;
            }
            let mut norm = vec![Scalar::one(field)];
            for &a in &units {
                let conj: Vec<Scalar> = scaled.iter().map(|c| c.galois(a)).collect();
                norm = scalar_poly_mul(&norm, &conj);
            }
            let q: Vec<BigRational> = norm.iter().map(|c| c.coeffs[0].clone()).collect();
            debug_assert!(norm.iter().all(|c| c.as_rational().is_some()));
            for r in rational_roots(&q) {
                candidates.push(&Scalar::from_rational(field, r) * &om);
            }
            om = &om * &omega;
        }
    }

    candidates.sort_by(|a, b| a.canonical_cmp(b));
    candidates.dedup();
    for r in candidates {
        let mut mult = 0;
        loop {
            let (q, rem) = poly_div_linear(&p, &r);
            if !rem.is_zero() {
                break;
            }
            p = q;
            mult += 1;
        }
        if mult > 0 {
            roots.push((r, mult));
        }
    }
    roots.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    roots
}

fn scalar_poly_mul(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let field = a[0].field();
    let mut out = vec![Scalar::zero(field); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

/// Distinct nonzero rational roots by the rational root theorem.
fn rational_roots(p: &[BigRational]) -> Vec<BigRational> {
    let mut p = p.to_vec();
    qpoly_trim(&mut p);
    if p.len() <= 1 {
        return vec![];
    }
    let start = p.iter().take_while(|c| c.is_zero()).count();
    let p = &p[start..];
    if p.len() <= 1 {
        return vec![];
    }
    let lcm = p
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * &lcm).to_integer()).collect();
    let nums = divisors(&ints[0].abs());
    let dens = divisors(&ints[ints.len() - 1].abs());
    let mut out: Vec<BigRational> = Vec::new();
    for d in &dens {
        for n in &nums {
            for sign in [1, -1] {
                let cand = BigRational::new(n * sign, d.clone());
                if out.contains(&cand) {
                    continue;
                }
                let mut acc = BigRational::zero();
                for c in p.iter().rev() {
                    acc = acc * &cand + c;
                }
                if acc.is_zero() {
                    out.push(cand);
                }
            }
        }
    }
    out
}

/// Positive divisors, by trial division up to 10^6. A cofactor left over
/// after that bound is treated as prime.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut m = n.clone();
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut d = BigInt::from(2u32);
    let limit = BigInt::from(1_000_000u32);
    while &d * &d <= m && d <= limit {
        let mut e = 0;
        while (&m % &d).is_zero() {
            m /= &d;
            e += 1;
        }
        if e > 0 {
            factors.push((d.clone(), e));
        }
        d += 1;
    }
    if m > BigInt::one() {
        factors.push((m, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for dv in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(dv * &pk);
                pk *= &p;
            }
        }
        divs = next;
    }
    divs.sort();
    divs
}

/// Converts a small integer-valued rational to i64 when it fits.
pub fn rational_to_i64(q: &BigRational) -> Option<i64> {
    if q.is_integer() {
        q.to_integer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn cyc(n: u32) -> FieldDescriptor {
        FieldDescriptor::cyclotomic(n).unwrap()
    }

    #[test]
    fn cyclotomic_polys() {
        let as_i64 = |n| -> Vec<i64> {
            cyclotomic_poly(n).iter().map(|c| c.to_i64().unwrap()).collect()
        };
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(3), vec![1, 1, 1]);
        assert_eq!(as_i64(4), vec![1, 0, 1]);
        assert_eq!(as_i64(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyc(15).degree(), 8);
    }

    #[test]
    fn rational_arith() {
        let a = Scalar::from_frac(q(), 1, 2);
        let b = Scalar::from_frac(q(), 1, 3);
        assert_eq!(scalar_arith(&a, &b, ArithOp::Add).unwrap(), Scalar::from_frac(q(), 5, 6));
        assert_eq!(
            scalar_arith(&a, &Scalar::zero(q()), ArithOp::Div),
            Err(Error::DivisionByZero)
        );
        let z = Scalar::zeta(cyc(4));
        assert!(matches!(
            scalar_arith(&a, &z, ArithOp::Mul),
            Err(Error::FieldMismatch(_, _))
        ));
    }

    #[test]
    fn i_squared() {
        let f = cyc(4);
        let i = Scalar::zeta(f);
        assert_eq!(&i * &i, Scalar::from_int(f, -1));
    }

    #[test]
    fn zeta3_product() {
        // (1 + z)(1 + z^2) = 1 + z + z^2 + z^3 = z^3 = 1 using 1 + z + z^2 = 0.
        let f = cyc(3);
        let z = Scalar::zeta(f);
        let one = Scalar::one(f);
        let a = &one + &z;
        let b = &one + &(&z * &z);
        assert_eq!(&a * &b, one);
    }

    #[test]
    fn inverse_in_extension() {
        let f = cyc(5);
        let z = Scalar::zeta(f);
        let a = &(&z + &Scalar::from_int(f, 3)) * &(&z * &z);
        let ai = a.inv().unwrap();
        assert!((&a * &ai).is_one());
    }

    #[test]
    fn roots_of_unity() {
        let f = cyc(12);
        let z = Scalar::zeta(f);
        assert_eq!(root_of_unity(f, 4).unwrap(), z.pow(3).unwrap());
        assert_eq!(root_of_unity(q(), 2).unwrap(), Scalar::from_int(q(), -1));
        assert_eq!(
            root_of_unity(q(), 3),
            Err(Error::OrderNotAvailable { field: q(), order: 3 })
        );
        // Q(zeta_3) contains the primitive 6th roots of unity.
        let w = root_of_unity(cyc(3), 6).unwrap();
        assert!(w.pow(6).unwrap().is_one());
        assert!(!w.pow(2).unwrap().is_one());
        assert!(!w.pow(3).unwrap().is_one());
    }

    #[test]
    fn roots_over_q() {
        let f = q();
        let p = |v: &[i64]| -> Vec<Scalar> { v.iter().map(|&c| Scalar::from_int(f, c)).collect() };
        assert_eq!(
            poly_roots_in_field(&p(&[-1, 0, 1])),
            vec![(Scalar::from_int(f, -1), 1), (Scalar::from_int(f, 1), 1)]
        );
        assert!(poly_roots_in_field(&p(&[1, 0, 1])).is_empty());
        // (T - 2)^2 (2T + 3) T
        let r = poly_roots_in_field(&p(&[0, 12, -4, -5, 2]));
        assert_eq!(
            r,
            vec![
                (Scalar::from_frac(f, -3, 2), 1),
                (Scalar::zero(f), 1),
                (Scalar::from_int(f, 2), 2)
            ]
        );
    }

    #[test]
    fn roots_over_gaussian() {
        let f = cyc(4);
        let i = Scalar::zeta(f);
        let p = vec![Scalar::one(f), Scalar::zero(f), Scalar::one(f)];
        let r = poly_roots_in_field(&p);
        assert_eq!(r.len(), 2);
        assert!(r.contains(&(i.clone(), 1)));
        assert!(r.contains(&(-&i, 1)));
        // The documented ordering puts zeta before -zeta.
        assert_eq!(r[0].0, i);
    }

    #[test]
    fn roots_with_scaled_unit() {
        // T^3 - 8 over Q(zeta_3): roots 2, 2 zeta, 2 zeta^2.
        let f = cyc(3);
        let mut p = vec![Scalar::zero(f); 4];
        p[0] = Scalar::from_int(f, -8);
        p[3] = Scalar::one(f);
        let r = poly_roots_in_field(&p);
        assert_eq!(r.len(), 3);
        for (x, m) in r {
            assert_eq!(m, 1);
            assert!(poly_eval(&p, &x).is_zero());
        }
    }

    #[test]
    fn json_shape() {
        let s = Scalar::from_frac(q(), -5, 6);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"field":{"kind":"rationals","conductor":1},"coeffs":[["-5","6"]]}"#
        );
        let back: Scalar = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
