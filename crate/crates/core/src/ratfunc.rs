//! Multivariate polynomials and rational functions over a scalar field.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{FieldDescriptor, Scalar};

/// Exponent vector, ordered by total degree and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Self) -> Self {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn div(&self, other: &Self) -> Self {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in x1..xn. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    field: FieldDescriptor,
    nvars: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl MultiPoly {
    pub fn zero(field: FieldDescriptor, nvars: usize) -> Self {
        MultiPoly {
            field,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar, nvars: usize) -> Self {
        let mut p = Self::zero(c.field(), nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(field: FieldDescriptor, nvars: usize) -> Self {
        Self::constant(Scalar::one(field), nvars)
    }

    /// The variable x_(i+1).
    pub fn var(field: FieldDescriptor, nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(Scalar::one(field), Monomial(e))
    }

    pub fn monomial(c: Scalar, m: Monomial) -> Self {
        let mut p = Self::zero(c.field(), m.0.len());
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_value(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero(self.field));
        }
        self.is_constant().then(|| self.terms.values().next().expect("nonzero").clone())
    }

    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    /// Same polynomial in more variables.
    pub fn extend_vars(&self, nvars: usize) -> Self {
        assert!(nvars >= self.nvars, "cannot drop variables");
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = m.0.clone();
                e.resize(nvars, 0);
                (Monomial(e), c.clone())
            })
            .collect();
        MultiPoly {
            field: self.field,
            nvars,
            terms,
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        if self.nvars != other.nvars {
            return Err(Error::DimMismatch(format!(
                "polynomials in {} and {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                let s = &*x + &c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *x = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.field, self.nvars);
        }
        MultiPoly {
            field: self.field,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(self.field, self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    /// Formal partial derivative in x_(i+1).
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.field, self.nvars);
        for (m, c) in &self.terms {
            if m.0[i] == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[i] -= 1;
            out.add_term(Monomial(e), c * &Scalar::from_int(self.field, m.0[i] as i64));
        }
        out
    }

    /// Division with remainder by a single divisor; the remainder is zero
    /// exactly when the divisor divides self.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        self.check(d)?;
        let (dm, dc) = d.leading().ok_or(Error::DivisionByZero)?;
        let (dm, dc_inv) = (dm.clone(), dc.inv()?);
        let mut p = self.clone();
        let mut q = Self::zero(self.field, self.nvars);
        let mut r = Self::zero(self.field, self.nvars);
        while let Some((pm, pc)) = p.leading() {
            let (pm, pc) = (pm.clone(), pc.clone());
            if dm.divides(&pm) {
                let m = pm.div(&dm);
                let c = &pc * &dc_inv;
                for (dm2, dc2) in &d.terms {
                    p.add_term(dm2.mul(&m), -&(dc2 * &c));
                }
                q.add_term(m, c);
            } else {
                p.terms.remove(&pm);
                r.add_term(pm, pc);
            }
        }
        Ok((q, r))
    }

    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d).ok()?;
        r.is_zero().then_some(q)
    }

    /// Scales so the leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some((_, c)) => self.scale(&c.inv().expect("nonzero")),
            None => self.clone(),
        }
    }

    /// Componentwise minimum exponent over all terms.
    fn monomial_content(&self) -> Monomial {
        let mut e: Option<Vec<u32>> = None;
        for m in self.terms.keys() {
            e = Some(match e {
                None => m.0.clone(),
                Some(v) => v.iter().zip(&m.0).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        Monomial(e.unwrap_or_else(|| vec![0; self.nvars]))
    }

    fn div_monomial(&self, m: &Monomial) -> Self {
        MultiPoly {
            field: self.field,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, c)| (k.div(m), c.clone())).collect(),
        }
    }

    /// The single variable this polynomial depends on, if any.
    fn sole_variable(&self) -> Option<Option<usize>> {
        let mut var = None;
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    match var {
                        None => var = Some(i),
                        Some(j) if j != i => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(var)
    }

    /// Coefficients with respect to all variables except x_(i+1), as
    /// polynomials in x_(i+1).
    fn coefficients_in(&self, i: usize) -> Vec<MultiPoly> {
        let mut groups: BTreeMap<Vec<u32>, MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut rest = m.0.clone();
            rest[i] = 0;
            let mut only = vec![0; self.nvars];
            only[i] = m.0[i];
            groups
                .entry(rest)
                .or_insert_with(|| Self::zero(self.field, self.nvars))
                .add_term(Monomial(only), c.clone());
        }
        groups.into_values().collect()
    }

    fn gcd_univariate(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("same ring");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// gcd of a polynomial in x_(i+1) alone with an arbitrary polynomial.
    fn gcd_with_univariate(u: &Self, i: usize, p: &Self) -> Self {
        let mut g = u.clone();
        for c in p.coefficients_in(i) {
            if g.is_constant() {
                break;
            }
            g = Self::gcd_univariate(&g, &c);
        }
        g.monic()
    }
}

impl std::ops::Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check(rhs).expect("compatible polynomials");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.check(rhs).expect("compatible polynomials");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl std::ops::Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check(rhs).expect("compatible polynomials");
        let mut out = MultiPoly::zero(self.field, self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a.mul(b), x * y);
            }
        }
        out
    }
}

impl std::ops::Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-&Scalar::one(self.field))
    }
}

fn write_coeff(f: &mut fmt::Formatter<'_>, c: &Scalar, bare: bool) -> fmt::Result {
    if bare {
        write!(f, "{c}")
    } else {
        match c.as_rational() {
            Some(q) if q.is_one() => Ok(()),
            Some(q) if q.is_integer() => write!(f, "{q}*"),
            Some(q) => write!(f, "({q})*"),
            None => write!(f, "{c}*"),
        }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.as_rational().is_some_and(|q| q.is_negative());
            let mag = if neg { -c } else { c.clone() };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{e}", i + 1) })
                .collect();
            if vars.is_empty() {
                write_coeff(f, &mag, true)?;
            } else {
                write_coeff(f, &mag, false)?;
                write!(f, "{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Quotient of polynomials. The denominator is nonzero with leading
/// coefficient 1; common factors are cancelled on a best-effort basis, so
/// equality is decided by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: MultiPoly,
    den: MultiPoly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl RationalFunction {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        num.check(&den)?;
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        let den = MultiPoly::one(p.field, p.nvars);
        RationalFunction { num: p, den }
    }

    pub fn constant(c: Scalar, nvars: usize) -> Self {
        Self::from_poly(MultiPoly::constant(c, nvars))
    }

    pub fn from_int(field: FieldDescriptor, nvars: usize, n: i64) -> Self {
        Self::constant(Scalar::from_int(field, n), nvars)
    }

    pub fn zero(field: FieldDescriptor, nvars: usize) -> Self {
        Self::from_poly(MultiPoly::zero(field, nvars))
    }

    pub fn one(field: FieldDescriptor, nvars: usize) -> Self {
        Self::from_poly(MultiPoly::one(field, nvars))
    }

    pub fn var(field: FieldDescriptor, nvars: usize, i: usize) -> Self {
        Self::from_poly(MultiPoly::var(field, nvars, i))
    }

    /// Identity map images (x1, ..., xn).
    pub fn identity_images(field: FieldDescriptor, nvars: usize) -> Vec<Self> {
        (0..nvars).map(|i| Self::var(field, nvars, i)).collect()
    }

    pub fn numerator(&self) -> &MultiPoly {
        &self.num
    }

    pub fn denominator(&self) -> &MultiPoly {
        &self.den
    }

    pub fn field(&self) -> FieldDescriptor {
        self.num.field
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn constant_value(&self) -> Option<Scalar> {
        let n = self.num.constant_value()?;
        let d = self.den.constant_value()?;
        Some(&n / &d)
    }

    pub fn extend_vars(&self, nvars: usize) -> Self {
        RationalFunction {
            num: self.num.extend_vars(nvars),
            den: self.den.extend_vars(nvars),
        }
    }

    fn reduced(num: MultiPoly, den: MultiPoly) -> Self {
        let field = num.field;
        let n = num.nvars;
        if num.is_zero() {
            return Self::zero(field, n);
        }
        let (mut num, mut den) = (num, den);
        let content = num.monomial_content();
        let shared = Monomial(
            content
                .0
                .iter()
                .zip(&den.monomial_content().0)
                .map(|(a, b)| *a.min(b))
                .collect(),
        );
        if shared.degree() > 0 {
            num = num.div_monomial(&shared);
            den = den.div_monomial(&shared);
        }
        if !den.is_constant() {
            if let Some(q) = num.div_exact(&den) {
                num = q;
                den = MultiPoly::one(field, n);
            } else if let Some(q) = den.div_exact(&num) {
                den = q;
                num = MultiPoly::one(field, n);
            } else {
                let g = match (num.sole_variable(), den.sole_variable()) {
                    (_, Some(Some(i))) => MultiPoly::gcd_with_univariate(&den, i, &num),
                    (Some(Some(i)), _) => MultiPoly::gcd_with_univariate(&num, i, &den),
                    _ => MultiPoly::one(field, n),
                };
                if !g.is_constant() {
                    num = num.div_exact(&g).expect("gcd divides");
                    den = den.div_exact(&g).expect("gcd divides");
                }
            }
        }
        let lead = den.leading().expect("nonzero denominator").1.inv().expect("nonzero");
        RationalFunction {
            num: num.scale(&lead),
            den: den.scale(&lead),
        }
    }

    pub fn arith(&self, other: &Self, op: RfOp) -> Result<Self> {
        self.num.check(&other.num)?;
        let (n1, d1, n2, d2) = (&self.num, &self.den, &other.num, &other.den);
        let (num, den) = match op {
            RfOp::Add | RfOp::Sub => {
                let n2 = if op == RfOp::Sub { -n2 } else { n2.clone() };
                if d1 == d2 {
                    (n1 + &n2, d1.clone())
                } else {
                    (&(n1 * d2) + &(&n2 * d1), d1 * d2)
                }
            }
            RfOp::Mul => (n1 * n2, d1 * d2),
            RfOp::Div => {
                if n2.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                (n1 * d2, d1 * n2)
            }
        };
        Ok(Self::reduced(num, den))
    }

    pub fn inv(&self) -> Result<Self> {
        Self::one(self.field(), self.nvars()).arith(self, RfOp::Div)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs() as u32;
        Ok(RationalFunction {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Formal partial derivative in x_(i+1).
    pub fn derivative(&self, i: usize) -> Self {
        let num = &(&self.num.derivative(i) * &self.den) - &(&self.num * &self.den.derivative(i));
        Self::reduced(num, &self.den * &self.den)
    }

    /// f(images), exact. Images may live in a different number of variables.
    pub fn substitute(&self, images: &[RationalFunction]) -> Result<Self> {
        if images.len() != self.nvars() {
            return Err(Error::DimMismatch(format!(
                "{} images for a function of {} variables",
                images.len(),
                self.nvars()
            )));
        }
        let Some(first) = images.first() else {
            return Ok(self.clone());
        };
        let (field, m) = (first.field(), first.nvars());
        for im in images {
            if im.den.is_zero() {
                return Err(Error::SubstitutionPole);
            }
            im.num.check(&first.num)?;
        }
        if images.iter().all(|im| im.den == first.den) {
            return self.substitute_common_den(images);
        }
        // Powers of each image's numerator and denominator, shared by all terms.
        let top: Vec<u32> = (0..self.nvars())
            .map(|i| self.num.degree_in(i).max(self.den.degree_in(i)))
            .collect();
        let powers = |p: &MultiPoly, k: u32| {
            let mut v = vec![MultiPoly::one(field, m)];
            for _ in 0..k {
                let next = v.last().expect("nonempty") * p;
                v.push(next);
            }
            v
        };
        let num_pows: Vec<Vec<MultiPoly>> = images.iter().zip(&top).map(|(im, &k)| powers(&im.num, k)).collect();
        let den_pows: Vec<Vec<MultiPoly>> = images.iter().zip(&top).map(|(im, &k)| powers(&im.den, k)).collect();
        let eval = |p: &MultiPoly| -> MultiPoly {
            let degs: Vec<u32> = (0..p.nvars).map(|i| p.degree_in(i)).collect();
            let mut out = MultiPoly::zero(field, m);
            for (mono, c) in &p.terms {
                let mut term = MultiPoly::constant(c.clone(), m);
                for i in 0..images.len() {
                    let e = mono.0[i];
                    if e > 0 {
                        term = &term * &num_pows[i][e as usize];
                    }
                    if degs[i] > e {
                        term = &term * &den_pows[i][(degs[i] - e) as usize];
                    }
                }
                out = &out + &term;
            }
            out
        };
        let mut num = eval(&self.num);
        let mut den = eval(&self.den);
        if den.is_zero() {
            return Err(Error::SubstitutionPole);
        }
        for i in 0..images.len() {
            let (dn, dd) = (self.num.degree_in(i), self.den.degree_in(i));
            let e = dn.min(dd);
            if dd > e {
                num = &num * &den_pows[i][(dd - e) as usize];
            }
            if dn > e {
                den = &den * &den_pows[i][(dn - e) as usize];
            }
        }
        Ok(Self::reduced(num, den))
    }

    /// Substitution when every image has the same denominator d: each side
    /// is homogenized with d up to its total degree.
    fn substitute_common_den(&self, images: &[RationalFunction]) -> Result<Self> {
        let d = &images[0].den;
        let (field, m) = (d.field, d.nvars);
        let (dp, dq) = (self.num.total_degree(), self.den.total_degree());
        let top = dp.max(dq);
        let mut d_pows = vec![MultiPoly::one(field, m)];
        for _ in 0..top {
            let next = d_pows.last().expect("nonempty") * d;
            d_pows.push(next);
        }
        let mut num_pows: Vec<Vec<MultiPoly>> = Vec::with_capacity(images.len());
        for im in images {
            let mut v = vec![MultiPoly::one(field, m)];
            for _ in 0..top {
                let next = v.last().expect("nonempty") * &im.num;
                v.push(next);
            }
            num_pows.push(v);
        }
        let eval = |p: &MultiPoly, deg: u32| {
            let mut out = MultiPoly::zero(field, m);
            for (mono, c) in &p.terms {
                let mut term = MultiPoly::constant(c.clone(), m);
                for (i, &e) in mono.0.iter().enumerate() {
                    if e > 0 {
                        term = &term * &num_pows[i][e as usize];
                    }
                }
                term = &term * &d_pows[(deg - mono.degree()) as usize];
                out = &out + &term;
            }
            out
        };
        let (mut num, mut den) = (eval(&self.num, dp), eval(&self.den, dq));
        if dq > dp {
            num = &num * &d_pows[(dq - dp) as usize];
        } else if dp > dq {
            den = &den * &d_pows[(dp - dq) as usize];
        }
        if den.is_zero() {
            return Err(Error::SubstitutionPole);
        }
        Ok(Self::reduced(num, den))
    }

    /// Evaluation at a point; None at a pole.
    pub fn evaluate(&self, point: &[Scalar]) -> Option<Scalar> {
        let ev = |p: &MultiPoly| {
            let mut acc = Scalar::zero(p.field);
            for (m, c) in &p.terms {
                let mut t = c.clone();
                for (x, &e) in point.iter().zip(&m.0) {
                    t = &t * &x.pow(e as i64).ok()?;
                }
                acc = &acc + &t;
            }
            Some(acc)
        };
        let d = ev(&self.den)?;
        if d.is_zero() {
            return None;
        }
        Some(&ev(&self.num)? / &d)
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.num.field == other.num.field
            && self.num.nvars == other.num.nvars
            && &self.num * &other.den == &other.num * &self.den
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let single = |p: &MultiPoly| p.terms.len() <= 1;
        if self.den.constant_value().is_some_and(|c| c.is_one()) {
            return write!(f, "{}", self.num);
        }
        if single(&self.num) {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "({})", self.num)?;
        }
        let plain = self
            .den
            .leading()
            .is_some_and(|(m, c)| c.is_one() && m.0.iter().filter(|&&e| e > 0).count() == 1);
        if single(&self.den) && plain {
            write!(f, "/{}", self.den)
        } else {
            write!(f, "/({})", self.den)
        }
    }
}

impl Serialize for RationalFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn rf_arith(a: &RationalFunction, b: &RationalFunction, op: RfOp) -> Result<RationalFunction> {
    a.arith(b, op)
}

pub fn rf_substitute(f: &RationalFunction, images: &[RationalFunction]) -> Result<RationalFunction> {
    f.substitute(images)
}

/// Composition of maps given by images: (first then second) acting on
/// functions, i.e. the images of `outer` evaluated at `inner`.
pub fn compose_images(outer: &[RationalFunction], inner: &[RationalFunction]) -> Result<Vec<RationalFunction>> {
    outer.iter().map(|f| f.substitute(inner)).collect()
}

fn det(m: &[Vec<RationalFunction>]) -> Result<RationalFunction> {
    let n = m.len();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let field = m[0][0].field();
    let nv = m[0][0].nvars();
    let mut acc = RationalFunction::zero(field, nv);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<RationalFunction>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = m[0][j].arith(&det(&minor)?, RfOp::Mul)?;
        acc = acc.arith(&term, if j % 2 == 0 { RfOp::Add } else { RfOp::Sub })?;
    }
    Ok(acc)
}

/// det(d images_i / d x_j).
pub fn jacobian_det(images: &[RationalFunction]) -> Result<RationalFunction> {
    let n = images.len();
    if n == 0 {
        return Err(Error::DimMismatch("empty map".into()));
    }
    let m: Vec<Vec<RationalFunction>> = images.iter().map(|f| (0..n).map(|j| f.derivative(j)).collect()).collect();
    let d = det(&m)?;
    if d.is_zero() {
        return Err(Error::DegenerateMap);
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigInt),
    Var(usize),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Num(s.parse().expect("digits")));
        } else if c == 'x' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let k: usize = s
                .parse()
                .map_err(|_| Error::Parse(format!("variable at position {start} needs an index, e.g. x1")))?;
            if k == 0 {
                return Err(Error::Parse("variables are numbered from x1".into()));
            }
            out.push(Token::Var(k - 1));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' at position {i}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    field: FieldDescriptor,
    nvars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RationalFunction> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.arith(&self.term()?, RfOp::Add)?;
            } else if self.eat('-') {
                acc = acc.arith(&self.term()?, RfOp::Sub)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.arith(&self.unary()?, RfOp::Mul)?;
            } else if self.eat('/') {
                acc = acc.arith(&self.unary()?, RfOp::Div)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFunction> {
        if self.eat('-') {
            let x = self.unary()?;
            return Ok(x.scale(&Scalar::from_int(self.field, -1)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFunction> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Token::Num(k)) => {
                self.pos += 1;
                let k: i64 = k.try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
                base.pow(if neg { -k } else { k })
            }
            _ => Err(Error::Parse("exponent must be an integer literal".into())),
        }
    }

    fn atom(&mut self) -> Result<RationalFunction> {
        match self.peek().cloned() {
            Some(Token::Num(k)) => {
                self.pos += 1;
                let q = BigRational::from_integer(k);
                Ok(RationalFunction::constant(Scalar::from_rational(self.field, q), self.nvars))
            }
            Some(Token::Var(i)) => {
                self.pos += 1;
                Ok(RationalFunction::var(self.field, self.nvars, i))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of input".into())),
        }
    }
}

/// Parses integers, x1..xn, + - * / ^ (integer exponents) and parentheses.
/// The result has max(nvars, largest index used) variables.
pub fn parse_rational_function(text: &str, nvars: usize, field: FieldDescriptor) -> Result<RationalFunction> {
    let tokens = tokenize(text)?;
    let used = tokens
        .iter()
        .filter_map(|t| match t {
            Token::Var(i) => Some(i + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let mut p = Parser {
        tokens,
        pos: 0,
        field,
        nvars: nvars.max(used),
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldDescriptor {
        FieldDescriptor::rationals()
    }

    fn rf(s: &str, n: usize) -> RationalFunction {
        parse_rational_function(s, n, q()).unwrap()
    }

    #[test]
    fn cancels_to_one() {
        let a = rf("x1/x2", 2).arith(&rf("x2/x1", 2), RfOp::Mul).unwrap();
        assert_eq!(a.constant_value(), Some(Scalar::one(q())));
    }

    #[test]
    fn difference_of_squares() {
        let a = rf("(x1^2-1)/(x1-1)", 1);
        assert_eq!(a, rf("x1+1", 1));
        assert!(a.denominator().is_constant());
    }

    #[test]
    fn sum_of_reciprocals() {
        let a = rf("1/x1 + 1/x2", 2);
        assert_eq!(a, rf("(x1+x2)/(x1*x2)", 2));
        assert_eq!(a.to_string(), "(x1 + x2)/(x1*x2)");
        assert_eq!(rf("x2/x1^2", 2).to_string(), "x2/x1^2");
    }

    #[test]
    fn substitution_examples() {
        let id = RationalFunction::identity_images(q(), 2);
        assert_eq!(rf("x1", 2).substitute(&id).unwrap(), rf("x1", 2));
        let im = vec![rf("1/x1", 2), rf("x2", 2)];
        assert_eq!(rf("x1*x2", 2).substitute(&im).unwrap(), rf("x2/x1", 2));
        let im = vec![rf("(x1-1)/(x1+1)", 1)];
        assert_eq!(rf("x1+1", 1).substitute(&im).unwrap(), rf("2*x1/(x1+1)", 1));
    }

    #[test]
    fn substitution_pole() {
        let im = vec![rf("1", 1)];
        assert!(matches!(rf("1/(x1-1)", 1).substitute(&im), Err(Error::SubstitutionPole)));
    }

    #[test]
    fn jacobians() {
        assert_eq!(jacobian_det(&RationalFunction::identity_images(q(), 3)).unwrap(), rf("1", 3));
        assert_eq!(jacobian_det(&[rf("1/x1", 1)]).unwrap(), rf("-x1^-2", 1));
        let j = jacobian_det(&[rf("x1/(x1-1)", 2), rf("x2/(x1-1)", 2)]).unwrap();
        // d/dx1 (x1/(x1-1)) = -1/(x1-1)^2 and d/dx2 (x2/(x1-1)) = 1/(x1-1).
        assert_eq!(j, rf("-1/(x1-1)^3", 2));
        assert!(matches!(jacobian_det(&[rf("x1", 2), rf("2*x1", 2)]), Err(Error::DegenerateMap)));
    }

    #[test]
    fn division_with_remainder() {
        let a = rf("x1^3*x2 + x1", 2).numerator().clone();
        let d = rf("x1", 2).numerator().clone();
        assert_eq!(a.div_exact(&d).unwrap(), rf("x1^2*x2 + 1", 2).numerator().clone());
        let (_, r) = rf("x1^2 + 1", 1).numerator().div_rem(rf("x1 - 1", 1).numerator()).unwrap();
        assert_eq!(r, MultiPoly::constant(Scalar::from_int(q(), 2), 1));
    }

    #[test]
    fn cancels_univariate_factor_of_multivariate() {
        let a = rf("x2*(x1-1)*(x1+2)/((x1-1)*(x1+3))", 2);
        assert_eq!(a.denominator().total_degree(), 1);
    }

    #[test]
    fn derivative_quotient_rule() {
        assert_eq!(rf("x1^2*x2", 2).derivative(0), rf("2*x1*x2", 2));
        assert_eq!(rf("1/(x1+x2)", 2).derivative(1), rf("-1/(x1+x2)^2", 2));
    }

    #[test]
    fn parse_errors() {
        assert!(parse_rational_function("x1 +", 1, q()).is_err());
        assert!(parse_rational_function("y", 1, q()).is_err());
        assert!(parse_rational_function("x0", 1, q()).is_err());
        assert!(parse_rational_function("(x1", 1, q()).is_err());
    }
}
