//! Truncated Laurent series with absolute t-adic precision.
//!
//! A [`LaurentSeries`] is known modulo t^prec. Coefficients are stored from
//! the valuation up to the last nonzero one; the remaining coefficients below
//! `prec` are zero. A series with no nonzero coefficient below `prec` is the
//! explicit "zero within precision" value and has no valuation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{FieldDescriptor, Scalar};

/// Working precision used when none is given.
pub const DEFAULT_PRECISION: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentSeries {
    field: FieldDescriptor,
    valuation: i64,
    coeffs: Vec<Scalar>,
    prec: i64,
}

impl LaurentSeries {
    pub fn zero(field: FieldDescriptor, prec: i64) -> Self {
        LaurentSeries {
            field,
            valuation: prec,
            coeffs: Vec::new(),
            prec,
        }
    }

    /// Series sum c_i t^(start + i) + O(t^prec). Coefficients at or beyond
    /// `prec` are dropped.
    pub fn new(field: FieldDescriptor, start: i64, coeffs: Vec<Scalar>, prec: i64) -> Self {
        let mut s = LaurentSeries {
            field,
            valuation: start,
            coeffs,
            prec,
        };
        s.normalize();
        s
    }

    pub fn from_ints(field: FieldDescriptor, start: i64, coeffs: &[i64], prec: i64) -> Self {
        let c = coeffs.iter().map(|&x| Scalar::from_int(field, x)).collect();
        Self::new(field, start, c, prec)
    }

    pub fn constant(c: Scalar, prec: i64) -> Self {
        let field = c.field();
        Self::new(field, 0, vec![c], prec)
    }

    pub fn one(field: FieldDescriptor, prec: i64) -> Self {
        Self::constant(Scalar::one(field), prec)
    }

    pub fn monomial(c: Scalar, exponent: i64, prec: i64) -> Self {
        let field = c.field();
        Self::new(field, exponent, vec![c], prec)
    }

    fn normalize(&mut self) {
        let keep = (self.prec - self.valuation).max(0) as usize;
        if self.coeffs.len() > keep {
            self.coeffs.truncate(keep);
        }
        while self.coeffs.last().is_some_and(Scalar::is_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.valuation += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.valuation = self.prec;
        }
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    /// Absolute precision: the series is known modulo t^prec.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> Result<i64> {
        if self.is_zero() {
            Err(Error::IndistinguishableFromZero { prec: self.prec })
        } else {
            Ok(self.valuation)
        }
    }

    /// The valuation, or the precision for zero-within-precision values.
    /// This is the lower bound on the true valuation used in precision
    /// propagation.
    pub fn valuation_bound(&self) -> i64 {
        self.valuation
    }

    /// prec - valuation for nonzero series.
    pub fn relative_precision(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.prec - self.valuation)
    }

    /// Stored coefficients, starting at the valuation.
    pub fn stored_coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Coefficient of t^e, or `None` when e is not below the precision.
    pub fn coeff(&self, e: i64) -> Option<Scalar> {
        if e >= self.prec {
            return None;
        }
        let i = e - self.valuation;
        if i < 0 || i as usize >= self.coeffs.len() {
            Some(Scalar::zero(self.field))
        } else {
            Some(self.coeffs[i as usize].clone())
        }
    }

    /// Coefficient of t^e, treating unknown coefficients as zero.
    pub fn coeff_or_zero(&self, e: i64) -> Scalar {
        self.coeff(e).unwrap_or_else(|| Scalar::zero(self.field))
    }

    pub fn leading_coeff(&self) -> Result<&Scalar> {
        self.coeffs
            .first()
            .ok_or(Error::IndistinguishableFromZero { prec: self.prec })
    }

    /// Exponent of the last stored nonzero coefficient.
    pub fn max_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.valuation + self.coeffs.len() as i64 - 1)
    }

    /// True when every coefficient other than the constant one vanishes.
    pub fn is_constant(&self) -> bool {
        self.is_zero() || (self.valuation == 0 && self.coeffs.len() == 1)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff_or_zero(0)
    }

    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        let mut s = self.clone();
        s.prec = prec;
        s.normalize();
        s
    }

    /// Raises the recorded precision. Only valid when the caller knows the
    /// extra coefficients are zero (e.g. for exact Laurent polynomials).
    pub fn with_prec(&self, prec: i64) -> Self {
        let mut s = self.clone();
        if s.is_zero() {
            s.valuation = prec;
        }
        s.prec = prec;
        s.normalize();
        s
    }

    /// Multiplication by t^k, exact.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            field: self.field,
            valuation: self.valuation + k,
            coeffs: self.coeffs.clone(),
            prec: self.prec + k,
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        assert_eq!(self.field, c.field(), "field mismatch in series scaling");
        if c.is_zero() {
            return Self::zero(self.field, self.prec);
        }
        LaurentSeries {
            field: self.field,
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            prec: self.prec,
        }
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            Err(Error::FieldMismatch(self.field, other.field))
        } else {
            Ok(())
        }
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        let prec = self.prec.min(other.prec);
        let lo = self.valuation.min(other.valuation).min(prec);
        let top = self.max_exponent().max(other.max_exponent()).map_or(lo, |e| e + 1);
        let hi = prec.min(top).max(lo);
        let mut out = vec![Scalar::zero(self.field); (hi - lo) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = self.valuation + i as i64;
            if e >= hi {
                break;
            }
            out[(e - lo) as usize] = c.clone();
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            let e = other.valuation + i as i64;
            if e >= hi {
                break;
            }
            let slot = &mut out[(e - lo) as usize];
            *slot = if negate { &*slot - c } else { &*slot + c };
        }
        Self::new(self.field, lo, out, prec)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let prec = (self.prec + other.valuation).min(other.prec + self.valuation);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.field, prec);
        }
        let val = self.valuation + other.valuation;
        let len = (prec - val).max(0) as usize;
        let mut out = vec![Scalar::zero(self.field); len.min(self.coeffs.len() + other.coeffs.len() - 1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= out.len() {
                break;
            }
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= out.len() {
                    break;
                }
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        Self::new(self.field, val, out, prec)
    }

    /// Multiplicative inverse. Relative precision is preserved, so the
    /// absolute precision becomes prec - 2*valuation.
    pub fn invert(&self) -> Result<Self> {
        let v = self.valuation()?;
        let r = self.prec - v;
        let u0_inv = self.coeffs[0].inv()?;
        let mut out: Vec<Scalar> = Vec::with_capacity(r as usize);
        out.push(u0_inv.clone());
        for k in 1..r as usize {
            let mut acc = Scalar::zero(self.field);
            for j in 1..=k.min(self.coeffs.len() - 1) {
                let u = &self.coeffs[j];
                if !u.is_zero() && !out[k - j].is_zero() {
                    acc = &acc + &(u * &out[k - j]);
                }
            }
            out.push(-&(&acc * &u0_inv));
        }
        Ok(Self::new(self.field, -v, out, -v + r))
    }

    /// a(t^p): valuation and precision scale by p.
    pub fn substitute_power(&self, p: u64) -> Self {
        assert!(p >= 1, "substitution exponent must be positive");
        let p = p as i64;
        if self.is_zero() {
            return Self::zero(self.field, self.prec * p);
        }
        if p == 1 {
            return self.clone();
        }
        let mut out = vec![Scalar::zero(self.field); (self.coeffs.len() - 1) * p as usize + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * p as usize] = c.clone();
        }
        LaurentSeries {
            field: self.field,
            valuation: self.valuation * p,
            coeffs: out,
            prec: self.prec * p,
        }
    }

    /// Lowest exponent below the common precision where the two series
    /// differ, or `None` if they agree there.
    pub fn first_mismatch(&self, other: &Self) -> Option<i64> {
        let top = self.max_exponent().max(other.max_exponent()).map_or(i64::MIN, |e| e + 1);
        let hi = self.prec.min(other.prec).min(top);
        let lo = self.valuation.min(other.valuation);
        (lo..hi).find(|&e| self.coeff_or_zero(e) != other.coeff_or_zero(e))
    }

    /// Equality modulo t^(common precision).
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.first_mismatch(other).is_none()
    }

    /// The part with negative exponents, as an exact Laurent polynomial.
    pub fn principal_part(&self) -> Self {
        let n = (-self.valuation).clamp(0, self.coeffs.len() as i64) as usize;
        Self::new(self.field, self.valuation, self.coeffs[..n].to_vec(), self.prec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Sub,
    Mul,
}

/// Checked series arithmetic with precision propagation.
pub fn series_arith(a: &LaurentSeries, b: &LaurentSeries, op: SeriesOp) -> Result<LaurentSeries> {
    a.check_field(b)?;
    Ok(match op {
        SeriesOp::Add => a.add_impl(b, false),
        SeriesOp::Sub => a.add_impl(b, true),
        SeriesOp::Mul => a.mul_impl(b),
    })
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        assert_eq!(self.field, rhs.field, "field mismatch in series addition");
        self.add_impl(rhs, false)
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        assert_eq!(self.field, rhs.field, "field mismatch in series subtraction");
        self.add_impl(rhs, true)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        assert_eq!(self.field, rhs.field, "field mismatch in series multiplication");
        self.mul_impl(rhs)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        LaurentSeries {
            field: self.field,
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.valuation + i as i64;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono = match e {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{e}"),
            };
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{c}*{mono}")?;
            }
        }
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "O(t^{})", self.prec)
    }
}

/// Wire form of a series. The coefficient field is carried by each scalar;
/// zero series take the field from the surrounding document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesJson {
    pub valuation: i64,
    pub prec: i64,
    pub coeffs: Vec<Scalar>,
}

impl SeriesJson {
    pub fn into_series(self, field: FieldDescriptor) -> Result<LaurentSeries> {
        for c in &self.coeffs {
            if c.field() != field {
                return Err(Error::FieldMismatch(field, c.field()));
            }
        }
        if self.coeffs.len() as i64 > self.prec - self.valuation && !self.coeffs.is_empty() {
            return Err(Error::Parse(format!(
                "series stores coefficients beyond its precision {}",
                self.prec
            )));
        }
        Ok(LaurentSeries::new(field, self.valuation, self.coeffs, self.prec))
    }

    pub fn first_field(&self) -> Option<FieldDescriptor> {
        self.coeffs.first().map(Scalar::field)
    }
}

impl From<&LaurentSeries> for SeriesJson {
    fn from(s: &LaurentSeries) -> Self {
        SeriesJson {
            valuation: s.valuation,
            prec: s.prec,
            coeffs: s.coeffs.clone(),
        }
    }
}

impl Serialize for LaurentSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson::from(self).serialize(s)
    }
}
