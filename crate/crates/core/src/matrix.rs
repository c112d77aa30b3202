//! Dense matrices over truncated Laurent series and over exact scalars.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{poly_roots_in_field, FieldDescriptor, Scalar};
use crate::series::{LaurentSeries, SeriesJson};

/// Row-major matrix of Laurent series sharing one coefficient field.
///
/// Cocycle values are square, but rectangular blocks and column vectors use
/// the same type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMatrix {
    field: FieldDescriptor,
    rows: usize,
    cols: usize,
    entries: Vec<LaurentSeries>,
}

impl SeriesMatrix {
    pub fn new(field: FieldDescriptor, rows: usize, cols: usize, entries: Vec<LaurentSeries>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(e) = entries.iter().find(|e| e.field() != field) {
            return Err(Error::FieldMismatch(field, e.field()));
        }
        Ok(SeriesMatrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        field: FieldDescriptor,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> LaurentSeries,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        SeriesMatrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(field: FieldDescriptor, n: usize, prec: i64) -> Self {
        Self::from_fn(field, n, n, |i, j| {
            if i == j {
                LaurentSeries::one(field, prec)
            } else {
                LaurentSeries::zero(field, prec)
            }
        })
    }

    pub fn zero(field: FieldDescriptor, rows: usize, cols: usize, prec: i64) -> Self {
        Self::from_fn(field, rows, cols, |_, _| LaurentSeries::zero(field, prec))
    }

    pub fn from_constant(c: &ConstantMatrix, prec: i64) -> Self {
        Self::from_fn(c.field, c.rows, c.cols, |i, j| {
            LaurentSeries::constant(c.get(i, j).clone(), prec)
        })
    }

    pub fn diagonal(entries: Vec<LaurentSeries>) -> Self {
        let field = entries[0].field();
        let n = entries.len();
        let prec = entries.iter().map(LaurentSeries::prec).max().unwrap_or(0);
        Self::from_fn(field, n, n, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                LaurentSeries::zero(field, prec)
            }
        })
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: LaurentSeries) {
        assert_eq!(v.field(), self.field);
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[LaurentSeries] {
        &self.entries
    }

    /// Smallest absolute precision among the entries.
    pub fn precision(&self) -> i64 {
        self.entries.iter().map(LaurentSeries::prec).min().unwrap_or(i64::MAX)
    }

    pub fn max_precision(&self) -> i64 {
        self.entries.iter().map(LaurentSeries::prec).max().unwrap_or(0)
    }

    /// Smallest valuation among nonzero entries (None if all vanish).
    pub fn min_valuation(&self) -> Option<i64> {
        self.entries.iter().filter_map(|e| e.valuation().ok()).min()
    }

    pub fn truncate(&self, prec: i64) -> Self {
        self.map(|e| e.truncate(prec))
    }

    pub fn map(&self, f: impl Fn(&LaurentSeries) -> LaurentSeries) -> Self {
        SeriesMatrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn substitute_power(&self, p: u64) -> Self {
        self.map(|e| e.substitute_power(p))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map(|e| e.scale(c))
    }

    pub fn shift(&self, k: i64) -> Self {
        self.map(|e| e.shift(k))
    }

    /// Entry-wise coefficient of t^0.
    pub fn constant_term(&self) -> ConstantMatrix {
        ConstantMatrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(LaurentSeries::constant_term).collect(),
        }
    }

    /// True when every entry is constant within its precision.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(LaurentSeries::is_constant)
    }

    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(self.field, r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// Assembles [[a, b], [c, d]].
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        Self::from_fn(a.field, rows, cols, |i, j| match (i < a.rows, j < a.cols) {
            (true, true) => a.get(i, j).clone(),
            (true, false) => b.get(i, j - a.cols).clone(),
            (false, true) => c.get(i - a.rows, j).clone(),
            (false, false) => d.get(i - a.rows, j - a.cols).clone(),
        })
    }

    pub fn column(&self, j: usize) -> Self {
        self.block(0, self.rows, j, j + 1)
    }

    pub fn from_columns(cols: &[SeriesMatrix]) -> Self {
        let field = cols[0].field;
        let rows = cols[0].rows;
        Self::from_fn(field, rows, cols.len(), |i, j| cols[j].get(i, 0).clone())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn mat_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn mat_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    fn zip(&self, other: &Self, f: impl Fn(&LaurentSeries, &LaurentSeries) -> LaurentSeries) -> Self {
        SeriesMatrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        if self.cols != other.rows {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.field, self.rows, other.cols, |i, j| {
            let mut acc = self.get(i, 0) * other.get(0, j);
            for k in 1..self.cols {
                acc = &acc + &(self.get(i, k) * other.get(k, j));
            }
            acc
        }))
    }

    /// Inverse by Gauss-Jordan elimination over the Laurent field, choosing
    /// in each column the pivot of minimal valuation.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimMismatch("inverse of a non-square matrix".into()));
        }
        if let Some(inv) = self.invert_integral() {
            return Ok(inv);
        }
        let n = self.rows;
        let big = self.exactish_precision();
        let rhs = Self::identity(self.field, n, big);
        self.solve(&rhs)
    }

    /// For integral self with invertible constant term: X_0 = A_0^-1 and
    /// X_k = -A_0^-1 (A_1 X_(k-1) + ... + A_k X_0), known modulo t^precision.
    fn invert_integral(&self) -> Option<Self> {
        if self.min_valuation().is_some_and(|v| v < 0) {
            return None;
        }
        let prec = self.precision();
        if prec < 1 || prec > (1 << 20) {
            return None;
        }
        let a0_inv = self.constant_term().inverse().ok()?;
        let (n, field) = (self.rows, self.field);
        let coeff = |k: i64| ConstantMatrix::from_fn(field, n, n, |i, j| self.get(i, j).coeff_or_zero(k));
        let ak: Vec<(usize, ConstantMatrix)> = (1..prec)
            .map(|k| (k as usize, coeff(k)))
            .filter(|(_, m)| !m.is_zero())
            .collect();
        let minus_one = Scalar::from_int(field, -1);
        let mut x = vec![a0_inv.clone()];
        for k in 1..prec as usize {
            let mut acc = ConstantMatrix::zero(field, n, n);
            for (j, aj) in ak.iter().take_while(|(j, _)| *j <= k) {
                acc = &acc + &(aj * &x[k - j]);
            }
            x.push((&a0_inv * &acc).scale(&minus_one));
        }
        Some(Self::from_fn(field, n, n, |i, j| {
            LaurentSeries::new(field, 0, x.iter().map(|m| m.get(i, j).clone()).collect(), prec)
        }))
    }

    /// Precision used for auxiliary exact data (identity columns, etc.):
    /// strictly beyond anything elimination can certify.
    fn exactish_precision(&self) -> i64 {
        let maxp = self.max_precision();
        let minv = self.entries.iter().map(LaurentSeries::valuation_bound).min().unwrap_or(0);
        maxp + 2 * (maxp - minv).max(0) + 16
    }

    /// Solves self * X = rhs for square invertible self.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::DimMismatch("solve needs a square system".into()));
        }
        if self.field != rhs.field {
            return Err(Error::FieldMismatch(self.field, rhs.field));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a: Vec<Vec<LaurentSeries>> = (0..n)
            .map(|i| {
                let mut row: Vec<LaurentSeries> = (0..n).map(|j| self.get(i, j).clone()).collect();
                row.extend((0..m).map(|j| rhs.get(i, j).clone()));
                row
            })
            .collect();
        for k in 0..n {
            let pivot = (k..n)
                .filter_map(|r| a[r][k].valuation().ok().map(|v| (v, r)))
                .min()
                .map(|(_, r)| r)
                .ok_or(Error::SingularWithinPrecision)?;
            a.swap(k, pivot);
            let inv = a[k][k].invert()?;
            for j in k..n + m {
                a[k][j] = &a[k][j] * &inv;
            }
            for r in 0..n {
                if r == k {
                    continue;
                }
                let factor = a[r][k].clone();
                for j in k..n + m {
                    let t = &factor * &a[k][j];
                    a[r][j] = &a[r][j] - &t;
                }
            }
        }
        Ok(Self::from_fn(self.field, n, m, |i, j| a[i][n + j].clone()))
    }

    /// Determinant by elimination; zero within precision when no pivot exists.
    pub fn det(&self) -> Result<LaurentSeries> {
        if !self.is_square() {
            return Err(Error::DimMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a: Vec<Vec<LaurentSeries>> =
            (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut det = LaurentSeries::one(self.field, self.exactish_precision());
        for k in 0..n {
            let Some(pivot) = (k..n)
                .filter_map(|r| a[r][k].valuation().ok().map(|v| (v, r)))
                .min()
                .map(|(_, r)| r)
            else {
                let prec = (k..n).map(|r| a[r][k].prec()).min().unwrap_or(0);
                return Ok(LaurentSeries::zero(self.field, det.valuation_bound() + prec));
            };
            if pivot != k {
                a.swap(k, pivot);
                det = -&det;
            }
            det = &det * &a[k][k];
            let inv = a[k][k].invert()?;
            for r in k + 1..n {
                let factor = &a[r][k] * &inv;
                for j in k..n {
                    let t = &factor * &a[k][j];
                    a[r][j] = &a[r][j] - &t;
                }
            }
        }
        Ok(det)
    }

    /// First entry and exponent where the matrices differ below their
    /// common precision.
    pub fn first_mismatch(&self, other: &Self) -> Option<(usize, usize, i64)> {
        let mut best: Option<(usize, usize, i64)> = None;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if let Some(e) = self.get(i, j).first_mismatch(other.get(i, j)) {
                    if best.is_none_or(|(_, _, b)| e < b) {
                        best = Some((i, j, e));
                    }
                }
            }
        }
        best
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.first_mismatch(other).is_none()
    }
}

impl Mul for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn mul(self, rhs: &SeriesMatrix) -> SeriesMatrix {
        self.mat_mul(rhs).expect("matrix product")
    }
}

impl Add for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn add(self, rhs: &SeriesMatrix) -> SeriesMatrix {
        self.mat_add(rhs).expect("matrix sum")
    }
}

impl Sub for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn sub(self, rhs: &SeriesMatrix) -> SeriesMatrix {
        self.mat_sub(rhs).expect("matrix difference")
    }
}

impl Neg for &SeriesMatrix {
    type Output = SeriesMatrix;
    fn neg(self) -> SeriesMatrix {
        self.map(|e| -e)
    }
}

impl fmt::Display for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesMatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<SeriesJson>>,
}

impl SeriesMatrixJson {
    pub fn first_field(&self) -> Option<FieldDescriptor> {
        self.entries.iter().flatten().find_map(SeriesJson::first_field)
    }

    pub fn into_matrix(self, field: FieldDescriptor) -> Result<SeriesMatrix> {
        if self.entries.len() != self.dim || self.entries.iter().any(|r| r.len() != self.dim) {
            return Err(Error::Parse(format!("matrix entries do not form a {0}x{0} array", self.dim)));
        }
        let n = self.dim;
        let entries = self
            .entries
            .into_iter()
            .flatten()
            .map(|s| s.into_series(field))
            .collect::<Result<Vec<_>>>()?;
        SeriesMatrix::new(field, n, n, entries)
    }
}

impl Serialize for SeriesMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.is_square() {
            return Err(serde::ser::Error::custom("only square matrices are serialized"));
        }
        SeriesMatrixJson {
            dim: self.rows,
            entries: (0..self.rows)
                .map(|i| (0..self.cols).map(|j| SeriesJson::from(self.get(i, j))).collect())
                .collect(),
        }
        .serialize(s)
    }
}

/// Row-major matrix with exact scalar entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConstantMatrix {
    field: FieldDescriptor,
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl ConstantMatrix {
    pub fn new(field: FieldDescriptor, rows: usize, cols: usize, entries: Vec<Scalar>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(e) = entries.iter().find(|e| e.field() != field) {
            return Err(Error::FieldMismatch(field, e.field()));
        }
        Ok(ConstantMatrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(field: FieldDescriptor, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ConstantMatrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn from_ints(field: FieldDescriptor, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(field, r, c, |i, j| Scalar::from_int(field, rows[i][j]))
    }

    pub fn identity(field: FieldDescriptor, n: usize) -> Self {
        Self::from_fn(field, n, n, |i, j| {
            if i == j {
                Scalar::one(field)
            } else {
                Scalar::zero(field)
            }
        })
    }

    pub fn zero(field: FieldDescriptor, rows: usize, cols: usize) -> Self {
        Self::from_fn(field, rows, cols, |_, _| Scalar::zero(field))
    }

    pub fn field(&self) -> FieldDescriptor {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows, self.cols);
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(field: FieldDescriptor, rows: usize, cols: &[Vec<Scalar>]) -> Self {
        Self::from_fn(field, rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(self.field, r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::from_fn(self.field, self.rows, self.cols, |i, j| self.get(i, j) * c)
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        if self.cols != other.rows {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.field, self.rows, other.cols, |i, j| {
            let mut acc = Scalar::zero(self.field);
            for k in 0..self.cols {
                let a = self.get(i, k);
                if !a.is_zero() {
                    acc = &acc + &(a * other.get(k, j));
                }
            }
            acc
        }))
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        (0..self.rows)
            .map(|i| {
                let mut acc = Scalar::zero(self.field);
                for (k, x) in v.iter().enumerate() {
                    acc = &acc + &(self.get(i, k) * x);
                }
                acc
            })
            .collect()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.field, self.rows);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn trace(&self) -> Scalar {
        let mut acc = Scalar::zero(self.field);
        for i in 0..self.rows.min(self.cols) {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        &(self * other) == &(other * self)
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            for j in 0..self.cols {
                m.entries.swap(row * self.cols + j, p * self.cols + j);
            }
            let inv = m.get(row, col).inv().expect("nonzero pivot");
            for j in 0..self.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for r in 0..self.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for j in 0..self.cols {
                    let v = m.get(r, j) - &(&factor * m.get(row, j));
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![Scalar::zero(self.field); self.cols];
                v[fc] = Scalar::one(self.field);
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.get(i, fc);
                }
                v
            })
            .collect()
    }

    /// Basis of the column space, taken from the pivot columns.
    pub fn column_space(&self) -> Vec<Vec<Scalar>> {
        let (_, pivots) = self.rref();
        pivots.iter().map(|&c| self.column(c)).collect()
    }

    /// Some solution of self * x = y, or None if the system is inconsistent.
    pub fn solve_vec(&self, y: &[Scalar]) -> Option<Vec<Scalar>> {
        let aug = Self::from_fn(self.field, self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                y[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Scalar::zero(self.field); self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(i, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = Self::from_fn(self.field, n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                Scalar::one(self.field)
            } else {
                Scalar::zero(self.field)
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::SingularWithinPrecision);
        }
        Ok(r.block(0, n, n, 2 * n))
    }

    pub fn det(&self) -> Scalar {
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Scalar::one(self.field);
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !m.get(r, k).is_zero()) else {
                return Scalar::zero(self.field);
            };
            if p != k {
                for j in 0..n {
                    m.entries.swap(k * n + j, p * n + j);
                }
                det = -&det;
            }
            let piv = m.get(k, k).clone();
            det = &det * &piv;
            let inv = piv.inv().expect("nonzero pivot");
            for r in k + 1..n {
                if m.get(r, k).is_zero() {
                    continue;
                }
                let factor = m.get(r, k) * &inv;
                for j in k..n {
                    let v = m.get(r, j) - &(&factor * m.get(k, j));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    /// Characteristic polynomial det(T*I - A), constant term first, by the
    /// Faddeev-LeVerrier recursion.
    pub fn char_poly(&self) -> Vec<Scalar> {
        let n = self.rows;
        let field = self.field;
        let mut coeffs = vec![Scalar::zero(field); n + 1];
        coeffs[n] = Scalar::one(field);
        let id = Self::identity(field, n);
        let mut m = Self::zero(field, n, n);
        for k in 1..=n {
            m = &(self * &m) + &id.scale(&coeffs[n + 1 - k]);
            let am = self * &m;
            let c = &(-&am.trace()) / &Scalar::from_int(field, k as i64);
            coeffs[n - k] = c;
        }
        coeffs
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }
}

impl Mul for &ConstantMatrix {
    type Output = ConstantMatrix;
    fn mul(self, rhs: &ConstantMatrix) -> ConstantMatrix {
        self.mat_mul(rhs).expect("matrix product")
    }
}

impl Add for &ConstantMatrix {
    type Output = ConstantMatrix;
    fn add(self, rhs: &ConstantMatrix) -> ConstantMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ConstantMatrix::from_fn(self.field, self.rows, self.cols, |i, j| self.get(i, j) + rhs.get(i, j))
    }
}

impl Sub for &ConstantMatrix {
    type Output = ConstantMatrix;
    fn sub(self, rhs: &ConstantMatrix) -> ConstantMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ConstantMatrix::from_fn(self.field, self.rows, self.cols, |i, j| self.get(i, j) - rhs.get(i, j))
    }
}

impl fmt::Display for ConstantMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let r: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantMatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<Scalar>>,
}

impl Serialize for ConstantMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConstantMatrixJson {
            dim: self.rows,
            entries: (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self.get(i, j).clone()).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConstantMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ConstantMatrixJson::deserialize(d)?;
        let n = raw.dim;
        if raw.entries.len() != n || raw.entries.iter().any(|r| r.len() != n) || n == 0 {
            return Err(serde::de::Error::custom("constant matrix is not square"));
        }
        let field = raw.entries[0][0].field();
        ConstantMatrix::new(field, n, n, raw.entries.into_iter().flatten().collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Change of basis splitting `c` into its Fitting decomposition: the first
/// `rank_stable` columns span Im c^N, the rest span ker c^N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableDecomposition {
    pub basis_change: ConstantMatrix,
    pub rank_stable: usize,
}

pub fn stable_decomposition(c: &ConstantMatrix) -> StableDecomposition {
    let n = c.dim();
    let cn = c.pow(n as u32);
    let mut cols = cn.column_space();
    let rank_stable = cols.len();
    cols.extend(cn.kernel());
    StableDecomposition {
        basis_change: ConstantMatrix::from_columns(c.field(), n, &cols),
        rank_stable,
    }
}

/// An eigenpair with eigenvalue in the field, if one exists. The eigenvalue
/// is the least root in [`Scalar::canonical_cmp`] order and the vector is
/// scaled so its first nonzero coordinate is 1.
pub fn eigenvector_in_field(c: &ConstantMatrix) -> Option<(Scalar, Vec<Scalar>)> {
    let roots = poly_roots_in_field(&c.char_poly());
    let (lambda, _) = roots.into_iter().next()?;
    let shifted = c - &ConstantMatrix::identity(c.field(), c.dim()).scale(&lambda);
    let v = shifted.kernel().into_iter().next()?;
    Some((lambda, normalize_vector(v)))
}

/// Scales a nonzero vector so that its first nonzero coordinate is 1.
pub fn normalize_vector(v: Vec<Scalar>) -> Vec<Scalar> {
    let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() else {
        return v;
    };
    let inv = lead.inv().expect("nonzero");
    v.iter().map(|x| x * &inv).collect()
}
