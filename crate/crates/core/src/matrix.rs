//! Dense matrices over a [`Scalar`] field.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};

/// Relative pivot threshold used by float-mode elimination.
const FLOAT_PIVOT_EPS: f64 = 1e-13;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn scalar(x: T) -> Self {
        Self::from_vec(1, 1, vec![x])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    /// `Σ |a_ij|²` in the field itself (exact in exact mode).
    pub fn frobenius_sqr(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, x| acc + x.norm_sqr())
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sqr().to_c64().re.max(0.0).sqrt()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let c0 = cols.start;
        let r0 = rows.start;
        Self::from_fn(rows.len(), cols.len(), |r, c| {
            self[(r0 + r, c0 + c)].clone()
        })
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| {
            self[(rows[r], cols[c])].clone()
        })
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "hstack of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        }))
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "vstack of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self[(r, c)].clone()
            } else {
                other[(r - self.rows, c)].clone()
            }
        }))
    }

    /// `[[tl, tr], [bl, br]]`; block shapes must tile.
    pub fn block(tl: &Self, tr: &Self, bl: &Self, br: &Self) -> Result<Self> {
        tl.hstack(tr)?.vstack(&bl.hstack(br)?)
    }

    pub fn block_diag(a: &Self, b: &Self) -> Self {
        Self::from_fn(a.rows + b.rows, a.cols + b.cols, |r, c| {
            if r < a.rows && c < a.cols {
                a[(r, c)].clone()
            } else if r >= a.rows && c >= a.cols {
                b[(r - a.rows, c - a.cols)].clone()
            } else {
                T::zero()
            }
        })
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{op} of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sum")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "difference")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if b.is_zero() {
                        continue;
                    }
                    let idx = r * other.cols + c;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    /// Integer power of a square matrix.
    pub fn pow(&self, exp: u32) -> Self {
        assert!(self.is_square(), "pow of a non-square matrix");
        let mut acc = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn pivot_ok(candidate: &T, scale: f64) -> bool {
        match T::MODE {
            Mode::Exact => !candidate.is_zero(),
            Mode::Float => candidate.modulus() > FLOAT_PIVOT_EPS * scale.max(f64::MIN_POSITIVE),
        }
    }

    /// Picks the pivot row for column `col` at or below `start`.
    fn find_pivot(&self, start: usize, col: usize) -> Option<usize> {
        match T::MODE {
            Mode::Exact => (start..self.rows).find(|&r| !self[(r, col)].is_zero()),
            Mode::Float => (start..self.rows)
                .map(|r| (r, self[(r, col)].modulus()))
                .filter(|&(_, m)| m > 0.0)
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(r, _)| r),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "inverse of non-square {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let scale = self.max_abs();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = a
                .find_pivot(col, col)
                .filter(|&r| Self::pivot_ok(&a[(r, col)], scale))
                .ok_or_else(|| Error::Singular(format!("no pivot in column {col}")))?;
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let p = a[(col, col)].clone();
            for c in 0..n {
                a[(col, c)] = a[(col, c)].clone() / p.clone();
                inv[(col, c)] = inv[(col, c)].clone() / p.clone();
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for c in 0..n {
                    let da = a[(col, c)].clone() * f.clone();
                    a[(r, c)] = a[(r, c)].clone() - da;
                    let di = inv[(col, c)].clone() * f.clone();
                    inv[(r, c)] = inv[(r, c)].clone() - di;
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by elimination (exact in exact mode).
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "determinant of non-square {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let Some(piv) = a.find_pivot(col, col) else {
                return Ok(T::zero());
            };
            if piv != col {
                a.swap_rows(col, piv);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det = det * p.clone();
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone() / p.clone();
                for c in col..n {
                    let d = a[(col, c)].clone() * f.clone();
                    a[(r, c)] = a[(r, c)].clone() - d;
                }
            }
        }
        Ok(det)
    }

    /// Row-echelon reduction; returns the pivot columns in order.
    ///
    /// Exact mode pivots on any nonzero entry. Float mode uses partial pivoting
    /// and treats entries below `rel_tol · max|a|` as zero.
    pub fn pivot_columns(&self, rel_tol: f64) -> Vec<usize> {
        let mut a = self.clone();
        let threshold = rel_tol * self.max_abs();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(piv) = a.find_pivot(row, col) else {
                continue;
            };
            if T::MODE == Mode::Float && a[(piv, col)].modulus() <= threshold {
                continue;
            }
            a.swap_rows(row, piv);
            let p = a[(row, col)].clone();
            for r in row + 1..self.rows {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone() / p.clone();
                for c in col..self.cols {
                    let d = a[(row, c)].clone() * f.clone();
                    a[(r, c)] = a[(r, c)].clone() - d;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Rank: exact elimination in exact mode, singular values above
    /// `rel_tol · σ₁` in float mode.
    pub fn rank(&self, rel_tol: f64) -> usize {
        match T::MODE {
            Mode::Exact => self.pivot_columns(0.0).len(),
            Mode::Float => {
                let sv = self.singular_values();
                let top = sv.first().copied().unwrap_or(0.0);
                if top == 0.0 {
                    return 0;
                }
                sv.iter().filter(|&&s| s > rel_tol * top).count()
            }
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].to_c64())
    }

    pub fn from_dmatrix(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| T::from_c64(m[(r, c)]))
    }

    /// Singular values in decreasing order (computed in double precision).
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        let mut sv: Vec<f64> = self
            .to_dmatrix()
            .singular_values()
            .iter()
            .copied()
            .collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Operator 2-norm.
    pub fn spectral_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue modulus (double precision).
    pub fn spectral_radius(&self) -> f64 {
        if self.rows == 0 {
            return 0.0;
        }
        let (_, t) = self.to_dmatrix().schur().unpack();
        t.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// JSON as nested rows of `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|r| {
                    Value::Array(
                        (0..self.cols)
                            .map(|c| {
                                let (re, im) = self[(r, c)].to_json_pair();
                                Value::Array(vec![re, im])
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    /// Parses nested rows of `[re, im]` pairs (a bare number or string is a real entry).
    /// `shape` is used when the matrix has zero rows or columns.
    pub fn from_json(v: &Value, shape: (usize, usize)) -> Result<Self> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
        if shape.0 == 0 || shape.1 == 0 {
            let empty_rows = rows.iter().all(|r| r.as_array().is_some_and(Vec::is_empty));
            if !empty_rows {
                return Err(Error::ShapeMismatch("expected an empty matrix".into()));
            }
            return Ok(Self::zeros(shape.0, shape.1));
        }
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
            let mut parsed = Vec::with_capacity(row.len());
            for entry in row {
                parsed.push(match entry {
                    Value::Array(pair) if pair.len() == 2 => T::from_json_pair(&pair[0], &pair[1])?,
                    other => T::from_json_pair(other, &Value::from(0))?,
                });
            }
            out.push(parsed);
        }
        let m = Self::from_rows(out)?;
        if m.shape() != shape {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{}, found {}x{}",
                shape.0,
                shape.1,
                m.rows(),
                m.cols()
            )));
        }
        Ok(m)
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Scalar> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: Self) -> Mat<T> {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<T: Scalar> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: Self) -> Mat<T> {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl<T: Scalar> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: Self) -> Mat<T> {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl<T: Scalar> Neg for &Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        self.map(|x| -x.clone())
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}", self.rows, self.cols)?;
        f.debug_list()
            .entries(self.data.chunks(self.cols.max(1)))
            .finish()
    }
}

impl<T: Scalar> fmt::Display for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows == 1 && self.cols == 1 {
            return write!(f, "{}", self[(0, 0)]);
        }
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
        }
        write!(f, "]")
    }
}

/// Smallest eigenvalue of a Hermitian matrix (double precision).
pub fn hermitian_min_eigenvalue<T: Scalar>(m: &Mat<T>) -> f64 {
    if m.rows() == 0 {
        return 0.0;
    }
    let h = m.to_dmatrix();
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
