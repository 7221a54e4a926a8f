//! Small dense linear algebra: a column-major matrix, Householder QR least
//! squares with a rank tolerance, and Cholesky factorization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative rank tolerance: a QR pivot below this times the largest column
/// norm marks the design as rank deficient.
pub const RANK_RTOL: f64 = 1e-10;

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from equally long columns.
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("columns have unequal lengths".into()));
        }
        let data = columns.iter().flat_map(|c| c.iter().copied()).collect();
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidArgument("rows have unequal lengths".into()));
        }
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> {
        (0..self.cols).map(move |j| self.col(j))
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// New matrix holding the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// Appends a column in place.
    pub fn push_column(&mut self, column: &[T]) -> Result<()> {
        if column.len() != self.rows {
            return Err(Error::InvalidArgument(format!(
                "column length {} does not match row count {}",
                column.len(),
                self.rows
            )));
        }
        self.data.extend_from_slice(column);
        self.cols += 1;
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        let mut out = vec![T::zero(); self.rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * vj;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let prod = self.mul_vec(other.col(j));
            out.col_mut(j).copy_from_slice(&prod);
        }
        out
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.rows + i]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc.hypot(x))
}

pub fn sum_squares<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|&x| x * x).sum()
}

/// Householder QR factorization `A = QR` of a tall matrix (rows ≥ cols).
///
/// The factorization itself never fails; zero columns simply produce a zero
/// pivot. Rank is judged afterwards by [`HouseholderQr::check_rank`].
#[derive(Debug, Clone)]
pub struct HouseholderQr<T> {
    /// Upper triangle (off-diagonal) holds R; the lower trapezoid holds the
    /// Householder vectors.
    qr: Matrix<T>,
    r_diag: Vec<T>,
    max_col_norm: T,
}

impl<T: Scalar> HouseholderQr<T> {
    pub fn new(a: Matrix<T>) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        if m < n {
            return Err(Error::InvalidArgument(format!(
                "least squares needs rows >= cols, got {m}x{n}"
            )));
        }
        let max_col_norm = a.columns().map(norm2).fold(T::zero(), T::max);
        let mut qr = a;
        let mut r_diag = vec![T::zero(); n];
        for k in 0..n {
            let mut nrm = norm2(&qr.col(k)[k..]);
            if nrm != T::zero() {
                if qr[(k, k)] < T::zero() {
                    nrm = -nrm;
                }
                for v in &mut qr.col_mut(k)[k..] {
                    *v /= nrm;
                }
                qr[(k, k)] += T::one();
                for j in k + 1..n {
                    let s = dot(&qr.col(k)[k..], &qr.col(j)[k..]);
                    let s = -s / qr[(k, k)];
                    for i in k..m {
                        let h = qr[(i, k)];
                        qr[(i, j)] += s * h;
                    }
                }
            }
            r_diag[k] = -nrm;
        }
        Ok(Self {
            qr,
            r_diag,
            max_col_norm,
        })
    }

    pub fn rows(&self) -> usize {
        self.qr.rows()
    }

    pub fn cols(&self) -> usize {
        self.qr.cols()
    }

    /// Fails with `RankDeficient` if any pivot is at or below
    /// `rtol` times the largest column norm of the factored matrix.
    pub fn check_rank(&self, rtol: T) -> Result<()> {
        let tol = rtol * self.max_col_norm;
        for (k, &d) in self.r_diag.iter().enumerate() {
            if !(d.abs() > tol) {
                return Err(Error::RankDeficient {
                    column: k,
                    pivot: d.abs().as_f64(),
                    tolerance: tol.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Overwrites `y` with `Qᵀ y`.
    pub fn apply_qt(&self, y: &mut [T]) {
        assert_eq!(y.len(), self.rows(), "dimension mismatch in apply_qt");
        for k in 0..self.cols() {
            let hk = self.qr[(k, k)];
            if hk == T::zero() {
                continue;
            }
            let col = &self.qr.col(k)[k..];
            let s = -dot(col, &y[k..]) / hk;
            for (yi, &h) in y[k..].iter_mut().zip(col) {
                *yi += s * h;
            }
        }
    }

    /// R as a dense `cols × cols` upper-triangular matrix.
    pub fn r(&self) -> Matrix<T> {
        let n = self.cols();
        let mut r = Matrix::zeros(n, n);
        for j in 0..n {
            for i in 0..j {
                r[(i, j)] = self.qr[(i, j)];
            }
            r[(j, j)] = self.r_diag[j];
        }
        r
    }

    fn back_substitute(&self, rhs: &[T]) -> Vec<T> {
        let n = self.cols();
        let mut x = rhs[..n].to_vec();
        for k in (0..n).rev() {
            x[k] /= self.r_diag[k];
            let xk = x[k];
            for (i, xi) in x[..k].iter_mut().enumerate() {
                *xi -= xk * self.qr[(i, k)];
            }
        }
        x
    }

    /// Least-squares minimizer of `‖A x − y‖`, assuming full column rank
    /// (call [`check_rank`](Self::check_rank) first).
    pub fn solve(&self, y: &[T]) -> Vec<T> {
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);
        self.back_substitute(&qty)
    }

    /// `(AᵀA)⁻¹ = R⁻¹ R⁻ᵀ`.
    pub fn gram_inverse(&self) -> Matrix<T> {
        let n = self.cols();
        let r_inv = upper_triangular_inverse(&self.r());
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                // rows i and j of R⁻¹; R⁻¹ is upper triangular so start at max(i, j)
                let v: T = (j..n).map(|l| r_inv[(i, l)] * r_inv[(j, l)]).sum();
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

fn upper_triangular_inverse<T: Scalar>(r: &Matrix<T>) -> Matrix<T> {
    let n = r.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = T::one() / r[(j, j)];
        for i in (0..j).rev() {
            let s: T = (i + 1..=j).map(|l| r[(i, l)] * inv[(l, j)]).sum();
            inv[(i, j)] = -s / r[(i, i)];
        }
    }
    inv
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors `a`; a pivot at or below `rtol` times the largest diagonal
    /// entry fails with `NotPositiveDefinite`. Only the lower triangle is read.
    pub fn new(a: &Matrix<T>, rtol: T) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidArgument("Cholesky needs a square matrix".into()));
        }
        let n = a.rows();
        let max_diag = (0..n).map(|i| a[(i, i)]).fold(T::zero(), T::max);
        let tol = rtol * max_diag;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > tol) || !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: d.as_f64(),
                });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn l(&self) -> &Matrix<T> {
        &self.l
    }

    /// `log det A = 2 Σ log L_ii`.
    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        two * (0..self.l.rows()).map(|i| self.l[(i, i)].ln()).sum::<T>()
    }
}
