use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major real matrix.
///
/// Constructors that take external data reject empty shapes and non-finite
/// entries; arithmetic on already-valid matrices does not re-check.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
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

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have the same length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(bad) = rows.iter().position(|r| r.as_ref().len() != cols) {
            return Err(Error::InvalidMatrix(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].as_ref().len()
            )));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn column(values: &[T]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrized(&self) -> Self {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let v = (self[(i, j)] + self[(j, i)]) * T::lit(0.5);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    /// Largest `|m_ij - m_ji|` relative to `max(1, max |m_ij|)`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / self.max_abs().max(T::one())
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `xᵀ M x`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        self.matvec(x).iter().zip(x).map(|(&a, &b)| a * b).sum()
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut b = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                b[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        b
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Vertical concatenation `[top; bottom]`.
    pub fn vstack(top: &Self, bottom: &Self) -> Self {
        assert_eq!(top.cols, bottom.cols, "vstack column mismatch");
        let mut data = top.data.clone();
        data.extend_from_slice(&bottom.data);
        Self {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            data,
        }
    }

    /// Horizontal concatenation `[left, right]`.
    pub fn hstack(left: &Self, right: &Self) -> Self {
        assert_eq!(left.rows, right.rows, "hstack row mismatch");
        let mut m = Self::zeros(left.rows, left.cols + right.cols);
        m.set_block(0, 0, left);
        m.set_block(0, left.cols, right);
        m
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::new(self)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.lu()?.inverse()
    }

    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        self.lu()?.solve(rhs)
    }
}

/// Kronecker product: block `(i, j)` of the result is `a_ij · B`.
pub fn kron<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> DenseMatrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DenseMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &DenseMatrix<T> {
    type Output = DenseMatrix<T>;
    fn mul(self, rhs: Self) -> DenseMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> Add for &DenseMatrix<T> {
    type Output = DenseMatrix<T>;
    fn add(self, rhs: Self) -> DenseMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &DenseMatrix<T> {
    type Output = DenseMatrix<T>;
    fn sub(self, rhs: Self) -> DenseMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &DenseMatrix<T> {
    type Output = DenseMatrix<T>;
    fn neg(self) -> DenseMatrix<T> {
        self.map(|x| -x)
    }
}

impl<T: fmt::Debug> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} ", self.rows, self.cols)?;
        f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
    }
}

/// Packed LU factors `PA = LU` with unit-diagonal `L`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    fn new(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidMatrix(format!(
                "LU of non-square {}x{} matrix",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = a.max_abs();
        let tiny = T::epsilon() * T::lit(8.0) * T::from_count(n) * scale;
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= tiny || pivot == T::zero() {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        lu[i * n + j] = lu[i * n + j] - f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    pub fn determinant(&self) -> T {
        (0..self.n).fold(self.sign, |acc, i| acc * self.lu[i * self.n + i])
    }

    /// `log|det|`, robust against over/underflow of the plain product.
    pub fn log_abs_determinant(&self) -> T {
        (0..self.n).map(|i| self.lu[i * self.n + i].abs().ln()).sum()
    }

    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    pub fn solve(&self, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if rhs.rows != self.n {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} rows, system has {}",
                rhs.rows, self.n
            )));
        }
        let mut out = DenseMatrix::zeros(self.n, rhs.cols);
        let mut col = vec![T::zero(); self.n];
        for j in 0..rhs.cols {
            for i in 0..self.n {
                col[i] = rhs[(i, j)];
            }
            for (i, v) in self.solve_vec(&col).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<DenseMatrix<T>> {
        self.solve(&DenseMatrix::identity(self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn rejects_bad_shapes_and_entries() {
        assert!(DenseMatrix::<f64>::from_row_major(0, 2, vec![]).is_err());
        assert!(DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn kron_identity_and_scalar() {
        let i6 = kron(&DenseMatrix::<f64>::identity(2), &DenseMatrix::identity(3));
        assert_eq!(i6, DenseMatrix::identity(6));
        let b = m(&[&[1.0, -2.0], &[0.5, 3.0]]);
        assert_eq!(kron(&m(&[&[2.0]]), &b), b.scale(2.0));
    }

    #[test]
    fn kron_block_layout() {
        let a = m(&[&[1.0, 2.0]]);
        let b = m(&[&[1.0], &[3.0]]);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (2, 2));
        assert_eq!(k.to_rows(), vec![vec![1.0, 2.0], vec![3.0, 6.0]]);
    }

    #[test]
    fn lu_solve_and_determinant() {
        let a = m(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        let lu = a.lu().unwrap();
        assert!((lu.determinant() + 5.0).abs() < 1e-12);
        let x = lu.solve_vec(&[3.0, 2.0, 4.0]);
        let back = a.matvec(&x);
        for (b, e) in back.iter().zip([3.0, 2.0, 4.0]) {
            assert!((b - e).abs() < 1e-12);
        }
        let inv = a.inverse().unwrap();
        let id = &a * &inv;
        assert!((&id - &DenseMatrix::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn lu_detects_singular() {
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(a.lu().unwrap_err(), Error::Singular);
        assert_eq!(m(&[&[0.0]]).lu().unwrap_err(), Error::Singular);
    }

    #[test]
    fn works_in_single_precision() {
        let a = DenseMatrix::<f32>::from_rows(&[[2.0f32, 1.0], [1.0, 3.0]]).unwrap();
        let inv = a.inverse().unwrap();
        assert!((&(&a * &inv) - &DenseMatrix::identity(2)).max_abs() < 1e-6);
    }
}
