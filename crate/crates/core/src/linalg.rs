//! Small dense linear algebra over [`Scalar`]: just enough for the Gramian
//! metric and the numerical controllability test.

use std::ops::{Index, IndexMut, Mul};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not numerically positive definite (pivot {pivot} is {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is numerically singular")]
    Singular,
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
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

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(LinalgError::DimensionMismatch(format!(
                "row {i} has {} entries, expected {cols}",
                r.len()
            )));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, factor: T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// `self + factor * other`, in place.
    fn axpy(&mut self, factor: T, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn norm_frobenius(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Extracts the `rows x cols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Writes `src` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, src: &Self) {
        for i in 0..src.rows {
            for j in 0..src.cols {
                self[(r0 + i, c0 + j)] = src[(i, j)];
            }
        }
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetrized(&self) -> Self {
        let half = T::of(0.5);
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)]) * half
        })
    }

    fn require_square(&self) -> Result<(), LinalgError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Solves `self * X = rhs` by LU factorization with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.require_square()?;
        if rhs.rows != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "rhs has {} rows, expected {}",
                rhs.rows, self.rows
            )));
        }
        let n = self.rows;
        let mut lu = self.clone();
        let mut x = rhs.clone();
        for k in 0..n {
            let pivot_row = (k..n)
                .max_by(|&a, &b| {
                    lu[(a, k)]
                        .abs()
                        .partial_cmp(&lu[(b, k)].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(k);
            let pivot = lu[(pivot_row, k)];
            if pivot == T::zero() || !pivot.is_finite() {
                return Err(LinalgError::Singular);
            }
            if pivot_row != k {
                lu.swap_rows(k, pivot_row);
                x.swap_rows(k, pivot_row);
            }
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                if factor == T::zero() {
                    continue;
                }
                for j in k..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= factor * v;
                }
                for j in 0..x.cols {
                    let v = x[(k, j)];
                    x[(i, j)] -= factor * v;
                }
            }
        }
        for j in 0..x.cols {
            for i in (0..n).rev() {
                let mut acc = x[(i, j)];
                for k in i + 1..n {
                    acc -= lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = acc / lu[(i, i)];
            }
        }
        Ok(x)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Lower-triangular Cholesky factor `L` with `self = L Lᵀ`.
    ///
    /// Only the lower triangle of `self` is read.
    pub fn cholesky(&self) -> Result<Self, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= T::zero() || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite {
                    pivot: j,
                    value: d.to_f64().unwrap_or(f64::NAN),
                });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(l)
    }

    /// `trace(self⁻¹)` for a symmetric positive definite matrix.
    ///
    /// Uses `self = L Lᵀ`, so `trace(self⁻¹) = ‖L⁻¹‖²_F`; each column of
    /// `L⁻¹` comes from a forward solve against a unit vector.
    pub fn spd_trace_inverse(&self) -> Result<T, LinalgError> {
        let l = self.cholesky()?;
        let n = self.rows;
        let mut total = T::zero();
        let mut y = vec![T::zero(); n];
        for col in 0..n {
            y.iter_mut().for_each(|v| *v = T::zero());
            for i in col..n {
                let mut acc = if i == col { T::one() } else { T::zero() };
                for k in col..i {
                    acc -= l[(i, k)] * y[k];
                }
                y[i] = acc / l[(i, i)];
            }
            total += y[col..].iter().map(|&v| v * v).sum::<T>();
        }
        Ok(total)
    }

    /// Singular values in descending order, by one-sided Jacobi rotations.
    ///
    /// Returns `min(rows, cols)` values.
    pub fn singular_values(&self) -> Vec<T> {
        // Orthogonalize the columns of the taller orientation.
        let work = if self.rows >= self.cols {
            self.clone()
        } else {
            self.transpose()
        };
        let (m, n) = (work.rows, work.cols);
        let mut cols: Vec<Vec<T>> = (0..n)
            .map(|j| (0..m).map(|i| work[(i, j)]).collect())
            .collect();
        let eps = T::epsilon();
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha: T = cols[p].iter().map(|&x| x * x).sum();
                    let beta: T = cols[q].iter().map(|&x| x * x).sum();
                    let gamma: T = cols[p].iter().zip(&cols[q]).map(|(&a, &b)| a * b).sum();
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    let (left, right) = cols.split_at_mut(q);
                    for (a, b) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = c * x - s * y;
                        *b = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<T> = cols
            .iter()
            .map(|c| c.iter().map(|&x| x * x).sum::<T>().sqrt())
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        sv
    }

    /// Matrix exponential `e^self` by scaling and squaring around a
    /// diagonal Padé approximant of degree 3, 5, 7, 9 or 13.
    pub fn expm(&self) -> Result<Self, LinalgError> {
        self.require_square()?;
        if !self.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let n = self.rows;
        let ident = Self::identity(n);
        let norm = self.norm_one().to_f64().unwrap_or(f64::INFINITY);

        for &(degree, theta) in &PADE_THETA[..4] {
            if norm <= theta {
                let (u, v) = pade_low(self, &ident, degree);
                let out = v.sub(&u).solve(&v.add(&u))?;
                return finite(out);
            }
        }

        let squarings = if norm > THETA_13 {
            (norm / THETA_13).log2().ceil().max(0.0) as i32
        } else {
            0
        };
        let scaled = self.scale(T::of(2f64.powi(-squarings)));
        let (u, v) = pade13(&scaled, &ident);
        let mut out = v.sub(&u).solve(&v.add(&u))?;
        for _ in 0..squarings {
            out = out.matmul(&out);
        }
        finite(out)
    }
}

fn finite<T: Scalar>(m: Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    if m.is_finite() {
        Ok(m)
    } else {
        Err(LinalgError::NonFinite)
    }
}

const PADE_THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, THETA_13),
];
const THETA_13: f64 = 5.371920351148152e0;

const PADE_B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Odd part `U` and even part `V` of the degree-3..9 Padé numerator.
fn pade_low<T: Scalar>(a: &Matrix<T>, ident: &Matrix<T>, degree: usize) -> (Matrix<T>, Matrix<T>) {
    let b: &[f64] = match degree {
        3 => &PADE_B3,
        5 => &PADE_B5,
        7 => &PADE_B7,
        _ => &PADE_B9,
    };
    let a2 = a.matmul(a);
    let n = a.rows();
    let mut u_inner = ident.scale(T::of(b[1]));
    let mut v = ident.scale(T::of(b[0]));
    let mut power = ident.clone();
    for k in 1..=degree / 2 {
        power = power.matmul(&a2);
        u_inner.axpy(T::of(b[2 * k + 1]), &power);
        v.axpy(T::of(b[2 * k]), &power);
    }
    debug_assert_eq!(u_inner.rows(), n);
    (a.matmul(&u_inner), v)
}

fn pade13<T: Scalar>(a: &Matrix<T>, ident: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let b = |k: usize| T::of(PADE_B13[k]);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut u_high = a6.scale(b(13));
    u_high.axpy(b(11), &a4);
    u_high.axpy(b(9), &a2);
    let mut u_inner = a6.matmul(&u_high);
    u_inner.axpy(b(7), &a6);
    u_inner.axpy(b(5), &a4);
    u_inner.axpy(b(3), &a2);
    u_inner.axpy(b(1), ident);
    let u = a.matmul(&u_inner);

    let mut v_high = a6.scale(b(12));
    v_high.axpy(b(10), &a4);
    v_high.axpy(b(8), &a2);
    let mut v = a6.matmul(&v_high);
    v.axpy(b(6), &a6);
    v.axpy(b(4), &a4);
    v.axpy(b(2), &a2);
    v.axpy(b(0), ident);
    (u, v)
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs)
    }
}
