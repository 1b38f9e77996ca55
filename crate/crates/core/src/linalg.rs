//! Small dense matrices: products, Gauss–Jordan inversion and a one-sided
//! Jacobi SVD. Alphabets here are tiny, so everything is row-major `Vec`s.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from rows; panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: n_rows, cols: n_cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.rows_iter().map(<[T]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let rows: Vec<&[T]> = idx.iter().map(|&i| self.row(i)).collect();
        Self::from_rows(&rows)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Row vector times matrix: `vᵀ A`.
    pub fn left_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + vi * a;
            }
        }
        out
    }

    /// Kronecker product.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn min_entry(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    /// Inverse of a square matrix by Gauss–Jordan elimination with partial
    /// pivoting. Returns `None` when a pivot falls below the pivot tolerance
    /// relative to the largest entry.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let scale = self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        if scale == T::zero() {
            return None;
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (pivot_row, pivot_val) = (col..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_val <= T::pivot_tol() * scale {
                return None;
            }
            if pivot_row != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot_row * n + j);
                    inv.data.swap(col * n + j, pivot_row * n + j);
                }
            }
            let p = a[(col, col)];
            for j in 0..n {
                a[(col, j)] = a[(col, j)] / p;
                inv[(col, j)] = inv[(col, j)] / p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == T::zero() {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] = a[(r, j)] - f * a[(col, j)];
                    inv[(r, j)] = inv[(r, j)] - f * inv[(col, j)];
                }
            }
        }
        Some(inv)
    }

    /// One-sided Jacobi on the rows of a wide matrix. Returns `(B, Q)` with
    /// `B = Q · self`, `Q` orthogonal and the rows of `B` mutually orthogonal,
    /// so the row norms of `B` are the singular values.
    fn row_jacobi(&self) -> (Self, Self) {
        debug_assert!(self.rows <= self.cols);
        let mut b = self.clone();
        let mut q = Matrix::identity(self.rows);
        let (m, n) = (b.rows, b.cols);
        let eps = T::epsilon();
        let two = T::one() + T::one();
        for _sweep in 0..80 {
            let mut rotated = false;
            for i in 0..m {
                for j in (i + 1)..m {
                    let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                    for k in 0..n {
                        let x = b.data[i * n + k];
                        let y = b.data[j * n + k];
                        alpha = alpha + x * x;
                        beta = beta + y * y;
                        gamma = gamma + x * y;
                    }
                    if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (two * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for (mat, width) in [(&mut b, n), (&mut q, m)] {
                        for k in 0..width {
                            let x = mat.data[i * width + k];
                            let y = mat.data[j * width + k];
                            mat.data[i * width + k] = c * x - s * y;
                            mat.data[j * width + k] = s * x + c * y;
                        }
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        (b, q)
    }

    /// Singular values in descending order (`min(rows, cols)` of them),
    /// computed by one-sided Jacobi rotations, which keeps small singular
    /// values accurate to working precision.
    pub fn singular_values(&self) -> Vec<T> {
        let wide = if self.rows <= self.cols { self.clone() } else { self.transpose() };
        let (b, _) = wide.row_jacobi();
        let mut sv: Vec<T> = b.rows_iter().map(|r| r.iter().map(|&x| x * x).sum::<T>().sqrt()).collect();
        sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
        sv
    }

    /// Right pseudoinverse `A⁺` with `A · A⁺ = I` of a matrix with full row
    /// rank. Built from the Jacobi factors rather than `Aᵀ(AAᵀ)⁻¹`, so the
    /// residual grows with the condition number instead of its square.
    pub fn right_pseudo_inverse(&self) -> Option<Self> {
        if self.rows > self.cols {
            return None;
        }
        let (b, q) = self.row_jacobi();
        let scale: Vec<T> = b.rows_iter().map(|r| r.iter().map(|&x| x * x).sum::<T>()).collect();
        if scale.iter().any(|&s| s.is_nan() || s <= T::zero()) {
            return None;
        }
        let m = self.rows;
        Some(Matrix::from_fn(self.cols, m, |k, j| {
            (0..m).map(|i| b[(i, k)] / scale[i] * q[(i, j)]).sum()
        }))
    }

    /// Spectral norm.
    pub fn op_norm(&self) -> T {
        self.singular_values().first().copied().unwrap_or_else(T::zero)
    }

    /// Number of singular values above `rel_tol` times the largest one.
    pub fn rank(&self, rel_tol: T) -> usize {
        let sv = self.singular_values();
        match sv.first() {
            Some(&top) if top > T::zero() => sv.iter().filter(|&&s| s > rel_tol * top).count(),
            _ => 0,
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn l2_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}
