//! Dense vector/matrix helpers shared by the solver and test-problem modules.
//!
//! Everything here operates on plain `&[f64]` slices and row-major matrices;
//! problem sizes are small enough (k ≤ m on the QR side, 2n ≤ a few thousand
//! on the Jacobian side) that hand-rolled kernels are both fast enough and
//! keep the dependency surface minimal.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (yi, row) in y.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *yi = dot(row, x);
        }
    }

    /// C = A B with a cache-friendly i-k-j loop.
    pub fn matmul(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.cols, b.rows);
        let mut c = Matrix::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let crow = c.row_mut(i);
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let brow = b.row(k);
                for (cij, &bkj) in crow.iter_mut().zip(brow) {
                    *cij += aik * bkj;
                }
            }
        }
        c
    }

    pub fn sub(&self, b: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (b.rows, b.cols));
        let data = self.data.iter().zip(&b.data).map(|(x, y)| x - y).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, b: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (b.rows, b.cols));
        let data = self.data.iter().zip(&b.data).map(|(x, y)| x + y).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// Operator ∞-norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks_exact(self.cols.max(1))
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Explicit inverse via LU with partial pivoting. Returns `None` when a
    /// pivot vanishes (singular to working precision).
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut lu = self.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut pivot = col;
            let mut best = lu[col * n + col].abs();
            for r in col + 1..n {
                let v = lu[r * n + col].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    lu.swap(col * n + j, pivot * n + j);
                }
                piv.swap(col, pivot);
            }
            let d = lu[col * n + col];
            for r in col + 1..n {
                let factor = lu[r * n + col] / d;
                lu[r * n + col] = factor;
                for j in col + 1..n {
                    lu[r * n + j] -= factor * lu[col * n + j];
                }
            }
        }
        // Solve A X = I column by column.
        let mut inv = Matrix::zeros(n, n);
        let mut b = vec![0.0; n];
        for e in 0..n {
            for (i, bi) in b.iter_mut().enumerate() {
                *bi = if piv[i] == e { 1.0 } else { 0.0 };
            }
            for i in 0..n {
                for j in 0..i {
                    b[i] -= lu[i * n + j] * b[j];
                }
            }
            for i in (0..n).rev() {
                for j in i + 1..n {
                    b[i] -= lu[i * n + j] * b[j];
                }
                b[i] /= lu[i * n + i];
            }
            for i in 0..n {
                inv[(i, e)] = b[i];
            }
        }
        Some(inv)
    }

    /// Operator 2-norm (largest singular value) by power iteration on AᵀA.
    pub fn norm_2(&self) -> f64 {
        let n = self.cols;
        if n == 0 || self.rows == 0 {
            return 0.0;
        }
        // Deterministic start with a mild ramp so it is not orthogonal to the
        // leading singular vector by symmetry.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) / (n as f64)).collect();
        let nv = norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut av = vec![0.0; self.rows];
        let mut atav = vec![0.0; n];
        let mut sigma = 0.0f64;
        for _ in 0..500 {
            self.matvec(&v, &mut av);
            // atav = Aᵀ (A v)
            atav.iter_mut().for_each(|x| *x = 0.0);
            for (row, &avi) in self.data.chunks_exact(n).zip(&av) {
                for (t, &r) in atav.iter_mut().zip(row) {
                    *t += r * avi;
                }
            }
            let lambda = norm2(&atav);
            if lambda == 0.0 {
                return 0.0;
            }
            let next = lambda.sqrt();
            let done = (next - sigma).abs() <= 1e-14 * next.max(1.0);
            sigma = next;
            for (vi, &t) in v.iter_mut().zip(&atav) {
                *vi = t / lambda;
            }
            if done {
                break;
            }
        }
        sigma
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Inner product with pairwise (recursive halving) summation over an
/// unrolled base case. Deterministic, keeps the rounding error at
/// O(log n · ε) like the BLAS-class kernels, and breaks the dependency
/// chain the compiler cannot reassociate on its own.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    const BASE: usize = 128;
    let n = a.len();
    if n > BASE {
        let mid = n / 2;
        return dot(&a[..mid], &b[..mid]) + dot(&a[mid..], &b[mid..]);
    }
    let mut acc = [0.0f64; 4];
    let mut i = 0;
    while i + 4 <= n {
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
        i += 4;
    }
    let mut tail = 0.0;
    while i < n {
        tail += a[i] * b[i];
        i += 1;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// y += a x.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
