//! Thin QR factorization of a tall matrix under column updates.
//!
//! [`ThinQr`] represents F = Q R for an n×k matrix F with k ≤ m ≪ n, where Q
//! has k orthonormal columns and R is k×k upper triangular. Two updates are
//! supported, matching how a sliding window of difference columns evolves:
//!
//! - [`ThinQr::append_column`]: orthogonalize a new rightmost column against
//!   Q with a single modified Gram–Schmidt sweep, re-projecting once more if
//!   the column lost more than half its norm ("twice is enough");
//! - [`ThinQr::delete_first_column`]: drop the leftmost column and restore R
//!   to triangular form with a sequence of plane rotations, propagated to Q.
//!
//! Least-squares solves against the represented matrix go through
//! [`ThinQr::solve_upper`]: back-substitution on R γ = Qᵀ rhs.
//!
//! Neither update ever re-touches the full matrix, so a factorization stays
//! accurate only as long as the appended columns are numerically independent;
//! diagonal entries of R below [`DROP_TOL`] (relative to the largest) flag
//! near rank deficiency. Callers are expected to shrink the window and retry
//! rather than solve through a degenerate diagonal.

use thiserror::Error;

use crate::linalg::{axpy, dot, norm2};

/// Relative threshold under which a diagonal entry of R is treated as zero.
pub const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum QrError {
    #[error("column has dimension {got}, factorization is over R^{expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("factorization already holds its capacity of {capacity} columns")]
    CapacityExceeded { capacity: usize },
    #[error("factorization holds no columns")]
    EmptyFactorization,
    #[error("diagonal entry {index} of R is below the drop tolerance")]
    SingularTriangular { index: usize },
    #[error("column is numerically zero after projection; cannot normalize")]
    DegenerateColumn,
}

/// Thin QR factorization with fixed column capacity.
#[derive(Debug, Clone)]
pub struct ThinQr {
    /// Orthonormal columns of Q, each of length `n`.
    q_cols: Vec<Vec<f64>>,
    /// R stored dense row-major at the fixed capacity; entries outside the
    /// leading k×k block are kept at zero.
    r: Vec<f64>,
    n: usize,
    capacity: usize,
}

impl ThinQr {
    /// Empty factorization over R^`n` that can hold up to `capacity` columns.
    pub fn new(n: usize, capacity: usize) -> Self {
        Self {
            q_cols: Vec::with_capacity(capacity),
            r: vec![0.0; capacity * capacity],
            n,
            capacity,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Current number of columns k.
    pub fn ncols(&self) -> usize {
        self.q_cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_cols.is_empty()
    }

    pub fn q_col(&self, i: usize) -> &[f64] {
        &self.q_cols[i]
    }

    /// Entry R[i, j] of the triangular factor.
    pub fn r_entry(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.capacity + j]
    }

    fn r_set(&mut self, i: usize, j: usize, v: f64) {
        self.r[i * self.capacity + j] = v;
    }

    /// Append `col` as the new rightmost column of the represented matrix.
    ///
    /// One modified Gram–Schmidt sweep against the existing basis, followed by
    /// a single classical re-projection pass when the projected remainder lost
    /// more than half the incoming norm. The new diagonal entry is the
    /// remainder's 2-norm (≥ 0 by construction).
    pub fn append_column(&mut self, col: &[f64]) -> Result<(), QrError> {
        if col.len() != self.n {
            return Err(QrError::DimensionMismatch { expected: self.n, got: col.len() });
        }
        let k = self.ncols();
        if k == self.capacity {
            return Err(QrError::CapacityExceeded { capacity: self.capacity });
        }
        let pre_norm = norm2(col);
        let mut w = col.to_vec();
        let mut rvec = vec![0.0; k];
        for (i, q) in self.q_cols.iter().enumerate() {
            let h = dot(q, &w);
            axpy(-h, q, &mut w);
            rvec[i] = h;
        }
        let mut wnorm = norm2(&w);
        if wnorm < 0.5 * pre_norm {
            for (i, q) in self.q_cols.iter().enumerate() {
                let h = dot(q, &w);
                axpy(-h, q, &mut w);
                rvec[i] += h;
            }
            wnorm = norm2(&w);
        }
        if wnorm == 0.0 {
            return Err(QrError::DegenerateColumn);
        }
        for (i, &ri) in rvec.iter().enumerate() {
            self.r_set(i, k, ri);
        }
        self.r_set(k, k, wnorm);
        w.iter_mut().for_each(|x| *x /= wnorm);
        self.q_cols.push(w);
        Ok(())
    }

    /// Remove the leftmost column of the represented matrix.
    ///
    /// R with its first column dropped is upper Hessenberg; plane rotations on
    /// consecutive row pairs restore the triangle and are accumulated into Q,
    /// whose last column then spans nothing and is discarded.
    pub fn delete_first_column(&mut self) -> Result<(), QrError> {
        let k = self.ncols();
        if k == 0 {
            return Err(QrError::EmptyFactorization);
        }
        let cap = self.capacity;
        // Shift R left by one column over the leading k×k block.
        for i in 0..k {
            for j in 0..k - 1 {
                self.r[i * cap + j] = self.r[i * cap + j + 1];
            }
            self.r[i * cap + (k - 1)] = 0.0;
        }
        for j in 0..k.saturating_sub(1) {
            let a = self.r_entry(j, j);
            let b = self.r_entry(j + 1, j);
            let rad = a.hypot(b);
            let (c, s) = if rad == 0.0 { (1.0, 0.0) } else { (a / rad, b / rad) };
            for col in j..k - 1 {
                let y = self.r_entry(j, col);
                let z = self.r_entry(j + 1, col);
                self.r_set(j, col, c * y + s * z);
                self.r_set(j + 1, col, -s * y + c * z);
            }
            // Same rotation applied to Q's columns j and j+1.
            let (left, right) = self.q_cols.split_at_mut(j + 1);
            let qj = left.last_mut().expect("j < k");
            let qj1 = &mut right[0];
            for (x, y) in qj.iter_mut().zip(qj1.iter_mut()) {
                let new_x = c * *x + s * *y;
                let new_y = -s * *x + c * *y;
                *x = new_x;
                *y = new_y;
            }
        }
        self.q_cols.pop();
        // Zero the stale last row of the shrunk block.
        if k >= 1 {
            for j in 0..cap {
                self.r[(k - 1) * cap + j] = 0.0;
            }
        }
        Ok(())
    }

    /// Undo the most recent append. Exact inverse of `append_column` because
    /// appending never alters existing entries of Q or R.
    pub(crate) fn remove_last_column(&mut self) {
        if self.q_cols.pop().is_some() {
            let k = self.ncols();
            for i in 0..=k {
                self.r_set(i, k, 0.0);
            }
        }
    }

    /// True when some diagonal entry of R falls under `DROP_TOL` relative to
    /// the largest diagonal entry.
    pub fn has_degenerate_diagonal(&self) -> bool {
        self.degenerate_index().is_some()
    }

    fn degenerate_index(&self) -> Option<usize> {
        let k = self.ncols();
        if k == 0 {
            return None;
        }
        let max_diag = (0..k).map(|i| self.r_entry(i, i).abs()).fold(0.0, f64::max);
        (0..k).find(|&i| self.r_entry(i, i).abs() < DROP_TOL * max_diag || max_diag == 0.0)
    }

    /// Least-squares coefficients γ minimizing ‖rhs − F γ‖₂ over the
    /// represented matrix F, via back-substitution on R γ = Qᵀ rhs.
    pub fn solve_upper(&self, rhs: &[f64]) -> Result<Vec<f64>, QrError> {
        if rhs.len() != self.n {
            return Err(QrError::DimensionMismatch { expected: self.n, got: rhs.len() });
        }
        if let Some(index) = self.degenerate_index() {
            return Err(QrError::SingularTriangular { index });
        }
        let k = self.ncols();
        let mut gamma: Vec<f64> = self.q_cols.iter().map(|q| dot(q, rhs)).collect();
        for i in (0..k).rev() {
            let mut s = gamma[i];
            for j in i + 1..k {
                s -= self.r_entry(i, j) * gamma[j];
            }
            gamma[i] = s / self.r_entry(i, i);
        }
        Ok(gamma)
    }

    /// out = F γ = Q (R γ), using the factored form.
    pub fn apply(&self, gamma: &[f64], out: &mut [f64]) {
        let k = self.ncols();
        assert_eq!(gamma.len(), k);
        assert_eq!(out.len(), self.n);
        out.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..k {
            let mut ri = 0.0;
            for j in i..k {
                ri += self.r_entry(i, j) * gamma[j];
            }
            axpy(ri, &self.q_cols[i], out);
        }
    }

    /// ‖QᵀQ − I‖∞ (maximum absolute row sum), a direct orthonormality check.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.ncols();
        let mut worst = 0.0f64;
        for i in 0..k {
            let mut row = 0.0;
            for j in 0..k {
                let g = dot(&self.q_cols[i], &self.q_cols[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                row += (g - target).abs();
            }
            worst = worst.max(row);
        }
        worst
    }

    /// Columns of the represented matrix, reconstructed as Q R.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let k = self.ncols();
        (0..k)
            .map(|j| {
                let mut col = vec![0.0; self.n];
                for i in 0..=j {
                    axpy(self.r_entry(i, j), &self.q_cols[i], &mut col);
                }
                col
            })
            .collect()
    }
}
