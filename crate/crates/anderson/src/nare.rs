//! A transport-theory Riccati test problem posed as a fixed-point system.
//!
//! The matrix equation X C X − X D − A X + B = 0 with
//!
//! ```text
//!   A = Δ − e pᵀ,   B = e eᵀ,   C = p pᵀ,   D = Δ̂ − p eᵀ,
//! ```
//!
//! built from a composite Gauss–Legendre rule on [0, 1] and parameters
//! a ∈ [0, 1), c ∈ (0, 1], has a minimal positive solution of the form
//! X = (u vᵀ) ∘ T with T_ij = 1/(δ_i + δ̂_j), where (u, v) solve the coupled
//! system
//!
//! ```text
//!   u = u ∘ (P v) + e,   v = v ∘ (P̃ u) + e.
//! ```
//!
//! This module builds the quadrature data and the P/P̃ matrices, exposes the
//! stacked map g([u; v]) (and the residual f = g − x) that the solvers
//! iterate, the Jacobian of the residual system, solution recovery, and the
//! relative residual of the original matrix equation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, Matrix};
use crate::solver::FixedPointMap;

#[derive(Debug, Error, PartialEq)]
pub enum NareError {
    #[error("quadrature size must be a positive multiple of 4, got {n}")]
    InvalidSize { n: usize },
    #[error("parameters out of range: need 0 <= a < 1 and 0 < c <= 1, got a={a}, c={c}")]
    ParamOutOfRange { a: f64, c: f64 },
    #[error("expected a vector of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Quadrature nodes and weights on [0, 1]; nodes strictly decreasing with
/// index (ω₁ largest), weights positive and summing to one.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Roots of the degree-4 Legendre polynomial on [−1, 1] by bisection, with
/// the matching weights 2 / ((1 − x²) P₄'(x)²). Computed rather than
/// hard-coded; validity is pinned by the degree-7 exactness tests.
fn gauss_legendre_4() -> ([f64; 4], [f64; 4]) {
    let p4 = |x: f64| (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0;
    let dp4 = |x: f64| (140.0 * x.powi(3) - 60.0 * x) / 8.0;
    let bisect = |mut lo: f64, mut hi: f64| {
        let mut flo = p4(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let fmid = p4(mid);
            if (flo < 0.0) == (fmid < 0.0) {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    // P₄ has positive roots in (0, 0.5) and (0.5, 1).
    let r_inner = bisect(0.0, 0.5);
    let r_outer = bisect(0.5, 1.0);
    let xs = [-r_outer, -r_inner, r_inner, r_outer];
    let mut ws = [0.0; 4];
    for (w, x) in ws.iter_mut().zip(&xs) {
        *w = 2.0 / ((1.0 - x * x) * dp4(*x).powi(2));
    }
    (xs, ws)
}

/// Neumaier compensated sum; keeps the weight normalization honest at large n.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Composite rule: the 4-node Gauss–Legendre rule mapped onto each of the
/// n/4 equal subintervals of [0, 1], weights rescaled so they sum to one
/// exactly, nodes sorted into decreasing order.
pub fn gauss_legendre_composite(n: usize) -> Result<QuadratureRule, NareError> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(NareError::InvalidSize { n });
    }
    let (xs, ws) = gauss_legendre_4();
    let segments = n / 4;
    let h = 4.0 / n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for s in 0..segments {
        let left = s as f64 * h;
        for (x, w) in xs.iter().zip(&ws) {
            nodes.push(left + h * (x + 1.0) / 2.0);
            weights.push(h * w / 2.0);
        }
    }
    let total = compensated_sum(&weights);
    weights.iter_mut().for_each(|w| *w /= total);
    // Ascending by construction; the indexing convention wants ω₁ largest.
    nodes.reverse();
    weights.reverse();
    debug_assert!(nodes.windows(2).all(|p| p[0] > p[1]));
    Ok(QuadratureRule { nodes, weights })
}

/// Serializable description of a problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub a: f64,
    pub c: f64,
    pub n: usize,
}

/// An immutable problem instance: quadrature data, the diagonal vectors
/// δ, δ̂ (strictly increasing), p, and the dense positive matrices P, P̃.
///
/// Safe to share read-only across concurrent solver runs.
#[derive(Debug, Clone)]
pub struct NareProblem {
    pub a: f64,
    pub c: f64,
    pub n: usize,
    pub quadrature: QuadratureRule,
    pub delta: Vec<f64>,
    pub delta_hat: Vec<f64>,
    pub p: Vec<f64>,
    /// P_ij = p_j / (δ_i + δ̂_j), row-major.
    pub p_mat: Matrix,
    /// P̃_ij = p_j / (δ̂_i + δ_j), row-major.
    pub p_tilde: Matrix,
}

/// Recovered solution of the matrix equation.
#[derive(Debug, Clone)]
pub struct NareSolution {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// X_ij = u_i v_j / (δ_i + δ̂_j).
    pub x: Matrix,
}

pub fn build_problem(a: f64, c: f64, n: usize) -> Result<NareProblem, NareError> {
    if !(0.0..1.0).contains(&a) || !(c > 0.0 && c <= 1.0) {
        return Err(NareError::ParamOutOfRange { a, c });
    }
    let quadrature = gauss_legendre_composite(n)?;
    let delta: Vec<f64> =
        quadrature.nodes.iter().map(|w| 1.0 / (c * w * (1.0 + a))).collect();
    let delta_hat: Vec<f64> =
        quadrature.nodes.iter().map(|w| 1.0 / (c * w * (1.0 - a))).collect();
    let p: Vec<f64> = quadrature
        .weights
        .iter()
        .zip(&quadrature.nodes)
        .map(|(ci, wi)| ci / (2.0 * wi))
        .collect();
    let mut p_mat = Matrix::zeros(n, n);
    let mut p_tilde = Matrix::zeros(n, n);
    for i in 0..n {
        let row = p_mat.row_mut(i);
        for j in 0..n {
            row[j] = p[j] / (delta[i] + delta_hat[j]);
        }
        let row = p_tilde.row_mut(i);
        for j in 0..n {
            row[j] = p[j] / (delta_hat[i] + delta[j]);
        }
    }
    let prob = NareProblem { a, c, n, quadrature, delta, delta_hat, p, p_mat, p_tilde };
    debug_assert!(prob.delta.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(prob.delta_hat.windows(2).all(|w| w[0] < w[1]));
    Ok(prob)
}

impl NareProblem {
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self, NareError> {
        build_problem(spec.a, spec.c, spec.n)
    }

    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec { a: self.a, c: self.c, n: self.n }
    }

    /// Stacked dimension 2n of the fixed-point system.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), NareError> {
        if x.len() != 2 * self.n {
            return Err(NareError::DimensionMismatch { expected: 2 * self.n, got: x.len() });
        }
        Ok(())
    }

    /// g([u; v]) = [u ∘ (P v) + e; v ∘ (P̃ u) + e].
    pub fn g_eval(&self, x: &[f64]) -> Result<Vec<f64>, NareError> {
        self.check_dim(x)?;
        let mut out = vec![0.0; 2 * self.n];
        self.g_eval_into(x, &mut out);
        Ok(out)
    }

    fn g_eval_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let (u, v) = x.split_at(n);
        let (ou, ov) = out.split_at_mut(n);
        for (i, oi) in ou.iter_mut().enumerate() {
            *oi = u[i] * dot(self.p_mat.row(i), v) + 1.0;
        }
        for (i, oi) in ov.iter_mut().enumerate() {
            *oi = v[i] * dot(self.p_tilde.row(i), u) + 1.0;
        }
    }

    /// Residual f(x) = g(x) − x of the fixed-point form.
    pub fn f_eval(&self, x: &[f64]) -> Result<Vec<f64>, NareError> {
        let mut g = self.g_eval(x)?;
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi -= xi;
        }
        Ok(g)
    }

    /// Jacobian of the residual system x − g(x) = 0 (whose zeros coincide
    /// with those of `f_eval`), namely I_{2n} − G(u, v) with
    ///
    /// ```text
    ///   G = [ diag(P v)   diag(u) P  ]
    ///       [ diag(v) P̃   diag(P̃ u) ],
    /// ```
    ///
    /// so it equals the identity exactly at x = 0.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix, NareError> {
        self.check_dim(x)?;
        let n = self.n;
        let (u, v) = x.split_at(n);
        let mut jac = Matrix::zeros(2 * n, 2 * n);
        let mut pv = vec![0.0; n];
        let mut ptu = vec![0.0; n];
        self.p_mat.matvec(v, &mut pv);
        self.p_tilde.matvec(u, &mut ptu);
        for i in 0..n {
            let row = jac.row_mut(i);
            row[i] = 1.0 - pv[i];
            let prow = self.p_mat.row(i);
            for j in 0..n {
                row[n + j] = -u[i] * prow[j];
            }
            let row = jac.row_mut(n + i);
            row[n + i] = 1.0 - ptu[i];
            let ptrow = self.p_tilde.row(i);
            for j in 0..n {
                row[j] = -v[i] * ptrow[j];
            }
        }
        Ok(jac)
    }

    /// X = (u vᵀ) ∘ T with T_ij = 1/(δ_i + δ̂_j).
    pub fn recover_solution(&self, u: &[f64], v: &[f64]) -> NareSolution {
        let n = self.n;
        assert_eq!(u.len(), n);
        assert_eq!(v.len(), n);
        let mut x = Matrix::zeros(n, n);
        for i in 0..n {
            let row = x.row_mut(i);
            for j in 0..n {
                row[j] = u[i] * v[j] / (self.delta[i] + self.delta_hat[j]);
            }
        }
        NareSolution { u: u.to_vec(), v: v.to_vec(), x }
    }

    /// Split a converged stacked iterate and recover X.
    pub fn recover_from_stacked(&self, x: &[f64]) -> Result<NareSolution, NareError> {
        self.check_dim(x)?;
        let (u, v) = x.split_at(self.n);
        Ok(self.recover_solution(u, v))
    }

    /// Coefficient matrices of the underlying equation, assembled dense on
    /// demand (each is O(n²) memory).
    pub fn coefficient_matrices(&self) -> (Matrix, Matrix, Matrix, Matrix) {
        let n = self.n;
        let mut a = Matrix::zeros(n, n);
        let mut b = Matrix::zeros(n, n);
        let mut c = Matrix::zeros(n, n);
        let mut d = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = if i == j { self.delta[i] } else { 0.0 } - self.p[j];
                b[(i, j)] = 1.0;
                c[(i, j)] = self.p[i] * self.p[j];
                d[(i, j)] = if i == j { self.delta_hat[i] } else { 0.0 } - self.p[i];
            }
        }
        (a, b, c, d)
    }

    /// Relative residual ‖X C X − X D − A X + B‖∞ / ‖B‖∞ of the matrix
    /// equation, evaluated with dense products of the assembled coefficients.
    pub fn nare_residual(&self, x: &Matrix) -> Result<f64, NareError> {
        if x.nrows() != self.n || x.ncols() != self.n {
            return Err(NareError::DimensionMismatch { expected: self.n, got: x.nrows() });
        }
        let (a, b, c, d) = self.coefficient_matrices();
        let cx = c.matmul(x);
        let xcx = x.matmul(&cx);
        let xd = x.matmul(&d);
        let ax = a.matmul(x);
        let residual = xcx.sub(&xd).sub(&ax).add(&b);
        Ok(residual.norm_inf() / b.norm_inf())
    }

    /// Solution entries as CSV, row-major with header `i,j,value`.
    pub fn x_to_csv(x: &Matrix) -> String {
        let mut out = String::from("i,j,value\n");
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                out.push_str(&format!("{},{},{}\n", i, j, x[(i, j)]));
            }
        }
        out
    }
}

impl FixedPointMap for NareProblem {
    fn dim(&self) -> usize {
        2 * self.n
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.g_eval_into(x, out);
    }
}
