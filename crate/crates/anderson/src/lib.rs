//! Anderson acceleration for fixed-point iterations.
//!
//! The crate is organized around a small set of pieces:
//!
//! - [`solver`]: the depth-`m` Anderson acceleration loop over an arbitrary
//!   [`FixedPointMap`], driven by a pluggable [`StoppingRule`] and reporting
//!   per-iteration diagnostics (residual norms, optimization gain,
//!   extrapolation coefficients).
//! - [`qr`]: the incrementally updated thin QR factorization backing the
//!   least-squares step (append a column on the right, delete the leftmost
//!   column via plane rotations).
//! - [`nare`]: a neutron-transport Riccati test problem — composite
//!   Gauss–Legendre quadrature, the coupled (u, v) fixed-point map, its
//!   Jacobian, and the residual of the underlying matrix equation.
//! - [`baselines`]: four classical fixed-point iterations for the same
//!   problem (plain, modified, nonlinear block Jacobi / Gauss–Seidel),
//!   sharing the solver's stopping-rule interface.
//! - [`theory`]: convergence-rate computations — the R-factor root equation,
//!   local-convergence condition checks, two-sided residual brackets, and
//!   empirical rate estimation from residual histories.

pub mod baselines;
pub mod linalg;
pub mod nare;
pub mod qr;
pub mod solver;
pub mod theory;

pub use baselines::{baseline_solve, res_criterion, BaselineKind, ResCriterion};
pub use nare::{NareProblem, NareSolution, QuadratureRule};
pub use qr::ThinQr;
pub use solver::{
    aa_solve, AaConfig, FixedPointMap, FnMap, FnormRule, IterRecord, SolveReport, StopContext,
    StopEval, StoppingRule,
};
