//! Theory diagnostics for accelerated cells: empirical contraction factors,
//! Jacobian condition data at the computed solution, the observed
//! coefficient-sum bound, and the local-convergence condition report.
//!
//! The explicit ∞-norm inverse keeps this desk-scale: cells with n > 256 are
//! skipped with a note rather than approximated.

use anderson::linalg::Matrix;
use anderson::nare::NareProblem;
use anderson::solver::{FixedPointMap, SolveReport};
use anderson::theory::{check_theorem_conditions, ConditionReport, TheoryParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::runner::CellResult;
use crate::spec::Method;

/// Largest n for which the dense 2n×2n inverse is computed.
pub const THEORY_MAX_N: usize = 256;

#[derive(Debug, Serialize)]
pub struct TheoryCellReport {
    pub method: String,
    pub a: f64,
    pub c: f64,
    pub n: usize,
    /// Contraction factor used in the conditions: the ℓ² operator norm of
    /// the fixed-point Jacobian at the solution, or a sampled ℓ² witness if
    /// larger.
    pub theta_hat: f64,
    /// ∞-norm contraction witness over uniform pairs in [0, 2]^{2n}.
    pub theta_witness_inf: f64,
    /// κ of the residual Jacobian at the solution (∞-norm).
    pub kappa: f64,
    /// ‖J(x̂*)⁻¹‖∞.
    pub inv_norm: f64,
    /// Lipschitz constant c(1+a) of the Jacobian in the ∞-norm.
    pub h_lipschitz: f64,
    /// Running max of Σ|α_j| over the recorded iterations.
    pub m_alpha_observed: f64,
    /// Largest recorded optimization gain.
    pub eta_max: f64,
    /// ‖x₀ − x̂*‖∞ (zero start, so ‖x̂*‖∞).
    pub x0_dist: f64,
    /// Hölder ball radius r_ν.
    pub r_nu: f64,
    /// Acceleration ball radius r̂_ν.
    pub r_hat: f64,
    /// Largest starting distance for which ζ < 1 − τ would hold.
    pub admissible_start_dist: f64,
    /// Condition evaluation at the actual start; `None` when the
    /// root-equation hypotheses fail there.
    pub conditions: Option<ConditionReport>,
    /// Condition evaluation at half the admissible starting distance,
    /// showing the rate root the local statement would certify.
    pub conditions_near: Option<ConditionReport>,
    pub note: String,
}

/// Skipped-cell placeholder.
fn skipped(method: &str, a: f64, c: f64, n: usize, note: &str) -> TheoryCellReport {
    TheoryCellReport {
        method: method.to_string(),
        a,
        c,
        n,
        theta_hat: f64::NAN,
        theta_witness_inf: f64::NAN,
        kappa: f64::NAN,
        inv_norm: f64::NAN,
        h_lipschitz: f64::NAN,
        m_alpha_observed: f64::NAN,
        eta_max: f64::NAN,
        x0_dist: f64::NAN,
        r_nu: f64::NAN,
        r_hat: f64::NAN,
        admissible_start_dist: f64::NAN,
        conditions: None,
        conditions_near: None,
        note: note.to_string(),
    }
}

/// ∞-norm contraction witness over `count` seeded uniform pairs in [0, 2]^d.
pub fn inf_witness(prob: &NareProblem, count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = prob.dim();
    let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..2.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..2.0)).collect();
            (x, y)
        })
        .collect();
    anderson::theory::empirical_contraction(prob, &samples).expect("distinct pairs")
}

/// ℓ² contraction witness over pairs sampled near `center`.
pub fn l2_local_witness(prob: &NareProblem, center: &[f64], count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = prob.dim();
    let mut gx = vec![0.0; d];
    let mut gy = vec![0.0; d];
    let mut worst = 0.0f64;
    for _ in 0..count {
        let x: Vec<f64> = center.iter().map(|c| c + rng.gen_range(-0.5..0.5)).collect();
        let y: Vec<f64> = center.iter().map(|c| c + rng.gen_range(-0.5..0.5)).collect();
        prob.eval(&x, &mut gx);
        prob.eval(&y, &mut gy);
        let num: f64 =
            gx.iter().zip(&gy).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let den: f64 = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    worst
}

/// Jacobian-derived quantities at a point.
#[derive(Debug, Clone, Copy)]
pub struct JacobianData {
    /// ℓ² operator norm of the fixed-point Jacobian I − J.
    pub theta2: f64,
    /// ‖J‖∞ of the residual Jacobian.
    pub norm_inf: f64,
    /// ‖J⁻¹‖∞.
    pub inv_norm_inf: f64,
}

/// Evaluate [`JacobianData`] at `x_star`; `None` when the Jacobian is
/// singular to working precision.
pub fn jacobian_data(prob: &NareProblem, x_star: &[f64]) -> Option<JacobianData> {
    let jac = prob.jacobian(x_star).ok()?;
    let d = prob.dim();
    let mut g = Matrix::identity(d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] -= jac[(i, j)];
        }
    }
    let theta2 = g.norm_2();
    let inv = jac.inverse()?;
    Some(JacobianData { theta2, norm_inf: jac.norm_inf(), inv_norm_inf: inv.norm_inf() })
}

/// Build the theory report for one finished cell.
pub fn theory_report(prob: &NareProblem, method: Method, cell: &CellResult) -> TheoryCellReport {
    let name = method.name();
    let depth = match method {
        Method::Aa { depth } => depth,
        Method::Baseline(_) => {
            return skipped(&name, prob.a, prob.c, prob.n, "baseline method: no gain history")
        }
    };
    if prob.n > THEORY_MAX_N {
        return skipped(&name, prob.a, prob.c, prob.n, "n too large for the explicit inverse");
    }
    let report: &SolveReport = match &cell.report {
        Some(r) if r.converged => r,
        Some(_) => return skipped(&name, prob.a, prob.c, prob.n, "cell did not converge"),
        None => return skipped(&name, prob.a, prob.c, prob.n, "no report kept"),
    };
    let x_star = &report.x_final;
    let Some(jd) = jacobian_data(prob, x_star) else {
        return skipped(&name, prob.a, prob.c, prob.n, "Jacobian singular at the solution");
    };
    let theta_hat = jd.theta2.max(l2_local_witness(prob, x_star, 200, 2024));
    let inv_norm = jd.inv_norm_inf;
    let kappa = jd.norm_inf * inv_norm;
    let m_alpha_observed = report
        .records
        .iter()
        .map(|r| r.alpha.iter().map(|a| a.abs()).sum::<f64>())
        .fold(1.0f64, f64::max);
    let eta_max = report.records.iter().map(|r| r.eta).fold(0.0f64, f64::max);
    let x0_dist = x_star.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let params = TheoryParams {
        nu: 1.0,
        h_nu: prob.c * (1.0 + prob.a),
        theta: theta_hat,
        m_alpha: m_alpha_observed,
        kappa,
        inv_norm,
        x0_dist,
        eta: eta_max.min(1.0),
    };
    let (r_nu, r_hat) = anderson::theory::radii(&params);
    // ζ is linear in the starting distance at ν = 1, so the ζ < 1 − τ
    // hypothesis pins the largest admissible start.
    let zeta_per_dist = anderson::theory::zeta_general(&TheoryParams { x0_dist: 1.0, ..params });
    let admissible_start_dist = (1.0 - params.tau()) / zeta_per_dist;
    let (conditions, note) = match check_theorem_conditions(depth, &params) {
        Ok(report) => (Some(report), String::new()),
        Err(e) => (None, format!("conditions not evaluable: {e}")),
    };
    let conditions_near = check_theorem_conditions(
        depth,
        &TheoryParams { x0_dist: 0.5 * admissible_start_dist, ..params },
    )
    .ok();
    TheoryCellReport {
        method: name,
        a: prob.a,
        c: prob.c,
        n: prob.n,
        theta_hat,
        theta_witness_inf: inf_witness(prob, 200, 7),
        kappa,
        inv_norm,
        h_lipschitz: prob.c * (1.0 + prob.a),
        m_alpha_observed,
        eta_max,
        x0_dist,
        r_nu,
        r_hat,
        admissible_start_dist,
        conditions,
        conditions_near,
        note,
    }
}
