//! Convergence-rate computations for accelerated fixed-point iterations.
//!
//! For a map with contraction factor θ, optimization gain η, Hölder exponent
//! ν and constant H_ν on the Jacobian of the residual, the R-linear rate of
//! the depth-m iteration is characterized by the unique root q of
//!
//! ```text
//!   q^{m+1} − τ q^m − ζ = 0,   τ = θ η,
//! ```
//!
//! in (mτ/(m+1), 1), where ζ collects the problem constants (condition
//! number, inverse-Jacobian norm, and the ν-th power of the starting
//! distance). This module solves that root equation, evaluates the two
//! sufficient conditions of the local-convergence statement, computes the
//! convergence-ball radii, the two-sided bracket tying ‖f(x)‖ to
//! ‖x − x*‖, the refined depth-1 residual bound, and finite-sample
//! estimates (R-factor from a residual history, contraction witness from
//! sampled pairs).

use serde::Serialize;
use thiserror::Error;

use crate::solver::FixedPointMap;

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    #[error("root equation hypotheses violated: need tau in (0,1) and 0 <= zeta < 1 - tau, got tau={tau}, zeta={zeta}")]
    HypothesisViolated { tau: f64, zeta: f64 },
    #[error("probe distance {dist} is not inside the Hoelder ball of radius {radius}")]
    OutsideBall { dist: f64, radius: f64 },
    #[error("depth-1 coefficient is zero while the gain is below one")]
    DegenerateAlpha,
    #[error("sample pair is degenerate (x = y)")]
    DegeneratePair,
    #[error("residual history too short or starts at zero")]
    EmptyHistory,
}

/// Constants feeding the condition evaluator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoryParams {
    /// Hölder exponent ν ∈ (0, 1]; ν = 1 is the Lipschitz case.
    pub nu: f64,
    /// Hölder constant H_ν > 0.
    pub h_nu: f64,
    /// Contraction factor θ ∈ (0, 1).
    pub theta: f64,
    /// Bound M_α ≥ 1 on Σ|α_j| over all iterations.
    pub m_alpha: f64,
    /// Condition number κ(f'(x*)) ≥ 1.
    pub kappa: f64,
    /// ‖f'(x*)⁻¹‖ > 0.
    pub inv_norm: f64,
    /// ‖x₀ − x*‖ ≥ 0.
    pub x0_dist: f64,
    /// Optimization gain η ∈ [0, 1] entering τ = θη.
    pub eta: f64,
}

impl TheoryParams {
    pub fn tau(&self) -> f64 {
        self.theta * self.eta
    }
}

/// Root of the rate equation together with its bracket and defect.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RootResult {
    pub q: f64,
    /// Open interval (mτ/(m+1), 1) guaranteed to contain the root.
    pub bracket: (f64, f64),
    /// |q^{m+1} − τ q^m − ζ| at the returned root.
    pub poly_residual: f64,
}

/// Outcome of the sufficient-condition check.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub zeta: f64,
    pub tau: f64,
    pub root: RootResult,
    /// ζ < 1 − τ.
    pub zeta_condition: bool,
    /// ((2+ν)/ν) q M_α κ ≤ 1 (equals q M_α κ ≤ 1/3 when ν = 1).
    pub q_condition: bool,
    pub satisfied: bool,
    /// The statement also assumes the first m residuals already decay like
    /// q^ℓ‖f(x₀)‖; that premise is not checkable here and is reported as
    /// assumed.
    pub assumed_history_decay: bool,
}

/// Solve q^{m+1} − τ q^m − ζ = 0 for the unique root in (mτ/(m+1), 1) by
/// bisection to machine resolution. For m = 1 the closed form
/// q = (τ + √(τ² + 4ζ))/2 is cross-checked in debug builds.
pub fn solve_q(m: usize, tau: f64, zeta: f64) -> Result<RootResult, TheoryError> {
    if m < 1 || !(tau > 0.0 && tau < 1.0) || !(zeta >= 0.0 && zeta < 1.0 - tau) {
        return Err(TheoryError::HypothesisViolated { tau, zeta });
    }
    let poly = |q: f64| q.powi(m as i32 + 1) - tau * q.powi(m as i32) - zeta;
    let lo0 = m as f64 * tau / (m as f64 + 1.0);
    let (mut lo, mut hi) = (lo0, 1.0);
    // poly(lo) < 0 < poly(hi) on the open bracket.
    let mut flo = poly(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fmid = poly(mid);
        if (flo < 0.0) == (fmid < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    // Keep whichever endpoint evaluates closer to zero.
    let q = if poly(lo).abs() <= poly(hi).abs() { lo } else { hi };
    if m == 1 {
        let closed = (tau + (tau * tau + 4.0 * zeta).sqrt()) / 2.0;
        debug_assert!((closed - q).abs() <= 1e-14, "bisection {q} vs closed form {closed}");
    }
    Ok(RootResult { q, bracket: (lo0, 1.0), poly_residual: poly(q).abs() })
}

/// ζ = (2+ν)^ν H_ν M_α (1 + M_α^ν) / ν^{1+ν} · κ ‖f'(x*)⁻¹‖ ‖x₀ − x*‖^ν.
///
/// At ν = 1 this reduces to 3 H₁ M_α (1 + M_α) κ ‖f'(x*)⁻¹‖ ‖x₀ − x*‖.
pub fn zeta_general(p: &TheoryParams) -> f64 {
    let nu = p.nu;
    (2.0 + nu).powf(nu) * p.h_nu * p.m_alpha * (1.0 + p.m_alpha.powf(nu)) / nu.powf(1.0 + nu)
        * p.kappa
        * p.inv_norm
        * p.x0_dist.powf(nu)
}

/// Convergence-ball radii: the Hölder radius
/// r_ν = (1/(H_ν ‖f'(x*)⁻¹‖))^{1/ν} and the acceleration radius
/// r̂_ν = ((1−θ)ν / (M_α(1+M_α^ν)))^{1/ν} · ν r_ν / ((2+ν) κ).
/// The ball radius is min(r_ν, r̂_ν).
pub fn radii(p: &TheoryParams) -> (f64, f64) {
    let nu = p.nu;
    let r_nu = (1.0 / (p.h_nu * p.inv_norm)).powf(1.0 / nu);
    let r_hat = ((1.0 - p.theta) * nu / (p.m_alpha * (1.0 + p.m_alpha.powf(nu))))
        .powf(1.0 / nu)
        * nu
        * r_nu
        / ((2.0 + nu) * p.kappa);
    (r_nu, r_hat)
}

/// Evaluate the two sufficient conditions for depth `m`.
pub fn check_theorem_conditions(m: usize, p: &TheoryParams) -> Result<ConditionReport, TheoryError> {
    let zeta = zeta_general(p);
    let tau = p.tau();
    let root = solve_q(m, tau, zeta)?;
    let zeta_condition = zeta < 1.0 - tau;
    let q_condition = (2.0 + p.nu) / p.nu * root.q * p.m_alpha * p.kappa <= 1.0;
    Ok(ConditionReport {
        zeta,
        tau,
        root,
        zeta_condition,
        q_condition,
        satisfied: zeta_condition && q_condition,
        assumed_history_decay: true,
    })
}

/// Two-sided residual bracket inside the Hölder ball:
/// ν·d/((1+ν)‖f'(x*)⁻¹‖) ≤ ‖f(x)‖ ≤ (2+ν)/(1+ν)·‖f'(x*)‖·d for
/// d = ‖x − x*‖ < r_ν, with ‖f'(x*)‖ recovered as κ/‖f'(x*)⁻¹‖.
/// Returns (lo, hi, lo ≤ fnorm ≤ hi).
pub fn residual_bracket(
    fnorm: f64,
    p: &TheoryParams,
    dist: f64,
) -> Result<(f64, f64, bool), TheoryError> {
    let (r_nu, _) = radii(p);
    if dist >= r_nu {
        return Err(TheoryError::OutsideBall { dist, radius: r_nu });
    }
    let nu = p.nu;
    let lo = nu * dist / ((1.0 + nu) * p.inv_norm);
    let fprime_norm = p.kappa / p.inv_norm;
    let hi = (2.0 + nu) / (1.0 + nu) * fprime_norm * dist;
    Ok((lo, hi, lo <= fnorm && fnorm <= hi))
}

/// Refined depth-1 residual bound: with s = √(1 − η²),
///
/// ```text
///   θ(1 + (1+θ)/(1−θ) s)‖f_k‖
///     + H_ν/(1+ν) [ (1 + θ/(1−θ) s)^{1+ν} + (s/(1−θ))^{1+ν} / |α|^ν ] ‖f_k‖^{1+ν}.
/// ```
pub fn m1_residual_bound(
    fnorm_k: f64,
    eta_k: f64,
    alpha_k: f64,
    p: &TheoryParams,
) -> Result<f64, TheoryError> {
    let s = (1.0 - eta_k * eta_k).max(0.0).sqrt();
    if alpha_k == 0.0 && s > 0.0 {
        return Err(TheoryError::DegenerateAlpha);
    }
    let theta = p.theta;
    let nu = p.nu;
    let linear = theta * (1.0 + (1.0 + theta) / (1.0 - theta) * s) * fnorm_k;
    let t1 = (1.0 + theta / (1.0 - theta) * s).powf(1.0 + nu);
    let t2 = if s == 0.0 {
        0.0
    } else {
        (s / (1.0 - theta)).powf(1.0 + nu) / alpha_k.abs().powf(nu)
    };
    Ok(linear + p.h_nu / (1.0 + nu) * (t1 + t2) * fnorm_k.powf(1.0 + nu))
}

/// Finite-sample R-factor proxy: max over the last ⌈len/2⌉ entries of
/// (f_k / f_0)^{1/k}. The early half is excluded to damp transients; the
/// window is fixed, not tuned per problem.
pub fn empirical_r_factor(fnorms: &[f64]) -> Result<f64, TheoryError> {
    if fnorms.len() < 3 || fnorms[0] <= 0.0 {
        return Err(TheoryError::EmptyHistory);
    }
    let len = fnorms.len();
    let window = len.div_ceil(2);
    let mut worst = 0.0f64;
    for k in len - window..len {
        if k == 0 {
            continue;
        }
        worst = worst.max((fnorms[k] / fnorms[0]).powf(1.0 / k as f64));
    }
    Ok(worst)
}

/// Lower witness for the contraction factor: max over the supplied pairs of
/// ‖g(x) − g(y)‖∞ / ‖x − y‖∞.
pub fn empirical_contraction(
    map: &dyn FixedPointMap,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64, TheoryError> {
    let n = map.dim();
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut worst = 0.0f64;
    for (x, y) in samples {
        let denom =
            x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if denom == 0.0 {
            return Err(TheoryError::DegeneratePair);
        }
        map.eval(x, &mut gx);
        map.eval(y, &mut gy);
        let num = gx.iter().zip(&gy).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(num / denom);
    }
    Ok(worst)
}

/// Contraction factor θ = 2c(1+a) / (1 + √(1 − 4Φ)) implied by an externally
/// supplied constant Φ ∈ (0, 1/4] from the solution bracket.
pub fn contraction_from_phi(a: f64, c: f64, phi_upper: f64) -> f64 {
    2.0 * c * (1.0 + a) / (1.0 + (1.0 - 4.0 * phi_upper).sqrt())
}
