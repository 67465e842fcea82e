//! Classical fixed-point iterations for the transport-theory problem, and
//! the benchmark stopping criterion they share with the accelerated solver.
//!
//! All four iterate the coupled (u, v) system from the zero start:
//!
//! ```text
//!   FP    u⁺ = u ∘ (P v) + e          v⁺ = v ∘ (P̃ u) + e
//!   MFP   u⁺ = u ∘ (P v) + e          v⁺ = v ∘ (P̃ u⁺) + e
//!   NBJ   u⁺ = e ⊘ (e − P v)          v⁺ = e ⊘ (e − P̃ u)
//!   NBGS  u⁺ = e ⊘ (e − P v)          v⁺ = e ⊘ (e − P̃ u⁺)
//! ```
//!
//! (⊘ is elementwise division; the block solves invert the decoupled
//! diagonal equations u_i (1 − (P v)_i) = 1 exactly.)

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, norm_inf, sub};
use crate::nare::NareProblem;
use crate::solver::{
    IterRecord, SolveError, SolveReport, StopContext, StopEval, StoppingRule,
};

/// Machine epsilon for f64, 2⁻⁵².
pub const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    /// Plain fixed-point sweep.
    Fp,
    /// Modified sweep: the v-update sees the fresh u.
    Mfp,
    /// Nonlinear block Jacobi.
    Nbj,
    /// Nonlinear block Gauss–Seidel.
    Nbgs,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] =
        [BaselineKind::Fp, BaselineKind::Mfp, BaselineKind::Nbj, BaselineKind::Nbgs];

    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::Fp => "FP",
            BaselineKind::Mfp => "MFP",
            BaselineKind::Nbj => "NBJ",
            BaselineKind::Nbgs => "NBGS",
        }
    }
}

/// Relative ℓ∞ change of the u and v blocks:
/// RES = max(‖u⁺−u‖∞/‖u⁺‖∞, ‖v⁺−v‖∞/‖v⁺‖∞), firing at RES ≤ n·2⁻⁵².
pub fn res_criterion(x_new: &[f64], x_old: &[f64], n: usize) -> Result<(f64, bool), SolveError> {
    debug_assert_eq!(x_new.len(), 2 * n);
    debug_assert_eq!(x_old.len(), 2 * n);
    let (u_new, v_new) = x_new.split_at(n);
    let (u_old, v_old) = x_old.split_at(n);
    let un = norm_inf(u_new);
    let vn = norm_inf(v_new);
    if un == 0.0 || vn == 0.0 {
        return Err(SolveError::ZeroNorm { iteration: 0 });
    }
    let du = u_new.iter().zip(u_old).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let dv = v_new.iter().zip(v_old).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let res = (du / un).max(dv / vn);
    Ok((res, res <= n as f64 * EPS))
}

/// The benchmark stopping rule over stacked [u; v] iterates.
#[derive(Debug, Clone, Copy)]
pub struct ResCriterion {
    n: usize,
    threshold: f64,
}

impl ResCriterion {
    /// Threshold n·2⁻⁵².
    pub fn new(n: usize) -> Self {
        Self { n, threshold: n as f64 * EPS }
    }

    pub fn with_threshold(n: usize, threshold: f64) -> Self {
        Self { n, threshold }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

impl StoppingRule for ResCriterion {
    fn evaluate(&self, ctx: &StopContext<'_>) -> Result<StopEval, SolveError> {
        let n = self.n;
        let (u_new, v_new) = ctx.x_new.split_at(n);
        let (u_old, v_old) = ctx.x_old.split_at(n);
        let un = norm_inf(u_new);
        let vn = norm_inf(v_new);
        if un == 0.0 || vn == 0.0 {
            return Err(SolveError::ZeroNorm { iteration: ctx.k });
        }
        let du = u_new.iter().zip(u_old).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let dv = v_new.iter().zip(v_old).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let res = (du / un).max(dv / vn);
        Ok(StopEval { res, fired: res <= self.threshold })
    }
}

/// One sweep of `kind` from (u, v), writing the new blocks and returning an
/// error when a block-solve denominator is not strictly positive.
pub fn baseline_step(
    prob: &NareProblem,
    kind: BaselineKind,
    u: &[f64],
    v: &[f64],
    u_new: &mut Vec<f64>,
    v_new: &mut Vec<f64>,
    iteration: usize,
) -> Result<(), SolveError> {
    let n = prob.n;
    let mut pv = vec![0.0; n];
    prob.p_mat.matvec(v, &mut pv);
    u_new.clear();
    match kind {
        BaselineKind::Fp | BaselineKind::Mfp => {
            u_new.extend(u.iter().zip(&pv).map(|(ui, pvi)| ui * pvi + 1.0));
        }
        BaselineKind::Nbj | BaselineKind::Nbgs => {
            for (i, &pvi) in pv.iter().enumerate() {
                let denom = 1.0 - pvi;
                if denom <= 0.0 {
                    return Err(SolveError::DivideByZero { iteration, component: i });
                }
                u_new.push(1.0 / denom);
            }
        }
    }
    let u_for_v: &[f64] = match kind {
        BaselineKind::Fp | BaselineKind::Nbj => u,
        BaselineKind::Mfp | BaselineKind::Nbgs => u_new,
    };
    let mut ptu = vec![0.0; n];
    prob.p_tilde.matvec(u_for_v, &mut ptu);
    v_new.clear();
    match kind {
        BaselineKind::Fp | BaselineKind::Mfp => {
            v_new.extend(v.iter().zip(&ptu).map(|(vi, ptui)| vi * ptui + 1.0));
        }
        BaselineKind::Nbj | BaselineKind::Nbgs => {
            for (i, &ptui) in ptu.iter().enumerate() {
                let denom = 1.0 - ptui;
                if denom <= 0.0 {
                    return Err(SolveError::DivideByZero { iteration, component: n + i });
                }
                v_new.push(1.0 / denom);
            }
        }
    }
    Ok(())
}

/// Iterate `kind` from the zero start until `stop` fires or `max_iter`
/// sweeps complete. The iteration count is the number of sweeps performed,
/// including the one on which the rule fired.
pub fn baseline_solve(
    prob: &NareProblem,
    kind: BaselineKind,
    stop: &dyn StoppingRule,
    max_iter: usize,
    record_history: bool,
) -> Result<SolveReport, SolveError> {
    let n = prob.n;
    let started = Instant::now();
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut u_new = Vec::with_capacity(n);
    let mut v_new = Vec::with_capacity(n);
    let mut x_old = vec![0.0; 2 * n];
    let mut x_new = vec![0.0; 2 * n];
    let mut records = Vec::new();
    let mut last_res = f64::NAN;
    let mut converged = false;
    let mut iterations = max_iter;

    for k in 1..=max_iter {
        // The residual at the departing point is free for FP (the sweep IS
        // g(x)); the other sweeps only get it when history is requested.
        let fnorm2 = if record_history && kind != BaselineKind::Fp {
            let g = prob.g_eval(&x_old).expect("dimensions fixed");
            Some(norm2(&sub(&g, &x_old)))
        } else {
            None
        };
        baseline_step(prob, kind, &u, &v, &mut u_new, &mut v_new, k)?;
        x_new[..n].copy_from_slice(&u_new);
        x_new[n..].copy_from_slice(&v_new);
        let fnorm2 = match (kind, fnorm2) {
            (BaselineKind::Fp, _) => Some(norm2(&sub(&x_new, &x_old))),
            (_, other) => other,
        };
        let ev = stop.evaluate(&StopContext { k, x_new: &x_new, x_old: &x_old, fnorm2 })?;
        last_res = ev.res;
        if record_history {
            records.push(IterRecord {
                k,
                res_inf: ev.res,
                fnorm2: fnorm2.unwrap_or(f64::NAN),
                eta: 1.0,
                alpha: vec![1.0],
                gamma: Vec::new(),
            });
        }
        std::mem::swap(&mut u, &mut u_new);
        std::mem::swap(&mut v, &mut v_new);
        x_old.copy_from_slice(&x_new);
        if ev.fired {
            converged = true;
            iterations = k;
            break;
        }
    }

    Ok(SolveReport {
        converged,
        iterations,
        final_res: last_res,
        wall_time: started.elapsed().as_secs_f64(),
        records,
        x_final: x_old,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nare::build_problem;

    #[test]
    fn res_criterion_cases() {
        let x = vec![2.0, 2.0, 1.0, 1.0];
        let (res, fired) = res_criterion(&x, &x, 2).unwrap();
        assert_eq!(res, 0.0);
        assert!(fired);
        // Hand arithmetic: u⁺=(2,2), u=(2,2+1e-13), equal v's → RES ≈ 5e-14
        // (up to the representation error of 2+1e-13).
        let x_new = vec![2.0, 2.0, 1.0, 1.0];
        let x_old = vec![2.0, 2.0 + 1e-13, 1.0, 1.0];
        let (res, _) = res_criterion(&x_new, &x_old, 2).unwrap();
        assert!((res - 5e-14).abs() < 1e-15);
        assert!(res_criterion(&[0.0, 0.0, 1.0, 1.0], &x, 2).is_err());
    }

    #[test]
    fn threshold_value_at_n1024() {
        let rule = ResCriterion::new(1024);
        assert!((rule.threshold() - 2.2737367544323206e-13).abs() < 1e-27);
    }

    #[test]
    fn first_sweep_from_zero_is_ones() {
        let prob = build_problem(0.5, 0.5, 8).unwrap();
        for kind in [BaselineKind::Fp, BaselineKind::Mfp] {
            let mut u_new = Vec::new();
            let mut v_new = Vec::new();
            baseline_step(&prob, kind, &[0.0; 8], &[0.0; 8], &mut u_new, &mut v_new, 1).unwrap();
            assert!(u_new.iter().all(|&x| x == 1.0));
            assert!(v_new.iter().all(|&x| x == 1.0));
        }
    }

    #[test]
    fn iterates_monotone_and_bracketed() {
        let prob = build_problem(0.5, 0.5, 16).unwrap();
        for kind in BaselineKind::ALL {
            let mut u = vec![0.0; 16];
            let mut v = vec![0.0; 16];
            let mut u_new = Vec::new();
            let mut v_new = Vec::new();
            for k in 1..=500 {
                baseline_step(&prob, kind, &u, &v, &mut u_new, &mut v_new, k).unwrap();
                for i in 0..16 {
                    assert!(u_new[i] >= u[i] && v_new[i] >= v[i], "{} not monotone", kind.name());
                    assert!(u_new[i] <= 2.0 + 1e-6 && v_new[i] <= 2.0 + 1e-6);
                }
                std::mem::swap(&mut u, &mut u_new);
                std::mem::swap(&mut v, &mut v_new);
            }
            // At convergence the solution sits in the [e, 2e] bracket.
            for i in 0..16 {
                assert!(u[i] >= 1.0 - 1e-10 && v[i] >= 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn all_methods_share_a_limit() {
        let prob = build_problem(0.5, 0.5, 16).unwrap();
        let rule = ResCriterion::new(16);
        let mut finals: Vec<Vec<f64>> = Vec::new();
        for kind in BaselineKind::ALL {
            let report = baseline_solve(&prob, kind, &rule, 100_000, false).unwrap();
            assert!(report.converged, "{} did not converge", kind.name());
            assert!(report.final_res <= rule.threshold());
            finals.push(report.x_final);
        }
        let aa = crate::solver::aa_solve(
            &prob,
            &vec![0.0; 32],
            &crate::solver::AaConfig::new(3, 100_000),
            &rule,
        )
        .unwrap();
        assert!(aa.converged);
        finals.push(aa.x_final);
        for i in 0..finals.len() {
            for j in i + 1..finals.len() {
                let d = finals[i]
                    .iter()
                    .zip(&finals[j])
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(d <= 1e-10, "limits differ by {d:.3e}");
            }
        }
    }

    #[test]
    fn count_ordering_on_small_problem() {
        let prob = build_problem(0.1, 0.9, 32).unwrap();
        let rule = ResCriterion::new(32);
        let mut counts = Vec::new();
        for kind in BaselineKind::ALL {
            let report = baseline_solve(&prob, kind, &rule, 100_000, false).unwrap();
            counts.push(report.iterations);
        }
        let (fp, mfp, nbj, nbgs) = (counts[0], counts[1], counts[2], counts[3]);
        assert!(nbgs <= nbj && nbj <= mfp && mfp <= fp, "{counts:?}");
    }

    #[test]
    fn fp_records_carry_unit_gain_and_residual_norms() {
        let prob = build_problem(0.5, 0.5, 8).unwrap();
        let rule = ResCriterion::new(8);
        let report = baseline_solve(&prob, BaselineKind::Fp, &rule, 10_000, true).unwrap();
        assert_eq!(report.records.len(), report.iterations);
        for rec in &report.records {
            assert_eq!(rec.eta, 1.0);
            assert_eq!(rec.alpha, vec![1.0]);
            assert!(rec.fnorm2.is_finite());
        }
        // First record's residual norm is ‖f(0)‖₂ = √(2n).
        assert!((report.records[0].fnorm2 - (16.0f64).sqrt()).abs() < 1e-12);
    }
}
