//! Grid execution: one cell per (size, parameter pair, method), all from the
//! zero start under the n·2⁻⁵² relative-increment criterion.

use std::time::Instant;

use anderson::baselines::{baseline_solve, ResCriterion};
use anderson::nare::{build_problem, NareProblem};
use anderson::solver::{aa_solve, AaConfig, SolveError, SolveReport};
use serde::Serialize;

use crate::spec::{ExperimentSpec, Method};

/// One output row of the benchmark table.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub a: f64,
    pub c: f64,
    pub n: usize,
    pub it: usize,
    pub cpu_mean_s: f64,
    pub res_final: f64,
    pub status: String,
}

/// Row plus the underlying report (records populated only when requested).
#[derive(Debug)]
pub struct CellResult {
    pub row: ResultRow,
    pub report: Option<SolveReport>,
}

/// Run one method on a prebuilt problem.
pub fn run_method(
    prob: &NareProblem,
    method: Method,
    max_iter: usize,
    record_history: bool,
) -> Result<SolveReport, SolveError> {
    let rule = ResCriterion::new(prob.n);
    match method {
        Method::Aa { depth } => {
            let mut cfg = AaConfig::new(depth, max_iter);
            cfg.record_history = record_history;
            cfg.stop_tol = rule.threshold();
            let x0 = vec![0.0; prob.dim()];
            aa_solve(prob, &x0, &cfg, &rule)
        }
        Method::Baseline(kind) => baseline_solve(prob, kind, &rule, max_iter, record_history),
    }
}

/// Execute the grid in the order given (sizes, then parameter pairs, then
/// methods). Each cell runs `repeats` times; with repeats ≥ 2 the first
/// run is treated as warm-up and excluded from the CPU mean (it still must
/// agree on correctness, which it does — the solves are deterministic).
/// Per-cell failures are reported in the row status and never abort the grid.
pub fn run_experiment(spec: &ExperimentSpec, keep_reports: bool) -> Vec<CellResult> {
    let mut cells = Vec::new();
    for &n in &spec.sizes {
        for pair in &spec.params {
            let prob = match build_problem(pair.a, pair.c, n) {
                Ok(p) => p,
                Err(e) => {
                    for method in &spec.methods {
                        cells.push(CellResult {
                            row: error_row(method, pair.a, pair.c, n, &e.to_string()),
                            report: None,
                        });
                    }
                    continue;
                }
            };
            for &method in &spec.methods {
                cells.push(run_cell(&prob, method, spec, keep_reports));
            }
        }
    }
    cells
}

fn run_cell(
    prob: &NareProblem,
    method: Method,
    spec: &ExperimentSpec,
    keep_reports: bool,
) -> CellResult {
    let mut timings = Vec::with_capacity(spec.repeats);
    let mut kept: Option<SolveReport> = None;
    for run in 0..spec.repeats {
        // Only the kept run records history; the timed repeats measure the
        // bare solve.
        let record = keep_reports && run == 0;
        let started = Instant::now();
        let outcome = run_method(prob, method, spec.max_iter, record);
        let elapsed = started.elapsed().as_secs_f64();
        timings.push(elapsed);
        match outcome {
            Ok(report) => {
                if run == 0 {
                    kept = Some(report);
                }
            }
            Err(e) => {
                return CellResult {
                    row: error_row(&method, prob.a, prob.c, prob.n, &e.to_string()),
                    report: None,
                };
            }
        }
    }
    let timed = if timings.len() > 1 { &timings[1..] } else { &timings[..] };
    let cpu_mean = timed.iter().sum::<f64>() / timed.len() as f64;
    let report = kept.expect("at least one run");
    let status = if report.converged { "ok" } else { "max_iter" };
    let row = ResultRow {
        method: method.name(),
        a: prob.a,
        c: prob.c,
        n: prob.n,
        it: report.iterations,
        cpu_mean_s: cpu_mean,
        res_final: report.final_res,
        status: status.to_string(),
    };
    CellResult { row, report: if keep_reports { Some(report) } else { None } }
}

fn error_row(method: &Method, a: f64, c: f64, n: usize, message: &str) -> ResultRow {
    ResultRow {
        method: method.name(),
        a,
        c,
        n,
        it: 0,
        cpu_mean_s: 0.0,
        res_final: f64::NAN,
        // Keep the CSV single-line and comma-free.
        status: format!("error: {}", message.replace([',', '\n'], ";")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{OutputFormat, ParamPair};

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec {
            methods: vec![Method::Aa { depth: 2 }, "NBGS".parse().unwrap()],
            params: vec![ParamPair { a: 0.5, c: 0.5 }],
            sizes: vec![16],
            repeats: 2,
            max_iter: 100_000,
            output: OutputFormat::Csv,
            history_dump: None,
        }
    }

    #[test]
    fn grid_runs_in_spec_order_and_converges() {
        let cells = run_experiment(&tiny_spec(), false);
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].row.method, "AA(2)");
        assert_eq!(cells[1].row.method, "NBGS");
        for cell in &cells {
            assert_eq!(cell.row.status, "ok");
            assert!(cell.row.res_final <= 16.0 * anderson::baselines::EPS);
            assert!(cell.report.is_none());
        }
    }

    #[test]
    fn iteration_counts_invariant_across_repeats() {
        let mut spec = tiny_spec();
        spec.repeats = 1;
        let once = run_experiment(&spec, false);
        spec.repeats = 3;
        let thrice = run_experiment(&spec, false);
        for (a, b) in once.iter().zip(&thrice) {
            assert_eq!(a.row.it, b.row.it);
            assert_eq!(a.row.res_final, b.row.res_final);
        }
    }

    #[test]
    fn max_iter_exhaustion_is_a_status_not_an_error() {
        let mut spec = tiny_spec();
        spec.max_iter = 2;
        let cells = run_experiment(&spec, false);
        assert!(cells.iter().all(|c| c.row.status == "max_iter"));
    }
}
