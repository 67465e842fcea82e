//! Per-iteration residual histories as CSV, for external plotting.

use std::io::{self, Write};
use std::path::Path;

use anderson::solver::SolveReport;

/// Write `k,res_inf,fnorm2,eta`, one line per iteration. The report must
/// have been produced with history recording enabled (a converged run of j
/// iterations yields j+1 lines including the header).
pub fn dump_history(report: &SolveReport, path: &Path) -> io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(render_history(report).as_bytes())
}

pub fn render_history(report: &SolveReport) -> String {
    let mut out = String::from("k,res_inf,fnorm2,eta\n");
    for rec in &report.records {
        out.push_str(&format!("{},{:e},{:e},{}\n", rec.k, rec.res_inf, rec.fnorm2, rec.eta));
    }
    out
}
