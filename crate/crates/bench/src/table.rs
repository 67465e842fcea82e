//! Table rendering: CSV (fixed column schema), markdown grouped by (a, c),
//! and JSON.

use crate::runner::ResultRow;
use crate::spec::OutputFormat;

pub fn emit_table(rows: &[ResultRow], format: OutputFormat) -> String {
    assert!(!rows.is_empty(), "no rows to emit");
    match format {
        OutputFormat::Csv => emit_csv(rows),
        OutputFormat::Markdown => emit_markdown(rows),
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
            text.push('\n');
            text
        }
    }
}

fn emit_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("method,a,c,n,it,cpu_mean_s,res_final,status\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.4},{:e},{}\n",
            row.method, row.a, row.c, row.n, row.it, row.cpu_mean_s, row.res_final, row.status
        ));
    }
    out
}

fn emit_markdown(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let mut current: Option<(f64, f64)> = None;
    for row in rows {
        if current != Some((row.a, row.c)) {
            current = Some((row.a, row.c));
            out.push_str(&format!("\n### (a, c) = ({}, {})\n\n", row.a, row.c));
            out.push_str("| method | n | it | cpu_mean_s | res_final | status |\n");
            out.push_str("|---|---|---|---|---|---|\n");
        }
        out.push_str(&format!(
            "| {} | {} | {} | {:.4} | {:e} | {} |\n",
            row.method, row.n, row.it, row.cpu_mean_s, row.res_final, row.status
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, a: f64, c: f64, it: usize) -> ResultRow {
        ResultRow {
            method: method.to_string(),
            a,
            c,
            n: 64,
            it,
            cpu_mean_s: 0.01234,
            res_final: 1.5e-14,
            status: "ok".to_string(),
        }
    }

    #[test]
    fn csv_single_row_has_header_plus_row() {
        let text = emit_table(&[row("FP", 0.5, 0.5, 9)], OutputFormat::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "method,a,c,n,it,cpu_mean_s,res_final,status");
        assert_eq!(lines[1], "FP,0.5,0.5,64,9,0.0123,1.5e-14,ok");
    }

    #[test]
    fn markdown_groups_rows_by_parameter_pair() {
        let rows = vec![
            row("AA(3)", 0.1, 0.9, 22),
            row("FP", 0.1, 0.9, 71),
            row("FP", 0.5, 0.5, 30),
        ];
        let text = emit_table(&rows, OutputFormat::Markdown);
        assert_eq!(text.matches("### (a, c)").count(), 2);
        let first_group = text.find("(0.1, 0.9)").unwrap();
        let second_group = text.find("(0.5, 0.5)").unwrap();
        assert!(first_group < second_group);
    }

    #[test]
    fn json_is_an_array_of_rows() {
        let text = emit_table(&[row("NBJ", 0.5, 0.5, 7)], OutputFormat::Json);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 1);
        assert_eq!(parsed[0]["method"], "NBJ");
        assert_eq!(parsed[0]["it"], 7);
    }

    #[test]
    fn full_benchmark_grid_renders_seven_groups_of_eight() {
        let params = crate::spec::default_params(true);
        let methods = crate::spec::default_methods();
        assert_eq!(params.len(), 7);
        let mut rows = Vec::new();
        for p in &params {
            for m in &methods {
                rows.push(row(&m.name(), p.a, p.c, 1));
            }
        }
        let text = emit_table(&rows, OutputFormat::Markdown);
        assert_eq!(text.matches("### (a, c)").count(), 7);
        assert_eq!(text.matches("| AA(1) |").count(), 7);
        // 7 header lines plus 7×8 data rows start with a cell delimiter.
        assert_eq!(text.lines().filter(|l| l.starts_with("| ")).count(), 7 + 7 * 8);
    }
}
