//! `aa-bench`: benchmark the accelerated and baseline fixed-point solvers on
//! the transport-theory problem grid.

use std::path::PathBuf;
use std::process::ExitCode;

use anderson::nare::build_problem;
use anyhow::{bail, Context, Result};
use clap::Parser;

use anderson_bench::spec::{default_methods, default_params, ExperimentSpec, Method, OutputFormat, ParamPair};
use anderson_bench::{dump_history, emit_table, run_experiment, theory_mode};

#[derive(Parser, Debug)]
#[command(
    name = "aa-bench",
    about = "Fixed-point solver benchmark over a transport-theory Riccati problem",
    long_about = None
)]
struct Cli {
    /// JSON experiment description; mutually exclusive with the inline grid
    /// flags below.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Method to run: AA:3 (or AA(3)), FP, MFP, NBJ, NBGS. Repeatable.
    #[arg(long = "method")]
    methods: Vec<Method>,

    /// Parameter a of a grid row; pairs up positionally with --c. Repeatable.
    #[arg(long = "a")]
    a_values: Vec<f64>,

    /// Parameter c of a grid row; pairs up positionally with --a. Repeatable.
    #[arg(long = "c")]
    c_values: Vec<f64>,

    /// Problem size n (multiple of 4). Repeatable.
    #[arg(long = "n")]
    sizes: Vec<usize>,

    /// Timed repetitions per cell; the first is warm-up when more than one.
    #[arg(long, default_value_t = 10)]
    repeats: usize,

    /// Iteration cap per solve.
    #[arg(long = "max-iter", default_value_t = 1_000_000)]
    max_iter: usize,

    /// Table format: csv, markdown, or json.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,

    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Directory for per-cell iteration-history CSV dumps.
    #[arg(long)]
    history: Option<PathBuf>,

    /// Emit theory-condition reports for accelerated cells (n ≤ 256).
    #[arg(long)]
    theory: bool,

    /// Include the near-singular grid rows (a = 1e-8, 1e-9) in the default
    /// parameter set; they cost the plain iterations hundreds of thousands
    /// of sweeps.
    #[arg(long)]
    long: bool,
}

fn build_spec(cli: &Cli) -> Result<ExperimentSpec> {
    if let Some(path) = &cli.config {
        if !cli.methods.is_empty()
            || !cli.a_values.is_empty()
            || !cli.c_values.is_empty()
            || !cli.sizes.is_empty()
        {
            bail!("--config is mutually exclusive with --method/--a/--c/--n");
        }
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut spec: ExperimentSpec = serde_json::from_str(&text).context("parsing config")?;
        if cli.history.is_some() {
            spec.history_dump = cli.history.clone();
        }
        spec.validate().map_err(anyhow::Error::msg)?;
        return Ok(spec);
    }
    if cli.a_values.len() != cli.c_values.len() {
        bail!(
            "--a and --c must appear the same number of times ({} vs {})",
            cli.a_values.len(),
            cli.c_values.len()
        );
    }
    let params: Vec<ParamPair> = if cli.a_values.is_empty() {
        default_params(cli.long)
    } else {
        cli.a_values
            .iter()
            .zip(&cli.c_values)
            .map(|(&a, &c)| ParamPair { a, c })
            .collect()
    };
    let spec = ExperimentSpec {
        methods: if cli.methods.is_empty() { default_methods() } else { cli.methods.clone() },
        params,
        sizes: if cli.sizes.is_empty() { vec![1024] } else { cli.sizes.clone() },
        repeats: cli.repeats,
        max_iter: cli.max_iter,
        output: cli.format,
        history_dump: cli.history.clone(),
    };
    spec.validate().map_err(anyhow::Error::msg)?;
    Ok(spec)
}

fn run(cli: &Cli) -> Result<bool> {
    let spec = build_spec(cli)?;
    let keep_reports = spec.history_dump.is_some() || cli.theory;
    let cells = run_experiment(&spec, keep_reports);

    let rows: Vec<_> = cells.iter().map(|c| c.row.clone()).collect();
    let table = emit_table(&rows, spec.output);
    match &cli.out {
        Some(path) => std::fs::write(path, &table)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{table}"),
    }

    if let Some(dir) = &spec.history_dump {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating history dir {}", dir.display()))?;
        for cell in &cells {
            let Some(report) = &cell.report else { continue };
            let method: Method = cell.row.method.parse().map_err(anyhow::Error::msg)?;
            let file = dir.join(format!(
                "{}_a{}_c{}_n{}.csv",
                method.file_slug(),
                cell.row.a,
                cell.row.c,
                cell.row.n
            ));
            dump_history(report, &file)
                .with_context(|| format!("writing history {}", file.display()))?;
        }
    }

    if cli.theory {
        let mut reports = Vec::new();
        for cell in &cells {
            let method: Method = cell.row.method.parse().map_err(anyhow::Error::msg)?;
            // The runner shares one problem per (a, c, n); rebuilding here is
            // cheap relative to the solves and keeps the phases independent.
            let prob = build_problem(cell.row.a, cell.row.c, cell.row.n)?;
            reports.push(theory_mode::theory_report(&prob, method, cell));
        }
        let text = serde_json::to_string_pretty(&reports)?;
        match &cli.out {
            Some(path) => {
                let theory_path = path.with_extension("theory.json");
                std::fs::write(&theory_path, text)
                    .with_context(|| format!("writing {}", theory_path.display()))?;
            }
            None => println!("{text}"),
        }
    }

    Ok(cells.iter().all(|c| c.row.status == "ok"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("aa-bench: {e:#}");
            ExitCode::FAILURE
        }
    }
}
