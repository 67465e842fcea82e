//! Benchmark harness for the transport-theory fixed-point problem: runs
//! (method × (a, c) × n) grids under the shared n·2⁻⁵² stopping criterion,
//! times repeats, and renders CSV/markdown/JSON tables plus residual-history
//! dumps and optional theory-condition reports.

pub mod history;
pub mod runner;
pub mod spec;
pub mod table;
pub mod theory_mode;

pub use history::{dump_history, render_history};
pub use runner::{run_experiment, run_method, CellResult, ResultRow};
pub use spec::{default_methods, default_params, ExperimentSpec, Method, OutputFormat, ParamPair};
pub use table::emit_table;
pub use theory_mode::{theory_report, TheoryCellReport};
