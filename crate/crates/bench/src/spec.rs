//! Experiment description: which methods, which (a, c) parameter pairs,
//! which problem sizes, and how to report.

use std::fmt;
use std::str::FromStr;

use anderson::baselines::BaselineKind;
use serde::{Deserialize, Serialize};

/// A solver under benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Aa { depth: usize },
    Baseline(BaselineKind),
}

impl Method {
    /// Display name matching the benchmark tables, e.g. `AA(3)` or `NBGS`.
    pub fn name(&self) -> String {
        match self {
            Method::Aa { depth } => format!("AA({depth})"),
            Method::Baseline(kind) => kind.name().to_string(),
        }
    }

    /// Lowercase token safe for file names, e.g. `aa3`, `nbgs`.
    pub fn file_slug(&self) -> String {
        match self {
            Method::Aa { depth } => format!("aa{depth}"),
            Method::Baseline(kind) => kind.name().to_lowercase(),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    /// Accepts `AA:3`, `AA(3)`, `FP`, `MFP`, `NBJ`, `NBGS` (case-insensitive).
    fn from_str(s: &str) -> Result<Self, String> {
        let upper = s.trim().to_uppercase();
        match upper.as_str() {
            "FP" => return Ok(Method::Baseline(BaselineKind::Fp)),
            "MFP" => return Ok(Method::Baseline(BaselineKind::Mfp)),
            "NBJ" => return Ok(Method::Baseline(BaselineKind::Nbj)),
            "NBGS" => return Ok(Method::Baseline(BaselineKind::Nbgs)),
            _ => {}
        }
        let depth_text = upper
            .strip_prefix("AA:")
            .or_else(|| upper.strip_prefix("AA(").and_then(|t| t.strip_suffix(')')))
            .ok_or_else(|| format!("unknown method '{s}' (expected AA:m, FP, MFP, NBJ, NBGS)"))?;
        let depth: usize =
            depth_text.parse().map_err(|_| format!("bad depth in method '{s}'"))?;
        if depth == 0 {
            return Err(format!("method '{s}': depth must be at least 1"));
        }
        Ok(Method::Aa { depth })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let text = String::deserialize(de)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPair {
    pub a: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Markdown,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

fn default_repeats() -> usize {
    10
}

fn default_max_iter() -> usize {
    1_000_000
}

fn default_output() -> OutputFormat {
    OutputFormat::Csv
}

/// Full experiment description; JSON configs deserialize into this.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub methods: Vec<Method>,
    pub params: Vec<ParamPair>,
    pub sizes: Vec<usize>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_output")]
    pub output: OutputFormat,
    #[serde(default)]
    pub history_dump: Option<std::path::PathBuf>,
}

/// The regular benchmark rows: (0.9, 0.1), (0.1, 0.9), and 1∓10⁻ᵏ pairs down
/// to 10⁻⁶. The two near-singular rows (10⁻⁸, 10⁻⁹) take hundreds of
/// thousands of O(n²) sweeps for the plain iterations and are opt-in.
pub fn default_params(include_long: bool) -> Vec<ParamPair> {
    let mut rows = vec![
        ParamPair { a: 0.9, c: 0.1 },
        ParamPair { a: 0.1, c: 0.9 },
        ParamPair { a: 1e-2, c: 1.0 - 1e-2 },
        ParamPair { a: 1e-4, c: 1.0 - 1e-4 },
        ParamPair { a: 1e-6, c: 1.0 - 1e-6 },
    ];
    if include_long {
        rows.push(ParamPair { a: 1e-8, c: 1.0 - 1e-8 });
        rows.push(ParamPair { a: 1e-9, c: 1.0 - 1e-9 });
    }
    rows
}

pub fn default_methods() -> Vec<Method> {
    vec![
        Method::Aa { depth: 1 },
        Method::Aa { depth: 3 },
        Method::Aa { depth: 5 },
        Method::Aa { depth: 8 },
        Method::Baseline(BaselineKind::Fp),
        Method::Baseline(BaselineKind::Mfp),
        Method::Baseline(BaselineKind::Nbj),
        Method::Baseline(BaselineKind::Nbgs),
    ]
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.methods.is_empty() || self.params.is_empty() || self.sizes.is_empty() {
            return Err("experiment needs at least one method, parameter pair, and size".into());
        }
        if self.repeats == 0 {
            return Err("repeats must be at least 1".into());
        }
        if self.max_iter == 0 {
            return Err("max_iter must be at least 1".into());
        }
        for size in &self.sizes {
            if *size == 0 || size % 4 != 0 {
                return Err(format!("size {size} is not a positive multiple of 4"));
            }
        }
        for pair in &self.params {
            if !(0.0..1.0).contains(&pair.a) || !(pair.c > 0.0 && pair.c <= 1.0) {
                return Err(format!("parameters out of range: a={}, c={}", pair.a, pair.c));
            }
        }
        Ok(())
    }
}
