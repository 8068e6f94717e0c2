use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The instance document is not valid TOML or does not match the schema.
    /// The message carries the line/column and field from the parser.
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{kind} `{owner}` references unknown {target_kind} `{id}`")]
    DanglingReference {
        kind: &'static str,
        owner: String,
        target_kind: &'static str,
        id: String,
    },

    #[error("series `{series}` has length {actual}, expected horizon {expected}")]
    SeriesLength {
        series: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("extreme-point weights must sum to 1 (got {sum})")]
    WeightSum { sum: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("boiler `{id}` output {heat} MWth exceeds capacity {h_max} MWth")]
    OverCapacity { id: String, heat: f64, h_max: f64 },

    #[error("cost function is not convex (quadratic coefficient {0} < 0)")]
    NonConvexCost(f64),

    #[error("name `{0}` cannot be encoded in MPS")]
    UnencodableName(String),

    #[error("MPS error at line {line}: {message}")]
    Mps { line: usize, message: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("solver `{command}` failed (exit code {}): {output}", status.map_or("none".to_string(), |c| c.to_string()))]
    Subprocess {
        command: String,
        status: Option<i32>,
        output: String,
    },

    #[error("cannot parse solution file: {0}")]
    SolutionParse(String),

    #[error("enumeration refused: {binaries} free binaries exceed the cap of {cap}")]
    EnumerationCap { binaries: usize, cap: usize },

    #[error("invalid topology in period {period}: {message}")]
    Topology { period: usize, message: String },

    #[error("non-positive temperature difference {delta_t} K at `{element}`")]
    NonPositiveDeltaT { element: String, delta_t: f64 },

    #[error("mass flow {flow} kg/s on pipe `{pipe}` exceeds limit {limit} kg/s")]
    FlowBound { pipe: String, flow: f64, limit: f64 },

    #[error("node `{node}` has outflow but no inflow")]
    ZeroInflow { node: String },

    #[error("state recovery did not converge after {iterations} iterations (last change {last_change} K)")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("solution is not usable: {0}")]
    Solution(String),
}

pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
    Error::Io {
        path: path.into(),
        source,
    }
}
