use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("edge {edge} is a self-loop on vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("vertex {vertex} is out of range 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge id {edge} is out of range (m = {m})")]
    EdgeOutOfRange { edge: usize, m: usize },
    #[error("length mismatch: {what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("weight of edge {edge} is not finite")]
    NonFiniteWeight { edge: usize },

    #[error("parameter `{name}` = {value} outside its domain: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("privacy budget is not bound to a round count")]
    UnboundBudget,

    #[error("sampling tree leaf {leaf} is already removed")]
    DoubleRemoval { leaf: usize },
    #[error("sampling tree has no live leaves")]
    EmptyTree,
    #[error("sampling tree weight {index} must be positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("consistency check failed: {0}")]
    OracleInconsistent(&'static str),

    #[error("instance too large for exact enumeration: {what} = {got} exceeds {limit}")]
    GuardExceeded {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("degenerate support for chi-square test: {0}")]
    DegenerateSupport(String),

    #[error("Erdős–Rényi graph not connected after {attempts} attempts (n = {n}, p = {p})")]
    ConnectivityUnreachable { n: usize, p: f64, attempts: usize },
    #[error("unknown mechanism `{0}`")]
    UnknownMechanism(String),
    #[error("unknown graph family `{0}`")]
    UnknownFamily(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
