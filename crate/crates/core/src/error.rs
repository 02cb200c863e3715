use thiserror::Error;

/// Errors produced by the graph, graphon, chain and statistics routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid node pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("constraint infeasible: {0}")]
    ConstraintInfeasible(String),

    #[error("(e, t) = ({e}, {t}) is outside the A(3,0) branch (requires t < e^3)")]
    BranchInfeasible { e: f64, t: f64 },

    #[error("graphon parameters out of range: {0}")]
    ParameterInfeasible(String),

    #[error("no feasible bipodal graphon for (e, t) = ({e}, {t})")]
    NoFeasiblePoint { e: f64, t: f64 },

    #[error("transition not bracketed in [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("degenerate embedding: {0}")]
    DegenerateEmbedding(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
