use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported bet cap multiple {0}: expected 4 or 5")]
    UnsupportedBetCap(u32),

    #[error("invalid game tree: {0}")]
    InvalidTree(String),

    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("table length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("posterior shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("regret bound violated: exploitability {exploitability} > bound {bound}")]
    RegretBoundViolated { exploitability: f64, bound: f64 },

    #[error("experiment aborted at round {round}: {source}")]
    Aborted {
        round: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}
