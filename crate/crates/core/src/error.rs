use thiserror::Error;

use crate::graph::Violation;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A colouring with a class that is neither atomic nor twin-pairing.
    #[error("not a coloured graph for paired data: {0}")]
    NotAPdcg(String),

    #[error("incompatible quadruplet: {}", join_violations(.0))]
    Incompatible(Vec<Violation>),

    #[error("graphs live on different vertex sets (p={0} vs p={1})")]
    VertexSetMismatch(u32, u32),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
