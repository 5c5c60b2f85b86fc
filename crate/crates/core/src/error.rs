use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("graph generation failed: {0}")]
    Generation(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("symmetry check failed: {0}")]
    Symmetry(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("torsion undefined for a graph without edges")]
    UndefinedTorsion,

    #[error("no inverse temperature reproduces energy {target}: {reason}")]
    NoSolution { target: f64, reason: String },

    #[error("energy {target} is only reached in the zero-temperature limit")]
    ZeroTemperatureLimit { target: f64 },

    #[error("density-of-states fit infeasible: {0}")]
    FitInfeasible(String),

    #[error("model infeasible: {0}")]
    ModelInfeasible(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("stage {index}: {source}")]
    Stage {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
