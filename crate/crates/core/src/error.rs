use crate::ids::{AgentId, TrackId};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("innovation covariance is singular or not positive definite")]
    SingularCovariance,

    #[error("detection probability must be below 1 for a finite miss penalty (got {0})")]
    DegenerateDetectionProbability(f64),

    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),

    #[error("unknown track {0}")]
    UnknownTrack(TrackId),

    #[error("attack infeasible: per-frame score change {denominator} is not positive")]
    AttackInfeasible { denominator: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("case geometry violates visibility: {0}")]
    Geometry(String),

    #[error("trace: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
