use thiserror::Error;

/// Errors raised by the simulator and the optimizers.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("UE {ue} still violates the minimum-distance constraint after {attempts} placement attempts")]
    Infeasible { ue: usize, attempts: usize },

    #[error("layout has neither MBSs nor UABSs")]
    NoStations,

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("load counter for {0} is zero")]
    ZeroLoad(String),

    #[error("drop {drop} failed: {source}")]
    Drop {
        drop: usize,
        #[source]
        source: Box<SimError>,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> SimError {
    SimError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
