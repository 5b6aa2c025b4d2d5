use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin polarisation {0} outside [0, 0.5]")]
    Polarization(f64),

    #[error("{what} = {value} out of range for reservoir of size {size}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        size: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("protocol exhausted: a reservoir of size {size} allows at most {max} erasure cycles")]
    ProtocolExhausted { size: usize, max: usize },

    #[error("history holds {available} equilibrium tables, cycle {cycle} needs {needed}")]
    MissingHistory {
        cycle: usize,
        needed: usize,
        available: usize,
    },

    #[error("{0} diverges")]
    Divergent(&'static str),

    #[error("no entropy erased (final up-probability {0}), cost per bit is undefined")]
    DegenerateErasure(f64),

    #[error("first distribution has mass {mass} at bin {index} where the reference has none")]
    Support { index: usize, mass: f64 },

    #[error("distribution is not normalised: total mass {0}")]
    NotNormalized(f64),

    #[error("no reservoir size up to {n_max_scan} matches alpha = {alpha} within {tolerance} nats")]
    NotFound {
        alpha: f64,
        tolerance: f64,
        n_max_scan: usize,
    },

    #[error("microstate oracle is capped at N = {max}, got {size}")]
    OracleTooLarge { size: usize, max: usize },
}
