use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("sector too large for enumeration: {size} states exceeds guard {limit}")]
    SectorTooLarge { size: u128, limit: u128 },

    #[error("invalid gauge constraint: {0}")]
    Gauge(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("symmetry error: {0}")]
    Symmetry(String),

    #[error("hamiltonian error: {0}")]
    Hamiltonian(String),

    #[error("FCIDUMP line {line}: {msg}")]
    Fcidump { line: usize, msg: String },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("estimator needs at least two samples, got {0}")]
    TooFewSamples(usize),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("non-finite energy at iteration {0}")]
    NonFiniteEnergy(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
