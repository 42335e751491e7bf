use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("excitation sector {sector} is empty for {n_ions} ions with phonon cutoff {cutoff} (maximum is {max})")]
    EmptySector {
        sector: usize,
        n_ions: usize,
        cutoff: usize,
        max: usize,
    },

    #[error("phonon cutoff {cutoff} is below the requested sector {sector}; raise phonon_cutoff to at least {sector}")]
    TruncatedSector { cutoff: usize, sector: usize },

    #[error("site index {site} out of range 1..={n_ions}")]
    InvalidSite { site: usize, n_ions: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("equilibrium solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ions {0} and {1} sit at coincident positions")]
    CoincidentPositions(usize, usize),

    #[error("state preparation: {0}")]
    StatePreparation(String),

    #[error("propagation tolerance failure at t = {time} ms: achieved error {achieved:e}")]
    Tolerance { time: f64, achieved: f64 },

    #[error("phase grid of {points} points aliases phase orders; need at least {required}")]
    PhaseAliasing { points: usize, required: usize },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("non-uniform time grid: {0}")]
    NonUniformGrid(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
