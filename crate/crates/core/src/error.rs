use thiserror::Error;

#[derive(Debug, Error)]
pub enum GqdError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate dominant eigenvalue: spectral gap {gap:.3e} is below {threshold:.1e}")]
    DegenerateDominantEigenvalue { gap: f64, threshold: f64 },

    #[error("capacity exceeded for {what}: requested {requested}, cap {cap}")]
    CapacityExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("truncation discarded weight {discarded:.3e}, above the failure threshold {threshold:.1e}")]
    Truncation { discarded: f64, threshold: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: change {change:.3e} with {nodes} nodes")]
    Quadrature { change: f64, nodes: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("imaginary-time evolution did not converge (last energies {energies:?})")]
    NotConverged { energies: Vec<f64> },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GqdError>;
