use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Probability mass pushed beyond the Fock cutoff exceeded the tolerance.
    #[error("truncation loss {loss:.3e} exceeds tolerance {tol:.3e} at n_max = {n_max}")]
    Truncation { loss: f64, tol: f64, n_max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    /// s-ordering is undefined when the overall efficiency vanishes.
    #[error("ordering parameter undefined for overall efficiency {0}")]
    UndefinedOrdering(f64),

    #[error("ordering parameter s = {0} rejected (must be < 1)")]
    OrderingRejected(f64),

    #[error("distribution deficit {deficit:.3e} exceeds tolerance {tol:.3e}; cannot sample")]
    DefectiveDistribution { deficit: f64, tol: f64 },

    #[error("quadrature did not converge after {nodes} nodes (last change {change:.3e})")]
    QuadratureNotConverged { nodes: usize, change: f64 },

    /// Exact simulated parity sum disagrees with the closed-form prediction.
    #[error("parity sum {exact} disagrees with closed form {analytic}")]
    IdentityMismatch { exact: f64, analytic: f64 },

    #[error("scan point (r_idx {r_idx}, phi_idx {phi_idx}): {source}")]
    ScanPoint {
        r_idx: usize,
        phi_idx: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by numerics rather than by configuration or I/O.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Truncation { .. }
            | Error::DefectiveDistribution { .. }
            | Error::QuadratureNotConverged { .. }
            | Error::IdentityMismatch { .. } => true,
            Error::ScanPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
