use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("points {first} and {second} are closer than the minimum separation ({distance:e}); remove duplicates")]
    DuplicatePoints {
        first: usize,
        second: usize,
        distance: f64,
    },

    /// The distance-power matrix is numerically singular.
    #[error("distance matrix is numerically singular (condition estimate {condition:e}); perturb the point set slightly and retry")]
    Singular { condition: f64 },

    /// `1ᵀD⁻¹1 <= 0`: the kernel left the quasihypermetric regime.
    #[error("stationary point is not a mass-one maximum (1ᵀD⁻¹1 = {denominator:e})")]
    NotMaximum { denominator: f64 },

    /// The stationary energy and the recomputed double sum disagree.
    #[error("solver lost accuracy: 1/(1ᵀD⁻¹1) = {energy} but the recomputed energy is {recomputed}; perturb the point set slightly and retry")]
    Inaccurate { energy: f64, recomputed: f64 },

    #[error("radius {radius} is below the Schoenberg radius: Gram matrix has eigenvalue {min_eigenvalue:e}")]
    RadiusBelowSchoenberg { radius: f64, min_eigenvalue: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors raised by the linear-algebra path rather than by input validation.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::NotMaximum { .. } | Error::Inaccurate { .. })
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
