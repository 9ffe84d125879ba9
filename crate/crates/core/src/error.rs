use thiserror::Error;

use crate::block::PartialBlockResult;
use crate::linalg::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix dimension {0} exceeds the supported maximum of 64")]
    TooLarge(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("matrix is not diagonable: eigenvector matrix has condition {cond:.3e} (limit {limit:.3e})")]
    NotDiagonable { cond: f64, limit: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NonConvergence { iterations: usize },

    #[error("ambiguous eigenvalue clustering: cluster diameter {diameter:.3e} exceeds half the separation {separation:.3e}")]
    AmbiguousClustering { diameter: f64, separation: f64 },

    #[error("small divisor in Sylvester solve at ({i}, {j}): gap {gap:.3e} < sep_min {sep_min:.3e}")]
    SmallDivisor {
        i: usize,
        j: usize,
        gap: f64,
        sep_min: f64,
    },

    #[error("leading coefficient is not invertible (condition {cond:.3e})")]
    SingularLeadingCoefficient { cond: f64 },

    #[error("leading coefficient has repeated eigenvalues {values:?} (sep_min {sep_min:.3e}); use the block scheme")]
    DegenerateLeading { values: Vec<C64>, sep_min: f64 },

    #[error("diagonaliser is singular at rho = {rho}")]
    SingularDiagonaliser { rho: C64 },

    #[error("assumption (A_{}) fails: block matrix at level {} is not diagonable", .0.level, .0.level)]
    AssumptionFailure(Box<PartialBlockResult>),

    #[error("direction is not a unit vector (norm {norm})")]
    NotNormalised { norm: f64 },

    #[error("polynomial term tau^{tau_power} xi^{multi_index:?} exceeds degree {degree}")]
    DegreeViolation {
        tau_power: u32,
        multi_index: Vec<u32>,
        degree: u32,
    },

    #[error("not strictly hyperbolic at eta = {eta:?}: roots {first} and {second} (gap {gap:.3e})")]
    NotStrictlyHyperbolic {
        eta: Vec<f64>,
        first: C64,
        second: C64,
        gap: f64,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("remainder integral blew up: {0}")]
    BlowUp(String),

    #[error("insufficient grid: need at least {min_points} points spanning {min_decades} decades")]
    InsufficientGrid { min_points: usize, min_decades: f64 },
}

impl Error {
    /// True for errors that reflect numerical breakdown rather than bad input
    /// or a failed structural assumption.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singular
                | Error::NotDiagonable { .. }
                | Error::NonConvergence { .. }
                | Error::AmbiguousClustering { .. }
                | Error::SmallDivisor { .. }
                | Error::SingularLeadingCoefficient { .. }
                | Error::SingularDiagonaliser { .. }
                | Error::DegenerateLeading { .. }
                | Error::BlowUp(_)
                | Error::InsufficientGrid { .. }
                | Error::NotStrictlyHyperbolic { .. }
        )
    }
}
