use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("Hilbert space mismatch: {left:?} vs {right:?}")]
    SpaceMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("invalid truncation n_max={0}, need at least 2")]
    InvalidTruncation(usize),

    #[error("site {site} out of range for a space with {n_sites} subsystems")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Hamiltonian is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("degenerate steady state: {count} eigenvalues inside the kernel tolerance")]
    DegenerateSteadyState { count: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("not converged within horizon {horizon:.4e} (last trace distance {last_distance:.4e})")]
    Timeout { horizon: f64, last_distance: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("port count mismatch: {left} vs {right}")]
    PortMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular network: (I - S_ii A) is not invertible")]
    SingularNetwork,

    #[error("ill-conditioned network: condition number {0:.3e}")]
    IllConditionedNetwork(f64),

    #[error("adiabatic elimination invalid: validity ratio {ratio:.3} for qubit {qubit}")]
    EliminationInvalid { qubit: usize, ratio: f64 },

    #[error("unsupported operator structure: {0}")]
    UnsupportedStructure(String),

    #[error("objective is not finite at the start point")]
    NonFiniteObjective,
}

pub type Result<T> = std::result::Result<T, Error>;
