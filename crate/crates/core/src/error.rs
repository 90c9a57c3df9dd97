use thiserror::Error;

use crate::holonomy::HolonomyReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generalized Pauli label: exponent {0} is outside {{0, 1, 2}}")]
    InvalidLabel(u8),

    #[error("invalid basis string {0:?}: expected characters from {{0, 1, 2}}")]
    InvalidBasisString(String),

    #[error("site {site} out of range for {n} qutrits")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("two-site operator needs distinct sites, got {0} twice")]
    SiteCollision(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported register size n = {n} (maximum {max})")]
    TooManyQutrits { n: usize, max: usize },

    #[error("all probability leaked out of the logical subspace (retained {retained:e})")]
    AllLeaked { retained: f64 },

    #[error("state has leaked out of the logical subspace (leak probability {0:e})")]
    LeakedState(f64),

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("gate does not preserve the logical subspace (defect {0:e})")]
    NotBlockPreserving(f64),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("integration did not converge: step halving changed the propagator by {0:e}")]
    NumericalAccuracy(f64),

    #[error(
        "schedule is not holonomic: cyclicity defect {:e}, parallel transport residual {:e}",
        .0.cyclicity_defect,
        .0.parallel_transport_residual
    )]
    NotHolonomic(Box<HolonomyReport>),

    #[error("circuit contains no two-qutrit gate")]
    NoTwoQutritGate,

    #[error("asymmetric noise needs at least one positive weight")]
    ZeroWeights,

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 1 for bad input, 2 for failed numerical validation,
    /// 3 when every trial leaked.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericalAccuracy(_)
            | Error::NotHolonomic(_)
            | Error::NotUnitary(_)
            | Error::NotHermitian(_)
            | Error::NotBlockPreserving(_) => 2,
            Error::AllLeaked { .. } => 3,
            _ => 1,
        }
    }
}
