use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Fock dimension for M={modes}, S={bosons} does not fit in 64 bits")]
    DimensionOverflow { modes: usize, bosons: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis is for (M={basis_modes}, S={basis_bosons}) but the model has (M={modes}, S={bosons})")]
    BasisMismatch {
        basis_modes: usize,
        basis_bosons: u32,
        modes: usize,
        bosons: u32,
    },

    #[error("overlap order {order} exceeds the boson number {bosons}")]
    OrderTooLarge { order: u32, bosons: u32 },

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("ensemble norm {norm:e} is too small, the state is degenerate")]
    DegenerateState { norm: f64 },

    #[error("Bloch coordinates need a two-mode state, got {modes} modes")]
    NotTwoMode { modes: usize },

    #[error("lattice point has zero amplitude in every mode")]
    ZeroLatticePoint,

    #[error("requested {requested} lattice points but only {available} are available")]
    GridTooSmall { requested: usize, available: u128 },

    #[error("lattice exhausted after {achieved} distinct states, {requested} requested")]
    PoolExhausted { achieved: usize, requested: usize },

    #[error("step size underflow at t = {t} (h = {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("non-finite value in {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("ensemble norm drifted by {drift:e} at t = {t}")]
    NormDrift { t: f64, drift: f64 },

    #[error("every direction of the tangent system falls below the cutoff")]
    DegenerateSystem,

    #[error("Fock dimension {dim} exceeds the oracle cap {cap}")]
    OracleTooLarge { dim: u64, cap: u64 },

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("propagation failed after t = {t}: {cause}")]
    Propagation {
        t: f64,
        cause: Box<Error>,
        /// Last ensemble that passed every check.
        snapshot: Box<crate::gcs::GcsEnsemble>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed trajectory data: {0}")]
    Format(String),
}

impl Error {
    /// The underlying failure, looking through [`Error::Propagation`].
    pub fn root(&self) -> &Error {
        match self {
            Error::Propagation { cause, .. } => cause.root(),
            other => other,
        }
    }
}
