use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(
        "operator is not Hermitian: |a[{row}][{col}] - conj(a[{col}][{row}])| = {deviation:e}"
    )]
    NonHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} exceeds the supported maximum of {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigendecomposition(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),

    #[error("invalid inverse temperature {0}")]
    InvalidTemperature(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("explicit purification needs dimension {dim}, above the cap of {cap}")]
    PurificationCap { dim: usize, cap: usize },

    #[error("anticommutator equation is unsolvable: kernel block of the right-hand side has norm {norm:e}")]
    Unsolvable { norm: f64 },

    #[error("spectrum floor dropped {mass:e} of the reduced-state weight; result is unreliable")]
    UnreliableFloor { mass: f64 },

    #[error("fidelity {0} exceeds one beyond numerical tolerance")]
    FidelityAboveOne(f64),

    #[error("spectrum is gapless within the degeneracy tolerance {0:e}")]
    Gapless(f64),

    #[error("no sign change of the gap condition in the bracket ({lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("gap profile rejected: {0}")]
    BadProfile(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
