use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid shaper mask: bin {bin} has |c| = {magnitude}")]
    InvalidMask { bin: i64, magnitude: f64 },

    #[error("window too narrow: pair needs {needed} guard bins, window offers {available}")]
    Truncation { needed: i64, available: i64 },

    #[error("measurement plan does not cover pair ({0}, {1})")]
    IncompleteMeasurement(usize, usize),

    #[error("energy diverged at iteration {iteration}; try a smaller step size")]
    Divergence { iteration: usize },

    #[error("basis state {index} inconsistent with lattice: {reason}")]
    Consistency { index: usize, reason: String },

    #[error("symmetry does not commute with the Hamiltonian: {0}")]
    SymmetryViolation(String),

    #[error("vector norm {norm} differs from 1")]
    Normalization { norm: f64 },

    #[error("missing entry: {0}")]
    MissingEntry(String),

    #[error("channel parity: {0}")]
    ChannelParity(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("solve domain too small: {0}")]
    DomainTooSmall(String),

    #[error("momentum {p} MeV outside (0, {cutoff}) MeV")]
    OutOfRange { p: f64, cutoff: f64 },

    #[error("extrapolation invalid: {0}")]
    ExtrapolationInvalid(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("matrix asymmetry {0:e} exceeds tolerance")]
    Asymmetric(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

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
