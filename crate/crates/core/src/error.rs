use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid pure state: {0}")]
    InvalidPureState(String),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("measurement side must be a single qubit, got dimension {0}")]
    NotQubitSide(usize),

    #[error("{measure} is undefined here: {reason}")]
    MeasureUndefined { measure: String, reason: String },

    #[error(
        "bound chain requires d_A <= d_B for every leaf (d_A = {d_a}, leaf dimension {d_leaf})"
    )]
    BoundChainUnavailable { d_a: usize, d_leaf: usize },

    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
