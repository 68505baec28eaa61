use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coincident points: |x - z| = {0:e}")]
    CoincidentPoints(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear solve failed ({reason}); condition estimate {condition:e}")]
    LinearSolve { reason: String, condition: f64 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error(
        "discrepancy has no sign change on [{alpha_lo:e}, {alpha_hi:e}]: \
         f(lo) = {f_lo:e}, f(hi) = {f_hi:e}"
    )]
    NoSignChange {
        alpha_lo: f64,
        alpha_hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("degenerate spectrum: all singular values below {0:e} of the largest")]
    DegenerateSpectrum(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io(_) | Error::Format(_) => 1,
            _ => 3,
        }
    }
}
