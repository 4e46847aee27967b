//! Error type shared by every module of the crate.

use thiserror::Error;

/// Coarse classification of an error, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller supplied malformed or inconsistent arguments.
    Usage,
    /// The arguments were well formed but the requested computation is
    /// impossible or ill-posed for them.
    Domain,
    /// An internal consistency check failed.
    Internal,
    /// Reading or writing files failed.
    Io,
}

/// All failures reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Arguments do not agree in dimension.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Generic usage error (bad parameter, violated precondition).
    #[error("usage error: {0}")]
    Usage(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Degenerate input (for example coincident velocities) for which the
    /// requested quantity is undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Two collisions sharing a particle occur at numerically equal times.
    #[error(
        "simultaneous collisions at t = {time}: triplets {first:?} and {second:?} share a particle"
    )]
    SimultaneousCollision {
        time: f64,
        first: [usize; 3],
        second: [usize; 3],
    },

    /// The event-count circuit breaker tripped.
    #[error("runaway dynamics: more than {limit} events before reaching the target time")]
    Runaway { limit: u64 },

    /// Rejection sampling of initial data could not find admissible
    /// configurations often enough.
    #[error(
        "configuration density too high: {accepted} admissible draws out of {attempts} \
         (acceptance below 1%); enlarge the box or reduce eps"
    )]
    ConfigurationDensity { accepted: usize, attempts: usize },

    /// The DSMC majorant was exceeded by an actual kernel value.
    #[error("internal error: collision kernel majorant violated (acceptance probability {0})")]
    MajorantViolated(f64),

    /// The DSMC time step requests more candidates than there are triplets.
    #[error(
        "time step too large: {candidates} candidate collisions requested but only {triplets} \
         triplets exist; reduce dt"
    )]
    Stability { candidates: u64, triplets: u64 },

    /// Too many velocity samples fall outside the entropy histogram support.
    #[error("{outside} of {total} samples lie outside the histogram support (more than 1%)")]
    SupportExceeded { outside: usize, total: usize },

    /// Configuration-file problems, always tied to a key and a line.
    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    /// Underlying I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// An internal consistency check failed (for example conservation drift).
    #[error("internal error: {0}")]
    Internal(String),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Classify the error for exit-code selection.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionMismatch { .. } | Error::Usage(_) | Error::Config { .. } => {
                ErrorKind::Usage
            }
            Error::Domain(_)
            | Error::Degenerate(_)
            | Error::SimultaneousCollision { .. }
            | Error::Runaway { .. }
            | Error::ConfigurationDensity { .. }
            | Error::Stability { .. }
            | Error::SupportExceeded { .. } => ErrorKind::Domain,
            Error::MajorantViolated(_) | Error::Internal(_) => ErrorKind::Internal,
            Error::Io { .. } | Error::Json(_) => ErrorKind::Io,
        }
    }

    /// Wrap an I/O error together with the path it concerns.
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Fail with [`Error::DimensionMismatch`] unless `found == expected`.
pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
