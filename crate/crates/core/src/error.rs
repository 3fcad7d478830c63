use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the CLI exit codes: configuration problems exit
/// with 2, numerical-domain problems with 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("Ricci tensor leaves the cone at {location}: epsilon gap {eps_gap:e}")]
    Obstruction { location: String, eps_gap: f64 },

    #[error("chart overflow: |coords| = {norm} exceeds chart radius {radius}")]
    ChartOverflow { norm: f64, radius: f64 },

    #[error("frame drift {drift:e} exceeds {limit:e} at lattice node {node:?}")]
    FrameDrift {
        drift: f64,
        limit: f64,
        node: Vec<i64>,
    },

    #[error("graph is disconnected: {reachable} of {total} nodes reachable")]
    Disconnected { reachable: usize, total: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
