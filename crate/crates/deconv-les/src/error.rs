use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("grid error: {0}")]
    Grid(String),

    #[error("field shape mismatch: {0}")]
    Shape(String),

    #[error("{context}: no convergence after {iters} iterations, residual {residual:.3e} (target {target:.3e})")]
    SolverDiverged {
        context: &'static str,
        iters: usize,
        residual: f64,
        target: f64,
    },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error ({path}): {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
