use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(
        "matrix is not positive definite: pivot {pivot} (original dof {dof}) has value {value:e}"
    )]
    NotPositiveDefinite {
        pivot: usize,
        dof: usize,
        value: f64,
    },

    #[error("matrix is singular: pivot {pivot} (original dof {dof}) vanished ({value:e})")]
    Singular {
        pivot: usize,
        dof: usize,
        value: f64,
    },

    #[error("solver did not reach tolerance {tol:e}: relative residual {residual:e}")]
    NotConverged { residual: f64, tol: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Unwraps context layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_indefinite(&self) -> bool {
        matches!(self.root(), Error::NotPositiveDefinite { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
