use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("time step {dt:e} violates the CFL bound {dt_max:e} in cell {cell}")]
    Cfl { dt: f64, dt_max: f64, cell: usize },

    #[error("steady iteration diverged at step {step}: residual {residual:e} (initial {initial:e})")]
    Divergence {
        step: usize,
        residual: f64,
        initial: f64,
        history: Vec<f64>,
    },

    #[error("line {axis}={coordinate} lies outside the domain")]
    LineOutsideDomain { axis: char, coordinate: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidMesh(_) | Error::LineOutsideDomain { .. } => 2,
            Error::Cfl { .. } | Error::Divergence { .. } => 3,
            Error::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
