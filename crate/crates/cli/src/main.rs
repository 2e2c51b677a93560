//! `shellspec` command-line front end.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] shellspec::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Numerical(_) => 2,
            Self::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl From<shellspec::analysis::AnalysisError> for CliError {
    fn from(e: shellspec::analysis::AnalysisError) -> Self {
        Self::Core(e.into())
    }
}

macro_rules! core_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Core(e.into())
            }
        }
    )*};
}
core_error!(
    shellspec::mesh::MeshError,
    shellspec::shapes::ShapeError,
    shellspec::spectral::SpectralError,
    shellspec::capacity::CapacityError,
    shellspec::assembly::AssemblyError,
    shellspec::kernels::KernelError
);

fn main() -> ExitCode {
    let cli = match commands::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
