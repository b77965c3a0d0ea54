use thiserror::Error;

use crate::bfm::BfmError;
use crate::bim::ProfileError;
use crate::netmodel::CaseError;
use crate::pmatrix::PmatrixError;
use crate::radial::RadialError;
use crate::relax::RelaxError;
use crate::socp::SolverError;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-level error that wraps the per-module failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Bfm(#[from] BfmError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Pmatrix(#[from] PmatrixError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
