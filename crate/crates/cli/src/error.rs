use std::path::PathBuf;

use invharm_core::config::ConfigError;
use invharm_core::{BesselError, OdeError, OracleError, ParamError, WaveError};
use thiserror::Error;

/// Process exit codes. Stable: scripts assert on them.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const IO: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const VERIFY_FAIL: i32 = 4;
    pub const INCONCLUSIVE: i32 = 5;
    pub const UNSTABLE: i32 = 6;
    pub const GRID_TOO_COARSE: i32 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("output directory {0} is locked by another run (remove the lock file if stale)")]
    Locked(PathBuf),
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: Box<ConfigError> },
    #[error("{0}")]
    Usage(String),
    #[error("{module}: {message}")]
    Solver { module: &'static str, message: String },
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("digest mismatch in {path}: {what} is {found}, expected {expected}")]
    DigestMismatch { path: PathBuf, what: &'static str, found: String, expected: String },
    #[error("{0}")]
    Inconclusive(String),
    #[error("{0}")]
    Unstable(String),
    #[error("{0}")]
    GridTooCoarse(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Locked(_) => exit::IO,
            CliError::Config { .. } | CliError::Usage(_) => exit::PARSE,
            CliError::Solver { .. } => exit::SOLVER,
            CliError::VerifyFailed(_) | CliError::DigestMismatch { .. } => exit::VERIFY_FAIL,
            CliError::Inconclusive(_) => exit::INCONCLUSIVE,
            CliError::Unstable(_) => exit::UNSTABLE,
            CliError::GridTooCoarse(_) => exit::GRID_TOO_COARSE,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Solver { module: "params", message: e.to_string() }
    }
}

impl From<BesselError> for CliError {
    fn from(e: BesselError) -> Self {
        CliError::Solver { module: "bessel", message: e.to_string() }
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::Param(p) => p.into(),
            e => CliError::Solver { module: "ode", message: e.to_string() },
        }
    }
}

impl From<WaveError> for CliError {
    fn from(e: WaveError) -> Self {
        match e {
            WaveError::Ode(e) => e.into(),
            WaveError::Bessel(e) => e.into(),
            WaveError::Param(e) => e.into(),
            WaveError::GridTooCoarse { .. } => CliError::GridTooCoarse(e.to_string()),
            WaveError::Inconclusive { .. } => CliError::Inconclusive(e.to_string()),
            e => CliError::Solver { module: "wavefunction", message: e.to_string() },
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Wave(e) => e.into(),
            OracleError::Param(e) => e.into(),
            OracleError::Unstable { .. } => CliError::Unstable(e.to_string()),
            e => CliError::Solver { module: "oracle", message: e.to_string() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_errors_keep_their_class() {
        let e: CliError = OracleError::Wave(WaveError::GridTooCoarse { residuals: vec![] }).into();
        assert_eq!(e.exit_code(), exit::GRID_TOO_COARSE);
        let e: CliError = OracleError::Unstable { t: 0.1, norm_drift: 1.0, step_defect: 1.0 }.into();
        assert_eq!(e.exit_code(), exit::UNSTABLE);
        let e: CliError = WaveError::Ode(OdeError::ToleranceNotMet { t: 0.0, h: 1e-20 }).into();
        assert!(matches!(e, CliError::Solver { module: "ode", .. }));
    }
}
