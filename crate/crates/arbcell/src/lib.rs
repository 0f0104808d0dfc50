//! Standard-library companion to `arbcell-core`: configuration files,
//! CSV formats, the study pipeline and the CLI plumbing. The binary in
//! this crate is a thin wrapper over [`cli::run`].

pub mod cli;
pub mod config;
pub mod files;
pub mod study;

/// Process exit codes: 0 success, 1 usage, 2 data error, 3 model fault.
#[derive(Debug, Clone, PartialEq)]
pub enum AppError {
    Usage(String),
    Data(String),
    /// Model fault; carries the faulting timestamp in seconds.
    Fault { message: String, t_s: u64 },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Fault { .. } => 3,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(msg) => write!(f, "usage error: {msg}"),
            AppError::Data(msg) => write!(f, "{msg}"),
            AppError::Fault { message, t_s } => {
                write!(f, "model fault at t={t_s} s: {message}")
            }
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Data(format!("io error: {e}"))
    }
}

impl From<arbcell_core::HarnessError> for AppError {
    fn from(e: arbcell_core::HarnessError) -> Self {
        match &e {
            arbcell_core::HarnessError::Fault { t_s, .. } => AppError::Fault {
                message: e.to_string(),
                t_s: *t_s,
            },
            arbcell_core::HarnessError::Market { .. } => AppError::Data(e.to_string()),
        }
    }
}

impl From<arbcell_core::OptimizeError> for AppError {
    fn from(e: arbcell_core::OptimizeError) -> Self {
        fn fault_time(e: &arbcell_core::OptimizeError) -> Option<u64> {
            match e {
                arbcell_core::OptimizeError::Rollout { t_s, .. } => Some(*t_s),
                arbcell_core::OptimizeError::Window { source, .. } => fault_time(source),
                _ => None,
            }
        }
        match fault_time(&e) {
            Some(t_s) => AppError::Fault {
                message: e.to_string(),
                t_s,
            },
            None => AppError::Data(e.to_string()),
        }
    }
}
