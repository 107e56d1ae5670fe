//! Lab-level errors carrying the process exit code they map to:
//! 0 success, 1 verification failure, 2 usage/config error,
//! 3 runtime/numerical failure.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Runtime(String),
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        Self::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) => 1,
            Self::Config(_) => 2,
            Self::Runtime(_) => 3,
        }
    }
}

impl From<filmlab_core::Error> for LabError {
    fn from(e: filmlab_core::Error) -> Self {
        use filmlab_core::Error as E;
        match e {
            // ZeroDatum only arises while validating configured initial
            // data, so it maps to the config exit code as well
            E::ConfigInvalid(_) | E::InvalidDomain(_) | E::InvalidDescriptor(_) | E::ZeroDatum => {
                Self::Config(e.to_string())
            }
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

pub type LabResult<T> = Result<T, LabError>;
