//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Error {
    /// The input violates a precondition or a structural invariant.
    Invalid { context: String, message: String },
    /// The request would exceed a configured enumeration or memory bound.
    Resource { context: String, message: String },
}

impl Error {
    pub fn invalid(context: &str, message: impl Into<String>) -> Self {
        Error::Invalid { context: context.into(), message: message.into() }
    }

    pub fn resource(context: &str, message: impl Into<String>) -> Self {
        Error::Resource { context: context.into(), message: message.into() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid { .. } => "validation",
            Error::Resource { .. } => "resource",
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }

    pub fn context(&self) -> &str {
        match self {
            Error::Invalid { context, .. } | Error::Resource { context, .. } => context,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Error::Invalid { message, .. } | Error::Resource { message, .. } => message,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error in {}: {}", self.kind(), self.context(), self.message())
    }
}

impl core::error::Error for Error {}
