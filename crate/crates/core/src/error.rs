use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Errors raised by validation of inputs and configurations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A value violated a documented range or finiteness constraint.
    Invalid { what: &'static str, detail: String },
    /// Two grids that must agree in shape did not.
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// Images with different channel counts were combined.
    ChannelMismatch { expected: usize, found: usize },
    /// An augmentation or corruption name that is not in the supported set.
    UnknownOp(String),
    /// A component failed while transforming one sample.
    InSample {
        epoch: u32,
        index: u64,
        source: Box<Error>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid { what, detail } => write!(f, "invalid {what}: {detail}"),
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::ChannelMismatch { expected, found } => {
                write!(f, "channel mismatch: expected {expected}, found {found}")
            }
            Error::UnknownOp(name) => write!(f, "unknown operation `{name}`"),
            Error::InSample {
                epoch,
                index,
                source,
            } => write!(f, "epoch {epoch}, sample {index}: {source}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::InSample { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
