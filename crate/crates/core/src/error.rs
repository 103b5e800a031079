use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are grouped so that a front end can map them onto exit
/// codes: [`Error::is_validation`] for bad inputs, [`Error::is_resource`] for
/// hard caps, everything else is a runtime or parse failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible sizes: {0}")]
    IncompatibleSizes(String),

    #[error("parity violation: k = {k} is not reachable with n = {n} spins")]
    Parity { n: usize, k: i64 },

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("test function hypothesis violated: {0}")]
    TestFunction(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("empty measure")]
    EmptyMeasure,

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::IncompatibleSizes(_)
                | Error::Parity { .. }
                | Error::IndexOutOfRange { .. }
                | Error::TestFunction(_)
        )
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceCap(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
