use levy_transport::{Error, ErrorKind};

/// A failed command with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const VALIDATION: u8 = 2;
    pub const NUMERIC: u8 = 3;
    pub const IO: u8 = 4;

    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: Self::VALIDATION,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: Self::IO,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Validation => Self::VALIDATION,
            ErrorKind::Numeric => Self::NUMERIC,
            ErrorKind::Io => Self::IO,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}
