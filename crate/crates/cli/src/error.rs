use std::fmt;

use mvmdp::MdpError;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable file, malformed document or bad flag value.
    Input(String),
    Solver(MdpError),
    /// Output could not be written.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(MdpError::PolicySpaceTooLarge { .. }) => 4,
            CliError::Solver(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Solver(e) => write!(f, "solver error ({}): {e}", error_case(e)),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<MdpError> for CliError {
    fn from(e: MdpError) -> Self {
        CliError::Solver(e)
    }
}

fn error_case(e: &MdpError) -> &'static str {
    match e {
        MdpError::InvalidModel(_) => "InvalidModel",
        MdpError::InvalidPolicy(_) => "InvalidPolicy",
        MdpError::SingularSystem(_) => "SingularSystem",
        MdpError::Multichain { .. } => "Multichain",
        MdpError::CycleDetected { .. } => "CycleDetected",
        MdpError::IdentityViolation { .. } => "IdentityViolation",
        MdpError::EmptyDomain => "EmptyDomain",
        MdpError::InconsistentCertificate { .. } => "InconsistentCertificate",
        MdpError::SegmentLimitExceeded { .. } => "SegmentLimitExceeded",
        MdpError::MaxIterationsExceeded { .. } => "MaxIterationsExceeded",
        MdpError::PolicySpaceTooLarge { .. } => "PolicySpaceTooLarge",
    }
}
