use thiserror::Error;

/// Errors raised by model construction, evaluation and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MdpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("policy induces {classes} closed recurrent classes (unichain required)")]
    Multichain { classes: usize },
    #[error("policy iteration revisited a policy after {iterations} iterations")]
    CycleDetected { iterations: usize },
    #[error(
        "pseudo objective identity violated: pseudo {pseudo}, real {real}, distortion {distortion}"
    )]
    IdentityViolation {
        pseudo: f64,
        real: f64,
        distortion: f64,
    },
    #[error("pseudo-mean domain is empty")]
    EmptyDomain,
    #[error("optimality certificate is inconsistent: interval [{lo}, {hi}] is empty")]
    InconsistentCertificate { lo: f64, hi: f64 },
    #[error("segment enumeration exceeded {limit} segments")]
    SegmentLimitExceeded { limit: usize },
    #[error("exceeded the limit of {limit} auxiliary solves")]
    MaxIterationsExceeded { limit: usize },
    #[error("policy space of size {size} exceeds the enumeration cap {cap}")]
    PolicySpaceTooLarge { size: f64, cap: usize },
}

pub type Result<T, E = MdpError> = std::result::Result<T, E>;
