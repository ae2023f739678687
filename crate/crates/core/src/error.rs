use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Each variant maps to one of three coarse categories (see [`ErrorKind`]),
/// which the command-line front end turns into process exit codes.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LabError {
    #[error("word reduces to the identity")]
    IdentityWord,
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("singular product while evaluating word {0}")]
    SingularProduct(String),
    #[error("proximality failure: {0}")]
    ProximalityFailure(String),
    #[error("degenerate pairing between covector and attracting vector ({0:e})")]
    DegeneratePairing(f64),
    #[error("degenerate cross-ratio quadruple ({0:e})")]
    DegenerateQuad(f64),
    #[error("element is not loxodromic (|lambda| = {0})")]
    NotLoxodromic(f64),
    #[error("non-positive length {value} on class {class}")]
    PositivityViolation { class: String, value: f64 },
    #[error("power iteration did not converge in {0} steps")]
    NonConvergence(usize),
    #[error("pressure root is not bracketed: P(0) = {0}")]
    BracketFailure(f64),
    #[error("classes {0} and {1} are not coprime")]
    NotCoprime(String, String),
    #[error("parameter point outside the family's domain: {0}")]
    OutOfDomain(String),
    #[error("certification failed at parameter {0}")]
    CertificationFailure(String),
    #[error("finite-difference step too large: {0}")]
    StepTooLarge(String),
}

/// Coarse error category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Resource,
    Numeric,
}

impl LabError {
    pub fn kind(&self) -> ErrorKind {
        use LabError::*;
        match self {
            IdentityWord | UnsupportedGroup(_) | InvalidArgument(_) | NotCoprime(..)
            | OutOfDomain(_) => ErrorKind::Input,
            ResourceLimit(_) | InsufficientData(_) => ErrorKind::Resource,
            _ => ErrorKind::Numeric,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
