use thiserror::Error;

/// Every failure surfaced by the library.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("element is not invertible at the working precision")]
    NonInvertible,
    #[error("field is not a member of the tower: {0}")]
    NotASubfield(String),
    #[error("invalid prime {0}: an odd prime is required")]
    InvalidPrime(u64),
    #[error("invalid field description: {0}")]
    InvalidField(String),
    #[error("window overflow: support at {index:?} exceeds the window [-{window}, {window}]")]
    WindowOverflow { index: Vec<i64>, window: i64 },
    #[error("series is not a Lubin-Tate series: {0}")]
    NotLubinTate(String),
    #[error("successive approximation did not stabilize: {0}")]
    NonConvergent(String),
    #[error("element does not lie in the maximal ideal")]
    NotInMaximalIdeal,
    #[error("no unit coefficient up to degree {0}")]
    AllCoefficientsNonUnit(usize),
    #[error("torsion point refinement failed: {0}")]
    RootNotFound(String),
    #[error("ambient field does not contain the requested torsion: {0}")]
    AmbientTooSmall(String),
    #[error("series division mismatch: {0}")]
    DivisionMismatch(String),
    #[error("no representing polynomial available: {0}")]
    NoRepresentation(String),
    #[error("value is not killed by the annihilator ideal: {0}")]
    AnnihilatorViolation(String),
    #[error("symbol entry {0} is zero at the working precision")]
    ZeroEntry(usize),
    #[error("symbols live over different fields")]
    AmbientMismatch,
    #[error("symbol shape not supported: {0}")]
    ShapeNotSupported(String),
    #[error("input outside the domain of the formula: {0}")]
    DomainViolation(String),
    #[error("representing series does not reproduce the element: {0}")]
    RepresentationMismatch(String),
    #[error("invalid pairing plan: {0}")]
    PlanInvalid(String),
    #[error("invariant missing: {0}")]
    InvariantMissing(String),
    #[error("closed form for c1 needs an unramified K/S: {0}")]
    UnramifiedAssumptionViolated(String),
    #[error("field does not contain the required roots of unity: {0}")]
    TorsionMissing(String),
    #[error("norm subgroup has index {found}, expected {expected}")]
    IndexMismatch { found: u64, expected: u64 },
    #[error("outside the supported scope: {0}")]
    Unsupported(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
