use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("element {element} does not belong to space {space}")]
    NotInSpace { space: String, element: String },
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("{0} weights for {1} elements")]
    LengthMismatch(usize, usize),
    #[error("empty support after dropping zero weights")]
    EmptySupport,
    #[error("carrier of {0} is not finite")]
    InfiniteCarrier(String),
    #[error("carrier of {space} has {size} points, more than the enumeration limit {limit}")]
    CarrierTooLarge {
        space: String,
        size: usize,
        limit: usize,
    },
    #[error("not an ideal: {0}")]
    InvalidIdeal(String),
    #[error("space {0} is not of discrete type")]
    NotDiscrete(String),
    #[error("discrete part is not totally ordered: {0}")]
    NotTotal(String),
    #[error("map {map} is undefined at {element}")]
    Undefined { map: String, element: String },
    #[error("support too large for brute force: {0} x {1} (limit 4 x 4)")]
    SupportTooLarge(usize, usize),
    #[error("too many generators: {0} (limit 16)")]
    TooManyGenerators(usize),
    #[error("dyadic depth {0} exceeds limit 8")]
    DepthExceeded(usize),
    #[error("universe mismatch: {0} vs {1}")]
    UniverseMismatch(usize, usize),
    #[error("support point {0} escapes the field's universe")]
    SupportEscapes(String),
    #[error("field has {0} atoms; member enumeration is limited to 20")]
    TooManyAtoms(usize),
    #[error("{0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
