use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A malformed expression, rational literal or hyperreal rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at offset {}: expected {}, found {}",
            self.position, self.expected, self.found
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error {0}")]
    Parse(#[from] ParseError),
    #[error("division by zero")]
    DivisionByZero,
    #[error("root of a value with non-positive leading coefficient")]
    NonPositiveLeading,
    #[error("order generator must be a nonzero infinitesimal")]
    NotInfinitesimal,
    #[error("transcendental function applied to an unlimited argument")]
    TranscendentalOnUnlimited,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("value too large to approximate: {0}")]
    Overflow(String),
    #[error("not smooth at point: {0}")]
    NonSmoothAtPoint(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unsupported node for symbolic differentiation: {0}")]
    UnsupportedNode(String),
    #[error("curve has zero velocity at the point")]
    ZeroVelocity,
    #[error("lower curve exceeds upper curve at x = {0}")]
    OrderViolation(String),
    #[error("negative radius at x = {0}")]
    NegativeRadius(String),
    #[error("region has zero mass")]
    ZeroMass,
    #[error("gauge partition exceeded bisection depth {depth} near [{left}, {right}]")]
    DepthExceeded {
        depth: u32,
        left: String,
        right: String,
    },
    #[error("unknown or non-polynomial functional: {0}")]
    UnknownFunctional(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{source} (at offset {position})")]
    At {
        position: usize,
        source: Box<Error>,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches an expression offset unless one is already present.
    pub fn at(self, position: usize) -> Self {
        match self {
            e @ Error::At { .. } => e,
            e => Error::At {
                position,
                source: Box::new(e),
            },
        }
    }

    /// The underlying error with any location wrappers removed.
    pub fn kind(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.kind(),
            e => e,
        }
    }

    pub fn position(&self) -> Option<usize> {
        match self {
            Error::At { position, .. } => Some(*position),
            Error::Parse(p) => Some(p.position),
            _ => None,
        }
    }

    /// Stable name of the error case, used by the CLI.
    pub fn name(&self) -> &'static str {
        match self.kind() {
            Error::Parse(_) => "ParseError",
            Error::DivisionByZero => "DivisionByZero",
            Error::NonPositiveLeading => "NonPositiveLeading",
            Error::NotInfinitesimal => "NotInfinitesimal",
            Error::TranscendentalOnUnlimited => "TranscendentalOnUnlimited",
            Error::Domain(_) => "DomainError",
            Error::Overflow(_) => "Overflow",
            Error::NonSmoothAtPoint(_) => "NonSmoothAtPoint",
            Error::UnboundVariable(_) => "UnboundVariable",
            Error::UnsupportedNode(_) => "UnsupportedNode",
            Error::ZeroVelocity => "ZeroVelocity",
            Error::OrderViolation(_) => "OrderViolation",
            Error::NegativeRadius(_) => "NegativeRadius",
            Error::ZeroMass => "ZeroMass",
            Error::DepthExceeded { .. } => "DepthExceeded",
            Error::UnknownFunctional(_) => "UnknownFunctional",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::At { .. } => unreachable!(),
        }
    }

    /// True for malformed input, as opposed to a mathematical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self.kind(),
            Error::Parse(_) | Error::InvalidArgument(_) | Error::UnboundVariable(_)
        )
    }
}
