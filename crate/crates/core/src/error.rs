use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared identifier `{name}` at line {line}, column {column}")]
    UndeclaredIdentifier {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("variable x{index} at line {line}, column {column} exceeds the domain dimension {domain}")]
    VariableOutOfRange {
        line: usize,
        column: usize,
        index: usize,
        domain: usize,
    },
    #[error("codomain declares {declared} components but {found} component lines were given")]
    DimensionMismatch { declared: usize, found: usize },
    #[error("missing `{0}` declaration")]
    MissingHeader(&'static str),
    #[error("codomain dimension {codomain} exceeds domain dimension {domain}")]
    CodomainExceedsDomain { domain: usize, codomain: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DomainErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative number")]
    SqrtOfNegative,
    #[error("logarithm of a non-positive number")]
    LogOfNonPositive,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("component F{component}: {kind}")]
    Domain { component: usize, kind: DomainErrorKind },
    #[error("{what} has length {found}, expected {expected}")]
    WrongLength {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("direction vectors must be nonzero")]
    ZeroDirection,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("Jacobian has rank {rank} < {expected}: the map is not a submersion here")]
    RankDeficient { rank: usize, expected: usize },
    #[error("invalid complex structure: {0}")]
    InvalidComplexStructure(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("frames are not mutually orthogonal (residual {0:.3e})")]
    FramesNotOrthogonal(f64),
    #[error("slant angle is absent")]
    ThetaAbsent,
    #[error("Ĵ undefined at θ = π/2 (1/cos θ singular)")]
    JHatUndefined,
    #[error("projector field not smooth here: {0}")]
    NotSmooth(String),
    #[error("fiber is zero-dimensional")]
    TrivialFiber,
    #[error("plane is not J-invariant (residual {0:.3e})")]
    PlaneNotInvariant(f64),
    #[error("plane is not inside the required subspace (residual {0:.3e})")]
    PlaneOutsideSubspace(f64),
}
