use thiserror::Error;

/// Errors raised by every module of the crate.
///
/// The variant names double as the stable error names printed by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands live in different fields: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error at position {pos}: {msg}")]
    ParseError { pos: usize, msg: String },
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("characteristic polynomial does not split over the field; irreducible factor {factor}")]
    DoesNotSplit { factor: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("tuple violates the product relation")]
    ProductRelation,
    #[error("invalid point list: {0}")]
    InvalidPoints(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("braid automorphism does not preserve the parabolic spaces: {0}")]
    DimensionInconsistency(String),
    #[error("lambda must differ from 0 and 1")]
    LambdaIsOne,
    #[error("point configuration not supported: {0}")]
    LayoutError(String),
    #[error("prime {0} divides a denominator")]
    BadPrime(u64),
    #[error("cyclotomic polynomial of order {order} has no root in a quadratic extension of F_{ell} (needs degree {degree})")]
    NoRootInQuadratic { order: u32, ell: u64, degree: u32 },
    #[error("no invariant non-degenerate symmetric form")]
    NoInvariantForm,
    #[error("point counting requires p > 3, got p = {0}")]
    SmallPrime(u64),
    #[error("Frobenius eigenvalue check failed for p = {0}")]
    VerificationFailed(u64),
    #[error("tuple file error: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-friendly name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::FieldMismatch(..) => "FieldMismatch",
            Error::DivisionByZero => "DivisionByZero",
            Error::ParseError { .. } => "ParseError",
            Error::InvalidField(_) => "InvalidField",
            Error::DoesNotSplit { .. } => "DoesNotSplit",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotInvertible => "NotInvertible",
            Error::ProductRelation => "ProductRelation",
            Error::InvalidPoints(_) => "InvalidPoints",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::Precondition(_) => "Precondition",
            Error::DimensionInconsistency(_) => "DimensionInconsistency",
            Error::LambdaIsOne => "LambdaIsOne",
            Error::LayoutError(_) => "LayoutError",
            Error::BadPrime(_) => "BadPrime",
            Error::NoRootInQuadratic { .. } => "NoRootInQuadratic",
            Error::NoInvariantForm => "NoInvariantForm",
            Error::SmallPrime(_) => "SmallPrime",
            Error::VerificationFailed(_) => "VerificationFailed",
            Error::Format(_) => "Format",
        }
    }

    /// True for errors caused by malformed input text rather than by the mathematics.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::ParseError { .. } | Error::Format(_) | Error::InvalidField(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
