use thiserror::Error;

use crate::scalar::FieldDescriptor;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldDescriptor, FieldDescriptor),
    #[error("no primitive root of unity of order {order} in {field}")]
    OrderNotAvailable { field: FieldDescriptor, order: u32 },
    #[error("series has no nonzero coefficient below t^{prec}")]
    IndistinguishableFromZero { prec: i64 },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is singular within precision")]
    SingularWithinPrecision,
    #[error("entry has negative valuation {valuation}; expected an integral matrix")]
    NotIntegral { valuation: i64 },
    #[error("constant term is not invertible")]
    SingularAtZero,
    #[error("contraction violated at iteration {iteration}: C_j and C_(j-1) differ at t^{exponent}, below t^{modulus}")]
    ContractionViolated {
        iteration: usize,
        exponent: i64,
        modulus: i64,
    },
    #[error("not a cocycle: {0}")]
    NotACocycle(String),
    #[error("no cyclic vector found after {trials} trials; raise the precision or the number of trials")]
    CyclicSearchFailed { trials: usize },
    #[error("rescaling exponent is not an integer: {0}")]
    DivisibilityViolated(String),
    #[error("cocycle does not extend to k[[t]]: {0}")]
    NotExtendable(String),
    #[error("semigroup has no pair of coprime generators")]
    MissingCoprimePair,
    #[error("no eigenvalue in {field}; characteristic polynomial {polynomial} needs a larger field")]
    FieldExtensionRequired {
        field: FieldDescriptor,
        polynomial: String,
    },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("substitution image has a zero denominator")]
    SubstitutionPole,
    #[error("Jacobian determinant vanishes")]
    DegenerateMap,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Variant name, used as a stable tag in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::FieldMismatch(..) => "FieldMismatch",
            Error::OrderNotAvailable { .. } => "OrderNotAvailable",
            Error::IndistinguishableFromZero { .. } => "IndistinguishableFromZero",
            Error::DimMismatch(_) => "DimMismatch",
            Error::SingularWithinPrecision => "SingularWithinPrecision",
            Error::NotIntegral { .. } => "NotIntegral",
            Error::SingularAtZero => "SingularAtZero",
            Error::ContractionViolated { .. } => "ContractionViolated",
            Error::NotACocycle(_) => "NotACocycle",
            Error::CyclicSearchFailed { .. } => "CyclicSearchFailed",
            Error::DivisibilityViolated(_) => "DivisibilityViolated",
            Error::NotExtendable(_) => "NotExtendable",
            Error::MissingCoprimePair => "MissingCoprimePair",
            Error::FieldExtensionRequired { .. } => "FieldExtensionRequired",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::SubstitutionPole => "SubstitutionPole",
            Error::DegenerateMap => "DegenerateMap",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::Parse(_) => "Parse",
        }
    }
}
