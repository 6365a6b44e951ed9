use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("unknown element `{element}` in {context}")]
    UnknownElement { element: String, context: String },

    #[error("duplicate element `{0}`")]
    DuplicateElement(String),

    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),

    #[error("arity mismatch for `{symbol}`: expected {expected}, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("{kind} check failed: {reason}")]
    KindViolation { kind: String, reason: String },

    #[error("color map is not a homomorphism: {0}")]
    ColorNotHomomorphism(String),

    #[error("cannot decode colored structure: {0}")]
    Decode(String),

    #[error("invalid class specification: {0}")]
    InvalidClass(String),

    #[error("construction refused: {0}")]
    ConstructionRefused(String),

    #[error("resource budget exceeded after {nodes} search nodes")]
    BudgetExceeded { nodes: u64 },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
