use thiserror::Error;

/// Errors from group arithmetic and group spec parsing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("invalid group spec `{0}`")]
    InvalidSpec(String),
    #[error("element {element} is not valid in {group}")]
    InvalidElement { element: String, group: String },
    #[error("lattice coordinate overflow")]
    Overflow,
    #[error("generating set reaches {reached} of {order} elements")]
    NotGenerating { reached: usize, order: usize },
    #[error("generating set must be nonempty and contain the unit")]
    InvalidGenerators,
}

/// Errors from the algebraic and numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid {what} spec `{spec}`: {reason}")]
    InvalidSpec {
        what: &'static str,
        spec: String,
        reason: String,
    },
    #[error("coefficient model mismatch: {0}")]
    ModelMismatch(String),
    #[error("operands belong to different twisted systems")]
    SystemMismatch,
    #[error("kernel tail combination not representable: {0}")]
    UnsupportedTail(String),
    #[error("kernel is not covariant (residual {residual:e} at {witness})")]
    NotCovariant { residual: f64, witness: String },
    #[error("support budget exceeded after level {completed_level} (support {support})")]
    BudgetExceeded {
        completed_level: usize,
        support: usize,
        norms: Vec<f64>,
    },
    #[error("matrix is numerically singular (min singular value {min_singular_value:e})")]
    Singular { min_singular_value: f64 },
    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(String),
    #[error("empty element")]
    EmptyElement,
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn spec(what: &'static str, spec: &str, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            what,
            spec: spec.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
