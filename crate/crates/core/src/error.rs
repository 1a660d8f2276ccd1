use thiserror::Error;

/// Errors raised by library operations.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("language mismatch: {0}")]
    LanguageMismatch(String),
    #[error("variable index {index} out of range for context of size {ctx}")]
    IndexOutOfRange { index: usize, ctx: usize },
    #[error("context mismatch: expected {expected}, found {found}")]
    ContextMismatch { expected: usize, found: usize },
    #[error("formula is not coherent: {0}")]
    NotCoherent(String),
    #[error("formula not in fragment: {0}")]
    NotInFragment(String),
    #[error("model does not satisfy theory: {0}")]
    NotAModel(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid sort: {0}")]
    InvalidSort(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("invalid isomorphism: {0}")]
    InvalidIsomorphism(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("coding precondition violated: {0}")]
    Coding(String),
    #[error("equality types differ: {0:?} vs {1:?}")]
    EqualityTypeMismatch(Vec<usize>, Vec<usize>),
    #[error("language has no decidability witness")]
    MissingWitness,
    #[error("set is not invariant: {0}")]
    NotInvariant(String),
    #[error("invalid interpretation: {0}")]
    InvalidInterpretation(String),
    #[error("Boolean mode required: {0}")]
    BooleanModeRequired(String),
    #[error("cap too large: {needed} morphisms exceed budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
