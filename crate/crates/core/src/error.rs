use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported field GF({p}^{k})")]
    UnsupportedField { p: u32, k: u32 },
    #[error("malformed field descriptor `{0}`")]
    FieldSyntax(String),
    #[error("internal modulus for GF({p}^{k}) rejected: {reason}")]
    BadModulus { p: u32, k: u32, reason: String },
    #[error("enumeration needs {required} point evaluations but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("variable mismatch: {0}")]
    VariableMismatch(String),
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("invalid chart ({i},{j}): {reason}")]
    InvalidChart { i: usize, j: usize, reason: String },
    #[error("polynomial is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("no generic member found after {attempts} attempts over {field} (last failure: {last}); try a larger field")]
    RetriesExhausted {
        attempts: usize,
        field: String,
        last: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
