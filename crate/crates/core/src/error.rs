use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid pair ({b}, {r}): need gcd(b, r) = 1 and 0 < 2b <= r")]
    InvalidPair { b: i64, r: i64 },

    #[error("operation is undefined on the empty basket")]
    EmptyBasket,

    #[error("Riemann-Roch evaluation at m = {m} produced non-integral value {value}")]
    NonIntegralResult { m: u32, value: String },

    #[error("search space is unbounded: {0}")]
    Unbounded(String),

    #[error("no admissible basket satisfies the constraints")]
    NoAdmissibleBasket,

    #[error("beta must be at least 8, got {0}")]
    InvalidBeta(String),

    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),

    #[error("invalid scenario {id}: {reason}")]
    InvalidScenario { id: String, reason: String },

    #[error("verification failed in {scenario}: {inequality}")]
    VerificationFailure { scenario: String, inequality: String },

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}
