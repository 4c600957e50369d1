use thiserror::Error;

/// Problems found while reading or validating a model document.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed model document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("model has no states")]
    NoStates,
    #[error("model has no actions")]
    NoActions,
    #[error("duplicate state identifier `{0}`")]
    DuplicateState(String),
    #[error("duplicate action identifier `{0}`")]
    DuplicateAction(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{action}` referenced at state `{state}`")]
    UnknownAction { state: String, action: String },
    #[error("state `{0}` has no admissible-action entry")]
    MissingAdmissible(String),
    #[error("state `{0}` has an empty admissible-action set")]
    EmptyAdmissible(String),
    #[error("action `{action}` listed twice in the admissible set of state `{state}`")]
    DuplicateAdmissible { state: String, action: String },
    #[error("missing cost for admissible pair (`{state}`, `{action}`)")]
    MissingCost { state: String, action: String },
    #[error("cost given for non-admissible pair (`{state}`, `{action}`)")]
    StrayCost { state: String, action: String },
    #[error("cost at (`{state}`, `{action}`) is not finite")]
    NonFiniteCost { state: String, action: String },
    #[error("transitions given for non-admissible pair (`{state}`, `{action}`)")]
    StrayTransition { state: String, action: String },
    #[error("invalid probability {value} for `{state}` -> `{target}` under `{action}`")]
    BadProbability {
        state: String,
        action: String,
        target: String,
        value: f64,
    },
    #[error("transition row at (`{state}`, `{action}`) sums to {sum}, expected 1")]
    RowSum {
        state: String,
        action: String,
        sum: f64,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("risk coefficient must be finite and strictly positive, got {0}")]
    InvalidLambda(f64),
    #[error("{what} must lie in {range}, got {value}")]
    OutOfRange {
        what: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("policy space has {count} stationary policies, above the enumeration cap {cap}")]
    EnumerationCap { count: u128, cap: u64 },
    #[error("action `{action}` is not admissible at state `{state}`")]
    InadmissibleAction { state: String, action: String },
    #[error("value function has {got} entries, model has {expected} states")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("min-max equation fails at state `{state}`: g = {value}, min-max = {minmax}")]
    MinMaxViolation {
        state: String,
        value: f64,
        minmax: f64,
    },
    #[error("horizon {0} exceeds the supported maximum")]
    HorizonTooLong(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("membership check did not certify g_alpha at alpha = {alpha}")]
    CertificationFailed { alpha: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
