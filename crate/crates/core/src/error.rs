use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the toolkit.
///
/// Variants split into two groups: input problems (bad ids, arity, domain
/// violations, malformed files) and computational failures (non-convergence,
/// singular matrices). The CLI maps the first group to exit code 2 and the
/// second to exit code 3, see [`Error::is_input_error`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown model id `{id}`; known models: {known}")]
    UnknownModel { id: String, known: String },

    #[error("model `{model}` expects {expected} parameters, got {got}")]
    Arity {
        model: String,
        expected: String,
        got: usize,
    },

    #[error("parameter {name} = {value} outside its domain ({constraint})")]
    ParamDomain {
        name: String,
        value: f64,
        constraint: String,
    },

    #[error("input {name} = {value} outside the model domain ({constraint})")]
    InputDomain {
        name: String,
        value: f64,
        constraint: String,
    },

    #[error("gradient undefined at this point: {0}")]
    NotDifferentiable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("probability {p} is not attainable; attainable range is ({lo}, {hi})")]
    Unattainable { p: f64, lo: f64, hi: f64 },

    #[error("non-finite result: {0}")]
    NonFinite(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("complete separation detected: {0}")]
    Separation(String),

    #[error("did not converge after {iterations} iterations: {reason}")]
    NonConvergence { iterations: usize, reason: String },

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// `true` for bad input, `false` for failures of the numerics themselves.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NonFinite(_)
                | Error::Singular(_)
                | Error::Separation(_)
                | Error::NonConvergence { .. }
        )
    }
}
