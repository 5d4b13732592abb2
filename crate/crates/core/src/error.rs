use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error(
        "value {value} lies outside the open range ({lower}, {upper}) of the response function"
    )]
    OutOfRange { value: f64, lower: f64, upper: f64 },

    #[error("numerical derivative of the potential failed at T = {at}: {reason}")]
    NumericalDerivative { at: f64, reason: String },

    #[error(
        "strain limit exceeded at node {node}: argument {value} is outside the response range"
    )]
    StrainLimitExceeded { node: usize, value: f64 },

    #[error("invalid step: dt = {dt}, t_final = {t_final}")]
    InvalidStep { dt: f64, t_final: f64 },

    #[error("time step {dt} exceeds the stability ceiling {ceiling} ({reason})")]
    StepTooLarge {
        dt: f64,
        ceiling: f64,
        reason: &'static str,
    },

    #[error("solution blew up at t = {t} (max |T| = {max_abs_stress})")]
    BlowUp { t: f64, max_abs_stress: f64 },

    #[error("energy window needs at least 3 states, got {0}")]
    InvalidWindow(usize),

    #[error("fields do not share one grid")]
    GridMismatch,

    #[error("degenerate equilibria: {0}")]
    DegenerateEquilibria(String),

    #[error("no real wave speed: c^2 = {c_squared}")]
    NoRealSpeed { c_squared: f64 },

    #[error("no heteroclinic connection: {0}")]
    NoKink(String),

    #[error("xi span too short: profile reached {reached} at xi = {xi}, expected {target}")]
    SpanTooShort { xi: f64, reached: f64, target: f64 },

    #[error("singular limit: {0}")]
    SingularLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
