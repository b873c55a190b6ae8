use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The quadratic form does not describe a normalisable state.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// An operation needing a strictly positive determinant got a degenerate form.
    #[error("degenerate state: det = {det:e}")]
    Degenerate { det: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    /// The high-temperature closed form is singular where 1 + r cos 2phi vanishes.
    #[error("singular measurement scheme: 1 + r cos 2phi = {0:e}")]
    SingularScheme(f64),

    #[error("integration step underflow at t = {t_reached:e}")]
    StepUnderflow { t_reached: f64 },

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("stationary state not reached by t = {t_max:e} (residual {residual:e})")]
    NotConverged { t_max: f64, residual: f64 },
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::StepUnderflow { .. } | Error::NoSignChange { .. } | Error::NotConverged { .. })
    }
}
