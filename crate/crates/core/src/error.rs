use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {theta} outside history window [-{h}, 0]")]
    OutsideWindow { theta: f64, h: f64 },

    #[error("splice is not C1: segment ends with value {seg_value:?}, derivative {seg_deriv:?}; piece starts with value {piece_value:?}, derivative {piece_deriv:?}")]
    Continuity {
        seg_value: Vec<f64>,
        seg_deriv: Vec<f64>,
        piece_value: Vec<f64>,
        piece_deriv: Vec<f64>,
    },

    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("{what} = {value} is outside the domain (must exceed {bound})")]
    Domain { what: &'static str, value: f64, bound: f64 },

    #[error("invalid rate parameters: {0}")]
    InvalidParams(String),

    #[error("invalid rate family for {which}: {reason}")]
    InvalidFamily { which: &'static str, reason: String },

    #[error("maturation path left the ball around x2 at s = {s} (y = {y}); g exceeds its bound for this history")]
    ModelViolation { s: f64, y: f64 },

    #[error("threshold x1 = {x1} not reached on [0, {h}] (y(h) = {y_end})")]
    ThresholdUnreachable { x1: f64, h: f64, y_end: f64 },

    #[error("initial history is not in the solution manifold: residual {residual:e} > tolerance {tol:e}")]
    Incompatible { residual: f64, tol: f64 },

    #[error("compatibility correction did not converge; residual history {history:?}")]
    CompatibilityFailed { history: Vec<f64> },

    #[error("step size underflow at t = {t}: corrector did not settle with dt = {dt}")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("invalid option: {0}")]
    InvalidOption(String),
}
