//! Simulation and numerical verification of a stem-cell maturation model
//! with a state-dependent delay defined implicitly by a threshold ODE.
//!
//! * [`history`]: C1 history segments (the states of the semiflow)
//! * [`rates`]: parametric families for `g`, `d`, `beta`, `q`
//! * [`maturation`]: delay `tau`, growth factor `F` and their directional derivatives
//! * [`semiflow`]: right-hand side, compatible initial data, integration,
//!   variation-of-constants residuals, equilibria
//! * [`verification`]: numerical checks of the well-posedness hypotheses

// `!(a < b)` is used on purpose so that NaN fails every bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hermite;
pub mod history;
pub mod maturation;
pub mod par;
pub mod rates;
pub mod semiflow;
pub mod verification;

pub use error::{Error, Result};
pub use history::{HistorySegment, SegmentNorms, StepPiece};
pub use maturation::{InnerSolver, MaturationResult, Sensitivity};
pub use par::Exec;
pub use rates::{PlanarRate, RateParams, RateSet, ScalarRate};
pub use semiflow::{Equilibrium, IntegrateOptions, Model, Status, TerminationRecord, Trajectory};
