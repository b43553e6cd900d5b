//! The outer delay equation
//!
//! ```text
//! w'(t) = q(v(t)) w(t)
//! v'(t) = beta(v(t - tau(v_t))) w(t - tau(v_t)) F(v_t) - mu v(t)
//! ```
//!
//! on states `x_t = (w_t, v_t)` in `C1([-h, 0], R^2)`.

mod equilibria;
mod integrate;
mod voc;

pub use equilibria::{Equilibrium, EquilibriumKind};
pub use integrate::{IntegrateOptions, Status, StepRecord, TerminationRecord, Trajectory};

use crate::error::{Error, Result};
use crate::history::HistorySegment;
use crate::maturation::InnerSolver;
use crate::rates::RateSet;

/// Tolerance on the manifold residual accepted by [`Model::make_compatible`].
pub const COMPAT_TOL: f64 = 1e-10;
const COMPAT_MAX_PASSES: usize = 10;

/// Everything the right-hand side computes for one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsEval {
    pub value: [f64; 2],
    pub tau: f64,
    pub growth: f64,
    /// Diagonal of the linear part, `(q(v(0)), -mu)`.
    pub a: [f64; 2],
    /// Delayed inflow `beta(v(-tau)) w(-tau) F`.
    pub b2: f64,
}

/// Rates plus the inner solver resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub rates: RateSet,
    pub inner: InnerSolver,
}

impl Model {
    pub fn new(rates: RateSet) -> Self {
        Self {
            rates,
            inner: InnerSolver::default(),
        }
    }

    pub fn with_inner_steps(mut self, steps: usize) -> Result<Self> {
        self.inner = InnerSolver::new(steps)?;
        Ok(self)
    }

    pub fn horizon(&self) -> f64 {
        self.rates.params.horizon()
    }

    fn check_state(&self, phi: &HistorySegment) -> Result<()> {
        if phi.dim() != 2 {
            return Err(Error::InvalidSegment(format!(
                "state must have two components, got {}",
                phi.dim()
            )));
        }
        let h = self.horizon();
        if (phi.h() - h).abs() > 1e-9 * h {
            return Err(Error::InvalidSegment(format!(
                "state window {} does not match b/K = {h}",
                phi.h()
            )));
        }
        Ok(())
    }

    /// Right-hand side with the intermediate quantities.
    pub fn evaluate(&self, phi: &HistorySegment) -> Result<RhsEval> {
        self.check_state(phi)?;
        let (tau, growth) = self
            .inner
            .delay_and_growth(&self.rates, |theta| phi.value_clamped(theta, 1))?;
        let head = phi.head();
        let (w0, v0) = (head[0], head[1]);
        let lag_w = phi.value_clamped(-tau, 0);
        let lag_v = phi.value_clamped(-tau, 1);
        let q = self.rates.q(v0)?;
        let beta = self.rates.beta(lag_v)?;
        let mu = self.rates.params.mu;
        let b2 = beta * lag_w * growth;
        Ok(RhsEval {
            value: [q * w0, b2 - mu * v0],
            tau,
            growth,
            a: [q, -mu],
            b2,
        })
    }

    pub fn rhs(&self, phi: &HistorySegment) -> Result<[f64; 2]> {
        Ok(self.evaluate(phi)?.value)
    }

    /// `|phi'(0) - f(phi)|`, Euclidean.
    pub fn manifold_residual(&self, phi: &HistorySegment) -> Result<f64> {
        let f = self.rhs(phi)?;
        let d = phi.head_deriv();
        Ok(((d[0] - f[0]).powi(2) + (d[1] - f[1]).powi(2)).sqrt())
    }

    /// [`Model::make_compatible_with`] using a blend window of `h / 8`.
    pub fn make_compatible(&self, phi_raw: &HistorySegment) -> Result<HistorySegment> {
        self.make_compatible_with(phi_raw, self.horizon() / 8.0)
    }

    /// Adjusts `phi_raw` on `[-blend, 0]` so that `phi'(0) = f(phi)`.
    ///
    /// A cubic bump with zero value and slope at `-blend` and zero value at
    /// `0` moves the slope at `0`; the values inside the window change with
    /// it, so `f` is re-evaluated and the pass repeated until the residual is
    /// at most [`COMPAT_TOL`].
    pub fn make_compatible_with(&self, phi_raw: &HistorySegment, blend: f64) -> Result<HistorySegment> {
        self.check_state(phi_raw)?;
        let (vmin, _) = phi_raw.range(1);
        if !(vmin > self.rates.params.r_minus) {
            return Err(Error::Domain {
                what: "initial v",
                value: vmin,
                bound: self.rates.params.r_minus,
            });
        }
        if !(blend > 0.0) {
            return Err(Error::InvalidOption(format!("blend window {blend} must be positive")));
        }
        let mut phi = phi_raw.clone();
        let mut history = Vec::new();
        for _ in 0..COMPAT_MAX_PASSES {
            let f = self.rhs(&phi)?;
            let d = phi.head_deriv();
            let delta = [f[0] - d[0], f[1] - d[1]];
            let res = delta[0].hypot(delta[1]);
            history.push(res);
            if res <= COMPAT_TOL {
                return Ok(phi);
            }
            phi = phi.with_head_slope_correction(blend, &delta);
        }
        let res = self.manifold_residual(&phi)?;
        history.push(res);
        if res <= COMPAT_TOL {
            return Ok(phi);
        }
        Err(Error::CompatibilityFailed { history })
    }
}
