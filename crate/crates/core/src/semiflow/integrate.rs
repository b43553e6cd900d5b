use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Model, RhsEval};
use crate::error::{Error, Result};
use crate::hermite::{cubic_deriv, cubic_value, HermiteCurve};
use crate::history::{HistorySegment, StepPiece};
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateOptions {
    /// Requested outer step; capped at half the delay lower bound.
    pub dt: f64,
    pub pc_tol: f64,
    pub max_corrections: usize,
    pub max_halvings: usize,
    pub norm_cap: f64,
    /// Stop when `v(t) <= R_minus + domain_margin`.
    pub domain_margin: f64,
    /// Largest manifold residual accepted for the initial segment.
    pub x_tol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            dt: 0.05,
            pc_tol: 1e-10,
            max_corrections: 8,
            max_halvings: 4,
            norm_cap: 1e8,
            domain_margin: 1e-9,
            x_tol: 1e-8,
        }
    }
}

impl IntegrateOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidOption(format!(
                    "{name} = {x} must be positive and finite"
                )))
            }
        };
        positive("dt", self.dt)?;
        positive("pc_tol", self.pc_tol)?;
        positive("norm_cap", self.norm_cap)?;
        positive("x_tol", self.x_tol)?;
        if !(self.domain_margin >= 0.0) {
            return Err(Error::InvalidOption("domain_margin must be nonnegative".into()));
        }
        if self.max_corrections < 2 {
            return Err(Error::InvalidOption("max_corrections must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    ReachedT,
    DomainExit,
    NormBlowup,
    InnerFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::ReachedT => "reached_T",
            Status::DomainExit => "domain_exit",
            Status::NormBlowup => "norm_blowup",
            Status::InnerFailure => "inner_failure",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationRecord {
    pub status: Status,
    pub t_stop: f64,
    pub witness: String,
}

/// Per accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub w: f64,
    pub v: f64,
    pub dw: f64,
    pub dv: f64,
    pub tau: f64,
    pub growth: f64,
    pub c1_norm: f64,
    /// `|x_t'(0) - f(x_t)|`.
    pub residual: f64,
    pub a: [f64; 2],
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    curve: HermiteCurve,
    h: f64,
    pub records: Vec<StepRecord>,
    /// Manifold residual of the initial segment.
    pub initial_residual: f64,
}

impl Trajectory {
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Dense solution on `[-h, t_end]`.
    pub fn curve(&self) -> &HermiteCurve {
        &self.curve
    }

    pub fn t_end(&self) -> f64 {
        self.curve.end()
    }

    pub fn value(&self, t: f64) -> [f64; 2] {
        [self.curve.value(t, 0), self.curve.value(t, 1)]
    }

    pub fn deriv(&self, t: f64) -> [f64; 2] {
        [self.curve.deriv(t, 0), self.curve.deriv(t, 1)]
    }

    /// The state `x_t`, `0 <= t <= t_end`.
    pub fn segment_at(&self, t: f64) -> Result<HistorySegment> {
        let end = self.t_end();
        if !(t >= 0.0 && t <= end + 1e-12 * end.max(1.0)) {
            return Err(Error::InvalidOption(format!("t = {t} outside [0, {end}]")));
        }
        let t = t.min(end);
        let (dim, mut knots, values, derivs) = self.curve.slice(t - self.h, t).into_parts();
        let n = knots.len();
        for k in knots.iter_mut() {
            *k -= t;
        }
        knots[0] = -self.h;
        knots[n - 1] = 0.0;
        HistorySegment::new(dim, knots, values, derivs)
    }

    /// Final state.
    pub fn last_segment(&self) -> Result<HistorySegment> {
        self.segment_at(self.t_end())
    }

    /// Columns `t,w,v,dw,dv,tau,F,c1norm`, then a `#` footer with the
    /// termination record.
    pub fn to_csv(&self, term: &TerminationRecord) -> String {
        let clamp = |x: f64| if x < 0.0 && x > -1e-12 { 0.0 } else { x };
        let mut out = String::from("t,w,v,dw,dv,tau,F,c1norm\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.t,
                clamp(r.w),
                clamp(r.v),
                r.dw,
                r.dv,
                r.tau,
                r.growth,
                r.c1_norm
            );
        }
        let _ = writeln!(
            out,
            "# status={} t_stop={:e} witness={}",
            term.status, term.t_stop, term.witness
        );
        out
    }
}

struct Accepted {
    x: [f64; 2],
    f: [f64; 2],
    segment: HistorySegment,
}

enum StepFailure {
    NotSettled,
    Model(Error),
}

impl From<Error> for StepFailure {
    fn from(e: Error) -> Self {
        StepFailure::Model(e)
    }
}

fn piece(dt: f64, x0: [f64; 2], d0: [f64; 2], x1: [f64; 2], d1: [f64; 2]) -> StepPiece {
    StepPiece {
        dt,
        left_value: x0.to_vec(),
        left_deriv: d0.to_vec(),
        right_value: x1.to_vec(),
        right_deriv: d1.to_vec(),
    }
}

fn arr(s: &[f64]) -> [f64; 2] {
    [s[0], s[1]]
}

fn axpy(x: [f64; 2], a: f64, k: [f64; 2]) -> [f64; 2] {
    [x[0] + a * k[0], x[1] + a * k[1]]
}

fn max_abs(x: [f64; 2]) -> f64 {
    x[0].abs().max(x[1].abs())
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

impl Model {
    /// One RK4 step of length `dt` from `state` with `k1 = f(state)`.
    ///
    /// The stages need `v` on the step itself through `tau`, so the step's
    /// cubic is predicted by extrapolating the last piece and the RK4 sweep
    /// repeated with the updated cubic until two sweeps agree.
    fn rk4_step(
        &self,
        state: &HistorySegment,
        k1: [f64; 2],
        dt: f64,
        opts: &IntegrateOptions,
    ) -> std::result::Result<Accepted, StepFailure> {
        let x0 = arr(state.head());
        let d0 = arr(state.head_deriv());
        let last = state.last_piece();
        let u = last.dt + dt;
        let extrap = |c: usize| {
            (
                cubic_value(
                    last.dt,
                    last.left_value[c],
                    last.left_deriv[c],
                    last.right_value[c],
                    last.right_deriv[c],
                    u,
                ),
                cubic_deriv(
                    last.dt,
                    last.left_value[c],
                    last.left_deriv[c],
                    last.right_value[c],
                    last.right_deriv[c],
                    u,
                ),
            )
        };
        let (p0, q0) = extrap(0);
        let (p1, q1) = extrap(1);
        let mut cur = piece(dt, x0, d0, [p0, p1], [q0, q1]);
        let mut prev: Option<([f64; 2], [f64; 2])> = None;

        for _ in 0..opts.max_corrections {
            let slope = |s: f64| [cur.deriv(s, 0), cur.deriv(s, 1)];
            let y2 = axpy(x0, 0.5 * dt, k1);
            let k2 = self.rhs(&state.append_step(&piece(0.5 * dt, x0, d0, y2, slope(0.5 * dt)))?)?;
            let y3 = axpy(x0, 0.5 * dt, k2);
            let k3 = self.rhs(&state.append_step(&piece(0.5 * dt, x0, d0, y3, slope(0.5 * dt)))?)?;
            let y4 = axpy(x0, dt, k3);
            let k4 = self.rhs(&state.append_step(&piece(dt, x0, d0, y4, slope(dt)))?)?;
            let x_new = [
                x0[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                x0[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            if !(x_new[0].is_finite() && x_new[1].is_finite()) {
                return Err(StepFailure::NotSettled);
            }
            let f_new = self.rhs(&state.append_step(&piece(dt, x0, d0, x_new, slope(dt)))?)?;
            cur = piece(dt, x0, d0, x_new, f_new);
            if let Some((px, pf)) = prev {
                let dx = max_abs(sub(x_new, px));
                let df = max_abs(sub(f_new, pf));
                if dx <= opts.pc_tol * max_abs(x_new).max(1.0) && df <= opts.pc_tol * max_abs(f_new).max(1.0) {
                    let segment = state.append_step(&cur)?;
                    return Ok(Accepted {
                        x: x_new,
                        f: f_new,
                        segment,
                    });
                }
            }
            prev = Some((x_new, f_new));
        }
        Err(StepFailure::NotSettled)
    }

    /// Integrates from the compatible initial state `phi0` to `t_end`.
    ///
    /// Domain exit, norm blow-up and inner solver failures end the run early
    /// and are reported in the [`TerminationRecord`]; the trajectory up to
    /// that point is returned.
    pub fn integrate(
        &self,
        phi0: &HistorySegment,
        t_end: f64,
        opts: &IntegrateOptions,
    ) -> Result<(Trajectory, TerminationRecord)> {
        opts.validate()?;
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidOption(format!("final time {t_end} must be positive")));
        }
        self.check_state(phi0)?;
        let h = self.horizon();
        let p = &self.rates.params;
        let eval0 = self.evaluate(phi0)?;
        let d = phi0.head_deriv();
        let residual0 = (d[0] - eval0.value[0]).hypot(d[1] - eval0.value[1]);
        if residual0 > opts.x_tol {
            return Err(Error::Incompatible {
                residual: residual0,
                tol: opts.x_tol,
            });
        }

        let base_dt = opts.dt.min(0.5 * p.tau_lower());
        let mut traj = Trajectory {
            curve: phi0.curve().clone(),
            h,
            records: Vec::new(),
            initial_residual: residual0,
        };
        let mut state = phi0.clone();
        let mut t = 0.0;
        let mut eval = eval0;
        let mut norm = state.norms().c1_norm;
        traj.records.push(record(t, &state, &eval, norm));

        let finish = |traj: Trajectory, status: Status, t_stop: f64, witness: String| {
            Ok((
                traj,
                TerminationRecord {
                    status,
                    t_stop,
                    witness,
                },
            ))
        };
        if let Some((status, witness)) = self.check_limits(&state, norm, opts) {
            return finish(traj, status, t, witness);
        }

        while t < t_end {
            let remaining = t_end - t;
            let mut dt = if remaining <= base_dt * (1.0 + 1e-9) {
                remaining
            } else {
                base_dt
            };
            let mut halvings = 0;
            let accepted = loop {
                match self.rk4_step(&state, eval.value, dt, opts) {
                    Ok(a) => break a,
                    Err(StepFailure::NotSettled) => {
                        if halvings == opts.max_halvings {
                            return Err(Error::StepUnderflow { t, dt });
                        }
                        halvings += 1;
                        dt *= 0.5;
                    }
                    Err(StepFailure::Model(e)) => {
                        let status = classify(&e);
                        return finish(traj, status, t, e.to_string());
                    }
                }
            };
            let t_new = if dt == remaining { t_end } else { t + dt };
            traj.curve.push(t_new, &accepted.x, &accepted.f);
            state = accepted.segment;
            t = t_new;
            norm = state.norms().c1_norm;
            match self.evaluate(&state) {
                Ok(e) => eval = e,
                Err(e) => {
                    let nan = RhsEval {
                        value: [f64::NAN; 2],
                        tau: f64::NAN,
                        growth: f64::NAN,
                        a: [f64::NAN; 2],
                        b2: f64::NAN,
                    };
                    traj.records.push(record(t, &state, &nan, norm));
                    let status = classify(&e);
                    return finish(traj, status, t, e.to_string());
                }
            }
            traj.records.push(record(t, &state, &eval, norm));
            if let Some((status, witness)) = self.check_limits(&state, norm, opts) {
                return finish(traj, status, t, witness);
            }
        }
        finish(traj, Status::ReachedT, t_end, String::new())
    }

    fn check_limits(&self, state: &HistorySegment, c1_norm: f64, opts: &IntegrateOptions) -> Option<(Status, String)> {
        let bound = self.rates.params.r_minus + opts.domain_margin;
        let v = state.head()[1];
        if !(v > bound) && v.is_finite() {
            return Some((Status::DomainExit, format!("v = {v:e} <= R_minus + margin = {bound:e}")));
        }
        if !(c1_norm <= opts.norm_cap) {
            return Some((
                Status::NormBlowup,
                format!("c1_norm = {c1_norm:e} > cap {:e}", opts.norm_cap),
            ));
        }
        None
    }

    /// Independent runs, in input order.
    pub fn integrate_many(
        &self,
        initial: &[HistorySegment],
        t_end: f64,
        opts: &IntegrateOptions,
        exec: Exec,
    ) -> Vec<Result<(Trajectory, TerminationRecord)>> {
        par::map_slice(initial, exec, |phi| self.integrate(phi, t_end, opts))
    }
}

fn classify(e: &Error) -> Status {
    match e {
        Error::Domain { .. } => Status::DomainExit,
        _ => Status::InnerFailure,
    }
}

fn record(t: f64, state: &HistorySegment, eval: &RhsEval, c1_norm: f64) -> StepRecord {
    let x = state.head();
    let d = state.head_deriv();
    StepRecord {
        t,
        w: x[0],
        v: x[1],
        dw: d[0],
        dv: d[1],
        tau: eval.tau,
        growth: eval.growth,
        c1_norm,
        residual: (d[0] - eval.value[0]).hypot(d[1] - eval.value[1]),
        a: eval.a,
        b2: eval.b2,
    }
}
