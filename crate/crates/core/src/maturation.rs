//! The inner threshold problem.
//!
//! For a regulation history `psi` on `[-h, 0]` the maturity of a committed
//! cell follows `y'(s) = -g(y(s), psi(-s))`, `y(0) = x2`. The delay `tau(psi)`
//! is the time at which `y` reaches `x1`, and the growth factor is
//! `F(psi) = exp(int_0^tau d(y(s), psi(-s)) ds)`.
//!
//! Directional derivatives in a direction `chi` are obtained by integrating
//! the variational equation `z' = -d1g z - d2g chi(-s)` together with the
//! path, with the same RK4 stages. Only values of `chi` are read, so merely
//! continuous directions are accepted.

use crate::error::{Error, Result};
use crate::hermite::{cubic_value, HermiteCurve};
use crate::history::HistorySegment;
use crate::rates::RateSet;

pub const DEFAULT_INNER_STEPS: usize = 256;

const MAX_ROOT_ITERS: usize = 60;
const MAX_NON_CONTRACTING: usize = 3;

/// Path components: y, int d, z, int (d1g z + d2g chi), int (d1d z + d2d chi).
const NC: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct MaturationResult {
    /// `y(., psi)` on `[0, h]`, forward time.
    pub y_path: HermiteCurve,
    pub tau: f64,
    /// Growth factor `F(psi)`.
    pub growth: f64,
    /// `|y(tau) - x1|` after root polishing.
    pub threshold_residual: f64,
}

impl MaturationResult {
    pub fn y(&self, s: f64) -> f64 {
        self.y_path.value(s, 0)
    }

    pub fn y_deriv(&self, s: f64) -> f64 {
        self.y_path.deriv(s, 0)
    }
}

/// Directional derivatives of `y`, `tau` and `F` at `psi` in direction `chi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensitivity {
    /// `(Dy(psi) chi)(t)` on `[0, h]`.
    pub dy_path: HermiteCurve,
    pub d_tau: f64,
    pub d_growth: f64,
    /// `z(tau)`; equals `g(x1, psi(-tau)) * d_tau` up to quadrature error.
    pub dy_at_tau: f64,
}

impl Sensitivity {
    pub fn dy(&self, t: f64) -> f64 {
        self.dy_path.value(t, 0)
    }
}

/// Fixed-step RK4 solver for the inner problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InnerSolver {
    pub steps: usize,
}

impl Default for InnerSolver {
    fn default() -> Self {
        Self {
            steps: DEFAULT_INNER_STEPS,
        }
    }
}

struct RawPath {
    knots: Vec<f64>,
    u: Vec<[f64; NC]>,
    du: Vec<[f64; NC]>,
    /// index of the step containing tau
    j: usize,
    tau: f64,
    residual: f64,
}

impl RawPath {
    fn component_at(&self, c: usize, s: f64) -> f64 {
        let j = if s >= self.knots[self.j] && s <= self.knots[self.j + 1] {
            self.j
        } else {
            (self.knots.partition_point(|&k| k <= s).max(1) - 1).min(self.knots.len() - 2)
        };
        let len = self.knots[j + 1] - self.knots[j];
        let u = s - self.knots[j];
        if u <= 0.0 {
            return self.u[j][c];
        }
        if u >= len {
            return self.u[j + 1][c];
        }
        cubic_value(len, self.u[j][c], self.du[j][c], self.u[j + 1][c], self.du[j + 1][c], u)
    }

    fn curve(&self, c: usize) -> HermiteCurve {
        HermiteCurve::from_parts(
            1,
            self.knots.clone(),
            self.u.iter().map(|u| u[c]).collect(),
            self.du.iter().map(|u| u[c]).collect(),
        )
    }
}

impl InnerSolver {
    pub fn new(steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidOption(format!(
                "inner step count {steps} must be at least 2"
            )));
        }
        Ok(Self { steps })
    }

    /// Solves the threshold problem for a scalar history segment.
    pub fn solve(&self, rates: &RateSet, psi: &HistorySegment) -> Result<MaturationResult> {
        check_psi(rates, psi)?;
        self.solve_fn(rates, |theta| psi.value_clamped(theta, 0))
    }

    /// As [`InnerSolver::solve`] with `psi` given by its values on `[-h, 0]`.
    pub fn solve_fn<P>(&self, rates: &RateSet, psi: P) -> Result<MaturationResult>
    where
        P: Fn(f64) -> f64,
    {
        let raw = self.integrate(rates, &psi, None::<&fn(f64) -> f64>, false)?;
        Ok(result_from(&raw))
    }

    /// `(tau, F)` only; the path is not continued past the crossing step.
    pub(crate) fn delay_and_growth<P>(&self, rates: &RateSet, psi: P) -> Result<(f64, f64)>
    where
        P: Fn(f64) -> f64,
    {
        let raw = self.integrate(rates, &psi, None::<&fn(f64) -> f64>, true)?;
        Ok((raw.tau, raw.component_at(1, raw.tau).exp()))
    }

    /// Solves the threshold problem and the variational equation in direction
    /// `chi`; both `psi` and `chi` are read on `[-h, 0]` only.
    pub fn sensitivity_fn<P, C>(&self, rates: &RateSet, psi: P, chi: C) -> Result<(MaturationResult, Sensitivity)>
    where
        P: Fn(f64) -> f64,
        C: Fn(f64) -> f64,
    {
        let raw = self.integrate(rates, &psi, Some(&chi), false)?;
        let res = result_from(&raw);
        let tau = raw.tau;
        let p_tau = psi(-tau);
        let x1 = rates.params.x1;
        let g_x1 = rates.g(x1, p_tau)?;
        let d_x1 = rates.d(x1, p_tau)?;
        let lin_g = raw.component_at(3, tau);
        let lin_d = raw.component_at(4, tau);
        let d_tau = -lin_g / g_x1;
        let d_growth = res.growth * (lin_d + d_x1 * d_tau);
        let sens = Sensitivity {
            dy_path: raw.curve(2),
            d_tau,
            d_growth,
            dy_at_tau: raw.component_at(2, tau),
        };
        Ok((res, sens))
    }

    pub fn sensitivity<C>(
        &self,
        rates: &RateSet,
        psi: &HistorySegment,
        chi: C,
    ) -> Result<(MaturationResult, Sensitivity)>
    where
        C: Fn(f64) -> f64,
    {
        check_psi(rates, psi)?;
        self.sensitivity_fn(rates, |theta| psi.value_clamped(theta, 0), chi)
    }

    fn integrate<P, C>(&self, rates: &RateSet, psi: &P, chi: Option<&C>, stop_at_crossing: bool) -> Result<RawPath>
    where
        P: Fn(f64) -> f64,
        C: Fn(f64) -> f64,
    {
        let p = &rates.params;
        let h = p.horizon();
        let m = self.steps;
        let nc = if chi.is_some() { NC } else { 2 };
        let (x1, x2, ball) = (p.x1, p.x2, p.b * (1.0 + 1e-12));

        // reg = psi(-s), c = chi(-s)
        let rhs = |reg: f64, c: f64, u: &[f64; NC]| -> Result<[f64; NC]> {
            let (g, g1, g2) = rates.g_all(u[0], reg)?;
            let mut out = [0.0; NC];
            out[0] = -g;
            match chi {
                None => {
                    out[1] = rates.d(u[0], reg)?;
                }
                Some(_) => {
                    let (d, d1, d2) = rates.d_all(u[0], reg)?;
                    let lin = g1 * u[2] + g2 * c;
                    out[1] = d;
                    out[2] = -lin;
                    out[3] = lin;
                    out[4] = d1 * u[2] + d2 * c;
                }
            }
            Ok(out)
        };

        let mut knots = Vec::with_capacity(m + 1);
        let mut us = Vec::with_capacity(m + 1);
        let mut dus = Vec::with_capacity(m + 1);
        let mut u = [0.0; NC];
        u[0] = x2;
        let sample = |s: f64| (psi(-s), chi.map_or(0.0, |c| c(-s)));
        let (mut reg1, mut c1) = sample(0.0);
        let mut k1 = rhs(reg1, c1, &u)?;
        knots.push(0.0);
        us.push(u);
        dus.push(k1);
        let mut crossed = None;

        let axpy = |u: &[f64; NC], a: f64, k: &[f64; NC]| {
            let mut out = *u;
            for c in 0..nc {
                out[c] += a * k[c];
            }
            out
        };

        for j in 0..m {
            let s0 = h * j as f64 / m as f64;
            let s1 = if j + 1 == m { h } else { h * (j + 1) as f64 / m as f64 };
            let ds = s1 - s0;
            let sm = s0 + 0.5 * ds;
            let (reg_m, c_m) = sample(sm);
            (reg1, c1) = sample(s1);
            let k2 = rhs(reg_m, c_m, &axpy(&u, 0.5 * ds, &k1))?;
            let k3 = rhs(reg_m, c_m, &axpy(&u, 0.5 * ds, &k2))?;
            let k4 = rhs(reg1, c1, &axpy(&u, ds, &k3))?;
            for c in 0..nc {
                u[c] += ds / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            if crossed.is_none() && (u[0] - x2).abs() > ball {
                return Err(Error::ModelViolation { s: s1, y: u[0] });
            }
            k1 = rhs(reg1, c1, &u)?;
            knots.push(s1);
            us.push(u);
            dus.push(k1);
            if crossed.is_none() && u[0] <= x1 {
                crossed = Some(j);
                if stop_at_crossing {
                    break;
                }
            }
        }

        let j = crossed.ok_or(Error::ThresholdUnreachable { x1, h, y_end: u[0] })?;

        let mut raw = RawPath {
            knots,
            u: us,
            du: dus,
            j,
            tau: 0.0,
            residual: 0.0,
        };
        let (tau, residual) = locate_threshold(rates, psi, &raw)?;
        raw.tau = tau;
        raw.residual = residual;
        Ok(raw)
    }
}

fn check_psi(rates: &RateSet, psi: &HistorySegment) -> Result<()> {
    if psi.dim() != 1 {
        return Err(Error::InvalidSegment(format!(
            "regulation history must be scalar, got dimension {}",
            psi.dim()
        )));
    }
    let h = rates.params.horizon();
    if (psi.h() - h).abs() > 1e-9 * h {
        return Err(Error::InvalidSegment(format!(
            "history window {} does not match b/K = {h}",
            psi.h()
        )));
    }
    Ok(())
}

fn result_from(raw: &RawPath) -> MaturationResult {
    let integral = raw.component_at(1, raw.tau);
    MaturationResult {
        y_path: raw.curve(0),
        tau: raw.tau,
        growth: integral.exp(),
        threshold_residual: raw.residual,
    }
}

/// Newton on the dense output of the crossing step with slope
/// `-g(y(s), psi(-s))`, bisection once Newton stops contracting.
fn locate_threshold<P>(rates: &RateSet, psi: &P, raw: &RawPath) -> Result<(f64, f64)>
where
    P: Fn(f64) -> f64,
{
    let p = &rates.params;
    let x1 = p.x1;
    let tol = 1e-12 * (p.x2 - p.x1).abs().max(1.0);
    let j = raw.j;
    let (s0, s1) = (raw.knots[j], raw.knots[j + 1]);
    let len = s1 - s0;
    let (y0, d0, y1, d1) = (raw.u[j][0], raw.du[j][0], raw.u[j + 1][0], raw.du[j + 1][0]);
    let dense = |s: f64| cubic_value(len, y0, d0, y1, d1, s - s0);

    if y1 == x1 {
        return Ok((s1, 0.0));
    }
    let (mut lo, mut hi) = (s0, s1);
    let (f_lo, f_hi) = (y0 - x1, y1 - x1);
    let mut s = if f_lo == f_hi {
        0.5 * (lo + hi)
    } else {
        lo + len * f_lo / (f_lo - f_hi)
    };
    s = s.clamp(lo, hi);
    let mut prev = f64::INFINITY;
    let mut stalls = 0;
    let mut r = dense(s) - x1;
    for _ in 0..MAX_ROOT_ITERS {
        if r.abs() <= tol {
            break;
        }
        if r > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        if r.abs() > 0.5 * prev {
            stalls += 1;
        }
        prev = r.abs();
        let mut next = 0.5 * (lo + hi);
        if stalls < MAX_NON_CONTRACTING {
            let slope = -rates.g(dense(s), psi(-s))?;
            if slope < 0.0 {
                let cand = s - r / slope;
                if cand > lo && cand < hi {
                    next = cand;
                }
            }
        }
        if next == s {
            break;
        }
        s = next;
        r = dense(s) - x1;
    }
    Ok((s, r.abs()))
}

/// `solve` with the default inner resolution.
pub fn solve_maturation(rates: &RateSet, psi: &HistorySegment) -> Result<MaturationResult> {
    InnerSolver::default().solve(rates, psi)
}

/// `(Dy(psi) chi)(t)` for `t` in `[0, h]`.
pub fn dir_deriv_y<C: Fn(f64) -> f64>(rates: &RateSet, psi: &HistorySegment, chi: C, t: f64) -> Result<f64> {
    let (_, sens) = InnerSolver::default().sensitivity(rates, psi, chi)?;
    Ok(sens.dy(t))
}

/// `D tau(psi) chi`.
pub fn dir_deriv_tau<C: Fn(f64) -> f64>(rates: &RateSet, psi: &HistorySegment, chi: C) -> Result<f64> {
    let (_, sens) = InnerSolver::default().sensitivity(rates, psi, chi)?;
    Ok(sens.d_tau)
}

/// `D F(psi) chi`.
pub fn dir_deriv_f<C: Fn(f64) -> f64>(rates: &RateSet, psi: &HistorySegment, chi: C) -> Result<f64> {
    let (_, sens) = InnerSolver::default().sensitivity(rates, psi, chi)?;
    Ok(sens.d_growth)
}
