use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampler::rng_for;
use super::{ReportEntry, SegmentSampler, Verdict, Witness};
use crate::error::Result;
use crate::history::HistorySegment;
use crate::maturation::InnerSolver;
use crate::par::{self, Exec};
use crate::rates::RateSet;

/// Finite-difference steps, as multiples of `1 / sup|chi|`.
pub const FD_STEPS: [f64; 3] = [1e-4, 1e-5, 1e-6];
/// Perturbation sizes for the continuity probe.
pub const CONTINUITY_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Both sides below this count as zero.
const ZERO_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SCheckOptions {
    pub n_probes: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub sampler: SegmentSampler,
}

impl Default for SCheckOptions {
    fn default() -> Self {
        Self {
            n_probes: 50,
            seed: 0,
            rel_tol: 1e-4,
            sampler: SegmentSampler::default(),
        }
    }
}

/// Scalar function on `[-h, 0]`: a Hermite draw or a tent with its kink at
/// `-h / 2`.
#[derive(Debug, Clone)]
enum Direction {
    Smooth(HistorySegment),
    Kinked { h: f64, left: f64, mid: f64, right: f64 },
}

impl Direction {
    fn at(&self, theta: f64) -> f64 {
        match self {
            Direction::Smooth(s) => s.value_clamped(theta, 0),
            Direction::Kinked { h, left, mid, right } => {
                let half = 0.5 * h;
                if theta <= -half {
                    let u = ((theta + h) / half).clamp(0.0, 1.0);
                    left + (mid - left) * u
                } else {
                    let u = ((theta + half) / half).clamp(0.0, 1.0);
                    mid + (right - mid) * u
                }
            }
        }
    }

    fn sup(&self) -> f64 {
        match self {
            Direction::Smooth(s) => s.norms().sup_norm,
            Direction::Kinked { left, mid, right, .. } => left.abs().max(mid.abs()).max(right.abs()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    /// Relative errors for tau, F, y at the best step.
    rel: [f64; 3],
    analytic: [f64; 3],
    fd: [f64; 3],
    /// `max / min` spread of `|Delta D| / delta` over the continuity steps.
    spread_ok: bool,
    spread: [f64; 3],
    kinked: bool,
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale <= ZERO_FLOOR {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Directional derivatives of `tau`, `F` and `y` against central finite
/// differences, and continuity of `(psi, chi) -> D(psi) chi`.
///
/// Half of the directions are piecewise linear with a kink, which exercises
/// the extension of the derivative to merely continuous directions.
pub fn check_s(rates: &RateSet, inner: &InnerSolver, opts: &SCheckOptions, exec: Exec) -> ReportEntry {
    let mut e = ReportEntry::new("S");
    let h = rates.params.horizon();
    let s = opts.sampler;
    if let Err(msg) = s.validate() {
        e.fail(Witness::new("sampler", &[]));
        e.note = msg;
        return e;
    }
    let smooth_dir = SegmentSampler {
        lo: -1.0,
        hi: 1.0,
        slope: 2.0,
        knots: s.knots,
    };

    let probe = |i: usize| -> Result<Probe> {
        let mut rng = rng_for(opts.seed, i as u64);
        let mut psi = s.draw(&mut rng, h)?;
        for _ in 0..100 {
            if psi.range(0).0 > rates.params.r_minus {
                break;
            }
            psi = s.draw(&mut rng, h)?;
        }
        let kinked = i % 2 == 1;
        let chi = if kinked {
            Direction::Kinked {
                h,
                left: rng.gen_range(-1.0..=1.0),
                mid: rng.gen_range(-1.0..=1.0),
                right: rng.gen_range(-1.0..=1.0),
            }
        } else {
            Direction::Smooth(smooth_dir.draw(&mut rng, h)?)
        };
        let eta = smooth_dir.draw(&mut rng, h)?;
        let zeta = smooth_dir.draw(&mut rng, h)?;
        let p = |t: f64| psi.value_clamped(t, 0);
        let c = |t: f64| chi.at(t);

        let (base, sens) = inner.sensitivity_fn(rates, p, c)?;
        let t_probe = 0.5 * base.tau;
        let analytic = [sens.d_tau, sens.d_growth, sens.dy(t_probe)];

        let norm = chi.sup().max(f64::MIN_POSITIVE);
        let mut best = [f64::INFINITY; 3];
        let mut best_fd = [0.0; 3];
        for step in FD_STEPS {
            let d = step / norm;
            let plus = inner.solve_fn(rates, |t| p(t) + d * c(t))?;
            let minus = inner.solve_fn(rates, |t| p(t) - d * c(t))?;
            let fd = [
                (plus.tau - minus.tau) / (2.0 * d),
                (plus.growth - minus.growth) / (2.0 * d),
                (plus.y(t_probe) - minus.y(t_probe)) / (2.0 * d),
            ];
            for k in 0..3 {
                let r = rel_err(analytic[k], fd[k]);
                if r < best[k] {
                    best[k] = r;
                    best_fd[k] = fd[k];
                }
            }
        }

        let mut ratios = [0.0; 3];
        for (j, delta) in CONTINUITY_STEPS.into_iter().enumerate() {
            let (_, moved) = inner.sensitivity_fn(
                rates,
                |t| p(t) + delta * eta.value_clamped(t, 0),
                |t| c(t) + delta * zeta.value_clamped(t, 0),
            )?;
            let change = (moved.d_tau - sens.d_tau)
                .abs()
                .max((moved.d_growth - sens.d_growth).abs());
            ratios[j] = change / delta;
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0f64, f64::max);
        Ok(Probe {
            rel: best,
            analytic,
            fd: best_fd,
            spread_ok: hi <= 10.0 * lo + 1e-6,
            spread: ratios,
            kinked,
        })
    };

    let n = opts.n_probes.max(1);
    let results = par::map_indexed(n, exec, probe);
    e.samples_used = n;
    let labels = ["tau", "F", "y"];
    let mut worst = [0.0f64; 3];
    let mut kinked = 0;
    for (i, r) in results.iter().enumerate() {
        match r {
            Err(err) => {
                e.fail(Witness::new("solver-failure", &[("probe", i as f64)]));
                e.note = err.to_string();
            }
            Ok(p) => {
                kinked += p.kinked as usize;
                for k in 0..3 {
                    worst[k] = worst[k].max(p.rel[k]);
                    if !(p.rel[k] <= opts.rel_tol) {
                        e.fail(Witness::new(
                            format!("D{}", labels[k]),
                            &[
                                ("probe", i as f64),
                                ("analytic", p.analytic[k]),
                                ("finite_difference", p.fd[k]),
                                ("rel_err", p.rel[k]),
                                ("kinked", p.kinked as u8 as f64),
                            ],
                        ));
                    }
                }
                if !p.spread_ok {
                    e.fail(Witness::new(
                        "continuity",
                        &[
                            ("probe", i as f64),
                            ("ratio_1e-2", p.spread[0]),
                            ("ratio_1e-3", p.spread[1]),
                            ("ratio_1e-4", p.spread[2]),
                        ],
                    ));
                }
            }
        }
    }
    e.value("max_rel_err_tau", worst[0]);
    e.value("max_rel_err_F", worst[1]);
    e.value("max_rel_err_y", worst[2]);
    e.value("kinked_directions", kinked as f64);
    if e.verdict == Verdict::Pass {
        e.verdict = Verdict::StatisticalPass;
        e.note = format!("{n} random probes, best step of {FD_STEPS:?} / sup|chi|");
    }
    e
}
