use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampler::{rng_for, Draw};
use super::{ReportEntry, SegmentSampler, Verdict, Witness};
use crate::maturation::InnerSolver;
use crate::par::{self, Exec};
use crate::rates::RateSet;

const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LbFunctional {
    #[serde(rename = "tau")]
    Tau,
    #[serde(rename = "F")]
    Growth,
}

impl LbFunctional {
    pub fn name(self) -> &'static str {
        match self {
            LbFunctional::Tau => "tau",
            LbFunctional::Growth => "F",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LbOptions {
    pub n: usize,
    pub seed: u64,
    /// Largest accepted ratio between the maxima over `2n` and `n` pairs.
    pub stability: f64,
    pub sampler: SegmentSampler,
}

impl Default for LbOptions {
    fn default() -> Self {
        Self {
            n: 500,
            seed: 0,
            stability: 1.2,
            sampler: SegmentSampler::default(),
        }
    }
}

struct PairOutcome {
    quotient: Option<f64>,
    rejected: usize,
    failed: bool,
}

/// Difference quotients `|A(psi1) - A(psi2)| / sup|psi1 - psi2|` for
/// `A = tau` or `A = F` over random pairs.
///
/// Even pairs are independent draws; odd pairs perturb the first draw by a
/// random direction scaled log-uniformly in `[1e-3, 1]`. Draws reaching
/// `R_minus` are redrawn. The maximum over `n` pairs is compared with the
/// maximum over `2n` (the first `n` pairs are shared); the reported value is
/// a sample maximum, not a Lipschitz constant.
pub fn estimate_lb(
    which: LbFunctional,
    rates: &RateSet,
    inner: &InnerSolver,
    opts: &LbOptions,
    exec: Exec,
) -> ReportEntry {
    let mut e = ReportEntry::new(&format!("Lb-{}", which.name()));
    let h = rates.params.horizon();
    let s = opts.sampler;
    if let Err(msg) = s.validate() {
        e.fail(Witness::new("sampler", &[]));
        e.note = msg;
        return e;
    }
    let n = opts.n.max(1);
    let dir = SegmentSampler {
        lo: -1.0,
        hi: 1.0,
        slope: 2.0,
        knots: s.knots,
    };
    let functional = |d: &Draw| -> Option<f64> {
        let seg = s.build(h, d).ok()?;
        let m = inner.solve(rates, &seg).ok()?;
        Some(match which {
            LbFunctional::Tau => m.tau,
            LbFunctional::Growth => m.growth,
        })
    };
    let in_domain = |d: &Draw| {
        s.build(h, d)
            .map(|seg| seg.range(0).0 > rates.params.r_minus)
            .unwrap_or(false)
    };

    let pair = |i: usize| -> PairOutcome {
        let mut rng = rng_for(opts.seed, i as u64);
        let mut rejected = 0;
        for _ in 0..MAX_REDRAWS {
            let a = s.draw_raw(&mut rng);
            let b = if i.is_multiple_of(2) {
                s.draw_raw(&mut rng)
            } else {
                let r = 10f64.powf(rng.gen_range(-3.0..=0.0));
                a.combine(r, &dir.draw_raw(&mut rng))
            };
            if !in_domain(&a) || !in_domain(&b) {
                rejected += 1;
                continue;
            }
            let (sa, sb) = match (s.build(h, &a), s.build(h, &b)) {
                (Ok(x), Ok(y)) => (x, y),
                _ => {
                    rejected += 1;
                    continue;
                }
            };
            let dist = sa.difference(&sb).map(|d| d.norms().sup_norm).unwrap_or(f64::NAN);
            if !(dist > 0.0) {
                rejected += 1;
                continue;
            }
            return match (functional(&a), functional(&b)) {
                (Some(fa), Some(fb)) => PairOutcome {
                    quotient: Some((fa - fb).abs() / dist),
                    rejected,
                    failed: false,
                },
                _ => PairOutcome {
                    quotient: None,
                    rejected,
                    failed: true,
                },
            };
        }
        PairOutcome {
            quotient: None,
            rejected,
            failed: false,
        }
    };

    let outcomes = par::map_indexed(2 * n, exec, pair);
    let rejected: usize = outcomes.iter().map(|o| o.rejected).sum();
    let failures = outcomes.iter().filter(|o| o.failed).count();
    let quotients: Vec<f64> = outcomes.iter().filter_map(|o| o.quotient).collect();
    let first: Vec<f64> = outcomes[..n].iter().filter_map(|o| o.quotient).collect();
    let max_n = first.iter().copied().fold(0.0f64, f64::max);
    let max_2n = quotients.iter().copied().fold(0.0f64, f64::max);
    let mut sorted = quotients.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() {
        f64::NAN
    } else {
        sorted[sorted.len() / 2]
    };

    e.samples_used = quotients.len();
    e.value("max_quotient_n", max_n);
    e.value("max_quotient_2n", max_2n);
    e.value("median_quotient", median);
    e.value("rejected_draws", rejected as f64);
    e.value("solver_failures", failures as f64);
    e.value("n", n as f64);

    if failures > 0 {
        let idx = outcomes.iter().position(|o| o.failed).unwrap();
        e.fail(Witness::new("solver-failure", &[("pair", idx as f64)]));
        e.note = "maturation solve failed on a sampled segment".into();
        return e;
    }
    if quotients.is_empty() {
        e.fail(Witness::new("no-samples", &[("rejected_draws", rejected as f64)]));
        e.note = "every draw left the domain".into();
        return e;
    }
    if max_2n == 0.0 {
        e.value("ratio", 1.0);
        e.note = "all quotients vanish".into();
        return e;
    }
    let ratio = if max_n > 0.0 { max_2n / max_n } else { f64::INFINITY };
    e.value("ratio", ratio);
    if ratio.is_finite() && ratio <= opts.stability {
        e.verdict = Verdict::StatisticalPass;
        e.note = "sample maximum over the sampler family, sup norm in the denominator".into();
    } else {
        e.fail(Witness::new(
            "unstable-maximum",
            &[("max_n", max_n), ("max_2n", max_2n), ("ratio", ratio)],
        ));
    }
    e
}
