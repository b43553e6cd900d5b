use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::history::HistorySegment;

/// Random scalar Hermite segments on a uniform grid: knot values drawn from
/// `[lo, hi]`, knot slopes from `[-slope, slope]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentSampler {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub knots: usize,
}

impl Default for SegmentSampler {
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 2.0,
            slope: 2.0,
            knots: 9,
        }
    }
}

/// Knot data of one draw, kept so draws on the same grid can be combined.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Draw {
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl Draw {
    pub fn combine(&self, a: f64, other: &Draw) -> Draw {
        Draw {
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
            derivs: self.derivs.iter().zip(&other.derivs).map(|(x, y)| x + a * y).collect(),
        }
    }
}

/// Deterministic generator for draw number `index` under `seed`.
pub(crate) fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

impl SegmentSampler {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(format!("sampler band [{}, {}] is empty", self.lo, self.hi));
        }
        if !(self.slope >= 0.0 && self.slope.is_finite()) {
            return Err(format!("sampler slope {} must be nonnegative", self.slope));
        }
        if self.knots < 2 {
            return Err("sampler needs at least two knots".into());
        }
        Ok(())
    }

    pub(crate) fn grid(&self, h: f64) -> Vec<f64> {
        let m = self.knots - 1;
        (0..=m)
            .map(|i| if i == m { 0.0 } else { -h + h * i as f64 / m as f64 })
            .collect()
    }

    pub(crate) fn draw_raw<R: Rng>(&self, rng: &mut R) -> Draw {
        let values = (0..self.knots).map(|_| rng.gen_range(self.lo..=self.hi)).collect();
        let derivs = (0..self.knots)
            .map(|_| rng.gen_range(-self.slope..=self.slope))
            .collect();
        Draw { values, derivs }
    }

    pub(crate) fn build(&self, h: f64, d: &Draw) -> Result<HistorySegment> {
        HistorySegment::new(1, self.grid(h), d.values.clone(), d.derivs.clone())
    }

    /// One segment on `[-h, 0]`.
    pub fn draw<R: Rng>(&self, rng: &mut R, h: f64) -> Result<HistorySegment> {
        let d = self.draw_raw(rng);
        self.build(h, &d)
    }
}
