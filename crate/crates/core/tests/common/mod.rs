#![allow(dead_code)]

use stemdde::{HistorySegment, Model, PlanarRate, RateParams, RateSet, ScalarRate};

pub const GAMMA: f64 = 0.8;
pub const DELTA: f64 = 0.05;

/// Constant maturation speed and net rate: the delay is `1 / GAMMA` for every
/// history and the growth factor is `exp(DELTA / GAMMA)`.
pub fn reduction_rates() -> RateSet {
    RateSet::new(
        RateParams {
            x1: 0.0,
            x2: 1.0,
            b: 1.5,
            k: 1.0,
            eps: 0.75,
            mu: 0.1,
            r_minus: -1.0,
        },
        PlanarRate::Constant { value: GAMMA },
        PlanarRate::Constant { value: DELTA },
        ScalarRate::Hill {
            amp: 1.0,
            k: 1.0,
            n: 2.0,
        },
        ScalarRate::Sigmoid {
            base: 0.5,
            amp: -1.0,
            k: 1.0,
            n: 2.0,
        },
    )
    .unwrap()
}

pub fn tau_bar() -> f64 {
    1.0 / GAMMA
}

pub fn f_bar() -> f64 {
    (DELTA / GAMMA).exp()
}

/// Smooth initial history `(w, v)` with `phi'(0) = f(phi)` for the
/// reduction: `w` grows at rate `q(v0)` and `v` has the right slope at `0`
/// while `v(-tau_bar)` does not depend on that slope.
#[derive(Debug, Clone, Copy)]
pub struct SmoothHistory {
    pub w0: f64,
    pub v0: f64,
    pub curv: f64,
    pub slope: f64,
}

impl SmoothHistory {
    pub fn new(rates: &RateSet, w0: f64, v0: f64, curv: f64) -> Self {
        let tb = tau_bar();
        let qv = rates.q.value(v0);
        let v_lag = v0 + curv * tb * tb;
        let w_lag = w0 * (-qv * tb).exp();
        let slope = rates.beta.value(v_lag) * w_lag * f_bar() - rates.params.mu * v0;
        Self { w0, v0, curv, slope }
    }

    pub fn value(&self, rates: &RateSet, th: f64) -> [f64; 2] {
        let qv = rates.q.value(self.v0);
        let tb = tau_bar();
        [
            self.w0 * (qv * th).exp(),
            self.v0 + self.curv * th * th + self.slope * th * (1.0 + th / tb),
        ]
    }

    pub fn deriv(&self, rates: &RateSet, th: f64) -> [f64; 2] {
        let qv = rates.q.value(self.v0);
        let tb = tau_bar();
        [
            qv * self.w0 * (qv * th).exp(),
            2.0 * self.curv * th + self.slope * (1.0 + 2.0 * th / tb),
        ]
    }

    pub fn segment(&self, rates: &RateSet, m: usize) -> HistorySegment {
        let h = rates.params.horizon();
        HistorySegment::from_function(
            |t| self.value(rates, t).to_vec(),
            |t| self.deriv(rates, t).to_vec(),
            2,
            h,
            m,
        )
        .unwrap()
    }
}

/// Fixed-delay RK4 with step `tau_bar / n_per_delay`; lagged values come
/// from the analytic history for `t <= 0` and from cubic Hermite
/// interpolation of the oracle's own grid afterwards.
pub struct FixedDelayOracle {
    pub step: f64,
    pub t: Vec<f64>,
    pub x: Vec<[f64; 2]>,
    pub dx: Vec<[f64; 2]>,
}

impl FixedDelayOracle {
    pub fn run(rates: &RateSet, hist: &SmoothHistory, n_per_delay: usize, t_end: f64) -> Self {
        let tb = tau_bar();
        let k = tb / n_per_delay as f64;
        let n_steps = (t_end / k).round() as usize;
        let mu = rates.params.mu;
        let fb = f_bar();
        let mut o = FixedDelayOracle {
            step: k,
            t: vec![0.0],
            x: vec![hist.value(rates, 0.0)],
            dx: vec![hist.deriv(rates, 0.0)],
        };
        let rhs = |o: &FixedDelayOracle, t: f64, x: [f64; 2]| -> [f64; 2] {
            let lag = t - tb;
            let xl = if lag <= 0.0 {
                hist.value(rates, lag)
            } else {
                o.interp(lag)
            };
            [
                rates.q.value(x[1]) * x[0],
                rates.beta.value(xl[1]) * xl[0] * fb - mu * x[1],
            ]
        };
        for n in 0..n_steps {
            let t = n as f64 * k;
            let x = o.x[n];
            let k1 = o.dx[n];
            let k2 = rhs(&o, t + 0.5 * k, [x[0] + 0.5 * k * k1[0], x[1] + 0.5 * k * k1[1]]);
            let k3 = rhs(&o, t + 0.5 * k, [x[0] + 0.5 * k * k2[0], x[1] + 0.5 * k * k2[1]]);
            let k4 = rhs(&o, t + k, [x[0] + k * k3[0], x[1] + k * k3[1]]);
            let xn = [
                x[0] + k / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                x[1] + k / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            let tn = (n + 1) as f64 * k;
            let dn = rhs(&o, tn, xn);
            o.t.push(tn);
            o.x.push(xn);
            o.dx.push(dn);
        }
        o
    }

    pub fn interp(&self, t: f64) -> [f64; 2] {
        let i = ((t / self.step).floor() as usize).min(self.t.len() - 2);
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let len = t1 - t0;
        let s = (t - t0) / len;
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            *o =
                h00 * self.x[i][c] + h10 * len * self.dx[i][c] + h01 * self.x[i + 1][c] + h11 * len * self.dx[i + 1][c];
        }
        out
    }
}

pub fn reduction_model() -> Model {
    Model::new(reduction_rates())
}

/// Maturation speed depending on both arguments, with a matching net rate.
pub fn mixed_rates() -> RateSet {
    RateSet::new(
        RateParams {
            x1: 0.2,
            x2: 1.0,
            b: 1.5,
            k: 1.0,
            eps: 0.55,
            mu: 0.1,
            r_minus: -1.0,
        },
        PlanarRate::Separable {
            x: ScalarRate::ExpDecay { amp: 0.85, rate: 0.1 },
            y: ScalarRate::Sigmoid {
                base: 1.0,
                amp: -0.1,
                k: 1.0,
                n: 2.0,
            },
        },
        PlanarRate::Separable {
            x: ScalarRate::Affine {
                intercept: 0.05,
                slope: 0.02,
            },
            y: ScalarRate::Hill {
                amp: 1.0,
                k: 1.0,
                n: 2.0,
            },
        },
        ScalarRate::Hill {
            amp: 1.0,
            k: 1.0,
            n: 2.0,
        },
        ScalarRate::Sigmoid {
            base: 0.5,
            amp: -1.0,
            k: 1.0,
            n: 2.0,
        },
    )
    .unwrap()
}

/// Random two-component history with knot values in `[lo, hi]`, knot slopes
/// in `[-1, 1]` and nonnegative exact minimum.
pub fn random_nonnegative_history<R: rand::Rng>(rng: &mut R, h: f64, lo: f64, hi: f64) -> HistorySegment {
    let m = 8;
    loop {
        let knots: Vec<f64> = (0..=m)
            .map(|i| if i == m { 0.0 } else { -h + h * i as f64 / m as f64 })
            .collect();
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        for _ in 0..=m {
            values.push(rng.gen_range(lo..=hi));
            values.push(rng.gen_range(lo..=hi));
            derivs.push(rng.gen_range(-1.0..=1.0));
            derivs.push(rng.gen_range(-1.0..=1.0));
        }
        let seg = HistorySegment::new(2, knots, values, derivs).unwrap();
        if seg.range(0).0 >= 0.0 && seg.range(1).0 >= 0.0 {
            return seg;
        }
    }
}

pub fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
