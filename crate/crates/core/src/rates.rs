//! Model ingredients: maturation speed `g`, net maturation rate `d`,
//! commitment rate `beta` and stem-cell net growth rate `q`.
//!
//! Each ingredient is drawn from a closed set of C1 parametric families with
//! closed-form derivatives. `Hill` is clamped to the nonnegative half-line
//! (`v <= 0` behaves like `v = 0`) and needs `n > 1` to stay C1 at the origin;
//! `Sigmoid` and `HillInY` are odd extensions of `v^n / (k^n + v^n)` and are
//! C1 for every `n >= 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar parameters shared by all rate families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateParams {
    /// Maturity at which a committed cell is counted as mature.
    pub x1: f64,
    /// Maturity at commitment.
    pub x2: f64,
    /// Radius of the maturity ball around `x2`.
    pub b: f64,
    /// Upper bound of `g` on the ball.
    #[serde(rename = "K")]
    pub k: f64,
    /// Lower bound of `g` on the ball.
    pub eps: f64,
    /// Mature-cell decay rate.
    pub mu: f64,
    /// Left end of the regulation domain `I = (R_minus, inf)`.
    #[serde(rename = "R_minus")]
    pub r_minus: f64,
}

impl RateParams {
    /// History window length `b / K`.
    pub fn horizon(&self) -> f64 {
        self.b / self.k
    }

    /// Smallest possible delay `(x2 - x1) / K`.
    pub fn tau_lower(&self) -> f64 {
        (self.x2 - self.x1) / self.k
    }

    /// Largest possible delay `(x2 - x1) / eps`.
    pub fn tau_upper(&self) -> f64 {
        (self.x2 - self.x1) / self.eps
    }

    /// Upper end of the admissible `x2 - x1` window, `(b / K) * eps`.
    pub fn window(&self) -> f64 {
        self.b / self.k * self.eps
    }

    /// Sign and finiteness constraints that every evaluation relies on.
    pub fn validate_basic(&self) -> Result<()> {
        let all = [self.x1, self.x2, self.b, self.k, self.eps, self.mu, self.r_minus];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if !(self.b > 0.0) {
            return Err(Error::InvalidParams(format!("b = {} must be positive", self.b)));
        }
        if !(self.k > 0.0) {
            return Err(Error::InvalidParams(format!("K = {} must be positive", self.k)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParams(format!("eps = {} must be positive", self.eps)));
        }
        if self.eps > self.k {
            return Err(Error::InvalidParams(format!(
                "eps = {} exceeds K = {}",
                self.eps, self.k
            )));
        }
        if self.mu < 0.0 {
            return Err(Error::InvalidParams(format!("mu = {} must be nonnegative", self.mu)));
        }
        if !(self.r_minus < 0.0) {
            return Err(Error::InvalidParams(format!(
                "R_minus = {} must be negative",
                self.r_minus
            )));
        }
        Ok(())
    }

    /// Full invariant set, including `0 < x2 - x1 < (b / K) eps`.
    pub fn validate(&self) -> Result<()> {
        self.validate_basic()?;
        let gap = self.x2 - self.x1;
        if !(gap > 0.0 && gap < self.window()) {
            return Err(Error::InvalidParams(format!(
                "x2 - x1 = {gap} must lie in (0, (b/K) eps) = (0, {})",
                self.window()
            )));
        }
        Ok(())
    }
}

#[inline]
fn pos_pow_ratio(v: f64, k: f64, n: f64) -> f64 {
    let r = v / k;
    if n == n.trunc() && n.abs() <= 16.0 {
        r.powi(n as i32)
    } else {
        r.powf(n)
    }
}

/// `sign(v) |v|^n / (k^n + |v|^n)` and its derivative.
#[inline]
fn odd_hill(v: f64, k: f64, n: f64) -> (f64, f64) {
    let a = v.abs();
    if a == 0.0 {
        let slope = if n == 1.0 { 1.0 / k } else { 0.0 };
        return (0.0, slope);
    }
    let r = pos_pow_ratio(a, k, n);
    let s = r / (1.0 + r);
    let ds = n * r / (a * (1.0 + r) * (1.0 + r));
    (v.signum() * s, ds)
}

/// One-dimensional family, used for `beta`, `q` and separable factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarRate {
    Constant {
        value: f64,
    },
    /// `intercept + slope * v`
    Affine {
        intercept: f64,
        slope: f64,
    },
    /// `amp / (1 + (max(v, 0) / k)^n)`
    Hill {
        amp: f64,
        k: f64,
        n: f64,
    },
    /// `amp * exp(-rate * v)`
    ExpDecay {
        amp: f64,
        rate: f64,
    },
    /// `base + amp * sign(v) |v|^n / (k^n + |v|^n)`
    Sigmoid {
        base: f64,
        amp: f64,
        k: f64,
        n: f64,
    },
}

impl ScalarRate {
    pub fn value(&self, v: f64) -> f64 {
        match *self {
            ScalarRate::Constant { value } => value,
            ScalarRate::Affine { intercept, slope } => intercept + slope * v,
            ScalarRate::Hill { amp, k, n } => {
                if v <= 0.0 {
                    amp
                } else {
                    amp / (1.0 + pos_pow_ratio(v, k, n))
                }
            }
            ScalarRate::ExpDecay { amp, rate } => amp * (-rate * v).exp(),
            ScalarRate::Sigmoid { base, amp, k, n } => base + amp * odd_hill(v, k, n).0,
        }
    }

    pub fn deriv(&self, v: f64) -> f64 {
        match *self {
            ScalarRate::Constant { .. } => 0.0,
            ScalarRate::Affine { slope, .. } => slope,
            ScalarRate::Hill { amp, k, n } => {
                if v <= 0.0 {
                    0.0
                } else {
                    let r = pos_pow_ratio(v, k, n);
                    -amp * n * r / (v * (1.0 + r) * (1.0 + r))
                }
            }
            ScalarRate::ExpDecay { amp, rate } => -rate * amp * (-rate * v).exp(),
            ScalarRate::Sigmoid { amp, k, n, .. } => amp * odd_hill(v, k, n).1,
        }
    }

    pub fn validate(&self, which: &'static str) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidFamily { which, reason });
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            ScalarRate::Constant { value } if !finite(&[value]) => bad("non-finite value".into()),
            ScalarRate::Affine { intercept, slope } if !finite(&[intercept, slope]) => {
                bad("non-finite coefficients".into())
            }
            ScalarRate::Hill { amp, k, n } => {
                if !finite(&[amp, k, n]) || k <= 0.0 {
                    bad(format!("hill needs finite amp and k > 0 (k = {k})"))
                } else if n <= 1.0 {
                    bad(format!("hill exponent n = {n} must exceed 1 for a C1 rate"))
                } else {
                    Ok(())
                }
            }
            ScalarRate::ExpDecay { amp, rate } if !finite(&[amp, rate]) => bad("non-finite coefficients".into()),
            ScalarRate::Sigmoid { base, amp, k, n } => {
                if !finite(&[base, amp, k, n]) || k <= 0.0 {
                    bad(format!("sigmoid needs finite coefficients and k > 0 (k = {k})"))
                } else if n < 1.0 {
                    bad(format!("sigmoid exponent n = {n} must be at least 1"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Exact `(min, max)` on `[lo, hi]`; every family is monotone.
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let a = self.value(lo);
        let b = self.value(hi);
        (a.min(b), a.max(b))
    }

    /// Infimum over `(lo, inf)`; monotone families attain it at an end or in
    /// the limit.
    pub fn inf_on_half_line(&self, lo: f64) -> f64 {
        let at_lo = self.value(lo);
        let limit = match *self {
            ScalarRate::Constant { value } => value,
            ScalarRate::Affine { intercept, slope } => {
                if slope == 0.0 {
                    intercept
                } else if slope > 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            ScalarRate::Hill { .. } => 0.0,
            ScalarRate::ExpDecay { amp, rate } => {
                if rate > 0.0 {
                    0.0
                } else if rate == 0.0 {
                    amp
                } else {
                    amp.signum() * f64::INFINITY
                }
            }
            ScalarRate::Sigmoid { base, amp, .. } => base + amp,
        };
        at_lo.min(limit)
    }

    /// Exact `sup |r'|` on `[lo, hi]` when the family admits a closed form.
    pub fn deriv_abs_max_on(&self, lo: f64, hi: f64) -> Option<f64> {
        match *self {
            ScalarRate::Constant { .. } => Some(0.0),
            ScalarRate::Affine { slope, .. } => Some(slope.abs()),
            ScalarRate::ExpDecay { .. } => Some(self.deriv(lo).abs().max(self.deriv(hi).abs())),
            _ => None,
        }
    }
}

/// Two-argument family `(x, y) -> r(x, y)` for `g` and `d`; `x` is maturity,
/// `y` the regulating mature-cell count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PlanarRate {
    Constant {
        value: f64,
    },
    /// `x(x) * y(y)`
    Separable {
        x: ScalarRate,
        y: ScalarRate,
    },
    /// `intercept + slope * x`
    AffineInX {
        intercept: f64,
        slope: f64,
    },
    /// `base + amp * sign(y) |y|^n / (k^n + |y|^n)`
    HillInY {
        base: f64,
        amp: f64,
        k: f64,
        n: f64,
    },
}

/// Extrema of a planar rate and its partials over a box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub inf: f64,
    pub inf_at: (f64, f64),
    pub sup: f64,
    pub sup_at: (f64, f64),
    pub sup_abs_d1: f64,
    pub d1_at: (f64, f64),
    pub sup_abs_d2: f64,
    /// True when the bounds are analytic rather than grid-sampled.
    pub exact: bool,
    pub samples: usize,
}

impl PlanarRate {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            PlanarRate::Constant { value } => *value,
            PlanarRate::Separable { x: fx, y: fy } => fx.value(x) * fy.value(y),
            PlanarRate::AffineInX { intercept, slope } => intercept + slope * x,
            PlanarRate::HillInY { base, amp, k, n } => base + amp * odd_hill(y, *k, *n).0,
        }
    }

    pub fn d1(&self, x: f64, y: f64) -> f64 {
        match self {
            PlanarRate::Constant { .. } | PlanarRate::HillInY { .. } => 0.0,
            PlanarRate::Separable { x: fx, y: fy } => fx.deriv(x) * fy.value(y),
            PlanarRate::AffineInX { slope, .. } => *slope,
        }
    }

    pub fn d2(&self, x: f64, y: f64) -> f64 {
        match self {
            PlanarRate::Constant { .. } | PlanarRate::AffineInX { .. } => 0.0,
            PlanarRate::Separable { x: fx, y: fy } => fx.value(x) * fy.deriv(y),
            PlanarRate::HillInY { amp, k, n, .. } => amp * odd_hill(y, *k, *n).1,
        }
    }

    /// Value and both partials in one pass.
    #[inline]
    pub fn eval_all(&self, x: f64, y: f64) -> (f64, f64, f64) {
        match self {
            PlanarRate::Constant { value } => (*value, 0.0, 0.0),
            PlanarRate::Separable { x: fx, y: fy } => {
                let (a, da) = (fx.value(x), fx.deriv(x));
                let (b, db) = (fy.value(y), fy.deriv(y));
                (a * b, da * b, a * db)
            }
            PlanarRate::AffineInX { intercept, slope } => (intercept + slope * x, *slope, 0.0),
            PlanarRate::HillInY { base, amp, k, n } => {
                let (s, ds) = odd_hill(y, *k, *n);
                (base + amp * s, 0.0, amp * ds)
            }
        }
    }

    /// True when the rate does not depend on its regulation argument.
    pub fn independent_of_y(&self) -> bool {
        match self {
            PlanarRate::Constant { .. } | PlanarRate::AffineInX { .. } => true,
            PlanarRate::Separable { y, .. } => matches!(y, ScalarRate::Constant { .. }),
            PlanarRate::HillInY { amp, .. } => *amp == 0.0,
        }
    }

    pub fn validate(&self, which: &'static str) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidFamily { which, reason });
        match *self {
            PlanarRate::Constant { value } if !value.is_finite() => bad("non-finite value".into()),
            PlanarRate::Separable { ref x, ref y } => {
                x.validate(which)?;
                y.validate(which)
            }
            PlanarRate::AffineInX { intercept, slope } if !(intercept.is_finite() && slope.is_finite()) => {
                bad("non-finite coefficients".into())
            }
            PlanarRate::HillInY { base, amp, k, n } => {
                if ![base, amp, k, n].iter().all(|v| v.is_finite()) || k <= 0.0 {
                    bad(format!("hill-in-y needs finite coefficients and k > 0 (k = {k})"))
                } else if n < 1.0 {
                    bad(format!("hill-in-y exponent n = {n} must be at least 1"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Extrema of the rate and its partials on `[x_lo, x_hi] x [y_lo, y_hi]`.
    ///
    /// Constant, affine-in-x, hill-in-y and separable families (with closed-form factor
    /// slopes) get analytic bounds; everything else is sampled on an
    /// `n_samples x n_samples` grid including the box edges.
    pub fn bounds_on_box(&self, xr: (f64, f64), yr: (f64, f64), n_samples: usize) -> BoxBounds {
        if let Some(b) = self.exact_bounds(xr, yr) {
            return b;
        }
        let n = n_samples.max(2);
        let mut out = BoxBounds {
            inf: f64::INFINITY,
            inf_at: (xr.0, yr.0),
            sup: f64::NEG_INFINITY,
            sup_at: (xr.0, yr.0),
            sup_abs_d1: 0.0,
            d1_at: (xr.0, yr.0),
            sup_abs_d2: 0.0,
            exact: false,
            samples: n * n,
        };
        let at = |lo: f64, hi: f64, i: usize| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        for i in 0..n {
            let x = at(xr.0, xr.1, i);
            for j in 0..n {
                let y = at(yr.0, yr.1, j);
                let (v, d1, d2) = self.eval_all(x, y);
                if v < out.inf {
                    out.inf = v;
                    out.inf_at = (x, y);
                }
                if v > out.sup {
                    out.sup = v;
                    out.sup_at = (x, y);
                }
                if d1.abs() > out.sup_abs_d1 {
                    out.sup_abs_d1 = d1.abs();
                    out.d1_at = (x, y);
                }
                out.sup_abs_d2 = out.sup_abs_d2.max(d2.abs());
            }
        }
        out
    }

    fn exact_bounds(&self, xr: (f64, f64), yr: (f64, f64)) -> Option<BoxBounds> {
        let centre = (0.5 * (xr.0 + xr.1), 0.5 * (yr.0 + yr.1));
        match self {
            PlanarRate::Constant { value } => Some(BoxBounds {
                inf: *value,
                inf_at: centre,
                sup: *value,
                sup_at: centre,
                sup_abs_d1: 0.0,
                d1_at: centre,
                sup_abs_d2: 0.0,
                exact: true,
                samples: 0,
            }),
            PlanarRate::AffineInX { intercept, slope } => {
                let a = intercept + slope * xr.0;
                let b = intercept + slope * xr.1;
                let (inf, inf_x, sup, sup_x) = if a <= b { (a, xr.0, b, xr.1) } else { (b, xr.1, a, xr.0) };
                Some(BoxBounds {
                    inf,
                    inf_at: (inf_x, centre.1),
                    sup,
                    sup_at: (sup_x, centre.1),
                    sup_abs_d1: slope.abs(),
                    d1_at: centre,
                    sup_abs_d2: 0.0,
                    exact: true,
                    samples: 0,
                })
            }
            PlanarRate::Separable { x: fx, y: fy } => {
                let dx = fx.deriv_abs_max_on(xr.0, xr.1)?;
                let dy = fy.deriv_abs_max_on(yr.0, yr.1)?;
                let (xa, xb) = (fx.value(xr.0), fx.value(xr.1));
                let (ya, yb) = (fy.value(yr.0), fy.value(yr.1));
                let corners = [
                    (xa * ya, (xr.0, yr.0)),
                    (xa * yb, (xr.0, yr.1)),
                    (xb * ya, (xr.1, yr.0)),
                    (xb * yb, (xr.1, yr.1)),
                ];
                let inf = corners.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
                let sup = corners.iter().max_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
                let xmax = xa.abs().max(xb.abs());
                let ymax = ya.abs().max(yb.abs());
                let y_at = if ya.abs() >= yb.abs() { yr.0 } else { yr.1 };
                let x_at = if fx.deriv(xr.0).abs() >= fx.deriv(xr.1).abs() {
                    xr.0
                } else {
                    xr.1
                };
                Some(BoxBounds {
                    inf: inf.0,
                    inf_at: inf.1,
                    sup: sup.0,
                    sup_at: sup.1,
                    sup_abs_d1: dx * ymax,
                    d1_at: (x_at, y_at),
                    sup_abs_d2: xmax * dy,
                    exact: true,
                    samples: 0,
                })
            }
            PlanarRate::HillInY { amp, k, n, .. } => {
                // monotone in y, flat in x; the slope of the odd Hill peaks at
                // |y| = k ((n - 1) / (n + 1))^(1/n)
                let (a, b) = (self.value(centre.0, yr.0), self.value(centre.0, yr.1));
                let (inf, inf_y, sup, sup_y) = if a <= b { (a, yr.0, b, yr.1) } else { (b, yr.1, a, yr.0) };
                let peak = if *n > 1.0 {
                    k * ((n - 1.0) / (n + 1.0)).powf(1.0 / n)
                } else {
                    0.0
                };
                let mut d2 = 0.0f64;
                for y in [yr.0, yr.1, peak, -peak] {
                    if y >= yr.0 && y <= yr.1 {
                        d2 = d2.max((amp * odd_hill(y, *k, *n).1).abs());
                    }
                }
                Some(BoxBounds {
                    inf,
                    inf_at: (centre.0, inf_y),
                    sup,
                    sup_at: (centre.0, sup_y),
                    sup_abs_d1: 0.0,
                    d1_at: centre,
                    sup_abs_d2: d2,
                    exact: true,
                    samples: 0,
                })
            }
        }
    }
}

/// The four ingredients plus their shared parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub params: RateParams,
    pub g: PlanarRate,
    pub d: PlanarRate,
    pub beta: ScalarRate,
    pub q: ScalarRate,
}

impl RateSet {
    /// Validates families, parameter invariants, and nonnegativity of `beta`
    /// on the regulation domain.
    pub fn new(params: RateParams, g: PlanarRate, d: PlanarRate, beta: ScalarRate, q: ScalarRate) -> Result<Self> {
        params.validate()?;
        let set = Self::new_unchecked(params, g, d, beta, q);
        set.validate_families()?;
        Ok(set)
    }

    /// Builds a rate set without checking parameter invariants; used to
    /// diagnose configurations that violate them.
    pub fn new_unchecked(params: RateParams, g: PlanarRate, d: PlanarRate, beta: ScalarRate, q: ScalarRate) -> Self {
        Self { params, g, d, beta, q }
    }

    pub fn validate_families(&self) -> Result<()> {
        self.g.validate("g")?;
        self.d.validate("d")?;
        self.beta.validate("beta")?;
        self.q.validate("q")?;
        let inf = self.beta.inf_on_half_line(self.params.r_minus);
        if inf < 0.0 {
            return Err(Error::InvalidFamily {
                which: "beta",
                reason: format!("must be nonnegative on (R_minus, inf), infimum is {inf}"),
            });
        }
        Ok(())
    }

    /// Reference parameterization: `x1 = 0`, `x2 = 1`, `b = 1.5`, `K = 1`,
    /// `eps = 0.75`, `mu = 0.1`, `R_minus = -1` with a regulated maturation
    /// speed in `(0.75, 1)`.
    pub fn demo() -> Self {
        Self::new(
            RateParams {
                x1: 0.0,
                x2: 1.0,
                b: 1.5,
                k: 1.0,
                eps: 0.75,
                mu: 0.1,
                r_minus: -1.0,
            },
            PlanarRate::HillInY {
                base: 0.875,
                amp: -0.125,
                k: 1.0,
                n: 2.0,
            },
            PlanarRate::HillInY {
                base: 0.1,
                amp: -0.05,
                k: 1.0,
                n: 2.0,
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
        .expect("demo rates are valid")
    }

    #[inline]
    fn check_reg(&self, y: f64, what: &'static str) -> Result<()> {
        if !(y > self.params.r_minus) {
            return Err(Error::Domain {
                what,
                value: y,
                bound: self.params.r_minus,
            });
        }
        Ok(())
    }

    #[inline]
    fn check_maturity(x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::Domain {
                what: "maturity",
                value: x,
                bound: f64::NEG_INFINITY,
            });
        }
        Ok(())
    }

    pub fn g(&self, x: f64, y: f64) -> Result<f64> {
        Self::check_maturity(x)?;
        self.check_reg(y, "regulation argument of g")?;
        Ok(self.g.value(x, y))
    }

    /// `(g, d1 g, d2 g)` at `(x, y)`.
    #[inline]
    pub fn g_all(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        Self::check_maturity(x)?;
        self.check_reg(y, "regulation argument of g")?;
        Ok(self.g.eval_all(x, y))
    }

    pub fn d(&self, x: f64, y: f64) -> Result<f64> {
        Self::check_maturity(x)?;
        self.check_reg(y, "regulation argument of d")?;
        Ok(self.d.value(x, y))
    }

    #[inline]
    pub fn d_all(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        Self::check_maturity(x)?;
        self.check_reg(y, "regulation argument of d")?;
        Ok(self.d.eval_all(x, y))
    }

    pub fn beta(&self, v: f64) -> Result<f64> {
        self.check_reg(v, "argument of beta")?;
        Ok(self.beta.value(v))
    }

    pub fn beta_deriv(&self, v: f64) -> Result<f64> {
        self.check_reg(v, "argument of beta")?;
        Ok(self.beta.deriv(v))
    }

    pub fn q(&self, v: f64) -> Result<f64> {
        self.check_reg(v, "argument of q")?;
        Ok(self.q.value(v))
    }

    pub fn q_deriv(&self, v: f64) -> Result<f64> {
        self.check_reg(v, "argument of q")?;
        Ok(self.q.deriv(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6 * x.abs().max(1.0);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn scalar_families() -> Vec<ScalarRate> {
        vec![
            ScalarRate::Constant { value: 2.0 },
            ScalarRate::Affine {
                intercept: 1.0,
                slope: -0.5,
            },
            ScalarRate::Hill {
                amp: 1.3,
                k: 0.8,
                n: 2.5,
            },
            ScalarRate::ExpDecay { amp: 0.7, rate: 0.4 },
            ScalarRate::Sigmoid {
                base: 0.2,
                amp: -1.1,
                k: 1.2,
                n: 1.0,
            },
            ScalarRate::Sigmoid {
                base: 0.5,
                amp: 2.0,
                k: 0.5,
                n: 3.0,
            },
        ]
    }

    #[test]
    fn constant_beta() {
        let r = ScalarRate::Constant { value: 2.0 };
        assert_eq!(r.value(5.0), 2.0);
        assert_eq!(r.deriv(5.0), 0.0);
    }

    #[test]
    fn affine_q_has_designed_root() {
        // q0 (1 - v / theta) with q0 = 1, theta = 2
        let r = ScalarRate::Affine {
            intercept: 1.0,
            slope: -0.5,
        };
        assert_eq!(r.value(2.0), 0.0);
    }

    #[test]
    fn hill_beta_value_and_slope() {
        let r = ScalarRate::Hill {
            amp: 1.0,
            k: 1.0,
            n: 2.0,
        };
        assert!((r.value(1.0) - 0.5).abs() < 1e-15);
        assert!((r.deriv(1.0) + 0.5).abs() < 1e-15);
        assert!((central(|v| r.value(v), 1.0) + 0.5).abs() < 1e-8);
    }

    #[test]
    fn scalar_derivatives_match_central_differences() {
        for r in scalar_families() {
            for &v in &[-0.9, -0.3, 0.05, 0.4, 1.0, 2.7, 9.0] {
                let fd = central(|t| r.value(t), v);
                let an = r.deriv(v);
                let err = (fd - an).abs() / an.abs().max(1e-3);
                assert!(err < 1e-5, "{r:?} at {v}: analytic {an}, fd {fd}");
            }
        }
    }

    #[test]
    fn sigmoid_is_c1_at_origin() {
        let r = ScalarRate::Sigmoid {
            base: 0.0,
            amp: 1.0,
            k: 2.0,
            n: 1.0,
        };
        assert!((r.deriv(1e-12) - 0.5).abs() < 1e-9);
        assert!((r.deriv(-1e-12) - 0.5).abs() < 1e-9);
        assert_eq!(r.deriv(0.0), 0.5);
    }

    #[test]
    fn planar_constant() {
        let g = PlanarRate::Constant { value: 1.0 };
        assert_eq!(g.eval_all(0.3, 7.0), (1.0, 0.0, 0.0));
    }

    #[test]
    fn separable_partials_follow_product_rule() {
        let g = PlanarRate::Separable {
            x: ScalarRate::Affine {
                intercept: 1.0,
                slope: 0.2,
            },
            y: ScalarRate::Sigmoid {
                base: 1.0,
                amp: -0.4,
                k: 1.0,
                n: 2.0,
            },
        };
        for &(x, y) in &[(0.3, 0.2), (1.4, 2.0), (-0.2, -0.5)] {
            let fd1 = central(|t| g.value(t, y), x);
            let fd2 = central(|t| g.value(x, t), y);
            assert!((fd1 - g.d1(x, y)).abs() <= 1e-6 * g.d1(x, y).abs().max(1e-3));
            assert!((fd2 - g.d2(x, y)).abs() <= 1e-6 * g.d2(x, y).abs().max(1e-3));
        }
    }

    #[test]
    fn constant_box_bounds_are_exact() {
        let g = PlanarRate::Constant { value: 1.0 };
        let b = g.bounds_on_box((-0.5, 2.5), (0.0, 10.0), 11);
        assert_eq!((b.inf, b.sup, b.sup_abs_d1, b.sup_abs_d2), (1.0, 1.0, 0.0, 0.0));
        assert!(b.exact);
    }

    #[test]
    fn affine_box_bounds() {
        let g = PlanarRate::AffineInX {
            intercept: 2.0,
            slope: -0.1,
        };
        let b = g.bounds_on_box((0.0, 2.0), (0.0, 1.0), 11);
        assert!((b.inf - 1.8).abs() < 1e-15);
        assert_eq!(b.sup, 2.0);
        assert_eq!(b.sup_abs_d1, 0.1);
        assert!(b.exact);
        assert_eq!(b.inf_at.0, 2.0);
    }

    #[test]
    fn hill_in_y_bounds_match_dense_scan() {
        let g = PlanarRate::HillInY {
            base: 1.0,
            amp: -0.9,
            k: 0.7,
            n: 1.5,
        };
        let xr = (-0.5, 2.5);
        let yr = (-0.8, 6.0);
        let b = g.bounds_on_box(xr, yr, 101);
        assert!(b.exact);
        // g does not depend on x, so a 10^6-point scan along y is the full box scan
        let n = 1_000_000;
        let (mut lo, mut hi, mut d2) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for i in 0..n {
            let y = yr.0 + (yr.1 - yr.0) * i as f64 / (n - 1) as f64;
            let (v, _, dy) = g.eval_all(0.0, y);
            lo = lo.min(v);
            hi = hi.max(v);
            d2 = d2.max(dy.abs());
        }
        assert!((b.inf - lo).abs() < 1e-12);
        assert!((b.sup - hi).abs() < 1e-12);
        assert!(b.sup_abs_d2 >= d2 && b.sup_abs_d2 - d2 < 1e-6);
    }

    #[test]
    fn separable_exact_bounds_match_scan() {
        let g = PlanarRate::Separable {
            x: ScalarRate::Affine {
                intercept: 1.0,
                slope: -0.2,
            },
            y: ScalarRate::ExpDecay { amp: 0.8, rate: 0.3 },
        };
        let xr = (-0.5, 2.5);
        let yr = (-0.5, 4.0);
        let b = g.bounds_on_box(xr, yr, 2);
        assert!(b.exact);
        let n = 1001;
        let (mut lo, mut hi, mut d1, mut d2) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
        for i in 0..n {
            let x = xr.0 + (xr.1 - xr.0) * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let y = yr.0 + (yr.1 - yr.0) * j as f64 / (n - 1) as f64;
                let (v, a, c) = g.eval_all(x, y);
                lo = lo.min(v);
                hi = hi.max(v);
                d1 = d1.max(a.abs());
                d2 = d2.max(c.abs());
            }
        }
        assert!((b.inf - lo).abs() < 1e-9);
        assert!((b.sup - hi).abs() < 1e-9);
        assert!((b.sup_abs_d1 - d1).abs() < 1e-9);
        assert!((b.sup_abs_d2 - d2).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        let r = RateSet::demo();
        assert!(matches!(r.beta(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(r.q(-2.0), Err(Error::Domain { .. })));
        assert!(matches!(r.g(0.5, -1.5), Err(Error::Domain { .. })));
        assert!(r.g(0.5, -0.5).is_ok());
    }

    #[test]
    fn parameter_invariants() {
        let mut p = RateSet::demo().params;
        assert!(p.validate().is_ok());
        assert_eq!(p.horizon(), 1.5);
        p.x2 = 1.6 + p.x1;
        p.eps = 1.0;
        assert!(p.validate().is_err());
        let mut p = RateSet::demo().params;
        p.r_minus = 0.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn negative_beta_rejected() {
        let demo = RateSet::demo();
        let bad = RateSet::new(
            demo.params,
            demo.g.clone(),
            demo.d.clone(),
            ScalarRate::Affine {
                intercept: 0.5,
                slope: 1.0,
            },
            demo.q.clone(),
        );
        assert!(matches!(bad, Err(Error::InvalidFamily { which: "beta", .. })));
    }

    #[test]
    fn serde_tags() {
        let r = ScalarRate::ExpDecay { amp: 1.0, rate: 2.0 };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"family":"exp-decay","amp":1.0,"rate":2.0}"#);
        let p: PlanarRate = serde_json::from_str(r#"{"family":"hill-in-y","base":1,"amp":-0.5,"k":1,"n":2}"#).unwrap();
        assert!(matches!(p, PlanarRate::HillInY { .. }));
    }
}
