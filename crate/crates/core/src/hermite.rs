//! Cubic Hermite pieces and piecewise-cubic curves.
//!
//! A [`HermiteCurve`] stores value and first derivative at every knot; each
//! subinterval is the unique cubic matching both ends, so the curve is C1 by
//! construction. Both the history segments of the delay equation and the
//! dense output of the integrators use this representation.

/// Value of the cubic on `[0, len]` at local offset `u`.
#[inline]
pub fn cubic_value(len: f64, y0: f64, d0: f64, y1: f64, d1: f64, u: f64) -> f64 {
    let s = u / len;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * len * d0 + h01 * y1 + h11 * len * d1
}

/// First derivative of the cubic on `[0, len]` at local offset `u`.
#[inline]
pub fn cubic_deriv(len: f64, y0: f64, d0: f64, y1: f64, d1: f64, u: f64) -> f64 {
    let s = u / len;
    let s2 = s * s;
    let g00 = 6.0 * s2 - 6.0 * s;
    let g10 = 3.0 * s2 - 4.0 * s + 1.0;
    let g11 = 3.0 * s2 - 2.0 * s;
    g00 * (y0 - y1) / len + g10 * d0 + g11 * d1
}

/// Interior points (as offsets in `(0, len)`) where the cubic has zero slope.
pub fn cubic_critical_points(len: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> ([f64; 2], usize) {
    // len * p'(s) = a s^2 + b s + c on s in [0, 1]
    let dy = y0 - y1;
    let a = 6.0 * dy + 3.0 * len * (d0 + d1);
    let b = -6.0 * dy - len * (4.0 * d0 + 2.0 * d1);
    let c = len * d0;
    let mut out = [0.0; 2];
    let mut n = 0;
    let mut push = |s: f64| {
        if s > 0.0 && s < 1.0 && n < 2 {
            out[n] = s * len;
            n += 1;
        }
    };
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return (out, 0);
    }
    if a.abs() <= 1e-14 * scale {
        if b != 0.0 {
            push(-c / b);
        }
        return (out, n);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return (out, 0);
    }
    let sq = disc.sqrt();
    // numerically stable pair of roots
    let q = -0.5 * (b + b.signum() * sq);
    if q != 0.0 {
        push(q / a);
        push(c / q);
    } else {
        push(0.0);
    }
    (out, n)
}

/// Interior offset where the derivative of the cubic is extremal, if any.
pub fn cubic_slope_extremum(len: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> Option<f64> {
    // len^2 p''(s) = a s + b
    let dy = y0 - y1;
    let a = 12.0 * dy + 6.0 * len * (d0 + d1);
    let b = -6.0 * dy - len * (4.0 * d0 + 2.0 * d1);
    if a == 0.0 {
        return None;
    }
    let s = -b / a;
    (s > 0.0 && s < 1.0).then_some(s * len)
}

/// Piecewise cubic Hermite curve with `dim` components.
///
/// Values and derivatives are stored knot-major: component `c` of knot `i`
/// lives at index `i * dim + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCurve {
    dim: usize,
    knots: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl HermiteCurve {
    /// Builds a curve without validation; callers guarantee strictly
    /// increasing knots and matching lengths.
    pub(crate) fn from_parts(dim: usize, knots: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), knots.len() * dim);
        debug_assert_eq!(derivs.len(), knots.len() * dim);
        Self {
            dim,
            knots,
            values,
            derivs,
        }
    }

    pub fn new(dim: usize, knots: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self, String> {
        if dim == 0 {
            return Err("dimension must be positive".into());
        }
        if knots.len() < 2 {
            return Err(format!("need at least two knots, got {}", knots.len()));
        }
        if values.len() != knots.len() * dim || derivs.len() != knots.len() * dim {
            return Err(format!(
                "expected {} values and derivatives, got {} and {}",
                knots.len() * dim,
                values.len(),
                derivs.len()
            ));
        }
        if let Some(w) = knots.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(format!("knots not strictly increasing near {} .. {}", w[0], w[1]));
        }
        if knots.iter().chain(&values).chain(&derivs).any(|x| !x.is_finite()) {
            return Err("non-finite knot data".into());
        }
        Ok(Self::from_parts(dim, knots, values, derivs))
    }

    pub(crate) fn push(&mut self, t: f64, value: &[f64], deriv: &[f64]) {
        debug_assert!(t > *self.knots.last().unwrap());
        self.knots.push(t);
        self.values.extend_from_slice(value);
        self.derivs.extend_from_slice(deriv);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn value_at_knot(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn deriv_at_knot(&self, i: usize) -> &[f64] {
        &self.derivs[i * self.dim..(i + 1) * self.dim]
    }

    /// Index `i` of the interval `[knots[i], knots[i+1]]` containing `t`
    /// (clamped to the first/last interval).
    pub fn locate(&self, t: f64) -> usize {
        let n = self.knots.len();
        if t <= self.knots[0] {
            return 0;
        }
        if t >= self.knots[n - 1] {
            return n - 2;
        }
        // first knot strictly greater than t, minus one
        self.knots.partition_point(|&k| k <= t) - 1
    }

    #[inline]
    fn piece(&self, i: usize, c: usize) -> (f64, f64, f64, f64, f64) {
        let d = self.dim;
        (
            self.knots[i + 1] - self.knots[i],
            self.values[i * d + c],
            self.derivs[i * d + c],
            self.values[(i + 1) * d + c],
            self.derivs[(i + 1) * d + c],
        )
    }

    /// Component `c` at time `t`; `t` is clamped to the curve's span.
    pub fn value(&self, t: f64, c: usize) -> f64 {
        let i = self.locate(t);
        let t0 = self.knots[i];
        if t <= t0 {
            return self.values[i * self.dim + c];
        }
        if t >= self.knots[i + 1] {
            return self.values[(i + 1) * self.dim + c];
        }
        let (len, y0, d0, y1, d1) = self.piece(i, c);
        cubic_value(len, y0, d0, y1, d1, t - t0)
    }

    /// Derivative of component `c` at time `t` (clamped).
    pub fn deriv(&self, t: f64, c: usize) -> f64 {
        let i = self.locate(t);
        let t0 = self.knots[i];
        if t <= t0 {
            return self.derivs[i * self.dim + c];
        }
        if t >= self.knots[i + 1] {
            return self.derivs[(i + 1) * self.dim + c];
        }
        let (len, y0, d0, y1, d1) = self.piece(i, c);
        cubic_deriv(len, y0, d0, y1, d1, t - t0)
    }

    pub fn value_vec(&self, t: f64) -> Vec<f64> {
        (0..self.dim).map(|c| self.value(t, c)).collect()
    }

    pub fn deriv_vec(&self, t: f64) -> Vec<f64> {
        (0..self.dim).map(|c| self.deriv(t, c)).collect()
    }

    /// Exact minimum and maximum of component `c` over the whole curve.
    pub fn range(&self, c: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.knots.len() {
            let v = self.values[i * self.dim + c];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        for i in 0..self.knots.len() - 1 {
            let (len, y0, d0, y1, d1) = self.piece(i, c);
            let (pts, n) = cubic_critical_points(len, y0, d0, y1, d1);
            for &u in &pts[..n] {
                let v = cubic_value(len, y0, d0, y1, d1, u);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// Exact sup of |component c| and of |derivative of component c|.
    pub fn sup_abs(&self, c: usize) -> (f64, f64) {
        let (lo, hi) = self.range(c);
        let sup = lo.abs().max(hi.abs());
        let mut dsup = 0.0f64;
        for i in 0..self.knots.len() {
            dsup = dsup.max(self.derivs[i * self.dim + c].abs());
        }
        for i in 0..self.knots.len() - 1 {
            let (len, y0, d0, y1, d1) = self.piece(i, c);
            if let Some(u) = cubic_slope_extremum(len, y0, d0, y1, d1) {
                dsup = dsup.max(cubic_deriv(len, y0, d0, y1, d1, u).abs());
            }
        }
        (sup, dsup)
    }

    /// Sub-curve on `[a, b]`; endpoints not on knots are inserted by exact
    /// evaluation, which reproduces the same cubics.
    pub fn slice(&self, a: f64, b: f64) -> Self {
        debug_assert!(a < b);
        let d = self.dim;
        let snap = 1e-13 * (self.end() - self.start()).abs().max(1.0);
        let mut knots = Vec::new();
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        knots.push(a);
        values.extend(self.value_vec(a));
        derivs.extend(self.deriv_vec(a));
        for i in 0..self.knots.len() {
            let t = self.knots[i];
            if t > a + snap && t < b - snap {
                knots.push(t);
                values.extend_from_slice(&self.values[i * d..(i + 1) * d]);
                derivs.extend_from_slice(&self.derivs[i * d..(i + 1) * d]);
            }
        }
        knots.push(b);
        values.extend(self.value_vec(b));
        derivs.extend(self.deriv_vec(b));
        Self::from_parts(d, knots, values, derivs)
    }

    /// Pointwise difference on the union of both knot sets; exact for
    /// piecewise cubics sharing the same span.
    pub fn difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let span = (self.end() - self.start()).abs().max(1.0);
        let mut knots: Vec<f64> = self.knots.iter().chain(&other.knots).copied().collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|b, a| (*b - *a).abs() <= 1e-13 * span);
        let mut values = Vec::with_capacity(knots.len() * d);
        let mut derivs = Vec::with_capacity(knots.len() * d);
        for &t in &knots {
            for c in 0..d {
                values.push(self.value(t, c) - other.value(t, c));
                derivs.push(self.deriv(t, c) - other.deriv(t, c));
            }
        }
        Self::from_parts(d, knots, values, derivs)
    }

    pub(crate) fn into_parts(self) -> (usize, Vec<f64>, Vec<f64>, Vec<f64>) {
        (self.dim, self.knots, self.values, self.derivs)
    }
}
