//! C1 history segments on `[-h, 0]`, the states of the delay equation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{cubic_deriv, cubic_value, HermiteCurve};

/// Tolerance for evaluating slightly outside `[-h, 0]`.
pub const WINDOW_TOL: f64 = 1e-12;

/// Allowed derivative (and value) mismatch when splicing a step onto a segment.
pub const SPLICE_TOL: f64 = 1e-10;

/// Default knot count for [`HistorySegment::from_function`].
pub const DEFAULT_KNOTS: usize = 64;

/// A C1 function on `[-h, 0]` stored as piecewise cubic Hermite data.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySegment {
    curve: HermiteCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentNorms {
    /// `max |phi(theta)|` over the window (max over components).
    pub sup_norm: f64,
    /// `sup_norm + max |phi'(theta)|`.
    pub c1_norm: f64,
}

/// One cubic step on `[0, dt]` given by its end values and derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPiece {
    pub dt: f64,
    pub left_value: Vec<f64>,
    pub left_deriv: Vec<f64>,
    pub right_value: Vec<f64>,
    pub right_deriv: Vec<f64>,
}

impl StepPiece {
    pub fn dim(&self) -> usize {
        self.left_value.len()
    }

    pub fn value(&self, u: f64, c: usize) -> f64 {
        if u <= 0.0 {
            return self.left_value[c];
        }
        if u >= self.dt {
            return self.right_value[c];
        }
        cubic_value(
            self.dt,
            self.left_value[c],
            self.left_deriv[c],
            self.right_value[c],
            self.right_deriv[c],
            u,
        )
    }

    pub fn deriv(&self, u: f64, c: usize) -> f64 {
        if u <= 0.0 {
            return self.left_deriv[c];
        }
        if u >= self.dt {
            return self.right_deriv[c];
        }
        cubic_deriv(
            self.dt,
            self.left_value[c],
            self.left_deriv[c],
            self.right_value[c],
            self.right_deriv[c],
            u,
        )
    }

    /// The same cubic restricted to `[0, u]`.
    pub fn truncated(&self, u: f64) -> StepPiece {
        let d = self.dim();
        StepPiece {
            dt: u,
            left_value: self.left_value.clone(),
            left_deriv: self.left_deriv.clone(),
            right_value: (0..d).map(|c| self.value(u, c)).collect(),
            right_deriv: (0..d).map(|c| self.deriv(u, c)).collect(),
        }
    }
}

impl HistorySegment {
    /// Validates and wraps knot data. Knots must run from exactly `-h` to
    /// exactly `0`.
    pub fn new(dim: usize, knots: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidSegment(format!("dimension {dim} not in {{1, 2}}")));
        }
        let curve = HermiteCurve::new(dim, knots, values, derivs).map_err(Error::InvalidSegment)?;
        if curve.end() != 0.0 {
            return Err(Error::InvalidSegment(format!(
                "last knot is {}, expected 0",
                curve.end()
            )));
        }
        if !(curve.start() < 0.0) {
            return Err(Error::InvalidSegment("first knot must be negative".into()));
        }
        Ok(Self { curve })
    }

    pub(crate) fn from_curve(curve: HermiteCurve) -> Self {
        debug_assert_eq!(curve.end(), 0.0);
        Self { curve }
    }

    /// Samples `f` and `df` on `m + 1` uniform knots over `[-h, 0]`.
    pub fn from_function<F, D>(f: F, df: D, dim: usize, h: f64, m: usize) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64>,
        D: Fn(f64) -> Vec<f64>,
    {
        if m < 2 {
            return Err(Error::InvalidSegment(format!("need m >= 2 subintervals, got {m}")));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidSegment(format!("window length {h} must be positive")));
        }
        let mut knots: Vec<f64> = (0..=m).map(|i| -h + h * i as f64 / m as f64).collect();
        knots[0] = -h;
        knots[m] = 0.0;
        let mut values = Vec::with_capacity((m + 1) * dim);
        let mut derivs = Vec::with_capacity((m + 1) * dim);
        for &t in &knots {
            let v = f(t);
            let d = df(t);
            if v.len() != dim || d.len() != dim {
                return Err(Error::InvalidSegment("generator returned wrong dimension".into()));
            }
            values.extend(v);
            derivs.extend(d);
        }
        Self::new(dim, knots, values, derivs)
    }

    /// Scalar convenience wrapper around [`HistorySegment::from_function`].
    pub fn from_scalar<F, D>(f: F, df: D, h: f64, m: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        D: Fn(f64) -> f64,
    {
        Self::from_function(|t| vec![f(t)], |t| vec![df(t)], 1, h, m)
    }

    pub fn constant(value: &[f64], h: f64) -> Result<Self> {
        let dim = value.len();
        let mut values = value.to_vec();
        values.extend_from_slice(value);
        Self::new(dim, vec![-h, 0.0], values, vec![0.0; 2 * dim])
    }

    pub fn h(&self) -> f64 {
        -self.curve.start()
    }

    pub fn dim(&self) -> usize {
        self.curve.dim()
    }

    pub fn knots(&self) -> &[f64] {
        self.curve.knots()
    }

    pub fn curve(&self) -> &HermiteCurve {
        &self.curve
    }

    pub fn value_at_knot(&self, i: usize) -> &[f64] {
        self.curve.value_at_knot(i)
    }

    pub fn deriv_at_knot(&self, i: usize) -> &[f64] {
        self.curve.deriv_at_knot(i)
    }

    /// Value at `theta = 0`.
    pub fn head(&self) -> &[f64] {
        self.curve.value_at_knot(self.curve.len() - 1)
    }

    /// Derivative at `theta = 0`.
    pub fn head_deriv(&self) -> &[f64] {
        self.curve.deriv_at_knot(self.curve.len() - 1)
    }

    fn check_window(&self, theta: f64) -> Result<()> {
        let h = self.h();
        if theta < -h - WINDOW_TOL || theta > WINDOW_TOL || theta.is_nan() {
            return Err(Error::OutsideWindow { theta, h });
        }
        Ok(())
    }

    pub fn evaluate(&self, theta: f64) -> Result<Vec<f64>> {
        self.check_window(theta)?;
        Ok(self.curve.value_vec(theta))
    }

    pub fn derivative(&self, theta: f64) -> Result<Vec<f64>> {
        self.check_window(theta)?;
        Ok(self.curve.deriv_vec(theta))
    }

    /// Component `c` at `theta`, clamped to the window. For hot loops where
    /// the caller already guarantees `theta` in `[-h, 0]`.
    #[inline]
    pub fn value_clamped(&self, theta: f64, c: usize) -> f64 {
        self.curve.value(theta, c)
    }

    #[inline]
    pub fn deriv_clamped(&self, theta: f64, c: usize) -> f64 {
        self.curve.deriv(theta, c)
    }

    /// Exact norms of the interpolant (max over components).
    pub fn norms(&self) -> SegmentNorms {
        let mut sup = 0.0f64;
        let mut dsup = 0.0f64;
        for c in 0..self.dim() {
            let (s, d) = self.curve.sup_abs(c);
            sup = sup.max(s);
            dsup = dsup.max(d);
        }
        SegmentNorms {
            sup_norm: sup,
            c1_norm: sup + dsup,
        }
    }

    /// Exact `(min, max)` of component `c`.
    pub fn range(&self, c: usize) -> (f64, f64) {
        self.curve.range(c)
    }

    /// `self - other`, on the union of both knot grids.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() || (self.h() - other.h()).abs() > WINDOW_TOL * self.h().max(1.0) {
            return Err(Error::InvalidSegment("segments differ in dimension or window".into()));
        }
        Ok(Self::from_curve(self.curve.difference(&other.curve)))
    }

    /// Component `c` as a standalone scalar segment.
    pub fn component(&self, c: usize) -> Self {
        let n = self.curve.len();
        let values = (0..n).map(|i| self.curve.value_at_knot(i)[c]).collect();
        let derivs = (0..n).map(|i| self.curve.deriv_at_knot(i)[c]).collect();
        Self::from_curve(HermiteCurve::from_parts(1, self.knots().to_vec(), values, derivs))
    }

    /// Shifts the window forward by `piece.dt`: the piece is appended at the
    /// right end and content older than `-h` is dropped.
    pub fn append_step(&self, piece: &StepPiece) -> Result<Self> {
        let dim = self.dim();
        if piece.dim() != dim
            || piece.right_value.len() != dim
            || piece.left_deriv.len() != dim
            || piece.right_deriv.len() != dim
        {
            return Err(Error::InvalidSegment("step piece has wrong dimension".into()));
        }
        let head = self.head();
        let head_d = self.head_deriv();
        let mismatch = (0..dim).any(|c| {
            (piece.left_value[c] - head[c]).abs() > SPLICE_TOL || (piece.left_deriv[c] - head_d[c]).abs() > SPLICE_TOL
        });
        if mismatch {
            return Err(Error::Continuity {
                seg_value: head.to_vec(),
                seg_deriv: head_d.to_vec(),
                piece_value: piece.left_value.clone(),
                piece_deriv: piece.left_deriv.clone(),
            });
        }
        let dt = piece.dt;
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::InvalidSegment(format!("step length {dt} must be nonnegative")));
        }
        if dt == 0.0 {
            return Ok(self.clone());
        }
        let h = self.h();
        let snap = 1e-13 * h.max(1.0);
        let cut = -h;

        let mut knots = Vec::with_capacity(self.curve.len() + 2);
        let mut values = Vec::with_capacity((self.curve.len() + 2) * dim);
        let mut derivs = Vec::with_capacity((self.curve.len() + 2) * dim);

        if dt < h {
            // old content lives on [-h - dt, -dt] after the shift
            let old = self.curve.knots();
            let first_kept = old.partition_point(|&t| t - dt <= cut + snap);
            let left_edge = self.curve.value_vec(cut + dt);
            let left_edge_d = self.curve.deriv_vec(cut + dt);
            knots.push(cut);
            values.extend(left_edge);
            derivs.extend(left_edge_d);
            for (i, &t) in old.iter().enumerate().skip(first_kept) {
                knots.push(t - dt);
                values.extend_from_slice(self.curve.value_at_knot(i));
                derivs.extend_from_slice(self.curve.deriv_at_knot(i));
            }
        } else {
            // the whole window is covered by the new piece
            let u = dt - h;
            knots.push(cut);
            values.extend((0..dim).map(|c| piece.value(u, c)));
            derivs.extend((0..dim).map(|c| piece.deriv(u, c)));
        }
        knots.push(0.0);
        values.extend_from_slice(&piece.right_value);
        derivs.extend_from_slice(&piece.right_deriv);

        Ok(Self::from_curve(HermiteCurve::from_parts(dim, knots, values, derivs)))
    }

    /// The last cubic piece, as a step ending at `theta = 0`.
    pub fn last_piece(&self) -> StepPiece {
        let n = self.curve.len();
        StepPiece {
            dt: self.curve.knots()[n - 1] - self.curve.knots()[n - 2],
            left_value: self.curve.value_at_knot(n - 2).to_vec(),
            left_deriv: self.curve.deriv_at_knot(n - 2).to_vec(),
            right_value: self.curve.value_at_knot(n - 1).to_vec(),
            right_deriv: self.curve.deriv_at_knot(n - 1).to_vec(),
        }
    }

    /// Adds `delta[c] * hb * (s^3 - s^2)`, `s = (theta + hb) / hb`, on
    /// `[-hb, 0]`. The correction vanishes with its slope at `-hb`, vanishes
    /// at `0`, and has slope `delta` at `0`.
    pub fn with_head_slope_correction(&self, hb: f64, delta: &[f64]) -> Self {
        let dim = self.dim();
        let h = self.h();
        let hb = hb.min(h);
        let start = -hb;
        let snap = 1e-13 * h.max(1.0);
        let bump = |theta: f64| {
            let s = (theta - start) / hb;
            (hb * (s * s * s - s * s), 3.0 * s * s - 2.0 * s)
        };
        let mut knots = Vec::new();
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        let mut inserted = false;
        for i in 0..self.curve.len() {
            let t = self.curve.knots()[i];
            if !inserted && t > start + snap && start > -h + snap {
                knots.push(start);
                values.extend(self.curve.value_vec(start));
                derivs.extend(self.curve.deriv_vec(start));
                inserted = true;
            }
            if (t - start).abs() <= snap {
                inserted = true;
            }
            knots.push(t);
            let v = self.curve.value_at_knot(i);
            let d = self.curve.deriv_at_knot(i);
            if t > start + snap {
                let (b, db) = bump(t);
                values.extend((0..dim).map(|c| v[c] + delta[c] * b));
                derivs.extend((0..dim).map(|c| d[c] + delta[c] * db));
            } else {
                values.extend_from_slice(v);
                derivs.extend_from_slice(d);
            }
        }
        Self::from_curve(HermiteCurve::from_parts(dim, knots, values, derivs))
    }

    /// Debug dump: `knot_t,value_0..,deriv_0..` with a header row.
    pub fn to_csv(&self) -> String {
        let dim = self.dim();
        let mut out = String::from("knot_t");
        for c in 0..dim {
            let _ = write!(out, ",value{c}");
        }
        for c in 0..dim {
            let _ = write!(out, ",deriv{c}");
        }
        out.push('\n');
        for i in 0..self.curve.len() {
            let _ = write!(out, "{:e}", self.curve.knots()[i]);
            for v in self.curve.value_at_knot(i) {
                let _ = write!(out, ",{v:e}");
            }
            for d in self.curve.deriv_at_knot(i) {
                let _ = write!(out, ",{d:e}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`HistorySegment::to_csv`]. Lines
    /// starting with `#` are skipped; a header row is optional.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut knots = Vec::new();
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        let mut dim = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("knot_t") {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidSegment(format!("line {}: {e}", lineno + 1)))?;
            if fields.len() != 3 && fields.len() != 5 {
                return Err(Error::InvalidSegment(format!(
                    "line {}: expected 3 or 5 columns, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let d = (fields.len() - 1) / 2;
            if *dim.get_or_insert(d) != d {
                return Err(Error::InvalidSegment(format!(
                    "line {}: column count changed",
                    lineno + 1
                )));
            }
            knots.push(fields[0]);
            values.extend_from_slice(&fields[1..1 + d]);
            derivs.extend_from_slice(&fields[1 + d..]);
        }
        let dim = dim.ok_or_else(|| Error::InvalidSegment("no data rows".into()))?;
        Self::new(dim, knots, values, derivs)
    }
}
