use super::{ReportEntry, Witness};
use crate::semiflow::Trajectory;

/// Default cap on the fitted growth exponent.
pub const DEFAULT_K2_CAP: f64 = 1e3;

/// Bounds along a trajectory for the split `f = a(x_t) x(t) + b(x_t)`:
/// `K1 = max |a|` and an envelope `|b2(t)| <= C exp(K2 t)`.
///
/// `K2` is the least-squares slope of `log |b2|` against `t`; `log C` is the
/// fitted intercept raised until the line dominates every sample.
pub fn check_b(traj: &Trajectory, k2_cap: f64) -> ReportEntry {
    let mut e = ReportEntry::new("B");
    let recs: Vec<_> = traj
        .records
        .iter()
        .filter(|r| r.a[0].is_finite() && r.b2.is_finite())
        .collect();
    e.samples_used = recs.len();
    let k1 = recs.iter().map(|r| r.a[0].hypot(r.a[1])).fold(0.0f64, f64::max);
    e.value("K1", k1);

    let pts: Vec<(f64, f64)> = recs
        .iter()
        .filter(|r| r.b2 != 0.0)
        .map(|r| (r.t, r.b2.abs().ln()))
        .collect();
    let (k2, log_c) = match pts.len() {
        0 => (0.0, f64::NEG_INFINITY),
        1 => (0.0, pts[0].1),
        m => {
            let mf = m as f64;
            let mt = pts.iter().map(|p| p.0).sum::<f64>() / mf;
            let ml = pts.iter().map(|p| p.1).sum::<f64>() / mf;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
            let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            let lift = pts
                .iter()
                .map(|p| p.1 - (ml + slope * (p.0 - mt)))
                .fold(f64::NEG_INFINITY, f64::max);
            (slope, ml - slope * mt + lift.max(0.0))
        }
    };
    e.value("K2", k2);
    e.value("C", log_c.exp());

    if !k2.is_finite() || !(k1.is_finite()) {
        e.fail(Witness::new("non-finite", &[("K1", k1), ("K2", k2)]));
    } else if k2 > k2_cap {
        e.fail(Witness::new("K2-cap", &[("K2", k2), ("cap", k2_cap)]));
    } else if let Some(p) = pts.iter().find(|p| p.1 > log_c + k2 * p.0 + 1e-9 * p.1.abs().max(1.0)) {
        e.fail(Witness::new("envelope", &[("t", p.0), ("log_abs_b2", p.1)]));
    }
    e.note = "constants fitted along one trajectory".into();
    e
}
