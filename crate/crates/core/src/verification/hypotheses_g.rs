use super::{ReportEntry, Verdict, Witness};
use crate::rates::RateSet;

/// Checks the bounds on `g` over `[x2 - b, x2 + b] x y_box` and the
/// admissible window for `x2 - x1`.
///
/// * `G2`: `sup |d1 g| < K / b`
/// * `G3-lower`: `inf g >= eps`
/// * `G3-upper`: `sup g <= K`
/// * `window`: `0 < x2 - x1 < (b / K) eps`
///
/// Families without closed-form bounds are sampled on an `n x n` grid and
/// the verdict is at best `statistical-pass`.
pub fn check_g(rates: &RateSet, y_box: (f64, f64), n: usize) -> ReportEntry {
    let p = &rates.params;
    let mut e = ReportEntry::new("G");
    let xr = (p.x2 - p.b, p.x2 + p.b);
    let bounds = rates.g.bounds_on_box(xr, y_box, n.max(10));
    e.samples_used = bounds.samples;
    let slope_cap = p.k / p.b;

    e.value("inf_g", bounds.inf);
    e.value("sup_g", bounds.sup);
    e.value("sup_abs_d1g", bounds.sup_abs_d1);
    e.value("slope_margin", slope_cap - bounds.sup_abs_d1);
    e.value("lower_margin", bounds.inf - p.eps);
    e.value("upper_margin", p.k - bounds.sup);
    let gap = p.x2 - p.x1;
    e.value("window_margin", p.window() - gap);

    if !(bounds.sup_abs_d1 < slope_cap) {
        e.fail(Witness::new(
            "G2",
            &[
                ("x", bounds.d1_at.0),
                ("y", bounds.d1_at.1),
                ("abs_d1g", bounds.sup_abs_d1),
                ("bound", slope_cap),
            ],
        ));
    }
    if !(bounds.inf >= p.eps) {
        e.fail(Witness::new(
            "G3-lower",
            &[
                ("x", bounds.inf_at.0),
                ("y", bounds.inf_at.1),
                ("g", bounds.inf),
                ("eps", p.eps),
            ],
        ));
    }
    if !(bounds.sup <= p.k) {
        e.fail(Witness::new(
            "G3-upper",
            &[
                ("x", bounds.sup_at.0),
                ("y", bounds.sup_at.1),
                ("g", bounds.sup),
                ("K", p.k),
            ],
        ));
    }
    if !(gap > 0.0 && gap < p.window()) {
        e.fail(Witness::new("window", &[("x2_minus_x1", gap), ("bound", p.window())]));
    }
    if e.verdict == Verdict::Pass && !bounds.exact {
        e.verdict = Verdict::StatisticalPass;
        e.note = format!("g bounds sampled on a {n} x {n} grid", n = n.max(10));
    }
    if bounds.exact {
        e.note = "g bounds are analytic".into();
    }
    e
}
