use serde::{Deserialize, Serialize};

use super::Model;
use crate::history::HistorySegment;

/// Largest `|f(constant state)|` accepted for an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Trivial,
    Nontrivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub w_bar: f64,
    pub v_bar: f64,
    pub kind: EquilibriumKind,
    pub residual: f64,
}

impl Model {
    /// Constant solutions: the trivial one, and `(w, v)` with `q(v) = 0`,
    /// `w = mu v / (beta(v) F(v))` for each root of `q` bracketed by the
    /// `n_seeds` subintervals of `v_range`.
    pub fn find_equilibria(&self, v_range: (f64, f64), n_seeds: usize) -> Vec<Equilibrium> {
        let h = self.horizon();
        let p = &self.rates.params;
        let residual = |w: f64, v: f64| {
            HistorySegment::constant(&[w, v], h)
                .and_then(|phi| self.manifold_residual(&phi))
                .unwrap_or(f64::INFINITY)
        };
        let mut out = vec![Equilibrium {
            w_bar: 0.0,
            v_bar: 0.0,
            kind: EquilibriumKind::Trivial,
            residual: residual(0.0, 0.0),
        }];

        let (lo, hi) = (v_range.0.max(p.r_minus), v_range.1);
        if !(lo < hi) || n_seeds == 0 {
            return out;
        }
        let q = |v: f64| self.rates.q.value(v);
        let grid: Vec<f64> = (0..=n_seeds)
            .map(|i| lo + (hi - lo) * i as f64 / n_seeds as f64)
            .filter(|&v| v > p.r_minus)
            .collect();
        let mut roots: Vec<f64> = Vec::new();
        for w in grid.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let (mut qa, qb) = (q(a), q(b));
            if qa == 0.0 {
                roots.push(a);
                continue;
            }
            if qa * qb > 0.0 || qb == 0.0 {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let qm = q(m);
                if qm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (qm > 0.0) == (qa > 0.0) {
                    a = m;
                    qa = qm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        if let Some(&last) = grid.last() {
            if q(last) == 0.0 {
                roots.push(last);
            }
        }
        roots.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * a.abs().max(1.0));

        for v in roots {
            let Ok(beta) = self.rates.beta(v) else { continue };
            let Ok(phi) = HistorySegment::constant(&[0.0, v], h) else {
                continue;
            };
            let Ok(mat) = self.inner.solve(&self.rates, &phi.component(1)) else {
                continue;
            };
            let w = if beta == 0.0 {
                if p.mu * v != 0.0 {
                    continue;
                }
                0.0
            } else {
                p.mu * v / (beta * mat.growth)
            };
            if w == 0.0 && v == 0.0 {
                continue;
            }
            let r = residual(w, v);
            if r <= EQUILIBRIUM_TOL {
                out.push(Equilibrium {
                    w_bar: w,
                    v_bar: v,
                    kind: EquilibriumKind::Nontrivial,
                    residual: r,
                });
            }
        }
        out
    }
}
