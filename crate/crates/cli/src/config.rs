//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stemdde::verification::{LbOptions, SCheckOptions, SegmentSampler};
use stemdde::{HistorySegment, IntegrateOptions, PlanarRate, RateParams, RateSet, ScalarRate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for every sampled check; `--seed` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub params: RateParams,
    pub rates: Rates,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub check: Check,
    #[serde(default)]
    pub equilibria: EquilibriumSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rates {
    pub g: PlanarRate,
    pub d: PlanarRate,
    pub beta: ScalarRate,
    pub q: ScalarRate,
}

/// `offset + amp sin(freq t + phase) + exp_amp exp(exp_rate t)` on `[-h, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Waveform {
    pub offset: f64,
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
    pub exp_amp: f64,
    pub exp_rate: f64,
}

impl Default for Waveform {
    fn default() -> Self {
        Self {
            offset: 0.0,
            amp: 0.0,
            freq: 1.0,
            phase: 0.0,
            exp_amp: 0.0,
            exp_rate: 0.0,
        }
    }
}

impl Waveform {
    pub fn value(&self, t: f64) -> f64 {
        self.offset + self.amp * (self.freq * t + self.phase).sin() + self.exp_amp * (self.exp_rate * t).exp()
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.amp * self.freq * (self.freq * t + self.phase).cos()
            + self.exp_amp * self.exp_rate * (self.exp_rate * t).exp()
    }
}

fn default_knots() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Initial {
    Constant {
        w: f64,
        v: f64,
    },
    Function {
        w: Waveform,
        v: Waveform,
        #[serde(default = "default_knots")]
        knots: usize,
    },
    /// Segment CSV as written by `HistorySegment::to_csv`; relative paths
    /// are resolved against the config file's directory.
    File {
        path: PathBuf,
    },
}

impl Default for Initial {
    fn default() -> Self {
        Initial::Constant { w: 0.0, v: 0.0 }
    }
}

impl Initial {
    pub fn build(&self, h: f64, base_dir: &Path) -> Result<HistorySegment, String> {
        match self {
            Initial::Constant { w, v } => HistorySegment::constant(&[*w, *v], h).map_err(|e| e.to_string()),
            Initial::Function { w, v, knots } => HistorySegment::from_function(
                |t| vec![w.value(t), v.value(t)],
                |t| vec![w.deriv(t), v.deriv(t)],
                2,
                h,
                *knots,
            )
            .map_err(|e| e.to_string()),
            Initial::File { path } => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| format!("{}: {e}", full.display()))?;
                let seg = HistorySegment::from_csv(&text).map_err(|e| format!("{}: {e}", full.display()))?;
                if seg.dim() != 2 {
                    return Err(format!("{}: initial history needs two components", full.display()));
                }
                if (seg.h() - h).abs() > 1e-9 * h {
                    return Err(format!(
                        "{}: history window {} does not match b/K = {h}",
                        full.display(),
                        seg.h()
                    ));
                }
                Ok(seg)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Integrator {
    pub dt: f64,
    /// Inner RK4 steps per history window.
    pub inner_steps: usize,
    pub pc_tol: f64,
    pub max_corrections: usize,
    pub max_halvings: usize,
    pub norm_cap: f64,
    pub domain_margin: f64,
    pub x_tol: f64,
    /// Final time.
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Run the compatibility correction on the initial history.
    pub auto_compat: bool,
}

impl Default for Integrator {
    fn default() -> Self {
        let o = IntegrateOptions::default();
        Self {
            dt: o.dt,
            inner_steps: stemdde::maturation::DEFAULT_INNER_STEPS,
            pc_tol: o.pc_tol,
            max_corrections: o.max_corrections,
            max_halvings: o.max_halvings,
            norm_cap: o.norm_cap,
            domain_margin: o.domain_margin,
            x_tol: o.x_tol,
            t_end: 10.0,
            auto_compat: false,
        }
    }
}

impl Integrator {
    pub fn options(&self) -> IntegrateOptions {
        IntegrateOptions {
            dt: self.dt,
            pc_tol: self.pc_tol,
            max_corrections: self.max_corrections,
            max_halvings: self.max_halvings,
            norm_cap: self.norm_cap,
            domain_margin: self.domain_margin,
            x_tol: self.x_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    pub trajectory: String,
    /// Stem of the report files; `.json` and `.txt` are appended.
    pub report: String,
    pub equilibria: String,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            trajectory: "trajectory.csv".into(),
            report: "report".into(),
            equilibria: "equilibria.json".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Check {
    /// Regulation interval on which the bounds on `g` are checked.
    pub y_box: [f64; 2],
    pub grid: usize,
    pub lb_pairs: usize,
    pub lb_stability: f64,
    pub s_probes: usize,
    pub s_rel_tol: f64,
    pub sampler: SegmentSampler,
}

impl Default for Check {
    fn default() -> Self {
        let lb = LbOptions::default();
        let s = SCheckOptions::default();
        Self {
            y_box: [-0.5, 2.5],
            grid: 200,
            lb_pairs: lb.n,
            lb_stability: lb.stability,
            s_probes: s.n_probes,
            s_rel_tol: s.rel_tol,
            sampler: SegmentSampler::default(),
        }
    }
}

impl Check {
    pub fn lb_options(&self, seed: u64) -> LbOptions {
        LbOptions {
            n: self.lb_pairs,
            seed,
            stability: self.lb_stability,
            sampler: self.sampler,
        }
    }

    pub fn s_options(&self, seed: u64) -> SCheckOptions {
        SCheckOptions {
            n_probes: self.s_probes,
            seed,
            rel_tol: self.s_rel_tol,
            sampler: self.sampler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibriumSearch {
    pub v_range: [f64; 2],
    pub seeds: usize,
}

impl Default for EquilibriumSearch {
    fn default() -> Self {
        Self {
            v_range: [0.0, 10.0],
            seeds: 200,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn rate_set(&self) -> Result<RateSet, String> {
        RateSet::new(
            self.params,
            self.rates.g.clone(),
            self.rates.d.clone(),
            self.rates.beta.clone(),
            self.rates.q.clone(),
        )
        .map_err(|e| e.to_string())
    }

    fn validate(&self) -> Result<(), String> {
        self.rate_set()?;
        self.integrator.options().validate().map_err(|e| e.to_string())?;
        if self.integrator.inner_steps < 2 {
            return Err("integrator.inner_steps must be at least 2".into());
        }
        if !(self.integrator.t_end > 0.0) {
            return Err("integrator.T must be positive".into());
        }
        self.check.sampler.validate()?;
        let [lo, hi] = self.check.y_box;
        if !(lo < hi) || lo <= self.params.r_minus {
            return Err(format!(
                "check.y_box [{lo}, {hi}] must be an interval inside (R_minus, inf)"
            ));
        }
        if self.check.grid < 10 {
            return Err("check.grid must be at least 10".into());
        }
        let [vlo, vhi] = self.equilibria.v_range;
        if !(vlo < vhi) || vlo <= self.params.r_minus {
            return Err(format!(
                "equilibria.v_range [{vlo}, {vhi}] must be an interval inside (R_minus, inf)"
            ));
        }
        if let Initial::Function { knots, .. } = self.initial {
            if knots < 1 {
                return Err("initial.knots must be positive".into());
            }
        }
        Ok(())
    }
}
