use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stemdde::verification::{check_g, check_s, estimate_lb, ConditionReport, LbFunctional};
use stemdde::{Equilibrium, Error, Exec, InnerSolver, Model, Status};

use crate::config::RunConfig;
use crate::Common;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    CheckFailed = 1,
    Config = 2,
    Domain = 3,
    NormBlowup = 4,
    InnerFailure = 5,
    /// Incompatible initial data or step-size underflow.
    Rejected = 6,
}

impl From<Status> for Exit {
    fn from(s: Status) -> Self {
        match s {
            Status::ReachedT => Exit::Ok,
            Status::DomainExit => Exit::Domain,
            Status::NormBlowup => Exit::NormBlowup,
            Status::InnerFailure => Exit::InnerFailure,
        }
    }
}

struct Failure(Exit, String);

fn config_err(msg: impl Into<String>) -> Failure {
    Failure(Exit::Config, msg.into())
}

fn model_err(e: Error) -> Failure {
    let code = match e {
        Error::Incompatible { .. } | Error::StepUnderflow { .. } | Error::CompatibilityFailed { .. } => Exit::Rejected,
        Error::Domain { .. } => Exit::Domain,
        Error::InvalidOption(_) | Error::InvalidParams(_) | Error::InvalidFamily { .. } | Error::InvalidSegment(_) => {
            Exit::Config
        }
        _ => Exit::InnerFailure,
    };
    let mut msg = e.to_string();
    if matches!(e, Error::Incompatible { .. }) {
        msg.push_str(" (use --auto-compat or integrator.auto_compat = true)");
    }
    Failure(code, msg)
}

struct Run {
    cfg: RunConfig,
    base_dir: PathBuf,
    out_dir: PathBuf,
}

impl Run {
    fn load(c: &Common) -> Result<Self, Failure> {
        let cfg = RunConfig::load(&c.config).map_err(config_err)?;
        let base_dir = c.config.parent().map(Path::to_path_buf).unwrap_or_default();
        let out_dir = c.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
        Ok(Self { cfg, base_dir, out_dir })
    }

    fn model(&self) -> Result<Model, Failure> {
        let rates = self.cfg.rate_set().map_err(config_err)?;
        Model::new(rates)
            .with_inner_steps(self.cfg.integrator.inner_steps)
            .map_err(model_err)
    }

    fn seed(&self, c: &Common) -> Result<u64, Failure> {
        c.seed
            .or(self.cfg.seed)
            .ok_or_else(|| config_err("sampled checks need a seed: set `seed` in the config or pass --seed"))
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.out_dir).map_err(|e| config_err(format!("{}: {e}", self.out_dir.display())))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn write_report(&self, stem: &str, report: &ConditionReport) -> Result<(), Failure> {
        self.write(&format!("{stem}.json"), &report.to_json())?;
        self.write(&format!("{stem}.txt"), &report.to_text())?;
        Ok(())
    }
}

fn finish(result: Result<Exit, Failure>) -> Exit {
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

pub fn simulate(c: &Common) -> Exit {
    finish(run_simulate(c))
}

fn run_simulate(c: &Common) -> Result<Exit, Failure> {
    let run = Run::load(c)?;
    let model = run.model()?;
    let raw = run
        .cfg
        .initial
        .build(model.horizon(), &run.base_dir)
        .map_err(config_err)?;
    let phi = if c.auto_compat || run.cfg.integrator.auto_compat {
        model.make_compatible(&raw).map_err(model_err)?
    } else {
        raw
    };
    let (traj, term) = model
        .integrate(&phi, run.cfg.integrator.t_end, &run.cfg.integrator.options())
        .map_err(model_err)?;
    let path = run.write(&run.cfg.output.trajectory, &traj.to_csv(&term))?;
    println!(
        "status={} t_stop={} steps={} csv={}",
        term.status,
        term.t_stop,
        traj.records.len(),
        path.display()
    );
    if term.status != Status::ReachedT {
        eprintln!("stopped: {}", term.witness);
    }
    Ok(term.status.into())
}

pub fn check(c: &Common) -> Exit {
    finish(run_check(c, false))
}

pub fn derivcheck(c: &Common) -> Exit {
    finish(run_check(c, true))
}

fn run_check(c: &Common, derivatives_only: bool) -> Result<Exit, Failure> {
    let run = Run::load(c)?;
    let seed = run.seed(c)?;
    let model = run.model()?;
    let rates = &model.rates;
    let inner = InnerSolver::new(run.cfg.integrator.inner_steps).map_err(model_err)?;
    let chk = &run.cfg.check;
    let mut report = ConditionReport::default();
    if !derivatives_only {
        report.push(check_g(rates, (chk.y_box[0], chk.y_box[1]), chk.grid));
        for which in [LbFunctional::Tau, LbFunctional::Growth] {
            report.push(estimate_lb(which, rates, &inner, &chk.lb_options(seed), Exec::Parallel));
        }
    }
    report.push(check_s(rates, &inner, &chk.s_options(seed), Exec::Parallel));

    let stem = if derivatives_only {
        format!("{}-derivcheck", run.cfg.output.report)
    } else {
        run.cfg.output.report.clone()
    };
    run.write_report(&stem, &report)?;
    print!("{}", report.to_text());
    if report.passed() {
        Ok(Exit::Ok)
    } else {
        Ok(Exit::CheckFailed)
    }
}

#[derive(Serialize)]
struct EquilibriaFile<'a> {
    schema: &'static str,
    equilibria: &'a [Equilibrium],
}

pub fn equilibria(c: &Common) -> Exit {
    finish(run_equilibria(c))
}

fn run_equilibria(c: &Common) -> Result<Exit, Failure> {
    let run = Run::load(c)?;
    let model = run.model()?;
    let search = run.cfg.equilibria;
    let found = model.find_equilibria((search.v_range[0], search.v_range[1]), search.seeds);
    let mut table = format!("{:>22} {:>22} {:>11} {:>12}\n", "w_bar", "v_bar", "kind", "residual");
    for e in &found {
        let kind = serde_json::to_value(e.kind)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let _ = writeln!(
            table,
            "{:>22.15e} {:>22.15e} {:>11} {:>12.3e}",
            e.w_bar, e.v_bar, kind, e.residual
        );
    }
    let file = EquilibriaFile {
        schema: "equilibria/1",
        equilibria: &found,
    };
    let json = serde_json::to_string_pretty(&file).expect("equilibria serialize");
    run.write(&run.cfg.output.equilibria, &json)?;
    print!("{table}");
    Ok(Exit::Ok)
}
