mod common;

use common::*;
use stemdde::semiflow::EquilibriumKind;
use stemdde::verification::{check_b, Verdict, DEFAULT_K2_CAP};
use stemdde::{Exec, HistorySegment, IntegrateOptions, Model, RateSet, ScalarRate, Status};

fn reduction_with(beta: ScalarRate, q: ScalarRate) -> Model {
    let base = reduction_rates();
    Model::new(RateSet::new(base.params, base.g, base.d, beta, q).unwrap())
}

fn compatible_constant(model: &Model, w: f64, v: f64) -> HistorySegment {
    model
        .make_compatible(&HistorySegment::constant(&[w, v], model.horizon()).unwrap())
        .unwrap()
}

#[test]
fn fixed_delay_reduction_matches_oracle() {
    let model = reduction_model();
    let hist = SmoothHistory::new(&model.rates, 0.5, 0.4, 0.05);
    let t_end = 10.0 * tau_bar();
    let oracle = FixedDelayOracle::run(&model.rates, &hist, 1280, t_end);
    let phi = hist.segment(&model.rates, 768);
    let opts = IntegrateOptions {
        dt: 1.0 / 16.0,
        ..Default::default()
    };
    let (traj, term) = model.integrate(&phi, t_end, &opts).unwrap();
    assert_eq!(term.status, Status::ReachedT);
    let err = traj
        .records
        .iter()
        .map(|r| {
            let o = oracle.interp(r.t);
            (r.w - o[0]).abs().max((r.v - o[1]).abs())
        })
        .fold(0.0f64, f64::max);
    assert!(err <= 1e-7, "sup error {err:e}");
}

#[test]
fn demo_run_stays_on_manifold() {
    let model = Model::new(RateSet::demo());
    let phi = compatible_constant(&model, 0.5, 0.4);
    let (traj, term) = model.integrate(&phi, 30.0, &IntegrateOptions::default()).unwrap();
    assert_eq!(term.status, Status::ReachedT);
    assert_eq!(term.t_stop, 30.0);
    let worst = traj.records.iter().map(|r| r.residual).fold(0.0f64, f64::max);
    assert!(worst <= 10.0 * traj.initial_residual + 1e-8, "{worst:e}");
    assert!(traj.records.windows(2).all(|p| p[0].t < p[1].t));
}

#[test]
fn voc_residual_vanishes_for_pure_exponential_w() {
    let model = reduction_with(ScalarRate::Constant { value: 1.0 }, ScalarRate::Constant { value: 0.3 });
    let phi = compatible_constant(&model, 0.2, 0.5);
    let (traj, _) = model.integrate(&phi, 8.0, &IntegrateOptions::default()).unwrap();
    let w0 = phi.value_at_knot(phi.knots().len() - 1)[0];
    for r in &traj.records {
        assert!((r.w - w0 * (0.3 * r.t).exp()).abs() <= 1e-8 * (0.3 * r.t).exp());
    }
    let times: Vec<f64> = (1..=16).map(|i| 0.5 * i as f64).collect();
    let res = model.voc_residual(&traj, &times).unwrap();
    assert!(res[0] <= 1e-8, "{res:?}");
}

#[test]
fn equilibrium_run_has_flat_diagnostics() {
    let model = Model::new(RateSet::demo());
    let eq = model
        .find_equilibria((0.0, 5.0), 50)
        .into_iter()
        .find(|e| e.kind == EquilibriumKind::Nontrivial)
        .unwrap();
    let phi = HistorySegment::constant(&[eq.w_bar, eq.v_bar], model.horizon()).unwrap();
    let (traj, term) = model.integrate(&phi, 10.0, &IntegrateOptions::default()).unwrap();
    assert_eq!(term.status, Status::ReachedT);
    let times: Vec<f64> = (1..=10).map(f64::from).collect();
    let res = model.voc_residual(&traj, &times).unwrap();
    assert!(res[0] <= 1e-9 && res[1] <= 1e-9, "{res:?}");

    let b = check_b(&traj, DEFAULT_K2_CAP);
    assert!(!b.verdict.is_fail());
    assert!(b.values["K2"].abs() <= 1e-8, "{}", b.values["K2"]);
    let k1 = model.rates.q.value(eq.v_bar).hypot(model.rates.params.mu);
    assert!((b.values["K1"] - k1).abs() <= 1e-9);
}

#[test]
fn bound_b_tracks_growth_rate_of_w() {
    for q0 in [0.3, -0.3] {
        let model = reduction_with(ScalarRate::Constant { value: 1.0 }, ScalarRate::Constant { value: q0 });
        let phi = compatible_constant(&model, 0.2, 0.5);
        let (traj, _) = model.integrate(&phi, 15.0, &IntegrateOptions::default()).unwrap();
        let b = check_b(&traj, DEFAULT_K2_CAP);
        assert_eq!(b.verdict, Verdict::Pass, "{:?}", b.witness);
        let k2 = b.values["K2"];
        assert!((k2 - q0).abs() <= 0.1 * q0.abs(), "q0 {q0}: K2 {k2}");
        assert!(q0 > 0.0 || k2 <= 0.0);
    }
}

#[test]
fn bound_b_rejects_growth_above_cap() {
    let model = reduction_with(ScalarRate::Constant { value: 1.0 }, ScalarRate::Constant { value: 0.3 });
    let phi = compatible_constant(&model, 0.2, 0.5);
    let (traj, _) = model.integrate(&phi, 10.0, &IntegrateOptions::default()).unwrap();
    let b = check_b(&traj, 0.1);
    assert!(b.verdict.is_fail());
    assert!(b.witness_for("K2-cap").is_some());
}

#[test]
fn negative_w_drives_v_out_of_domain() {
    let model = reduction_model();
    let phi = compatible_constant(&model, -2.0, 0.0);
    let (traj, term) = model.integrate(&phi, 10.0, &IntegrateOptions::default()).unwrap();
    assert_eq!(term.status, Status::DomainExit);
    assert!(term.t_stop < 10.0 && term.t_stop > 0.0);
    assert!(!term.witness.is_empty());
    assert!(traj.records.iter().all(|r| r.v > model.rates.params.r_minus));
}

#[test]
fn batch_integration_is_deterministic_across_executors() {
    let model = Model::new(RateSet::demo());
    let starts: Vec<HistorySegment> = [(0.5, 0.4), (0.1, 1.0), (1.0, 0.0)]
        .iter()
        .map(|&(w, v)| compatible_constant(&model, w, v))
        .collect();
    let opts = IntegrateOptions::default();
    let seq = model.integrate_many(&starts, 3.0, &opts, Exec::Sequential);
    let par = model.integrate_many(&starts, 3.0, &opts, Exec::Parallel);
    for (a, b) in seq.iter().zip(&par) {
        let (ta, ea) = a.as_ref().unwrap();
        let (tb, eb) = b.as_ref().unwrap();
        assert_eq!(ta.to_csv(ea), tb.to_csv(eb));
    }
}

#[test]
fn csv_export_has_header_rows_and_footer() {
    let model = Model::new(RateSet::demo());
    let phi = compatible_constant(&model, 0.5, 0.4);
    let (traj, term) = model.integrate(&phi, 1.0, &IntegrateOptions::default()).unwrap();
    let csv = traj.to_csv(&term);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,w,v,dw,dv,tau,F,c1norm");
    assert_eq!(lines.len(), traj.records.len() + 2);
    assert!(lines.last().unwrap().starts_with("# status=reached_T t_stop=1"));
    assert!(lines[1..lines.len() - 1].iter().all(|l| l.split(',').count() == 8));
}

#[test]
fn separable_rates_integrate_on_manifold() {
    let model = Model::new(mixed_rates());
    let phi = compatible_constant(&model, 0.3, 0.6);
    let (traj, term) = model.integrate(&phi, 10.0, &IntegrateOptions::default()).unwrap();
    assert_eq!(term.status, Status::ReachedT);
    assert!(traj.records.iter().all(|r| r.residual <= 1e-8));
    assert!(traj.records.iter().all(|r| r.tau >= model.rates.params.tau_lower()));
}
