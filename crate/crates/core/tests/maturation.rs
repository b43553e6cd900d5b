mod common;

use common::*;
use stemdde::maturation::{dir_deriv_f, dir_deriv_tau, dir_deriv_y, solve_maturation};
use stemdde::{Error, HistorySegment, InnerSolver, PlanarRate, RateParams, RateSet, ScalarRate};

fn params() -> RateParams {
    RateParams {
        x1: 0.0,
        x2: 1.0,
        b: 1.5,
        k: 1.0,
        eps: 0.7,
        mu: 0.1,
        r_minus: -1.0,
    }
}

fn rates_with(g: PlanarRate, d: PlanarRate) -> RateSet {
    RateSet::new(
        params(),
        g,
        d,
        ScalarRate::Hill {
            amp: 1.0,
            k: 1.0,
            n: 2.0,
        },
        ScalarRate::Constant { value: 0.0 },
    )
    .unwrap()
}

fn wavy(theta: f64) -> f64 {
    0.5 + 0.3 * (2.0 * theta).sin()
}

fn wavy_segment() -> HistorySegment {
    HistorySegment::from_scalar(wavy, |t| 0.6 * (2.0 * t).cos(), 1.5, 64).unwrap()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let k = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * k);
    }
    acc * k / 3.0
}

#[test]
fn unit_speed_gives_linear_path() {
    let rates = rates_with(PlanarRate::Constant { value: 1.0 }, PlanarRate::Constant { value: 0.2 });
    let m = solve_maturation(&rates, &wavy_segment()).unwrap();
    assert!((m.tau - 1.0).abs() <= 1e-12);
    assert!((m.growth - 0.2f64.exp()).abs() <= 1e-10);
    for s in [0.0, 0.3, 0.77, 1.0, 1.4] {
        assert!((m.y(s) - (1.0 - s)).abs() <= 1e-12, "y({s}) = {}", m.y(s));
    }
    assert_eq!(m.y(0.0), 1.0);
}

#[test]
fn regulation_only_speed_matches_quadrature_oracle() {
    let gamma = ScalarRate::Sigmoid {
        base: 1.0,
        amp: -0.2,
        k: 1.0,
        n: 2.0,
    };
    let rates = rates_with(
        PlanarRate::Separable {
            x: ScalarRate::Constant { value: 1.0 },
            y: gamma.clone(),
        },
        PlanarRate::Constant { value: 0.0 },
    );
    let m = InnerSolver::default().solve_fn(&rates, wavy).unwrap();

    let integral = |t: f64| simpson(|s| gamma.value(wavy(-s)), 0.0, t, 2000);
    let (mut lo, mut hi) = (0.0, 1.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if integral(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    assert!((m.tau - oracle).abs() <= 1e-8, "tau {} oracle {oracle}", m.tau);
    assert_eq!(m.growth, 1.0);
}

#[test]
fn path_respects_bracket_monotonicity_and_threshold() {
    let rates = mixed_rates();
    let p = rates.params;
    let m = InnerSolver::default().solve_fn(&rates, wavy).unwrap();
    assert!(m.tau >= p.tau_lower() && m.tau <= p.tau_upper());
    assert!(m.threshold_residual <= 1e-12 * (p.x2 - p.x1).abs().max(1.0));
    assert!(m.growth > 0.0);
    let h = p.horizon();
    for i in 0..=400 {
        let s = h * i as f64 / 400.0;
        assert!(-m.y_deriv(s) >= p.eps * (1.0 - 1e-6));
        assert!((m.y(s) - p.x2).abs() <= p.b);
    }
    let identity = simpson(|s| rates.g.value(m.y(s), wavy(-s)), 0.0, m.tau, 4000);
    assert!((identity - (p.x2 - p.x1)).abs() <= 1e-8, "{identity}");
}

#[test]
fn delay_converges_at_fourth_order_in_inner_steps() {
    let rates = RateSet::demo();
    let reference = InnerSolver::new(4096).unwrap().solve_fn(&rates, wavy).unwrap().tau;
    let errs: Vec<f64> = [16, 32, 64, 128]
        .iter()
        .map(|&m| (InnerSolver::new(m).unwrap().solve_fn(&rates, wavy).unwrap().tau - reference).abs())
        .collect();
    let n = errs.len() as f64;
    let xs: Vec<f64> = (0..errs.len()).map(|i| (2f64).powi(i as i32).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = -xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 4.0).abs() <= 0.4, "slope {slope}, errors {errs:?}");
}

#[test]
fn trivial_derivative_cases_vanish() {
    let psi = wavy_segment();
    let chi = |t: f64| (3.0 * t).cos();

    let y_free = rates_with(
        PlanarRate::AffineInX {
            intercept: 0.8,
            slope: 0.1,
        },
        PlanarRate::Constant { value: 0.3 },
    );
    assert_eq!(dir_deriv_y(&y_free, &psi, chi, 0.6).unwrap(), 0.0);
    assert_eq!(dir_deriv_tau(&y_free, &psi, chi).unwrap(), 0.0);
    assert_eq!(dir_deriv_f(&y_free, &psi, chi).unwrap(), 0.0);

    let demo = RateSet::demo();
    assert_eq!(dir_deriv_y(&demo, &psi, |_| 0.0, 0.6).unwrap(), 0.0);
    assert_eq!(dir_deriv_tau(&demo, &psi, |_| 0.0).unwrap(), 0.0);
    assert_eq!(dir_deriv_f(&demo, &psi, |_| 0.0).unwrap(), 0.0);

    let no_net = rates_with(
        PlanarRate::HillInY {
            base: 0.875,
            amp: -0.125,
            k: 1.0,
            n: 2.0,
        },
        PlanarRate::Constant { value: 0.0 },
    );
    assert_eq!(dir_deriv_f(&no_net, &psi, chi).unwrap(), 0.0);
}

#[test]
fn companion_ode_matches_kernel_form() {
    let rates = mixed_rates();
    let chi = |t: f64| 0.4 - 0.7 * (1.7 * t).sin();
    let (m, sens) = InnerSolver::default().sensitivity_fn(&rates, wavy, chi).unwrap();

    // Dy(t) = -exp(-A(t)) int_0^t exp(A(s)) d2g(s) chi(-s) ds with A' = d1g.
    let n = 20_000;
    let t_end = 1.2;
    let k = t_end / n as f64;
    let partials = |s: f64| {
        let (_, d1, d2) = rates.g_all(m.y(s), wavy(-s)).unwrap();
        (d1, d2 * chi(-s))
    };
    let (mut a, mut acc) = (0.0, 0.0);
    let (mut d1_prev, mut src_prev) = partials(0.0);
    for i in 1..=n {
        let s = i as f64 * k;
        let (d1, src) = partials(s);
        let a_next = a + 0.5 * k * (d1_prev + d1);
        acc += 0.5 * k * (a.exp() * src_prev + a_next.exp() * src);
        a = a_next;
        d1_prev = d1;
        src_prev = src;
        if i % 4000 == 0 {
            let kernel = -(-a).exp() * acc;
            let ode = sens.dy(s);
            assert!(
                (kernel - ode).abs() <= 1e-6 * ode.abs().max(1e-3),
                "t {s}: {kernel} vs {ode}"
            );
        }
    }
}

#[test]
fn delay_derivative_is_path_derivative_over_speed() {
    let rates = mixed_rates();
    let chi = |t: f64| 1.0 + t;
    let (m, sens) = InnerSolver::default().sensitivity_fn(&rates, wavy, chi).unwrap();
    let g = rates.g(rates.params.x1, wavy(-m.tau)).unwrap();
    assert!((sens.dy_at_tau / g - sens.d_tau).abs() <= 1e-9 * sens.d_tau.abs().max(1.0));
}

#[test]
fn directional_derivatives_are_linear() {
    let rates = mixed_rates();
    let inner = InnerSolver::default();
    let c1 = |t: f64| (2.0 * t).cos();
    let c2 = |t: f64| if t < -0.7 { 0.3 } else { 0.3 - (t + 0.7) };
    let a = -1.7;
    let (_, s1) = inner.sensitivity_fn(&rates, wavy, c1).unwrap();
    let (_, s2) = inner.sensitivity_fn(&rates, wavy, c2).unwrap();
    let (_, s12) = inner.sensitivity_fn(&rates, wavy, |t| a * c1(t) + c2(t)).unwrap();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-12);
    assert!(close(s12.d_tau, a * s1.d_tau + s2.d_tau));
    assert!(close(s12.d_growth, a * s1.d_growth + s2.d_growth));
    for t in [0.2, 0.5, 1.0] {
        assert!(close(s12.dy(t), a * s1.dy(t) + s2.dy(t)));
    }
}

#[test]
fn derivatives_match_central_differences() {
    let rates = mixed_rates();
    let inner = InnerSolver::default();
    let chi = |t: f64| 0.2 + (1.3 * t).sin();
    let (_, sens) = inner.sensitivity_fn(&rates, wavy, chi).unwrap();
    let mut best = [f64::INFINITY; 3];
    for d in [1e-4, 1e-5, 1e-6] {
        let p = inner.solve_fn(&rates, |t| wavy(t) + d * chi(t)).unwrap();
        let q = inner.solve_fn(&rates, |t| wavy(t) - d * chi(t)).unwrap();
        let fd = [
            (p.tau - q.tau) / (2.0 * d),
            (p.growth - q.growth) / (2.0 * d),
            (p.y(0.5) - q.y(0.5)) / (2.0 * d),
        ];
        let an = [sens.d_tau, sens.d_growth, sens.dy(0.5)];
        for k in 0..3 {
            best[k] = best[k].min((fd[k] - an[k]).abs() / an[k].abs());
        }
    }
    assert!(best.iter().all(|&e| e <= 1e-5), "{best:?}");
}

#[test]
fn failures_are_classified() {
    let low = HistorySegment::from_scalar(|_| -2.0, |_| 0.0, 1.5, 4).unwrap();
    assert!(matches!(
        solve_maturation(&RateSet::demo(), &low),
        Err(Error::Domain { .. })
    ));

    let slow = RateSet::new_unchecked(
        params(),
        PlanarRate::Constant { value: 0.1 },
        PlanarRate::Constant { value: 0.0 },
        ScalarRate::Constant { value: 1.0 },
        ScalarRate::Constant { value: 0.0 },
    );
    assert!(matches!(
        solve_maturation(&slow, &wavy_segment()),
        Err(Error::ThresholdUnreachable { .. })
    ));

    let far = RateSet::new_unchecked(
        RateParams { x1: -1.0, ..params() },
        PlanarRate::Constant { value: 1.2 },
        PlanarRate::Constant { value: 0.0 },
        ScalarRate::Constant { value: 1.0 },
        ScalarRate::Constant { value: 0.0 },
    );
    assert!(matches!(
        solve_maturation(&far, &wavy_segment()),
        Err(Error::ModelViolation { .. })
    ));

    let planar = HistorySegment::constant(&[0.5, 0.5], 1.5).unwrap();
    assert!(matches!(
        solve_maturation(&RateSet::demo(), &planar),
        Err(Error::InvalidSegment(_))
    ));
}
