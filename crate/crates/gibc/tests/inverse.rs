use gibc::forward::{forward_map, ForwardModel, PhysicalParams, ReceptorField, SensorGeometry};
use gibc::geometry::FourierCurve;
use gibc::harness::{FrequencyData, Provenance, ScatteringDataset};
use gibc::inverse::*;
use gibc::linalg::CMatrix;
use gibc::models::ImpedanceParams;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn field(values: Vec<C>) -> ReceptorField {
    let n = values.len();
    ReceptorField { n_d: 1, n_r: n, mask: vec![true; n], values }
}

#[test]
fn residual_formula() {
    let meas = field(vec![C::new(1.0, 2.0), C::new(-3.0, 0.5), C::new(0.0, 1.0)]);
    let zero = field(vec![C::default(); 3]);
    assert_eq!(relative_residual(&meas, &zero).unwrap(), 1.0);
    assert!(relative_residual(&meas, &meas).unwrap() == 0.0);

    let doubled = field(meas.values.iter().map(|v| 2.0 * v).collect());
    let num: f64 = doubled.values.iter().zip(&meas.values).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = doubled.values.iter().map(|a| a.norm_sqr()).sum();
    let r = relative_residual(&doubled, &meas).unwrap();
    assert!((r - (num / den).sqrt()).abs() < 1e-15);
    assert!((r - 0.5).abs() < 1e-15);
    assert!(matches!(relative_residual(&zero, &meas), Err(InverseError::ZeroData)));
}

#[test]
fn masked_entries_are_ignored() {
    let mut meas = field(vec![C::new(1.0, 0.0), C::new(5.0, 0.0)]);
    let mut pred = field(vec![C::new(1.0, 0.0), C::new(-7.0, 3.0)]);
    meas.mask[1] = false;
    pred.mask[1] = false;
    assert_eq!(relative_residual(&meas, &pred).unwrap(), 0.0);
}

#[test]
fn identity_jacobian_directions() {
    let j = DMatrix::<f64>::identity(4, 4);
    let r = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
    let gn = descent_direction(Direction::GaussNewton, &j, &r);
    assert!(!gn.fallback);
    assert_eq!(gn.scale, 1.0);
    for (w, v) in gn.step().iter().zip(r.iter()) {
        assert!((w + v).abs() < 1e-14);
    }
    let sd = descent_direction(Direction::SteepestDescent, &j, &r);
    assert!((sd.scale - 1.0).abs() < 1e-15);
}

#[test]
fn rank_deficient_gn_falls_back() {
    let j = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
    let r = DVector::from_vec(vec![1.0, 0.0, 1.0]);
    let d = descent_direction(Direction::GaussNewton, &j, &r);
    assert!(d.fallback);
}

#[test]
fn steepest_descent_matches_fd_gradient() {
    // F(x) = |A x - b|^2 / 2 on a small synthetic problem
    let a = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.2, 0.0, 1.0, 4.0, -2.0, 1.0]);
    let b = DVector::from_vec(vec![1.0, -1.0, 2.0, 0.3]);
    let x = DVector::from_vec(vec![0.1, -0.2, 0.4]);
    let f = |x: &DVector<f64>| 0.5 * (&a * x - &b).norm_squared();
    let r = &a * &x - &b;
    let d = descent_direction(Direction::SteepestDescent, &a, &r);
    let h = 1e-6;
    for i in 0..3 {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let g = (f(&xp) - f(&xm)) / (2.0 * h);
        assert!((d.direction[i] + g).abs() < 1e-6, "{i}: {} vs {}", d.direction[i], -g);
    }
}

#[test]
fn linear_problem_solved_in_one_gn_step() {
    let a = DMatrix::from_row_slice(5, 3, &[
        1.0, 0.0, 2.0, 0.5, -1.0, 0.0, 0.0, 3.0, 1.0, 2.0, 2.0, -1.0, 1.0, 1.0, 1.0,
    ]);
    let truth = DVector::from_vec(vec![0.3, -1.2, 2.0]);
    let meas = &a * &truth;
    let x0 = DVector::zeros(3);
    let r = &a * &x0 - &meas;
    let step = descent_direction(Direction::GaussNewton, &a, &r).step();
    let x1 = x0 + DVector::from_vec(step);
    assert!((&a * &x1 - &meas).norm() < 1e-12);
    assert!((x1 - truth).norm() < 1e-12);
}

#[test]
fn stacked_forms() {
    let m = CMatrix::from_row_slice(1, 1, &[C::new(2.0, 3.0)]);
    let real = stacked_jacobian(&gibc::frechet::JacobianBlock { matrix: m.clone(), labels: vec![], complex_params: false });
    assert_eq!(real.as_slice(), &[2.0, 3.0]);
    // (2 + 3i)(x + iy) = (2x - 3y) + i(3x + 2y)
    let cplx = stacked_jacobian(&gibc::frechet::JacobianBlock { matrix: m, labels: vec![], complex_params: true });
    assert_eq!(cplx, DMatrix::from_row_slice(2, 2, &[2.0, -3.0, 3.0, 2.0]));
}

#[test]
fn filter_conventions() {
    let w = vec![1.0, 2.0, -3.0, 4.0, 0.5];
    let out = filter_step(FilterKind::StepLength, &w, 8.0, 0.1, 3, |_| Some(()));
    assert_eq!(out.step, w);
    assert_eq!(out.n_filt, 0);

    let out = filter_step(FilterKind::StepLength, &w, 8.0, 0.1, 3, |_| None::<()>);
    assert!(out.step.iter().all(|v| *v == 0.0));
    assert_eq!(out.n_filt, 3);

    let mut calls = 0;
    let out = filter_step(FilterKind::StepLength, &w, 8.0, 0.1, 3, |_| {
        calls += 1;
        (calls == 3).then_some(())
    });
    assert_eq!(out.n_filt, 2);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((norm(&out.step) - norm(&w) / 64.0).abs() < 1e-15);

    let e1 = vec![1.0, 0.0, 0.0, 0.0, 0.0];
    for s in [1.0, 0.1, 1e-3] {
        assert_eq!(gaussian_filter(&e1, s), e1);
    }
}

proptest! {
    #[test]
    fn gaussian_filter_never_amplifies(w in prop::collection::vec(-10.0f64..10.0, 1..40usize), s in 1e-3f64..10.0) {
        let w = if w.len() % 2 == 0 { w[1..].to_vec() } else { w };
        let g = gaussian_filter(&w, s);
        for (a, b) in g.iter().zip(&w) {
            prop_assert!(a.abs() <= b.abs());
        }
    }
}

/// Projected gradient with the Cauchy step on `|x - c|^2 / 2` over `x >= 0`
/// against a brute-force grid search.
#[test]
fn projected_gradient_toy() {
    let c = [0.7, -0.4, 1.3];
    let weights = [1.0, 3.0, 0.5];
    let f = |x: &[f64]| (0..3).map(|i| 0.5 * weights[i] * (x[i] - c[i]).powi(2)).sum::<f64>();
    let jm = DMatrix::from_fn(3, 3, |i, j| if i == j { weights[i].sqrt() } else { 0.0 });
    let mut x = vec![1.0, 1.0, 1.0];
    for _ in 0..200 {
        let r = DVector::from_fn(3, |i, _| weights[i].sqrt() * (x[i] - c[i]));
        let d = descent_direction(Direction::SteepestDescent, &jm, &r);
        let step = d.step();
        let base = x.clone();
        let out = filter_step(FilterKind::StepLength, &step, 8.0, 0.1, 3, |s| {
            let trial: Vec<f64> = base.iter().zip(s).map(|(a, b)| (a + b).max(0.0)).collect();
            (f(&trial) <= f(&base)).then_some(trial)
        });
        if let Some(t) = out.accepted {
            x = t;
        }
    }
    let grid = |i: usize| {
        (0..=4000).map(|k| k as f64 * 5e-4).min_by(|a, b| (a - c[i]).abs().total_cmp(&(b - c[i]).abs())).unwrap()
    };
    for (i, xi) in x.iter().enumerate() {
        assert!((xi - grid(i)).abs() < 1e-6, "{i}: {xi} vs {}", grid(i));
    }
}

fn circle_dataset(radius: f64, lambda: C, omega: f64) -> ScatteringDataset {
    let truth = FourierCurve::circle(radius, [0.0, 0.0]);
    let phys = PhysicalParams::reference(omega, 0.0);
    let sensors = SensorGeometry::uniform(10, 10.0);
    let model = ForwardModel::Impedance { params: ImpedanceParams::Constant { c: lambda } };
    let field = forward_map(&model, &truth, 300, &phys, &sensors).unwrap();
    ScatteringDataset {
        frequencies: vec![FrequencyData { omega, sensors, field, noise_scale: 0.0, nodes: 300 }],
        provenance: Provenance {
            data_model: model,
            ppw: 20.0,
            noise_sigma: 0.0,
            seed: 0,
            physical: phys,
            truth,
            config: None,
        },
        failures: vec![],
    }
}

#[test]
fn exact_start_stops_immediately() {
    let lam = C::new(1.0, -0.5);
    let data = circle_dataset(1.0, lam, 2.0);
    let init = InversionState::new(FourierCurve::circle(1.0, [0.0, 0.0]), Some(ImpedanceParams::Constant { c: lam }));
    let out = solve_single_frequency(init, &data.frequencies[0], 1.0, &OptimizerConfig::default()).unwrap();
    assert_eq!(out.stop, Some(StopReason::Residual));
    assert!(out.log.is_empty());
    assert!(out.residual().unwrap() <= 1e-10);
}

#[test]
fn circle_radius_recovered() {
    let lam = C::new(1.0, -0.5);
    let data = circle_dataset(1.2, lam, 2.0);
    let init = InversionState::new(FourierCurve::circle(1.0, [0.0, 0.0]), Some(ImpedanceParams::Constant { c: lam }));
    let cfg = OptimizerConfig { max_iter: 8, ..Default::default() };
    let out = solve_single_frequency(init, &data.frequencies[0], 1.0, &cfg).unwrap();
    let r = &out.residuals;
    assert!(r[1] < r[0], "first step did not reduce the residual: {r:?}");
    assert!(r.windows(2).all(|w| w[1] <= w[0]), "{r:?}");
    assert!(out.log.iter().all(|l| l.simple && l.energy_ok && l.impedance_feasible));
    // alternating shape and impedance steps zigzag between the correlated
    // radius and lambda directions, so convergence is linear
    assert!(*r.last().unwrap() < 5e-4, "{r:?}");
    assert!((out.curve.length / (2.0 * std::f64::consts::PI) - 1.2).abs() < 1e-3);
}

#[test]
fn continuation_single_frequency_matches_direct_solve() {
    let lam = C::new(1.0, -0.5);
    let data = circle_dataset(1.1, lam, 1.5);
    let init = InversionState::new(FourierCurve::circle(1.0, [0.0, 0.0]), Some(ImpedanceParams::Constant { c: lam }));
    let cfg = OptimizerConfig { max_iter: 3, ..Default::default() };
    let direct = solve_single_frequency(init.clone(), &data.frequencies[0], 1.0, &cfg).unwrap();
    let traj = continuation_solve(&data, init, &cfg, |_| {}).unwrap();
    assert_eq!(traj.results.len(), 1);
    assert_eq!(traj.results[0].curve, direct.curve);
    assert_eq!(traj.results[0].residual, direct.residual().unwrap());
}

#[test]
fn unordered_frequencies_rejected() {
    let mut data = circle_dataset(1.0, C::new(1.0, 0.0), 2.0);
    let mut second = data.frequencies[0].clone();
    second.omega = 1.0;
    data.frequencies.push(second);
    let init = InversionState::new(FourierCurve::circle(1.0, [0.0, 0.0]), None);
    assert!(matches!(
        continuation_solve(&data, init, &OptimizerConfig::default(), |_| {}),
        Err(InverseError::Unordered)
    ));
}

#[test]
fn config_policies() {
    let c = OptimizerConfig::default();
    let l = 2.0 * std::f64::consts::PI;
    assert_eq!(c.n_gamma(3.0, l, 1.0), 6);
    assert_eq!(c.n_c(3.0, l, 1.0), 3);
    assert_eq!(c.m_band(3.0, l, 1.0), 6);
    assert_eq!(c.nodes(3.0, l, 1.0), 300);
    assert_eq!(c.nodes(40.0, l, 1.0), 400);
    assert_eq!((c.max_iter, c.n_filt, c.eta_filt, c.sigma_filt, c.c_h), (40, 3, 8.0, 0.1, 0.9));
}
