//! Oracle checks runnable from the command line.

use gibc::forward::{forward_map, solve_impedance, solve_transmission, ForwardModel, PhysicalParams, ReceptorField, SensorGeometry};
use gibc::frechet::dlambda_forward;
use gibc::geometry::{curvature_frechet, FourierCurve};
use gibc::layerpot::ORDER16;
use gibc::special::hankel1;
use gibc_oracle::{hankel_h, ImpedanceCircle, TransmissionCircle};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.limit
    }
}

fn angle(d: [f64; 2]) -> f64 {
    d[1].atan2(d[0])
}

fn max_rel(field: &ReceptorField, exact: impl Fn(usize, usize) -> C) -> f64 {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for i in 0..field.n_d {
        for j in 0..field.n_r {
            if let Some(v) = field.get(i, j) {
                let e = exact(i, j);
                num = num.max((v - e).norm());
                den = den.max(e.norm());
            }
        }
    }
    num / den
}

fn hankel_check() -> f64 {
    let mut worst = 0.0f64;
    for x in [0.3, 1.0, 2.5, 7.0, 16.0, 30.0] {
        let h = hankel_h(1, x);
        for (order, want) in h.iter().enumerate() {
            let got = hankel1(order as u32, C::new(x, 0.0)).unwrap_or(C::new(f64::NAN, 0.0));
            worst = worst.max((got - want).norm() / want.norm());
        }
    }
    worst
}

fn quadrature_check() -> f64 {
    // int_0^{2 pi} log(4 sin^2(s/2)) cos(8 s) ds = -pi/4
    let f = |s: f64| (4.0 * (s / 2.0).sin().powi(2)).ln() * (8.0 * s).cos();
    (ORDER16.integrate_log_singular(f, 256) + PI / 4.0).abs()
}

fn impedance_check() -> f64 {
    let circle = FourierCurve::circle(1.0, [0.0, 0.0]);
    let sensors = SensorGeometry::uniform(16, 10.0);
    let lambda = C::new(1.0, 0.5);
    let Ok(sol) = solve_impedance(&circle, 300, &vec![lambda; 300], 5.0, &sensors) else {
        return f64::INFINITY;
    };
    let oracle = ImpedanceCircle { radius: 1.0, k: 5.0, lambda };
    max_rel(&sol.field, |i, j| oracle.scattered(angle(sensors.directions[i]), sensors.receptors[j]))
}

fn transmission_check() -> f64 {
    let circle = FourierCurve::circle(1.0, [0.0, 0.0]);
    let sensors = SensorGeometry::uniform(16, 10.0);
    let phys = PhysicalParams::reference(2.0, 3f64.sqrt() * 2.0);
    let Ok(sol) = solve_transmission(&circle, 300, &phys, &sensors) else {
        return f64::INFINITY;
    };
    let oracle = TransmissionCircle { radius: 1.0, k1: phys.k1().0, k2: phys.k2(), alpha: phys.alpha() };
    max_rel(&sol.field, |i, j| oracle.scattered(angle(sensors.directions[i]), sensors.receptors[j]))
}

fn neumann_check() -> f64 {
    let circle = FourierCurve::circle(1.2, [0.1, -0.2]);
    let sensors = SensorGeometry::uniform(10, 10.0);
    let phys = PhysicalParams::reference(3.0, 0.0);
    let zero = ForwardModel::Impedance { params: gibc::models::ImpedanceParams::Constant { c: C::default() } };
    match (
        forward_map(&ForwardModel::Neumann, &circle, 200, &phys, &sensors),
        forward_map(&zero, &circle, 200, &phys, &sensors),
    ) {
        (Ok(a), Ok(b)) => a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max),
        _ => f64::INFINITY,
    }
}

fn frechet_check() -> f64 {
    let circle = FourierCurve::circle(1.0, [0.0, 0.0]);
    let sensors = SensorGeometry::uniform(8, 10.0);
    let n = 200;
    let lam = C::new(0.8, -0.3);
    let g: Vec<C> = (0..n).map(|i| C::new((2.0 * PI * i as f64 / n as f64).cos(), 0.2)).collect();
    let solve = |eps: f64| {
        let l: Vec<C> = g.iter().map(|gi| lam + gi * eps).collect();
        solve_impedance(&circle, n, &l, 3.0, &sensors).map(|s| s.field.active())
    };
    let (Ok(base), Ok(p), Ok(m)) = (solve_impedance(&circle, n, &vec![lam; n], 3.0, &sensors), solve(1e-4), solve(-1e-4)) else {
        return f64::INFINITY;
    };
    let Ok(d) = dlambda_forward(&base, &g) else {
        return f64::INFINITY;
    };
    let fd: Vec<C> = p.iter().zip(&m).map(|(a, b)| (a - b) / 2e-4).collect();
    let num = d.iter().zip(&fd).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    num / fd.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn curvature_check() -> f64 {
    let r = 1.7;
    let circle = FourierCurve::circle(r, [0.0, 0.0]);
    let h = vec![0.3; 64];
    match curvature_frechet(&circle, &h) {
        Ok(d) => d.iter().map(|v| (v + 0.3 / (r * r)).abs()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

pub fn run() -> Vec<Check> {
    vec![
        Check { name: "hankel vs series oracle", value: hankel_check(), limit: 1e-12 },
        Check { name: "log-singular quadrature", value: quadrature_check(), limit: 1e-12 },
        Check { name: "impedance vs separation of variables", value: impedance_check(), limit: 1e-7 },
        Check { name: "transmission vs separation of variables", value: transmission_check(), limit: 1e-6 },
        Check { name: "sound-hard equals zero impedance", value: neumann_check(), limit: 1e-14 },
        Check { name: "impedance derivative vs finite differences", value: frechet_check(), limit: 1e-6 },
        Check { name: "circle curvature derivative", value: curvature_check(), limit: 1e-12 },
    ]
}
