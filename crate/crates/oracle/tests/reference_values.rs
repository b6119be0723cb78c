//! Reference values below were produced with mpmath at 30 digits.
use gibc_oracle::*;
use num_complex::Complex64 as C;

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm()
}

#[test]
fn bessel_values() {
    let j = bessel_j(5, C::new(1.0, 0.0));
    assert!(close(j[0], C::new(0.7651976865579666, 0.0), 1e-14));
    assert!(close(j[5], C::new(2.497577302112344e-4, 0.0), 1e-13));
    let y = bessel_y(3, 1.0);
    assert!((y[0] - 0.08825696421567696).abs() < 1e-14);
    assert!((y[1] + 0.7812128213002887).abs() < 1e-14);
    assert!((y[3] + 5.821517605964728).abs() < 1e-12);
}

#[test]
fn complex_argument_and_large_orders() {
    let z = C::new(28.28, 16.33);
    let j = bessel_j(7, z);
    assert!(close(j[0], C::new(-749701.215588893599678571459408, -430510.025185806079223700045629), 1e-12));
    assert!(close(j[7], C::new(82321.3823234640617231968104185, 590215.305659560928431669290816), 1e-12));
    let j = bessel_j(40, C::new(100.0, 0.0));
    assert!(close(j[40], C::new(0.0727017548228110565773489667299, 0.0), 1e-12));
    let y = bessel_y(37, 100.0);
    assert!((y[0] + 0.0772443133650831522542282213672).abs() < 1e-14);
    assert!((y[1] + 0.0203723120027597933047039326664).abs() < 1e-14);
    assert!((y[37] + 0.064639297162828355308156742181).abs() < 1e-13);
    // wide dynamic range in the backward recurrence
    let y = bessel_y(45, 4.0);
    assert!((y[0] + 0.0169407393250649919036351344472).abs() < 1e-14);
    assert!((y[44] / -1.1998345146e39 - 1.0).abs() < 1e-9);
    let y = bessel_y(12, 3.3);
    assert!((y[12] / -40092.9799664105392697241092716 - 1.0).abs() < 1e-12);
}

#[test]
fn wronskian_of_series() {
    for &x in &[0.5, 3.0, 17.0, 64.0] {
        let j = bessel_j(3, C::new(x, 0.0));
        let y = bessel_y(3, x);
        let w = j[1].re * y[0] - j[0].re * y[1];
        assert!((w - 2.0 / (std::f64::consts::PI * x)).abs() < 1e-13);
    }
}
