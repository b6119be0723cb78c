//! Separation-of-variables reference solutions for plane-wave scattering by a
//! circle of radius `R` centred at the origin.
//!
//! The Bessel functions here are evaluated independently of the main crate:
//! `J_n` by Miller's backward recurrence normalised with the generating
//! function identity `e^{-iz} = J_0 + 2 sum (-i)^n J_n`, and `Y_0`, `Y_1`
//! (real argument only) by Neumann series in the `J_n`, followed by forward
//! recurrence.

use num_complex::Complex64 as C;
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const I: C = C::new(0.0, 1.0);

/// `J_0(z), ..., J_nmax(z)` for `Im z >= 0`.
pub fn bessel_j(nmax: usize, z: C) -> Vec<C> {
    let start = nmax + z.norm().ceil() as usize + 60;
    let mut out = vec![C::default(); start + 2];
    out[start] = C::new(1e-100, 0.0);
    for n in (1..=start).rev() {
        out[n - 1] = out[n] * (2.0 * n as f64) / z - out[n + 1];
        if out[n - 1].norm() > 1e100 {
            for v in out[n - 1..].iter_mut() {
                *v *= 1e-100;
            }
        }
    }
    // e^{-iz} = J_0 + 2 sum_{n>=1} (-i)^n J_n
    let mut norm = out[0];
    let mut phase = C::new(1.0, 0.0);
    for v in out.iter().take(start + 1).skip(1) {
        phase *= -I;
        norm += *v * phase * 2.0;
    }
    // divide by |norm| first: |norm|^2 may overflow
    let mag = norm.norm();
    let scale = (-I * z).exp() * (norm.conj() / mag) / mag;
    out.truncate(nmax + 1);
    out.iter().map(|v| v * scale).collect()
}

/// `Y_0(x), ..., Y_nmax(x)` for real `x > 0`.
pub fn bessel_y(nmax: usize, x: f64) -> Vec<f64> {
    let jn: Vec<f64> = bessel_j(2 * nmax + x.ceil() as usize + 80, C::new(x, 0.0))
        .iter()
        .map(|v| v.re)
        .collect();
    let lg = (x / 2.0).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < jn.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * jn[2 * k] / k as f64;
        s1 += sign * (jn[2 * k - 1] - jn[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = 2.0 / PI * lg * jn[0] - 4.0 / PI * s0;
    let y1 = -2.0 / (PI * x) * jn[0] + 2.0 / PI * lg * jn[1] + 2.0 / PI * s1;
    let mut y = vec![y0, y1];
    for n in 1..nmax {
        let next = 2.0 * n as f64 / x * y[n] - y[n - 1];
        y.push(next);
    }
    y.truncate(nmax + 1);
    y
}

/// Hankel functions `H_n^(1)(x)` for real `x > 0`.
pub fn hankel_h(nmax: usize, x: f64) -> Vec<C> {
    let j = bessel_j(nmax, C::new(x, 0.0));
    let y = bessel_y(nmax, x);
    j.iter().zip(&y).map(|(a, b)| C::new(a.re, *b)).collect()
}

/// Derivatives from `f_n' = f_{n-1} - n f_n / z` (with `f_0' = -f_1`).
fn derivs(f: &[C], z: C) -> Vec<C> {
    (0..f.len() - 1)
        .map(|n| if n == 0 { -f[1] } else { f[n - 1] - f[n] * (n as f64) / z })
        .collect()
}

/// Mode count used for a circle of radius `r` at wavenumber `k`.
fn mode_count(k: C, r: f64) -> usize {
    (k.norm() * r).ceil() as usize + 40
}

/// Sum `c_0 H_0 + 2 sum_{n>=1} i^n c_n H_n(k r) cos(n phi)`.
fn sum_modes(coef: &[C], k: f64, r: f64, phi: f64) -> C {
    let h = hankel_h(coef.len(), k * r);
    let mut total = coef[0] * h[0];
    let mut ipow = C::new(1.0, 0.0);
    for n in 1..coef.len() {
        ipow *= I;
        total += ipow * coef[n] * h[n] * (2.0 * (n as f64 * phi).cos());
    }
    total
}

/// Scattered field at `target` for the impedance condition
/// `du/dn + i k lambda u = 0` on the circle, incidence direction angle `theta_d`.
/// `lambda = 0` is the sound-hard case.
pub struct ImpedanceCircle {
    pub radius: f64,
    pub k: f64,
    pub lambda: C,
}

impl ImpedanceCircle {
    pub fn coefficients(&self) -> Vec<C> {
        let n = mode_count(C::new(self.k, 0.0), self.radius);
        let x = self.k * self.radius;
        let j = bessel_j(n + 1, C::new(x, 0.0));
        let h = hankel_h(n + 1, x);
        let jp = derivs(&j, C::new(x, 0.0));
        let hp = derivs(&h, C::new(x, 0.0));
        let ik_lam = I * self.k * self.lambda;
        (0..n)
            .map(|m| -(jp[m] * self.k + ik_lam * j[m]) / (hp[m] * self.k + ik_lam * h[m]))
            .collect()
    }

    pub fn scattered(&self, theta_d: f64, target: [f64; 2]) -> C {
        let r = target[0].hypot(target[1]);
        let phi = target[1].atan2(target[0]) - theta_d;
        sum_modes(&self.coefficients(), self.k, r, phi)
    }
}

/// Transmission problem: interior wavenumber `k1` (complex), exterior `k2`,
/// and the flux condition `alpha du1/dn = du2/dn`.
pub struct TransmissionCircle {
    pub radius: f64,
    pub k1: C,
    pub k2: f64,
    pub alpha: C,
}

impl TransmissionCircle {
    /// Exterior scattered and interior total-field mode coefficients.
    pub fn coefficients(&self) -> (Vec<C>, Vec<C>) {
        let n = mode_count(self.k1, self.radius).max(mode_count(C::new(self.k2, 0.0), self.radius));
        let x2 = self.k2 * self.radius;
        let z1 = self.k1 * self.radius;
        let j2 = bessel_j(n + 1, C::new(x2, 0.0));
        let h2 = hankel_h(n + 1, x2);
        let j1 = bessel_j(n + 1, z1);
        let (j2p, h2p, j1p) = (derivs(&j2, C::new(x2, 0.0)), derivs(&h2, C::new(x2, 0.0)), derivs(&j1, z1));
        let mut a = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for m in 0..n {
            let ratio = j1p[m] / j1[m] * self.alpha * self.k1;
            let am = (ratio * j2[m] - j2p[m] * self.k2) / (h2p[m] * self.k2 - ratio * h2[m]);
            a.push(am);
            c.push((j2[m] + am * h2[m]) / j1[m]);
        }
        (a, c)
    }

    pub fn scattered(&self, theta_d: f64, target: [f64; 2]) -> C {
        let r = target[0].hypot(target[1]);
        let phi = target[1].atan2(target[0]) - theta_d;
        sum_modes(&self.coefficients().0, self.k2, r, phi)
    }

    /// Total field inside the circle.
    pub fn interior(&self, theta_d: f64, target: [f64; 2]) -> C {
        let r = target[0].hypot(target[1]);
        let phi = target[1].atan2(target[0]) - theta_d;
        let (_, c) = self.coefficients();
        let j = bessel_j(c.len(), self.k1 * r);
        let mut total = c[0] * j[0];
        let mut ipow = C::new(1.0, 0.0);
        for n in 1..c.len() {
            ipow *= I;
            total += ipow * c[n] * j[n] * (2.0 * (n as f64 * phi).cos());
        }
        total
    }
}

/// Eigenvalue of the single-layer operator on the circle for mode `n`:
/// `(i pi R / 2) J_n(kR) H_n(kR)` (real `k`).
pub fn single_layer_eigenvalue(n: usize, k: f64, radius: f64) -> C {
    let x = k * radius;
    let j = bessel_j(n, C::new(x, 0.0));
    let h = hankel_h(n, x);
    I * (PI * radius / 2.0) * j[n] * h[n]
}
