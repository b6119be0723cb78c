//! Hankel functions of the first kind (orders 0 and 1) for arguments in the
//! closed upper half plane, and the 2D Helmholtz Green's kernel.
//!
//! Three regimes are used:
//! * `|z| <= 2`: ascending series for J and Y,
//! * `2 < |z| < 17`: the Hankel integral representation, discretized with the
//!   trapezoid rule on a Gaussian-weighted line integral,
//! * `|z| >= 17`: the large-argument asymptotic expansion.
//!
//! Purely imaginary arguments (used by the regularizing operator with
//! wavenumber `i|k|`) go through the same complex path.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_RADIUS: f64 = 2.0;
const ASYMPTOTIC_RADIUS: f64 = 17.0;
const TWO_OVER_PI: f64 = 2.0 / PI;
const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecialError {
    #[error("Hankel function is singular at z = 0")]
    ZeroArgument,
    #[error("argument {0} lies in the lower half plane")]
    LowerHalfPlane(C),
    #[error("only orders 0 and 1 are supported, got {0}")]
    UnsupportedOrder(u32),
    #[error("Green's kernel evaluated at coincident points")]
    CoincidentPoints,
}

/// A (possibly complex) wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveNumber(pub C);

impl WaveNumber {
    pub fn real(k: f64) -> Self {
        Self(C::new(k, 0.0))
    }

    /// Exterior wavenumber `omega / c2`.
    pub fn exterior(omega: f64, c2: f64) -> Self {
        Self::real(omega / c2)
    }

    /// Interior wavenumber `omega sqrt(1 + i delta/omega) / c1` on the principal branch.
    pub fn interior(omega: f64, delta: f64, c1: f64) -> Self {
        Self(C::new(1.0, delta / omega).sqrt() * (omega / c1))
    }

    /// The purely imaginary companion `i|k|` used by the regularized representation.
    pub fn imaginary_companion(self) -> Self {
        Self(C::new(0.0, self.0.norm()))
    }

    pub fn value(self) -> C {
        self.0
    }
}

/// `H_order^(1)(z)` for `order` in {0, 1}.
pub fn hankel1(order: u32, z: C) -> Result<C, SpecialError> {
    if order > 1 {
        return Err(SpecialError::UnsupportedOrder(order));
    }
    if z == C::new(0.0, 0.0) {
        return Err(SpecialError::ZeroArgument);
    }
    if z.im < 0.0 {
        return Err(SpecialError::LowerHalfPlane(z));
    }
    let (h0, h1) = hankel01(z);
    Ok(if order == 0 { h0 } else { h1 })
}

/// Returns `(H_0(z), H_1(z))` without argument checks.
pub fn hankel01(z: C) -> (C, C) {
    let r = z.norm();
    if r <= SERIES_RADIUS {
        let s = series(z);
        (s.h0, s.h1reg - I * (TWO_OVER_PI / z))
    } else if r < ASYMPTOTIC_RADIUS {
        hankel_integral(z)
    } else {
        (asymptotic(0.0, z), asymptotic(1.0, z))
    }
}

/// Hankel values with the small-argument poles removed:
/// `h1reg = H_1 + 2i/(pi z)` and `h2reg = H_2 + 4i/(pi z^2) + i/pi`.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedHankel {
    pub h0: C,
    pub h1reg: C,
    pub h2reg: C,
}

pub fn hankel_regularized(z: C) -> RegularizedHankel {
    if z.norm() <= SERIES_RADIUS {
        return series(z);
    }
    let (h0, h1) = hankel01(z);
    let h1reg = h1 + I * (TWO_OVER_PI / z);
    let h2reg = h1reg * (2.0 / z) - h0 + I / PI;
    RegularizedHankel { h0, h1reg, h2reg }
}

/// Ascending series for J_0, J_1, J_2 and the matching Y parts.
fn series(z: C) -> RegularizedHankel {
    let w = z * z * 0.25;
    let mw = -w;
    let log_half = (z * 0.5).ln();

    // term_n(k) = (-w)^k / (k! (k+n)!)
    let mut t0 = C::new(1.0, 0.0);
    let mut t1 = C::new(1.0, 0.0);
    let mut t2 = C::new(0.5, 0.0);
    let mut harm_k = 0.0; // H_k
    let (mut j0, mut j1, mut j2) = (C::default(), C::default(), C::default());
    let (mut y0s, mut y1s, mut y2s) = (C::default(), C::default(), C::default());
    for k in 0..60 {
        let kf = k as f64;
        let harm_k1 = harm_k + 1.0 / (kf + 1.0);
        let harm_k2 = harm_k1 + 1.0 / (kf + 2.0);
        j0 += t0;
        j1 += t1;
        j2 += t2;
        y0s += t0 * harm_k;
        y1s += t1 * (harm_k + harm_k1 - 2.0 * EULER_GAMMA);
        y2s += t2 * (harm_k + harm_k2 - 2.0 * EULER_GAMMA);
        if t0.norm() < 1e-18 * j0.norm() && k > 2 {
            break;
        }
        t0 *= mw / ((kf + 1.0) * (kf + 1.0));
        t1 *= mw / ((kf + 1.0) * (kf + 2.0));
        t2 *= mw / ((kf + 1.0) * (kf + 3.0));
        harm_k = harm_k1;
    }
    let half_z = z * 0.5;
    j1 *= half_z;
    j2 *= half_z * half_z;
    let y0 = (log_half + EULER_GAMMA) * j0 * TWO_OVER_PI - y0s * TWO_OVER_PI;
    let y1reg = log_half * j1 * TWO_OVER_PI - y1s * (z / (2.0 * PI));
    let y2reg = log_half * j2 * TWO_OVER_PI - y2s * (z * z / (4.0 * PI));
    RegularizedHankel {
        h0: j0 + I * y0,
        h1reg: j1 + I * y1reg,
        h2reg: j2 + I * y2reg,
    }
}

/// Trapezoid rule for
/// `H_0 = c0 int_0^inf 2 e^{-t^2} (1 + i t^2/(2z))^{-1/2} dt`,
/// `H_1 = c1 int_0^inf 2 t^2 e^{-t^2} (1 + i t^2/(2z))^{1/2} dt`.
fn hankel_integral(z: C) -> (C, C) {
    // Distance from the real t-axis to the branch point t = sqrt(2iz).
    let d = (I * z * 2.0).sqrt().im.abs();
    let h = (2.0 * PI * d / 40.0).min(0.5);
    let steps = (6.2 / h).ceil() as usize;
    let inv2z = I / (z * 2.0);
    let mut s0 = C::new(0.5, 0.0);
    let mut s1 = C::default();
    for j in 1..=steps {
        let t2 = (j as f64 * h).powi(2);
        let g = (-t2).exp();
        let root = (C::new(1.0, 0.0) + inv2z * t2).sqrt();
        s0 += g / root;
        s1 += root * (g * t2);
    }
    let pref = (2.0 / PI).sqrt() / z.sqrt();
    let phase = (I * z).exp();
    let h0 = pref * phase * C::from_polar(1.0, -FRAC_PI_4) * (s0 * (2.0 * h / PI.sqrt()));
    let h1 = pref * phase * C::from_polar(1.0, -3.0 * FRAC_PI_4) * (s1 * (4.0 * h / PI.sqrt()));
    (h0, h1)
}

/// Large-argument expansion `sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)} sum_k i^k a_k(nu) / z^k`.
fn asymptotic(nu: f64, z: C) -> C {
    let mu = 4.0 * nu * nu;
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= I * ((mu - odd * odd) / (8.0 * kf)) / z;
        let m = term.norm();
        if m > last {
            break;
        }
        sum += term;
        if m < 1e-17 * sum.norm() {
            break;
        }
        last = m;
    }
    let pref = (2.0 / PI).sqrt() / z.sqrt();
    pref * (I * (z - (nu * 0.5 + 0.25) * PI)).exp() * sum
}

/// Which derivative of the Green's kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Value,
    DnY,
    DnX,
    DnXDnY,
}

/// `G^k(x, y) = (i/4) H_0(k|x - y|)` or one of its normal derivatives.
pub fn greens_kernel(
    k: WaveNumber,
    x: [f64; 2],
    y: [f64; 2],
    which: KernelKind,
    n_x: [f64; 2],
    n_y: [f64; 2],
) -> Result<C, SpecialError> {
    let r = [x[0] - y[0], x[1] - y[1]];
    let rho = r[0].hypot(r[1]);
    if rho == 0.0 {
        return Err(SpecialError::CoincidentPoints);
    }
    let k = k.0;
    let z = k * rho;
    if z.im < 0.0 {
        return Err(SpecialError::LowerHalfPlane(z));
    }
    let rnx = r[0] * n_x[0] + r[1] * n_x[1];
    let rny = r[0] * n_y[0] + r[1] * n_y[1];
    let (h0, h1) = hankel01(z);
    let val = match which {
        KernelKind::Value => I * 0.25 * h0,
        KernelKind::DnY => I * k * 0.25 * h1 * (rny / rho),
        KernelKind::DnX => -I * k * 0.25 * h1 * (rnx / rho),
        KernelKind::DnXDnY => {
            let h2 = h1 * (2.0 / z) - h0;
            let a = I * k * 0.25 * h1 / rho;
            let b = -I * k * k * 0.25 * h2 / (rho * rho);
            a * (n_x[0] * n_y[0] + n_x[1] * n_y[1]) + b * rnx * rny
        }
    };
    Ok(val)
}
