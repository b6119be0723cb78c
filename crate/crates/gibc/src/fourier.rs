//! FFT helpers for periodic samples on equispaced grids.

use num_complex::Complex64 as C;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized forward transform `X_m = sum_j x_j e^{-2 pi i j m / n}`.
pub fn forward(buf: &mut [C]) {
    plan(buf.len(), false).process(buf);
}

/// In-place unnormalized inverse transform `x_j = sum_m X_m e^{2 pi i j m / n}`.
pub fn inverse(buf: &mut [C]) {
    plan(buf.len(), true).process(buf);
}

/// Signed frequency of FFT bin `m` for length `n`.
#[inline]
pub fn freq(m: usize, n: usize) -> i64 {
    if 2 * m < n {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// `order`-th derivative of periodic complex samples with period `period`.
/// The Nyquist bin of an even grid is dropped.
pub fn derivative_c(samples: &[C], period: f64, order: u32) -> Vec<C> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    forward(&mut buf);
    let w = 2.0 * std::f64::consts::PI / period;
    for (m, v) in buf.iter_mut().enumerate() {
        if 2 * m == n {
            *v = C::default();
            continue;
        }
        let f = C::new(0.0, freq(m, n) as f64 * w).powu(order);
        *v *= f / n as f64;
    }
    inverse(&mut buf);
    buf
}

/// `order`-th derivative of periodic real samples.
pub fn derivative(samples: &[f64], period: f64, order: u32) -> Vec<f64> {
    let c: Vec<C> = samples.iter().map(|&v| C::new(v, 0.0)).collect();
    derivative_c(&c, period, order).iter().map(|v| v.re).collect()
}

/// Real Fourier coefficients `(a_0, a_m, b_m)` of real samples with
/// `f = a_0 + sum_{m>=1} a_m cos(m t) + b_m sin(m t)`, up to `max_mode`.
pub fn real_coefficients(samples: &[f64], max_mode: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let n = samples.len();
    let mut buf: Vec<C> = samples.iter().map(|&v| C::new(v, 0.0)).collect();
    forward(&mut buf);
    let a0 = buf[0].re / n as f64;
    let top = max_mode.min((n - 1) / 2);
    let mut a = vec![0.0; max_mode];
    let mut b = vec![0.0; max_mode];
    for m in 1..=top {
        a[m - 1] = 2.0 * buf[m].re / n as f64;
        b[m - 1] = -2.0 * buf[m].im / n as f64;
    }
    (a0, a, b)
}

/// Trigonometric interpolation weight for an equispaced grid of `n` points:
/// the value at offset `phi` of the interpolant of the unit vector at 0.
pub fn interp_weight(phi: f64, n: usize) -> f64 {
    let half = 0.5 * phi;
    let s = half.sin();
    if s.abs() < 1e-14 {
        // phi is a multiple of 2 pi
        return 1.0;
    }
    let nf = n as f64;
    if n % 2 == 0 {
        (nf * half).sin() * half.cos() / (nf * s)
    } else {
        (nf * half).sin() / (nf * s)
    }
}
