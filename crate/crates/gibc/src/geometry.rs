//! Bandlimited closed curves.
//!
//! A curve is stored as the trigonometric polynomial
//! `x(s) = a1[0] + sum a1[m] cos(2 pi m s/L) + b1[m] sin(2 pi m s/L)` (same for
//! `y` with `a2`, `b2`) over the parameter period `L = length`. After an
//! arc-length refit `L` equals the curve length to within the refit tolerance.

use crate::fourier;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("{nodes} nodes cannot resolve a curve of order {order}")]
    TooFewNodes { nodes: usize, order: usize },
    #[error("degenerate parameterization: |gamma'| = {speed:e}")]
    Degenerate { speed: f64 },
    #[error("arc-length refit did not converge (max ||gamma'| - 1| = {deviation:e})")]
    RefitDiverged { deviation: f64 },
    #[error("degenerate polygon (area {0:e})")]
    DegeneratePolygon(f64),
    #[error("coefficient vectors have inconsistent lengths")]
    Malformed,
}

/// Closed curve given by real Fourier coefficients. `b1[0]` and `b2[0]` are unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCurve {
    pub length: f64,
    pub a1: Vec<f64>,
    pub b1: Vec<f64>,
    pub a2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Node values of a curve on an equispaced grid in `[0, length)`.
#[derive(Debug, Clone)]
pub struct CurveSamples {
    pub length: f64,
    pub s: Vec<f64>,
    pub pos: Vec<[f64; 2]>,
    /// First and second derivatives with respect to the parameter `s`.
    pub d1: Vec<[f64; 2]>,
    pub d2: Vec<[f64; 2]>,
    pub speed: Vec<f64>,
    pub tangent: Vec<[f64; 2]>,
    /// Outward unit normal `(y', -x')/|gamma'|` for counterclockwise curves.
    pub normal: Vec<[f64; 2]>,
    pub curvature: Vec<f64>,
    /// Trapezoid weights for `ds` along the curve.
    pub weights: Vec<f64>,
}

impl CurveSamples {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Curve on shifted grid `s_j + shift`: positions, derivative and speed.
#[derive(Debug, Clone)]
pub struct ShiftedSamples {
    pub pos: Vec<[f64; 2]>,
    pub d1: Vec<[f64; 2]>,
    pub speed: Vec<f64>,
    pub normal: Vec<[f64; 2]>,
}

impl FourierCurve {
    pub fn order(&self) -> usize {
        self.a1.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let n = self.a1.len();
        if n == 0 || self.b1.len() != n || self.a2.len() != n || self.b2.len() != n || self.length <= 0.0 {
            return Err(GeometryError::Malformed);
        }
        Ok(())
    }

    /// Circle of radius `r` centred at `center`, parameterized by arc length.
    pub fn circle(r: f64, center: [f64; 2]) -> Self {
        Self {
            length: 2.0 * PI * r,
            a1: vec![center[0], r],
            b1: vec![0.0, 0.0],
            a2: vec![center[1], 0.0],
            b2: vec![0.0, r],
        }
    }

    /// Complex coefficients `c_m` of `z = x + i y = sum_m c_m e^{i m theta}` for `m = -N..=N`,
    /// returned as a vector indexed by `m + N`.
    pub fn complex_coefficients(&self) -> Vec<C> {
        let n = self.order();
        let mut c = vec![C::default(); 2 * n + 1];
        c[n] = C::new(self.a1[0], self.a2[0]);
        for m in 1..=n {
            let cx = C::new(self.a1[m], -self.b1[m]) * 0.5;
            let cy = C::new(self.a2[m], -self.b2[m]) * 0.5;
            let cxm = cx.conj();
            let cym = cy.conj();
            c[n + m] = cx + C::i() * cy;
            c[n - m] = cxm + C::i() * cym;
        }
        c
    }

    /// Inverse of [`complex_coefficients`].
    pub fn from_complex_coefficients(c: &[C], length: f64) -> Self {
        let n = (c.len() - 1) / 2;
        let mut out = Self {
            length,
            a1: vec![0.0; n + 1],
            b1: vec![0.0; n + 1],
            a2: vec![0.0; n + 1],
            b2: vec![0.0; n + 1],
        };
        out.a1[0] = c[n].re;
        out.a2[0] = c[n].im;
        for m in 1..=n {
            let (p, q) = (c[n + m], c[n - m]);
            // cx = (p + conj(q))/2, cy = (p - conj(q))/(2i)
            let cx = (p + q.conj()) * 0.5;
            let cy = (p - q.conj()) * C::new(0.0, -0.5);
            out.a1[m] = 2.0 * cx.re;
            out.b1[m] = -2.0 * cx.im;
            out.a2[m] = 2.0 * cy.re;
            out.b2[m] = -2.0 * cy.im;
        }
        out
    }

    /// Least-squares trigonometric fit of order `order` to equispaced samples over `length`.
    pub fn fit(points: &[[f64; 2]], length: f64, order: usize) -> Self {
        let n = points.len();
        let order = order.min((n - 1) / 2);
        let mut buf: Vec<C> = points.iter().map(|p| C::new(p[0], p[1])).collect();
        fourier::forward(&mut buf);
        let mut c = vec![C::default(); 2 * order + 1];
        for m in -(order as i64)..=(order as i64) {
            let bin = m.rem_euclid(n as i64) as usize;
            c[(m + order as i64) as usize] = buf[bin] / n as f64;
        }
        Self::from_complex_coefficients(&c, length)
    }

    /// Drops trailing modes whose magnitude is below `tol` relative to the largest mode.
    pub fn trimmed(mut self, tol: f64) -> Self {
        let mag = |m: usize| self.a1[m].abs().max(self.b1[m].abs()).max(self.a2[m].abs()).max(self.b2[m].abs());
        let scale = (1..=self.order()).map(mag).fold(0.0, f64::max);
        let mut keep = self.order();
        while keep > 1 && mag(keep) <= tol * scale {
            keep -= 1;
        }
        for v in [&mut self.a1, &mut self.b1, &mut self.a2, &mut self.b2] {
            v.truncate(keep + 1);
        }
        self
    }

    /// Zero-pads or truncates to the given order.
    pub fn with_order(mut self, order: usize) -> Self {
        for v in [&mut self.a1, &mut self.b1, &mut self.a2, &mut self.b2] {
            v.resize(order + 1, 0.0);
        }
        self
    }

    /// Evaluates `d^deriv z / ds^deriv` on the grid `s_j = (j/n) L + shift`, with
    /// coefficients optionally multiplied by `factor(m)` first.
    fn grid_eval(&self, n: usize, shift: f64, deriv: u32, factor: Option<&dyn Fn(i64) -> C>) -> Vec<C> {
        let order = self.order();
        let c = self.complex_coefficients();
        let w = 2.0 * PI / self.length;
        let mut buf = vec![C::default(); n];
        for m in -(order as i64)..=(order as i64) {
            let mut v = c[(m + order as i64) as usize];
            if deriv > 0 {
                v *= C::new(0.0, m as f64 * w).powu(deriv);
            }
            if shift != 0.0 {
                v *= C::from_polar(1.0, m as f64 * w * shift);
            }
            if let Some(f) = factor {
                v *= f(m);
            }
            buf[m.rem_euclid(n as i64) as usize] += v;
        }
        fourier::inverse(&mut buf);
        buf
    }

    fn check_nodes(&self, n: usize) -> Result<(), GeometryError> {
        if n < 2 * self.order() + 1 {
            return Err(GeometryError::TooFewNodes { nodes: n, order: self.order() });
        }
        Ok(())
    }

    /// Spectral evaluation of the curve and its derivatives at `n` equispaced nodes.
    pub fn sample(&self, n: usize) -> Result<CurveSamples, GeometryError> {
        self.check_nodes(n)?;
        let z = self.grid_eval(n, 0.0, 0, None);
        let z1 = self.grid_eval(n, 0.0, 1, None);
        let z2 = self.grid_eval(n, 0.0, 2, None);
        let h = self.length / n as f64;
        let mut out = CurveSamples {
            length: self.length,
            s: (0..n).map(|j| j as f64 * h).collect(),
            pos: z.iter().map(|v| [v.re, v.im]).collect(),
            d1: z1.iter().map(|v| [v.re, v.im]).collect(),
            d2: z2.iter().map(|v| [v.re, v.im]).collect(),
            speed: Vec::with_capacity(n),
            tangent: Vec::with_capacity(n),
            normal: Vec::with_capacity(n),
            curvature: Vec::with_capacity(n),
            weights: Vec::with_capacity(n),
        };
        for j in 0..n {
            let [dx, dy] = out.d1[j];
            let [ddx, ddy] = out.d2[j];
            let sp = dx.hypot(dy);
            if sp < 1e-12 {
                return Err(GeometryError::Degenerate { speed: sp });
            }
            out.speed.push(sp);
            out.tangent.push([dx / sp, dy / sp]);
            out.normal.push([dy / sp, -dx / sp]);
            out.curvature.push((dx * ddy - ddx * dy) / sp.powi(3));
            out.weights.push(sp * h);
        }
        Ok(out)
    }

    /// Positions, first derivative, speed and unit normal on the grid shifted by `shift`.
    pub fn sample_shifted(&self, n: usize, shift: f64) -> Result<ShiftedSamples, GeometryError> {
        self.check_nodes(n)?;
        let z = self.grid_eval(n, shift, 0, None);
        let z1 = self.grid_eval(n, shift, 1, None);
        let mut out = ShiftedSamples {
            pos: z.iter().map(|v| [v.re, v.im]).collect(),
            d1: z1.iter().map(|v| [v.re, v.im]).collect(),
            speed: Vec::with_capacity(n),
            normal: Vec::with_capacity(n),
        };
        for d in &out.d1 {
            let sp = d[0].hypot(d[1]);
            if sp < 1e-12 {
                return Err(GeometryError::Degenerate { speed: sp });
            }
            out.speed.push(sp);
            out.normal.push([d[1] / sp, -d[0] / sp]);
        }
        Ok(out)
    }

    /// Chords `gamma(s_j + delta) - gamma(s_j)` computed without cancellation:
    /// `e^{im(t+d)} - e^{imt} = 2i sin(md/2) e^{im(t+d/2)}`.
    pub fn chords(&self, n: usize, delta: f64) -> Result<Vec<[f64; 2]>, GeometryError> {
        self.check_nodes(n)?;
        let w = 2.0 * PI / self.length;
        let f = move |m: i64| {
            let a = m as f64 * w * delta;
            C::new(0.0, 2.0 * (0.5 * a).sin()) * C::from_polar(1.0, 0.5 * a)
        };
        let z = self.grid_eval(n, 0.0, 0, Some(&f));
        Ok(z.iter().map(|v| [v.re, v.im]).collect())
    }

    /// Point and derivatives at a single parameter value by direct summation.
    pub fn eval(&self, s: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let w = 2.0 * PI / self.length;
        let mut p = [self.a1[0], self.a2[0]];
        let mut d1 = [0.0; 2];
        let mut d2 = [0.0; 2];
        for m in 1..=self.order() {
            let mw = m as f64 * w;
            let (sn, cs) = (mw * s).sin_cos();
            p[0] += self.a1[m] * cs + self.b1[m] * sn;
            p[1] += self.a2[m] * cs + self.b2[m] * sn;
            d1[0] += mw * (-self.a1[m] * sn + self.b1[m] * cs);
            d1[1] += mw * (-self.a2[m] * sn + self.b2[m] * cs);
            d2[0] -= mw * mw * (self.a1[m] * cs + self.b1[m] * sn);
            d2[1] -= mw * mw * (self.a2[m] * cs + self.b2[m] * sn);
        }
        (p, d1, d2)
    }

    /// A grid size comfortably resolving the curve and its curvature.
    pub fn resolving_nodes(&self) -> usize {
        (8 * self.order() + 16).max(256)
    }

    /// Curve length by the trapezoid rule on an oversampled grid.
    pub fn arc_length(&self) -> f64 {
        let s = self.sample(self.resolving_nodes()).expect("resolving grid");
        s.weights.iter().sum()
    }

    pub fn signed_area(&self) -> f64 {
        // exact for trigonometric polynomials: pi sum m (a1 b2 - a2 b1)
        (1..=self.order())
            .map(|m| PI * m as f64 * (self.a1[m] * self.b2[m] - self.a2[m] * self.b1[m]))
            .sum()
    }

    pub fn centroid(&self) -> [f64; 2] {
        [self.a1[0], self.a2[0]]
    }

    /// Same curve traversed in the opposite direction (`s -> -s`).
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.b1.iter_mut().for_each(|v| *v = -*v);
        out.b2.iter_mut().for_each(|v| *v = -*v);
        out
    }

    pub fn translated(&self, by: [f64; 2]) -> Self {
        let mut out = self.clone();
        out.a1[0] += by[0];
        out.a2[0] += by[1];
        out
    }

    /// Max over an oversampled grid of `||gamma'| - 1|`.
    pub fn arclength_deviation(&self) -> f64 {
        let s = self.sample(self.resolving_nodes()).expect("resolving grid");
        s.speed.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Signed curvature at `n` nodes.
pub fn signed_curvature(curve: &FourierCurve, n: usize) -> Result<Vec<f64>, GeometryError> {
    Ok(curve.sample(n)?.curvature)
}

/// Elastic energy `(E_total, E_band)` of the curvature's Fourier expansion
/// (modes up to `2N`, band up to `M`).
pub fn elastic_energy(curve: &FourierCurve, m: usize) -> Result<(f64, f64), GeometryError> {
    let top = 2 * curve.order();
    let n = (4 * top + 16).max(64);
    let h = signed_curvature(curve, n)?;
    let (a0, a, b) = fourier::real_coefficients(&h, top);
    let base = 0.5 * a0 * a0;
    let mut total = base;
    let mut band = base;
    for j in 0..top {
        let e = a[j] * a[j] + b[j] * b[j];
        total += e;
        if j < m {
            band += e;
        }
    }
    Ok((total, band))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub energy_ok: bool,
    pub simple: bool,
    pub e_total: f64,
    pub e_band: f64,
}

impl ConstraintReport {
    pub fn ok(&self) -> bool {
        self.energy_ok && self.simple
    }
}

/// Membership test for the admissible curve set: band energy fraction and simplicity.
pub fn constraint_check(curve: &FourierCurve, m: usize, c_h: f64) -> Result<ConstraintReport, GeometryError> {
    let (e_total, e_band) = elastic_energy(curve, m)?;
    Ok(ConstraintReport {
        energy_ok: e_band >= c_h * e_total,
        simple: is_simple(curve),
        e_total,
        e_band,
    })
}

/// Polyline of `n` equispaced samples.
pub fn polyline(curve: &FourierCurve, n: usize) -> Vec<[f64; 2]> {
    let n = n.max(2 * curve.order() + 1);
    curve.grid_eval(n, 0.0, 0, None).iter().map(|v| [v.re, v.im]).collect()
}

/// True when the sampled polyline has no crossings between non-adjacent segments.
pub fn is_simple(curve: &FourierCurve) -> bool {
    let n = (20 * curve.order() + 20).max(400);
    polygon_is_simple(&polyline(curve, n))
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    robust::orient2d(
        robust::Coord { x: a[0], y: a[1] },
        robust::Coord { x: b[0], y: b[1] },
        robust::Coord { x: c[0], y: c[1] },
    )
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Exact segment intersection test (touching counts).
pub fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let o1 = orient(p1, p2, q1);
    let o2 = orient(p1, p2, q2);
    let o3 = orient(q1, q2, p1);
    let o4 = orient(q1, q2, p2);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(p1, p2, q1))
        || (o2 == 0.0 && on_segment(p1, p2, q2))
        || (o3 == 0.0 && on_segment(q1, q2, p1))
        || (o4 == 0.0 && on_segment(q1, q2, p2))
}

/// Pairs `(i, j)` of edges of polygons `a` and `b` whose bounding boxes overlap.
/// Edges are `(a[i], a[i+1])`, closing at the end. With `same`, only `i < j` pairs are returned.
fn candidate_pairs(a: &[[f64; 2]], b: &[[f64; 2]], same: bool) -> Vec<(usize, usize)> {
    let bbox = |p: &[[f64; 2]], i: usize| {
        let (u, v) = (p[i], p[(i + 1) % p.len()]);
        [u[0].min(v[0]), u[0].max(v[0]), u[1].min(v[1]), u[1].max(v[1])]
    };
    // tag 0 = a, 1 = b
    let mut items: Vec<(f64, f64, f64, f64, usize, u8)> = Vec::new();
    for i in 0..a.len() {
        let bb = bbox(a, i);
        items.push((bb[0], bb[1], bb[2], bb[3], i, 0));
    }
    if !same {
        for i in 0..b.len() {
            let bb = bbox(b, i);
            items.push((bb[0], bb[1], bb[2], bb[3], i, 1));
        }
    }
    items.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = Vec::new();
    for (idx, it) in items.iter().enumerate() {
        for other in &items[idx + 1..] {
            if other.0 > it.1 {
                break;
            }
            if other.2 > it.3 || other.3 < it.2 {
                continue;
            }
            if same {
                out.push((it.4.min(other.4), it.4.max(other.4)));
            } else if it.5 != other.5 {
                if it.5 == 0 {
                    out.push((it.4, other.4));
                } else {
                    out.push((other.4, it.4));
                }
            }
        }
    }
    out
}

/// Simplicity of a closed polygon.
pub fn polygon_is_simple(p: &[[f64; 2]]) -> bool {
    let n = p.len();
    for (i, j) in candidate_pairs(p, p, true) {
        if j == i + 1 || (i == 0 && j == n - 1) {
            continue;
        }
        if segments_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
            return false;
        }
    }
    true
}

/// Coefficients of a normal perturbation `h(s) = c[0] + sum c[m] cos(2 pi m s/L) + c[N+m] sin(2 pi m s/L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalPerturbation {
    pub coeffs: Vec<f64>,
}

impl NormalPerturbation {
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![0.0; 2 * order + 1] }
    }

    pub fn order(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    /// Unit vector for basis function `j` (0 = constant, 1..=N cosines, N+1..=2N sines).
    pub fn basis(order: usize, j: usize) -> Self {
        let mut p = Self::zero(order);
        p.coeffs[j] = 1.0;
        p
    }

    pub fn eval(&self, s: &[f64], period: f64) -> Vec<f64> {
        let n = self.order();
        let w = 2.0 * PI / period;
        s.iter()
            .map(|&t| {
                let mut v = self.coeffs[0];
                for m in 1..=n {
                    let (sn, cs) = (m as f64 * w * t).sin_cos();
                    v += self.coeffs[m] * cs + self.coeffs[n + m] * sn;
                }
                v
            })
            .collect()
    }
}

/// Moves the curve by `h n` and refits it by arc length with at most `max_order` modes.
pub fn apply_normal_update(
    curve: &FourierCurve,
    w: &NormalPerturbation,
    max_order: usize,
) -> Result<FourierCurve, GeometryError> {
    if w.coeffs.iter().all(|&c| c == 0.0) {
        return Ok(curve.clone());
    }
    let n = (4 * curve.order().max(w.order()) + 64).max(2 * max_order + 64).max(512);
    let s = curve.sample(n)?;
    let h = w.eval(&s.s, curve.length);
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|j| [s.pos[j][0] + h[j] * s.normal[j][0], s.pos[j][1] + h[j] * s.normal[j][1]])
        .collect();
    let moved = FourierCurve::fit(&pts, curve.length, (n - 1) / 2);
    reparameterize_arclength(&moved, max_order)
}

const ARCLENGTH_TOL: f64 = 1e-6;

/// Refits a curve so that `|gamma'| = 1` (within `1e-6`) with at most `max_order` modes.
pub fn reparameterize_arclength(curve: &FourierCurve, max_order: usize) -> Result<FourierCurve, GeometryError> {
    curve.validate()?;
    let mut current = curve.clone();
    let mut deviation = f64::INFINITY;
    for _ in 0..100 {
        let next = arclength_pass(&current, max_order)?;
        deviation = next.arclength_deviation();
        current = next;
        if deviation <= 0.1 * ARCLENGTH_TOL {
            return Ok(current);
        }
    }
    if deviation <= ARCLENGTH_TOL {
        return Ok(current);
    }
    Err(GeometryError::RefitDiverged { deviation })
}

/// One pass: spectral arc-length function, Newton inversion at equispaced
/// arc length, and a trigonometric refit.
fn arclength_pass(curve: &FourierCurve, max_order: usize) -> Result<FourierCurve, GeometryError> {
    let n = (8 * curve.order().max(max_order) + 64).max(512);
    let samp = curve.sample(n)?;
    let period = curve.length;
    let w = 2.0 * PI / period;
    // speed = sum_m sig_m e^{i m w t}
    let mut sig: Vec<C> = samp.speed.iter().map(|&v| C::new(v, 0.0)).collect();
    fourier::forward(&mut sig);
    let half = (n - 1) / 2;
    let modes: Vec<(f64, C)> = (1..=half).map(|m| (m as f64 * w, sig[m] / n as f64)).collect();
    let mean = sig[0].re / n as f64;
    let total = mean * period;
    // s(t) = mean t + 2 Re sum_{m>=1} sig_m (e^{imwt} - 1)/(imw); speed(t) likewise.
    let s_and_speed = |t: f64| {
        let mut s = mean * t;
        let mut sp = mean;
        let e1 = C::from_polar(1.0, w * t);
        let mut e = C::new(1.0, 0.0);
        for &(mw, c) in &modes {
            e *= e1;
            s += 2.0 * (c * (e - 1.0) / C::new(0.0, mw)).re;
            sp += 2.0 * (c * e).re;
        }
        (s, sp)
    };
    let mut pts = Vec::with_capacity(n);
    let mut t = 0.0;
    let mut last_speed = mean;
    for j in 0..n {
        let target = total * j as f64 / n as f64;
        if j > 0 {
            t += total / n as f64 / last_speed;
        }
        for _ in 0..50 {
            let (s, sp) = s_and_speed(t);
            last_speed = sp;
            let dt = (s - target) / sp;
            t -= dt;
            if dt.abs() < 1e-15 * period {
                break;
            }
        }
        pts.push(curve.eval(t).0);
    }
    Ok(FourierCurve::fit(&pts, total, max_order.min((n - 1) / 2)).trimmed(1e-14))
}

/// Relative area of the symmetric difference, `(|A \ B| + |B \ A|) / |A|`,
/// from polygons with `n` nodes per curve.
pub fn symmetric_difference_area(a: &FourierCurve, b: &FourierCurve, n: usize) -> Result<f64, GeometryError> {
    let pa = polyline(a, n);
    let pb = polyline(b, n);
    let area_a = shoelace(&pa);
    let area_b = shoelace(&pb);
    if area_a.abs() < 1e-14 || area_b.abs() < 1e-14 {
        return Err(GeometryError::DegeneratePolygon(area_a.min(area_b)));
    }
    let pa = if area_a < 0.0 { pa.into_iter().rev().collect() } else { pa };
    let pb = if area_b < 0.0 { pb.into_iter().rev().collect() } else { pb };
    let inter = intersection_area(&pa, &pb);
    Ok((area_a.abs() + area_b.abs() - 2.0 * inter) / area_a.abs())
}

pub fn shoelace(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let (u, v) = (p[i], p[(i + 1) % n]);
            u[0] * v[1] - v[0] * u[1]
        })
        .sum::<f64>()
        * 0.5
}

#[derive(PartialEq)]
enum Location {
    Inside,
    Outside,
    Boundary,
}

fn locate(p: [f64; 2], poly: &[[f64; 2]], tol: f64) -> Location {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        // distance to the segment
        let d = [b[0] - a[0], b[1] - a[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
        let q = [a[0] + t * d[0] - p[0], a[1] + t * d[1] - p[1]];
        if q[0].hypot(q[1]) <= tol {
            return Location::Boundary;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    if inside {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Area of the intersection of two counterclockwise simple polygons, from the
/// boundary pieces of each polygon that lie inside the other. Shared boundary
/// pieces are counted once (from `a`).
fn intersection_area(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let mut cuts_a: Vec<Vec<f64>> = vec![vec![0.0, 1.0]; na];
    let mut cuts_b: Vec<Vec<f64>> = vec![vec![0.0, 1.0]; nb];
    for (i, j) in candidate_pairs(a, b, false) {
        let (p1, p2) = (a[i], a[(i + 1) % na]);
        let (q1, q2) = (b[j], b[(j + 1) % nb]);
        if !segments_intersect(p1, p2, q1, q2) {
            continue;
        }
        let r = [p2[0] - p1[0], p2[1] - p1[1]];
        let s = [q2[0] - q1[0], q2[1] - q1[1]];
        let den = r[0] * s[1] - r[1] * s[0];
        if den.abs() < 1e-300 {
            continue; // collinear overlap: handled by boundary classification
        }
        let qp = [q1[0] - p1[0], q1[1] - p1[1]];
        let t = (qp[0] * s[1] - qp[1] * s[0]) / den;
        let u = (qp[0] * r[1] - qp[1] * r[0]) / den;
        cuts_a[i].push(t.clamp(0.0, 1.0));
        cuts_b[j].push(u.clamp(0.0, 1.0));
    }
    let scale = a.iter().chain(b).map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(1.0);
    let mut twice = 0.0;
    let mut walk = |poly: &[[f64; 2]], other: &[[f64; 2]], cuts: &mut [Vec<f64>], keep_boundary: bool| {
        let n = poly.len();
        for i in 0..n {
            let (p1, p2) = (poly[i], poly[(i + 1) % n]);
            let c = &mut cuts[i];
            c.sort_by(f64::total_cmp);
            for w in c.windows(2) {
                if w[1] - w[0] <= 0.0 {
                    continue;
                }
                let at = |t: f64| [p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1])];
                let (u, v) = (at(w[0]), at(w[1]));
                let mid = at(0.5 * (w[0] + w[1]));
                let loc = locate(mid, other, tol);
                if loc == Location::Inside || (keep_boundary && loc == Location::Boundary) {
                    twice += u[0] * v[1] - v[0] * u[1];
                }
            }
        }
    };
    walk(a, b, &mut cuts_a, true);
    walk(b, a, &mut cuts_b, false);
    0.5 * twice
}

/// Shape derivative of the signed curvature under the normal perturbation `h n`
/// (unit normal), with `h` given at the `n` sample nodes.
pub fn curvature_frechet(curve: &FourierCurve, h: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let n = h.len();
    let s = curve.sample(n)?;
    let hp = fourier::derivative(h, curve.length, 1);
    let hpp = fourier::derivative(h, curve.length, 2);
    Ok((0..n)
        .map(|j| {
            let [dx, dy] = s.d1[j];
            let [ddx, ddy] = s.d2[j];
            let sp2 = dx * dx + dy * dy;
            let k = s.curvature[j];
            -k * k * h[j] + (dx * ddx + dy * ddy) / (sp2 * sp2) * hp[j] - hpp[j] / sp2
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse(a: f64, b: f64) -> FourierCurve {
        FourierCurve {
            length: 2.0 * PI,
            a1: vec![0.0, a],
            b1: vec![0.0, 0.0],
            a2: vec![0.0, 0.0],
            b2: vec![0.0, b],
        }
    }

    #[test]
    fn complex_coefficients_roundtrip() {
        let c = FourierCurve {
            length: 3.0,
            a1: vec![0.1, 0.5, -0.2],
            b1: vec![0.0, 0.3, 0.05],
            a2: vec![-0.4, 0.1, 0.07],
            b2: vec![0.0, 0.9, -0.01],
        };
        let back = FourierCurve::from_complex_coefficients(&c.complex_coefficients(), 3.0);
        for (x, y) in c.a1.iter().chain(&c.b1).chain(&c.a2).chain(&c.b2).zip(back.a1.iter().chain(&back.b1).chain(&back.a2).chain(&back.b2)) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling_matches_direct_evaluation() {
        let c = ellipse(2.0, 1.0).translated([0.3, -0.1]);
        let s = c.sample(17).unwrap();
        for j in 0..17 {
            let (p, d1, d2) = c.eval(s.s[j]);
            for q in 0..2 {
                assert!((p[q] - s.pos[j][q]).abs() < 1e-13);
                assert!((d1[q] - s.d1[j][q]).abs() < 1e-13);
                assert!((d2[q] - s.d2[j][q]).abs() < 1e-13);
            }
        }
        assert!(matches!(c.sample(2), Err(GeometryError::TooFewNodes { .. })));
    }

    #[test]
    fn chords_match_differences() {
        let c = ellipse(2.0, 1.0);
        let d = 0.01;
        let ch = c.chords(32, d).unwrap();
        let sh = c.sample_shifted(32, d).unwrap();
        let s = c.sample(32).unwrap();
        for j in 0..32 {
            for q in 0..2 {
                assert!((ch[j][q] - (sh.pos[j][q] - s.pos[j][q])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ellipse_curvature_at_vertex() {
        let h = signed_curvature(&ellipse(2.0, 1.0), 64).unwrap();
        assert!((h[0] - 2.0).abs() < 1e-13);
        let r = signed_curvature(&ellipse(2.0, 1.0).reversed(), 64).unwrap();
        assert!((h[5] + r[64 - 5]).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_coefficients() {
        let c = ellipse(2.0, 1.0).translated([1.0, 2.0]);
        let pts = c.sample(32).unwrap().pos;
        let f = FourierCurve::fit(&pts, c.length, 5).trimmed(1e-14);
        assert_eq!(f.order(), 1);
        assert!((f.a1[1] - 2.0).abs() < 1e-14 && (f.a2[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn signed_area_of_circle() {
        let c = FourierCurve::circle(1.5, [0.0, 0.0]);
        assert!((c.signed_area() - PI * 2.25).abs() < 1e-13);
        assert!(c.reversed().signed_area() < 0.0);
    }

    #[test]
    fn segment_predicate() {
        assert!(segments_intersect([0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]));
        assert!(!segments_intersect([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]));
        assert!(segments_intersect([0.0, 0.0], [2.0, 0.0], [1.0, 0.0], [3.0, 0.0]));
    }
}
