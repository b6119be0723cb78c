//! Nyström discretization of the boundary layer operators.
//!
//! Weakly singular kernels are integrated with a corrected trapezoid rule:
//! the `2a - 1` trapezoid nodes nearest the target are dropped and replaced by
//! `2Q` auxiliary nodes `t_i +- x_k h` with weights `w_k h`. The rule is exact
//! for `s^{2q}` and `s^{2q} log|s|` for `q < Q` (as a periodic Euler-Maclaurin
//! correction), giving order 16 for log-singular integrands. Density values at
//! auxiliary nodes come from trigonometric interpolation.

use crate::fourier::interp_weight;
use crate::geometry::{CurveSamples, FourierCurve, GeometryError};
use crate::special::{hankel_regularized, RegularizedHankel, WaveNumber};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type CMatrix = DMatrix<C>;

const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayerError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{nodes} nodes is below the quadrature minimum of {min}")]
    TooFewNodes { nodes: usize, min: usize },
    #[error("Tdiff needs two distinct wavenumbers")]
    CoincidentWavenumbers,
    #[error("target {index} is {distance:e} from the boundary (minimum {min:e})")]
    TargetTooClose { index: usize, distance: f64, min: f64 },
    #[error("{0:?} is not available for this operation")]
    Unsupported(OperatorKind),
}

/// Symmetric corrected trapezoid rule for periodic log-singular integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    /// Trapezoid nodes with `|j| < skip` around the singularity are dropped.
    pub skip: usize,
    pub nodes: [f64; 8],
    pub weights: [f64; 8],
}

/// Order-16 rule (8 symmetric node pairs, 19 dropped trapezoid nodes), computed
/// from the moment conditions with the Hurwitz zeta function (`tools/gen_log_rule.py`).
pub const ORDER16: QuadratureRule = QuadratureRule {
    skip: 10,
    nodes: [
        9.512331530197498758713e-2,
        7.132583568867498376801e-1,
        1.861594348702374982843,
        3.375685763670523475823,
        5.038886487686431068965,
        6.617503716241455503894,
        7.929581992345248110951,
        8.99745020755911111932,
    ],
    weights: [
        3.05923455353730608408e-1,
        9.046103095064737727385e-1,
        1.363962739310896318565,
        1.627561053235036054631,
        1.658982363069987789593,
        1.464966128195962725859,
        1.162053581115566363431,
        1.011940370212346366775,
    ],
};

impl QuadratureRule {
    pub fn min_nodes(&self) -> usize {
        2 * self.skip + 2
    }

    /// `int_0^{2 pi} f(s) ds` for `2 pi`-periodic `f` with a log singularity at `s = 0`,
    /// using `n` base nodes.
    pub fn integrate_log_singular(&self, f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 2.0 * PI / n as f64;
        let mut sum = 0.0;
        for j in self.skip..=(n - self.skip) {
            sum += f(j as f64 * h);
        }
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * (f(x * h) + f(2.0 * PI - x * h));
        }
        sum * h
    }
}

/// Operator names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    S,
    D,
    K,
    Tdiff,
}

/// Quadrature-ready boundary: node samples, auxiliary-node geometry and interpolation tables.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub curve: FourierCurve,
    pub samples: CurveSamples,
    pub rule: QuadratureRule,
    aux: Vec<AuxNodes>,
    /// `interp[c][m]`: weight of column `(i + m) mod n` for auxiliary node `c` of row `i`.
    interp: Vec<Vec<f64>>,
}

/// Auxiliary nodes `t_i + offset` for all rows `i`.
#[derive(Debug, Clone)]
struct AuxNodes {
    /// `gamma(t_i + offset) - gamma(t_i)`.
    chord: Vec<[f64; 2]>,
    normal: Vec<[f64; 2]>,
    /// Quadrature weight including `|gamma'|` at the auxiliary node.
    weight: Vec<f64>,
}

impl Discretization {
    pub fn new(curve: &FourierCurve, n: usize, rule: QuadratureRule) -> Result<Self, LayerError> {
        if n < rule.min_nodes() {
            return Err(LayerError::TooFewNodes { nodes: n, min: rule.min_nodes() });
        }
        let samples = curve.sample(n)?;
        let hs = curve.length / n as f64;
        let ht = 2.0 * PI / n as f64;
        let mut aux = Vec::with_capacity(16);
        let mut interp = Vec::with_capacity(16);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            for sign in [1.0, -1.0] {
                let off = sign * x;
                let sh = curve.sample_shifted(n, off * hs)?;
                aux.push(AuxNodes {
                    chord: curve.chords(n, off * hs)?,
                    normal: sh.normal,
                    weight: sh.speed.iter().map(|sp| w * hs * sp).collect(),
                });
                interp.push((0..n).map(|m| interp_weight((off - m as f64) * ht, n)).collect());
            }
        }
        Ok(Self { curve: curve.clone(), samples, rule, aux, interp })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Circular index distance.
    fn far(&self, i: usize, j: usize) -> bool {
        let n = self.len();
        let d = i.abs_diff(j);
        d.min(n - d) >= self.rule.skip
    }
}

/// Geometry of an ordered (target, source) pair.
pub struct PairGeom {
    /// `x - y`.
    pub r: [f64; 2],
    pub rho: f64,
    pub nx: [f64; 2],
    pub ny: [f64; 2],
}

impl PairGeom {
    #[inline]
    fn rnx(&self) -> f64 {
        self.r[0] * self.nx[0] + self.r[1] * self.nx[1]
    }
    #[inline]
    fn rny(&self) -> f64 {
        self.r[0] * self.ny[0] + self.r[1] * self.ny[1]
    }
    #[inline]
    fn nxny(&self) -> f64 {
        self.nx[0] * self.ny[0] + self.nx[1] * self.ny[1]
    }
}

#[inline]
fn h1_of(h: &RegularizedHankel, z: C) -> C {
    h.h1reg - I * (2.0 / PI) / z
}

#[inline]
fn s_kernel(h: &RegularizedHankel) -> C {
    I * 0.25 * h.h0
}

#[inline]
fn d_kernel(k: C, h: &RegularizedHankel, g: &PairGeom) -> C {
    I * k * 0.25 * h1_of(h, k * g.rho) * (g.rny() / g.rho)
}

#[inline]
fn k_kernel(k: C, h: &RegularizedHankel, g: &PairGeom) -> C {
    -I * k * 0.25 * h1_of(h, k * g.rho) * (g.rnx() / g.rho)
}

/// `d^2/dn_x dn_y (G^{ka} - G^{kb})`, free of the hypersingular parts.
#[inline]
fn tdiff_kernel(ka: C, kb: C, ha: &RegularizedHankel, hb: &RegularizedHankel, g: &PairGeom) -> C {
    let rho = g.rho;
    let a = I / (4.0 * rho) * (ka * ha.h1reg - kb * hb.h1reg);
    let b = -I / (4.0 * rho * rho) * (ka * ka * ha.h2reg - kb * kb * hb.h2reg) - (ka * ka - kb * kb) / (4.0 * PI * rho * rho);
    a * g.nxny() + b * g.rnx() * g.rny()
}

/// Generic assembly: `kern(hankel values per wavenumber, pair) -> M kernel values`.
fn assemble<const M: usize>(
    disc: &Discretization,
    ks: &[C],
    kern: impl Fn(&[RegularizedHankel], &PairGeom) -> [C; M],
) -> Vec<CMatrix> {
    let n = disc.len();
    let s = &disc.samples;
    let mut mats: Vec<CMatrix> = (0..M).map(|_| CMatrix::zeros(n, n)).collect();
    let mut hk = vec![RegularizedHankel { h0: C::default(), h1reg: C::default(), h2reg: C::default() }; ks.len()];
    // smooth part: trapezoid over far pairs, one Hankel evaluation per unordered pair
    for j in 0..n {
        for i in (j + 1)..n {
            if !disc.far(i, j) {
                continue;
            }
            let r = [s.pos[i][0] - s.pos[j][0], s.pos[i][1] - s.pos[j][1]];
            let rho = r[0].hypot(r[1]);
            for (slot, k) in hk.iter_mut().zip(ks) {
                *slot = hankel_regularized(k * rho);
            }
            let gij = PairGeom { r, rho, nx: s.normal[i], ny: s.normal[j] };
            let gji = PairGeom { r: [-r[0], -r[1]], rho, nx: s.normal[j], ny: s.normal[i] };
            let vij = kern(&hk, &gij);
            let vji = kern(&hk, &gji);
            for q in 0..M {
                mats[q][(i, j)] = vij[q] * s.weights[j];
                mats[q][(j, i)] = vji[q] * s.weights[i];
            }
        }
    }
    // auxiliary nodes near the diagonal, spread by interpolation
    for (c, aux) in disc.aux.iter().enumerate() {
        let table = &disc.interp[c];
        for i in 0..n {
            let ch = aux.chord[i];
            let r = [-ch[0], -ch[1]];
            let rho = r[0].hypot(r[1]);
            for (slot, k) in hk.iter_mut().zip(ks) {
                *slot = hankel_regularized(k * rho);
            }
            let g = PairGeom { r, rho, nx: s.normal[i], ny: aux.normal[i] };
            let v = kern(&hk, &g);
            let w = aux.weight[i];
            for q in 0..M {
                let vw = v[q] * w;
                for (m, &p) in table.iter().enumerate() {
                    let jj = (i + m) % n;
                    mats[q][(i, jj)] += vw * p;
                }
            }
        }
    }
    mats
}

/// Assembles one operator. `kb` is the second wavenumber for `Tdiff` (`T_k - T_kb`).
pub fn build_operator(
    kind: OperatorKind,
    k: WaveNumber,
    kb: Option<WaveNumber>,
    disc: &Discretization,
) -> Result<CMatrix, LayerError> {
    let ka = k.0;
    let m = match kind {
        OperatorKind::S => assemble::<1>(disc, &[ka], |h, _| [s_kernel(&h[0])]),
        OperatorKind::D => assemble::<1>(disc, &[ka], |h, g| [d_kernel(ka, &h[0], g)]),
        OperatorKind::K => assemble::<1>(disc, &[ka], |h, g| [k_kernel(ka, &h[0], g)]),
        OperatorKind::Tdiff => {
            let kb = kb.ok_or(LayerError::Unsupported(kind))?.0;
            if kb == ka {
                return Err(LayerError::CoincidentWavenumbers);
            }
            assemble::<1>(disc, &[ka, kb], |h, g| [tdiff_kernel(ka, kb, &h[0], &h[1], g)])
        }
    };
    Ok(m.into_iter().next().expect("one matrix"))
}

/// Operators of two wavenumbers assembled together.
#[derive(Debug, Clone)]
pub struct PairOperators {
    pub s_a: CMatrix,
    pub d_a: CMatrix,
    pub k_a: CMatrix,
    pub s_b: CMatrix,
    pub d_b: CMatrix,
    pub k_b: CMatrix,
    /// `T_a - T_b`.
    pub tdiff: CMatrix,
}

pub fn assemble_pair(disc: &Discretization, ka: WaveNumber, kb: WaveNumber) -> Result<PairOperators, LayerError> {
    let (a, b) = (ka.0, kb.0);
    if a == b {
        return Err(LayerError::CoincidentWavenumbers);
    }
    let mats = assemble::<7>(disc, &[a, b], |h, g| {
        [
            s_kernel(&h[0]),
            d_kernel(a, &h[0], g),
            k_kernel(a, &h[0], g),
            s_kernel(&h[1]),
            d_kernel(b, &h[1], g),
            k_kernel(b, &h[1], g),
            tdiff_kernel(a, b, &h[0], &h[1], g),
        ]
    });
    let mut it = mats.into_iter();
    let mut next = || it.next().expect("seven matrices");
    Ok(PairOperators { s_a: next(), d_a: next(), k_a: next(), s_b: next(), d_b: next(), k_b: next(), tdiff: next() })
}

/// Matrix mapping node densities to `S` or `D` potentials at off-surface targets
/// (plain trapezoid rule).
pub fn potential_matrix(
    kind: OperatorKind,
    k: WaveNumber,
    disc: &Discretization,
    targets: &[[f64; 2]],
) -> Result<CMatrix, LayerError> {
    if !matches!(kind, OperatorKind::S | OperatorKind::D) {
        return Err(LayerError::Unsupported(kind));
    }
    let s = &disc.samples;
    let n = disc.len();
    let spacing = s.weights.iter().cloned().fold(0.0, f64::max);
    let mut out = CMatrix::zeros(targets.len(), n);
    for (t, x) in targets.iter().enumerate() {
        for j in 0..n {
            let r = [x[0] - s.pos[j][0], x[1] - s.pos[j][1]];
            let rho = r[0].hypot(r[1]);
            if rho < 2.0 * spacing {
                return Err(LayerError::TargetTooClose { index: t, distance: rho, min: 2.0 * spacing });
            }
            let z = k.0 * rho;
            let h = hankel_regularized(z);
            let g = PairGeom { r, rho, nx: [0.0, 0.0], ny: s.normal[j] };
            let v = match kind {
                OperatorKind::S => s_kernel(&h),
                _ => d_kernel(k.0, &h, &g),
            };
            out[(t, j)] = v * s.weights[j];
        }
    }
    Ok(out)
}

/// Potential values at targets for a given node density.
pub fn eval_potential(
    kind: OperatorKind,
    k: WaveNumber,
    disc: &Discretization,
    density: &[C],
    targets: &[[f64; 2]],
) -> Result<Vec<C>, LayerError> {
    let m = potential_matrix(kind, k, disc, targets)?;
    let d = nalgebra::DVector::from_column_slice(density);
    Ok((m * d).iter().cloned().collect())
}
