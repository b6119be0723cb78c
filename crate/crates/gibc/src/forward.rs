//! Forward scattering solvers: impedance (and Neumann) and transmission
//! problems for plane-wave incidence, evaluated at far receptors.

use crate::geometry::{FourierCurve, GeometryError};
use crate::layerpot::{assemble_pair, potential_matrix, Discretization, LayerError, OperatorKind, ORDER16};
use crate::linalg::{matmul, CMatrix, Factorization, SolveError, CONDITION_LIMIT};
use crate::models::{ImpedanceParams, ModelError};
use crate::special::WaveNumber;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForwardError {
    #[error(transparent)]
    Layer(#[from] LayerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),
    #[error("boundary data has {got} nodes but the solver uses {expected}")]
    StaleHandle { got: usize, expected: usize },
}

/// Material and frequency parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub delta: f64,
}

impl PhysicalParams {
    pub fn new(omega: f64, c1: f64, c2: f64, rho1: f64, rho2: f64, delta: f64) -> Result<Self, ForwardError> {
        let p = Self { omega, c1, c2, rho1, rho2, delta };
        p.validate()?;
        Ok(p)
    }

    /// Reference medium: `c1 = 0.5, c2 = 1, rho1 = 1.2, rho2 = 0.7`.
    pub fn reference(omega: f64, delta: f64) -> Self {
        Self { omega, c1: 0.5, c2: 1.0, rho1: 1.2, rho2: 0.7, delta }
    }

    pub fn validate(&self) -> Result<(), ForwardError> {
        let pos = [("omega", self.omega), ("c1", self.c1), ("c2", self.c2), ("rho1", self.rho1), ("rho2", self.rho2)];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ForwardError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(ForwardError::InvalidParams(format!("delta must be nonnegative, got {}", self.delta)));
        }
        Ok(())
    }

    pub fn at_frequency(&self, omega: f64) -> Self {
        Self { omega, ..*self }
    }

    pub fn k2(&self) -> f64 {
        self.omega / self.c2
    }

    pub fn k1(&self) -> WaveNumber {
        WaveNumber::interior(self.omega, self.delta, self.c1)
    }

    pub fn cr(&self) -> f64 {
        self.c1 / self.c2
    }

    pub fn rhor(&self) -> f64 {
        self.rho1 / self.rho2
    }

    fn damping(&self) -> C {
        C::new(1.0, self.delta / self.omega)
    }

    /// Relative refractive index `sqrt(1 + i delta/omega) / c_r`.
    pub fn refractive_index(&self) -> C {
        self.damping().sqrt() / self.cr()
    }

    /// Contrast `1 / (rho_r (1 + i delta/omega))`.
    pub fn alpha(&self) -> C {
        1.0 / (self.rhor() * self.damping())
    }

    pub fn b1(&self) -> C {
        self.alpha()
    }

    pub fn b2(&self) -> C {
        C::new(1.0, 0.0)
    }

    pub fn q(&self) -> C {
        0.5 * (1.0 / self.b1() + 1.0 / self.b2())
    }

    /// First-order GIBC impedance `alpha N - i alpha H / k_2` at curvature `h`.
    pub fn abv_impedance(&self, h: f64) -> C {
        self.alpha() * self.refractive_index() - I * self.alpha() * h / self.k2()
    }
}

/// Incident directions, receptors and the aperture mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub directions: Vec<[f64; 2]>,
    pub receptors: Vec<[f64; 2]>,
    /// Row-major `n_d x n_r`; `true` marks an available measurement.
    pub mask: Vec<bool>,
}

impl SensorGeometry {
    /// `count` directions and receptors at angles `2 pi i / count`, receptors on
    /// a circle of radius `radius`, full aperture.
    pub fn uniform(count: usize, radius: f64) -> Self {
        let ang = |i: usize| 2.0 * PI * i as f64 / count as f64;
        Self {
            directions: (0..count).map(|i| [ang(i).cos(), ang(i).sin()]).collect(),
            receptors: (0..count).map(|i| [radius * ang(i).cos(), radius * ang(i).sin()]).collect(),
            mask: vec![true; count * count],
        }
    }

    /// Keeps receptor `j` for direction `i` when the angle between `r_j` and
    /// `-d_i` is at most `opening / 2`.
    pub fn with_backscatter(mut self, opening: f64) -> Self {
        let nr = self.receptors.len();
        for (i, d) in self.directions.iter().enumerate() {
            for (j, r) in self.receptors.iter().enumerate() {
                let rn = r[0].hypot(r[1]);
                let cosang = -(d[0] * r[0] + d[1] * r[1]) / rn;
                let ang = cosang.clamp(-1.0, 1.0).acos();
                self.mask[i * nr + j] = ang <= 0.5 * opening + 1e-12;
            }
        }
        self
    }

    pub fn n_d(&self) -> usize {
        self.directions.len()
    }

    pub fn n_r(&self) -> usize {
        self.receptors.len()
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn density(&self) -> f64 {
        self.active_count() as f64 / self.mask.len().max(1) as f64
    }
}

/// Scattered field at receptors, `values[i * n_r + j]` for direction `i`,
/// receptor `j`. Masked entries are stored as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceptorField {
    pub n_d: usize,
    pub n_r: usize,
    pub values: Vec<C>,
    pub mask: Vec<bool>,
}

impl ReceptorField {
    /// From an `n_r x n_d` matrix (one column per direction).
    pub fn from_columns(m: &CMatrix, mask: &[bool]) -> Self {
        let (n_r, n_d) = (m.nrows(), m.ncols());
        let mut values = vec![C::default(); n_r * n_d];
        for i in 0..n_d {
            for j in 0..n_r {
                if mask[i * n_r + j] {
                    values[i * n_r + j] = m[(j, i)];
                }
            }
        }
        Self { n_d, n_r, values, mask: mask.to_vec() }
    }

    /// Unmasked entries in direction-major order.
    pub fn active(&self) -> Vec<C> {
        self.values.iter().zip(&self.mask).filter(|(_, &m)| m).map(|(v, _)| *v).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<C> {
        let idx = i * self.n_r + j;
        self.mask[idx].then(|| self.values[idx])
    }
}

/// `exp(i k d.x)`.
#[inline]
pub fn plane_wave(k: f64, d: [f64; 2], x: [f64; 2]) -> C {
    C::from_polar(1.0, k * (d[0] * x[0] + d[1] * x[1]))
}

/// Plane-wave trace and normal derivative on the nodes, one column per direction.
pub fn incident_data(k: f64, disc: &Discretization, dirs: &[[f64; 2]]) -> (CMatrix, CMatrix) {
    let s = &disc.samples;
    let n = s.len();
    let mut u = CMatrix::zeros(n, dirs.len());
    let mut un = CMatrix::zeros(n, dirs.len());
    for (c, d) in dirs.iter().enumerate() {
        for i in 0..n {
            let v = plane_wave(k, *d, s.pos[i]);
            u[(i, c)] = v;
            un[(i, c)] = I * k * (d[0] * s.normal[i][0] + d[1] * s.normal[i][1]) * v;
        }
    }
    (u, un)
}

/// Impedance-problem operators for one curve and wavenumber, independent of `lambda`.
///
/// The scattered field is `u_s = (S_k + i k D_k S_{i|k|}) phi`; with
/// `B = S_k + i k D_k S_{i|k|} + (i k / 2) S_{i|k|}` its trace is `B phi` and the
/// system matrix is `A(lambda) = A_0 + i k diag(lambda) B`.
pub struct ImpedanceSystem {
    pub disc: Discretization,
    pub k2: f64,
    pub receptors: Vec<[f64; 2]>,
    a0: CMatrix,
    b: CMatrix,
    receptor: CMatrix,
    factorizations: AtomicUsize,
}

impl ImpedanceSystem {
    pub fn new(curve: &FourierCurve, n: usize, k2: f64, receptors: &[[f64; 2]]) -> Result<Self, ForwardError> {
        let disc = Discretization::new(curve, n, ORDER16)?;
        let k = WaveNumber::real(k2);
        let ops = assemble_pair(&disc, k, k.imaginary_companion())?;
        let ik = I * k2;
        let ds = matmul(&ops.d_a, &ops.s_b);
        let mut a0 = matmul(&ops.tdiff, &ops.s_b) + matmul(&ops.k_b, &ops.k_b);
        a0 *= ik;
        a0 += &ops.k_a;
        for i in 0..n {
            a0[(i, i)] -= (2.0 + ik) / 4.0;
        }
        let b = &ops.s_a + &ds * ik + &ops.s_b * (ik * 0.5);
        let ps = potential_matrix(OperatorKind::S, k, &disc, receptors)?;
        let pd = potential_matrix(OperatorKind::D, k, &disc, receptors)?;
        let receptor = ps + matmul(&pd, &ops.s_b) * ik;
        Ok(Self { disc, k2, receptors: receptors.to_vec(), a0, b, receptor, factorizations: AtomicUsize::new(0) })
    }

    pub fn len(&self) -> usize {
        self.disc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disc.is_empty()
    }

    /// Number of LU factorizations performed with this operator set.
    pub fn factorization_count(&self) -> usize {
        self.factorizations.load(Ordering::Relaxed)
    }

    /// Assembles and factors `A(lambda)`.
    pub fn factor(self: &Arc<Self>, lambda: &[C]) -> Result<ImpedanceSolver, ForwardError> {
        let n = self.len();
        if lambda.len() != n {
            return Err(ForwardError::StaleHandle { got: lambda.len(), expected: n });
        }
        let ik = I * self.k2;
        let mut a = self.a0.clone();
        for i in 0..n {
            let f = ik * lambda[i];
            for j in 0..n {
                a[(i, j)] += f * self.b[(i, j)];
            }
        }
        self.factorizations.fetch_add(1, Ordering::Relaxed);
        let lu = Factorization::new_checked(a, CONDITION_LIMIT)?;
        Ok(ImpedanceSolver { system: Arc::clone(self), lambda: lambda.to_vec(), lu, receptor_map: OnceLock::new() })
    }
}

/// Factored impedance system for one `lambda`.
pub struct ImpedanceSolver {
    pub system: Arc<ImpedanceSystem>,
    pub lambda: Vec<C>,
    lu: Factorization,
    /// `R A^{-1}`: boundary data to receptor values.
    receptor_map: OnceLock<CMatrix>,
}

impl ImpedanceSolver {
    /// Number of right-hand sides solved with this factorization.
    pub fn solve_count(&self) -> usize {
        self.lu.solve_count()
    }

    /// Receptor values (`n_r x m`) of the field with boundary data
    /// `d_n v + i k lambda v = f` for each column of `f`.
    pub fn solve_boundary_data(&self, f: &CMatrix) -> Result<CMatrix, ForwardError> {
        if f.nrows() != self.system.len() {
            return Err(ForwardError::StaleHandle { got: f.nrows(), expected: self.system.len() });
        }
        Ok(matmul(self.receptor_map(), f))
    }

    /// `R A^{-1}`, formed once from `n_r` adjoint solves.
    pub fn receptor_map(&self) -> &CMatrix {
        self.receptor_map.get_or_init(|| self.lu.solve_adjoint_many(&self.system.receptor.adjoint()).adjoint())
    }

    /// Incident trace and system right-hand side `-(d_n u_inc + i k lambda u_inc)`.
    fn plane_wave_rhs(&self, directions: &[[f64; 2]]) -> (CMatrix, CMatrix) {
        let sys = &self.system;
        let k = sys.k2;
        let (uinc, mut rhs) = incident_data(k, &sys.disc, directions);
        for c in 0..directions.len() {
            for i in 0..sys.len() {
                rhs[(i, c)] = -(rhs[(i, c)] + I * k * self.lambda[i] * uinc[(i, c)]);
            }
        }
        (uinc, rhs)
    }

    /// Relative residual `|A phi - f| / |f|` of the plane-wave solves,
    /// with `A` reassembled from the cached operators.
    pub fn residual_for_directions(&self, directions: &[[f64; 2]]) -> f64 {
        let sys = &self.system;
        let (_, rhs) = self.plane_wave_rhs(directions);
        let phi = self.lu.solve_many(&rhs);
        let ik = I * sys.k2;
        let mut a = sys.a0.clone();
        for i in 0..sys.len() {
            for j in 0..sys.len() {
                a[(i, j)] += ik * self.lambda[i] * sys.b[(i, j)];
            }
        }
        (matmul(&a, &phi) - &rhs).norm() / rhs.norm()
    }

    /// Full plane-wave solve for the given directions.
    pub fn scatter(self, directions: &[[f64; 2]], mask: &[bool]) -> ImpedanceSolution {
        let (uinc, rhs) = self.plane_wave_rhs(directions);
        let sys = &self.system;
        let k = sys.k2;
        let n = sys.len();
        let phi = self.lu.solve_many(&rhs);
        let total = uinc + matmul(&sys.b, &phi);
        let mut total_dn = total.clone();
        for c in 0..directions.len() {
            for i in 0..n {
                total_dn[(i, c)] *= -I * k * self.lambda[i];
            }
        }
        let field = ReceptorField::from_columns(&matmul(&sys.receptor, &phi), mask);
        ImpedanceSolution { solver: self, directions: directions.to_vec(), total, total_dn, field }
    }
}

/// Result of an impedance solve, kept for derivative computations.
pub struct ImpedanceSolution {
    pub solver: ImpedanceSolver,
    pub directions: Vec<[f64; 2]>,
    /// Total field on the nodes, one column per direction.
    pub total: CMatrix,
    /// Normal derivative of the total field, `-i k lambda u`.
    pub total_dn: CMatrix,
    pub field: ReceptorField,
}

impl ImpedanceSolution {
    pub fn samples(&self) -> &crate::geometry::CurveSamples {
        &self.solver.system.disc.samples
    }

    pub fn k2(&self) -> f64 {
        self.solver.system.k2
    }
}

/// Impedance solve from scratch.
pub fn solve_impedance(
    curve: &FourierCurve,
    n: usize,
    lambda: &[C],
    k2: f64,
    sensors: &SensorGeometry,
) -> Result<ImpedanceSolution, ForwardError> {
    let sys = Arc::new(ImpedanceSystem::new(curve, n, k2, &sensors.receptors)?);
    Ok(sys.factor(lambda)?.scatter(&sensors.directions, &sensors.mask))
}

/// Transmission solution: densities `(mu, sigma)` per direction and receptor field.
pub struct TransmissionSolution {
    pub disc: Discretization,
    pub phys: PhysicalParams,
    pub directions: Vec<[f64; 2]>,
    pub mu: CMatrix,
    pub sigma: CMatrix,
    pub field: ReceptorField,
    pub solve_count: usize,
}

/// Solves the 2x2 transmission system
/// `[I + (D_2/b_2 - D_1/b_1)/q, -(S_2/b_2 - S_1/b_1)/q; T_2 - T_1, I - (K_2 - K_1)]`
/// for `u_ext = (D_2 mu - S_2 sigma)/b_2` and `u_int = (D_1 mu - S_1 sigma)/b_1`.
pub fn solve_transmission(
    curve: &FourierCurve,
    n: usize,
    phys: &PhysicalParams,
    sensors: &SensorGeometry,
) -> Result<TransmissionSolution, ForwardError> {
    phys.validate()?;
    let disc = Discretization::new(curve, n, ORDER16)?;
    let k2 = WaveNumber::real(phys.k2());
    let ops = assemble_pair(&disc, k2, phys.k1())?;
    let (b1, b2, q) = (phys.b1(), phys.b2(), phys.q());
    let mut a = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            a[(i, j)] = id + (ops.d_a[(i, j)] / b2 - ops.d_b[(i, j)] / b1) / q;
            a[(i, n + j)] = -(ops.s_a[(i, j)] / b2 - ops.s_b[(i, j)] / b1) / q;
            a[(n + i, j)] = ops.tdiff[(i, j)];
            a[(n + i, n + j)] = id - (ops.k_a[(i, j)] - ops.k_b[(i, j)]);
        }
    }
    let lu = Factorization::new_checked(a, CONDITION_LIMIT)?;
    let (uinc, uninc) = incident_data(phys.k2(), &disc, &sensors.directions);
    let nd = sensors.n_d();
    let mut rhs = CMatrix::zeros(2 * n, nd);
    for c in 0..nd {
        for i in 0..n {
            rhs[(i, c)] = -uinc[(i, c)] / q;
            rhs[(n + i, c)] = -b2 * uninc[(i, c)];
        }
    }
    let x = lu.solve_many(&rhs);
    let mu = x.rows(0, n).into_owned();
    let sigma = x.rows(n, n).into_owned();
    let pd = potential_matrix(OperatorKind::D, k2, &disc, &sensors.receptors)?;
    let ps = potential_matrix(OperatorKind::S, k2, &disc, &sensors.receptors)?;
    let rec = (matmul(&pd, &mu) - matmul(&ps, &sigma)) / b2;
    Ok(TransmissionSolution {
        field: ReceptorField::from_columns(&rec, &sensors.mask),
        disc,
        phys: *phys,
        directions: sensors.directions.clone(),
        mu,
        sigma,
        solve_count: lu.solve_count(),
    })
}

impl TransmissionSolution {
    /// Relative residuals `(value jump, flux jump)` of the transmission
    /// conditions at the midpoints between nodes.
    ///
    /// Densities are trigonometrically interpolated to a grid of twice the size
    /// and both traces are formed there from the layer operators; the residuals
    /// are read at the odd (off-node) points and scaled by the incident data.
    pub fn jump_residual(&self) -> Result<(f64, f64), ForwardError> {
        let n = self.disc.len();
        let fine = Discretization::new(&self.disc.curve, 2 * n, ORDER16)?;
        let k2 = self.phys.k2();
        let ops = assemble_pair(&fine, WaveNumber::real(k2), self.phys.k1())?;
        let mu = upsample(&self.mu);
        let sigma = upsample(&self.sigma);
        let (uinc, uninc) = incident_data(k2, &fine, &self.directions);
        let (b1, b2) = (self.phys.b1(), self.phys.b2());
        let half_mu = &mu * C::new(0.5, 0.0);
        let half_sigma = &sigma * C::new(0.5, 0.0);
        let ext = &uinc + (matmul(&ops.d_a, &mu) + &half_mu - matmul(&ops.s_a, &sigma)) / b2;
        let int = (matmul(&ops.d_b, &mu) - &half_mu - matmul(&ops.s_b, &sigma)) / b1;
        // b2 d_n u_ext - b1 d_n u_int
        let flux = &uninc * b2 + matmul(&ops.tdiff, &mu) - matmul(&ops.k_a, &sigma) + matmul(&ops.k_b, &sigma)
            + &half_sigma * C::new(2.0, 0.0);
        let (mut jv, mut jf, mut sv, mut sf) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for c in 0..self.directions.len() {
            for i in (1..2 * n).step_by(2) {
                jv = jv.max((ext[(i, c)] - int[(i, c)]).norm());
                jf = jf.max(flux[(i, c)].norm());
                sv = sv.max(uinc[(i, c)].norm());
                sf = sf.max(uninc[(i, c)].norm());
            }
        }
        Ok((jv / sv, jf / sf))
    }
}

/// Trigonometric interpolation of each column onto a grid of twice the size.
fn upsample(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::zeros(2 * n, m.ncols());
    for c in 0..m.ncols() {
        let mut buf: Vec<C> = m.column(c).iter().cloned().collect();
        crate::fourier::forward(&mut buf);
        let mut big = vec![C::default(); 2 * n];
        for (k, v) in buf.iter().enumerate() {
            let f = crate::fourier::freq(k, n);
            if 2 * k == n {
                // split the Nyquist bin symmetrically
                big[k] = v * 0.5;
                big[2 * n - k] = v * 0.5;
                continue;
            }
            let idx = if f >= 0 { f as usize } else { (2 * n as i64 + f) as usize };
            big[idx] = *v;
        }
        crate::fourier::inverse(&mut big);
        for i in 0..2 * n {
            out[(i, c)] = big[i] / n as f64;
        }
    }
    out
}

/// Which forward model to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ForwardModel {
    Transmission,
    Impedance { params: ImpedanceParams },
    Neumann,
}

/// Receptor field of the selected model, aperture mask applied.
pub fn forward_map(
    model: &ForwardModel,
    curve: &FourierCurve,
    n: usize,
    phys: &PhysicalParams,
    sensors: &SensorGeometry,
) -> Result<ReceptorField, ForwardError> {
    match model {
        ForwardModel::Transmission => Ok(solve_transmission(curve, n, phys, sensors)?.field),
        ForwardModel::Impedance { params } => {
            let samples = curve.sample(n)?;
            let lambda = params.eval(&samples, phys.k2())?;
            Ok(solve_impedance(curve, n, &lambda, phys.k2(), sensors)?.field)
        }
        ForwardModel::Neumann => Ok(solve_impedance(curve, n, &vec![C::default(); n], phys.k2(), sensors)?.field),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upsample_is_exact_for_trig_polynomials() {
        let n = 16;
        let f = |t: f64| C::new((3.0 * t).cos(), (2.0 * t).sin() + 0.5);
        let m = CMatrix::from_fn(n, 1, |i, _| f(2.0 * PI * i as f64 / n as f64));
        let up = upsample(&m);
        for i in 0..2 * n {
            assert!((up[(i, 0)] - f(PI * i as f64 / n as f64)).norm() < 1e-13);
        }
    }

    #[test]
    fn backscatter_density() {
        let s = SensorGeometry::uniform(40, 10.0).with_backscatter(PI / 4.0);
        assert!((s.density() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PhysicalParams::new(1.0, 0.5, 1.0, 1.2, 0.7, -1.0).is_err());
        assert!(PhysicalParams::new(0.0, 0.5, 1.0, 1.2, 0.7, 0.0).is_err());
    }
}
