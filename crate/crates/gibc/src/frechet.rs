//! Derivatives of the impedance forward map with respect to the impedance
//! function and to normal boundary perturbations.
//!
//! Both derivatives are radiating fields `v` with `d_n v + i k lambda v = f` on
//! the boundary, so they reuse the factored impedance system; only the
//! boundary data `f` differs:
//!
//! * impedance: `f = -i k g u`,
//! * domain: `f = k^2 h u + (h u_s)_s - i k lambda h (d_n u + H u)`,
//!
//! with `u` the total field and `s` arc length.

use crate::forward::{ForwardError, ImpedanceSolution};
use crate::fourier;
use crate::geometry::{curvature_frechet, NormalPerturbation};
use crate::linalg::CMatrix;
use crate::models::ImpedanceParams;
use num_complex::Complex64 as C;

const I: C = C::new(0.0, 1.0);

/// Jacobian with rows ordered by (direction, receptor) over unmasked entries.
#[derive(Debug, Clone)]
pub struct JacobianBlock {
    pub matrix: CMatrix,
    pub labels: Vec<String>,
    /// Whether the parameters are complex (the map is holomorphic in them).
    pub complex_params: bool,
}

impl JacobianBlock {
    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<C> {
        self.matrix.column(j).iter().cloned().collect()
    }
}

fn check_len(sol: &ImpedanceSolution, got: usize) -> Result<(), ForwardError> {
    let expected = sol.solver.system.len();
    if got != expected {
        return Err(ForwardError::StaleHandle { got, expected });
    }
    Ok(())
}

/// Receptor values for boundary data given per direction (`n x (p * n_d)`,
/// parameter-major blocks of `n_d` columns), gathered into `p` columns.
fn gather(sol: &ImpedanceSolution, data: &CMatrix, p: usize) -> Result<CMatrix, ForwardError> {
    let rec = sol.solver.solve_boundary_data(data)?;
    let f = &sol.field;
    let rows = f.mask.iter().filter(|&&m| m).count();
    let mut out = CMatrix::zeros(rows, p);
    for q in 0..p {
        let mut r = 0;
        for i in 0..f.n_d {
            for j in 0..f.n_r {
                if f.mask[i * f.n_r + j] {
                    out[(r, q)] = rec[(j, q * f.n_d + i)];
                    r += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Boundary data `-i k g u` for each direction.
fn impedance_data(sol: &ImpedanceSolution, g: &[C], out: &mut CMatrix, block: usize) {
    let k = sol.k2();
    let nd = sol.directions.len();
    for c in 0..nd {
        for i in 0..g.len() {
            out[(i, block * nd + c)] = -I * k * g[i] * sol.total[(i, c)];
        }
    }
}

/// Boundary data of the domain derivative for normal displacement `h`.
fn domain_data(sol: &ImpedanceSolution, h: &[f64], out: &mut CMatrix, block: usize) {
    let samples = sol.samples();
    let k = sol.k2();
    let lam = &sol.solver.lambda;
    let nd = sol.directions.len();
    let n = h.len();
    for c in 0..nd {
        let u: Vec<C> = sol.total.column(c).iter().cloned().collect();
        let du = fourier::derivative_c(&u, samples.length, 1);
        let flux: Vec<C> = (0..n).map(|i| h[i] * du[i] / samples.speed[i]).collect();
        let dflux = fourier::derivative_c(&flux, samples.length, 1);
        for i in 0..n {
            let un = sol.total_dn[(i, c)];
            out[(i, block * nd + c)] = k * k * h[i] * u[i] + dflux[i] / samples.speed[i]
                - I * k * lam[i] * h[i] * (un + samples.curvature[i] * u[i]);
        }
    }
}

/// Derivative of the receptor data in the impedance direction `g`.
pub fn dlambda_forward(sol: &ImpedanceSolution, g: &[C]) -> Result<Vec<C>, ForwardError> {
    check_len(sol, g.len())?;
    let mut data = CMatrix::zeros(g.len(), sol.directions.len());
    impedance_data(sol, g, &mut data, 0);
    Ok(gather(sol, &data, 1)?.column(0).iter().cloned().collect())
}

/// Derivative of the receptor data for the normal displacement `h` with `lambda` held fixed.
pub fn dgamma_forward(sol: &ImpedanceSolution, h: &[f64]) -> Result<Vec<C>, ForwardError> {
    check_len(sol, h.len())?;
    let mut data = CMatrix::zeros(h.len(), sol.directions.len());
    domain_data(sol, h, &mut data, 0);
    Ok(gather(sol, &data, 1)?.column(0).iter().cloned().collect())
}

/// Jacobian for the normal-perturbation basis of order `order`. For
/// curvature-dependent models each column includes the change of `lambda`
/// through the curvature.
pub fn domain_jacobian(
    sol: &ImpedanceSolution,
    params: &ImpedanceParams,
    order: usize,
) -> Result<JacobianBlock, ForwardError> {
    let samples = sol.samples();
    let n = samples.len();
    let nd = sol.directions.len();
    let p = 2 * order + 1;
    let slope = params.curvature_slope(sol.k2());
    let chain = params.depends_on_curvature() && slope != C::default();
    let curve = &sol.solver.system.disc.curve;
    let mut data = CMatrix::zeros(n, p * nd);
    let mut extra = CMatrix::zeros(n, p * nd);
    for j in 0..p {
        let h = NormalPerturbation::basis(order, j).eval(&samples.s, samples.length);
        domain_data(sol, &h, &mut data, j);
        if chain {
            let dh = curvature_frechet(curve, &h)?;
            let g: Vec<C> = dh.iter().map(|v| slope * v).collect();
            impedance_data(sol, &g, &mut extra, j);
        }
    }
    if chain {
        data += extra;
    }
    let labels = (0..p)
        .map(|j| match j {
            0 => "a0".to_string(),
            j if j <= order => format!("a{j}"),
            j => format!("b{}", j - order),
        })
        .collect();
    Ok(JacobianBlock { matrix: gather(sol, &data, p)?, labels, complex_params: false })
}

/// Jacobian with respect to the impedance-model parameters.
pub fn impedance_jacobian(sol: &ImpedanceSolution, params: &ImpedanceParams) -> Result<JacobianBlock, ForwardError> {
    let parts = params.partials(sol.samples(), sol.k2())?;
    let n = sol.samples().len();
    let nd = sol.directions.len();
    let mut data = CMatrix::zeros(n, parts.len() * nd);
    for (j, g) in parts.iter().enumerate() {
        impedance_data(sol, g, &mut data, j);
    }
    let labels = (0..parts.len()).map(|j| format!("{}[{j}]", params.name())).collect();
    Ok(JacobianBlock { matrix: gather(sol, &data, parts.len())?, labels, complex_params: params.is_complex() })
}
