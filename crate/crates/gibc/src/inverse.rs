//! Alternating shape/impedance minimization at one frequency and the
//! continuation-in-frequency driver.

use crate::forward::{ForwardError, ImpedanceSolution, ImpedanceSystem, ReceptorField};
use crate::frechet::{domain_jacobian, impedance_jacobian, JacobianBlock};
use crate::geometry::{apply_normal_update, constraint_check, FourierCurve, GeometryError, NormalPerturbation};
use crate::harness::{FrequencyData, ScatteringDataset};
use crate::models::{ImpedanceParams, ModelError};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InverseError {
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("measured data are identically zero")]
    ZeroData,
    #[error("measured and predicted data have different layouts")]
    Layout,
    #[error("frequencies must be strictly increasing")]
    Unordered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    GaussNewton,
    SteepestDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    StepLength,
    Gaussian,
}

/// Optimizer settings. Discretization policies depend on the frequency and
/// the current curve length `L`:
/// `N_gamma = floor(omega L / (c_2 pi))`, `M = N_gamma`, `N_c = N_gamma / 2`,
/// `N = max(ceil(5 omega L / (c_2 pi)), min_nodes)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub eps_r: f64,
    pub eps_s_gamma: f64,
    pub eps_s_lambda: f64,
    pub eps_s_r: f64,
    pub max_iter: usize,
    pub eta_filt: f64,
    pub sigma_filt: f64,
    pub n_filt: usize,
    pub c_h: f64,
    pub min_nodes: usize,
    pub impedance_direction: Direction,
    /// Condition ceiling for Gauss-Newton impedance steps.
    pub gn_condition_limit: f64,
    /// Fit a constant impedance at the first frequency before the chosen model.
    pub constant_bootstrap: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            eps_r: 1e-4,
            eps_s_gamma: 1e-4,
            eps_s_lambda: 1e-4,
            eps_s_r: 1e-4,
            max_iter: 40,
            eta_filt: 8.0,
            sigma_filt: 0.1,
            n_filt: 3,
            c_h: 0.9,
            min_nodes: 300,
            impedance_direction: Direction::SteepestDescent,
            gn_condition_limit: 1e8,
            constant_bootstrap: false,
        }
    }
}

impl OptimizerConfig {
    pub fn n_gamma(&self, omega: f64, length: f64, c2: f64) -> usize {
        (omega * length / (c2 * PI)).floor() as usize
    }

    pub fn m_band(&self, omega: f64, length: f64, c2: f64) -> usize {
        self.n_gamma(omega, length, c2)
    }

    pub fn n_c(&self, omega: f64, length: f64, c2: f64) -> usize {
        self.n_gamma(omega, length, c2) / 2
    }

    pub fn nodes(&self, omega: f64, length: f64, c2: f64) -> usize {
        ((5.0 * omega * length / (c2 * PI)).ceil() as usize).max(self.min_nodes)
    }

    /// Highest curve order the node count resolves.
    pub fn max_curve_order(&self, nodes: usize) -> usize {
        (nodes - 1) / 2
    }
}

/// `sqrt(sum |u_meas - u|^2 / sum |u_meas|^2)` over unmasked entries.
pub fn relative_residual(meas: &ReceptorField, pred: &ReceptorField) -> Result<f64, InverseError> {
    if meas.mask != pred.mask {
        return Err(InverseError::Layout);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for ((m, p), &on) in meas.values.iter().zip(&pred.values).zip(&meas.mask) {
        if on {
            num += (m - p).norm_sqr();
            den += m.norm_sqr();
        }
    }
    if den == 0.0 {
        return Err(InverseError::ZeroData);
    }
    Ok((num / den).sqrt())
}

/// Real least-squares form of a complex Jacobian. Real parameters give
/// `[Re J; Im J]`; complex parameters `x = [Re p; Im p]` give
/// `[Re J, -Im J; Im J, Re J]`.
pub fn stacked_jacobian(j: &JacobianBlock) -> DMatrix<f64> {
    let (m, p) = (j.matrix.nrows(), j.matrix.ncols());
    if j.complex_params {
        DMatrix::from_fn(2 * m, 2 * p, |r, c| {
            let v = j.matrix[(r % m, c % p)];
            match (r < m, c < p) {
                (true, true) => v.re,
                (true, false) => -v.im,
                (false, true) => v.im,
                (false, false) => v.re,
            }
        })
    } else {
        DMatrix::from_fn(2 * m, p, |r, c| {
            let v = j.matrix[(r % m, c)];
            if r < m {
                v.re
            } else {
                v.im
            }
        })
    }
}

pub fn stacked_vector(r: &[C]) -> DVector<f64> {
    let m = r.len();
    DVector::from_fn(2 * m, |i, _| if i < m { r[i].re } else { r[i - m].im })
}

/// Descent direction and initial step scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentStep {
    pub direction: Vec<f64>,
    pub scale: f64,
    /// Gauss-Newton was requested but the system was rank deficient.
    pub fallback: bool,
}

impl DescentStep {
    pub fn step(&self) -> Vec<f64> {
        self.direction.iter().map(|v| v * self.scale).collect()
    }
}

/// Gauss-Newton (least-squares solution of `J w = -r`, scale 1) or steepest
/// descent (`-J^T r` with the Cauchy scale `|g|^2 / |J g|^2`).
pub fn descent_direction(kind: Direction, j: &DMatrix<f64>, r: &DVector<f64>) -> DescentStep {
    let g = j.transpose() * r;
    if kind == Direction::GaussNewton {
        let svd = j.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smax > 0.0 && smin > 1e-12 * smax {
            if let Ok(w) = svd.solve(&(-r), 0.0) {
                return DescentStep { direction: w.iter().cloned().collect(), scale: 1.0, fallback: false };
            }
        }
        let mut sd = descent_direction(Direction::SteepestDescent, j, r);
        sd.fallback = true;
        return sd;
    }
    let jg = j * &g;
    let den = jg.norm_squared();
    let scale = if den > 0.0 { g.norm_squared() / den } else { 0.0 };
    DescentStep { direction: g.iter().map(|v| -v).collect(), scale, fallback: false }
}

/// Diagonal low-pass filter `exp(-m^2 / (sigma^2 N^2))` on `[a_0, a_1..a_N, b_1..b_N]`.
pub fn gaussian_filter(w: &[f64], sigma: f64) -> Vec<f64> {
    let n = (w.len() - 1) / 2;
    if n == 0 {
        return w.to_vec();
    }
    let f = |m: usize| (-((m * m) as f64) / (sigma * sigma * (n * n) as f64)).exp();
    w.iter()
        .enumerate()
        .map(|(i, v)| {
            let m = if i <= n { i } else { i - n };
            v * f(m)
        })
        .collect()
}

/// Outcome of step filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered<T> {
    pub step: Vec<f64>,
    pub n_filt: usize,
    /// Accepted candidate and its value, `None` for the zero step.
    pub accepted: Option<T>,
}

/// Tries `filter^n(w)` for `n = 0..=n_filt` and returns the first candidate the
/// predicate accepts; otherwise the zero step.
pub fn filter_step<T>(
    kind: FilterKind,
    w: &[f64],
    eta: f64,
    sigma: f64,
    n_filt: usize,
    mut accept: impl FnMut(&[f64]) -> Option<T>,
) -> Filtered<T> {
    for n in 0..=n_filt {
        let cand: Vec<f64> = match kind {
            FilterKind::StepLength => w.iter().map(|v| v / eta.powi(n as i32)).collect(),
            FilterKind::Gaussian => gaussian_filter(w, sigma.powi(n as i32)),
        };
        if let Some(t) = accept(&cand) {
            return Filtered { step: cand, n_filt: n, accepted: Some(t) };
        }
    }
    Filtered { step: vec![0.0; w.len()], n_filt, accepted: None }
}

/// One iteration's log record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub frequency: f64,
    pub iteration: usize,
    pub residual: f64,
    pub step_kind: String,
    pub n_filt: usize,
    pub simple: bool,
    pub energy_ok: bool,
    pub impedance_feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Residual,
    Stagnation,
    MaxIterations,
    NoProgress,
}

/// Iterate of the inversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InversionState {
    pub curve: FourierCurve,
    /// `None` is the sound-hard model (`lambda = 0`, nothing to fit).
    pub params: Option<ImpedanceParams>,
    pub omega: f64,
    pub frequency_index: usize,
    pub residuals: Vec<f64>,
    pub log: Vec<IterationRecord>,
    pub stop: Option<StopReason>,
    /// Lower bound on the admissibility band, for domains already resolved
    /// at a higher frequency.
    #[serde(default)]
    pub min_band: usize,
}

impl InversionState {
    pub fn new(curve: FourierCurve, params: Option<ImpedanceParams>) -> Self {
        Self {
            curve,
            params,
            omega: 0.0,
            frequency_index: 0,
            residuals: Vec::new(),
            log: Vec::new(),
            stop: None,
            min_band: 0,
        }
    }

    pub fn residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }
}

/// Forward evaluation at the current iterate.
pub struct Evaluation {
    pub sol: ImpedanceSolution,
    pub residual: f64,
}

fn lambda_of(params: &Option<ImpedanceParams>, sys: &ImpedanceSystem) -> Result<Vec<C>, InverseError> {
    Ok(match params {
        Some(p) => p.eval(&sys.disc.samples, sys.k2)?,
        None => vec![C::default(); sys.len()],
    })
}

fn evaluate_on(
    sys: &Arc<ImpedanceSystem>,
    params: &Option<ImpedanceParams>,
    data: &FrequencyData,
) -> Result<Evaluation, InverseError> {
    let lambda = lambda_of(params, sys)?;
    let sol = sys.factor(&lambda)?.scatter(&data.sensors.directions, &data.sensors.mask);
    let residual = relative_residual(&data.field, &sol.field)?;
    Ok(Evaluation { sol, residual })
}

/// Solves the impedance problem for `curve` and `params` against `data`.
pub fn evaluate(
    curve: &FourierCurve,
    params: &Option<ImpedanceParams>,
    data: &FrequencyData,
    c2: f64,
    config: &OptimizerConfig,
) -> Result<Evaluation, InverseError> {
    let n = config.nodes(data.omega, curve.length, c2);
    let sys = Arc::new(ImpedanceSystem::new(curve, n, data.omega / c2, &data.sensors.receptors)?);
    evaluate_on(&sys, params, data)
}

fn residual_vector(eval: &Evaluation, data: &FrequencyData) -> Vec<C> {
    let pred = eval.sol.field.active();
    let meas = data.field.active();
    pred.iter().zip(&meas).map(|(p, m)| p - m).collect()
}

fn rel_change(new: &[f64], old: &[f64]) -> f64 {
    let d: f64 = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let o: f64 = old.iter().map(|a| a * a).sum::<f64>().sqrt();
    d / o.max(1e-14)
}

fn params_real(p: &Option<ImpedanceParams>) -> Vec<f64> {
    match p {
        Some(p) => p.params().iter().flat_map(|c| [c.re, c.im]).collect(),
        None => Vec::new(),
    }
}

fn curve_vector(c: &FourierCurve) -> Vec<f64> {
    c.a1.iter().chain(&c.b1).chain(&c.a2).chain(&c.b2).cloned().collect()
}

/// Result of a domain step.
pub struct DomainOutcome {
    pub curve: FourierCurve,
    pub eval: Evaluation,
    pub kind: String,
    pub n_filt: usize,
    pub step_norm: f64,
}

/// Shape update with `lambda` fixed: Gauss-Newton and steepest-descent
/// directions, each filtered by step length and by Gaussian smoothing; the
/// candidate with the smallest residual wins. Candidates must satisfy the
/// curve constraints and must not increase the residual.
pub fn domain_step(
    curve: &FourierCurve,
    params: &Option<ImpedanceParams>,
    current: &Evaluation,
    data: &FrequencyData,
    c2: f64,
    config: &OptimizerConfig,
    min_band: usize,
) -> Result<Option<DomainOutcome>, InverseError> {
    let omega = data.omega;
    let order = config.n_gamma(omega, curve.length, c2);
    let none = ImpedanceParams::Constant { c: C::default() };
    let jac = domain_jacobian(&current.sol, params.as_ref().unwrap_or(&none), order)?;
    let j = stacked_jacobian(&jac);
    let r = stacked_vector(&residual_vector(current, data));
    let dirs = [
        ("gn", descent_direction(Direction::GaussNewton, &j, &r)),
        ("sd", descent_direction(Direction::SteepestDescent, &j, &r)),
    ];
    let max_order = config.max_curve_order(config.nodes(omega, curve.length, c2));
    let m_band = config.m_band(omega, curve.length, c2).max(min_band);
    let r0 = current.residual;
    let mut best: Option<DomainOutcome> = None;
    for (dname, d) in &dirs {
        let w = d.step();
        if w.iter().all(|v| *v == 0.0) || w.iter().any(|v| !v.is_finite()) {
            continue;
        }
        for (fname, kind) in [("sf", FilterKind::StepLength), ("gf", FilterKind::Gaussian)] {
            let out = filter_step(kind, &w, config.eta_filt, config.sigma_filt, config.n_filt, |cand| {
                let np = NormalPerturbation { coeffs: cand.to_vec() };
                let moved = apply_normal_update(curve, &np, max_order).ok()?;
                if !constraint_check(&moved, m_band, config.c_h).ok()?.ok() {
                    return None;
                }
                let ev = evaluate(&moved, params, data, c2, config).ok()?;
                (ev.residual <= r0).then_some((moved, ev))
            });
            if let Some((moved, ev)) = out.accepted {
                let better = best.as_ref().is_none_or(|b| ev.residual < b.eval.residual);
                if better {
                    let step_norm = out.step.iter().map(|v| v * v).sum::<f64>().sqrt();
                    best = Some(DomainOutcome {
                        curve: moved,
                        eval: ev,
                        kind: format!("{dname}-{fname}"),
                        n_filt: out.n_filt,
                        step_norm,
                    });
                }
            }
        }
    }
    Ok(best)
}

/// Result of an impedance step.
pub struct ImpedanceOutcome {
    pub params: ImpedanceParams,
    pub eval: Evaluation,
    pub n_filt: usize,
    pub kind: String,
}

fn params_from_real(template: &ImpedanceParams, x: &[f64]) -> Result<ImpedanceParams, ModelError> {
    let p = template.params().len();
    let v: Vec<C> = if template.is_complex() {
        (0..p).map(|i| C::new(x[i], x[p + i])).collect()
    } else {
        x.iter().map(|&v| C::new(v, 0.0)).collect()
    };
    template.with_params(&v)
}

fn real_of(params: &ImpedanceParams) -> Vec<f64> {
    let v = params.params();
    if params.is_complex() {
        v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)).collect()
    } else {
        v.iter().map(|c| c.re).collect()
    }
}

/// Impedance update with the curve fixed: projected steepest descent with the
/// Cauchy step and step-length backoff `proj(p - d g / eta^n)`. FS parameters
/// are unconstrained. A Gauss-Newton direction is tried first when configured
/// and the Jacobian condition number is within the guard; if none of its
/// backoffs is accepted the steepest-descent step is tried.
pub fn impedance_step(
    params: &ImpedanceParams,
    current: &Evaluation,
    data: &FrequencyData,
    config: &OptimizerConfig,
) -> Result<Option<ImpedanceOutcome>, InverseError> {
    let jac = impedance_jacobian(&current.sol, params)?;
    let j = stacked_jacobian(&jac);
    let r = stacked_vector(&residual_vector(current, data));
    let mut tries = Vec::new();
    let mut sd_kind = "sd";
    if config.impedance_direction == Direction::GaussNewton {
        let svd = j.clone().svd(false, false);
        let cond = svd.singular_values.max() / svd.singular_values.min();
        if cond.is_finite() && cond <= config.gn_condition_limit {
            let gn = descent_direction(Direction::GaussNewton, &j, &r);
            if !gn.fallback {
                tries.push(("gn", gn));
            }
        } else {
            sd_kind = "sd-guard";
        }
    }
    tries.push((sd_kind, descent_direction(Direction::SteepestDescent, &j, &r)));
    let base = real_of(params);
    let sys = Arc::clone(&current.sol.solver.system);
    let r0 = current.residual;
    for (kind, d) in tries {
        let step = d.step();
        if step.iter().all(|v| *v == 0.0) || step.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let out = filter_step(FilterKind::StepLength, &step, config.eta_filt, config.sigma_filt, config.n_filt, |cand| {
            let x: Vec<f64> = base.iter().zip(cand).map(|(a, b)| a + b).collect();
            let trial = params_from_real(params, &x).ok()?.project();
            let ev = evaluate_on(&sys, &Some(trial.clone()), data).ok()?;
            (ev.residual <= r0).then_some((trial, ev))
        });
        if let Some((params, eval)) = out.accepted {
            return Ok(Some(ImpedanceOutcome { params, eval, n_filt: out.n_filt, kind: kind.to_string() }));
        }
    }
    Ok(None)
}

/// Alternates domain and impedance steps until the residual, stagnation or
/// iteration criteria are met. The residual never increases.
pub fn solve_single_frequency(
    mut state: InversionState,
    data: &FrequencyData,
    c2: f64,
    config: &OptimizerConfig,
) -> Result<InversionState, InverseError> {
    state.omega = data.omega;
    state.stop = None;
    let mut eval = evaluate(&state.curve, &state.params, data, c2, config)?;
    state.residuals.push(eval.residual);
    for iter in 0..config.max_iter {
        if eval.residual <= config.eps_r {
            state.stop = Some(StopReason::Residual);
            return Ok(state);
        }
        let r_old = eval.residual;
        let curve_old = curve_vector(&state.curve);
        let p_old = params_real(&state.params);
        let mut kinds = Vec::new();
        let mut n_filt = 0;
        let mut moved = 0.0;
        if let Some(out) = domain_step(&state.curve, &state.params, &eval, data, c2, config, state.min_band)? {
            moved = out.step_norm / curve_old.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-14);
            state.curve = out.curve;
            eval = out.eval;
            kinds.push(out.kind);
            n_filt = out.n_filt;
        }
        if let Some(p) = state.params.clone() {
            if let Some(out) = impedance_step(&p, &eval, data, config)? {
                state.params = Some(out.params);
                eval = out.eval;
                kinds.push(format!("imp-{}", out.kind));
            }
        }
        state.residuals.push(eval.residual);
        let m_band = config.m_band(data.omega, state.curve.length, c2).max(state.min_band);
        let rep = constraint_check(&state.curve, m_band, config.c_h)?;
        state.log.push(IterationRecord {
            frequency: data.omega,
            iteration: iter + 1,
            residual: eval.residual,
            step_kind: if kinds.is_empty() { "none".into() } else { kinds.join("+") },
            n_filt,
            simple: rep.simple,
            energy_ok: rep.energy_ok,
            impedance_feasible: state.params.as_ref().is_none_or(|p| p.is_feasible()),
        });
        if kinds.is_empty() {
            state.stop = Some(StopReason::NoProgress);
            return Ok(state);
        }
        let dp = rel_change(&params_real(&state.params), &p_old);
        let dr = (r_old - eval.residual).abs() / r_old.max(1e-14);
        if moved < config.eps_s_gamma && dp < config.eps_s_lambda && dr < config.eps_s_r {
            state.stop = Some(StopReason::Stagnation);
            return Ok(state);
        }
    }
    state.stop = Some(if eval.residual <= config.eps_r { StopReason::Residual } else { StopReason::MaxIterations });
    Ok(state)
}

/// Solution at one frequency of the continuation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyResult {
    pub omega: f64,
    pub curve: FourierCurve,
    pub params: Option<ImpedanceParams>,
    pub residual: f64,
    pub iterations: usize,
    pub stop: Option<StopReason>,
    pub error: Option<String>,
}

/// Full continuation output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub results: Vec<FrequencyResult>,
    pub log: Vec<IterationRecord>,
    /// Constant-impedance pass whose final domain seeded `results`.
    #[serde(default)]
    pub bootstrap: Option<Vec<FrequencyResult>>,
}

/// Runs the single-frequency solver over ascending frequencies with warm
/// starts. ABV `beta_1` is rescaled by `omega_{j-1} / omega_j` and FS
/// coefficients are resized to `2 N_c(omega_j) + 1` between frequencies.
///
/// With `constant_bootstrap`, a full constant-impedance continuation runs
/// first and its final domain becomes the initial domain of the requested model;
/// the restart keeps the admissibility band of the last bootstrap frequency.
pub fn continuation_solve(
    data: &ScatteringDataset,
    init: InversionState,
    config: &OptimizerConfig,
    mut progress: impl FnMut(&FrequencyResult),
) -> Result<Trajectory, InverseError> {
    let freqs = &data.frequencies;
    if freqs.windows(2).any(|w| w[1].omega <= w[0].omega) {
        return Err(InverseError::Unordered);
    }
    let wants_bootstrap =
        config.constant_bootstrap && !matches!(init.params, None | Some(ImpedanceParams::Constant { .. }));
    if !wants_bootstrap {
        return continue_from(data, init, config, &mut progress);
    }
    let c0 = C::new(1.0, 0.0);
    let pre = InversionState::new(init.curve.clone(), Some(ImpedanceParams::Constant { c: c0 }));
    let first = continue_from(data, pre, config, &mut progress)?;
    let (curve, min_band) = match first.results.last() {
        Some(r) => (r.curve.clone(), config.m_band(r.omega, r.curve.length, data.provenance.physical.c2)),
        None => (init.curve.clone(), 0),
    };
    let mut out = continue_from(data, InversionState { curve, min_band, ..init }, config, &mut progress)?;
    let mut log = first.log;
    log.append(&mut out.log);
    out.log = log;
    out.bootstrap = Some(first.results);
    Ok(out)
}

fn continue_from(
    data: &ScatteringDataset,
    init: InversionState,
    config: &OptimizerConfig,
    progress: &mut impl FnMut(&FrequencyResult),
) -> Result<Trajectory, InverseError> {
    let c2 = data.provenance.physical.c2;
    let mut state = init;
    let mut out = Trajectory { results: Vec::new(), log: Vec::new(), bootstrap: None };
    let mut prev_omega: Option<f64> = None;
    for (idx, fd) in data.frequencies.iter().enumerate() {
        if let Some(p) = state.params.as_ref() {
            let n_c = config.n_c(fd.omega, state.curve.length, c2);
            state.params = Some(p.transported(prev_omega.unwrap_or(fd.omega), fd.omega, n_c));
        }
        state.frequency_index = idx;
        state.residuals.clear();
        let start_log = state.log.len();
        let result = match solve_single_frequency(state.clone(), fd, c2, config) {
            Ok(s) => {
                state = s;
                FrequencyResult {
                    omega: fd.omega,
                    curve: state.curve.clone(),
                    params: state.params.clone(),
                    residual: state.residual().unwrap_or(f64::NAN),
                    iterations: state.log.len() - start_log,
                    stop: state.stop,
                    error: None,
                }
            }
            Err(e) => FrequencyResult {
                omega: fd.omega,
                curve: state.curve.clone(),
                params: state.params.clone(),
                residual: f64::NAN,
                iterations: 0,
                stop: None,
                error: Some(e.to_string()),
            },
        };
        progress(&result);
        out.results.push(result);
        prev_omega = Some(fd.omega);
    }
    out.log = state.log;
    Ok(out)
}
