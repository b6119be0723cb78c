//! Synthetic experiments: configuration, sensors, data generation with noise,
//! initial guesses and error reports.

use crate::forward::{forward_map, ForwardError, ForwardModel, PhysicalParams, ReceptorField, SensorGeometry};
use crate::geometry::{
    constraint_check, reparameterize_arclength, symmetric_difference_area, FourierCurve, GeometryError,
};
use crate::inverse::{FrequencyResult, InversionState, OptimizerConfig, Trajectory};
use crate::models::{physical_from_beta, ImpedanceParams};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("empty trajectory")]
    EmptyTrajectory,
}

/// Material constants; `delta` is given relative to `delta_0 = sqrt(3) k2max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    pub c1: f64,
    pub c2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub delta_over_delta0: f64,
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self { c1: 0.5, c2: 1.0, rho1: 1.2, rho2: 0.7, delta_over_delta0: 1.0 }
    }
}

/// Named obstacles. Radial shapes are `r(t) = 1 + ...` around `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    Starfish {
        petals: usize,
        amplitude: f64,
    },
    RandomFourier {
        seed: u64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_rf_amplitude")]
        amplitude: f64,
    },
    /// `r(t) = 1 + 0.3 cos 2t`, pinched along the `y` axis.
    Dumbbell,
    /// A `FourierCurve` stored as JSON.
    File {
        path: PathBuf,
    },
}

fn default_modes() -> usize {
    5
}

fn default_rf_amplitude() -> f64 {
    0.15
}

const SHAPE_SAMPLES: usize = 512;
const SHAPE_ORDER: usize = 60;

fn radial_curve(r: impl Fn(f64) -> f64) -> Result<FourierCurve, GeometryError> {
    let pts: Vec<[f64; 2]> = (0..SHAPE_SAMPLES)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / SHAPE_SAMPLES as f64;
            let rr = r(t);
            [rr * t.cos(), rr * t.sin()]
        })
        .collect();
    let fit = FourierCurve::fit(&pts, 2.0 * PI, SHAPE_ORDER).trimmed(1e-15);
    reparameterize_arclength(&fit, SHAPE_ORDER)
}

impl ShapeSpec {
    pub fn curve(&self) -> Result<FourierCurve, HarnessError> {
        Ok(match self {
            Self::Circle { radius, center } => FourierCurve::circle(*radius, *center),
            Self::Ellipse { a, b } => {
                let pts: Vec<[f64; 2]> = (0..SHAPE_SAMPLES)
                    .map(|j| {
                        let t = 2.0 * PI * j as f64 / SHAPE_SAMPLES as f64;
                        [a * t.cos(), b * t.sin()]
                    })
                    .collect();
                reparameterize_arclength(&FourierCurve::fit(&pts, 2.0 * PI, SHAPE_ORDER), SHAPE_ORDER)?
            }
            Self::Starfish { petals, amplitude } => {
                let (n, a) = (*petals as f64, *amplitude);
                radial_curve(|t| 1.0 + a * (n * t).cos())?
            }
            Self::RandomFourier { seed, modes, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let coef: Vec<(f64, f64)> = (2..=*modes)
                    .map(|m| {
                        let s = amplitude / (m * m) as f64;
                        (s * (2.0 * rng.random::<f64>() - 1.0), s * (2.0 * rng.random::<f64>() - 1.0))
                    })
                    .collect();
                radial_curve(|t| {
                    1.0 + coef
                        .iter()
                        .enumerate()
                        .map(|(i, (a, b))| {
                            let m = (i + 2) as f64;
                            a * (m * t).cos() + b * (m * t).sin()
                        })
                        .sum::<f64>()
                })?
            }
            Self::Dumbbell => radial_curve(|t| 1.0 + 0.3 * (2.0 * t).cos())?,
            Self::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
                let c: FourierCurve =
                    serde_json::from_str(&text).map_err(|source| HarnessError::Parse { path: path.clone(), source })?;
                c.validate()?;
                c
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Aperture {
    Full,
    /// Receptors within a total opening `alpha` around the backscatter direction.
    Backscatter { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Abv,
    Ch,
    Fs,
    Constant,
    Neumann,
}

/// Impedance model used by the inversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Overrides the neutral starting parameters.
    #[serde(default)]
    pub initial: Option<ImpedanceParams>,
}

/// Experiment description read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub k2max: u32,
    #[serde(default)]
    pub physical: PhysicalConfig,
    pub shape: ShapeSpec,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "default_aperture")]
    pub aperture: Aperture,
    /// Points per wavelength of the data-generating discretization.
    #[serde(default = "default_ppw")]
    pub ppw: f64,
    #[serde(default = "default_data_model")]
    pub data_model: ForwardModel,
    #[serde(default = "default_model")]
    pub model: ModelConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_radius")]
    pub receptor_radius: f64,
    /// Sensors per unit of `omega / c_2`.
    #[serde(default = "default_sensor_density")]
    pub sensor_density: f64,
}

fn default_aperture() -> Aperture {
    Aperture::Full
}

fn default_ppw() -> f64 {
    20.0
}

fn default_data_model() -> ForwardModel {
    ForwardModel::Transmission
}

fn default_model() -> ModelConfig {
    ModelConfig { kind: ModelKind::Abv, initial: None }
}

fn default_radius() -> f64 {
    10.0
}

fn default_sensor_density() -> f64 {
    10.0
}

/// Minimum node count of the data discretization.
pub const DATA_MIN_NODES: usize = 600;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let c: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.k2max == 0 {
            return bad("k2max must be at least 1".into());
        }
        let p = &self.physical;
        for (name, v) in [("c1", p.c1), ("c2", p.c2), ("rho1", p.rho1), ("rho2", p.rho2)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("physical.{name} must be positive"));
            }
        }
        if !(p.delta_over_delta0 >= 0.0 && p.delta_over_delta0.is_finite()) {
            return bad("physical.delta_over_delta0 must be nonnegative".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be nonnegative".into());
        }
        if let Aperture::Backscatter { alpha } = self.aperture {
            if !(alpha > 0.0 && alpha <= 2.0 * PI) {
                return bad("aperture.alpha must lie in (0, 2 pi]".into());
            }
        }
        if !(self.ppw > 0.0) || !(self.receptor_radius > 0.0) || !(self.sensor_density > 0.0) {
            return bad("ppw, receptor_radius and sensor_density must be positive".into());
        }
        let o = &self.optimizer;
        if !(o.eta_filt > 1.0) || !(o.sigma_filt > 0.0) || !(o.c_h >= 0.0 && o.c_h <= 1.0) {
            return bad("optimizer needs eta_filt > 1, sigma_filt > 0 and c_h in [0, 1]".into());
        }
        Ok(())
    }

    /// `delta_0 = sqrt(3) k2max`.
    pub fn delta0(&self) -> f64 {
        3f64.sqrt() * self.k2max as f64
    }

    pub fn physical_at(&self, omega: f64) -> PhysicalParams {
        let p = &self.physical;
        PhysicalParams {
            omega,
            c1: p.c1,
            c2: p.c2,
            rho1: p.rho1,
            rho2: p.rho2,
            delta: p.delta_over_delta0 * self.delta0(),
        }
    }

    /// `omega_j = c_2 (1 + (j - 1)/2)` for `j = 1..=2 k2max + 1`.
    pub fn frequencies(&self) -> Vec<f64> {
        frequency_schedule(self.k2max, self.physical.c2)
    }

    pub fn sensors(&self, omega: f64) -> SensorGeometry {
        build_sensors(omega, self.physical.c2, self.receptor_radius, self.sensor_density, self.aperture)
    }
}

pub fn frequency_schedule(k2max: u32, c2: f64) -> Vec<f64> {
    (0..2 * k2max as usize + 1).map(|j| c2 * (1.0 + j as f64 / 2.0)).collect()
}

/// `N_d = N_r = floor(density omega / c_2)` sensors on uniform angles.
pub fn build_sensors(omega: f64, c2: f64, radius: f64, density: f64, aperture: Aperture) -> SensorGeometry {
    // the nudge keeps exact products such as 10 * 1.0 from flooring down
    let count = ((density * omega / c2) * (1.0 + 1e-12)).floor().max(1.0) as usize;
    let s = SensorGeometry::uniform(count, radius);
    match aperture {
        Aperture::Full => s,
        Aperture::Backscatter { alpha } => s.with_backscatter(alpha),
    }
}

/// Measurements at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyData {
    pub omega: f64,
    pub sensors: SensorGeometry,
    pub field: ReceptorField,
    /// Noise scale `sigma max |F|` used at this frequency.
    #[serde(default)]
    pub noise_scale: f64,
    /// Nodes of the generating discretization.
    #[serde(default)]
    pub nodes: usize,
}

/// How a dataset was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub data_model: ForwardModel,
    pub ppw: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Material parameters; `omega` is that of the first frequency.
    pub physical: PhysicalParams,
    pub truth: FourierCurve,
    #[serde(default)]
    pub config: Option<ExperimentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringDataset {
    pub frequencies: Vec<FrequencyData>,
    pub provenance: Provenance,
    /// Frequencies at which the forward solve failed.
    #[serde(default)]
    pub failures: Vec<(f64, String)>,
}

impl ScatteringDataset {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dataset serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Keeps the first `count` frequencies.
    pub fn truncated(&self, count: usize) -> Self {
        let mut d = self.clone();
        d.frequencies.truncate(count);
        d
    }
}

/// Data discretization: `ppw` points per shortest wavelength along the curve.
pub fn data_nodes(curve: &FourierCurve, phys: &PhysicalParams, model: &ForwardModel, ppw: f64) -> usize {
    let k = match model {
        ForwardModel::Transmission => phys.k1().0.norm().max(phys.k2()),
        _ => phys.k2(),
    };
    let n = (ppw * k * curve.length / (2.0 * PI)).ceil() as usize;
    n.max(DATA_MIN_NODES).max(curve.resolving_nodes())
}

/// Adds `scale (N(0,1) + i N(0,1))` to every unmasked entry and returns the scale.
pub fn add_noise(field: &mut ReceptorField, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    let max = field.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = sigma * max;
    if sigma == 0.0 {
        return 0.0;
    }
    for (v, &on) in field.values.iter_mut().zip(&field.mask) {
        if on {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += scale * C::new(re, im);
        }
    }
    scale
}

/// Synthetic measurements for every scheduled frequency.
pub fn generate_data(
    truth: &FourierCurve,
    config: &ExperimentConfig,
    mut progress: impl FnMut(f64),
) -> Result<ScatteringDataset, HarnessError> {
    config.validate()?;
    if !crate::geometry::is_simple(truth) {
        return Err(HarnessError::Config("truth curve is not simple".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let freqs = config.frequencies();
    let mut out = Vec::with_capacity(freqs.len());
    let mut failures = Vec::new();
    for &omega in &freqs {
        progress(omega);
        let phys = config.physical_at(omega);
        let sensors = config.sensors(omega);
        let n = data_nodes(truth, &phys, &config.data_model, config.ppw);
        match forward_map(&config.data_model, truth, n, &phys, &sensors) {
            Ok(mut field) => {
                let noise_scale = add_noise(&mut field, config.noise_sigma, &mut rng);
                out.push(FrequencyData { omega, sensors, field, noise_scale, nodes: n });
            }
            Err(e) => failures.push((omega, e.to_string())),
        }
    }
    Ok(ScatteringDataset {
        frequencies: out,
        provenance: Provenance {
            data_model: config.data_model.clone(),
            ppw: config.ppw,
            noise_sigma: config.noise_sigma,
            seed: config.seed,
            physical: config.physical_at(freqs[0]),
            truth: truth.clone(),
            config: Some(config.clone()),
        },
        failures,
    })
}

/// Neutral starting parameters for a model at the first frequency.
pub fn neutral_params(kind: ModelKind, n_c: usize) -> Option<ImpedanceParams> {
    let one = C::new(1.0, 0.0);
    match kind {
        ModelKind::Abv => Some(ImpedanceParams::Abv { beta: [1.0, 1.0, 1.0] }),
        ModelKind::Ch => Some(ImpedanceParams::Ch { alpha: [one, C::default()] }),
        ModelKind::Fs => Some(ImpedanceParams::Fs { c: vec![C::default(); 2 * n_c + 1] }),
        ModelKind::Constant => Some(ImpedanceParams::Constant { c: one }),
        ModelKind::Neumann => None,
    }
}

/// Unit circle at the receptor centroid with neutral impedance parameters.
pub fn initial_state(data: &ScatteringDataset, model: &ModelConfig, optimizer: &OptimizerConfig) -> InversionState {
    let first = &data.frequencies[0];
    let r = &first.sensors.receptors;
    let centroid = r.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
    let centroid = [centroid[0] / r.len() as f64, centroid[1] / r.len() as f64];
    let curve = FourierCurve::circle(1.0, centroid);
    let n_c = optimizer.n_c(first.omega, curve.length, data.provenance.physical.c2);
    let params = match (&model.initial, model.kind) {
        (_, ModelKind::Neumann) => None,
        (Some(p), _) => Some(p.clone()),
        (None, kind) => neutral_params(kind, n_c),
    };
    InversionState::new(curve, params)
}

/// One CSV row of the error report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub omega: f64,
    pub residual: f64,
    pub area_error: f64,
    pub delta_hat: Option<f64>,
    pub rhor_hat: Option<f64>,
    pub cr_hat: Option<f64>,
    pub rhorcr_hat: Option<f64>,
}

/// Residual, symmetric-difference error and (for ABV) physical estimates per frequency.
pub fn error_report(trajectory: &Trajectory, truth: &FourierCurve) -> Result<Vec<ReportRow>, HarnessError> {
    if trajectory.results.is_empty() {
        return Err(HarnessError::EmptyTrajectory);
    }
    trajectory.results.iter().map(|r| report_row(r, truth)).collect()
}

fn report_row(r: &FrequencyResult, truth: &FourierCurve) -> Result<ReportRow, HarnessError> {
    let n = (4 * truth.resolving_nodes()).max(2048);
    let area_error = symmetric_difference_area(truth, &r.curve, n)?;
    let mut row = ReportRow {
        omega: r.omega,
        residual: r.residual,
        area_error,
        delta_hat: None,
        rhor_hat: None,
        cr_hat: None,
        rhorcr_hat: None,
    };
    if let Some(ImpedanceParams::Abv { beta }) = &r.params {
        row.delta_hat = Some(r.omega * beta[0]);
        if let Ok(p) = physical_from_beta(*beta, r.omega) {
            row.rhor_hat = Some(p.rhor);
            row.cr_hat = Some(p.cr);
            row.rhorcr_hat = Some(p.rhor_cr);
        }
    }
    Ok(row)
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
    let mut s = String::from("omega,residual,area_error,delta_hat,rhor_hat,cr_hat,rhorcr_hat\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.10e},{:.10e},{},{},{},{}",
            r.omega,
            r.residual,
            r.area_error,
            opt(r.delta_hat),
            opt(r.rhor_hat),
            opt(r.cr_hat),
            opt(r.rhorcr_hat)
        );
    }
    s
}

/// Checks that named shapes are admissible at the given band and constant.
pub fn shape_admissible(curve: &FourierCurve, m: usize, c_h: f64) -> Result<bool, HarnessError> {
    Ok(constraint_check(curve, m, c_h)?.ok())
}
