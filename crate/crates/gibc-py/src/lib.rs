//! Python module `gibc_py`: JSON-in, JSON-out access to data generation,
//! inversion and reporting, plus a few numerical primitives.

use gibc::forward::{forward_map, ForwardModel};
use gibc::geometry::FourierCurve;
use gibc::harness::{error_report, generate_data, initial_state, report_csv, ExperimentConfig, ScatteringDataset};
use gibc::inverse::{continuation_solve, Trajectory};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

/// `H_order^(1)(z)` for order 0 or 1.
#[pyfunction]
fn hankel1(order: u32, z: Complex64) -> PyResult<Complex64> {
    gibc::special::hankel1(order, z).map_err(err)
}

/// Curve JSON for the shape described in an experiment configuration.
#[pyfunction]
fn shape_curve(config_json: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    let curve = cfg.shape.curve().map_err(err)?;
    Ok(serde_json::to_string(&curve).expect("curve serializes"))
}

/// Synthetic dataset JSON for a configuration.
#[pyfunction]
fn generate(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    py.detach(|| {
        let truth = cfg.shape.curve().map_err(err)?;
        let data = generate_data(&truth, &cfg, |_| {}).map_err(err)?;
        Ok(data.to_json())
    })
}

/// Trajectory JSON from a configuration and a dataset.
#[pyfunction]
fn invert(py: Python<'_>, config_json: &str, dataset_json: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    let data: ScatteringDataset = parse(dataset_json, "dataset")?;
    if data.frequencies.is_empty() {
        return Err(PyValueError::new_err("dataset holds no frequencies"));
    }
    py.detach(|| {
        let init = initial_state(&data, &cfg.model, &cfg.optimizer);
        let traj = continuation_solve(&data, init, &cfg.optimizer, |_| {}).map_err(err)?;
        Ok(serde_json::to_string(&traj).expect("trajectory serializes"))
    })
}

/// CSV error report of a trajectory against a truth curve.
#[pyfunction]
fn report(trajectory_json: &str, truth_json: &str) -> PyResult<String> {
    let traj: Trajectory = parse(trajectory_json, "trajectory")?;
    let truth: FourierCurve = parse(truth_json, "truth curve")?;
    Ok(report_csv(&error_report(&traj, &truth).map_err(err)?))
}

/// Receptor field (rows: directions, columns: receptors; masked entries are
/// `None`) of a forward model at one frequency of the configured experiment.
#[pyfunction]
#[pyo3(signature = (config_json, omega, model_json=None, nodes=None))]
fn forward(
    config_json: &str,
    omega: f64,
    model_json: Option<&str>,
    nodes: Option<usize>,
) -> PyResult<Vec<Vec<Option<Complex64>>>> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    let model: ForwardModel = match model_json {
        Some(t) => parse(t, "model")?,
        None => cfg.data_model.clone(),
    };
    let curve = cfg.shape.curve().map_err(err)?;
    let phys = cfg.physical_at(omega);
    let sensors = cfg.sensors(omega);
    let n = nodes.unwrap_or_else(|| gibc::harness::data_nodes(&curve, &phys, &model, cfg.ppw));
    let field = forward_map(&model, &curve, n, &phys, &sensors).map_err(err)?;
    Ok((0..field.n_d).map(|i| (0..field.n_r).map(|j| field.get(i, j)).collect()).collect())
}

#[pymodule]
fn gibc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(hankel1, m)?)?;
    m.add_function(wrap_pyfunction!(shape_curve, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(forward, m)?)?;
    Ok(())
}
