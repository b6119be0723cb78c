//! Impedance-function models and the physical-parameter maps of the ABV model.

use crate::forward::PhysicalParams;
use crate::geometry::CurveSamples;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("the ABV model needs a nonzero exterior wavenumber")]
    ZeroWavenumber,
    #[error("beta_{index} must be positive to recover physical parameters (got {value})")]
    NonPositiveBeta { index: usize, value: f64 },
    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterLength { got: usize, expected: usize },
}

/// Impedance function `lambda` on the boundary, in one of four parameterizations.
///
/// * `Constant`: `lambda = c`.
/// * `Fs`: `lambda(s) = sum_{m=-N_c}^{N_c} c_m exp(2 pi i m s / L)`, `c[m + N_c]`.
/// * `Ch`: `lambda = alpha_1 + alpha_2 H`.
/// * `Abv`: `lambda = beta_2 sqrt(1 - i beta_1) - i beta_3 (1 - i beta_1) H / k_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ImpedanceParams {
    Constant { c: C },
    Fs { c: Vec<C> },
    Ch { alpha: [C; 2] },
    Abv { beta: [f64; 3] },
}

impl ImpedanceParams {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Fs { .. } => "fs",
            Self::Ch { .. } => "ch",
            Self::Abv { .. } => "abv",
        }
    }

    /// Whether the parameters are complex (all but ABV).
    pub fn is_complex(&self) -> bool {
        !matches!(self, Self::Abv { .. })
    }

    /// Parameter vector; ABV entries are real.
    pub fn params(&self) -> Vec<C> {
        match self {
            Self::Constant { c } => vec![*c],
            Self::Fs { c } => c.clone(),
            Self::Ch { alpha } => alpha.to_vec(),
            Self::Abv { beta } => beta.iter().map(|&b| C::new(b, 0.0)).collect(),
        }
    }

    /// Same model with a new parameter vector (imaginary parts dropped for ABV).
    pub fn with_params(&self, p: &[C]) -> Result<Self, ModelError> {
        let expected = self.params().len();
        if p.len() != expected {
            return Err(ModelError::ParameterLength { got: p.len(), expected });
        }
        Ok(match self {
            Self::Constant { .. } => Self::Constant { c: p[0] },
            Self::Fs { .. } => Self::Fs { c: p.to_vec() },
            Self::Ch { .. } => Self::Ch { alpha: [p[0], p[1]] },
            Self::Abv { .. } => Self::Abv { beta: [p[0].re, p[1].re, p[2].re] },
        })
    }

    /// `d lambda / d H`, zero for curvature-independent models.
    pub fn curvature_slope(&self, k2: f64) -> C {
        match self {
            Self::Ch { alpha } => alpha[1],
            Self::Abv { beta } => -I * beta[2] * C::new(1.0, -beta[0]) / k2,
            _ => C::default(),
        }
    }

    pub fn depends_on_curvature(&self) -> bool {
        matches!(self, Self::Ch { .. } | Self::Abv { .. })
    }

    /// Node values of `lambda` on the sampled curve.
    pub fn eval(&self, samples: &CurveSamples, k2: f64) -> Result<Vec<C>, ModelError> {
        let n = samples.len();
        Ok(match self {
            Self::Constant { c } => vec![*c; n],
            Self::Fs { c } => {
                let nc = (c.len() as i64 - 1) / 2;
                samples
                    .s
                    .iter()
                    .map(|&s| {
                        let t = 2.0 * PI * s / samples.length;
                        c.iter()
                            .enumerate()
                            .map(|(j, cm)| cm * C::from_polar(1.0, (j as i64 - nc) as f64 * t))
                            .sum()
                    })
                    .collect()
            }
            Self::Ch { alpha } => samples.curvature.iter().map(|&h| alpha[0] + alpha[1] * h).collect(),
            Self::Abv { beta } => {
                if k2 == 0.0 {
                    return Err(ModelError::ZeroWavenumber);
                }
                let root = C::new(1.0, -beta[0]).sqrt();
                let slope = self.curvature_slope(k2);
                samples.curvature.iter().map(|&h| beta[1] * root + slope * h).collect()
            }
        })
    }

    /// Node values of `d lambda / d p_j` for every parameter.
    ///
    /// Complex models are holomorphic in their parameters, so these are complex
    /// derivatives; ABV partials are with respect to the real `beta_j`.
    pub fn partials(&self, samples: &CurveSamples, k2: f64) -> Result<Vec<Vec<C>>, ModelError> {
        let n = samples.len();
        let one = vec![C::new(1.0, 0.0); n];
        let curv: Vec<C> = samples.curvature.iter().map(|&h| C::new(h, 0.0)).collect();
        Ok(match self {
            Self::Constant { .. } => vec![one],
            Self::Fs { c } => {
                let nc = (c.len() as i64 - 1) / 2;
                (-nc..=nc)
                    .map(|m| {
                        samples
                            .s
                            .iter()
                            .map(|&s| C::from_polar(1.0, 2.0 * PI * m as f64 * s / samples.length))
                            .collect()
                    })
                    .collect()
            }
            Self::Ch { .. } => vec![one, curv],
            Self::Abv { beta } => {
                if k2 == 0.0 {
                    return Err(ModelError::ZeroWavenumber);
                }
                let root = C::new(1.0, -beta[0]).sqrt();
                let lin = C::new(1.0, -beta[0]);
                let d1: Vec<C> =
                    samples.curvature.iter().map(|&h| -I * beta[1] / (2.0 * root) - beta[2] * h / k2).collect();
                let d2 = vec![root; n];
                let d3: Vec<C> = samples.curvature.iter().map(|&h| -I * lin * h / k2).collect();
                vec![d1, d2, d3]
            }
        })
    }

    /// Metric projection onto the constraint set: `beta >= 0` for ABV,
    /// `Im alpha <= 0` for CH; other models are unconstrained.
    pub fn project(&self) -> Self {
        match self {
            Self::Abv { beta } => Self::Abv { beta: beta.map(|b| b.max(0.0)) },
            Self::Ch { alpha } => Self::Ch { alpha: alpha.map(|a| C::new(a.re, a.im.min(0.0))) },
            other => other.clone(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        match self {
            Self::Abv { beta } => beta.iter().all(|&b| b >= 0.0),
            Self::Ch { alpha } => alpha.iter().all(|a| a.im <= 0.0),
            _ => true,
        }
    }

    /// Carries parameters to the next frequency: `beta_1 = delta / omega` is
    /// rescaled, FS coefficients are zero-padded to `2 n_c + 1`.
    pub fn transported(&self, omega_prev: f64, omega_next: f64, n_c: usize) -> Self {
        match self {
            Self::Abv { beta } => Self::Abv { beta: [beta[0] * omega_prev / omega_next, beta[1], beta[2]] },
            Self::Fs { c } => {
                let old = (c.len() - 1) / 2;
                let mut out = vec![C::default(); 2 * n_c + 1];
                for (j, v) in c.iter().enumerate() {
                    let m = j as i64 - old as i64;
                    if m.unsigned_abs() as usize <= n_c {
                        out[(m + n_c as i64) as usize] = *v;
                    }
                }
                Self::Fs { c: out }
            }
            other => other.clone(),
        }
    }
}

/// Public alias for the projection.
pub fn project_params(p: &ImpedanceParams) -> ImpedanceParams {
    p.project()
}

/// Node values of `lambda`.
pub fn eval_impedance(p: &ImpedanceParams, samples: &CurveSamples, k2: f64) -> Result<Vec<C>, ModelError> {
    p.eval(samples, k2)
}

/// ABV parameters of a physical configuration.
pub fn beta_from_physical(phys: &PhysicalParams) -> [f64; 3] {
    let b1 = phys.delta / phys.omega;
    let g = 1.0 + b1 * b1;
    [b1, 1.0 / (phys.rhor() * phys.cr() * g.sqrt()), 1.0 / (phys.rhor() * g)]
}

/// Physical quantities recovered from ABV parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalEstimate {
    pub delta: f64,
    pub rhor_cr: f64,
    pub rhor: f64,
    pub cr: f64,
}

pub fn physical_from_beta(beta: [f64; 3], omega: f64) -> Result<PhysicalEstimate, ModelError> {
    for idx in [1, 2] {
        if beta[idx] <= 0.0 {
            return Err(ModelError::NonPositiveBeta { index: idx + 1, value: beta[idx] });
        }
    }
    let g = 1.0 + beta[0] * beta[0];
    Ok(PhysicalEstimate {
        delta: omega * beta[0],
        rhor_cr: 1.0 / (beta[1] * g.sqrt()),
        rhor: 1.0 / (beta[2] * g),
        cr: beta[2] * g.sqrt() / beta[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fs_transport_pads_and_truncates() {
        let p = ImpedanceParams::Fs { c: vec![C::new(1.0, 0.0), C::new(2.0, 0.0), C::new(3.0, 0.0)] };
        match p.transported(1.0, 2.0, 2) {
            ImpedanceParams::Fs { c } => {
                assert_eq!(c.len(), 5);
                assert_eq!(c[1].re, 1.0);
                assert_eq!(c[2].re, 2.0);
                assert_eq!(c[0].re, 0.0);
            }
            _ => unreachable!(),
        }
        match p.transported(1.0, 2.0, 0) {
            ImpedanceParams::Fs { c } => assert_eq!(c, vec![C::new(2.0, 0.0)]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn serde_tag() {
        let p = ImpedanceParams::Abv { beta: [1.0, 2.0, 3.0] };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"model":"abv","beta":[1.0,2.0,3.0]}"#);
        let back: ImpedanceParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn beta_needs_positive_entries() {
        assert!(matches!(
            physical_from_beta([1.0, 0.0, 1.0], 1.0),
            Err(ModelError::NonPositiveBeta { index: 2, .. })
        ));
    }
}
