//! Velocity models V with closed-form derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form velocity model. `V' <= 0` is required on the admissible
/// density interval; `check_admissible` verifies this by sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityModel {
    /// V(x) = 1 - x.
    Linear,
    /// V(x) = sum coeffs[k] * x^k.
    Polynomial { coeffs: Vec<f64> },
}

impl VelocityModel {
    pub fn v(&self, x: f64) -> f64 {
        match self {
            VelocityModel::Linear => 1.0 - x,
            VelocityModel::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
        }
    }

    pub fn dv(&self, x: f64) -> f64 {
        match self {
            VelocityModel::Linear => -1.0,
            VelocityModel::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c),
        }
    }

    pub fn ddv(&self, x: f64) -> f64 {
        match self {
            VelocityModel::Linear => 0.0,
            VelocityModel::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + (k * (k - 1)) as f64 * c),
        }
    }

    /// Sampled check that V' <= 0 and V, V', V'' are finite on `[lo, hi]`.
    pub fn check_admissible(&self, lo: f64, hi: f64) -> Result<()> {
        const SAMPLES: usize = 256;
        for i in 0..=SAMPLES {
            let x = lo + (hi - lo) * i as f64 / SAMPLES as f64;
            let (v, dv, ddv) = (self.v(x), self.dv(x), self.ddv(x));
            if !(v.is_finite() && dv.is_finite() && ddv.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "velocity not finite at x = {x}"
                )));
            }
            if dv > 1e-12 {
                return Err(Error::InvalidScenario(format!(
                    "velocity must be nonincreasing, V'({x}) = {dv}"
                )));
            }
        }
        Ok(())
    }

    /// max |V| over `[lo, hi]`, sampled. For nonincreasing V this is attained
    /// at an endpoint, but sampling keeps the polynomial case honest.
    pub fn max_abs_speed(&self, lo: f64, hi: f64) -> f64 {
        const SAMPLES: usize = 64;
        (0..=SAMPLES)
            .map(|i| lo + (hi - lo) * i as f64 / SAMPLES as f64)
            .map(|x| self.v(x).abs())
            .fold(0.0, f64::max)
    }
}
