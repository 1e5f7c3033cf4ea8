//! Full problem descriptions: datum, velocity, kernel, exponent, reach.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{field_from_datum, Datum, Field};
use crate::grid::Grid;
use crate::kernel::{Kernel, NormMode};
use crate::velocity::VelocityModel;

/// The nonlocality exponent, including both limit operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PNorm {
    Finite(f64),
    /// Geometric-mean operator (limit p -> 0).
    Zero,
    /// Weighted-supremum operator (limit p -> ∞, exploratory).
    Infinity,
}

impl PNorm {
    pub fn is_exploratory(&self) -> bool {
        matches!(self, PNorm::Infinity)
    }
}

impl Serialize for PNorm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PNorm::Finite(p) => s.serialize_f64(*p),
            PNorm::Zero => s.serialize_str("zero"),
            PNorm::Infinity => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for PNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(PNorm::Finite(p)),
            Raw::Str(s) => match s.as_str() {
                "zero" => Ok(PNorm::Zero),
                "infinity" => Ok(PNorm::Infinity),
                other => Err(D::Error::custom(format!(
                    "p must be a number, \"zero\" or \"infinity\", got \"{other}\""
                ))),
            },
        }
    }
}

/// A complete nonlocal Cauchy problem plus output schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub initial: Datum,
    pub velocity: VelocityModel,
    pub kernel: Kernel,
    pub p: PNorm,
    pub eta: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub grid: Grid,
    pub record_times: Vec<f64>,
}

impl Scenario {
    /// Validate the scenario and return the resolved initial field.
    pub fn validate(&self) -> Result<Field> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.record_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidScenario("record_times must be sorted".into()));
        }
        if self
            .record_times
            .iter()
            .any(|&t| t < 0.0 || t > self.horizon + 1e-12)
        {
            return Err(Error::InvalidScenario(
                "record_times must lie in [0, T]".into(),
            ));
        }
        self.kernel.validate()?;
        match self.p {
            PNorm::Finite(p) => {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::InvalidScenario(format!(
                        "finite p must be positive, got {p}"
                    )));
                }
            }
            PNorm::Zero => {
                if !self.kernel.finite_support() || self.kernel.min_on_support() <= 0.0 {
                    return Err(Error::InvalidScenario(
                        "p = zero requires a finite-support kernel bounded below".into(),
                    ));
                }
            }
            PNorm::Infinity => {
                if !self.kernel.finite_support() {
                    return Err(Error::InvalidScenario(
                        "p = infinity requires a finite-support kernel".into(),
                    ));
                }
            }
        }
        let field = field_from_datum(self.initial, self.grid)?;
        if let PNorm::Zero = self.p {
            if field.min() <= 0.0 {
                return Err(Error::InvalidScenario(
                    "p = zero requires a strictly positive datum".into(),
                ));
            }
        }
        self.velocity.check_admissible(0.0, field.max().max(1.0))?;
        Ok(field)
    }

    /// Kernel rescaled to unit norm for the active exponent.
    pub fn normalized_kernel(&self) -> Result<Kernel> {
        match self.p {
            PNorm::Finite(p) => self.kernel.normalize(NormMode::Lp(p)),
            PNorm::Zero => self.kernel.normalize(NormMode::Zero),
            // The sup operator uses the kernel as given (weights, not a density).
            PNorm::Infinity => Ok(self.kernel.clone()),
        }
    }

    /// Distance from each boundary inside which truncation effects are
    /// guaranteed absent: ‖V‖_∞ T + η * (nominal kernel support length).
    pub fn contamination_distance(&self) -> f64 {
        let field = match field_from_datum(self.initial, self.grid) {
            Ok(f) => f,
            Err(_) => return f64::INFINITY,
        };
        let vmax = self.velocity.max_abs_speed(0.0, field.max());
        vmax * self.horizon + self.eta
    }

    /// The clean window `[x_min + c, x_max - c]`, if nonempty.
    pub fn uncontaminated_window(&self) -> Option<(f64, f64)> {
        let c = self.contamination_distance();
        let lo = self.grid.x_min + c;
        let hi = self.grid.x_max - c;
        (hi > lo).then_some((lo, hi))
    }
}
