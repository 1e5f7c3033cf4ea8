//! Nonlocal kernels and their p-dependent normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ∫_a^b (c + m s)^p ds, exact. Requires c + m s >= 0 on [a, b].
fn linear_power_integral(c: f64, m: f64, a: f64, b: f64, p: f64) -> f64 {
    if m.abs() < 1e-300 {
        return c.powf(p) * (b - a);
    }
    let fb = (c + m * b).powf(p + 1.0);
    let fa = (c + m * a).powf(p + 1.0);
    (fb - fa) / (m * (p + 1.0))
}

/// ∫_a^b ln(c + m s) ds, exact. Requires c + m s > 0 on the open interval;
/// an endpoint zero is allowed (x ln x -> 0).
fn linear_log_integral(c: f64, m: f64, a: f64, b: f64) -> f64 {
    if m.abs() < 1e-300 {
        return c.ln() * (b - a);
    }
    let prim = |s: f64| {
        let g = c + m * s;
        if g <= 0.0 {
            0.0
        } else {
            g * (g.ln() - 1.0) / m
        }
    };
    prim(b) - prim(a)
}

/// Normalization target for [`Kernel::normalize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormMode {
    /// Unit L^p norm, p > 0.
    Lp(f64),
    /// Unit geometric-mean (L^0) norm.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum KernelShape {
    /// e^{-x} on (0, ∞).
    Exponential,
    /// 1 on (0, 1).
    Constant,
    /// Piecewise-linear nonincreasing on (0, 1).
    Custom {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

/// A nonlocal weight γ, stored as `scale * shape`. Normalization adjusts the
/// scale only, so the shape is preserved exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    #[serde(flatten)]
    pub shape: KernelShape,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Kernel {
    pub fn exponential() -> Self {
        Self {
            shape: KernelShape::Exponential,
            scale: 1.0,
        }
    }

    pub fn constant() -> Self {
        Self {
            shape: KernelShape::Constant,
            scale: 1.0,
        }
    }

    pub fn custom(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = Self {
            shape: KernelShape::Custom {
                breakpoints,
                values,
            },
            scale: 1.0,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::InvalidKernel("scale must be positive".into()));
        }
        if let KernelShape::Custom {
            breakpoints,
            values,
        } = &self.shape
        {
            if breakpoints.len() != values.len() || breakpoints.len() < 2 {
                return Err(Error::InvalidKernel(
                    "custom kernel needs matching breakpoints/values, length >= 2".into(),
                ));
            }
            if (breakpoints[0] - 0.0).abs() > 1e-14
                || (breakpoints[breakpoints.len() - 1] - 1.0).abs() > 1e-14
            {
                return Err(Error::InvalidKernel(
                    "custom kernel support must be exactly (0, 1)".into(),
                ));
            }
            if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidKernel(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
            if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidKernel(
                    "values must be finite and nonnegative".into(),
                ));
            }
            if values.windows(2).any(|w| w[1] > w[0] + 1e-14) {
                return Err(Error::InvalidKernel(
                    "kernel must be nonincreasing on its support".into(),
                ));
            }
        }
        Ok(())
    }

    /// Whether the support is the bounded interval (0, 1).
    pub fn finite_support(&self) -> bool {
        !matches!(self.shape, KernelShape::Exponential)
    }

    /// Kernel value γ(s) for s in the support, 0 outside (finite support) or
    /// the exponential tail.
    pub fn eval(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        self.scale
            * match &self.shape {
                KernelShape::Exponential => (-s).exp(),
                KernelShape::Constant => {
                    if s <= 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                KernelShape::Custom {
                    breakpoints,
                    values,
                } => {
                    if s > 1.0 {
                        0.0
                    } else {
                        let seg = breakpoints.partition_point(|&b| b <= s).clamp(1, breakpoints.len() - 1);
                        let (b0, b1) = (breakpoints[seg - 1], breakpoints[seg]);
                        let (v0, v1) = (values[seg - 1], values[seg]);
                        v0 + (v1 - v0) * (s - b0) / (b1 - b0)
                    }
                }
            }
    }

    /// Infimum of γ on its support.
    pub fn min_on_support(&self) -> f64 {
        self.scale
            * match &self.shape {
                KernelShape::Exponential => 0.0,
                KernelShape::Constant => 1.0,
                KernelShape::Custom { values, .. } => {
                    values.iter().cloned().fold(f64::INFINITY, f64::min)
                }
            }
    }

    /// ∫_{s0}^{s1} γ(s)^p ds for finite-support kernels (clipped to [0, 1]).
    pub fn p_power_integral(&self, s0: f64, s1: f64, p: f64) -> f64 {
        let lo = s0.max(0.0);
        let hi = s1.min(1.0);
        if hi <= lo {
            return 0.0;
        }
        match &self.shape {
            KernelShape::Exponential => {
                // Not clipped to (0,1); callers use the closed form instead.
                let sp = self.scale.powf(p);
                sp / p * ((-p * lo).exp() - (-p * hi).exp())
            }
            KernelShape::Constant => self.scale.powf(p) * (hi - lo),
            KernelShape::Custom {
                breakpoints,
                values,
            } => {
                // γ is linear on each segment: integrate in closed form.
                let mut total = 0.0;
                for (w, v) in breakpoints.windows(2).zip(values.windows(2)) {
                    let (a, b) = (w[0].max(lo), w[1].min(hi));
                    if b <= a {
                        continue;
                    }
                    let m = self.scale * (v[1] - v[0]) / (w[1] - w[0]);
                    let c = self.scale * v[0] - m * w[0];
                    total += linear_power_integral(c, m, a, b, p);
                }
                total
            }
        }
    }

    /// ‖γ‖_{L^p} = (∫ γ^p)^{1/p}; closed form for every shape.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidKernel(format!("lp_norm needs p > 0, got {p}")));
        }
        let norm = match &self.shape {
            KernelShape::Exponential => self.scale * (1.0 / p).powf(1.0 / p),
            KernelShape::Constant => self.scale,
            KernelShape::Custom { .. } => self.p_power_integral(0.0, 1.0, p).powf(1.0 / p),
        };
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "nonintegrable kernel configuration for p = {p}"
            )));
        }
        Ok(norm)
    }

    /// Geometric-mean norm exp(∫₀¹ ln γ). Requires finite support and a
    /// strictly positive kernel there.
    pub fn l0_geometric_norm(&self) -> Result<f64> {
        if !self.finite_support() {
            return Err(Error::InvalidKernel(
                "geometric-mean norm requires finite support (0, 1)".into(),
            ));
        }
        if self.min_on_support() <= 0.0 {
            return Err(Error::InvalidKernel(
                "kernel touches zero on its support: log diverges".into(),
            ));
        }
        let norm = match &self.shape {
            KernelShape::Constant => self.scale,
            KernelShape::Custom {
                breakpoints,
                values,
            } => {
                let mut log_int = 0.0;
                for (w, v) in breakpoints.windows(2).zip(values.windows(2)) {
                    let m = self.scale * (v[1] - v[0]) / (w[1] - w[0]);
                    let c = self.scale * v[0] - m * w[0];
                    log_int += linear_log_integral(c, m, w[0], w[1]);
                }
                log_int.exp()
            }
            KernelShape::Exponential => unreachable!(),
        };
        Ok(norm)
    }

    /// Rescale so the requested norm equals one.
    pub fn normalize(&self, mode: NormMode) -> Result<Kernel> {
        let norm = match mode {
            NormMode::Lp(p) => self.lp_norm(p)?,
            NormMode::Zero => self.l0_geometric_norm()?,
        };
        Ok(Kernel {
            shape: self.shape.clone(),
            scale: self.scale / norm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_kernel_unit_norms() {
        let k = Kernel::constant();
        for p in [0.3, 1.0, 2.0, 7.5] {
            assert!((k.lp_norm(p).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((k.l0_geometric_norm().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_closed_form_norms() {
        let k = Kernel::exponential();
        assert!((k.lp_norm(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((k.lp_norm(2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(k.l0_geometric_norm().is_err());
    }

    #[test]
    fn exponential_normalized_scale() {
        let k = Kernel::exponential().normalize(NormMode::Lp(2.0)).unwrap();
        assert!((k.scale - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((k.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn custom_geometric_norm_analytic() {
        // γ(s) = 2 - s: ∫₀¹ ln(2-s) ds = 2 ln 2 - 1.
        let k = Kernel::custom(vec![0.0, 1.0], vec![2.0, 1.0]).unwrap();
        let expected = (2.0 * 2.0f64.ln() - 1.0).exp();
        assert!((k.l0_geometric_norm().unwrap() - expected).abs() < 1e-10);
        assert!((expected - 1.4715178).abs() < 1e-6);
    }

    #[test]
    fn custom_constant_scaling() {
        let k = Kernel::custom(vec![0.0, 1.0], vec![2.0, 2.0]).unwrap();
        assert!((k.l0_geometric_norm().unwrap() - 2.0).abs() < 1e-12);
        let k0 = k.normalize(NormMode::Zero).unwrap();
        assert!((k0.eval(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn custom_lp_norm_analytic() {
        // γ(s) = 1 - s: ∫₀¹ (1-s)^p ds = 1/(p+1).
        let k = Kernel::custom(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        for p in [0.5f64, 1.0, 2.0, 3.7] {
            let expected = (1.0 / (p + 1.0)).powf(1.0 / p);
            assert!(
                (k.lp_norm(p).unwrap() - expected).abs() < 1e-10,
                "p = {p}"
            );
        }
    }

    #[test]
    fn kernel_touching_zero_rejected_for_l0() {
        let k = Kernel::custom(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert!(k.l0_geometric_norm().is_err());
    }

    #[test]
    fn increasing_custom_rejected() {
        assert!(Kernel::custom(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn normalize_idempotent() {
        let k = Kernel::custom(vec![0.0, 0.4, 1.0], vec![3.0, 2.0, 1.5]).unwrap();
        for p in [0.5, 1.0, 2.0] {
            let once = k.normalize(NormMode::Lp(p)).unwrap();
            let twice = once.normalize(NormMode::Lp(p)).unwrap();
            assert!((once.scale - twice.scale).abs() < 1e-12);
            assert!((once.lp_norm(p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        // Power-mean monotonicity: geometric-mean norm <= L^p norm.
        #[test]
        fn l0_below_lp(v0 in 0.5f64..3.0, drop in 0.0f64..0.4, p in 0.1f64..8.0) {
            let k = Kernel::custom(vec![0.0, 1.0], vec![v0, v0 * (1.0 - drop)]).unwrap();
            let l0 = k.l0_geometric_norm().unwrap();
            let lp = k.lp_norm(p).unwrap();
            prop_assert!(l0 <= lp + 1e-9, "l0 = {l0}, lp = {lp}");
        }
    }
}
