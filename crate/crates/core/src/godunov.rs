//! Entropy-solution reference for the singular limit: first-order Godunov for
//! the local law q_t + (q V(q))_x = 0, plus exact Riemann solutions for the
//! linear velocity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{field_from_datum, Datum, Field};
use crate::grid::Grid;
use crate::solver::SolverConfig;
use crate::velocity::VelocityModel;

/// The local limit problem: a Scenario without kernel, p or η.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalScenario {
    pub initial: Datum,
    pub velocity: VelocityModel,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub grid: Grid,
    pub record_times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LocalSnapshot {
    pub t: f64,
    pub q: Field,
}

#[derive(Debug, Clone)]
pub struct LocalTrajectory {
    pub scenario: LocalScenario,
    pub snapshots: Vec<LocalSnapshot>,
    pub steps: usize,
}

impl LocalScenario {
    pub fn validate(&self) -> Result<Field> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidScenario("horizon must be positive".into()));
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
        field_from_datum(self.initial, self.grid)
    }
}

/// f(q) = q V(q), f'(q) = V(q) + q V'(q).
fn flux(v: &VelocityModel, q: f64) -> f64 {
    q * v.v(q)
}

fn dflux(v: &VelocityModel, q: f64) -> f64 {
    v.v(q) + q * v.dv(q)
}

/// Concavity of the flux on `[lo, hi]`: f'' = 2V' + qV'' < 0, sampled.
fn check_concave(v: &VelocityModel, lo: f64, hi: f64) -> Result<()> {
    const SAMPLES: usize = 512;
    for i in 0..=SAMPLES {
        let q = lo + (hi - lo) * i as f64 / SAMPLES as f64;
        if 2.0 * v.dv(q) + q * v.ddv(q) >= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "flux qV(q) not strictly concave at q = {q}"
            )));
        }
    }
    Ok(())
}

/// Godunov interface flux for a concave f: min of f over [a, b] when a <= b
/// (attained at an endpoint), max over [b, a] when a > b (at the critical
/// point of f if it lies inside, else an endpoint).
fn godunov_flux(v: &VelocityModel, a: f64, b: f64) -> f64 {
    if a <= b {
        flux(v, a).min(flux(v, b))
    } else {
        // f' = 1 - 2q for the linear velocity: critical point in closed form.
        if matches!(v, VelocityModel::Linear) {
            return if a <= 0.5 {
                flux(v, a)
            } else if b >= 0.5 {
                flux(v, b)
            } else {
                flux(v, 0.5)
            };
        }
        // Critical point by bisection on f' (monotone for concave f).
        let (mut lo, mut hi) = (b, a);
        if dflux(v, lo) <= 0.0 {
            return flux(v, lo);
        }
        if dflux(v, hi) >= 0.0 {
            return flux(v, hi);
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if dflux(v, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        flux(v, 0.5 * (lo + hi))
    }
}

/// First-order explicit Godunov solve with dt = cfl·dx / max |f'|.
pub fn solve_godunov(scenario: &LocalScenario, config: &SolverConfig) -> Result<LocalTrajectory> {
    config.validate()?;
    let q0 = scenario.validate()?;
    let v = &scenario.velocity;
    let (min0, max0) = (q0.min(), q0.max());
    check_concave(v, min0, max0)?;

    let grid = scenario.grid;
    let n = grid.n_cells;
    let dx = grid.dx();
    let mut snapshots = Vec::new();
    let mut record_idx = 0;
    while record_idx < scenario.record_times.len() && scenario.record_times[record_idx] <= 1e-14 {
        snapshots.push(LocalSnapshot {
            t: scenario.record_times[record_idx],
            q: q0.clone(),
        });
        record_idx += 1;
    }

    let mut q = q0;
    let mut t = 0.0;
    let mut steps = 0usize;
    while t < scenario.horizon - 1e-13 {
        const SAMPLES: usize = 128;
        let smax = (0..=SAMPLES)
            .map(|i| min0 + (max0 - min0) * i as f64 / SAMPLES as f64)
            .map(|x| dflux(v, x).abs())
            .fold(0.0, f64::max);
        let dt = if smax < 1e-14 {
            scenario.horizon - t
        } else {
            (config.cfl * dx / smax).min(scenario.horizon - t)
        };

        let mut fluxes = vec![0.0; n + 1];
        for (i, f) in fluxes.iter_mut().enumerate() {
            let a = if i == 0 { q.left_boundary() } else { q.values[i - 1] };
            let b = if i == n { q.right_boundary() } else { q.values[i] };
            *f = godunov_flux(v, a, b);
        }
        let values: Vec<f64> = (0..n)
            .map(|i| (q.values[i] - dt / dx * (fluxes[i + 1] - fluxes[i])).max(0.0))
            .collect();
        let q_next = Field::new(grid, values)?;

        let t_next = t + dt;
        while record_idx < scenario.record_times.len()
            && scenario.record_times[record_idx] <= t_next + 1e-13
        {
            let tr = scenario.record_times[record_idx];
            let theta = ((tr - t) / dt).clamp(0.0, 1.0);
            let vals: Vec<f64> = q
                .values
                .iter()
                .zip(&q_next.values)
                .map(|(a, b)| (1.0 - theta) * a + theta * b)
                .collect();
            snapshots.push(LocalSnapshot {
                t: tr,
                q: Field::new(grid, vals)?,
            });
            record_idx += 1;
        }

        q = q_next;
        t = t_next;
        steps += 1;
        if steps > 10_000_000 {
            return Err(Error::SolverAbort("step limit exceeded".into()));
        }
    }
    while record_idx < scenario.record_times.len() {
        snapshots.push(LocalSnapshot {
            t: scenario.record_times[record_idx],
            q: q.clone(),
        });
        record_idx += 1;
    }

    Ok(LocalTrajectory {
        scenario: scenario.clone(),
        snapshots,
        steps,
    })
}

/// Closed-form entropy solution of the Riemann problem for V(q) = 1 − q
/// (flux q(1−q), f' = 1 − 2q), sampled at cell midpoints.
///
/// a < b: shock with speed 1 − a − b. a > b: rarefaction q = (1 − x/t)/2 on
/// x/t ∈ (1 − 2a, 1 − 2b).
pub fn exact_riemann(a: f64, b: f64, t: f64, velocity: &VelocityModel, grid: Grid) -> Result<Field> {
    match velocity {
        VelocityModel::Linear => {}
        _ => {
            return Err(Error::Unsupported(
                "exact riemann solution implemented for the linear velocity only".into(),
            ))
        }
    }
    let profile = |x: f64| -> f64 {
        if t <= 0.0 {
            return if x < 0.0 { a } else { b };
        }
        let xi = x / t;
        if a < b {
            let s = 1.0 - a - b;
            if xi < s {
                a
            } else {
                b
            }
        } else if a > b {
            let (lo, hi) = (1.0 - 2.0 * a, 1.0 - 2.0 * b);
            if xi <= lo {
                a
            } else if xi >= hi {
                b
            } else {
                (1.0 - xi) / 2.0
            }
        } else {
            a
        }
    };
    Field::from_fn(grid, profile)
}
