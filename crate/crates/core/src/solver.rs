//! Time integration of the nonlocal law by two independent schemes: Lagrangian
//! characteristics with conservative remap, and upwind finite volume as a
//! cross-validation oracle. An optional within-step Picard iteration recomputes
//! the nonlocal velocity field until self-consistency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::nonlocal::{eval_w, NonlocalField};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Lagrangian,
    UpwindFv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeIntegrator {
    Euler,
    Heun,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_picard_tol")]
    pub tol: f64,
    #[serde(default = "default_picard_max_iter")]
    pub max_iter: usize,
}

fn default_picard_tol() -> f64 {
    1e-10
}

fn default_picard_max_iter() -> usize {
    100
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            tol: default_picard_tol(),
            max_iter: default_picard_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_integrator")]
    pub time_integrator: TimeIntegrator,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub strict_invariants: bool,
}

fn default_scheme() -> Scheme {
    Scheme::Lagrangian
}

fn default_cfl() -> f64 {
    0.8
}

fn default_integrator() -> TimeIntegrator {
    TimeIntegrator::Heun
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: default_scheme(),
            cfl: default_cfl(),
            time_integrator: default_integrator(),
            picard: PicardConfig::default(),
            strict_invariants: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidScenario(format!(
                "cfl must be in (0, 1], got {}",
                self.cfl
            )));
        }
        // Written as a negated comparison so that NaN is rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.picard.tol > 0.0) {
            return Err(Error::InvalidScenario("picard tol must be positive".into()));
        }
        if self.picard.max_iter < 1 {
            return Err(Error::InvalidScenario("picard max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// One recorded instant of the run.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub q: Field,
    pub w: NonlocalField,
}

impl Snapshot {
    /// ∫ q dx over `window`.
    pub fn mass(&self, window: (f64, f64)) -> f64 {
        self.q.mass(window)
    }
}

/// Per-run bookkeeping carried next to the snapshots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub steps: usize,
    pub dt_history: Vec<f64>,
    pub picard_iterations: Vec<usize>,
    pub contamination_distance: f64,
    pub initial_mass: f64,
    /// Max over steps of |mass change − boundary flux| / initial mass.
    pub mass_error: f64,
    pub max_principle_breach: f64,
    pub density_floor_hit: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scenario: Scenario,
    pub snapshots: Vec<Snapshot>,
    pub meta: TrajectoryMeta,
}

/// Piecewise-constant segments covering at least `[x_min, x_max]`, used by the
/// conservative remap. Returns per-cell densities on the uniform grid plus the
/// signed mass crossing each boundary (positive = gained by the domain).
fn remap_to_uniform(
    grid: crate::grid::Grid,
    edges: &[f64],
    densities: &[f64],
    lb: f64,
    rb: f64,
) -> (Vec<f64>, f64) {
    let n = grid.n_cells;
    let dx = grid.dx();
    // Extend the moved mesh with the boundary densities so the domain is
    // fully covered.
    let mut seg_edges = Vec::with_capacity(edges.len() + 2);
    let mut seg_rho = Vec::with_capacity(densities.len() + 2);
    if edges[0] > grid.x_min {
        seg_edges.push(grid.x_min);
        seg_rho.push(lb);
    }
    seg_edges.extend_from_slice(edges);
    seg_rho.extend_from_slice(densities);
    if *edges.last().unwrap() < grid.x_max {
        seg_rho.push(rb);
        seg_edges.push(grid.x_max);
    }

    let mut values = vec![0.0; n];
    let mut s = 0;
    for (i, v) in values.iter_mut().enumerate() {
        let (lo, hi) = (grid.edge(i), grid.edge(i + 1));
        while s + 1 < seg_edges.len() && seg_edges[s + 1] <= lo {
            s += 1;
        }
        let mut acc = 0.0;
        let mut k = s;
        while k < seg_rho.len() && seg_edges[k] < hi {
            let a = seg_edges[k].max(lo);
            let b = seg_edges[k + 1].min(hi);
            if b > a {
                acc += seg_rho[k] * (b - a);
            }
            k += 1;
        }
        // Remap averages nonnegative densities; clamp rounding noise.
        *v = (acc / dx).max(0.0);
    }

    // Boundary exchange: mass added by the extensions minus mass of moved
    // segments that left the domain.
    let mut gained = 0.0;
    if edges[0] > grid.x_min {
        gained += lb * (edges[0] - grid.x_min);
    }
    if *edges.last().unwrap() < grid.x_max {
        gained += rb * (grid.x_max - edges.last().unwrap());
    }
    for k in 0..densities.len() {
        let (a, b) = (edges[k], edges[k + 1]);
        let inside = (b.min(grid.x_max) - a.max(grid.x_min)).max(0.0);
        gained -= densities[k] * ((b - a) - inside);
    }
    (values, gained)
}

struct StepOutcome {
    q: Field,
    /// Signed mass gained by the domain across its boundaries this step.
    boundary_gain: f64,
    picard_iters: usize,
}

struct Stepper<'a> {
    scenario: &'a Scenario,
    kernel: crate::kernel::Kernel,
    config: &'a SolverConfig,
}

impl<'a> Stepper<'a> {
    fn eval_w(&self, q: &Field) -> Result<NonlocalField> {
        eval_w(q, &self.kernel, self.scenario.p, self.scenario.eta)
    }

    /// Move the uniform edges with the per-edge velocities, reconstruct
    /// densities from conserved masses and remap back to the uniform grid.
    fn advect(&self, q: &Field, edge_vel: &[f64], dt: f64) -> Result<(Field, f64)> {
        let grid = q.grid;
        let n = grid.n_cells;
        let dx = grid.dx();
        let moved: Vec<f64> = (0..=n)
            .map(|j| grid.edge(j) + dt * edge_vel[j])
            .collect();
        for j in 0..n {
            if moved[j + 1] <= moved[j] {
                return Err(Error::SolverAbort(format!(
                    "cell inversion at edge {j} (width {})",
                    moved[j + 1] - moved[j]
                )));
            }
        }
        let densities: Vec<f64> = (0..n)
            .map(|j| q.values[j] * dx / (moved[j + 1] - moved[j]))
            .collect();
        let (values, gained) = remap_to_uniform(
            grid,
            &moved,
            &densities,
            q.left_boundary(),
            q.right_boundary(),
        );
        Ok((Field::new(grid, values)?, gained))
    }

    fn lagrangian_step(&self, q: &Field, w: &NonlocalField, dt: f64) -> Result<StepOutcome> {
        let grid = q.grid;
        let n = grid.n_cells;
        let vel = |w: &NonlocalField| -> Vec<f64> {
            w.w.iter().map(|&x| self.scenario.velocity.v(x)).collect()
        };

        if self.config.picard.enabled {
            // Fixed-point iteration on the nonlocal term: each pass moves the
            // original state with the latest candidate velocity field.
            let mut w_k = w.clone();
            let mut best: Option<(Field, f64)> = None;
            for iter in 1..=self.config.picard.max_iter {
                let (q_next, gained) = self.advect(q, &vel(&w_k), dt)?;
                let w_next = self.eval_w(&q_next)?;
                let change = w_next
                    .w
                    .iter()
                    .zip(&w_k.w)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                best = Some((q_next, gained));
                w_k = w_next;
                if change < self.config.picard.tol {
                    let (q_next, gained) = best.unwrap();
                    return Ok(StepOutcome {
                        q: q_next,
                        boundary_gain: gained,
                        picard_iters: iter,
                    });
                }
            }
            if self.config.strict_invariants {
                return Err(Error::InvariantViolation(format!(
                    "picard iteration did not converge in {} iterations",
                    self.config.picard.max_iter
                )));
            }
            let (q_next, gained) = best.unwrap();
            return Ok(StepOutcome {
                q: q_next,
                boundary_gain: gained,
                picard_iters: self.config.picard.max_iter,
            });
        }

        match self.config.time_integrator {
            TimeIntegrator::Euler => {
                let (q_next, gained) = self.advect(q, &vel(w), dt)?;
                Ok(StepOutcome {
                    q: q_next,
                    boundary_gain: gained,
                    picard_iters: 0,
                })
            }
            TimeIntegrator::Heun => {
                // Strong-stability-preserving form: average the state after
                // one and two Euler substeps. Each substep is a move+remap
                // that respects the max principle, so the average does too.
                let v1 = vel(w);
                let (q_star, g1) = self.advect(q, &v1, dt)?;
                let w_star = self.eval_w(&q_star)?;
                let v2 = vel(&w_star);
                let (q_two, g2) = self.advect(&q_star, &v2, dt)?;
                let values: Vec<f64> = (0..n)
                    .map(|i| 0.5 * (q.values[i] + q_two.values[i]))
                    .collect();
                Ok(StepOutcome {
                    q: Field::new(grid, values)?,
                    boundary_gain: 0.5 * (g1 + g2),
                    picard_iters: 0,
                })
            }
        }
    }

    /// Upwind interface fluxes: F_i = q_upwind · V(W_i). Interface i sits
    /// between cell i−1 and cell i; the domain boundary uses the constant
    /// extension. Returns (fluxes, per-cell tendency).
    fn upwind_rhs(&self, q: &Field, w: &NonlocalField) -> (Vec<f64>, Vec<f64>) {
        let n = q.grid.n_cells;
        let dx = q.grid.dx();
        let mut flux = vec![0.0; n + 1];
        for (i, f) in flux.iter_mut().enumerate() {
            let v = self.scenario.velocity.v(w.w[i]);
            let up = if v >= 0.0 {
                if i == 0 {
                    q.left_boundary()
                } else {
                    q.values[i - 1]
                }
            } else if i == n {
                q.right_boundary()
            } else {
                q.values[i]
            };
            *f = up * v;
        }
        let rhs = (0..n).map(|i| -(flux[i + 1] - flux[i]) / dx).collect();
        (flux, rhs)
    }

    fn upwind_step(&self, q: &Field, w: &NonlocalField, dt: f64) -> Result<StepOutcome> {
        let grid = q.grid;
        let n = grid.n_cells;
        let apply = |q: &Field, rhs: &[f64], dt: f64| -> Result<Field> {
            let values = (0..n)
                .map(|i| (q.values[i] + dt * rhs[i]).max(0.0))
                .collect();
            Field::new(grid, values)
        };
        match self.config.time_integrator {
            TimeIntegrator::Euler => {
                let (flux, rhs) = self.upwind_rhs(q, w);
                let q_next = apply(q, &rhs, dt)?;
                Ok(StepOutcome {
                    q: q_next,
                    boundary_gain: dt * (flux[0] - flux[n]),
                    picard_iters: 0,
                })
            }
            TimeIntegrator::Heun => {
                let (flux1, rhs1) = self.upwind_rhs(q, w);
                let q_star = apply(q, &rhs1, dt)?;
                let w_star = self.eval_w(&q_star)?;
                let (flux2, rhs2) = self.upwind_rhs(&q_star, &w_star);
                let rhs: Vec<f64> = rhs1
                    .iter()
                    .zip(&rhs2)
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                let q_next = apply(q, &rhs, dt)?;
                let gain = 0.5 * dt * ((flux1[0] - flux1[n]) + (flux2[0] - flux2[n]));
                Ok(StepOutcome {
                    q: q_next,
                    boundary_gain: gain,
                    picard_iters: 0,
                })
            }
        }
    }

    fn step(&self, q: &Field, w: &NonlocalField, dt: f64) -> Result<StepOutcome> {
        match self.config.scheme {
            Scheme::Lagrangian => self.lagrangian_step(q, w, dt),
            Scheme::UpwindFv => self.upwind_step(q, w, dt),
        }
    }
}

/// Advance the scenario from t = 0 to T, recording snapshots at the scenario's
/// `record_times` by linear interpolation in time. W in each snapshot is
/// recomputed from the snapshot's own density.
pub fn solve(scenario: &Scenario, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let q0 = scenario.validate()?;
    if scenario.p.is_exploratory() && config.scheme != Scheme::UpwindFv {
        return Err(Error::Unsupported(
            "p = infinity runs require the upwind_fv scheme".into(),
        ));
    }
    let kernel = scenario.normalized_kernel()?;
    let stepper = Stepper {
        scenario,
        kernel,
        config,
    };
    let grid = scenario.grid;
    let dx = grid.dx();
    let (min0, max0) = (q0.min(), q0.max());
    let initial_mass = q0.mass((grid.x_min, grid.x_max));

    let mut meta = TrajectoryMeta {
        steps: 0,
        dt_history: Vec::new(),
        picard_iterations: Vec::new(),
        contamination_distance: scenario.contamination_distance(),
        initial_mass,
        mass_error: 0.0,
        max_principle_breach: 0.0,
        density_floor_hit: false,
        warnings: Vec::new(),
    };
    let mut snapshots = Vec::with_capacity(scenario.record_times.len());
    let mut record_idx = 0;

    let mut t = 0.0;
    let mut q = q0;
    let mut w = stepper.eval_w(&q)?;
    let mut expected_mass = initial_mass;

    // Snapshots at t = 0.
    while record_idx < scenario.record_times.len() && scenario.record_times[record_idx] <= 1e-14 {
        snapshots.push(Snapshot {
            t: scenario.record_times[record_idx],
            q: q.clone(),
            w: w.clone(),
        });
        record_idx += 1;
    }

    const MAX_STEPS: usize = 2_000_000;
    while t < scenario.horizon - 1e-13 {
        let vmax = w
            .w
            .iter()
            .map(|&x| scenario.velocity.v(x).abs())
            .fold(0.0, f64::max);
        let dt = if vmax < 1e-14 {
            scenario.horizon - t
        } else {
            (config.cfl * dx / vmax).min(scenario.horizon - t)
        };

        let outcome = stepper.step(&q, &w, dt)?;
        let t_next = t + dt;
        let q_next = outcome.q;
        if q_next.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverAbort(format!("non-finite density at t = {t_next}")));
        }

        expected_mass += outcome.boundary_gain;
        let mass_now = q_next.mass((grid.x_min, grid.x_max));
        let rel = (mass_now - expected_mass).abs() / initial_mass.max(1e-300);
        meta.mass_error = meta.mass_error.max(rel);

        let breach = (min0 - q_next.min()).max(q_next.max() - max0).max(0.0);
        meta.max_principle_breach = meta.max_principle_breach.max(breach);
        if breach > 1e-8 {
            if config.strict_invariants {
                return Err(Error::InvariantViolation(format!(
                    "max principle breached by {breach} at t = {t_next}"
                )));
            }
            if meta.warnings.is_empty() {
                meta.warnings
                    .push(format!("max principle breached by {breach} at t = {t_next}"));
            }
        }
        if q_next.min() < 1e-12 && min0 > 1e-12 {
            meta.density_floor_hit = true;
        }

        let w_next = stepper.eval_w(&q_next)?;

        // Record any requested times inside (t, t_next].
        while record_idx < scenario.record_times.len()
            && scenario.record_times[record_idx] <= t_next + 1e-13
        {
            let tr = scenario.record_times[record_idx];
            let theta = ((tr - t) / dt).clamp(0.0, 1.0);
            let values: Vec<f64> = q
                .values
                .iter()
                .zip(&q_next.values)
                .map(|(a, b)| (1.0 - theta) * a + theta * b)
                .collect();
            let q_rec = Field::new(grid, values)?;
            let w_rec = stepper.eval_w(&q_rec)?;
            snapshots.push(Snapshot {
                t: tr,
                q: q_rec,
                w: w_rec,
            });
            record_idx += 1;
        }

        meta.dt_history.push(dt);
        meta.picard_iterations.push(outcome.picard_iters);
        meta.steps += 1;
        t = t_next;
        q = q_next;
        w = w_next;
        if meta.steps > MAX_STEPS {
            return Err(Error::SolverAbort("step limit exceeded".into()));
        }
    }

    // Any trailing record times equal to T (within tolerance).
    while record_idx < scenario.record_times.len() {
        snapshots.push(Snapshot {
            t: scenario.record_times[record_idx],
            q: q.clone(),
            w: w.clone(),
        });
        record_idx += 1;
    }

    Ok(Trajectory {
        scenario: scenario.clone(),
        snapshots,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Datum;
    use crate::grid::Grid;
    use crate::kernel::Kernel;
    use crate::scenario::PNorm;
    use crate::velocity::VelocityModel;

    fn scenario(initial: Datum, kernel: Kernel, p: PNorm, n: usize) -> Scenario {
        Scenario {
            initial,
            velocity: VelocityModel::Linear,
            kernel,
            p,
            eta: 0.5,
            horizon: 0.5,
            grid: Grid::new(-4.0, 4.0, n).unwrap(),
            record_times: vec![0.0, 0.25, 0.5],
        }
    }

    fn riemann_up() -> Datum {
        Datum::Riemann {
            a: 0.5,
            b: 1.0,
            jump: 0.0,
        }
    }

    #[test]
    fn constant_datum_is_exact_solution() {
        for scheme in [Scheme::Lagrangian, Scheme::UpwindFv] {
            let s = scenario(
                Datum::Constant { value: 0.7 },
                Kernel::exponential(),
                PNorm::Finite(2.0),
                200,
            );
            let c = SolverConfig {
                scheme,
                ..Default::default()
            };
            let traj = solve(&s, &c).unwrap();
            assert_eq!(traj.snapshots.len(), 3);
            for snap in &traj.snapshots {
                for v in &snap.q.values {
                    assert!((v - 0.7).abs() < 1e-12);
                }
                for v in &snap.w.w {
                    assert!((v - 0.7).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn snapshot_times_match_record_times() {
        let s = scenario(riemann_up(), Kernel::exponential(), PNorm::Finite(1.0), 200);
        let traj = solve(&s, &SolverConfig::default()).unwrap();
        let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times, s.record_times);
    }

    #[test]
    fn max_principle_and_monotonicity_exponential() {
        let s = scenario(riemann_up(), Kernel::exponential(), PNorm::Finite(1.0), 400);
        for scheme in [Scheme::Lagrangian, Scheme::UpwindFv] {
            let c = SolverConfig {
                scheme,
                ..Default::default()
            };
            let traj = solve(&s, &c).unwrap();
            for snap in &traj.snapshots {
                assert!(snap.q.min() >= 0.5 - 1e-8);
                assert!(snap.q.max() <= 1.0 + 1e-8);
                assert!(snap.q.is_monotone(true, 1e-10), "t = {}", snap.t);
            }
        }
    }

    #[test]
    fn mass_accounting_both_schemes() {
        let s = scenario(riemann_up(), Kernel::exponential(), PNorm::Finite(2.0), 400);
        for scheme in [Scheme::Lagrangian, Scheme::UpwindFv] {
            let c = SolverConfig {
                scheme,
                ..Default::default()
            };
            let traj = solve(&s, &c).unwrap();
            assert!(traj.meta.mass_error < 1e-12, "{scheme:?}: {}", traj.meta.mass_error);
        }
    }

    #[test]
    fn picard_tol_infinite_matches_euler() {
        let s = scenario(riemann_up(), Kernel::exponential(), PNorm::Finite(1.0), 200);
        let euler = SolverConfig {
            time_integrator: TimeIntegrator::Euler,
            ..Default::default()
        };
        let picard = SolverConfig {
            time_integrator: TimeIntegrator::Euler,
            picard: PicardConfig {
                enabled: true,
                tol: f64::INFINITY,
                max_iter: 100,
            },
            ..Default::default()
        };
        let a = solve(&s, &euler).unwrap();
        let b = solve(&s, &picard).unwrap();
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(sa.q.values, sb.q.values);
        }
    }

    #[test]
    fn picard_converges_quickly() {
        let s = scenario(riemann_up(), Kernel::exponential(), PNorm::Finite(1.0), 200);
        let c = SolverConfig {
            time_integrator: TimeIntegrator::Euler,
            picard: PicardConfig {
                enabled: true,
                tol: 1e-10,
                max_iter: 100,
            },
            strict_invariants: true,
            ..Default::default()
        };
        let traj = solve(&s, &c).unwrap();
        let max_iters = traj.meta.picard_iterations.iter().copied().max().unwrap();
        assert!(max_iters <= 10, "picard iterations: {max_iters}");
        assert!(max_iters >= 1);
    }

    #[test]
    fn constant_datum_picard_converges_in_one() {
        let s = scenario(
            Datum::Constant { value: 0.7 },
            Kernel::exponential(),
            PNorm::Finite(1.0),
            100,
        );
        let c = SolverConfig {
            time_integrator: TimeIntegrator::Euler,
            picard: PicardConfig {
                enabled: true,
                tol: 1e-10,
                max_iter: 100,
            },
            ..Default::default()
        };
        let traj = solve(&s, &c).unwrap();
        assert!(traj.meta.picard_iterations.iter().all(|&k| k == 1));
    }

    #[test]
    fn sup_operator_needs_upwind() {
        let s = scenario(riemann_up(), Kernel::constant(), PNorm::Infinity, 200);
        assert!(solve(&s, &SolverConfig::default()).is_err());
        let c = SolverConfig {
            scheme: Scheme::UpwindFv,
            ..Default::default()
        };
        assert!(solve(&s, &c).is_ok());
    }

    #[test]
    fn zero_operator_runs() {
        let s = scenario(riemann_up(), Kernel::constant(), PNorm::Zero, 200);
        let traj = solve(&s, &SolverConfig::default()).unwrap();
        for snap in &traj.snapshots {
            assert!(snap.q.min() >= 0.5 - 1e-8);
            assert!(snap.q.max() <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn deterministic_reruns() {
        let s = scenario(riemann_up(), Kernel::exponential(), PNorm::Finite(2.0), 200);
        let c = SolverConfig::default();
        let a = solve(&s, &c).unwrap();
        let b = solve(&s, &c).unwrap();
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(sa.q.values, sb.q.values);
            assert_eq!(sa.w.w, sb.w.w);
        }
    }

    #[test]
    fn schemes_agree_under_refinement() {
        let dist = |n: usize| -> f64 {
            let s = scenario(riemann_up(), Kernel::exponential(), PNorm::Finite(1.0), n);
            let lag = solve(
                &s,
                &SolverConfig {
                    scheme: Scheme::Lagrangian,
                    ..Default::default()
                },
            )
            .unwrap();
            let fv = solve(
                &s,
                &SolverConfig {
                    scheme: Scheme::UpwindFv,
                    ..Default::default()
                },
            )
            .unwrap();
            lag.snapshots
                .iter()
                .zip(&fv.snapshots)
                .map(|(a, b)| crate::field::l1_distance(&a.q, &b.q, (-3.0, 3.0)).unwrap())
                .fold(0.0, f64::max)
        };
        let coarse = dist(200);
        let fine = dist(400);
        let ratio = coarse / fine;
        assert!(
            (1.5..=2.5).contains(&ratio),
            "ratio = {ratio} ({coarse} / {fine})"
        );
    }
}
