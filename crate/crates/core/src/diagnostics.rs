//! Quantified checks of the structural properties of solutions: max
//! principle, TV(W^p) diminishing, the p<1 admissibility ratio, monotonicity,
//! the one-sided Lipschitz (Oleinik) bound and convergence tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{l1_distance_cross, total_variation, total_variation_of, Field};
use crate::kernel::KernelShape;
use crate::nonlocal::{check_exponential_identity, NonlocalField};
use crate::scenario::PNorm;
use crate::solver::Trajectory;
use crate::velocity::VelocityModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaBranch {
    PAboveOne,
    PBelowOne,
}

/// The one-sided Lipschitz constant κ and the hypotheses it depends on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OleinikParams {
    pub kappa: f64,
    pub branch: KappaBranch,
    /// Both hypotheses hold: sign condition everywhere and κ > 0.
    pub admissible: bool,
    /// Minimum of the sign-hypothesis expression over the sampled range.
    pub condition_min: f64,
    /// Minimum of |V'| weighted by the density power (the inf term of κ).
    pub inf_term: f64,
}

fn kappa_with_samples(
    v: &VelocityModel,
    p: f64,
    q_min: f64,
    q_max: f64,
    samples: usize,
) -> OleinikParams {
    let branch = if p >= 1.0 {
        KappaBranch::PAboveOne
    } else {
        KappaBranch::PBelowOne
    };
    let mut inf_term = f64::INFINITY;
    let mut sup_term: f64 = 0.0;
    let mut condition_min = f64::INFINITY;
    for i in 0..=samples {
        let x = q_min + (q_max - q_min) * i as f64 / samples as f64;
        let weight = x.powf(1.0 - p);
        match branch {
            KappaBranch::PAboveOne => {
                let c1 = v.ddv(x) * x - (p - 2.0) * v.dv(x);
                condition_min = condition_min.min(c1);
                inf_term = inf_term.min((v.dv(x) * weight).abs());
                sup_term = sup_term.max((c1 * weight).abs());
            }
            KappaBranch::PBelowOne => {
                let c1 = v.ddv(x) * x + v.dv(x);
                condition_min = condition_min.min(c1);
                inf_term = inf_term.min((v.dv(x) * weight).abs());
                sup_term = sup_term.max((c1 * weight).abs());
            }
        }
    }
    let kappa = match branch {
        KappaBranch::PAboveOne => inf_term - sup_term / p,
        KappaBranch::PBelowOne => inf_term + sup_term / p,
    };
    OleinikParams {
        kappa,
        branch,
        admissible: condition_min >= 0.0 && kappa > 0.0,
        condition_min,
        inf_term,
    }
}

/// κ of the one-sided Lipschitz bound −1/(κt), by dense sampling of the
/// velocity derivatives over `[q_min, q_max]`.
pub fn compute_kappa(v: &VelocityModel, p: f64, q_min: f64, q_max: f64) -> OleinikParams {
    kappa_with_samples(v, p, q_min, q_max, 4096)
}

/// Minimum adjacent-pair slope of W^p. Every chord slope is an average of
/// adjacent slopes, so the adjacent minimum is the global minimum.
pub fn oleinik_min_slope(w: &NonlocalField) -> f64 {
    let dx = w.grid.dx();
    w.wp
        .windows(2)
        .map(|v| (v[1] - v[0]) / dx)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TvPoint {
    pub t: f64,
    pub tv_q: f64,
    pub tv_wp: f64,
    pub tv_w: f64,
}

/// Per-snapshot TV of q, W^p and W.
pub fn tv_series(traj: &Trajectory) -> Vec<TvPoint> {
    traj.snapshots
        .iter()
        .map(|s| TvPoint {
            t: s.t,
            tv_q: total_variation(&s.q),
            tv_wp: total_variation_of(&s.w.wp),
            tv_w: total_variation_of(&s.w.w),
        })
        .collect()
}

/// p < 1 admissibility: min(q₀)/max(q₀) ≥ (1−p)^{1/p}. Returns None for
/// p ≥ 1 or the limit operators (not applicable).
pub fn p_condition_check(q0: &Field, p: PNorm) -> Option<bool> {
    match p {
        PNorm::Finite(p) if p < 1.0 => {
            let threshold = (1.0 - p).powf(1.0 / p);
            Some(q0.min() / q0.max() >= threshold)
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    /// How far below min(q₀) any snapshot dips (0 when none).
    pub min_violation: f64,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneReport {
    /// "nondecreasing", "nonincreasing" or "none".
    pub initial_direction: String,
    pub preserved: bool,
    pub worst_sign_breach: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OleinikPoint {
    pub t: f64,
    pub min_slope: f64,
    /// −1/(κt); only recorded for t > 0 and admissible κ.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OleinikReport {
    pub params: OleinikParams,
    pub series: Vec<OleinikPoint>,
    /// Bound satisfied at every recorded t > 0 with slack 10·dx.
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityPoint {
    pub t: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub max_principle: MaxPrincipleReport,
    pub tv_series: Vec<TvPoint>,
    /// TV(W^p)(0) ≤ TV(q₀^p) held within tolerance (exponential kernel).
    pub tv_initial_bound_ok: Option<bool>,
    /// Reported, not asserted: TV(W) ≤ TV(W^p)/(p·q_min^{p−1}) at t = 0.
    pub tv_w_reported_bound: Option<f64>,
    pub monotone: MonotoneReport,
    pub p_condition: Option<bool>,
    pub oleinik: Option<OleinikReport>,
    pub identity_residual: Vec<IdentityPoint>,
    pub mass_error: f64,
    pub notes: Vec<String>,
}

fn direction_of(q: &Field) -> Option<bool> {
    if total_variation(q) == 0.0 {
        return Some(true);
    }
    if q.is_monotone(true, 1e-14) {
        Some(true)
    } else if q.is_monotone(false, 1e-14) {
        Some(false)
    } else {
        None
    }
}

/// Build the full per-run report. Every field is recomputable from the
/// trajectory alone.
pub fn diagnose(traj: &Trajectory) -> Result<DiagnosticsReport> {
    if traj.snapshots.is_empty() {
        return Err(Error::InvalidScenario("trajectory has no snapshots".into()));
    }
    let q0 = &traj.snapshots[0].q;
    let (min0, max0) = (q0.min(), q0.max());
    let mut notes = Vec::new();

    let mut min_violation: f64 = 0.0;
    let mut max_violation: f64 = 0.0;
    for s in &traj.snapshots {
        min_violation = min_violation.max(min0 - s.q.min());
        max_violation = max_violation.max(s.q.max() - max0);
    }

    let tv = tv_series(traj);

    let exponential = matches!(traj.scenario.kernel.shape, KernelShape::Exponential);
    let finite_p = match traj.scenario.p {
        PNorm::Finite(p) => Some(p),
        _ => None,
    };

    let tv_initial_bound_ok = match (exponential, finite_p) {
        (true, Some(p)) => {
            let tv_q0p = total_variation_of(
                &q0.values.iter().map(|v| v.powf(p)).collect::<Vec<_>>(),
            );
            Some(tv[0].tv_wp <= tv_q0p + 1e-8)
        }
        _ => None,
    };

    let tv_w_reported_bound = finite_p.and_then(|p| {
        (min0 > 0.0).then(|| tv[0].tv_wp / (p * min0.powf(p - 1.0)))
    });

    let monotone = match direction_of(q0) {
        Some(nondecreasing) => {
            let mut worst: f64 = 0.0;
            for s in &traj.snapshots {
                for w in s.q.values.windows(2) {
                    let d = w[1] - w[0];
                    let breach = if nondecreasing { -d } else { d };
                    worst = worst.max(breach);
                }
            }
            MonotoneReport {
                initial_direction: if nondecreasing {
                    "nondecreasing".into()
                } else {
                    "nonincreasing".into()
                },
                preserved: worst <= 1e-10,
                worst_sign_breach: worst.max(0.0),
            }
        }
        None => MonotoneReport {
            initial_direction: "none".into(),
            preserved: false,
            worst_sign_breach: f64::NAN,
        },
    };

    let p_condition = p_condition_check(q0, traj.scenario.p);

    let oleinik = finite_p.map(|p| {
        let params = compute_kappa(&traj.scenario.velocity, p, min0.max(1e-12), max0);
        let dx = traj.scenario.grid.dx();
        let mut series = Vec::new();
        let mut satisfied = true;
        for s in &traj.snapshots {
            if s.t <= 0.0 || !params.admissible {
                continue;
            }
            let min_slope = oleinik_min_slope(&s.w);
            let bound = -1.0 / (params.kappa * s.t);
            if min_slope < bound - 10.0 * dx {
                satisfied = false;
            }
            series.push(OleinikPoint {
                t: s.t,
                min_slope,
                bound,
            });
        }
        OleinikReport {
            params,
            series,
            satisfied,
        }
    });

    let identity_residual = if exponential && finite_p.is_some() {
        traj.snapshots
            .iter()
            .map(|s| {
                Ok(IdentityPoint {
                    t: s.t,
                    residual: check_exponential_identity(&s.q, &s.w)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    if traj.meta.density_floor_hit {
        notes.push("density approached zero during the run".into());
    }
    notes.extend(traj.meta.warnings.iter().cloned());

    Ok(DiagnosticsReport {
        max_principle: MaxPrincipleReport {
            min_violation,
            max_violation,
        },
        tv_series: tv,
        tv_initial_bound_ok,
        tv_w_reported_bound,
        monotone,
        p_condition,
        oleinik,
        identity_residual,
        mass_error: traj.meta.mass_error,
        notes,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub param: f64,
    pub l1_sup: f64,
    /// Distance ratio to the previous row (absent on the first row).
    pub ratio: Option<f64>,
    /// Log-log slope against the previous row's parameter.
    pub slope: Option<f64>,
}

/// Sup-over-time L¹ window distances of each run to a reference, with ratios
/// and log-log slopes between consecutive rows. Runs and reference must share
/// record times; grids may differ.
pub fn convergence_table(
    runs: &[(f64, &Trajectory)],
    reference: &[Field],
    window: (f64, f64),
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(runs.len());
    for (param, traj) in runs {
        match traj.scenario.uncontaminated_window() {
            Some((lo, hi)) if lo <= window.0 && window.1 <= hi => {}
            _ => {
                return Err(Error::WindowContaminated(format!(
                    "window [{}, {}] not inside the uncontaminated region",
                    window.0, window.1
                )))
            }
        }
        if traj.snapshots.len() != reference.len() {
            return Err(Error::InvalidScenario(
                "runs and reference must share record times".into(),
            ));
        }
        let mut dist: f64 = 0.0;
        for (snap, ref_q) in traj.snapshots.iter().zip(reference) {
            dist = dist.max(l1_distance_cross(&snap.q, ref_q, window));
        }
        let (ratio, slope) = match rows.last() {
            Some(prev) if prev.l1_sup > 0.0 && dist > 0.0 => {
                let r = prev.l1_sup / dist;
                let s = (prev.l1_sup.ln() - dist.ln()) / (prev.param.ln() - param.ln());
                (Some(r), Some(s))
            }
            _ => (None, None),
        };
        rows.push(ConvergenceRow {
            param: *param,
            l1_sup: dist,
            ratio,
            slope,
        });
    }
    Ok(rows)
}
