//! Plot-ready text output: trajectory CSV, diagnostics report and
//! convergence tables. All floats are written with 17 significant digits so
//! re-parsing reproduces the exact bit pattern.

use std::fmt::Write as _;

use crate::diagnostics::{ConvergenceRow, DiagnosticsReport};
use crate::godunov::LocalTrajectory;
use crate::solver::Trajectory;

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trajectory CSV with header `t,x,q,W`, one row per (snapshot, cell).
/// x is the cell center; W is the average of the two edge values.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,q,W\n");
    for snap in &traj.snapshots {
        let grid = snap.q.grid;
        for i in 0..grid.n_cells {
            let w_mid = 0.5 * (snap.w.w[i] + snap.w.w[i + 1]);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(snap.t),
                fmt_f64(grid.center(i)),
                fmt_f64(snap.q.values[i]),
                fmt_f64(w_mid)
            );
        }
    }
    out
}

/// Same layout for the local reference; the local limit identifies W with q.
pub fn local_trajectory_csv(traj: &LocalTrajectory) -> String {
    let mut out = String::from("t,x,q,W\n");
    for snap in &traj.snapshots {
        let grid = snap.q.grid;
        for i in 0..grid.n_cells {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(snap.t),
                fmt_f64(grid.center(i)),
                fmt_f64(snap.q.values[i]),
                fmt_f64(snap.q.values[i])
            );
        }
    }
    out
}

/// Metadata sidecar: scenario, solver config and run bookkeeping.
pub fn metadata_json(
    traj: &Trajectory,
    config: &crate::solver::SolverConfig,
) -> serde_json::Value {
    serde_json::json!({
        "scenario": traj.scenario,
        "solver": config,
        "meta": traj.meta,
    })
}

pub fn report_json(report: &DiagnosticsReport) -> String {
    // DiagnosticsReport contains only finite numbers by construction, except
    // worst_sign_breach for non-monotone data; map NaN to null via serde_json.
    serde_json::to_string_pretty(report).expect("report serialization")
}

/// Flat CSV of the TV series: `t,tv_q,tv_wp,tv_w`.
pub fn tv_series_csv(report: &DiagnosticsReport) -> String {
    let mut out = String::from("t,tv_q,tv_wp,tv_w\n");
    for p in &report.tv_series {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.tv_q),
            fmt_f64(p.tv_wp),
            fmt_f64(p.tv_w)
        );
    }
    out
}

/// Convergence table CSV with header `param,l1_sup,ratio,slope`; ratio and
/// slope are empty on the first row.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("param,l1_sup,ratio,slope\n");
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.param),
            fmt_f64(r.l1_sup),
            opt(r.ratio),
            opt(r.slope)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Datum;
    use crate::grid::Grid;
    use crate::kernel::Kernel;
    use crate::scenario::{PNorm, Scenario};
    use crate::solver::{solve, SolverConfig};
    use crate::velocity::VelocityModel;

    #[test]
    fn f64_round_trip() {
        for v in [0.1, 1.0 / 3.0, 7.25e-12, -4.0, 0.0] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{s}");
        }
    }

    fn small_traj() -> (Trajectory, SolverConfig) {
        let s = Scenario {
            initial: Datum::Riemann {
                a: 0.5,
                b: 1.0,
                jump: 0.0,
            },
            velocity: VelocityModel::Linear,
            kernel: Kernel::exponential(),
            p: PNorm::Finite(1.0),
            eta: 0.5,
            horizon: 0.1,
            grid: Grid::new(-4.0, 4.0, 40).unwrap(),
            record_times: vec![0.0, 0.1],
        };
        let c = SolverConfig::default();
        (solve(&s, &c).unwrap(), c)
    }

    #[test]
    fn csv_shape_and_determinism() {
        let (traj, _) = small_traj();
        let a = trajectory_csv(&traj);
        let b = trajectory_csv(&traj);
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], "t,x,q,W");
        assert_eq!(lines.len(), 1 + 2 * 40);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 4);
        }
    }

    #[test]
    fn metadata_includes_scenario_and_meta() {
        let (traj, c) = small_traj();
        let v = metadata_json(&traj, &c);
        assert!(v["scenario"]["eta"].is_number());
        assert!(v["meta"]["steps"].is_number());
        assert!(v["solver"]["cfl"].is_number());
    }

    #[test]
    fn convergence_csv_layout() {
        let rows = vec![
            ConvergenceRow {
                param: 0.4,
                l1_sup: 0.1,
                ratio: None,
                slope: None,
            },
            ConvergenceRow {
                param: 0.2,
                l1_sup: 0.05,
                ratio: Some(2.0),
                slope: Some(1.0),
            },
        ];
        let csv = convergence_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "param,l1_sup,ratio,slope");
        assert!(lines[1].ends_with(",,"));
        assert_eq!(lines.len(), 3);
    }
}
