//! Command-line front end for the nonlocal conservation-law solver.
//!
//! Subcommands: `solve`, `sweep`, `compare-local`, `limit-p0`, `diagnose`,
//! `repro-figures`. All outputs go to `--out` together with a `manifest.json`
//! listing every emitted file with its SHA-256 hash; runs are deterministic,
//! so reruns produce byte-identical files.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid configuration,
//! 3 invariant violation under `--strict`.

mod runio;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use plaw_core::diagnostics::{convergence_table, diagnose};
use plaw_core::godunov::{solve_godunov, LocalScenario};
use plaw_core::io::{
    convergence_csv, fmt_f64, local_trajectory_csv, metadata_json, report_json, trajectory_csv,
    tv_series_csv,
};
use plaw_core::solver::{solve, Scheme, SolverConfig, Trajectory};
use plaw_core::{
    l1_distance_cross, Datum, Error as CoreError, Field, Grid, Kernel, PNorm, Scenario,
    VelocityModel,
};

use runio::OutDir;

const EXIT_INTERNAL: u8 = 1;
const EXIT_INVALID_CONFIG: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "plaw",
    about = "Solver for conservation laws with L^p-nonlocal velocity",
    version
)]
struct Cli {
    /// Output directory for all emitted files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Abort with exit code 3 when a proved invariant is violated.
    #[arg(long, global = true)]
    strict: bool,

    /// Worker threads for independent runs (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trajectory, metadata and diagnostics.
    Solve { config: PathBuf },
    /// Run a parameter sweep and write a convergence table against the
    /// matching limit reference (Godunov for eta, the p=0 solver for p).
    Sweep {
        config: PathBuf,
        /// Which parameter to sweep.
        #[arg(long, value_parser = ["eta", "p"])]
        param: String,
        /// Comma-separated parameter values, e.g. `0.4,0.2,0.1,0.05`.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Run a scenario and the local Godunov reference on the same datum and
    /// write both trajectories plus their L1 window distance over time.
    CompareLocal { config: PathBuf },
    /// Convenience p-sweep toward the geometric-mean operator: runs the
    /// scenario at small p values against its p=0 solution.
    LimitP0 {
        config: PathBuf,
        /// Comma-separated p values (default `0.4,0.2,0.1,0.05`).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Run one scenario and write only the diagnostics report.
    Diagnose { config: PathBuf },
    /// Emit the plot-ready CSV bundles for the built-in figure presets.
    ReproFigures {
        /// Figure id: 1 (p across kernels/orientations), 2 (p -> 0),
        /// 3 (p -> infinity), 4 (space-time surfaces).
        #[arg(long)]
        figure: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        // Sweeps fan out over rayon; a single solve is sequential in time.
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}

/// Map an error chain to the documented exit codes.
fn classify(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::InvariantViolation(_) => EXIT_INVARIANT,
                CoreError::InvalidGrid(_)
                | CoreError::InvalidField(_)
                | CoreError::InvalidKernel(_)
                | CoreError::InvalidScenario(_)
                | CoreError::Unsupported(_)
                | CoreError::WindowContaminated(_) => EXIT_INVALID_CONFIG,
                _ => EXIT_INTERNAL,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some()
            || cause.downcast_ref::<ConfigError>().is_some()
        {
            return EXIT_INVALID_CONFIG;
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            if io.kind() == std::io::ErrorKind::NotFound {
                return EXIT_INVALID_CONFIG;
            }
        }
    }
    EXIT_INTERNAL
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct ConfigError(String);

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve { config } => cmd_solve(cli, config),
        Command::Sweep {
            config,
            param,
            values,
        } => cmd_sweep(cli, config, param, values),
        Command::CompareLocal { config } => cmd_compare_local(cli, config),
        Command::LimitP0 { config, values } => {
            let defaults = vec![0.4, 0.2, 0.1, 0.05];
            cmd_sweep(cli, config, "p", values.as_ref().unwrap_or(&defaults))
        }
        Command::Diagnose { config } => cmd_diagnose(cli, config),
        Command::ReproFigures { figure } => cmd_repro_figures(cli, *figure),
    }
}

/// A config file is a scenario JSON object, optionally carrying a `solver`
/// block with scheme / cfl / time-integrator / picard overrides.
fn load_config(path: &Path, strict: bool) -> Result<(Scenario, SolverConfig)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let scenario: Scenario = serde_json::from_value(value.clone())
        .with_context(|| format!("interpreting {} as a scenario", path.display()))?;
    let mut solver: SolverConfig = match value.get("solver") {
        Some(s) => serde_json::from_value(s.clone())
            .with_context(|| format!("interpreting the solver block of {}", path.display()))?,
        None => SolverConfig::default(),
    };
    if strict {
        solver.strict_invariants = true;
    }
    scenario.validate()?;
    Ok((scenario, solver))
}

fn solve_checked(scenario: &Scenario, config: &SolverConfig) -> Result<Trajectory> {
    solve(scenario, config).map_err(anyhow::Error::from)
}

fn cmd_solve(cli: &Cli, config_path: &Path) -> Result<()> {
    let (scenario, config) = load_config(config_path, cli.strict)?;
    let traj = solve_checked(&scenario, &config)?;
    let report = diagnose(&traj)?;

    let mut out = OutDir::new(&cli.out, "solve")?;
    out.manifest.scenarios.push(serde_json::to_value(&scenario)?);
    out.manifest.solver = Some(serde_json::to_value(config)?);
    out.write("trajectory.csv", &trajectory_csv(&traj))?;
    out.write(
        "metadata.json",
        &serde_json::to_string_pretty(&metadata_json(&traj, &config))?,
    )?;
    out.write("report.json", &report_json(&report))?;
    out.write("tv_series.csv", &tv_series_csv(&report))?;
    out.finish()
}

fn cmd_diagnose(cli: &Cli, config_path: &Path) -> Result<()> {
    let (scenario, config) = load_config(config_path, cli.strict)?;
    let traj = solve_checked(&scenario, &config)?;
    let report = diagnose(&traj)?;

    let mut out = OutDir::new(&cli.out, "diagnose")?;
    out.manifest.scenarios.push(serde_json::to_value(&scenario)?);
    out.manifest.solver = Some(serde_json::to_value(config)?);
    out.write("report.json", &report_json(&report))?;
    out.write("tv_series.csv", &tv_series_csv(&report))?;
    out.finish()
}

fn cmd_sweep(cli: &Cli, config_path: &Path, param: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(ConfigError("sweep needs at least one value".into()).into());
    }
    let (base, config) = load_config(config_path, cli.strict)?;

    // Build the per-value scenarios, then validate all before running any.
    let scenarios: Vec<(f64, Scenario)> = values
        .iter()
        .map(|&v| {
            let mut s = base.clone();
            match param {
                "eta" => s.eta = v,
                "p" => s.p = PNorm::Finite(v),
                other => {
                    return Err(anyhow!(ConfigError(format!(
                        "unknown sweep parameter \"{other}\" (expected eta or p)"
                    ))))
                }
            }
            s.validate().map_err(anyhow::Error::from)?;
            Ok((v, s))
        })
        .collect::<Result<_>>()?;

    // The limit reference: Godunov for eta -> 0, the p=0 operator for p -> 0.
    let reference: Vec<Field> = match param {
        "eta" => {
            let local = LocalScenario {
                initial: base.initial,
                velocity: base.velocity.clone(),
                horizon: base.horizon,
                grid: Grid::new(base.grid.x_min, base.grid.x_max, 5 * base.grid.n_cells)?,
                record_times: base.record_times.clone(),
            };
            solve_godunov(&local, &config)?
                .snapshots
                .into_iter()
                .map(|s| s.q)
                .collect()
        }
        _ => {
            let mut s = base.clone();
            s.p = PNorm::Zero;
            s.validate().context("the p=0 reference scenario")?;
            solve_checked(&s, &config)?
                .snapshots
                .into_iter()
                .map(|s| s.q)
                .collect()
        }
    };

    // Use the intersection of the runs' uncontaminated windows.
    let window = scenarios
        .iter()
        .try_fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), (_, s)| {
            let (a, b) = s.uncontaminated_window().ok_or_else(|| {
                CoreError::WindowContaminated("no uncontaminated region on this grid".into())
            })?;
            anyhow::Ok((lo.max(a), hi.min(b)))
        })?;

    let runs: Vec<(f64, Trajectory)> = scenarios
        .par_iter()
        .map(|(v, s)| Ok((*v, solve_checked(s, &config)?)))
        .collect::<Result<_>>()?;

    let borrowed: Vec<(f64, &Trajectory)> = runs.iter().map(|(v, t)| (*v, t)).collect();
    let table = convergence_table(&borrowed, &reference, window)?;

    let mut out = OutDir::new(&cli.out, &format!("sweep --param {param}"))?;
    out.manifest.solver = Some(serde_json::to_value(config)?);
    for ((v, s), (_, traj)) in scenarios.iter().zip(&runs) {
        out.manifest.scenarios.push(serde_json::to_value(s)?);
        out.write(
            &format!("run_{param}={v}/trajectory.csv"),
            &trajectory_csv(traj),
        )?;
    }
    out.write("convergence.csv", &convergence_csv(&table))?;
    out.finish()?;

    // Echo the table for interactive use.
    print!("{}", convergence_csv(&table));
    Ok(())
}

fn cmd_compare_local(cli: &Cli, config_path: &Path) -> Result<()> {
    let (scenario, config) = load_config(config_path, cli.strict)?;
    let traj = solve_checked(&scenario, &config)?;

    let local = LocalScenario {
        initial: scenario.initial,
        velocity: scenario.velocity.clone(),
        horizon: scenario.horizon,
        grid: scenario.grid,
        record_times: scenario.record_times.clone(),
    };
    let local_traj = solve_godunov(&local, &config)?;

    let window = scenario
        .uncontaminated_window()
        .unwrap_or((scenario.grid.x_min, scenario.grid.x_max));
    let mut dist = String::from("t,l1\n");
    for (snap, loc) in traj.snapshots.iter().zip(&local_traj.snapshots) {
        let d = l1_distance_cross(&snap.q, &loc.q, window);
        let _ = writeln!(dist, "{},{}", fmt_f64(snap.t), fmt_f64(d));
    }

    let mut out = OutDir::new(&cli.out, "compare-local")?;
    out.manifest.scenarios.push(serde_json::to_value(&scenario)?);
    out.manifest.solver = Some(serde_json::to_value(config)?);
    out.write("trajectory.csv", &trajectory_csv(&traj))?;
    out.write("local_trajectory.csv", &local_trajectory_csv(&local_traj))?;
    out.write("distance.csv", &dist)?;
    out.finish()
}

// ---------------------------------------------------------------------------
// Figure presets. Shared setup: domain [-4, 4], 1600 cells, eta = 0.5,
// V(x) = 1 - x, Riemann datum between 0.5 and 1, horizon T = 0.5.
// ---------------------------------------------------------------------------

fn preset_scenario(kernel: Kernel, p: PNorm, increasing: bool) -> Scenario {
    let (a, b) = if increasing { (0.5, 1.0) } else { (1.0, 0.5) };
    Scenario {
        initial: Datum::Riemann { a, b, jump: 0.0 },
        velocity: VelocityModel::Linear,
        kernel,
        p,
        eta: 0.5,
        horizon: 0.5,
        grid: Grid::new(-4.0, 4.0, 1600).unwrap(),
        record_times: vec![0.0, 0.25, 0.5],
    }
}

fn preset_config(strict: bool, p: PNorm) -> SolverConfig {
    SolverConfig {
        // The weighted-supremum operator needs the monotone flux scheme.
        scheme: if matches!(p, PNorm::Infinity) {
            Scheme::UpwindFv
        } else {
            Scheme::Lagrangian
        },
        strict_invariants: strict,
        ..SolverConfig::default()
    }
}

/// Label used in file names and the `p` CSV column.
fn p_label(p: PNorm) -> String {
    match p {
        PNorm::Finite(v) => format!("{v}"),
        PNorm::Zero => "zero".into(),
        PNorm::Infinity => "infinity".into(),
    }
}

/// One profile-plot CSV: final-time (q, W) profiles for several exponents.
fn profile_bundle(
    out: &mut OutDir,
    name: &str,
    kernel: &Kernel,
    ps: &[PNorm],
    increasing: bool,
    strict: bool,
) -> Result<()> {
    let runs: Vec<(PNorm, Trajectory)> = ps
        .par_iter()
        .map(|&p| {
            let s = preset_scenario(kernel.clone(), p, increasing);
            s.validate()?;
            let traj = solve(&s, &preset_config(strict, p))?;
            Ok((p, traj))
        })
        .collect::<plaw_core::Result<_>>()?;

    let mut csv = String::from("p,x,q,W\n");
    for (p, traj) in &runs {
        let snap = traj.snapshots.last().expect("final snapshot");
        let grid = snap.q.grid;
        let label = p_label(*p);
        for i in 0..grid.n_cells {
            let w_mid = 0.5 * (snap.w.w[i] + snap.w.w[i + 1]);
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                label,
                fmt_f64(grid.center(i)),
                fmt_f64(snap.q.values[i]),
                fmt_f64(w_mid)
            );
        }
        out.manifest
            .scenarios
            .push(serde_json::to_value(&traj.scenario)?);
    }
    out.write(name, &csv)
}

fn cmd_repro_figures(cli: &Cli, figure: u32) -> Result<()> {
    let strict = cli.strict;
    let mut out = OutDir::new(&cli.out, &format!("repro-figures --figure {figure}"))?;
    out.manifest.preset = Some(format!("figure-{figure}"));
    match figure {
        1 => {
            // Exponent range across both kernels and both jump orientations.
            let ps: Vec<PNorm> = [0.25, 0.5, 1.0, 2.0, 4.0]
                .iter()
                .map(|&v| PNorm::Finite(v))
                .collect();
            for (kname, kernel) in [
                ("exponential", Kernel::exponential()),
                ("constant", Kernel::constant()),
            ] {
                for (oname, inc) in [("increasing", true), ("decreasing", false)] {
                    profile_bundle(
                        &mut out,
                        &format!("fig1_{kname}_{oname}.csv"),
                        &kernel,
                        &ps,
                        inc,
                        strict,
                    )?;
                }
            }
        }
        2 => {
            // Approach to the geometric-mean operator (finite support needed).
            let mut ps: Vec<PNorm> = [1.0, 0.5, 0.25, 0.1, 0.05]
                .iter()
                .map(|&v| PNorm::Finite(v))
                .collect();
            ps.push(PNorm::Zero);
            let kernel = Kernel::constant();
            for (oname, inc) in [("increasing", true), ("decreasing", false)] {
                profile_bundle(
                    &mut out,
                    &format!("fig2_{oname}.csv"),
                    &kernel,
                    &ps,
                    inc,
                    strict,
                )?;
            }
        }
        3 => {
            // Approach to the weighted-supremum operator.
            let mut ps: Vec<PNorm> = [1.0, 2.0, 4.0, 8.0, 16.0]
                .iter()
                .map(|&v| PNorm::Finite(v))
                .collect();
            ps.push(PNorm::Infinity);
            let kernel = Kernel::constant();
            for (oname, inc) in [("increasing", true), ("decreasing", false)] {
                profile_bundle(
                    &mut out,
                    &format!("fig3_{oname}.csv"),
                    &kernel,
                    &ps,
                    inc,
                    strict,
                )?;
            }
        }
        4 => {
            // Space-time density surfaces for three exponents.
            let times: Vec<f64> = (0..=50).map(|i| 0.5 * i as f64 / 50.0).collect();
            let runs: Vec<(PNorm, Trajectory)> = [1.0, 4.0, 16.0]
                .par_iter()
                .map(|&v| {
                    let p = PNorm::Finite(v);
                    let mut s = preset_scenario(Kernel::constant(), p, true);
                    s.record_times = times.clone();
                    s.validate()?;
                    let traj = solve(&s, &preset_config(strict, p))?;
                    Ok((p, traj))
                })
                .collect::<plaw_core::Result<_>>()?;
            for (p, traj) in &runs {
                let mut csv = String::from("t,x,q\n");
                for snap in &traj.snapshots {
                    let grid = snap.q.grid;
                    for i in 0..grid.n_cells {
                        let _ = writeln!(
                            csv,
                            "{},{},{}",
                            fmt_f64(snap.t),
                            fmt_f64(grid.center(i)),
                            fmt_f64(snap.q.values[i])
                        );
                    }
                }
                out.manifest
                    .scenarios
                    .push(serde_json::to_value(&traj.scenario)?);
                out.write(&format!("fig4_p={}.csv", p_label(*p)), &csv)?;
            }
        }
        other => {
            return Err(ConfigError(format!(
                "unknown figure id {other} (expected 1, 2, 3 or 4)"
            ))
            .into())
        }
    }
    out.finish()
}
