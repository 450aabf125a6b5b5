//! Configuration, command implementations and output files.

mod cli;
mod config;
mod output;

use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::caputo::FractionalOrder;
use crate::diagnostics::{
    convergence_metrics, lyapunov_monitor, pattern_metrics, sup_distance, ConvergenceMetrics, LyapunovVerdict,
};
use crate::error::{Error, Result};
use crate::kinetics::{equilibrium, jacobian_summary, Equilibrium, JacobianSummary, SystemParams};
use crate::solver::{run, FieldState, RunOutput, SimConfig};
use crate::stability::{
    global_stability_condition, ode_classify, pde_classify, OdeClassification, OdeVerdict, OverallVerdict,
    StabilityReport,
};
use crate::verify::{run_verification, CheckResult, VerifyOptions};

pub use cli::{run_cli, Cli, Command};
pub use config::{parse_config, AnalysisSection, IcSection, OutputSection, RunConfig, SolverSection, TimeSection};
pub use output::{
    field_2d_csv, field_pgm, fmt_num, lyapunov_csv, pattern_metrics_csv, probe_csv, snapshot_1d_csv, FileRole,
    ManifestEntry, OutputDir, RunManifest, RunStatus,
};

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    /// I/O, configuration or usage failure.
    Failure = 1,
    NonFiniteAbort = 2,
    Unstable = 3,
    /// Marginal or indeterminate stability verdict.
    Marginal = 4,
    VerifyFailed = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_verdict(v: OverallVerdict) -> Self {
        match v {
            OverallVerdict::Stable => ExitStatus::Success,
            OverallVerdict::TuringUnstable
            | OverallVerdict::OscillatoryUnstable
            | OverallVerdict::HomogeneousUnstable => ExitStatus::Unstable,
            OverallVerdict::Marginal | OverallVerdict::Indeterminate => ExitStatus::Marginal,
        }
    }

    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::NonFinite { .. } => ExitStatus::NonFiniteAbort,
            _ => ExitStatus::Failure,
        }
    }

    /// Exit status of `analyze` given its verdict and whether writing the report succeeded.
    pub fn for_analysis(verdict: OverallVerdict, io_ok: bool) -> Self {
        if io_ok {
            ExitStatus::for_verdict(verdict)
        } else {
            ExitStatus::Failure
        }
    }
}

/// Stability summary for a diffusion-free (0D) configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KineticReport {
    pub params: SystemParams,
    pub equilibrium: Equilibrium,
    pub jacobian: JacobianSummary,
    pub ode: OdeClassification,
    pub critical_order: Option<f64>,
    pub global_condition: bool,
    pub overall_verdict: OverallVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AnalysisReport {
    Kinetic(Box<KineticReport>),
    Spatial(Box<StabilityReport>),
}

impl AnalysisReport {
    pub fn verdict(&self) -> OverallVerdict {
        match self {
            AnalysisReport::Kinetic(r) => r.overall_verdict,
            AnalysisReport::Spatial(r) => r.overall_verdict,
        }
    }
}

pub fn analyze(cfg: &RunConfig) -> Result<AnalysisReport> {
    match cfg.geometry.neumann_geometry() {
        Some(geometry) => Ok(AnalysisReport::Spatial(Box::new(pde_classify(
            &cfg.params,
            geometry,
            cfg.analysis.modes,
        )?))),
        None => {
            let ode = ode_classify(&cfg.params);
            let overall_verdict = match ode.verdict {
                OdeVerdict::Stable => OverallVerdict::Stable,
                OdeVerdict::MarginalAtGivenDelta => OverallVerdict::Marginal,
                OdeVerdict::Unstable if ode.eigs.is_real() => OverallVerdict::HomogeneousUnstable,
                OdeVerdict::Unstable => OverallVerdict::OscillatoryUnstable,
            };
            Ok(AnalysisReport::Kinetic(Box::new(KineticReport {
                params: cfg.params,
                equilibrium: equilibrium(&cfg.params),
                jacobian: jacobian_summary(&cfg.params),
                ode,
                critical_order: ode.critical_order,
                global_condition: global_stability_condition(&cfg.params),
                overall_verdict,
            })))
        }
    }
}

/// Writes `report.json` and `manifest.json` under `out`.
pub fn cmd_analyze(cfg: &RunConfig, out: &Path) -> Result<AnalysisReport> {
    let report = analyze(cfg)?;
    let mut dir = OutputDir::create(out)?;
    dir.write_json("report.json", FileRole::Report, &report)?;
    dir.finish("analyze", None, serde_json::to_value(cfg)?, RunStatus::Completed)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub lyapunov_verdict: LyapunovVerdict,
    pub lyapunov_max_ratio: f64,
    pub lyapunov_final_ratio: f64,
    /// One entry per probe.
    pub convergence: Vec<ConvergenceMetrics>,
    /// Largest per-node distance to the equilibrium at the end, relative to its norm.
    pub final_sup_distance: f64,
    pub max_region_excursion: f64,
    pub left_region_at_step: Option<usize>,
}

pub struct SimulateOutcome {
    pub manifest: RunManifest,
    /// `None` when the run aborted.
    pub output: Option<RunOutput>,
    pub metrics: Option<RunMetrics>,
}

impl SimulateOutcome {
    pub fn exit_status(&self) -> ExitStatus {
        match self.manifest.status {
            RunStatus::Completed => ExitStatus::Success,
            RunStatus::Aborted { .. } => ExitStatus::NonFiniteAbort,
        }
    }
}

/// Runs the solver and writes snapshots, probe series, the Lyapunov series,
/// pattern metrics (2D) and the manifest. A non-finite abort is reported in
/// the manifest rather than as an error.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path, seed: Option<u64>) -> Result<SimulateOutcome> {
    let sim = cfg.sim_config(seed)?;
    simulate_into(&sim, serde_json::to_value(cfg)?, out)
}

fn simulate_into(sim: &SimConfig, echo: serde_json::Value, out: &Path) -> Result<SimulateOutcome> {
    let mut dir = OutputDir::create(out)?;
    let output = match run(sim) {
        Ok(o) => o,
        Err(Error::NonFinite { step, field, node }) => {
            let status = RunStatus::Aborted {
                step,
                field: field.to_string(),
                node,
            };
            let manifest = dir.finish("simulate", Some(sim.seed), echo, status)?;
            return Ok(SimulateOutcome {
                manifest,
                output: None,
                metrics: None,
            });
        }
        Err(e) => return Err(e),
    };
    let grid = &sim.grid;

    match grid.dim() {
        1 => {
            for s in &output.snapshots {
                dir.write(
                    format!("snapshot_t{:06}.csv", s.step),
                    FileRole::Snapshot,
                    snapshot_1d_csv(&s.state, grid).as_bytes(),
                )?;
            }
        }
        2 => {
            let mut rows = Vec::with_capacity(output.snapshots.len());
            for s in &output.snapshots {
                for (name, field) in [("u", &s.state.u), ("v", &s.state.v)] {
                    dir.write(
                        format!("{name}_t{:06}.csv", s.step),
                        FileRole::Snapshot,
                        field_2d_csv(field, grid).as_bytes(),
                    )?;
                    dir.write(
                        format!("{name}_t{:06}.pgm", s.step),
                        FileRole::Render,
                        &field_pgm(field, grid),
                    )?;
                }
                rows.push((s.step, s.state.t, pattern_metrics(&s.state, grid)?));
            }
            dir.write(
                "pattern_metrics.csv",
                FileRole::Metrics,
                pattern_metrics_csv(&rows).as_bytes(),
            )?;
        }
        _ => {}
    }
    for (k, probe) in output.probes.iter().enumerate() {
        dir.write(format!("probe_{k}.csv"), FileRole::Probe, probe_csv(probe).as_bytes())?;
    }

    let states: Vec<FieldState> = output.snapshots.iter().map(|s| s.state.clone()).collect();
    let lyap = lyapunov_monitor(&states, &sim.params, grid)?;
    dir.write(
        "lyapunov.csv",
        FileRole::Metrics,
        lyapunov_csv(&lyap.samples).as_bytes(),
    )?;
    let eq = equilibrium(&sim.params);
    let metrics = RunMetrics {
        lyapunov_verdict: lyap.verdict,
        lyapunov_max_ratio: lyap.max_ratio,
        lyapunov_final_ratio: lyap.final_ratio,
        convergence: output
            .probes
            .iter()
            .map(|p| convergence_metrics(p, &eq))
            .collect::<Result<_>>()?,
        final_sup_distance: sup_distance(output.final_state(), &eq),
        max_region_excursion: output.max_region_excursion,
        left_region_at_step: output.left_region_at,
    };
    dir.write_json("metrics.json", FileRole::Metrics, &metrics)?;
    let manifest = dir.finish("simulate", Some(sim.seed), echo, RunStatus::Completed)?;
    info!("wrote {} files to {}", manifest.files.len(), out.display());
    Ok(SimulateOutcome {
        manifest,
        output: Some(output),
        metrics: Some(metrics),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub final_error: f64,
    pub tail_amplitude: f64,
}

/// `steps` evenly spaced orders from `from` to `to`, duplicates removed.
pub fn sweep_orders(from: f64, to: f64, steps: usize) -> Result<Vec<FractionalOrder>> {
    if !(from > 0.0 && from <= to && to <= 1.0) {
        return Err(Error::Usage(format!(
            "need 0 < from <= to <= 1, got from={from} to={to}"
        )));
    }
    if steps < 2 {
        return Err(Error::Usage(format!("need steps >= 2, got {steps}")));
    }
    let mut out: Vec<f64> = (0..steps)
        .map(|i| {
            if i + 1 == steps {
                to
            } else {
                from + (to - from) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    out.dedup();
    out.into_iter().map(FractionalOrder::new).collect()
}

/// Runs one simulation per order, each in its own `delta_<i>` directory, and
/// writes `sweep.csv`. Metrics come from the first probe; a spatial run with
/// no probes is probed at the domain centre.
pub fn cmd_sweep_delta(cfg: &RunConfig, from: f64, to: f64, steps: usize, out: &Path) -> Result<Vec<SweepRow>> {
    let orders = sweep_orders(from, to, steps)?;
    let mut base = cfg.sim_config(None)?;
    if base.grid.dim() > 0 && base.probes.is_empty() {
        base.probes = vec![base.grid.lengths().iter().map(|l| 0.5 * l).collect()];
    }
    let mut dir = OutputDir::create(out)?;
    let eq = equilibrium(&cfg.params);
    let results: Vec<Result<(SweepRow, PathBuf, Vec<ManifestEntry>)>> = orders
        .par_iter()
        .enumerate()
        .map(|(i, &delta)| {
            let mut sim = base.clone();
            sim.params = sim.params.with_delta(delta);
            let mut echo = cfg.clone();
            echo.params = sim.params;
            let sub = PathBuf::from(format!("delta_{i}"));
            let outcome = simulate_into(&sim, serde_json::to_value(&echo)?, &out.join(&sub))?;
            if let RunStatus::Aborted { step, field, node } = &outcome.manifest.status {
                return Err(Error::NonFinite {
                    step: *step,
                    field: if field == "u" { "u" } else { "v" },
                    node: *node,
                });
            }
            let output = outcome.output.expect("completed run has output");
            let m = convergence_metrics(&output.probes[0], &eq)?;
            let row = SweepRow {
                delta: delta.value(),
                final_error: m.final_error,
                tail_amplitude: m.tail_amplitude,
            };
            Ok((row, sub, outcome.manifest.files))
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut csv = String::from("delta,final_error,tail_amplitude\n");
    for r in results {
        let (row, sub, files) = r?;
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_num(row.delta),
            fmt_num(row.final_error),
            fmt_num(row.tail_amplitude)
        ));
        for f in files {
            dir.adopt(sub.join(f.path), f.role);
        }
        dir.adopt(sub.join("manifest.json"), FileRole::Manifest);
        rows.push(row);
    }
    dir.write("sweep.csv", FileRole::Metrics, csv.as_bytes())?;
    dir.finish(
        "sweep-delta",
        Some(base.seed),
        serde_json::to_value(cfg)?,
        RunStatus::Completed,
    )?;
    Ok(rows)
}

pub fn cmd_verify(opts: &VerifyOptions) -> (Vec<CheckResult>, ExitStatus) {
    let results = run_verification(opts);
    let status = if results.iter().all(|r| r.passed) {
        ExitStatus::Success
    } else {
        ExitStatus::VerifyFailed
    };
    (results, status)
}
