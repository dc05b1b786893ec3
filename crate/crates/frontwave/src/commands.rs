//! The four subcommands. Each returns the process exit status; errors that
//! abort a command map to a status through [`CliError::exit`].

use std::fs;
use std::path::Path;

use frontwave_core::{
    run_all, solve_traveling_wave, Error as CoreError, FrontProfile, GridLength, GridSpec,
    TravelingWave,
};
use log::{info, warn};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{set_path, ConfigFile};
use crate::error::{CliError, Exit};
use crate::io;
use crate::manifest::{timestamp, Residuals, RunManifest, RunStatus};

/// Outcome of one solve, as reported by `solve` and by sweep rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSummary {
    pub exit: Exit,
    pub manifest: RunManifest,
}

impl SolveSummary {
    pub fn verdict_label(&self) -> &'static str {
        match self.manifest.status {
            RunStatus::Passed | RunStatus::Converged => "pass",
            RunStatus::DiagnosticsFailed => "diagnostics_failed",
            RunStatus::NotConverged => "not_converged",
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// `solve --config <path> --out <dir>`.
pub fn solve(config: &Path, out: &Path) -> Result<Exit, CliError> {
    let file = ConfigFile::load(config)?;
    let summary = run_solve(&file, out)?;
    let m = &summary.manifest;
    match (m.c, &m.error) {
        (Some(c), _) => println!(
            "c = {c:.12}  n = {}  status = {:?}  ({})",
            m.n_final.unwrap_or(0),
            m.status,
            out.display()
        ),
        (None, Some(e)) => eprintln!("not converged: {e}"),
        (None, None) => {}
    }
    Ok(summary.exit)
}

/// Runs the continuation for `file` and writes every artifact into `out`.
/// Configuration errors abort before anything is written.
pub fn run_solve(file: &ConfigFile, out: &Path) -> Result<SolveSummary, CliError> {
    let cfg = file.solver_config()?;
    create_dir(out)?;
    let mut manifest = RunManifest::new(file.to_value(), timestamp(), cfg.resolved_length());
    let exit = match solve_traveling_wave(&cfg) {
        Ok(outcome) => {
            let wave = &outcome.wave;
            write_wave(out, wave, &mut manifest)?;
            manifest.converged = true;
            manifest.continuation = wave.history.clone();
            manifest.c = Some(wave.c);
            manifest.n_final = Some(wave.truncation);
            manifest.min_theta = Some(wave.theta.iter().copied().fold(f64::INFINITY, f64::min));
            manifest.residuals = Some(Residuals {
                front: wave.front_residual,
                linear: wave.linear_residual,
                trace_deviation: wave.trace_deviation,
            });
            match &outcome.report {
                Some(report) => {
                    io::write_json(&out.join(io::DIAGNOSTICS), report)?;
                    manifest
                        .artifacts
                        .insert("diagnostics".into(), io::DIAGNOSTICS.into());
                    manifest.verdict = Some(report.passed());
                    info!("diagnostics:\n{report}");
                    if report.passed() {
                        manifest.status = RunStatus::Passed;
                        Exit::Ok
                    } else {
                        for f in report.failures() {
                            warn!(
                                "check {} failed: measured {:e}, bound {:e}",
                                f.name, f.measured, f.bound
                            );
                        }
                        manifest.status = RunStatus::DiagnosticsFailed;
                        Exit::DiagnosticsFailed
                    }
                }
                None => {
                    manifest.status = RunStatus::Converged;
                    Exit::Ok
                }
            }
        }
        Err(
            e @ (CoreError::Config { .. } | CoreError::Domain(_) | CoreError::SizeMismatch { .. }),
        ) => {
            return Err(e.into());
        }
        Err(e) => {
            if let CoreError::NonConvergence { history, .. } = &e {
                manifest.continuation = history.clone();
            }
            manifest.error = Some(e.to_string());
            manifest.status = RunStatus::NotConverged;
            Exit::NotConverged
        }
    };
    manifest.finished = timestamp();
    io::write_json(&out.join(io::MANIFEST), &manifest)?;
    Ok(SolveSummary { exit, manifest })
}

fn write_wave(
    out: &Path,
    wave: &TravelingWave,
    manifest: &mut RunManifest,
) -> Result<(), CliError> {
    io::write_front(&out.join(io::FRONT), wave)?;
    io::write_trace(&out.join(io::TRACE), wave)?;
    io::write_field_dat(&out.join(io::FIELD_DAT), &wave.field)?;
    io::write_field_csv(&out.join(io::FIELD_CSV), &wave.field)?;
    for (key, name) in [
        ("front", io::FRONT),
        ("trace", io::TRACE),
        ("field", io::FIELD_DAT),
        ("field_csv", io::FIELD_CSV),
    ] {
        manifest.artifacts.insert(key.into(), name.into());
    }
    Ok(())
}

/// Rebuilds the wave stored in `dir` from its manifest and artifacts.
pub fn load_wave(dir: &Path) -> Result<(TravelingWave, ConfigFile), CliError> {
    let manifest_path = dir.join(io::MANIFEST);
    let manifest: RunManifest = io::read_json(&manifest_path)?;
    let file = ConfigFile::from_value(manifest.config.clone())?;
    let (Some(c), Some(n)) = (manifest.c, manifest.n_final) else {
        return Err(CliError::format(
            &manifest_path,
            "run did not converge; nothing to diagnose",
        ));
    };
    let kinetics = file.kinetics()?;
    let rate = file.rate()?;
    let front_path = dir.join(io::FRONT);
    let psi = io::read_columns(&front_path, &["psi"])?.remove(0);
    let theta = io::read_columns(&dir.join(io::TRACE), &["theta"])?.remove(0);
    let field = io::read_field_dat(&dir.join(io::FIELD_DAT), c)?;
    if psi.len() != field.grid().ny || theta.len() != psi.len() {
        return Err(CliError::format(
            dir,
            "front, trace and field sizes disagree",
        ));
    }
    let psi = FrontProfile::new(psi).map_err(|e| CliError::format(&front_path, e.to_string()))?;
    let wave = TravelingWave::from_parts(c, psi, field, theta, &kinetics, n, &rate)?;
    Ok((wave, file))
}

/// `diagnose --in <dir>`: re-runs every check on stored artifacts.
pub fn diagnose(dir: &Path) -> Result<Exit, CliError> {
    let (wave, file) = load_wave(dir)?;
    let report = run_all(&wave, &wave.kinetics, &file.rate()?);
    println!("{report}");
    Ok(if report.passed() {
        Exit::Ok
    } else {
        Exit::DiagnosticsFailed
    })
}

/// A parsed `--axis name=v1,v2,...` specification.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<Value>,
}

impl Axis {
    /// Values are read as JSON where possible, as strings otherwise.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let (name, list) = spec.split_once('=').ok_or_else(|| {
            CliError::Config(format!("axis `{spec}` is not of the form name=v1,v2,..."))
        })?;
        let name = name.trim();
        if name.is_empty() {
            return Err(CliError::Config("axis name is empty".into()));
        }
        let values: Vec<Value> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string())))
            .collect();
        if values.is_empty() {
            return Err(CliError::Config(format!("axis `{name}` has no values")));
        }
        Ok(Self {
            name: name.to_string(),
            values,
        })
    }
}

/// One sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: String,
    pub c: Option<f64>,
    pub min_theta: Option<f64>,
    pub iterations: usize,
    pub verdict: String,
}

impl SweepRow {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

/// `sweep --config <path> --axis <spec> --out <dir> [--jobs N]`. Each row
/// solves in its own subdirectory `row_<k>`.
pub fn sweep(
    config: &Path,
    axis: &str,
    out: &Path,
    jobs: usize,
) -> Result<(Exit, Vec<SweepRow>), CliError> {
    let text = fs::read_to_string(config).map_err(|e| CliError::io(config, e))?;
    let raw: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
    // defaults filled in, so optional sections can be swept too
    let template = ConfigFile::from_value(raw)?.to_value();
    let axis = Axis::parse(axis)?;
    let mut configs = Vec::with_capacity(axis.values.len());
    for v in &axis.values {
        let mut doc = template.clone();
        set_path(&mut doc, &axis.name, v.clone())?;
        configs.push((v.to_string(), ConfigFile::from_value(doc)));
    }
    create_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(k, (parameter, file))| {
                sweep_row(parameter, file, &out.join(format!("row_{k:03}")))
            })
            .collect()
    });
    let path = out.join("sweep.csv");
    let mut w =
        csv::Writer::from_path(&path).map_err(|e| CliError::format(&path, e.to_string()))?;
    let opt = |v: Option<f64>| v.map(io::real).unwrap_or_default();
    let fail = |e: csv::Error| CliError::format(&path, e.to_string());
    w.write_record(["parameter", "c", "min_theta", "iterations", "verdict"])
        .map_err(fail)?;
    for r in &rows {
        w.write_record([
            r.parameter.clone(),
            opt(r.c),
            opt(r.min_theta),
            r.iterations.to_string(),
            r.verdict.clone(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    for r in &rows {
        println!(
            "{} = {:<12} c = {:<22} {}",
            axis.name,
            r.parameter,
            r.c.map(|c| format!("{c:.12}"))
                .unwrap_or_else(|| "-".into()),
            r.verdict
        );
    }
    let exit = if rows.iter().all(SweepRow::passed) {
        Exit::Ok
    } else {
        Exit::DiagnosticsFailed
    };
    Ok((exit, rows))
}

fn sweep_row(parameter: &str, file: &Result<ConfigFile, CliError>, dir: &Path) -> SweepRow {
    let failed = |verdict: String| SweepRow {
        parameter: parameter.to_string(),
        c: None,
        min_theta: None,
        iterations: 0,
        verdict,
    };
    let file = match file {
        Ok(f) => f,
        Err(e) => return failed(format!("config_error: {e}")),
    };
    match run_solve(file, dir) {
        Ok(s) => SweepRow {
            parameter: parameter.to_string(),
            c: s.manifest.c,
            min_theta: s.manifest.min_theta,
            iterations: s.manifest.total_iterations(),
            verdict: s.verdict_label().to_string(),
        },
        Err(e) => failed(format!("error: {e}")),
    }
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub c: f64,
    /// `|c − c_ref|`, or the change from the previous level without a
    /// closed-form reference.
    pub error: Option<f64>,
    pub trace_deviation: f64,
    /// `log₂(error_{k−1} / error_k)`.
    pub order: Option<f64>,
}

/// Solves on `levels` grids, doubling `N_x` and `N_y` each time, with the
/// strip length of the coarsest level held fixed.
pub fn convergence_study(file: &ConfigFile, levels: usize) -> Result<Vec<Level>, CliError> {
    if levels < 2 {
        return Err(CliError::Config(format!(
            "need at least 2 refinement levels, got {levels}"
        )));
    }
    let base = file.solver_config()?;
    let length = base.resolved_length();
    let (r_min, r_max) = base.rate.bounds();
    let reference = (r_min == r_max)
        .then(|| base.kinetics.base().eval(1.0).map(|k| r_min * k))
        .transpose()?;
    let mut out: Vec<Level> = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut cfg = base.clone();
        cfg.grid = GridSpec {
            nx: base.grid.nx << k,
            ny: base.grid.ny << k,
            length: GridLength::Fixed(length),
        };
        cfg.diagnostics = false;
        let wave = solve_traveling_wave(&cfg)?.wave;
        let error = match (reference, out.last()) {
            (Some(r), _) => Some((wave.c - r).abs()),
            (None, Some(prev)) => Some((wave.c - prev.c).abs()),
            (None, None) => None,
        };
        let order = match (out.last().and_then(|p| p.error), error) {
            (Some(a), Some(b)) => Some((a / b).log2()),
            _ => None,
        };
        info!("level {k}: c = {:.12}, error {:?}", wave.c, error);
        out.push(Level {
            nx: cfg.grid.nx,
            ny: cfg.grid.ny,
            hx: length / cfg.grid.nx as f64,
            hy: 1.0 / cfg.grid.ny as f64,
            c: wave.c,
            error,
            trace_deviation: wave.trace_deviation,
            order,
        });
    }
    Ok(out)
}

/// `convergence --config <path> --levels K --out <dir>`.
pub fn convergence(config: &Path, levels: usize, out: &Path) -> Result<Exit, CliError> {
    let file = ConfigFile::load(config)?;
    let table = convergence_study(&file, levels)?;
    create_dir(out)?;
    let path = out.join("convergence.csv");
    let mut w =
        csv::Writer::from_path(&path).map_err(|e| CliError::format(&path, e.to_string()))?;
    let fail = |e: csv::Error| CliError::format(&path, e.to_string());
    let opt = |v: Option<f64>| v.map(io::real).unwrap_or_default();
    w.write_record([
        "nx",
        "ny",
        "h_x",
        "h_y",
        "c",
        "error",
        "trace_deviation",
        "order",
    ])
    .map_err(fail)?;
    for l in &table {
        w.write_record([
            l.nx.to_string(),
            l.ny.to_string(),
            io::real(l.hx),
            io::real(l.hy),
            io::real(l.c),
            opt(l.error),
            io::real(l.trace_deviation),
            opt(l.order),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    for l in &table {
        println!(
            "{:>6} x {:<5} c = {:.12}  error = {:<12}  order = {}",
            l.nx,
            l.ny,
            l.c,
            l.error
                .map(|e| format!("{e:.3e}"))
                .unwrap_or_else(|| "-".into()),
            l.order
                .map(|o| format!("{o:.3}"))
                .unwrap_or_else(|| "-".into())
        );
    }
    Ok(Exit::Ok)
}
