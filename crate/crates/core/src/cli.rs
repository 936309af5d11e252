//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when parameters are inadmissible or a model
//! or domain error occurs, 2 for usage errors and unreadable input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dynamics::{
    basins, integrate_closed_ungated, integrate_with, vector_field, vector_field_closed, IntegrationSettings,
    Trajectory, DEFAULT_DT, DEFAULT_T_MAX,
};
use crate::equilibria::{closed_states, q_star, steady_states_open, thresholds, CaseLabel, SteadyState};
use crate::error::{Error, Result};
use crate::model::State;
use crate::output::{csv_string, document, fmt_f64, manifest_path, to_json, RunManifest};
use crate::params::{ensure_closed_admissible, load_params_file, validate, validate_closed, Admissible, ModelParams};
use crate::sampling::ParamSampler;
use crate::welfare::policy_verdict;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "assimdyn", version, about = "Steady states, dynamics and welfare of the assimilation model")]
struct Cli {
    /// Proceed with parameters that fail validation. Results are unsupported.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ParamsArg {
    /// JSON parameter file.
    #[arg(long, value_name = "FILE")]
    params: PathBuf,
}

#[derive(Debug, Args)]
struct Horizon {
    /// Integration horizon.
    #[arg(long = "t-max", default_value_t = DEFAULT_T_MAX, allow_negative_numbers = true)]
    t_max: f64,
    /// Fixed RK4 step.
    #[arg(long, default_value_t = DEFAULT_DT, allow_negative_numbers = true)]
    dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DataFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the parameters against every admissibility condition.
    Validate {
        #[command(flatten)]
        params: ParamsArg,
        /// Check only the conditions of the natives-only economy.
        #[arg(long)]
        closed: bool,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// List every steady state with its stability, plus the thresholds.
    Equilibria {
        #[command(flatten)]
        params: ParamsArg,
        /// Use the natives-only economy.
        #[arg(long)]
        closed: bool,
        /// Write the result here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Integrate one trajectory.
    Simulate {
        #[command(flatten)]
        params: ParamsArg,
        /// Initial share of assimilating migrants (open economy only).
        #[arg(long, allow_negative_numbers = true)]
        p0: Option<f64>,
        /// Initial share of high-skill natives.
        #[arg(long, allow_negative_numbers = true)]
        q0: f64,
        #[command(flatten)]
        horizon: Horizon,
        /// Keep every n-th step.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Use the natives-only economy.
        #[arg(long)]
        closed: bool,
        /// Write the result here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DataFormat::Json)]
        format: DataFormat,
    },
    /// Label a grid of starting points by the attractor they reach.
    Basins {
        #[command(flatten)]
        params: ParamsArg,
        /// Grid cells per axis.
        #[arg(long, default_value_t = 21)]
        resolution: usize,
        #[command(flatten)]
        horizon: Horizon,
        /// Write the result here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DataFormat::Json)]
        format: DataFormat,
    },
    /// Stability of the two corner equilibria over a range of allowances.
    Sweep {
        #[command(flatten)]
        params: ParamsArg,
        /// First allowance of the grid.
        #[arg(long = "A-from", allow_negative_numbers = true)]
        a_from: f64,
        /// Last allowance of the grid.
        #[arg(long = "A-to", allow_negative_numbers = true)]
        a_to: f64,
        /// Number of grid points, both ends included.
        #[arg(long)]
        steps: usize,
        /// Write the result here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DataFormat::Json)]
        format: DataFormat,
    },
    /// Welfare with and without the minimal assimilation allowance.
    Welfare {
        #[command(flatten)]
        params: ParamsArg,
        /// Write the result here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Vector field, steady states and trajectories for a phase portrait.
    Phase {
        #[command(flatten)]
        params: ParamsArg,
        /// Field nodes per axis, both ends included.
        #[arg(long, default_value_t = 21)]
        resolution: usize,
        /// CSV of starting points with columns `p0,q0` (`q0` alone when closed).
        #[arg(long, value_name = "FILE")]
        trajectories: Option<PathBuf>,
        #[command(flatten)]
        horizon: Horizon,
        /// Keep every n-th step of each trajectory.
        #[arg(long, default_value_t = 10)]
        stride: usize,
        /// Use the natives-only economy.
        #[arg(long)]
        closed: bool,
        /// Directory for the manifest, field, steady states and trajectories.
        #[arg(long = "out-dir", value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Draw random admissible parameter sets.
    Sample {
        /// Seed of the random stream.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of parameter sets to draw.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Write the result here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Model(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Usage(e.to_string()),
            e => Failure::Model(e),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let mut ctx = Context { force: cli.force, stdout, stderr };
    match ctx.dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(ctx.stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Model(Error::Inadmissible(report))) => {
            let _ = writeln!(ctx.stderr, "error: parameters are not admissible (use --force to override)");
            let _ = writeln!(ctx.stderr, "{report}");
            EXIT_FAILURE
        }
        Err(Failure::Model(e)) => {
            let _ = writeln!(ctx.stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}

struct Context<'a> {
    force: bool,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

fn read_params(path: &Path) -> std::result::Result<ModelParams, Failure> {
    load_params_file(path).map_err(|e| match e {
        Error::Io(io) => Failure::Usage(format!("cannot read {}: {io}", path.display())),
        e => e.into(),
    })
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Model(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

impl Context<'_> {
    /// Admits open-economy parameters, bypassing the gate only when asked.
    fn admit(&mut self, params: ModelParams) -> Result<Admissible> {
        match Admissible::new(params) {
            Err(Error::Inadmissible(report)) if self.force => {
                let _ = writeln!(self.stderr, "warning: forced past failed checks: {}", report.failed_names().join(", "));
                Admissible::force(params)
            }
            other => other,
        }
    }

    /// Returns whether the closed-economy gate was bypassed.
    fn admit_closed(&mut self, params: &ModelParams) -> Result<bool> {
        match ensure_closed_admissible(params) {
            Err(Error::Inadmissible(report)) if self.force => {
                let _ = writeln!(self.stderr, "warning: forced past failed checks: {}", report.failed_names().join(", "));
                Ok(true)
            }
            Err(e) => Err(e),
            Ok(()) => Ok(false),
        }
    }

    fn emit(&mut self, out: Option<&Path>, text: &str) -> Outcome {
        match out {
            Some(path) => write_file(path, text),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Model(Error::Io(e))),
        }
    }

    /// Writes CSV to `out` with a manifest alongside, or to standard output.
    fn emit_csv(&mut self, out: Option<&Path>, manifest: &RunManifest, text: &str) -> Outcome {
        if let Some(path) = out {
            write_file(&manifest_path(path), &to_json(manifest))?;
        }
        self.emit(out, text)
    }

    fn say(&mut self, to_stdout: bool, line: &str) {
        let sink: &mut dyn Write = if to_stdout { &mut *self.stdout } else { &mut *self.stderr };
        let _ = writeln!(sink, "{line}");
    }

    fn dispatch(&mut self, command: Command) -> Outcome {
        match command {
            Command::Validate { params, closed, format } => self.validate(&params.params, closed, format),
            Command::Equilibria { params, closed, out } => self.equilibria(&params.params, closed, out.as_deref()),
            Command::Simulate { params, p0, q0, horizon, stride, closed, out, format } => {
                let settings = IntegrationSettings { t_max: horizon.t_max, dt: horizon.dt, stride };
                self.simulate(&params.params, p0, q0, settings, closed, out.as_deref(), format)
            }
            Command::Basins { params, resolution, horizon, out, format } => {
                self.basins(&params.params, resolution, &horizon, out.as_deref(), format)
            }
            Command::Sweep { params, a_from, a_to, steps, out, format } => {
                self.sweep(&params.params, a_from, a_to, steps, out.as_deref(), format)
            }
            Command::Welfare { params, out } => self.welfare(&params.params, out.as_deref()),
            Command::Phase { params, resolution, trajectories, horizon, stride, closed, out_dir } => {
                let settings = IntegrationSettings { t_max: horizon.t_max, dt: horizon.dt, stride };
                self.phase(&params.params, resolution, trajectories.as_deref(), settings, closed, &out_dir)
            }
            Command::Sample { seed, count, out } => self.sample(seed, count, out.as_deref()),
        }
    }

    fn validate(&mut self, path: &Path, closed: bool, format: ReportFormat) -> Outcome {
        let params = read_params(path)?;
        let report = if closed { validate_closed(&params)? } else { validate(&params)? };
        let text = match format {
            ReportFormat::Text => format!("{report}\n"),
            ReportFormat::Json => {
                let manifest = RunManifest::new("validate", params, json!({ "closed": closed }), 0, false);
                document(&manifest, &report)
            }
        };
        self.emit(None, &text)?;
        if report.overall {
            Ok(())
        } else {
            Err(Failure::Model(Error::Inadmissible(Box::new(report))))
        }
    }

    fn equilibria(&mut self, path: &Path, closed: bool, out: Option<&Path>) -> Outcome {
        let params = read_params(path)?;
        let text = if closed {
            let forced = self.admit_closed(&params)?;
            let q = q_star(&params);
            let states = closed_states(&params);
            let manifest = RunManifest::new("equilibria", params, json!({ "closed": true }), 0, forced);
            document(&manifest, json!({ "q_star": q, "steady_states": states }))
        } else {
            let adm = self.admit(params)?;
            let th = thresholds(&adm);
            let states = steady_states_open(&adm)?;
            let manifest = RunManifest::new("equilibria", params, json!({ "closed": false }), 0, adm.is_forced());
            document(&manifest, json!({ "thresholds": th, "steady_states": states }))
        };
        self.emit(out, &text)
    }

    #[allow(clippy::too_many_arguments)]
    fn simulate(
        &mut self,
        path: &Path,
        p0: Option<f64>,
        q0: f64,
        settings: IntegrationSettings,
        closed: bool,
        out: Option<&Path>,
        format: DataFormat,
    ) -> Outcome {
        let params = read_params(path)?;
        let settings_json = json!({
            "p0": p0, "q0": q0, "t_max": settings.t_max, "dt": settings.dt,
            "stride": settings.stride, "closed": closed,
        });
        // A summary goes to standard output only when the data does not.
        let summary_to_stdout = out.is_some();
        if closed {
            let forced = self.admit_closed(&params)?;
            let traj = integrate_closed_ungated(&params, q0, &settings)?;
            let manifest = RunManifest::new("simulate", params, settings_json, 0, forced);
            let text = match format {
                DataFormat::Json => document(&manifest, &traj),
                DataFormat::Csv => csv_string(
                    &["t", "q"],
                    traj.samples.iter().map(|s| vec![fmt_f64(s.t), fmt_f64(s.state)]),
                ),
            };
            match format {
                DataFormat::Json => self.emit(out, &text)?,
                DataFormat::Csv => self.emit_csv(out, &manifest, &text)?,
            }
            let line = summary(&format!("q={}", traj.terminal), &traj);
            self.say(summary_to_stdout, &line);
        } else {
            let p0 = p0.ok_or_else(|| Failure::Usage("--p0 is required for the open economy".into()))?;
            let adm = self.admit(params)?;
            let traj = integrate_with(&adm, State::new(p0, q0)?, &settings)?;
            let manifest = RunManifest::new("simulate", params, settings_json, 0, adm.is_forced());
            match format {
                DataFormat::Json => {
                    let text = document(&manifest, &traj);
                    self.emit(out, &text)?;
                }
                DataFormat::Csv => {
                    let text = csv_string(&["t", "p", "q"], trajectory_rows(&traj, None));
                    self.emit_csv(out, &manifest, &text)?;
                }
            }
            let line = summary(&format!("p={} q={}", traj.terminal.p, traj.terminal.q), &traj);
            self.say(summary_to_stdout, &line);
        }
        Ok(())
    }

    fn basins(&mut self, path: &Path, resolution: usize, horizon: &Horizon, out: Option<&Path>, format: DataFormat) -> Outcome {
        let params = read_params(path)?;
        let adm = self.admit(params)?;
        let map = basins(&adm, resolution, horizon.t_max, horizon.dt)?;
        let manifest = RunManifest::new(
            "basins",
            params,
            json!({ "resolution": resolution, "t_max": horizon.t_max, "dt": horizon.dt }),
            0,
            adm.is_forced(),
        );
        match format {
            DataFormat::Json => {
                let text = document(&manifest, &map);
                self.emit(out, &text)?;
            }
            DataFormat::Csv => {
                let rows = map.cells.iter().map(|c| {
                    vec![
                        c.i.to_string(),
                        c.j.to_string(),
                        fmt_f64(c.initial.p),
                        fmt_f64(c.initial.q),
                        c.label.to_string(),
                    ]
                });
                let text = csv_string(&["i", "j", "p", "q", "label"], rows);
                self.emit_csv(out, &manifest, &text)?;
            }
        }
        let mut line = map
            .shares
            .iter()
            .map(|s| format!("{}: {} cells ({:.4})", s.label, s.cells, s.share))
            .collect::<Vec<_>>()
            .join(", ");
        line.push_str(&format!("; undecided: {}", map.undecided));
        self.say(out.is_some(), &line);
        Ok(())
    }

    fn sweep(&mut self, path: &Path, from: f64, to: f64, steps: usize, out: Option<&Path>, format: DataFormat) -> Outcome {
        let params = read_params(path)?;
        let base = self.admit(params)?;
        let forced = self.force;
        let result = allowance_sweep(&base, from, to, steps, forced)?;
        let manifest = RunManifest::new(
            "sweep",
            params,
            json!({ "A_from": from, "A_to": to, "steps": steps }),
            0,
            base.is_forced() || result.rows.iter().any(|r| r.forced),
        );
        match format {
            DataFormat::Json => {
                let text = document(&manifest, &result);
                self.emit(out, &text)
            }
            DataFormat::Csv => {
                let rows = result.rows.iter().map(|r| {
                    vec![
                        fmt_f64(r.allowance),
                        r.no_assimilation_stable.to_string(),
                        r.full_assimilation_stable.to_string(),
                        r.regime.as_str().to_string(),
                    ]
                });
                let text = csv_string(&["A", "no_assimilation_stable", "full_assimilation_stable", "regime"], rows);
                self.emit_csv(out, &manifest, &text)
            }
        }
    }

    fn welfare(&mut self, path: &Path, out: Option<&Path>) -> Outcome {
        let params = read_params(path)?;
        let adm = self.admit(params)?;
        let report = policy_verdict(&adm)?;
        let manifest = RunManifest::new("welfare", params, json!({}), 0, adm.is_forced());
        let text = document(&manifest, &report);
        self.emit(out, &text)
    }

    fn phase(
        &mut self,
        path: &Path,
        resolution: usize,
        starts: Option<&Path>,
        settings: IntegrationSettings,
        closed: bool,
        out_dir: &Path,
    ) -> Outcome {
        let params = read_params(path)?;
        let starts = match starts {
            Some(file) => read_starts(file, closed)?,
            None => Vec::new(),
        };
        let settings_json = json!({
            "resolution": resolution, "t_max": settings.t_max, "dt": settings.dt,
            "stride": settings.stride, "closed": closed, "trajectories": starts.len(),
        });

        let (forced, field_csv, traj_csv, states) = if closed {
            let forced = self.admit_closed(&params)?;
            let field = vector_field_closed(&params, resolution)?;
            let field_csv = csv_string(&["q", "dq"], field.iter().map(|f| vec![fmt_f64(f.q), fmt_f64(f.rate)]));
            let mut rows = Vec::new();
            for (id, (_, q0)) in starts.iter().enumerate() {
                let traj = integrate_closed_ungated(&params, *q0, &settings)?;
                rows.extend(
                    traj.samples
                        .iter()
                        .map(|s| vec![id.to_string(), fmt_f64(s.t), fmt_f64(s.state)]),
                );
            }
            let traj_csv = csv_string(&["id", "t", "q"], rows);
            (forced, field_csv, traj_csv, closed_states(&params))
        } else {
            let adm = self.admit(params)?;
            let grid = vector_field(&params, resolution, resolution)?;
            let field_csv = csv_string(
                &["p", "q", "dp", "dq"],
                grid.points.iter().map(|f| {
                    vec![fmt_f64(f.state.p), fmt_f64(f.state.q), fmt_f64(f.rate_p), fmt_f64(f.rate_q)]
                }),
            );
            let trajs = starts
                .par_iter()
                .map(|&(p0, q0)| integrate_with(&adm, State::new(p0, q0)?, &settings))
                .collect::<Result<Vec<_>>>()?;
            let rows = trajs
                .iter()
                .enumerate()
                .flat_map(|(id, traj)| trajectory_rows(traj, Some(id)));
            let traj_csv = csv_string(&["id", "t", "p", "q"], rows);
            (adm.is_forced(), field_csv, traj_csv, steady_states_open(&adm)?)
        };

        fs::create_dir_all(out_dir).map_err(|e| io_failure(out_dir, e))?;
        let manifest = RunManifest::new("phase", params, settings_json, 0, forced);
        write_file(&out_dir.join("manifest.json"), &to_json(&manifest))?;
        write_file(&out_dir.join("field.csv"), &field_csv)?;
        write_file(&out_dir.join("steady_states.json"), &document(&manifest, &states))?;
        if !starts.is_empty() {
            write_file(&out_dir.join("trajectories.csv"), &traj_csv)?;
        }
        let line = format!("wrote phase data to {}", out_dir.display());
        self.say(true, &line);
        Ok(())
    }

    fn sample(&mut self, seed: u64, count: usize, out: Option<&Path>) -> Outcome {
        let mut sampler = ParamSampler::new(seed);
        let draws = sampler.sample_many(count)?;
        let params: Vec<ModelParams> = draws.iter().map(|a| *a.params()).collect();
        let manifest = RunManifest::new(
            "sample",
            ModelParams::example(),
            json!({ "count": count, "note": "manifest parameters are the built-in example; draws are in result" }),
            seed,
            false,
        );
        let text = document(&manifest, &params);
        self.emit(out, &text)
    }
}

fn summary<S>(terminal: &str, traj: &Trajectory<S>) -> String {
    let t_end = traj.steps;
    match &traj.converged_to {
        Some(s) => format!(
            "terminal {terminal} after {t_end} steps; converged to case {} at ({}, {}), {}",
            s.case_label, s.state.p, s.state.q, format!("{:?}", s.stability).to_lowercase()
        ),
        None => format!("terminal {terminal} after {t_end} steps; not attributed to a steady state"),
    }
}

fn trajectory_rows(traj: &Trajectory<State>, id: Option<usize>) -> impl Iterator<Item = Vec<String>> + '_ {
    traj.samples.iter().map(move |s| {
        let mut row = Vec::with_capacity(4);
        if let Some(id) = id {
            row.push(id.to_string());
        }
        row.extend([fmt_f64(s.t), fmt_f64(s.state.p), fmt_f64(s.state.q)]);
        row
    })
}

#[derive(Deserialize)]
struct Start {
    p0: Option<f64>,
    q0: f64,
}

fn read_starts(path: &Path, closed: bool) -> std::result::Result<Vec<(f64, f64)>, Failure> {
    let bad = |msg: String| Failure::Usage(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut starts = Vec::new();
    for (row, record) in reader.deserialize::<Start>().enumerate() {
        let start = record.map_err(|e| bad(e.to_string()))?;
        let p0 = match (start.p0, closed) {
            (Some(p), _) => p,
            (None, true) => 0.0,
            (None, false) => return Err(bad(format!("row {} has no p0", row + 1))),
        };
        starts.push((p0, start.q0));
    }
    Ok(starts)
}

/// Which of the two corner equilibria attract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Only `(0, q*)` attracts.
    OnlyNoAssim,
    Bistable,
    /// Only `(1, q**)` attracts.
    OnlyFullAssim,
    Neither,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::OnlyNoAssim => "only-no-assim",
            Regime::Bistable => "bistable",
            Regime::OnlyFullAssim => "only-full-assim",
            Regime::Neither => "neither",
        }
    }

    fn from_flags(no_assimilation: bool, full_assimilation: bool) -> Self {
        match (no_assimilation, full_assimilation) {
            (true, true) => Regime::Bistable,
            (true, false) => Regime::OnlyNoAssim,
            (false, true) => Regime::OnlyFullAssim,
            (false, false) => Regime::Neither,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub allowance: f64,
    pub no_assimilation_stable: bool,
    pub full_assimilation_stable: bool,
    pub regime: Regime,
    /// This allowance failed validation and was forced through.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub a_star: f64,
    pub a_star2: f64,
    pub rows: Vec<SweepRow>,
}

/// Allowances `from + k (to - from) / (steps - 1)` for `k < steps`; a single
/// step yields `from` alone.
pub fn allowance_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Domain { what: "steps", value: 0.0, range: "[1, inf)" });
    }
    if !from.is_finite() || !to.is_finite() {
        return Err(Error::NonFinite("A"));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let h = (to - from) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| if k + 1 == steps { to } else { from + k as f64 * h })
        .collect())
}

fn stable_at(states: &[SteadyState], label: CaseLabel) -> bool {
    states.iter().any(|s| s.case_label == label && s.in_domain && s.is_stable())
}

/// Classifies the corner equilibria `(0, q*)` and `(1, q**)` at every
/// allowance of the grid. Rows keep grid order.
pub fn allowance_sweep(base: &Admissible, from: f64, to: f64, steps: usize, force: bool) -> Result<Sweep> {
    let grid = allowance_grid(from, to, steps)?;
    let rows = grid
        .par_iter()
        .map(|&allowance| {
            let adm = match base.with_allowance(allowance) {
                Err(Error::Inadmissible(_)) if force => Admissible::force(base.params().with_allowance(allowance))?,
                other => other?,
            };
            let states = steady_states_open(&adm)?;
            let no_assim = stable_at(&states, CaseLabel::G);
            let full_assim = stable_at(&states, CaseLabel::H);
            Ok(SweepRow {
                allowance,
                no_assimilation_stable: no_assim,
                full_assimilation_stable: full_assim,
                regime: Regime::from_flags(no_assim, full_assim),
                forced: adm.is_forced(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let th = thresholds(base);
    Ok(Sweep { a_star: th.a_star, a_star2: th.a_star2, rows })
}
