//! Configuration loading and the file-producing run used by the command line.
//!
//! A run configuration is a flat JSON object. Every key is optional; missing
//! keys take the defaults of the selected case.
//!
//! ```json
//! {
//!   "case": "selective_3_2",
//!   "sigma0": 1.0, "Y": 0.1, "kx": 10.0,
//!   "target_st": 10.0,
//!   "conditioning": { "kind": "com_offset", "target": 3.0, "width": 1.0 },
//!   "n_pairs": 20000, "seed": 7
//! }
//! ```

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::{Conditioning, SamplerConfig, Trajectory};
use crate::error::Error;
use crate::integrate::{IntegratorConfig, Method};
use crate::model::PhysicalParams;
use crate::scenario::{distance_for_spreading, run_scenario, Case, EnsembleReport, Histogram, ScenarioConfig, REJECTION_BUDGET};
use crate::sqm::ScreenConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REJECTION_BUDGET: i32 = 3;

pub const DEFAULT_N_PAIRS: usize = 100_000;
pub const DEFAULT_N_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Offending key, dotted for nested objects.
    pub path: String,
    pub reason: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config at `{}`: {}", self.path, self.reason)
    }
}

impl std::error::Error for ConfigError {}

/// Configuration key for a model field name.
fn config_key(field: &str) -> &str {
    match field {
        "slit_offset" => "Y",
        "amplitude" => "a",
        "distance_d" | "screen_time" => "D",
        "bin_delta" => "delta",
        other => other,
    }
}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        let path = match &e {
            Error::InvalidParams { field, .. } => config_key(field).to_string(),
            Error::ConstraintViolated { constraint, .. } => config_key(constraint).to_string(),
            _ => String::new(),
        };
        let reason = match &e {
            Error::InvalidParams { reason, .. } => reason.clone(),
            Error::ConstraintViolated { detail, .. } => detail.clone(),
            other => other.to_string(),
        };
        Self { path, reason }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum AmplitudeSpec {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    method: Option<Method>,
    dt_initial: Option<f64>,
    tol: Option<f64>,
    max_steps: Option<usize>,
}

/// Configuration as written by the user, before defaults are filled in.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    case: Option<Case>,
    hbar: Option<f64>,
    mass: Option<f64>,
    sigma0: Option<f64>,
    #[serde(rename = "Y")]
    slit_offset: Option<f64>,
    kx: Option<f64>,
    ky: Option<f64>,
    a: Option<AmplitudeSpec>,
    #[serde(rename = "D")]
    distance: Option<f64>,
    target_st: Option<f64>,
    delta: Option<f64>,
    y_min: Option<f64>,
    y_max: Option<f64>,
    n_bins: Option<usize>,
    seed: Option<u64>,
    n_pairs: Option<usize>,
    conditioning: Option<Conditioning>,
    integrator: Option<RawIntegrator>,
    output_dir: Option<PathBuf>,
    emit_trajectories: Option<bool>,
    trajectory_sample_stride: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub pairs: Option<usize>,
    pub case: Option<Case>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { String::new() } else { path }, e.inner().to_string())
        })
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(dir) = &overrides.out_dir {
            self.output_dir = Some(dir.clone());
        }
        if overrides.seed.is_some() {
            self.seed = overrides.seed;
        }
        if overrides.pairs.is_some() {
            self.n_pairs = overrides.pairs;
        }
        if overrides.case.is_some() {
            self.case = overrides.case;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub output_dir: PathBuf,
    pub emit_trajectories: bool,
    pub trajectory_sample_stride: usize,
}

fn positive(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(path, format!("must be finite and > 0, got {v}")))
    }
}

/// Fill in defaults and validate.
pub fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let case = raw.case.unwrap_or(Case::SymmetricDetection);
    let amplitude = match raw.a {
        None => Complex64::new(1.0, 0.0),
        Some(AmplitudeSpec::Real(re)) => Complex64::new(re, 0.0),
        Some(AmplitudeSpec::Complex([re, im])) => Complex64::new(re, im),
    };
    let params = PhysicalParams {
        hbar: raw.hbar.unwrap_or(1.0),
        mass: raw.mass.unwrap_or(1.0),
        sigma0: raw.sigma0.unwrap_or(1.0),
        slit_offset: raw.slit_offset.unwrap_or(0.1),
        kx: raw.kx.unwrap_or(10.0),
        ky: raw.ky.unwrap_or(0.0),
        amplitude,
    };
    params.validate()?;

    let default_st = match case {
        Case::SymmetricDetection => 1.0,
        Case::SelectiveDetection => 10.0,
    };
    let (distance, target_st) = match (raw.distance, raw.target_st) {
        (Some(d), Some(st)) => {
            let d = positive("D", d)?;
            let st = positive("target_st", st)?;
            let implied = params.spreading_rate() * d / params.ux();
            if (implied - st).abs() > 1e-9 * st.max(1.0) {
                return Err(ConfigError::new(
                    "target_st",
                    format!("inconsistent with D: D = {d} gives sT = {implied}"),
                ));
            }
            (d, st)
        }
        (Some(d), None) => {
            let d = positive("D", d)?;
            (d, params.spreading_rate() * d / params.ux())
        }
        (None, st) => {
            let st = positive("target_st", st.unwrap_or(default_st))?;
            (distance_for_spreading(&params, st), st)
        }
    };

    let delta = positive("delta", raw.delta.unwrap_or(0.5 * params.sigma0))?;
    let n_bins = raw.n_bins.unwrap_or(DEFAULT_N_BINS);
    let mut screen = ScreenConfig::centered(&params, distance, delta, n_bins);
    if let Some(lo) = raw.y_min {
        screen.y_min = lo;
    }
    if let Some(hi) = raw.y_max {
        screen.y_max = hi;
    }

    let conditioning = raw.conditioning.unwrap_or(match case {
        Case::SymmetricDetection => Conditioning::None,
        Case::SelectiveDetection => Conditioning::ComOffset {
            target: 3.0 * params.sigma0,
            width: params.sigma0,
            opposite_sides: true,
        },
    });
    let sampler = SamplerConfig {
        n_pairs: raw.n_pairs.unwrap_or(DEFAULT_N_PAIRS),
        seed: raw.seed.unwrap_or(0),
        conditioning,
    };

    let defaults = IntegratorConfig::default();
    let ri = raw.integrator.unwrap_or_default();
    let integ = IntegratorConfig {
        method: ri.method.unwrap_or(defaults.method),
        dt_initial: ri.dt_initial.unwrap_or(defaults.dt_initial),
        tol: ri.tol.unwrap_or(defaults.tol),
        max_steps: ri.max_steps.unwrap_or(defaults.max_steps),
    };
    integ.validate().map_err(|reason| ConfigError::new("integrator", reason))?;

    let scenario = ScenarioConfig {
        case,
        params,
        screen,
        sampler,
        integ,
        target_st,
    };
    scenario.validate()?;

    let stride = raw.trajectory_sample_stride.unwrap_or(1);
    if stride == 0 {
        return Err(ConfigError::new("trajectory_sample_stride", "must be >= 1"));
    }
    Ok(RunConfig {
        scenario,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        emit_trajectories: raw.emit_trajectories.unwrap_or(false),
        trajectory_sample_stride: stride,
    })
}

/// Read, override and resolve a configuration file. `None` uses defaults only.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut raw = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| ConfigError::new("", format!("{}: {e}", p.display())))?;
            RawConfig::from_json(&text)?
        }
        None => RawConfig::default(),
    };
    raw.apply(overrides);
    resolve(raw)
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// The run finished but too many trajectories failed, or the sampler
    /// could not produce the requested subensemble.
    Rejection(String),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Rejection(_) | RunError::Io(_) => EXIT_REJECTION_BUDGET,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Rejection(msg) => write!(f, "rejection budget exceeded: {msg}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Serialize)]
struct Versions {
    two_slit_bohm: &'static str,
}

#[derive(Serialize)]
struct Summary<'a> {
    report: &'a EnsembleReport,
    config: &'a RunConfig,
    versions: Versions,
    seed: u64,
    generated_at_unix: u64,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_histogram_rows<W: Write>(out: &mut csv::Writer<W>, hists: &[&Histogram], n: usize) -> csv::Result<()> {
    let edges = &hists[0].edges;
    for i in 0..hists[0].counts.len() {
        let mut row = vec![num(edges[i]), num(edges[i + 1])];
        let mut total = 0u64;
        for h in hists {
            row.push(h.counts[i].to_string());
            total += h.counts[i];
        }
        let freq = total as f64 / (n.max(1) * hists.len()) as f64;
        row.push(num(freq));
        out.write_record(&row)?;
    }
    Ok(())
}

fn csv_writer(path: &Path) -> std::io::Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn write_outputs(run: &RunConfig, report: &EnsembleReport, trajectories: &[Trajectory]) -> Result<(), RunError> {
    let dir = &run.output_dir;
    fs::create_dir_all(dir)?;
    let generated_at_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let summary = Summary {
        report,
        config: run,
        versions: Versions {
            two_slit_bohm: env!("CARGO_PKG_VERSION"),
        },
        seed: run.scenario.sampler.seed,
        generated_at_unix,
    };
    let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &summary).map_err(std::io::Error::from)?;
    f.write_all(b"\n")?;
    f.flush()?;

    let n = report.n_completed;
    let io = |e: csv::Error| RunError::Io(e.into());

    let mut w = csv_writer(&dir.join("marginal_hist.csv"))?;
    w.write_record(["bin_lower", "bin_upper", "count_y1", "count_y2", "frequency"])
        .map_err(io)?;
    let m = &report.marginal_histograms;
    write_histogram_rows(&mut w, &[&m.y1, &m.y2], n).map_err(io)?;
    w.flush()?;

    let mut w = csv_writer(&dir.join("com_hist.csv"))?;
    w.write_record(["bin_lower", "bin_upper", "count", "frequency"]).map_err(io)?;
    write_histogram_rows(&mut w, &[&report.com_histogram], n).map_err(io)?;
    w.flush()?;

    let mut w = csv_writer(&dir.join("sqm_marginal.csv"))?;
    w.write_record(["bin_lower", "bin_upper", "probability"]).map_err(io)?;
    let edges = &m.y1.edges;
    for (i, p) in report.sqm_marginal.iter().enumerate() {
        w.write_record([num(edges[i]), num(edges[i + 1]), num(*p)]).map_err(io)?;
    }
    w.flush()?;

    if run.emit_trajectories {
        let mut w = csv_writer(&dir.join("trajectories.csv"))?;
        w.write_record(["pair", "status", "t", "y1", "y2"]).map_err(io)?;
        for (k, tr) in trajectories.iter().enumerate() {
            let status = serde_json::to_value(tr.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            for s in &tr.samples {
                w.write_record([k.to_string(), status.clone(), num(s.t), num(s.y1), num(s.y2)])
                    .map_err(io)?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

/// Run the configured experiment and write all output files.
pub fn execute(run: &RunConfig) -> Result<EnsembleReport, RunError> {
    let stride = run.emit_trajectories.then_some(run.trajectory_sample_stride);
    let outcome = match run_scenario(&run.scenario, stride) {
        Ok(o) => o,
        Err(e @ Error::ConditioningStarved { .. }) => return Err(RunError::Rejection(e.to_string())),
        Err(e) => return Err(RunError::Config(e.into())),
    };
    write_outputs(run, &outcome.report, &outcome.trajectories)?;
    let fraction = outcome.report.rejection_fraction;
    if fraction > REJECTION_BUDGET {
        return Err(RunError::Rejection(format!(
            "{fraction:.3e} of trajectories failed, budget {REJECTION_BUDGET:.1e}"
        )));
    }
    Ok(outcome.report)
}

/// Load, run and map the result to a process exit code, reporting errors on
/// stderr.
pub fn main_with(config: Option<&Path>, overrides: &Overrides) -> i32 {
    let run = match load_config(config, overrides) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&run) {
        Ok(report) => {
            eprintln!(
                "{}: {} pairs completed, output in {}",
                run.scenario.case.name(),
                report.n_completed,
                run.output_dir.display()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
