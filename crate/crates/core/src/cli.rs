//! Configuration files, experiment commands and their file outputs.
//!
//! The `stochfd` binary is a thin wrapper over [`run`]. Every command is a
//! pure function of its arguments, config file and master seed; only the
//! wall-clock field of `manifest.json` differs between reruns.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cf_models::LawKind;
use crate::dfa::{self, SweepPoint};
use crate::error::{Error, Result};
use crate::platoon::LawMix;
use crate::stoch_fd::{self, Ensemble, EnsembleConfig, HysteresisReport};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Nodes per axis of `pdf_grid.csv`.
pub const PDF_GRID_NODES: usize = 100;

// ---------------------------------------------------------------------------
// Config files

const SECTIONS: &[(&str, &[&str])] = &[
    ("platoon", &["n_vehicles", "penetration", "scenario"]),
    ("mix", &["preset", "hdv_probs", "av_probs"]),
    ("leader", &["a0", "omega_p", "phi_p", "v_e"]),
    ("run", &["duration", "dt", "n_samples", "seed"]),
];

/// Parse a config file; missing keys take the baseline defaults.
pub fn parse_config(path: &Path) -> Result<EnsembleConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<EnsembleConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e
            .span()
            .map(|s| line_col(text, s.start))
            .unwrap_or((1, 1));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    for (name, value) in &table {
        let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| s == name) else {
            return Err(Error::validation(name.as_str(), "unknown section"));
        };
        let toml::Value::Table(section) = value else {
            return Err(Error::validation(name.as_str(), "expected a [section]"));
        };
        if let Some(k) = section.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(Error::validation(format!("{name}.{k}"), "unknown key"));
        }
    }

    let mut c = EnsembleConfig::default();
    let get = |section: &str, key: &str| table.get(section).and_then(|s| s.get(key));

    if let Some(v) = get("platoon", "n_vehicles") {
        c.n_vehicles = as_count(v, "platoon.n_vehicles")?;
    }
    if let Some(v) = get("platoon", "penetration") {
        c.penetration = as_f64(v, "platoon.penetration")?;
    }
    if let Some(v) = get("platoon", "scenario") {
        c.scenario = as_str(v, "platoon.scenario")?
            .parse()
            .map_err(|e: Error| Error::validation("platoon.scenario", e.to_string()))?;
    }

    let mut mix = match get("mix", "preset") {
        Some(v) => LawMix::preset(as_str(v, "mix.preset")?)
            .map_err(|e| Error::validation("mix.preset", e.to_string()))?,
        None => LawMix::i24(),
    };
    let hdv = get("mix", "hdv_probs").map(|v| as_array::<4>(v, "mix.hdv_probs")).transpose()?;
    let av = get("mix", "av_probs").map(|v| as_array::<2>(v, "mix.av_probs")).transpose()?;
    if hdv.is_some() || av.is_some() {
        let name = if get("mix", "preset").is_some() { mix.name.clone() } else { "custom".into() };
        mix = LawMix::new(&name, hdv.unwrap_or(mix.hdv_raw), av.unwrap_or(mix.av_raw)).map_err(
            |e| match e {
                Error::Validation { key, message } => Error::validation(format!("mix.{key}"), message),
                other => other,
            },
        )?;
    }
    c.mix = mix;

    for (key, slot) in [
        ("a0", &mut c.a0),
        ("omega_p", &mut c.omega_p),
        ("phi_p", &mut c.phi_p),
        ("v_e", &mut c.v_e),
    ] {
        if let Some(v) = get("leader", key) {
            *slot = as_f64(v, &format!("leader.{key}"))?;
        }
    }
    if let Some(v) = get("run", "duration") {
        c.duration = as_f64(v, "run.duration")?;
    }
    if let Some(v) = get("run", "dt") {
        c.dt = as_f64(v, "run.dt")?;
    }
    if let Some(v) = get("run", "n_samples") {
        c.n_samples = as_count(v, "run.n_samples")?;
    }
    if let Some(v) = get("run", "seed") {
        c.seed = as_count(v, "run.seed")? as u64;
    }

    c.validate().map_err(|e| match e {
        Error::Validation { key, message } => Error::validation(qualified(&key), message),
        other => other,
    })?;
    Ok(c)
}

fn qualified(key: &str) -> String {
    SECTIONS
        .iter()
        .find(|(_, keys)| keys.contains(&key))
        .map(|(s, _)| format!("{s}.{key}"))
        .unwrap_or_else(|| key.to_string())
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn as_f64(v: &toml::Value, key: &str) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::validation(key, "expected a number")),
    }
}

fn as_count(v: &toml::Value, key: &str) -> Result<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(Error::validation(key, "expected a nonnegative integer")),
    }
}

fn as_str<'a>(v: &'a toml::Value, key: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::validation(key, "expected a string"))
}

fn as_array<const N: usize>(v: &toml::Value, key: &str) -> Result<[f64; N]> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::validation(key, format!("expected an array of {N} numbers")))?;
    if arr.len() != N {
        return Err(Error::validation(key, format!("expected {N} entries, got {}", arr.len())));
    }
    let mut out = [0.0; N];
    for (slot, x) in out.iter_mut().zip(arr) {
        *slot = as_f64(x, key)?;
    }
    Ok(out)
}

/// Render a config so that [`parse_config_str`] reproduces it.
pub fn emit_config(c: &EnsembleConfig) -> String {
    use toml::{Table, Value};
    let f = Value::Float;
    let mut platoon = Table::new();
    platoon.insert("n_vehicles".into(), Value::Integer(c.n_vehicles as i64));
    platoon.insert("penetration".into(), f(c.penetration));
    platoon.insert("scenario".into(), Value::String(c.scenario.to_string()));
    let mut mix = Table::new();
    if c.mix.name == "i24" || c.mix.name == "ngsim" {
        mix.insert("preset".into(), Value::String(c.mix.name.clone()));
    }
    mix.insert("hdv_probs".into(), Value::Array(c.mix.hdv_raw.iter().map(|&x| f(x)).collect()));
    mix.insert("av_probs".into(), Value::Array(c.mix.av_raw.iter().map(|&x| f(x)).collect()));
    let mut leader = Table::new();
    leader.insert("a0".into(), f(c.a0));
    leader.insert("omega_p".into(), f(c.omega_p));
    leader.insert("phi_p".into(), f(c.phi_p));
    leader.insert("v_e".into(), f(c.v_e));
    let mut run = Table::new();
    run.insert("duration".into(), f(c.duration));
    run.insert("dt".into(), f(c.dt));
    run.insert("n_samples".into(), Value::Integer(c.n_samples as i64));
    run.insert("seed".into(), Value::Integer(c.seed as i64));
    let mut root = Table::new();
    root.insert("platoon".into(), Value::Table(platoon));
    root.insert("mix".into(), Value::Table(mix));
    root.insert("leader".into(), Value::Table(leader));
    root.insert("run".into(), Value::Table(run));
    toml::to_string(&root).expect("config tables serialize")
}

// ---------------------------------------------------------------------------
// Output files

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<EnsembleConfig>,
    /// File name relative to the output directory → sha256 hex digest.
    pub files: BTreeMap<String, String>,
    pub rejected: usize,
    pub rejected_reasons: BTreeMap<String, usize>,
    pub wall_clock_s: f64,
}

impl RunManifest {
    /// Names of files whose current digest differs from the recorded one.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for (name, digest) in &self.files {
            if &sha256_file(&dir.join(name))? != digest {
                bad.push(name.clone());
            }
        }
        Ok(bad)
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct OutDir {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl OutDir {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.files.insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        self.write(name, &bytes)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    fn finish(self, mut manifest: RunManifest) -> Result<RunManifest> {
        manifest.files = self.files;
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }
}

/// Shortest decimal that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x}")
}

pub fn sweep_rows(points: &[SweepPoint]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            vec![
                p.law.name().to_string(),
                p.particle_id.to_string(),
                num(p.omega_rad_s),
                num(p.gain_mag),
                num(p.gain_phase_rad),
                p.method.name().to_string(),
                p.converged.to_string(),
            ]
        })
        .collect()
}

pub const FREQ_HEADER: [&str; 7] = [
    "law",
    "particle_id",
    "omega_rad_s",
    "gain_mag",
    "gain_phase_rad",
    "method",
    "converged",
];
pub const TRACE_HEADER: [&str; 4] = ["sample_id", "t_s", "k_veh_km", "q_veh_h"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawProbabilities {
    pub mix: String,
    pub hdv_laws: Vec<LawKind>,
    pub hdv_raw: [f64; 4],
    pub hdv_normalized: [f64; 4],
    pub av_laws: Vec<LawKind>,
    pub av_raw: [f64; 2],
    pub av_normalized: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub config: EnsembleConfig,
    pub accepted: usize,
    pub rejected: usize,
    pub rejected_reasons: BTreeMap<String, usize>,
    pub law_probabilities: LawProbabilities,
    pub report: HysteresisReport,
}

impl MetricsFile {
    fn new(ensemble: &Ensemble, report: HysteresisReport) -> Self {
        let mix = &ensemble.config.mix;
        Self {
            config: ensemble.config.clone(),
            accepted: ensemble.samples.len(),
            rejected: ensemble.rejected.len(),
            rejected_reasons: ensemble.rejection_counts(),
            law_probabilities: LawProbabilities {
                mix: mix.name.clone(),
                hdv_laws: LawKind::HDV.to_vec(),
                hdv_raw: mix.hdv_raw,
                hdv_normalized: mix.hdv_probs,
                av_laws: LawKind::AV.to_vec(),
                av_raw: mix.av_raw,
                av_normalized: mix.av_probs,
            },
            report,
        }
    }
}

// ---------------------------------------------------------------------------
// Commands

#[derive(Debug, Clone, PartialEq)]
pub struct FreqResponseArgs {
    pub laws: Vec<LawKind>,
    pub particles: usize,
    pub omegas: Vec<f64>,
    pub amplitude: f64,
    pub v_e: f64,
    pub seed: u64,
    pub out: PathBuf,
}

/// One CSV per law, `freq_response_<law>.csv`, plus the manifest.
pub fn cmd_freq_response(args: &FreqResponseArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let mut out = OutDir::new(&args.out)?;
    for (i, &law) in args.laws.iter().enumerate() {
        let points = dfa::frequency_response_sweep(
            law,
            args.particles,
            &args.omegas,
            args.amplitude,
            args.v_e,
            crate::seed::derive(args.seed, i as u64),
        )?;
        out.csv(&format!("freq_response_{}.csv", law.name()), &FREQ_HEADER, sweep_rows(&points))?;
    }
    out.finish(RunManifest {
        command: "freq-response".into(),
        tool_version: TOOL_VERSION.into(),
        seed: args.seed,
        config: None,
        files: BTreeMap::new(),
        rejected: 0,
        rejected_reasons: BTreeMap::new(),
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimulateOptions {
    /// Write the whole `[0, duration]` trace instead of the final period.
    pub full_traces: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutcome {
    pub manifest: RunManifest,
    pub report: HysteresisReport,
}

/// Ensemble, metrics and plotting grids for one configuration.
pub fn cmd_simulate(config: &EnsembleConfig, out_dir: &Path, opts: SimulateOptions) -> Result<SimulateOutcome> {
    let start = Instant::now();
    let ensemble = stoch_fd::run_ensemble(config)?;
    let pooled = ensemble.pooled_points();
    let hull = if pooled.len() >= 3 {
        stoch_fd::high_density_hull(&pooled, stoch_fd::HULL_QUANTILE)?
    } else {
        stoch_fd::HullResult {
            vertices: pooled.clone(),
            area: 0.0,
            degenerate: true,
            retained: pooled.len(),
            threshold: f64::NAN,
        }
    };
    let report = stoch_fd::hysteresis_metrics_with_hull(&ensemble, &hull)?;
    let mut out = OutDir::new(out_dir)?;

    let mut rows = Vec::new();
    for (i, s) in ensemble.samples.iter().enumerate() {
        let owned;
        let tr = if opts.full_traces {
            owned = ensemble.full_trace(i)?.full;
            &owned
        } else {
            &s.loop_trace
        };
        for j in 0..tr.len() {
            rows.push(vec![s.sample_id.to_string(), num(tr.t[j]), num(tr.k[j]), num(tr.q[j])]);
        }
    }
    out.csv("traces.csv", &TRACE_HEADER, rows)?;
    out.json("metrics.json", &MetricsFile::new(&ensemble, report.clone()))?;
    out.csv(
        "hull.csv",
        &["k_veh_km", "q_veh_h"],
        hull.vertices.iter().map(|v| vec![num(v[0]), num(v[1])]),
    )?;
    let grid = if ensemble.samples.is_empty() {
        Vec::new()
    } else {
        stoch_fd::pdf_grid(&ensemble, PDF_GRID_NODES, PDF_GRID_NODES)?
    };
    out.csv(
        "pdf_grid.csv",
        &["k_veh_km", "q_veh_h", "density"],
        grid.iter().map(|r| vec![num(r[0]), num(r[1]), num(r[2])]),
    )?;
    let mut realizations = Vec::new();
    for s in &ensemble.samples {
        serde_json::to_writer(&mut realizations, &(s.sample_id, &s.realization))?;
        realizations.push(b'\n');
    }
    out.write("realizations.jsonl", &realizations)?;

    let manifest = out.finish(RunManifest {
        command: "simulate".into(),
        tool_version: TOOL_VERSION.into(),
        seed: config.seed,
        config: Some(config.clone()),
        files: BTreeMap::new(),
        rejected: ensemble.rejected.len(),
        rejected_reasons: ensemble.rejection_counts(),
        wall_clock_s: start.elapsed().as_secs_f64(),
    })?;
    Ok(SimulateOutcome { manifest, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Sequence,
    Penetration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: String,
    pub hull_area: f64,
    pub std_flow: f64,
    pub std_density: f64,
    pub rms_distance: f64,
    /// The same point rerun under master seed + 1.
    pub rerun_hull_area: f64,
    pub rerun_std_flow: f64,
    pub rerun_std_density: f64,
    pub rerun_rms_distance: f64,
}

/// Run `simulate` at each sweep value (and again at seed + 1), each into
/// its own directory, then write `comparison.csv`.
pub fn cmd_sweep(base: &EnsembleConfig, axis: SweepAxis, values: &[String], out_dir: &Path) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::validation("values", "sweep needs at least one value"));
    }
    let start = Instant::now();
    let mut configs = Vec::new();
    for v in values {
        let mut c = base.clone();
        match axis {
            SweepAxis::Sequence => c.scenario = v.parse()?,
            SweepAxis::Penetration => {
                c.penetration = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::validation("values", format!("`{v}` is not a number")))?
            }
        }
        c.validate()?;
        configs.push((v.trim().to_string(), c));
    }
    let mut rows = Vec::new();
    for (v, c) in &configs {
        let dir_name = format!("{}_{}", axis_name(axis), v.replace([':', ',', '/'], "_"));
        let main = cmd_simulate(c, &out_dir.join(&dir_name), SimulateOptions::default())?;
        let rerun_cfg = EnsembleConfig {
            seed: c.seed.wrapping_add(1),
            ..c.clone()
        };
        let rerun = cmd_simulate(&rerun_cfg, &out_dir.join(format!("{dir_name}_rerun")), SimulateOptions::default())?;
        rows.push(SweepRow {
            value: v.clone(),
            hull_area: main.report.hull_area,
            std_flow: main.report.std_flow,
            std_density: main.report.std_density,
            rms_distance: main.report.rms_distance,
            rerun_hull_area: rerun.report.hull_area,
            rerun_std_flow: rerun.report.std_flow,
            rerun_std_density: rerun.report.std_density,
            rerun_rms_distance: rerun.report.rms_distance,
        });
    }
    let mut out = OutDir::new(out_dir)?;
    out.csv(
        "comparison.csv",
        &[
            axis_name(axis),
            "hull_area",
            "std_flow",
            "std_density",
            "rms_distance",
            "rerun_hull_area",
            "rerun_std_flow",
            "rerun_std_density",
            "rerun_rms_distance",
        ],
        rows.iter().map(|r| {
            vec![
                r.value.clone(),
                num(r.hull_area),
                num(r.std_flow),
                num(r.std_density),
                num(r.rms_distance),
                num(r.rerun_hull_area),
                num(r.rerun_std_flow),
                num(r.rerun_std_density),
                num(r.rerun_rms_distance),
            ]
        }),
    )?;
    out.finish(RunManifest {
        command: format!("sweep --axis {}", axis_name(axis)),
        tool_version: TOOL_VERSION.into(),
        seed: base.seed,
        config: Some(base.clone()),
        files: BTreeMap::new(),
        rejected: 0,
        rejected_reasons: BTreeMap::new(),
        wall_clock_s: start.elapsed().as_secs_f64(),
    })?;
    Ok(rows)
}

fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Sequence => "sequence",
        SweepAxis::Penetration => "penetration",
    }
}

// ---------------------------------------------------------------------------
// Argument parsing

/// Parse `a:b:n` as `n` evenly spaced values from `a` to `b`, or a comma
/// list.
pub fn parse_omega_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::validation("omega", format!("expected `start:stop:count` or a list, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            match n {
                0 => Err(bad()),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            }
        }
        [_] => s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect(),
        _ => Err(bad()),
    }
}

pub fn parse_laws(s: &str) -> Result<Vec<LawKind>> {
    s.split(',').map(|x| x.trim().parse()).collect()
}

#[derive(Debug, Parser)]
#[command(name = "stochfd", version, about = "Stochastic dynamic fundamental diagrams of mixed platoons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frequency-response scatter of sampled car-following laws.
    FreqResponse(FreqResponseCli),
    /// One Monte Carlo ensemble with metrics, hull and density grid.
    Simulate(SimulateCli),
    /// Repeat `simulate` along a sequence or penetration axis.
    Sweep(SweepCli),
}

#[derive(Debug, Args)]
pub struct FreqResponseCli {
    /// Comma-separated laws (ovm, gfm, fvdm, idm, ll, hl).
    #[arg(long, default_value = "fvdm,gfm,ovm,idm")]
    pub laws: String,
    #[arg(long, default_value_t = 200)]
    pub particles: usize,
    /// `start:stop:count` (rad/s) or a comma list.
    #[arg(long, default_value = "0.1:0.4:31")]
    pub omega: String,
    /// Leader position amplitude (m).
    #[arg(long, default_value_t = 10.0)]
    pub amplitude: f64,
    /// Equilibrium speed (m/s).
    #[arg(long, default_value_t = 15.0)]
    pub v_e: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out/freq_response")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnsembleCli {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// av_first, hdv_first, alternating, random_order or explicit:AV,HDV,...
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub penetration: Option<f64>,
    /// Law-mix preset (i24 or ngsim).
    #[arg(long)]
    pub mix: Option<String>,
}

impl EnsembleCli {
    pub fn resolve(&self) -> Result<EnsembleConfig> {
        let mut c = match &self.config {
            Some(p) => parse_config(p)?,
            None => EnsembleConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(n) = self.samples {
            c.n_samples = n;
        }
        if let Some(s) = &self.scenario {
            c.scenario = s.parse()?;
        }
        if let Some(p) = self.penetration {
            c.penetration = p;
        }
        if let Some(m) = &self.mix {
            c.mix = LawMix::preset(m)?;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct SimulateCli {
    #[command(flatten)]
    pub ensemble: EnsembleCli,
    #[arg(long, default_value = "out/simulate")]
    pub out: PathBuf,
    /// Write the whole trace of every sample instead of its final period.
    #[arg(long)]
    pub full_traces: bool,
}

#[derive(Debug, Args)]
pub struct SweepCli {
    #[command(flatten)]
    pub ensemble: EnsembleCli,
    #[arg(long, value_enum)]
    pub axis: SweepAxis,
    /// Comma-separated sweep values.
    #[arg(long)]
    pub values: String,
    #[arg(long, default_value = "out/sweep")]
    pub out: PathBuf,
}

/// Execute a command line; returns a one-line summary for stdout.
pub fn run<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::validation("arguments", e.to_string()))?;
    match cli.command {
        Command::FreqResponse(a) => {
            let args = FreqResponseArgs {
                laws: parse_laws(&a.laws)?,
                particles: a.particles,
                omegas: parse_omega_grid(&a.omega)?,
                amplitude: a.amplitude,
                v_e: a.v_e,
                seed: a.seed,
                out: a.out,
            };
            let m = cmd_freq_response(&args)?;
            Ok(format!("wrote {} files to {}", m.files.len() + 1, args.out.display()))
        }
        Command::Simulate(a) => {
            let config = a.ensemble.resolve()?;
            let o = cmd_simulate(&config, &a.out, SimulateOptions { full_traces: a.full_traces })?;
            Ok(format!(
                "{} accepted, {} rejected; hull area {:.2}; wrote {}",
                o.report.n_loops,
                o.manifest.rejected,
                o.report.hull_area,
                a.out.display()
            ))
        }
        Command::Sweep(a) => {
            let config = a.ensemble.resolve()?;
            let values: Vec<String> = a.values.split(',').map(str::to_string).collect();
            let rows = cmd_sweep(&config, a.axis, &values, &a.out)?;
            Ok(format!("{} sweep points; wrote {}", rows.len(), a.out.join("comparison.csv").display()))
        }
    }
}
