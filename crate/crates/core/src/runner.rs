//! Experiment runner: flat key-value configuration, figure presets, CSV
//! emission and run manifests.
//!
//! Every pipeline maps a list of independent grid points onto a worker pool
//! and merges the results in grid order, so output files are identical
//! between runs with the same configuration.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::basis::{BasisDescriptor, BasisKind};
use crate::diagnostics::{melt_scan, MeltScan};
use crate::dynamics::{evolve_trace, init_theta, ImbalanceTrace, NormPolicy, StateVector};
use crate::fitting::{alpha_scan_with, beta_fit, gamma_sweep_with, AlphaPoint, FitResult};
use crate::model::{build_floquet, DriveParams, OperatorForm, Protocol, CALIBRATED_SWAP_PHASE};
use crate::spectral::{eigendecompose_with, overlap_weights, PairingOptions, SpectralOptions};
use crate::symmetry::{pt_report_with, ParityVariant, SymmetryReport};
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    Traces,
    Overlaps,
    Scaling,
    Melting,
    Gamma,
    Theta,
    Symmetry,
}

impl Pipeline {
    pub const ALL: [Pipeline; 7] = [
        Pipeline::Traces,
        Pipeline::Overlaps,
        Pipeline::Scaling,
        Pipeline::Melting,
        Pipeline::Gamma,
        Pipeline::Theta,
        Pipeline::Symmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Traces => "traces",
            Pipeline::Overlaps => "overlaps",
            Pipeline::Scaling => "scaling",
            Pipeline::Melting => "melting",
            Pipeline::Gamma => "gamma",
            Pipeline::Theta => "theta",
            Pipeline::Symmetry => "symmetry",
        }
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown pipeline `{s}`")))
    }
}

pub fn protocol_name(p: &Protocol) -> String {
    match p {
        Protocol::Hermitian => "hermitian".into(),
        Protocol::NonReciprocal => "non-reciprocal".into(),
        Protocol::Skewed { gamma } => format!("skewed:{gamma:?}"),
    }
}

pub fn parse_protocol(s: &str) -> Result<Protocol> {
    match s {
        "hermitian" | "H" => Ok(Protocol::Hermitian),
        "non-reciprocal" | "NH" => Ok(Protocol::NonReciprocal),
        _ => {
            let gamma = s
                .strip_prefix("skewed:")
                .and_then(|g| g.parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidConfig(format!("unknown protocol `{s}`")))?;
            Ok(Protocol::Skewed { gamma })
        }
    }
}

/// Resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub preset: String,
    pub pipeline: Pipeline,
    pub protocols: Vec<Protocol>,
    pub l: usize,
    pub jz: f64,
    pub t1: f64,
    pub t2: f64,
    pub swap_phase_base: f64,
    pub eps: Vec<f64>,
    pub sizes: Vec<usize>,
    pub gammas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub n_periods: usize,
    pub output: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub norm_policy: NormPolicy,
    pub parity: ParityVariant,
    pub condition_threshold: f64,
    pub dominance_floor: f64,
    pub max_dense_dim: usize,
    pub max_state_dim: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: "custom".into(),
            pipeline: Pipeline::Traces,
            protocols: vec![Protocol::Hermitian, Protocol::NonReciprocal],
            l: 8,
            jz: 1.0,
            t1: 0.5,
            t2: 0.5,
            swap_phase_base: CALIBRATED_SWAP_PHASE,
            eps: vec![0.0, 0.1, 0.2, 0.3],
            sizes: vec![4, 5, 6, 7, 8],
            gammas: vec![0.0, 0.1, 0.2],
            thetas: vec![0.0],
            n_periods: 100,
            output: PathBuf::from("out"),
            workers: 0,
            norm_policy: NormPolicy::RenormalizeEachPeriod,
            parity: ParityVariant::default(),
            condition_threshold: SpectralOptions::default().condition_threshold,
            dominance_floor: PairingOptions::scaling().dominance_floor,
            max_dense_dim: 8192,
            max_state_dim: 1 << 26,
        }
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

fn parse_list<T>(value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| f(v.trim())).collect()
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value `{value}` for `{key}`")))
}

/// `start:stop:step` inclusive ranges are accepted wherever a float list is.
fn parse_floats(key: &str, value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 3 {
        let (a, b, h): (f64, f64, f64) =
            (parse_num(key, parts[0])?, parse_num(key, parts[1])?, parse_num(key, parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(Error::InvalidConfig(format!("bad range `{value}` for `{key}`")));
        }
        return Ok(grid(a, b, h));
    }
    parse_list(value, |v| parse_num(key, v))
}

impl ExperimentConfig {
    pub fn template(&self) -> DriveParams {
        DriveParams {
            l: self.l,
            eps_a: 0.0,
            eps_b: 0.0,
            jz: self.jz,
            t1: self.t1,
            t2: self.t2,
            swap_phase_base: self.swap_phase_base,
        }
    }

    pub fn pairing(&self) -> PairingOptions {
        PairingOptions {
            dominance_floor: self.dominance_floor,
            ..PairingOptions::default()
        }
    }

    pub fn spectral_options(&self) -> SpectralOptions {
        SpectralOptions {
            condition_threshold: self.condition_threshold,
            ..SpectralOptions::default()
        }
    }

    /// Flat `key = value` lines.
    pub fn to_text(&self) -> String {
        let norm = match self.norm_policy {
            NormPolicy::RenormalizeEachPeriod => "renormalize",
            NormPolicy::Raw => "raw",
        };
        let lines = [
            ("preset", self.preset.clone()),
            ("pipeline", self.pipeline.name().into()),
            ("protocols", join(&self.protocols, protocol_name)),
            ("L", self.l.to_string()),
            ("jz", format!("{:?}", self.jz)),
            ("t1", format!("{:?}", self.t1)),
            ("t2", format!("{:?}", self.t2)),
            ("swap_phase_base", format!("{:?}", self.swap_phase_base)),
            ("eps", join(&self.eps, |v| format!("{v:?}"))),
            ("sizes", join(&self.sizes, |v| v.to_string())),
            ("gammas", join(&self.gammas, |v| format!("{v:?}"))),
            ("thetas", join(&self.thetas, |v| format!("{v:?}"))),
            ("n_periods", self.n_periods.to_string()),
            ("output", self.output.display().to_string()),
            ("workers", self.workers.to_string()),
            ("norm_policy", norm.into()),
            ("parity", self.parity.name().into()),
            ("condition_threshold", format!("{:?}", self.condition_threshold)),
            ("dominance_floor", format!("{:?}", self.dominance_floor)),
            ("max_dense_dim", self.max_dense_dim.to_string()),
            ("max_state_dim", self.max_state_dim.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "preset" => self.preset = value.into(),
            "pipeline" => self.pipeline = value.parse()?,
            "protocols" => self.protocols = parse_list(value, parse_protocol)?,
            "L" | "l" => self.l = parse_num(key, value)?,
            "jz" => self.jz = parse_num(key, value)?,
            "t1" => self.t1 = parse_num(key, value)?,
            "t2" => self.t2 = parse_num(key, value)?,
            "swap_phase_base" => self.swap_phase_base = parse_num(key, value)?,
            "eps" => self.eps = parse_floats(key, value)?,
            "sizes" => self.sizes = parse_list(value, |v| parse_num(key, v))?,
            "gammas" => self.gammas = parse_floats(key, value)?,
            "thetas" => self.thetas = parse_floats(key, value)?,
            "n_periods" => self.n_periods = parse_num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "workers" => self.workers = parse_num(key, value)?,
            "norm_policy" => {
                self.norm_policy = match value {
                    "renormalize" => NormPolicy::RenormalizeEachPeriod,
                    "raw" => NormPolicy::Raw,
                    _ => return Err(Error::InvalidConfig(format!("unknown norm policy `{value}`"))),
                }
            }
            "parity" => self.parity = value.parse()?,
            "condition_threshold" => self.condition_threshold = parse_num(key, value)?,
            "dominance_floor" => self.dominance_floor = parse_num(key, value)?,
            "max_dense_dim" => self.max_dense_dim = parse_num(key, value)?,
            "max_state_dim" => self.max_state_dim = parse_num(key, value)?,
            other => return Err(Error::InvalidConfig(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("expected `key = value`, got `{line}`")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .as_ref()
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("override `{}` is not key=value", o.as_ref())))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let template = DriveParams { l: self.l.max(1), ..self.template() };
        template.validate()?;
        if self.protocols.is_empty() && !matches!(self.pipeline, Pipeline::Gamma) {
            return Err(Error::InvalidConfig("no protocols given".into()));
        }
        if self.eps.is_empty() {
            return Err(Error::InvalidConfig("empty ε grid".into()));
        }
        if self.n_periods == 0 {
            return Err(Error::InvalidConfig("n_periods must be positive".into()));
        }
        Ok(())
    }

    /// Refuses grids whose largest dense operator or state vector exceeds
    /// the configured limits.
    pub fn check_resources(&self) -> Result<()> {
        let max_size = self.sizes.iter().copied().max().unwrap_or(self.l);
        let dense = |what: &'static str, l: usize, per_site: u32| -> Result<()> {
            let required = (per_site as usize).checked_pow(l as u32).unwrap_or(usize::MAX);
            if required > self.max_dense_dim {
                return Err(Error::Resource { what, required, limit: self.max_dense_dim });
            }
            Ok(())
        };
        let state = |what: &'static str, l: usize, per_site: u32| -> Result<()> {
            let required = (per_site as usize).checked_pow(l as u32).unwrap_or(usize::MAX);
            if required > self.max_state_dim {
                return Err(Error::Resource { what, required, limit: self.max_state_dim });
            }
            Ok(())
        };
        match self.pipeline {
            Pipeline::Traces => state("pair-sector state", self.l, 2),
            Pipeline::Overlaps => dense("dense pair-sector eigensolve", self.l, 2),
            Pipeline::Scaling | Pipeline::Gamma => dense("dense pair-sector eigensolve", max_size, 2),
            Pipeline::Melting => state("pair-sector state", max_size, 2),
            Pipeline::Theta => state("full-basis state", self.l, 4),
            Pipeline::Symmetry => dense("dense full-basis operator", max_size, 4),
        }
    }
}

/// Figure presets. `ptcheck` is the symmetry-certificate grid.
pub const PRESETS: [&str; 7] = ["fig1", "fig2", "fig3", "fig4", "fig5", "figS2", "ptcheck"];

/// Inclusive grid, rounded to 12 decimals so that `0:0.3:0.1` ends at 0.3.
fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig {
        preset: name.into(),
        output: PathBuf::from("out").join(name),
        ..ExperimentConfig::default()
    };
    let window = grid(0.25, 0.45, 0.05);
    let cfg = match name {
        "fig1" => ExperimentConfig { pipeline: Pipeline::Traces, ..base },
        "fig2" => ExperimentConfig {
            pipeline: Pipeline::Overlaps,
            eps: grid(0.0, 0.5, 0.01),
            ..base
        },
        "fig3" => ExperimentConfig { pipeline: Pipeline::Scaling, eps: window, ..base },
        "fig4" => ExperimentConfig {
            pipeline: Pipeline::Melting,
            eps: grid(0.01, 0.8, 0.01),
            sizes: vec![6, 7, 8],
            ..base
        },
        "fig5" => ExperimentConfig {
            pipeline: Pipeline::Gamma,
            protocols: vec![Protocol::NonReciprocal],
            eps: window,
            ..base
        },
        "figS2" => ExperimentConfig {
            pipeline: Pipeline::Theta,
            eps: vec![0.0, 0.2, 0.3],
            thetas: vec![0.0, std::f64::consts::PI / 16.0, std::f64::consts::PI / 8.0],
            n_periods: 30,
            ..base
        },
        "ptcheck" => ExperimentConfig {
            pipeline: Pipeline::Symmetry,
            eps: grid(0.0, 0.5, 0.1),
            sizes: vec![2, 3, 4],
            ..base
        },
        other => return Err(Error::UnknownPreset(other.into())),
    };
    Ok(cfg)
}

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // 17 significant digits round-trip any double
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> std::result::Result<Vec<u8>, csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `table` to `path` and returns the SHA-256 of the bytes written.
pub fn emit_csv(table: &Table, path: &Path) -> Result<String> {
    let bytes = table.to_bytes().map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    /// `(stage, seconds)`.
    pub stages: Vec<(String, f64)>,
    /// `(file name relative to the output directory, SHA-256)`.
    pub outputs: Vec<(String, String)>,
    /// Headline numbers, e.g. fitted exponents or `ε_c`.
    pub results: Vec<(String, String)>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = format!("artifact: nhdtc {VERSION}\n\n[config]\n");
        s += &self.config.to_text();
        s += "\n[stages]\n";
        for (name, secs) in &self.stages {
            s += &format!("{name}: {secs:.3} s\n");
        }
        s += "\n[outputs]\n";
        for (file, digest) in &self.outputs {
            s += &format!("{file}: sha256 {digest}\n");
        }
        s += "\n[results]\n";
        for (k, v) in &self.results {
            s += &format!("{k}: {v}\n");
        }
        s
    }

    /// Files whose current digest differs from the recorded one.
    pub fn stale_outputs(&self, dir: &Path) -> Result<Vec<String>> {
        let mut stale = Vec::new();
        for (file, digest) in &self.outputs {
            let path = dir.join(file);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if sha256_hex(&bytes) != *digest {
                stale.push(file.clone());
            }
        }
        Ok(stale)
    }
}

struct Recorder {
    dir: PathBuf,
    stages: Vec<(String, f64)>,
    outputs: Vec<(String, String)>,
    results: Vec<(String, String)>,
}

impl Recorder {
    fn emit(&mut self, name: String, table: &Table) -> Result<()> {
        let digest = emit_csv(table, &self.dir.join(&name))?;
        self.outputs.push((name, digest));
        Ok(())
    }

    fn write_text(&mut self, name: String, text: &str) -> Result<()> {
        let path = self.dir.join(&name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.outputs.push((name, sha256_hex(text.as_bytes())));
        Ok(())
    }

    fn stage<T>(&mut self, name: impl Into<String>, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f()?;
        self.stages.push((name.into(), t.elapsed().as_secs_f64()));
        Ok(out)
    }

    fn result(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.results.push((key.into(), value.to_string()));
    }
}

/// Resolves a preset, applies overrides and executes it.
pub fn run<S: AsRef<str>>(preset_name: &str, overrides: &[S]) -> Result<RunManifest> {
    let mut cfg = preset(preset_name)?;
    cfg.apply_overrides(overrides)?;
    execute(&cfg)
}

/// Runs the configured pipeline and writes its CSVs plus `manifest.txt`.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    cfg.check_resources()?;
    // grid points are the unit of parallelism; keep each eigensolve serial
    faer::set_global_parallelism(faer::Par::Seq);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
    let mut rec = Recorder {
        dir: cfg.output.clone(),
        stages: Vec::new(),
        outputs: Vec::new(),
        results: Vec::new(),
    };
    pool.install(|| match cfg.pipeline {
        Pipeline::Traces => run_traces(cfg, &mut rec),
        Pipeline::Overlaps => run_overlaps(cfg, &mut rec),
        Pipeline::Scaling => run_scaling(cfg, &mut rec),
        Pipeline::Melting => run_melting(cfg, &mut rec),
        Pipeline::Gamma => run_gamma(cfg, &mut rec),
        Pipeline::Theta => run_theta(cfg, &mut rec),
        Pipeline::Symmetry => run_symmetry(cfg, &mut rec),
    })?;
    let manifest = RunManifest {
        config: cfg.clone(),
        stages: rec.stages,
        outputs: rec.outputs,
        results: rec.results,
    };
    let path = cfg.output.join("manifest.txt");
    fs::write(&path, manifest.to_text()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn fmt_eps(eps: f64) -> String {
    format!("{eps:.4}")
}

pub fn trace_table(trace: &ImbalanceTrace) -> Table {
    let l = trace.l();
    let mut t = Table::new(
        ["n".to_string(), "I_total".to_string()]
            .into_iter()
            .chain((1..=l).map(|j| format!("I_{j}"))),
    );
    for (n, (total, sites)) in trace.total.iter().zip(&trace.per_site).enumerate() {
        let mut row = vec![Cell::from(n), Cell::from(*total)];
        row.extend(sites.iter().map(|&v| Cell::from(v)));
        t.push(row);
    }
    t
}

fn run_traces(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let desc = BasisDescriptor::pair_sector(cfg.l)?;
    let state0 = StateVector::polarized(desc).with_policy(cfg.norm_policy);
    let template = cfg.template();
    for protocol in &cfg.protocols {
        let traces = rec.stage(format!("traces_{}", protocol.label()), || {
            cfg.eps
                .par_iter()
                .map(|&eps| evolve_trace(&protocol.apply(&template, cfg.l, eps), &state0, cfg.n_periods))
                .collect::<Result<Vec<_>>>()
        })?;
        for (eps, trace) in cfg.eps.iter().zip(&traces) {
            rec.emit(format!("trace_{}_eps{}.csv", protocol.label(), fmt_eps(*eps)), &trace_table(trace))?;
            rec.result(
                format!("alternating_periods_{}_eps{}", protocol.label(), fmt_eps(*eps)),
                trace.alternating_prefix(),
            );
        }
    }
    Ok(())
}

fn run_overlaps(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let desc = BasisDescriptor::pair_sector(cfg.l)?;
    let psi = StateVector::polarized(desc);
    let partner = psi.inverted();
    let template = cfg.template();
    let opts = cfg.spectral_options();
    for protocol in &cfg.protocols {
        let rows = rec.stage(format!("overlaps_{}", protocol.label()), || {
            cfg.eps
                .par_iter()
                .map(|&eps| {
                    let params = protocol.apply(&template, cfg.l, eps);
                    let u = build_floquet(&params, &desc, OperatorForm::DenseMatrix)?;
                    let spec = eigendecompose_with(&u, &opts)?;
                    let a = overlap_weights(&spec, &psi)?;
                    let b = overlap_weights(&spec, &partner)?;
                    Ok((spec, a, b))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let mut t = Table::new(["eps", "k", "phase", "decay", "re_A", "im_A", "re_A_partner", "im_A_partner"]);
        for (eps, (spec, a, b)) in cfg.eps.iter().zip(&rows) {
            for k in 0..spec.dim() {
                t.push(vec![
                    Cell::from(*eps),
                    Cell::from(k),
                    Cell::from(spec.energies[k].phase),
                    Cell::from(spec.energies[k].decay),
                    Cell::from(a[k].re),
                    Cell::from(a[k].im),
                    Cell::from(b[k].re),
                    Cell::from(b[k].im),
                ]);
            }
        }
        rec.emit(format!("spectrum_{}.csv", protocol.label()), &t)?;
        let worst = rows.iter().map(|r| r.0.max_decay()).fold(0.0, f64::max);
        rec.result(format!("max_imag_quasienergy_{}", protocol.label()), format!("{worst:.3e}"));
    }
    Ok(())
}

fn alpha_tables(alphas: &[AlphaPoint]) -> (Table, Table) {
    let mut gaps = Table::new(["eps", "L", "delta_E"]);
    let mut fits = Table::new(["eps", "alpha", "alpha_stderr", "r_squared"]);
    for a in alphas {
        for &(l, d) in &a.gaps {
            gaps.push(vec![Cell::from(a.eps), Cell::from(l), Cell::from(d)]);
        }
        fits.push(vec![
            Cell::from(a.eps),
            Cell::from(a.alpha()),
            Cell::from(a.fit.rate_stderr),
            Cell::from(a.fit.r_squared),
        ]);
    }
    (gaps, fits)
}

fn beta_row(label: &str, beta: &FitResult) -> Vec<Cell> {
    vec![
        Cell::from(label),
        Cell::from(beta.rate),
        Cell::from(beta.rate_stderr),
        Cell::from(beta.r_squared),
    ]
}

fn run_scaling(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let pairing = cfg.pairing();
    let mut betas = Table::new(["protocol", "beta", "beta_stderr", "r_squared"]);
    for protocol in &cfg.protocols {
        let label = protocol.label();
        let alphas = rec.stage(format!("scaling_{label}"), || {
            alpha_scan_with(*protocol, &cfg.eps, &cfg.sizes, &pairing)
        })?;
        let (gaps, fits) = alpha_tables(&alphas);
        rec.emit(format!("gaps_{label}.csv"), &gaps)?;
        rec.emit(format!("alpha_{label}.csv"), &fits)?;
        let beta = beta_fit(&alphas)?;
        rec.result(format!("beta_{label}"), format!("{:.4} ± {:.4}", beta.rate, beta.rate_stderr));
        betas.push(beta_row(&label, &beta));
    }
    rec.emit("beta.csv".into(), &betas)
}

fn run_melting(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let mut summary = Table::new(["protocol", "L", "eps_c"]);
    for protocol in &cfg.protocols {
        let label = protocol.label();
        for &l in &cfg.sizes {
            let template = DriveParams { l, ..cfg.template() };
            let scan: Result<MeltScan> = rec.stage(format!("melting_{label}_L{l}"), || {
                Ok(melt_scan(&template, *protocol, &cfg.eps, cfg.n_periods))
            })?;
            let scan = match scan {
                Ok(s) => s,
                Err(Error::NoTransitionDetected { ratio }) => {
                    rec.result(format!("eps_c_{label}_L{l}"), format!("none (peak/median = {ratio:.3})"));
                    summary.push(vec![Cell::from(label.as_str()), Cell::from(l), Cell::from(f64::NAN)]);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let mut kl = Table::new(["omega", "eps", "KL"]);
            for (i, &eps) in scan.eps.iter().enumerate() {
                for (k, &w) in scan.frequencies.iter().enumerate() {
                    kl.push(vec![Cell::from(w), Cell::from(eps), Cell::from(scan.kl[i][k])]);
                }
            }
            let mut var = Table::new(["eps", "Var"]);
            for (&eps, &v) in scan.eps.iter().zip(&scan.variance) {
                var.push(vec![Cell::from(eps), Cell::from(v)]);
            }
            rec.emit(format!("kl_{label}_L{l}.csv"), &kl)?;
            rec.emit(format!("variance_{label}_L{l}.csv"), &var)?;
            rec.result(format!("eps_c_{label}_L{l}"), format!("{:.4}", scan.eps_c));
            summary.push(vec![Cell::from(label.as_str()), Cell::from(l), Cell::from(scan.eps_c)]);
        }
    }
    rec.emit("eps_c.csv".into(), &summary)
}

fn run_gamma(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let rows = rec.stage("gamma_sweep", || {
        gamma_sweep_with(&cfg.gammas, &cfg.eps, &cfg.sizes, &cfg.pairing())
    })?;
    let mut alphas = Table::new(["gamma", "eps", "alpha", "alpha_stderr"]);
    let mut betas = Table::new(["gamma", "beta", "beta_stderr"]);
    for row in &rows {
        for a in &row.alphas {
            alphas.push(vec![
                Cell::from(row.gamma),
                Cell::from(a.eps),
                Cell::from(a.alpha()),
                Cell::from(a.fit.rate_stderr),
            ]);
        }
        betas.push(vec![Cell::from(row.gamma), Cell::from(row.beta.rate), Cell::from(row.beta.rate_stderr)]);
        rec.result(
            format!("beta_gamma{}", fmt_eps(row.gamma)),
            format!("{:.4} ± {:.4}", row.beta.rate, row.beta.rate_stderr),
        );
    }
    rec.emit("gamma_alpha.csv".into(), &alphas)?;
    rec.emit("gamma_beta.csv".into(), &betas)
}

fn run_theta(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let template = cfg.template();
    let states = cfg
        .thetas
        .iter()
        .map(|&th| Ok(init_theta(cfg.l, th)?.with_policy(cfg.norm_policy)))
        .collect::<Result<Vec<_>>>()?;
    for protocol in &cfg.protocols {
        let label = protocol.label();
        for &eps in &cfg.eps {
            let params = protocol.apply(&template, cfg.l, eps);
            let traces = rec.stage(format!("theta_{label}_eps{}", fmt_eps(eps)), || {
                states
                    .par_iter()
                    .map(|s| evolve_trace(&params, s, cfg.n_periods))
                    .collect::<Result<Vec<_>>>()
            })?;
            let mut t = Table::new(["theta", "n", "I_normalized"]);
            for (th, tr) in cfg.thetas.iter().zip(&traces) {
                for (n, v) in tr.normalized_total().into_iter().enumerate() {
                    t.push(vec![Cell::from(*th), Cell::from(n), Cell::from(v)]);
                }
                rec.result(
                    format!("alternating_periods_{label}_eps{}_theta{:.4}", fmt_eps(eps), th),
                    tr.alternating_prefix(),
                );
            }
            rec.emit(format!("theta_{label}_eps{}.csv", fmt_eps(eps)), &t)?;
        }
    }
    Ok(())
}

fn run_symmetry(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let template = cfg.template();
    let mut jobs = Vec::new();
    for &l in &cfg.sizes {
        for protocol in &cfg.protocols {
            for &eps in &cfg.eps {
                jobs.push(protocol.apply(&template, l, eps));
            }
        }
    }
    let reports: Vec<SymmetryReport> = rec.stage("symmetry", || {
        jobs.par_iter().map(|p| pt_report_with(p, cfg.parity)).collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new([
        "L",
        "eps_a",
        "eps_b",
        "pt_commutator_ising",
        "pt_commutator_hopping",
        "parity_floquet_commutator",
        "parity_square_deviation",
        "max_imag_quasienergy",
        "magnetization_floquet_commutator",
    ]);
    let mut text = String::new();
    for r in &reports {
        t.push(vec![
            Cell::from(r.l),
            Cell::from(r.eps_a),
            Cell::from(r.eps_b),
            Cell::from(r.pt_ising),
            Cell::from(r.pt_hopping),
            Cell::from(r.parity_floquet),
            Cell::from(r.parity_square),
            Cell::from(r.max_imag_energy),
            Cell::from(r.magnetization_floquet),
        ]);
        text += &r.to_text();
        text += "\n";
    }
    rec.emit("ptcheck.csv".into(), &t)?;
    rec.write_text("ptcheck.txt".into(), &text)?;
    let worst = reports.iter().map(SymmetryReport::worst_commutator).fold(0.0, f64::max);
    let imag = reports.iter().map(|r| r.max_imag_energy).fold(0.0, f64::max);
    rec.result("worst_commutator", format!("{worst:.3e}"));
    rec.result("max_imag_quasienergy", format!("{imag:.3e}"));
    Ok(())
}

/// One line of the `validate` invariant suite.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// Quick structural invariants at small `L`.
pub fn validate_invariants() -> Result<Vec<Check>> {
    use crate::dynamics::init_polarized;
    use crate::spectral::eigendecompose;

    let mut checks = Vec::new();

    let trace = evolve_trace(&DriveParams::new(4, 0.0, 0.0), &init_polarized(4)?, 100)?;
    let ideal = trace
        .total
        .iter()
        .enumerate()
        .map(|(n, v)| (v - if n % 2 == 0 { 1.0 } else { -1.0 }).abs())
        .fold(0.0, f64::max);
    checks.push(Check { name: "ideal period doubling", value: ideal, tolerance: 1e-12 });

    let params = DriveParams::non_reciprocal(3, 0.3);
    let full = BasisDescriptor::new(3, BasisKind::Full)?;
    let gates = build_floquet(&params, &full, OperatorForm::GateSequence)?.to_dense();
    let dense = build_floquet(&params, &full, OperatorForm::DenseMatrix)?;
    let dense_m = dense.dense().expect("dense form requested");
    checks.push(Check {
        name: "gate sequence vs dense operator",
        value: gates.max_abs_diff(dense_m),
        tolerance: 1e-10,
    });

    let l = 4;
    let params = DriveParams::non_reciprocal(l, 0.3);
    let sector = StateVector::polarized(BasisDescriptor::pair_sector(l)?);
    let a = evolve_trace(&params, &sector, 20)?;
    let b = evolve_trace(&params, &init_polarized(l)?, 20)?;
    let diff = a.total.iter().zip(&b.total).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    checks.push(Check { name: "full vs pair-sector imbalance", value: diff, tolerance: 1e-10 });

    let u = build_floquet(&params, &BasisDescriptor::full(l)?, OperatorForm::DenseMatrix)?;
    let spec = eigendecompose(&u)?;
    checks.push(Check {
        name: "biorthogonality residual",
        value: spec.biorthogonality_residual(),
        tolerance: 1e-7,
    });
    checks.push(Check {
        name: "reconstruction residual",
        value: spec.reconstruction_residual(u.dense().expect("dense form requested")),
        tolerance: 1e-7,
    });
    checks.push(Check { name: "max |Im E|", value: spec.max_decay(), tolerance: 1e-8 });

    let report = pt_report_with(&DriveParams::non_reciprocal(3, 0.3), ParityVariant::default())?;
    checks.push(Check {
        name: "PT and parity commutators",
        value: report.worst_commutator(),
        tolerance: 1e-10,
    });
    Ok(checks)
}
