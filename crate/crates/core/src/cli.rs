//! Batch front-end: one subcommand per experiment, each producing a
//! [`ResultTable`] written as CSV or JSON.
//!
//! Parameters come from command-line flags, an optional `key = value`
//! config file (`--config PATH`), and built-in defaults, in that order of
//! precedence. The worker count falls back to `TWINBEAM_WORKERS`, then to
//! the available parallelism; it never changes the output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use serde_json::{json, Map, Value};

use crate::entangle::{log_negativity, partial_trace_cd, reduced_ab_from_coeffs, tmsv_density};
use crate::error::{Error, Result};
use crate::homodyne::{
    build_four_mode_state, convergence_scan, pulse_comparison, SplitterAmplitudes, SplitterModel,
};
use crate::phase::{decay_curve, fit_decay, phase_distribution, PhaseGrid, PLOT_M_MAX};
use crate::squeeze::{
    mixture_average_variance, quadrature_variance_from_counts, truncated_coefficients, variance_coherent_description,
    variance_fock_description, variance_series_sum, Budget, HomodyneSetup, LaserModel, SqueezeParams, Truncation,
    DEFAULT_EPSILON,
};

pub const WORKERS_ENV: &str = "TWINBEAM_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Coeffs,
    Variance,
    HomodyneExact,
    Multipulse,
    PhaseDist,
    DecayFit,
    ReducedState,
    Mixture,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Coeffs,
        Command::Variance,
        Command::HomodyneExact,
        Command::Multipulse,
        Command::PhaseDist,
        Command::DecayFit,
        Command::ReducedState,
        Command::Mixture,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Variance => "variance",
            Command::HomodyneExact => "homodyne-exact",
            Command::Multipulse => "multipulse",
            Command::PhaseDist => "phase-dist",
            Command::DecayFit => "decay-fit",
            Command::ReducedState => "reduced-state",
            Command::Mixture => "mixture",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownSubcommand(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidParameter(format!("format must be csv or json, got `{other}`"))),
        }
    }
}

/// Raw command line. Values stay strings until merged with the config file.
#[derive(Debug, Parser)]
#[command(name = "twinbeam", version, about = "Two-mode squeezing experiments in the Fock description")]
pub struct Args {
    /// coeffs | variance | homodyne-exact | multipulse | phase-dist | decay-fit | reduced-state | mixture
    pub command: String,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long = "theta-a")]
    pub theta_a: Option<String>,
    #[arg(long = "theta-b")]
    pub theta_b: Option<String>,
    /// θ_a + θ_b; sets θ_a to this value and θ_b to zero
    #[arg(long = "sum-angle")]
    pub sum_angle: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    /// Photon budget, or a comma-separated list of budgets
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long = "m-max")]
    pub m_max: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long = "window-start")]
    pub window_start: Option<String>,
    #[arg(long = "r-from")]
    pub r_from: Option<String>,
    #[arg(long = "r-to")]
    pub r_to: Option<String>,
    #[arg(long = "r-step")]
    pub r_step: Option<String>,
    /// Fit threshold: only points with r above it enter the decay fit
    #[arg(long = "r-min")]
    pub r_min: Option<String>,
    /// binomial | uniform
    #[arg(long)]
    pub splitter: Option<String>,
    #[arg(long = "half-width")]
    pub half_width: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub output: Option<String>,
    /// csv | json
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Args {
    fn flag_pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("r", &self.r),
            ("phi", &self.phi),
            ("theta_a", &self.theta_a),
            ("theta_b", &self.theta_b),
            ("sum_angle", &self.sum_angle),
            ("beta", &self.beta),
            ("n", &self.n),
            ("m_max", &self.m_max),
            ("epsilon", &self.epsilon),
            ("grid", &self.grid),
            ("window_start", &self.window_start),
            ("r_from", &self.r_from),
            ("r_to", &self.r_to),
            ("r_step", &self.r_step),
            ("r_min", &self.r_min),
            ("splitter", &self.splitter),
            ("half_width", &self.half_width),
            ("alpha", &self.alpha),
            ("output", &self.output),
            ("format", &self.format),
            ("workers", &self.workers),
        ]
    }
}

const KNOWN_KEYS: [&str; 21] = [
    "r",
    "phi",
    "theta_a",
    "theta_b",
    "sum_angle",
    "beta",
    "n",
    "m_max",
    "epsilon",
    "grid",
    "window_start",
    "r_from",
    "r_to",
    "r_step",
    "r_min",
    "splitter",
    "half_width",
    "alpha",
    "output",
    "format",
    "workers",
];

/// Parses `key = value` lines; `#` starts a comment, `-` in keys reads as `_`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

/// Fully resolved and validated parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub r: f64,
    pub phi: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub beta: Option<f64>,
    pub n: Vec<u32>,
    pub m_max: Option<usize>,
    pub epsilon: Option<f64>,
    pub grid: usize,
    pub window_start: f64,
    pub r_from: f64,
    pub r_to: f64,
    pub r_step: f64,
    pub r_min: f64,
    pub splitter: SplitterModel,
    pub alpha: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: usize,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse `{raw}`")))
}

fn finite(key: &str, raw: &str) -> Result<f64> {
    let v: f64 = parse_value(key, raw)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{key} must be finite, got {raw}")))
    }
}

impl RunConfig {
    /// Resolves a config from merged string values; `env_workers` is the
    /// fallback worker count from the environment.
    pub fn from_values(command: &str, values: &BTreeMap<String, String>, env_workers: Option<&str>) -> Result<Self> {
        let command: Command = command.parse()?;
        let get = |k: &str| values.get(k).map(String::as_str);
        let float = |k: &str, default: f64| -> Result<f64> { get(k).map_or(Ok(default), |v| finite(k, v)) };

        let r = float("r", 0.0)?;
        let phi = float("phi", 0.0)?;
        let (mut theta_a, mut theta_b) = (float("theta_a", phi)?, float("theta_b", 0.0)?);
        if let Some(s) = get("sum_angle") {
            theta_a = finite("sum_angle", s)?;
            theta_b = 0.0;
        }
        let beta = get("beta").map(|v| finite("beta", v)).transpose()?;
        if let Some(b) = beta {
            if b <= 0.0 {
                return Err(Error::InvalidParameter(format!("beta must be positive, got {b}")));
            }
        }
        let default_n: &[u32] = match command {
            Command::HomodyneExact => &[40, 80, 160, 320],
            Command::Multipulse => &[80, 160, 320],
            Command::ReducedState => &[],
            _ => &[1000],
        };
        let n = match get("n") {
            Some(list) => list
                .split(',')
                .map(|s| parse_value::<u32>("n", s))
                .collect::<Result<Vec<_>>>()?,
            None => default_n.to_vec(),
        };
        let m_max = get("m_max").map(|v| parse_value::<usize>("m_max", v)).transpose()?;
        let epsilon = get("epsilon").map(|v| finite("epsilon", v)).transpose()?;
        let grid = get("grid").map_or(Ok(crate::phase::DEFAULT_GRID_POINTS), |v| parse_value("grid", v))?;
        let window_start = float("window_start", 0.0)?;
        let r_from = float("r_from", 0.1)?;
        let r_to = float("r_to", 2.5)?;
        let r_step = float("r_step", 0.1)?;
        let r_min = float("r_min", 1.0)?;
        let half_width = get("half_width").map_or(Ok(3u32), |v| parse_value("half_width", v))?;
        let splitter = match get("splitter").unwrap_or("binomial") {
            "binomial" => SplitterModel::Binomial,
            "uniform" => SplitterModel::Uniform { half_width },
            other => {
                return Err(Error::InvalidParameter(format!("splitter must be binomial or uniform, got `{other}`")))
            }
        };
        let alpha = float("alpha", 1000f64.sqrt())?;
        let output = get("output").map(PathBuf::from);
        let format = get("format").unwrap_or("csv").parse()?;
        let workers = match get("workers").or(env_workers) {
            Some(w) => parse_value::<usize>("workers", w)?,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };

        let cfg = RunConfig {
            command,
            r,
            phi,
            theta_a,
            theta_b,
            beta,
            n,
            m_max,
            epsilon,
            grid,
            window_start,
            r_from,
            r_to,
            r_step,
            r_min,
            splitter,
            alpha,
            output,
            format,
            workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.r < 0.0 {
            return bad(format!("r must be non-negative, got {}", self.r));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return bad(format!("epsilon must lie in (0, 1), got {eps}"));
            }
        }
        if matches!(self.command, Command::HomodyneExact | Command::Multipulse) && self.n.is_empty() {
            return bad("n list must not be empty".into());
        }
        if self.command == Command::DecayFit {
            if !(self.r_step > 0.0) {
                return bad(format!("r-step must be positive, got {}", self.r_step));
            }
            if !(self.r_from > 0.0 && self.r_from <= self.r_to) {
                return bad(format!("r range {}..{} must be non-empty and positive", self.r_from, self.r_to));
            }
        }
        Ok(())
    }

    fn truncation(&self, default: Truncation) -> Truncation {
        match (self.m_max, self.epsilon) {
            (Some(m), _) => Truncation::Order(m),
            (None, Some(eps)) => Truncation::Epsilon(eps),
            (None, None) => default,
        }
    }

    fn params(&self) -> Result<SqueezeParams> {
        SqueezeParams::new(self.r, self.phi)
    }

    fn setup(&self, budget: Budget) -> Result<HomodyneSetup> {
        HomodyneSetup::from_quadratures(self.theta_a, self.theta_b, budget)
    }

    /// `r_from, r_from + r_step, …` up to `r_to`, rounded to 12 decimals.
    pub fn r_values(&self) -> Vec<f64> {
        let count = ((self.r_to - self.r_from) / self.r_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.r_from + i as f64 * self.r_step) * 1e12).round() / 1e12)
            .collect()
    }

    /// Every parameter that can affect results, as `key = value` pairs.
    /// The worker count and output path are omitted: they never change the
    /// table, and leaving them out keeps files byte-identical across runs.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = vec![
            ("command".into(), self.command.name().into()),
            ("r".into(), fmt_f64(self.r)),
            ("phi".into(), fmt_f64(self.phi)),
            ("theta_a".into(), fmt_f64(self.theta_a)),
            ("theta_b".into(), fmt_f64(self.theta_b)),
            ("beta".into(), self.beta.map(fmt_f64).unwrap_or_else(|| "none".into())),
            (
                "n".into(),
                self.n.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("m_max".into(), self.m_max.map(|m| m.to_string()).unwrap_or_else(|| "default".into())),
            ("epsilon".into(), self.epsilon.map(fmt_f64).unwrap_or_else(|| "default".into())),
            ("grid".into(), self.grid.to_string()),
            ("window_start".into(), fmt_f64(self.window_start)),
            ("r_from".into(), fmt_f64(self.r_from)),
            ("r_to".into(), fmt_f64(self.r_to)),
            ("r_step".into(), fmt_f64(self.r_step)),
            ("r_min".into(), fmt_f64(self.r_min)),
        ];
        let splitter = match self.splitter {
            SplitterModel::Binomial => "binomial".to_string(),
            SplitterModel::Uniform { half_width } => format!("uniform:{half_width}"),
        };
        v.push(("splitter".into(), splitter));
        v.push(("alpha".into(), fmt_f64(self.alpha)));
        v.push((
            "format".into(),
            match self.format {
                OutputFormat::Csv => "csv".into(),
                OutputFormat::Json => "json".into(),
            },
        ));
        v
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_f64(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => json!(x),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

/// Rectangular table with a provenance echo of the config.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, String)>,
}

impl ResultTable {
    fn new(columns: &[&str]) -> Self {
        ResultTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# twinbeam {}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut meta = Map::new();
        meta.insert("tool".into(), json!("twinbeam"));
        meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        for (k, v) in &self.meta {
            meta.insert(k.clone(), json!(v));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| (c.clone(), cell.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "meta": Value::Object(meta), "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Runs one subcommand on a dedicated pool of `config.workers` threads.
pub fn run(config: &RunConfig) -> Result<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut table = pool.install(|| dispatch(config))?;
    table.meta = config.echo();
    Ok(table)
}

fn dispatch(cfg: &RunConfig) -> Result<ResultTable> {
    match cfg.command {
        Command::Coeffs => run_coeffs(cfg),
        Command::Variance => run_variance(cfg),
        Command::HomodyneExact => run_homodyne_exact(cfg),
        Command::Multipulse => run_multipulse(cfg),
        Command::PhaseDist => run_phase_dist(cfg),
        Command::DecayFit => run_decay_fit(cfg),
        Command::ReducedState => run_reduced_state(cfg),
        Command::Mixture => run_mixture(cfg),
    }
}

fn run_coeffs(cfg: &RunConfig) -> Result<ResultTable> {
    let coeffs = truncated_coefficients(cfg.params()?, cfg.truncation(Truncation::default()))?;
    let mut t = ResultTable::new(&["m", "re", "im", "probability"]);
    for (m, c) in coeffs.as_slice().iter().enumerate() {
        t.push(vec![m.into(), c.re.into(), c.im.into(), c.norm_sqr().into()]);
    }
    Ok(t)
}

fn run_variance(cfg: &RunConfig) -> Result<ResultTable> {
    let params = cfg.params()?;
    let m_max = cfg.m_max.unwrap_or(200);
    let budgets: Vec<f64> = match cfg.beta {
        Some(b) => vec![2.0 * b * b],
        None => cfg.n.iter().map(|&n| n as f64).collect(),
    };
    let mut t = ResultTable::new(&[
        "r",
        "phi",
        "theta_a",
        "theta_b",
        "n",
        "beta",
        "coherent",
        "fock",
        "series",
        "series_relative_deviation",
        "quadrature_variance",
        "squeezed",
    ]);
    for n in budgets {
        let setup = cfg.setup(Budget::Photons(n))?;
        let beta = setup.lo_amplitude();
        let coherent = variance_coherent_description(params, &setup.with_budget(Budget::LoAmplitude(beta)));
        let fock = variance_fock_description(params, &setup);
        let series = variance_series_sum(params, &setup, m_max);
        let quad = quadrature_variance_from_counts(fock, beta)?;
        t.push(vec![
            cfg.r.into(),
            params.phi().into(),
            setup.theta_a().into(),
            setup.theta_b().into(),
            n.into(),
            beta.into(),
            coherent.into(),
            fock.into(),
            series.into(),
            ((series - fock).abs() / fock).into(),
            quad.value.into(),
            quad.squeezed.into(),
        ]);
    }
    Ok(t)
}

fn run_homodyne_exact(cfg: &RunConfig) -> Result<ResultTable> {
    let setup = cfg.setup(Budget::Photons(0.0))?;
    let rows = convergence_scan(cfg.params()?, cfg.truncation(Truncation::default()), &setup, &cfg.n, cfg.splitter)?;
    let mut t = ResultTable::new(&["n", "m_max", "exact", "analytic", "deviation"]);
    for r in rows {
        t.push(vec![r.n.into(), r.m_max.into(), r.exact.into(), r.analytic.into(), r.deviation.into()]);
    }
    Ok(t)
}

fn run_multipulse(cfg: &RunConfig) -> Result<ResultTable> {
    let setup = cfg.setup(Budget::Photons(0.0))?;
    let rows = pulse_comparison(cfg.params()?, cfg.truncation(Truncation::default()), &setup, &cfg.n)?;
    let mut t = ResultTable::new(&[
        "n",
        "m_max",
        "single_pulse",
        "two_pulse",
        "relative_difference",
        "bound",
        "within_bound",
    ]);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.m_max.into(),
            r.single_pulse.into(),
            r.two_pulse.into(),
            r.relative_difference.into(),
            r.bound.into(),
            (r.relative_difference <= r.bound).into(),
        ]);
    }
    Ok(t)
}

fn run_phase_dist(cfg: &RunConfig) -> Result<ResultTable> {
    let coeffs = truncated_coefficients(cfg.params()?, cfg.truncation(Truncation::Order(PLOT_M_MAX)))?;
    let grid = PhaseGrid::new(cfg.window_start, cfg.grid)?;
    let dist = phase_distribution(&coeffs, grid);
    let mut t = ResultTable::new(&["k", "phase", "probability", "closed_form"]);
    for (k, (x, &p)) in grid.iter().zip(dist.values()).enumerate() {
        t.push(vec![k.into(), x.into(), p.into(), dist.closed_form(x).into()]);
    }
    Ok(t)
}

fn run_decay_fit(cfg: &RunConfig) -> Result<ResultTable> {
    let grid = PhaseGrid::new(cfg.window_start, cfg.grid)?;
    let points = decay_curve(&cfg.r_values(), grid, cfg.truncation(Truncation::Order(PLOT_M_MAX)))?;
    let fit = fit_decay(&points, cfg.r_min)?;
    let mut t = ResultTable::new(&[
        "r",
        "log_ratio",
        "fitted",
        "slope",
        "intercept",
        "residual_norm",
        "in_fit",
    ]);
    for p in points {
        t.push(vec![
            p.r.into(),
            p.log_ratio.into(),
            fit.predict(p.r).into(),
            fit.slope.into(),
            fit.intercept.into(),
            fit.residual_norm.into(),
            (p.r > cfg.r_min).into(),
        ]);
    }
    Ok(t)
}

fn run_reduced_state(cfg: &RunConfig) -> Result<ResultTable> {
    let coeffs = truncated_coefficients(cfg.params()?, cfg.truncation(Truncation::Epsilon(DEFAULT_EPSILON)))?;
    let m_max = coeffs.m_max();
    let n = cfg.n.first().copied().unwrap_or((20 * m_max as u32).max(40));
    let splitter = SplitterAmplitudes::for_budget(cfg.splitter, n, m_max)?;
    let traced = partial_trace_cd(&build_four_mode_state(&coeffs, n, &splitter)?);
    let reduced = reduced_ab_from_coeffs(&coeffs);
    let pure = tmsv_density(&coeffs);
    let ln_reduced = log_negativity(&reduced)?;
    let ln_traced = log_negativity(&traced)?;
    let ln_tmsv = log_negativity(&pure)?;
    let mut t = ResultTable::new(&[
        "m",
        "weight",
        "partial_trace_weight",
        "log_negativity",
        "log_negativity_partial_trace",
        "log_negativity_tmsv",
    ]);
    for m in 0..=m_max {
        t.push(vec![
            m.into(),
            reduced.get((m, m), (m, m)).re.into(),
            traced.get((m, m), (m, m)).re.into(),
            ln_reduced.into(),
            ln_traced.into(),
            ln_tmsv.into(),
        ]);
    }
    Ok(t)
}

fn run_mixture(cfg: &RunConfig) -> Result<ResultTable> {
    let params = cfg.params()?;
    let setup = cfg.setup(Budget::Photons(0.0))?;
    let laser = LaserModel::poisson(cfg.alpha)?;
    let mean = laser.mean_photons();
    let mixed = mixture_average_variance(&laser, params, &setup);
    let at_mean = variance_fock_description(params, &setup.with_budget(Budget::Photons(mean)));
    let mut t = ResultTable::new(&[
        "alpha",
        "mean_n",
        "cutoff",
        "total_weight",
        "mixture_variance",
        "fock_variance_at_mean",
        "relative_difference",
    ]);
    let rel = if at_mean == 0.0 { (mixed - at_mean).abs() } else { (mixed / at_mean - 1.0).abs() };
    t.push(vec![
        cfg.alpha.into(),
        mean.into(),
        laser.cutoff().into(),
        laser.total_weight().into(),
        mixed.into(),
        at_mean.into(),
        rel.into(),
    ]);
    Ok(t)
}

/// Writes to `path`, or stdout when `None`.
pub fn write_table(table: &ResultTable, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let text = table.render(format);
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Flags over config file; the environment only supplies workers.
pub fn resolve(args: &Args) -> Result<RunConfig> {
    let mut values = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in args.flag_pairs() {
        if let Some(v) = v {
            values.insert(k.to_string(), v.clone());
        }
    }
    let env_workers = std::env::var(WORKERS_ENV).ok();
    RunConfig::from_values(&args.command, &values, env_workers.as_deref())
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = resolve(&args).and_then(|cfg| {
        let table = run(&cfg)?;
        write_table(&table, cfg.format, cfg.output.as_deref())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("twinbeam: {e}");
            1
        }
    }
}
