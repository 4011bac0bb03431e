//! Parameter sweeps producing CSV results plus a metadata sidecar.
//!
//! A configuration is a flat `key = value` text (`#` starts a comment). The
//! sidecar written next to every result is itself such a text holding every
//! resolved key, so feeding it back reproduces the run.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytical::{self, AnalyticalError, ModelParams};
use crate::hnbp::HnbpMode;
use crate::message::{message_size, MessageType};
use crate::scenario::{run_scenario, FormulaMode, ScenarioCase, ScenarioError, ScenarioSpec};
use crate::sim::{self, SimConfig, SimError, SimResult};
use crate::technique::{Environment, Technique};
use crate::topology::Topology;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config `{field}`: {message}")]
    InvalidConfig { field: String, message: String },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ExperimentError {
    fn invalid(field: impl Into<String>, message: impl fmt::Display) -> Self {
        ExperimentError::InvalidConfig {
            field: field.into(),
            message: message.to_string(),
        }
    }

    /// Process exit status: 1 for configuration errors, 2 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::InvalidConfig { .. } => 1,
            ExperimentError::Io { .. } => 2,
        }
    }
}

impl From<AnalyticalError> for ExperimentError {
    fn from(e: AnalyticalError) -> Self {
        let field = match &e {
            AnalyticalError::UnstableQueue { .. } => "lambda",
            AnalyticalError::DegenerateDensity(_) => "k_ratio",
            AnalyticalError::Divergent(_) => "smr",
            AnalyticalError::InvalidParameter { name, .. } => name,
        };
        ExperimentError::invalid(field, e)
    }
}

impl From<SimError> for ExperimentError {
    fn from(e: SimError) -> Self {
        let field = match &e {
            SimError::InvalidConfig { field, .. } => field,
            SimError::Topology(_) => "topology",
            SimError::Pool(_) => "workers",
        };
        ExperimentError::invalid(field, e)
    }
}

impl From<ScenarioError> for ExperimentError {
    fn from(e: ScenarioError) -> Self {
        ExperimentError::invalid("case", e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    AvgHopDelayVsWirelessDelay,
    LatencyVsDensity,
    LatencyVsArrival,
    CostVsLinkChanges,
    CostVsSmr,
    CostVsLinkFailure,
    LossVsArrival,
    LossVsDensity,
    SimLatencyVsDensity,
    SimLatencyVsArrival,
    ScenarioTrace,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 11] = [
        ExperimentKind::AvgHopDelayVsWirelessDelay,
        ExperimentKind::LatencyVsDensity,
        ExperimentKind::LatencyVsArrival,
        ExperimentKind::CostVsLinkChanges,
        ExperimentKind::CostVsSmr,
        ExperimentKind::CostVsLinkFailure,
        ExperimentKind::LossVsArrival,
        ExperimentKind::LossVsDensity,
        ExperimentKind::SimLatencyVsDensity,
        ExperimentKind::SimLatencyVsArrival,
        ExperimentKind::ScenarioTrace,
    ];

    pub fn name(self) -> &'static str {
        use ExperimentKind::*;
        match self {
            AvgHopDelayVsWirelessDelay => "avg-hop-delay-vs-wireless-delay",
            LatencyVsDensity => "latency-vs-density",
            LatencyVsArrival => "latency-vs-arrival",
            CostVsLinkChanges => "cost-vs-link-changes",
            CostVsSmr => "cost-vs-smr",
            CostVsLinkFailure => "cost-vs-link-failure",
            LossVsArrival => "loss-vs-arrival",
            LossVsDensity => "loss-vs-density",
            SimLatencyVsDensity => "sim-latency-vs-density",
            SimLatencyVsArrival => "sim-latency-vs-arrival",
            ScenarioTrace => "scenario-trace",
        }
    }

    pub fn description(self) -> &'static str {
        use ExperimentKind::*;
        match self {
            AvgHopDelayVsWirelessDelay => "average hop delay (ms/hop) against t_mr",
            LatencyVsDensity => "analytical handover latency against packet density ratio",
            LatencyVsArrival => "analytical handover latency against lambda / v_f",
            CostVsLinkChanges => "signaling cost against number of link changes",
            CostVsSmr => "signaling cost against session-to-mobility ratio",
            CostVsLinkFailure => "signaling cost against wireless link failure probability",
            LossVsArrival => "packet loss against lambda / v_f",
            LossVsDensity => "packet loss against packet density ratio",
            SimLatencyVsDensity => "simulated handover latency against packet density ratio",
            SimLatencyVsArrival => "simulated handover latency against arrival rate",
            ScenarioTrace => "signaling trace of one flow-move scenario (needs `case`)",
        }
    }

    pub fn is_simulation(self) -> bool {
        matches!(
            self,
            ExperimentKind::SimLatencyVsDensity | ExperimentKind::SimLatencyVsArrival
        )
    }

    /// Column name of the analytical metric.
    fn metric(self) -> &'static str {
        use ExperimentKind::*;
        match self {
            AvgHopDelayVsWirelessDelay => "avg_hop_delay_ms",
            LatencyVsDensity | LatencyVsArrival => "latency_ms",
            CostVsLinkChanges | CostVsSmr | CostVsLinkFailure => "signaling_cost",
            LossVsArrival | LossVsDensity => "packets_lost",
            SimLatencyVsDensity | SimLatencyVsArrival | ScenarioTrace => "",
        }
    }

    pub fn default_sweep(self) -> Option<Sweep> {
        use ExperimentKind::*;
        let s = |param: &str, start, stop, steps| {
            Some(Sweep {
                param: param.to_string(),
                start,
                stop,
                steps,
            })
        };
        match self {
            AvgHopDelayVsWirelessDelay => s("t_mr", 1.0, 30.0, 30),
            LatencyVsDensity | LossVsDensity => s("k_ratio", 0.0, 0.9, 10),
            LatencyVsArrival | LossVsArrival => s("lambda_over_vf", 0.5, 5.0, 10),
            CostVsLinkChanges => s("n_l", 1.0, 10.0, 10),
            CostVsSmr => s("smr", 0.1, 2.0, 20),
            CostVsLinkFailure => s("p_f", 0.0, 0.9, 10),
            SimLatencyVsDensity => s("k_ratio", 0.1, 0.9, 9),
            SimLatencyVsArrival => s("lambda", 20.0, 140.0, 7),
            ScenarioTrace => None,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase().replace('_', "-");
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == wanted)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

/// Inclusive linear sweep `param:start:stop:steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let width = self.stop - self.start;
        (0..self.steps)
            .map(|i| {
                let v = self.start + width * i as f64 / (self.steps - 1) as f64;
                // Drop binary noise such as 0.30000000000000004.
                format!("{v:.12}").parse().unwrap_or(v)
            })
            .collect()
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if !SWEEPABLE.contains(&self.param.as_str()) {
            return Err(ExperimentError::invalid(
                "sweep",
                format!(
                    "`{}` cannot be swept (one of {})",
                    self.param,
                    SWEEPABLE.join(", ")
                ),
            ));
        }
        if self.steps < 2 {
            return Err(ExperimentError::invalid(
                "sweep",
                "steps must be at least 2",
            ));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(ExperimentError::invalid(
                "sweep",
                "range must satisfy start < stop",
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}",
            self.param, self.start, self.stop, self.steps
        )
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [param, start, stop, steps] = parts[..] else {
            return Err(format!("expected param:start:stop:steps, got `{s}`"));
        };
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| format!("`{v}` is not a number"))
        };
        Ok(Sweep {
            param: param.to_string(),
            start: num(start)?,
            stop: num(stop)?,
            steps: steps
                .parse()
                .map_err(|_| format!("`{steps}` is not a step count"))?,
        })
    }
}

/// Numeric keys a sweep may vary. `smr` sets `lambda_s = smr * mu_l`;
/// `lambda_over_vf` sets `v_f = lambda / x`.
pub const SWEEPABLE: [&str; 20] = [
    "n_mn_mag",
    "n_mag_lma",
    "n_mag_mag",
    "n_lma_lma",
    "t_mr",
    "t_ra",
    "t_am",
    "t_pn",
    "lambda",
    "mu",
    "v_f",
    "k_ratio",
    "lambda_s",
    "mu_l",
    "p_f",
    "n_l",
    "smr",
    "lambda_over_vf",
    "jitter",
    "arrivals_per_run",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// `None` runs both environments' technique sets.
    pub environment: Option<Environment>,
    /// `None` uses the experiment's default sweep.
    pub sweep: Option<Sweep>,
    pub topology: Topology,
    pub params: ModelParams,
    pub seed: u64,
    pub jitter: f64,
    pub arrivals_per_run: usize,
    pub replications: usize,
    pub workers: Option<usize>,
    pub formula_mode: FormulaMode,
    pub hnbp_mode: HnbpMode,
    pub include_cleanup: bool,
    pub case: Option<ScenarioCase>,
    pub output_path: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        let sim = SimConfig::new(Technique::ActiveDiff);
        ExperimentConfig {
            experiment,
            environment: None,
            sweep: None,
            topology: Topology::default(),
            params: ModelParams::default(),
            seed: sim.seed,
            jitter: sim.jitter,
            arrivals_per_run: sim.arrivals_per_run,
            replications: sim.replications,
            workers: None,
            formula_mode: FormulaMode::Verbatim,
            hnbp_mode: HnbpMode::ExactSet,
            include_cleanup: true,
            case: None,
            output_path: PathBuf::from(format!("{experiment}.csv")),
        }
    }

    /// Builds a config from ordered `key = value` pairs; later pairs win.
    /// The `experiment` key is required.
    pub fn from_pairs<K, V>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Self, ExperimentError>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let pairs: Vec<(K, V)> = pairs.into_iter().collect();
        let kind = pairs
            .iter()
            .rev()
            .find(|(k, _)| k.as_ref().trim() == "experiment")
            .ok_or_else(|| ExperimentError::invalid("experiment", "missing"))?
            .1
            .as_ref()
            .parse::<ExperimentKind>()
            .map_err(|e| ExperimentError::invalid("experiment", e))?;
        let mut cfg = ExperimentConfig::new(kind);
        for (k, v) in &pairs {
            cfg.set(k.as_ref(), v.as_ref())?;
        }
        Ok(cfg)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        let key = key.trim();
        let value = value.trim();
        let bad = |e: String| ExperimentError::invalid(key, e);
        match key {
            "experiment" => self.experiment = value.parse().map_err(bad)?,
            "env" | "environment" => {
                self.environment = match value {
                    "all" | "both" | "" => None,
                    v => Some(v.parse().map_err(bad)?),
                }
            }
            "sweep" => {
                self.sweep = match value {
                    "default" | "" => None,
                    v => Some(v.parse().map_err(bad)?),
                }
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| bad(format!("`{value}` is not a seed")))?
            }
            "replications" => {
                self.replications = value
                    .parse()
                    .map_err(|_| bad(format!("`{value}` is not a count")))?
            }
            "workers" => {
                self.workers = match value {
                    "auto" | "" => None,
                    v => Some(
                        v.parse()
                            .map_err(|_| bad(format!("`{v}` is not a count")))?,
                    ),
                }
            }
            "formula_mode" => self.formula_mode = value.parse().map_err(bad)?,
            "hnbp_mode" => self.hnbp_mode = value.parse().map_err(bad)?,
            "include_cleanup" => {
                self.include_cleanup = value
                    .parse()
                    .map_err(|_| bad(format!("`{value}` is not true/false")))?
            }
            "case" => self.case = Some(value.parse().map_err(bad)?),
            "out" | "output_path" => self.output_path = PathBuf::from(value),
            _ => {
                let x: f64 = value
                    .parse()
                    .map_err(|_| bad(format!("`{value}` is not a number")))?;
                self.set_numeric(key, x)?;
            }
        }
        Ok(())
    }

    /// Sets a numeric key, including the derived sweep keys.
    pub fn set_numeric(&mut self, key: &str, x: f64) -> Result<(), ExperimentError> {
        let count = |x: f64| -> Result<u32, ExperimentError> {
            if x >= 0.0 && x.fract() == 0.0 && x <= f64::from(u32::MAX) {
                Ok(x as u32)
            } else {
                Err(ExperimentError::invalid(
                    key,
                    format!("{x} is not a whole number"),
                ))
            }
        };
        let (tp, p) = (&mut self.topology, &mut self.params);
        match key {
            "n_mn_mag" => tp.n_mn_mag = count(x)?,
            "n_mag_lma" => tp.n_mag_lma = count(x)?,
            "n_mag_mag" => tp.n_mag_mag = count(x)?,
            "n_lma_lma" => tp.n_lma_lma = count(x)?,
            "t_mr" => tp.t_mr = x,
            "t_ra" => tp.t_ra = x,
            "t_am" => tp.t_am = x,
            "t_pn" => tp.t_pn = x,
            "lambda" => p.lambda = x,
            "mu" => p.mu = x,
            "v_f" => p.v_f = x,
            "k_ratio" => p.k_ratio = x,
            "lambda_s" => p.lambda_s = x,
            "mu_l" => p.mu_l = x,
            "p_f" => p.p_f = x,
            "n_l" => p.n_l = count(x)?,
            "smr" => p.lambda_s = x * p.mu_l,
            "lambda_over_vf" => {
                if !(x > 0.0) {
                    return Err(ExperimentError::invalid(key, "must be positive"));
                }
                p.v_f = p.lambda / x;
            }
            "jitter" => self.jitter = x,
            "arrivals_per_run" => self.arrivals_per_run = count(x)? as usize,
            _ => return Err(ExperimentError::invalid(key, "unknown key")),
        }
        Ok(())
    }

    pub fn resolved_sweep(&self) -> Option<Sweep> {
        self.sweep
            .clone()
            .or_else(|| self.experiment.default_sweep())
    }

    pub fn techniques(&self) -> Vec<Technique> {
        Technique::ALL
            .into_iter()
            .filter(|t| self.environment.is_none_or(|e| t.environment() == e))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.experiment == ExperimentKind::ScenarioTrace {
            let case = self
                .case
                .ok_or_else(|| ExperimentError::invalid("case", "scenario-trace needs a case"))?;
            if self.environment.is_some_and(|e| e != case.environment()) {
                return Err(ExperimentError::invalid(
                    "env",
                    format!(
                        "case `{case}` belongs to the {} environment",
                        case.environment()
                    ),
                ));
            }
            if self.sweep.is_some() {
                return Err(ExperimentError::invalid(
                    "sweep",
                    "scenario-trace takes no sweep",
                ));
            }
        } else if let Some(sweep) = self.resolved_sweep() {
            sweep.validate()?;
        }
        self.topology
            .validate()
            .map_err(|e| ExperimentError::invalid("topology", e))?;
        if self.workers == Some(0) {
            return Err(ExperimentError::invalid("workers", "must be at least 1"));
        }
        Ok(())
    }

    fn sim_config(&self, technique: Technique) -> SimConfig {
        SimConfig {
            arrival_rate: self.params.lambda,
            service_rate: self.params.mu,
            delay_means: self.topology,
            jitter: self.jitter,
            arrivals_per_run: self.arrivals_per_run,
            replications: self.replications,
            seed: self.seed,
            technique,
            density_ratio: self.params.k_ratio,
            formula_mode: self.formula_mode,
            workers: self.workers,
        }
    }

    /// Text accepted by [`ExperimentConfig::from_pairs`] via
    /// [`parse_config`], holding every resolved key.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let tp = &self.topology;
        let p = &self.params;
        let _ = writeln!(s, "# flowmob run metadata");
        let _ = writeln!(s, "# rng = {}", sim::RNG_ALGORITHM);
        let sizes: Vec<String> = MessageType::ALL
            .iter()
            .map(|m| format!("{}={}", m.name(), message_size(*m)))
            .collect();
        let _ = writeln!(s, "# message sizes (bytes): {}", sizes.join(" "));
        let mut kv = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("experiment", &self.experiment);
        kv("env", &self.environment.map_or("all", |e| e.name()));
        match (&self.sweep, self.experiment) {
            (_, ExperimentKind::ScenarioTrace) => {}
            (Some(sw), _) => kv("sweep", sw),
            (None, _) => kv("sweep", &"default"),
        }
        if let Some(case) = self.case {
            kv("case", &case);
        }
        kv("formula_mode", &self.formula_mode);
        kv("hnbp_mode", &self.hnbp_mode);
        kv("include_cleanup", &self.include_cleanup);
        kv("n_mn_mag", &tp.n_mn_mag);
        kv("n_mag_lma", &tp.n_mag_lma);
        kv("n_mag_mag", &tp.n_mag_mag);
        kv("n_lma_lma", &tp.n_lma_lma);
        kv("t_mr", &tp.t_mr);
        kv("t_ra", &tp.t_ra);
        kv("t_am", &tp.t_am);
        kv("t_pn", &tp.t_pn);
        kv("lambda", &p.lambda);
        kv("mu", &p.mu);
        kv("v_f", &p.v_f);
        kv("k_ratio", &p.k_ratio);
        kv("lambda_s", &p.lambda_s);
        kv("mu_l", &p.mu_l);
        kv("p_f", &p.p_f);
        kv("n_l", &p.n_l);
        kv("seed", &self.seed);
        kv("jitter", &self.jitter);
        kv("arrivals_per_run", &self.arrivals_per_run);
        kv("replications", &self.replications);
        kv("out", &self.output_path.display());
        s
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ExperimentError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ExperimentError::invalid(
                format!("line {}", i + 1),
                format!("expected key = value, got `{line}`"),
            )
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Path of the metadata sidecar for a result file.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Produces the experiment's CSV text and its row count without touching
/// the filesystem.
pub fn render_experiment(cfg: &ExperimentConfig) -> Result<(String, usize), ExperimentError> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::ScenarioTrace => render_trace(cfg),
        k if k.is_simulation() => render_simulation(cfg),
        _ => render_analytical(cfg),
    }
}

fn sweep_points(cfg: &ExperimentConfig) -> (Sweep, Vec<(Technique, f64)>) {
    let sweep = cfg
        .resolved_sweep()
        .expect("sweep experiments always have a sweep");
    let values = sweep.values();
    let points = cfg
        .techniques()
        .into_iter()
        .flat_map(|t| values.iter().map(move |v| (t, *v)))
        .collect();
    (sweep, points)
}

fn at_point(
    cfg: &ExperimentConfig,
    sweep: &Sweep,
    value: f64,
) -> Result<ExperimentConfig, ExperimentError> {
    let mut c = cfg.clone();
    c.set_numeric(&sweep.param, value)?;
    c.topology
        .validate()
        .map_err(|e| ExperimentError::invalid(sweep.param.clone(), e))?;
    Ok(c)
}

fn analytical_metric(
    kind: ExperimentKind,
    t: Technique,
    c: &ExperimentConfig,
) -> Result<f64, ExperimentError> {
    use ExperimentKind::*;
    let (tp, p, mode) = (&c.topology, &c.params, c.formula_mode);
    Ok(match kind {
        AvgHopDelayVsWirelessDelay => analytical::avg_hop_delay_with(t, tp, mode),
        LatencyVsDensity | LatencyVsArrival => {
            p.validate()?;
            analytical::technique_latency(t, tp, p, mode)?
        }
        CostVsLinkChanges => {
            p.validate()?;
            analytical::cost_for_link_changes(t, tp, p)
        }
        CostVsSmr | CostVsLinkFailure => {
            p.validate()?;
            analytical::signaling_cost(t, tp, p)?
        }
        LossVsArrival | LossVsDensity => {
            p.validate()?;
            let t_d = analytical::technique_latency(t, tp, p, mode)?;
            analytical::packet_loss(p.lambda, t_d / 1e3)
        }
        SimLatencyVsDensity | SimLatencyVsArrival | ScenarioTrace => unreachable!(),
    })
}

fn render_analytical(cfg: &ExperimentConfig) -> Result<(String, usize), ExperimentError> {
    let (sweep, points) = sweep_points(cfg);
    let mut out = format!(
        "technique,param_name,param_value,{}\n",
        cfg.experiment.metric()
    );
    for (t, v) in &points {
        let c = at_point(cfg, &sweep, *v)?;
        let m = analytical_metric(cfg.experiment, *t, &c)?;
        let _ = writeln!(out, "{},{},{},{}", t, sweep.param, v, m);
    }
    Ok((out, points.len()))
}

/// CSV header of simulation experiments.
pub const SIM_CSV_HEADER: &str =
    "technique,param_name,param_value,latency_ms,hop_delay_ms,density,loss,ci95";

fn render_simulation(cfg: &ExperimentConfig) -> Result<(String, usize), ExperimentError> {
    let (sweep, points) = sweep_points(cfg);
    let configs = points
        .iter()
        .map(|(t, v)| {
            let sc = at_point(cfg, &sweep, *v)?.sim_config(*t);
            sc.validate()?;
            Ok(sc)
        })
        .collect::<Result<Vec<SimConfig>, ExperimentError>>()?;
    let results: Vec<SimResult> = sim::with_workers(sim::resolve_workers(cfg.workers), || {
        configs.par_iter().map(sim::campaign).collect()
    })?;
    let mut out = format!("{SIM_CSV_HEADER}\n");
    for ((t, v), r) in points.iter().zip(&results) {
        let ci = r.ci95.map(|c| c.latency_ms.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            t,
            sweep.param,
            v,
            r.mean_handover_latency,
            r.mean_hop_delay,
            r.packet_density,
            r.packets_lost,
            ci
        );
    }
    Ok((out, points.len()))
}

fn render_trace(cfg: &ExperimentConfig) -> Result<(String, usize), ExperimentError> {
    let case = cfg.case.expect("validated");
    let mut spec = ScenarioSpec::canonical(case).with_hnbp_mode(cfg.hnbp_mode);
    spec.include_cleanup = cfg.include_cleanup;
    let run = run_scenario(&spec, &cfg.topology)?;
    Ok((run.trace.to_csv(), run.trace.len()))
}

/// Where a finished run wrote its files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentOutput {
    pub csv_path: PathBuf,
    pub meta_path: PathBuf,
    pub rows: usize,
}

/// Runs the experiment and writes the CSV plus its `.meta` sidecar.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let (csv, rows) = render_experiment(cfg)?;
    let csv_path = cfg.output_path.clone();
    let meta_path = sidecar_path(&csv_path);
    let write = |path: &Path, text: &str| {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(path, text).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })
    };
    write(&csv_path, &csv)?;
    write(&meta_path, &cfg.to_config_text())?;
    Ok(ExperimentOutput {
        csv_path,
        meta_path,
        rows,
    })
}
