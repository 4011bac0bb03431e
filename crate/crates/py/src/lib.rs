//! Python bindings: prefixes and block prefixes, the analytical model,
//! scenario traces, simulation campaigns and experiment sweeps.

use std::collections::BTreeMap;

use flowmob::analytical::{self, ModelParams};
use flowmob::experiment::{render_experiment, ExperimentConfig};
use flowmob::hnbp::{self, HnbpMode, HomeNetworkBlockPrefix};
use flowmob::message::MessageType;
use flowmob::prefix::Prefix;
use flowmob::scenario::{self, FormulaMode, ScenarioCase, ScenarioSpec};
use flowmob::sim::{self, SimConfig};
use flowmob::technique::Technique;
use flowmob::topology;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(value_err)
}

#[pyclass(
    name = "Prefix",
    frozen,
    eq,
    hash,
    skip_from_py_object,
    module = "flowmob_py"
)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyPrefix(Prefix);

#[pymethods]
impl PyPrefix {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse(text).map(PyPrefix)
    }

    #[getter]
    fn length(&self) -> u8 {
        self.0.len()
    }

    fn covers(&self, other: &PyPrefix) -> bool {
        self.0.covers(&other.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Prefix('{}')", self.0)
    }
}

#[pyclass(name = "BlockPrefix", frozen, module = "flowmob_py")]
struct PyBlockPrefix(HomeNetworkBlockPrefix);

#[pymethods]
impl PyBlockPrefix {
    #[getter]
    fn mode(&self) -> &'static str {
        self.0.mode().name()
    }

    fn verify(&self, candidate: &str) -> PyResult<bool> {
        hnbp::verify_prefix(&self.0, &parse(candidate)?).map_err(value_err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// Aggregates prefixes (strings) into a block prefix.
#[pyfunction]
#[pyo3(signature = (prefixes, mode = "exact-set"))]
fn generate_hnbp(prefixes: Vec<String>, mode: &str) -> PyResult<PyBlockPrefix> {
    let prefixes = prefixes
        .iter()
        .map(|p| parse::<Prefix>(p))
        .collect::<PyResult<Vec<_>>>()?;
    hnbp::generate_hnbp(&prefixes, parse::<HnbpMode>(mode)?)
        .map(PyBlockPrefix)
        .map_err(value_err)
}

#[pyfunction]
fn message_size(name: &str) -> PyResult<u32> {
    Ok(flowmob::message::message_size(parse::<MessageType>(name)?))
}

#[pyclass(name = "Topology", skip_from_py_object, module = "flowmob_py")]
#[derive(Clone)]
struct PyTopology {
    #[pyo3(get, set)]
    n_mn_mag: u32,
    #[pyo3(get, set)]
    n_mag_lma: u32,
    #[pyo3(get, set)]
    n_mag_mag: u32,
    #[pyo3(get, set)]
    n_lma_lma: u32,
    #[pyo3(get, set)]
    t_mr: f64,
    #[pyo3(get, set)]
    t_ra: f64,
    #[pyo3(get, set)]
    t_am: f64,
    #[pyo3(get, set)]
    t_pn: f64,
}

impl From<&PyTopology> for topology::Topology {
    fn from(t: &PyTopology) -> Self {
        topology::Topology {
            n_mn_mag: t.n_mn_mag,
            n_mag_lma: t.n_mag_lma,
            n_mag_mag: t.n_mag_mag,
            n_lma_lma: t.n_lma_lma,
            t_mr: t.t_mr,
            t_ra: t.t_ra,
            t_am: t.t_am,
            t_pn: t.t_pn,
        }
    }
}

#[pymethods]
impl PyTopology {
    #[new]
    #[pyo3(signature = (n_mn_mag=2, n_mag_lma=2, n_mag_mag=1, n_lma_lma=2, t_mr=10.0, t_ra=2.0, t_am=20.0, t_pn=20.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n_mn_mag: u32,
        n_mag_lma: u32,
        n_mag_mag: u32,
        n_lma_lma: u32,
        t_mr: f64,
        t_ra: f64,
        t_am: f64,
        t_pn: f64,
    ) -> PyResult<Self> {
        let t = PyTopology {
            n_mn_mag,
            n_mag_lma,
            n_mag_mag,
            n_lma_lma,
            t_mr,
            t_ra,
            t_am,
            t_pn,
        };
        topology::Topology::from(&t).validate().map_err(value_err)?;
        Ok(t)
    }
}

fn topo(t: Option<&PyTopology>) -> PyResult<topology::Topology> {
    let t = t.map(topology::Topology::from).unwrap_or_default();
    t.validate().map_err(value_err)?;
    Ok(t)
}

#[pyfunction]
#[pyo3(signature = (technique, topology=None, corrected=false))]
fn avg_hop_delay(technique: &str, topology: Option<&PyTopology>, corrected: bool) -> PyResult<f64> {
    Ok(analytical::avg_hop_delay_with(
        parse(technique)?,
        &topo(topology)?,
        FormulaMode::from_corrected(corrected),
    ))
}

#[pyfunction]
#[pyo3(signature = (technique, topology=None, p_f=0.0))]
fn overhead(technique: &str, topology: Option<&PyTopology>, p_f: f64) -> PyResult<f64> {
    if !(0.0..1.0).contains(&p_f) {
        return Err(PyValueError::new_err("p_f must lie in [0, 1)"));
    }
    Ok(analytical::overhead(
        parse(technique)?,
        &topo(topology)?,
        p_f,
    ))
}

#[pyfunction]
#[pyo3(signature = (technique, lambda_s=1.0, mu_l=1.0, p_f=0.0, topology=None))]
fn signaling_cost(
    technique: &str,
    lambda_s: f64,
    mu_l: f64,
    p_f: f64,
    topology: Option<&PyTopology>,
) -> PyResult<f64> {
    let params = ModelParams {
        lambda_s,
        mu_l,
        p_f,
        ..ModelParams::default()
    };
    params.validate().map_err(value_err)?;
    analytical::signaling_cost(parse(technique)?, &topo(topology)?, &params).map_err(value_err)
}

/// Analytical handover latency (ms).
#[pyfunction]
#[pyo3(signature = (technique, lambda_=100.0, mu=150.0, v_f=1.0, k_ratio=0.0, topology=None, corrected=false))]
fn technique_latency(
    technique: &str,
    lambda_: f64,
    mu: f64,
    v_f: f64,
    k_ratio: f64,
    topology: Option<&PyTopology>,
    corrected: bool,
) -> PyResult<f64> {
    let params = ModelParams {
        lambda: lambda_,
        mu,
        v_f,
        k_ratio,
        ..ModelParams::default()
    };
    params.validate().map_err(value_err)?;
    analytical::technique_latency(
        parse(technique)?,
        &topo(topology)?,
        &params,
        FormulaMode::from_corrected(corrected),
    )
    .map_err(value_err)
}

/// Runs a canonical scenario case and returns its trace as CSV.
#[pyfunction]
#[pyo3(signature = (case, topology=None, hnbp_mode="exact-set"))]
fn run_scenario(case: &str, topology: Option<&PyTopology>, hnbp_mode: &str) -> PyResult<String> {
    let spec =
        ScenarioSpec::canonical(parse::<ScenarioCase>(case)?).with_hnbp_mode(parse(hnbp_mode)?);
    scenario::run_scenario(&spec, &topo(topology)?)
        .map(|run| run.trace.to_csv())
        .map_err(value_err)
}

/// Monte-Carlo campaign; returns the aggregated means and CI half-widths.
#[pyfunction]
#[pyo3(signature = (technique, replications=1000, seed=0, lambda_=100.0, mu=150.0, k_ratio=0.0, jitter=0.5, arrivals_per_run=10000, workers=None))]
#[allow(clippy::too_many_arguments)]
fn run_campaign(
    py: Python<'_>,
    technique: &str,
    replications: usize,
    seed: u64,
    lambda_: f64,
    mu: f64,
    k_ratio: f64,
    jitter: f64,
    arrivals_per_run: usize,
    workers: Option<usize>,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let cfg = SimConfig {
        arrival_rate: lambda_,
        service_rate: mu,
        jitter,
        arrivals_per_run,
        replications,
        seed,
        density_ratio: k_ratio,
        workers,
        ..SimConfig::new(parse::<Technique>(technique)?)
    };
    let r = py.detach(|| sim::run_campaign(&cfg)).map_err(value_err)?;
    let mut out = BTreeMap::from([
        ("latency_ms", r.mean_handover_latency),
        ("hop_delay_ms", r.mean_hop_delay),
        ("packet_density", r.packet_density),
        ("packets_lost", r.packets_lost),
        ("mean_queue_occupancy", r.mean_queue_occupancy),
        ("replications", r.replications as f64),
    ]);
    if let Some(ci) = r.ci95 {
        out.insert("ci95_latency_ms", ci.latency_ms);
        out.insert("ci95_hop_delay_ms", ci.hop_delay_ms);
    }
    Ok(out)
}

/// Runs an experiment from `key -> value` settings and returns the CSV text.
#[pyfunction]
fn run_experiment(py: Python<'_>, settings: BTreeMap<String, String>) -> PyResult<String> {
    let cfg = ExperimentConfig::from_pairs(settings).map_err(value_err)?;
    py.detach(|| render_experiment(&cfg))
        .map(|(csv, _)| csv)
        .map_err(value_err)
}

#[pymodule]
fn flowmob_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPrefix>()?;
    m.add_class::<PyBlockPrefix>()?;
    m.add_class::<PyTopology>()?;
    m.add_function(wrap_pyfunction!(generate_hnbp, m)?)?;
    m.add_function(wrap_pyfunction!(message_size, m)?)?;
    m.add_function(wrap_pyfunction!(avg_hop_delay, m)?)?;
    m.add_function(wrap_pyfunction!(overhead, m)?)?;
    m.add_function(wrap_pyfunction!(signaling_cost, m)?)?;
    m.add_function(wrap_pyfunction!(technique_latency, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
