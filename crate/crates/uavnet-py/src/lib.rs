//! Python bindings for the `uavnet` simulator.
//!
//! Compiles to a CPython extension module named `uavnet_py`. The module
//! mirrors the CLI surface: build or load a [`Config`], hand it to
//! [`run`] for a single simulation, or to [`sweep_csv`] for a scheme x
//! density grid, and check exported chains with [`verify_chain`].
//!
//! Build with `cargo build -p uavnet-py`, then copy
//! `target/debug/libuavnet_py.so` next to your script as `uavnet_py.so`
//! (`python/smoke_test.py` does exactly that).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use uavnet::config::DEFAULT_CONFIG_TOML;
use uavnet::ledger::{parse_chain_export, verify_blocks};
use uavnet::sweep::SweepSpec;
use uavnet::{load_config, MetricsReport, Scheme, SimConfig, SimError};

fn invalid(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn sim_failed(err: SimError) -> PyErr {
    match err {
        SimError::Config(e) => invalid(e),
        SimError::Ledger(e) => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Simulation configuration with the same schema as the TOML files the
/// CLI consumes. Constructing one yields the embedded defaults; the
/// setters cover the knobs a study normally varies. `run` re-validates,
/// so an inconsistent combination fails there, not here.
#[pyclass(module = "uavnet_py", skip_from_py_object)]
#[derive(Clone)]
struct Config {
    inner: SimConfig,
}

#[pymethods]
impl Config {
    #[new]
    fn new() -> Config {
        Config { inner: SimConfig::default_config() }
    }

    /// Parse and validate a full TOML config document.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Config> {
        load_config(text).map(|inner| Config { inner }).map_err(invalid)
    }

    /// Serialize back to TOML, e.g. to feed the same run to the CLI.
    fn to_toml(&self) -> PyResult<String> {
        toml::to_string_pretty(&self.inner).map_err(invalid)
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scenario.scheme.name()
    }

    #[setter]
    fn set_scheme(&mut self, name: &str) -> PyResult<()> {
        self.inner.scenario.scheme = name.parse().map_err(PyValueError::new_err)?;
        Ok(())
    }

    #[getter]
    fn n_nodes(&self) -> u32 {
        self.inner.scenario.n_nodes
    }

    #[setter]
    fn set_n_nodes(&mut self, n: u32) {
        self.inner.scenario.n_nodes = n;
    }

    #[getter]
    fn n_uavs(&self) -> u32 {
        self.inner.scenario.n_uavs
    }

    #[setter]
    fn set_n_uavs(&mut self, n: u32) {
        self.inner.scenario.n_uavs = n;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.scenario.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.scenario.seed = seed;
    }

    #[getter]
    fn duration_s(&self) -> f64 {
        self.inner.scenario.duration_s
    }

    #[setter]
    fn set_duration_s(&mut self, s: f64) {
        self.inner.scenario.duration_s = s;
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(scheme={:?}, n_nodes={}, n_uavs={}, seed={}, duration_s={})",
            self.inner.scenario.scheme.name(),
            self.inner.scenario.n_nodes,
            self.inner.scenario.n_uavs,
            self.inner.scenario.seed,
            self.inner.scenario.duration_s,
        )
    }
}

/// Outcome counters of one run. Plain data: every attribute is a
/// snapshot, safe to compare across runs for reproducibility checks.
#[pyclass(module = "uavnet_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Report {
    inner: MetricsReport,
}

#[pymethods]
impl Report {
    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.name()
    }

    #[getter]
    fn n_nodes(&self) -> u32 {
        self.inner.n_nodes
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn flows_total(&self) -> u64 {
        self.inner.flows_total
    }

    #[getter]
    fn delivered_authentic(&self) -> u64 {
        self.inner.delivered_authentic
    }

    #[getter]
    fn delivered_compromised(&self) -> u64 {
        self.inner.delivered_compromised
    }

    #[getter]
    fn dropped(&self) -> u64 {
        self.inner.dropped
    }

    #[getter]
    fn data_transmissions(&self) -> u64 {
        self.inner.data_transmissions
    }

    #[getter]
    fn control_messages(&self) -> u64 {
        self.inner.control_messages
    }

    #[getter]
    fn consensus_messages(&self) -> u64 {
        self.inner.consensus_messages
    }

    /// Authentic deliveries as a percentage of observed flows.
    /// Raises `ValueError` for a run that generated no flows.
    fn success_rate(&self) -> PyResult<f64> {
        self.inner.success_rate().map_err(invalid)
    }

    /// Data transmissions plus control and consensus messages.
    fn total_messages(&self) -> u64 {
        self.inner.total_messages()
    }

    #[staticmethod]
    fn csv_header() -> &'static str {
        MetricsReport::csv_header()
    }

    fn csv_row(&self) -> String {
        self.inner.csv_row()
    }

    /// All counters as a dict (plus `success_rate`, `None` if undefined).
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("scheme", self.inner.scheme.name())?;
        d.set_item("n_nodes", self.inner.n_nodes)?;
        d.set_item("seed", self.inner.seed)?;
        d.set_item("flows_total", self.inner.flows_total)?;
        d.set_item("delivered_authentic", self.inner.delivered_authentic)?;
        d.set_item("delivered_compromised", self.inner.delivered_compromised)?;
        d.set_item("dropped", self.inner.dropped)?;
        d.set_item("data_transmissions", self.inner.data_transmissions)?;
        d.set_item("control_messages", self.inner.control_messages)?;
        d.set_item("consensus_messages", self.inner.consensus_messages)?;
        d.set_item("success_rate", self.inner.success_rate().ok())?;
        d.set_item("total_messages", self.inner.total_messages())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Report({})", self.inner.csv_row())
    }
}

/// What `run` hands back: the report, the exported chains of a ledger
/// run (`None` otherwise), and the raw transmission tally kept outside
/// the metrics for cross-checking.
#[pyclass(module = "uavnet_py", frozen)]
struct RunOutput {
    report: Report,
    public_chain_jsonl: Option<String>,
    private_chain_jsonl: Option<String>,
    transmit_invocations: u64,
}

#[pymethods]
impl RunOutput {
    #[getter]
    fn report(&self) -> Report {
        self.report.clone()
    }

    #[getter]
    fn public_chain_jsonl(&self) -> Option<&str> {
        self.public_chain_jsonl.as_deref()
    }

    #[getter]
    fn private_chain_jsonl(&self) -> Option<&str> {
        self.private_chain_jsonl.as_deref()
    }

    #[getter]
    fn transmit_invocations(&self) -> u64 {
        self.transmit_invocations
    }

    fn __repr__(&self) -> String {
        format!(
            "RunOutput(report={}, chains={})",
            self.report.__repr__(),
            if self.public_chain_jsonl.is_some() { "yes" } else { "no" },
        )
    }
}

/// The embedded default configuration as TOML text.
#[pyfunction]
fn default_config_toml() -> &'static str {
    DEFAULT_CONFIG_TOML
}

/// Names of the delivery schemes, in comparison order.
#[pyfunction]
fn schemes() -> Vec<&'static str> {
    Scheme::ALL.iter().map(|s| s.name()).collect()
}

/// Run one simulation. Deterministic: the same config (seed included)
/// produces an identical `RunOutput`.
#[pyfunction]
fn run(config: &Config) -> PyResult<RunOutput> {
    config.inner.validate().map_err(invalid)?;
    let out = uavnet::run(&config.inner).map_err(sim_failed)?;
    Ok(RunOutput {
        report: Report { inner: out.report },
        public_chain_jsonl: out.public_chain.map(|c| c.export_jsonl()),
        private_chain_jsonl: out.private_chain.map(|c| c.export_jsonl()),
        transmit_invocations: out.transmit_invocations,
    })
}

/// Run a scheme x node-count grid, `replicate` consecutive seeds per
/// cell, and return `(runs_csv, success_rate_series_csv,
/// total_messages_series_csv)` in the CLI's file formats. `schemes`
/// defaults to all three, `workers` to the machine's parallelism.
#[pyfunction]
#[pyo3(signature = (config, node_counts, schemes=None, replicate=5, workers=None))]
fn sweep_csv(
    config: &Config,
    node_counts: Vec<u32>,
    schemes: Option<Vec<String>>,
    replicate: u64,
    workers: Option<usize>,
) -> PyResult<(String, String, String)> {
    let schemes = match schemes {
        Some(names) => names
            .iter()
            .map(|n| n.parse())
            .collect::<Result<Vec<Scheme>, _>>()
            .map_err(PyValueError::new_err)?,
        None => Scheme::ALL.to_vec(),
    };
    if replicate == 0 {
        return Err(invalid("replicate must be at least 1"));
    }
    let base = config.inner.scenario.seed;
    let spec = SweepSpec {
        node_counts,
        schemes,
        seeds: (base..base + replicate).collect(),
        base_config: config.inner.clone(),
    };
    spec.validate().map_err(invalid)?;
    let workers = workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let result = uavnet::run_sweep(&spec, workers.max(1)).map_err(sim_failed)?;
    Ok((
        result.runs_csv(),
        result.success_rate_series_csv(),
        result.total_messages_series_csv(),
    ))
}

/// Check an exported chain (JSONL, one block per line). Returns
/// `(ok, detail)`; a parse failure raises `ValueError` instead, since
/// the text is then not a chain at all.
#[pyfunction]
fn verify_chain(jsonl: &str) -> PyResult<(bool, String)> {
    let blocks = parse_chain_export(jsonl).map_err(invalid)?;
    Ok(match verify_blocks(&blocks) {
        Ok(()) => (true, format!("ok ({} blocks)", blocks.len())),
        Err(f) => (false, format!("block {}: {}", f.index, f.reason)),
    })
}

#[pymodule]
fn uavnet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<Report>()?;
    m.add_class::<RunOutput>()?;
    m.add_function(wrap_pyfunction!(default_config_toml, m)?)?;
    m.add_function(wrap_pyfunction!(schemes, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(verify_chain, m)?)?;
    Ok(())
}
