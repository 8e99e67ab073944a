//! Python bindings for the migopt decision engine.
//!
//! Exposes the pipeline pieces as plain Python classes: `Profile` (counter
//! vectors and features), `App`/`Oracle` (the synthetic ground truth),
//! `StateSpace`, `CoefficientTable`, and the `fit_table`/`solve_policy`
//! entry points. Reports come back as JSON strings so Python callers can
//! `json.loads` them.
//!
//! Build the importable module with
//! `cargo build -p migopt-py --release --features extension-module` and
//! rename `libmigopt_py.so` to `migopt_py.so` (or see python/smoke_test.py,
//! which does this automatically).

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use migopt_core::files;
use migopt_core::model;
use migopt_core::oracle;
use migopt_core::policy;
use migopt_core::profiles::CounterVector;
use migopt_core::statespace;

fn value_err(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn io_err(err: impl std::fmt::Display) -> PyErr {
    PyIOError::new_err(err.to_string())
}

fn parse_option(option: &str) -> PyResult<statespace::MemoryOption> {
    option.parse().map_err(value_err)
}

/// One application's counter profile (all values on the 0..=100 percent
/// scale).
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Profile {
    inner: migopt_core::ApplicationProfile,
}

#[pymethods]
impl Profile {
    #[new]
    #[pyo3(signature = (
        app_id,
        *,
        compute_throughput,
        memory_throughput,
        dram_throughput = 0.0,
        l2_hit_rate = 0.0,
        occupancy = 0.0,
        tensor_mixed = 0.0,
        tensor_double = 0.0,
        tensor_integer = 0.0,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        app_id: String,
        compute_throughput: f64,
        memory_throughput: f64,
        dram_throughput: f64,
        l2_hit_rate: f64,
        occupancy: f64,
        tensor_mixed: f64,
        tensor_double: f64,
        tensor_integer: f64,
    ) -> PyResult<Self> {
        let inner = migopt_core::ApplicationProfile::new(
            app_id,
            CounterVector {
                compute_throughput,
                memory_throughput,
                dram_throughput,
                l2_hit_rate,
                occupancy,
                tensor_mixed,
                tensor_double,
                tensor_integer,
            },
        )
        .map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn app_id(&self) -> &str {
        &self.inner.app_id
    }

    fn counters<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = &self.inner.counters;
        let dict = PyDict::new(py);
        dict.set_item("compute_throughput", c.compute_throughput)?;
        dict.set_item("memory_throughput", c.memory_throughput)?;
        dict.set_item("dram_throughput", c.dram_throughput)?;
        dict.set_item("l2_hit_rate", c.l2_hit_rate)?;
        dict.set_item("occupancy", c.occupancy)?;
        dict.set_item("tensor_mixed", c.tensor_mixed)?;
        dict.set_item("tensor_double", c.tensor_double)?;
        dict.set_item("tensor_integer", c.tensor_integer)?;
        Ok(dict)
    }

    /// Scalability feature vector [h1..h6].
    fn feature_h(&self) -> PyResult<Vec<f64>> {
        Ok(self.inner.feature_h().map_err(value_err)?.0.to_vec())
    }

    /// Interference feature vector [j1..j3].
    fn feature_j(&self) -> Vec<f64> {
        self.inner.feature_j().0.to_vec()
    }

    /// Behavior class ("TI", "CI", "MI" or "US") given the relative
    /// performance measured at the minimum allocation.
    fn classify(&self, rperf_at_min_alloc: f64) -> PyResult<String> {
        Ok(self
            .inner
            .classify(rperf_at_min_alloc)
            .map_err(value_err)?
            .to_string())
    }

    fn __repr__(&self) -> String {
        format!("Profile(app_id='{}')", self.inner.app_id)
    }
}

/// A parametric synthetic application understood by the oracle.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct App {
    inner: oracle::SyntheticApp,
}

#[pymethods]
impl App {
    #[new]
    fn new(
        app_id: String,
        compute: f64,
        bandwidth: f64,
        tensor: f64,
        l2_hit: f64,
    ) -> PyResult<Self> {
        let inner = oracle::SyntheticApp::new(app_id, compute, bandwidth, tensor, l2_hit)
            .map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn app_id(&self) -> &str {
        &self.inner.app_id
    }

    /// The counter profile the profiler would report for this application.
    fn synthesize_profile(&self) -> Profile {
        Profile {
            inner: oracle::synthesize_profile(&self.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "App(app_id='{}', compute={}, bandwidth={}, tensor={}, l2_hit={})",
            self.inner.app_id,
            self.inner.compute,
            self.inner.bandwidth,
            self.inner.tensor,
            self.inner.l2_hit
        )
    }
}

/// The searchable menu of partition states and power caps.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct StateSpace {
    inner: statespace::StateSpace,
}

#[pymethods]
impl StateSpace {
    /// The built-in four-state, six-cap menu.
    #[staticmethod]
    fn default() -> Self {
        Self {
            inner: statespace::StateSpace::default(),
        }
    }

    #[staticmethod]
    fn from_json(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: files::load_state_space(Some(&path)).map_err(io_err)?,
        })
    }

    fn state_ids(&self) -> Vec<String> {
        self.inner
            .states
            .iter()
            .map(|s| s.state_id.clone())
            .collect()
    }

    fn power_caps_w(&self) -> Vec<u32> {
        self.inner.power_caps_w.clone()
    }

    fn candidate_count(&self) -> usize {
        self.inner.candidate_count()
    }
}

/// The deterministic synthetic-GPU ground truth.
#[pyclass]
struct Oracle {
    config: oracle::OracleConfig,
}

#[pymethods]
impl Oracle {
    #[new]
    #[pyo3(signature = (seed = 0, noise_sigma = 0.0, config_path = None))]
    fn new(seed: u64, noise_sigma: f64, config_path: Option<PathBuf>) -> PyResult<Self> {
        let mut config = files::load_oracle_config(config_path.as_deref()).map_err(io_err)?;
        config.seed = seed;
        config.noise_sigma = noise_sigma;
        Ok(Self { config })
    }

    /// The built-in workload suite as (app, expected class) pairs.
    #[staticmethod]
    fn default_suite() -> Vec<(App, String)> {
        oracle::default_workload_suite()
            .into_iter()
            .map(|(app, class)| (App { inner: app }, class.to_string()))
            .collect()
    }

    /// True relative performance of `apps[slot]` on a partition whose
    /// per-slot GPC counts are `gpcs`, with the given memory option and cap.
    fn true_rperf(
        &self,
        apps: Vec<App>,
        gpcs: Vec<u32>,
        option: &str,
        power_w: u32,
        slot: usize,
    ) -> PyResult<f64> {
        let option = parse_option(option)?;
        let state = statespace::HardwareState::new(
            statespace::PartitionState::uniform("py", &gpcs, option),
            power_w,
        );
        let apps: Vec<oracle::SyntheticApp> = apps.into_iter().map(|a| a.inner).collect();
        oracle::true_rperf(&apps, &state, slot, &self.config).map_err(value_err)
    }

    /// Relative performance at the minimum allocation (1 GPC, private,
    /// `min_power_w`), the input to classification.
    fn min_allocation_rperf(&self, app: &App, min_power_w: u32) -> PyResult<f64> {
        oracle::min_allocation_rperf(&app.inner, min_power_w, &self.config).map_err(value_err)
    }

    /// Classify a synthetic application from its synthesized profile plus
    /// oracle-measured degradation.
    fn classify(&self, app: &App, min_power_w: u32) -> PyResult<String> {
        Ok(oracle::classify_app(&app.inner, min_power_w, &self.config)
            .map_err(value_err)?
            .to_string())
    }

    /// Write profiles.jsonl / training.jsonl for the default suite and
    /// pairings. Returns (n_profiles, n_solo, n_corun).
    #[pyo3(signature = (profiles_path, training_path, states = None))]
    fn generate_dataset(
        &self,
        profiles_path: PathBuf,
        training_path: PathBuf,
        states: Option<StateSpace>,
    ) -> PyResult<(usize, usize, usize)> {
        let space = states.map(|s| s.inner).unwrap_or_default();
        let suite = oracle::default_workload_suite();
        let apps: Vec<oracle::SyntheticApp> = suite.into_iter().map(|(a, _)| a).collect();
        let summary = oracle::generate_dataset(
            &apps,
            &space.states,
            &space.power_caps_w,
            &oracle::default_pairings(),
            &self.config,
            &profiles_path,
            &training_path,
        )
        .map_err(value_err)?;
        Ok((summary.n_profiles, summary.n_solo, summary.n_corun))
    }
}

/// A fitted per-slice-key coefficient table.
#[pyclass]
struct CoefficientTable {
    inner: model::CoefficientTable,
}

#[pymethods]
impl CoefficientTable {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: files::load_coefficients(&path).map_err(io_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        files::save_coefficients(&path, &self.inner).map_err(io_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Keys as (gpcs, option, power_w) tuples in deterministic order.
    fn keys(&self) -> Vec<(u32, String, u32)> {
        self.inner
            .keys()
            .map(|k| (k.gpcs, k.option.to_string(), k.power_w))
            .collect()
    }

    /// Predicted relative performance of `subject` co-located with
    /// `partners` on the slice (gpcs, option) under `power_w`.
    #[pyo3(signature = (subject, partners, gpcs, option, power_w))]
    fn predict(
        &self,
        subject: &Profile,
        partners: Vec<Profile>,
        gpcs: u32,
        option: &str,
        power_w: u32,
    ) -> PyResult<f64> {
        let key = model::SliceKey {
            gpcs,
            option: parse_option(option)?,
            power_w,
        };
        let partner_refs: Vec<&migopt_core::ApplicationProfile> =
            partners.iter().map(|p| &p.inner).collect();
        model::predict_rperf(&subject.inner, &partner_refs, &key, &self.inner)
            .map_err(value_err)
    }
}

/// Fit scalability and interference coefficients from a profile file and a
/// training file, mirroring `migopt train`.
#[pyfunction]
#[pyo3(signature = (profiles_path, training_path, states = None))]
fn fit_table(
    profiles_path: PathBuf,
    training_path: PathBuf,
    states: Option<StateSpace>,
) -> PyResult<CoefficientTable> {
    let space = states.map(|s| s.inner).unwrap_or_default();
    let profiles = files::load_profiles(&profiles_path).map_err(io_err)?;
    let records = files::load_training_records(&training_path).map_err(io_err)?;
    let samples = files::resolve_training(&records, &profiles, &space).map_err(value_err)?;
    let (solo, corun): (Vec<_>, Vec<_>) = samples.into_iter().partition(|s| s.is_solo());
    let table = model::fit_solo(&solo).map_err(value_err)?;
    let table = if corun.is_empty() {
        table
    } else {
        model::fit_interference(&corun, table).map_err(value_err)?
    };
    Ok(CoefficientTable { inner: table })
}

/// Solve a policy problem, mirroring `migopt solve`. Returns the full solver
/// report as a JSON string; `chosen` is null when nothing is feasible.
#[pyfunction]
#[pyo3(signature = (table, apps, problem, alpha, power_w = None, states = None))]
fn solve_policy(
    table: &CoefficientTable,
    apps: Vec<Profile>,
    problem: &str,
    alpha: f64,
    power_w: Option<u32>,
    states: Option<StateSpace>,
) -> PyResult<String> {
    let kind: policy::PolicyKind = problem.parse().map_err(value_err)?;
    let space = states.map(|s| s.inner).unwrap_or_default();
    let problem = policy::PolicyProblem {
        kind,
        apps: apps.into_iter().map(|p| p.inner).collect(),
        alpha,
        power_w: match kind {
            policy::PolicyKind::Throughput => power_w,
            policy::PolicyKind::Efficiency => None,
        },
    };
    problem.validate().map_err(value_err)?;
    let evaluations =
        policy::evaluate_candidates(&problem, &space.states, &space.power_caps_w, &table.inner)
            .map_err(value_err)?;
    let solution = match policy::solve(&problem, &space.states, &space.power_caps_w, &table.inner)
    {
        Ok(solution) => Some(solution),
        Err(policy::PolicyError::Infeasible) => None,
        Err(err) => return Err(value_err(err)),
    };
    let report = policy::build_report(&problem, evaluations, solution.as_ref());
    serde_json::to_string(&report).map_err(value_err)
}

#[pymodule]
fn migopt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Profile>()?;
    m.add_class::<App>()?;
    m.add_class::<StateSpace>()?;
    m.add_class::<Oracle>()?;
    m.add_class::<CoefficientTable>()?;
    m.add_function(wrap_pyfunction!(fit_table, m)?)?;
    m.add_function(wrap_pyfunction!(solve_policy, m)?)?;
    Ok(())
}
