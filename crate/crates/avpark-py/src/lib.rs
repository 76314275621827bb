//! Python module exposing the instance model and the three solvers.
//!
//! Build the importable shared object with
//! `cargo build -p avpark-py --release --features extension-module`
//! and see python/smoke_test.py for how it gets loaded.

use avpark_core as core;
use avpark_core::format;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::Error) -> PyErr {
    match &e {
        core::Error::InvalidConfig(_)
        | core::Error::InvalidInstance(_)
        | core::Error::Parse { .. }
        | core::Error::WindowTooLarge { .. } => PyValueError::new_err(e.to_string()),
        core::Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct Instance {
    inner: core::Instance,
}

#[pymethods]
impl Instance {
    /// Draw a random instance, reproducibly in `seed`.
    #[staticmethod]
    #[pyo3(signature = (avs, facilities, slots, seed, horizon_minutes=120.0, area_km=5.0, capacity=None))]
    fn generate(
        avs: usize,
        facilities: usize,
        slots: u32,
        seed: u64,
        horizon_minutes: f64,
        area_km: f64,
        capacity: Option<u32>,
    ) -> PyResult<Self> {
        let mut cfg = core::GeneratorConfig::new(avs, facilities, slots, seed);
        cfg.horizon_minutes = horizon_minutes;
        cfg.area_km = area_km;
        if let Some(c) = capacity {
            cfg.capacity = core::CapacityRule::Fixed(c);
        }
        let inner = core::generate_instance(&cfg).map_err(to_py)?;
        Ok(Instance { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Instance {
            inner: format::parse_instance(text).map_err(to_py)?,
        })
    }

    fn to_text(&self) -> String {
        format::write_instance(&self.inner)
    }

    #[getter]
    fn n_avs(&self) -> usize {
        self.inner.n_avs()
    }

    #[getter]
    fn n_facilities(&self) -> usize {
        self.inner.n_facilities()
    }

    #[getter]
    fn slots(&self) -> u32 {
        self.inner.slots()
    }

    /// Same horizon cut into `new_slots` slots.
    fn rescale(&self, new_slots: u32) -> PyResult<Self> {
        Ok(Instance {
            inner: core::rescale_time(&self.inner, new_slots).map_err(to_py)?,
        })
    }

    fn export_lp(&self, name: &str) -> String {
        core::export_lp(&self.inner, name)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(avs={}, facilities={}, slots={})",
            self.inner.n_avs(),
            self.inner.n_facilities(),
            self.inner.slots(),
        )
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct Assignment {
    inner: core::Assignment,
}

#[pymethods]
impl Assignment {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Assignment {
            inner: format::parse_assignment(text).map_err(to_py)?,
        })
    }

    fn to_text(&self) -> String {
        format::write_assignment(&self.inner)
    }

    /// Total number of occupied (vehicle, slot) pairs.
    #[getter]
    fn objective(&self) -> u64 {
        core::objective(&self.inner)
    }

    /// (facility, slots) for vehicle `k`, or None if it parks nowhere.
    fn parked(&self, k: usize) -> PyResult<Option<(usize, Vec<u32>)>> {
        let choice = self
            .inner
            .choices
            .get(k)
            .ok_or_else(|| PyValueError::new_err(format!("no vehicle {k}")))?;
        Ok(choice.as_ref().map(|c| (c.facility, c.slots.clone())))
    }

    fn __repr__(&self) -> String {
        format!(
            "Assignment(vehicles={}, objective={})",
            self.inner.n_avs(),
            core::objective(&self.inner),
        )
    }
}

#[pyclass(frozen)]
struct Report {
    inner: core::RunReport,
}

#[pymethods]
impl Report {
    #[getter]
    fn iterations(&self) -> u32 {
        self.inner.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn objective(&self) -> u64 {
        self.inner.objective
    }

    #[getter]
    fn best_dual(&self) -> f64 {
        self.inner.best_dual
    }

    #[getter]
    fn dual_series(&self) -> Vec<f64> {
        self.inner.dual_series.clone()
    }

    #[getter]
    fn sum_g_series(&self) -> Vec<f64> {
        self.inner.sum_g_series.clone()
    }

    #[getter]
    fn primal_series(&self) -> Vec<Option<u64>> {
        self.inner.primal_series.clone()
    }

    #[getter]
    fn simulated_delay_ms(&self) -> u64 {
        self.inner.simulated_delay_ms
    }

    #[getter]
    fn stale_fraction(&self) -> f64 {
        self.inner.stale_fraction
    }

    #[getter]
    fn assignment(&self) -> Assignment {
        Assignment {
            inner: self.inner.assignment.clone(),
        }
    }

    /// Per-iteration trace as CSV text.
    fn csv(&self) -> String {
        self.inner.csv()
    }

    fn summary(&self) -> String {
        self.inner.summary_line()
    }

    fn __repr__(&self) -> String {
        format!("Report({})", self.inner.summary_line())
    }
}

/// Optimal assignment, or raises: ValueError when the instance itself is
/// infeasible, RuntimeError when the search budget runs out.
#[pyfunction]
#[pyo3(signature = (inst, max_nodes=2_000_000))]
fn solve_exact(inst: &Instance, max_nodes: u64) -> PyResult<Assignment> {
    let limits = core::OracleLimits { max_nodes };
    match core::solve_exact(&inst.inner, &limits).map_err(to_py)? {
        core::Verdict::Optimal { assignment, .. } => Ok(Assignment { inner: assignment }),
        core::Verdict::Infeasible { reason } => {
            Err(PyValueError::new_err(format!("infeasible: {reason}")))
        }
    }
}

#[pyfunction]
fn solve_greedy(inst: &Instance) -> PyResult<Assignment> {
    Ok(Assignment {
        inner: core::solve_greedy(&inst.inner).map_err(to_py)?,
    })
}

/// Price-coordinated run over a lossy channel; deterministic in `seed`.
#[pyfunction]
#[pyo3(signature = (inst, seed, drop_prob=0.0, max_iters=500, delta=1e-5, gamma0=0.01, epsilon=1e-3, per_round_delay_ms=200, trace_primal=false))]
#[allow(clippy::too_many_arguments)]
fn solve_distributed(
    inst: &Instance,
    seed: u64,
    drop_prob: f64,
    max_iters: u32,
    delta: f64,
    gamma0: f64,
    epsilon: f64,
    per_round_delay_ms: u64,
    trace_primal: bool,
) -> PyResult<Report> {
    let params = core::CoordinatorParams {
        delta,
        gamma_init: gamma0,
        epsilon,
        max_iters,
        drop_prob,
        per_round_delay_ms,
        trace_primal,
    };
    let report = core::run_distributed(&inst.inner, &params, seed).map_err(to_py)?;
    Ok(Report { inner: report })
}

/// Constraint violations of `a` against `inst`, as strings; empty means
/// feasible.
#[pyfunction]
fn check(inst: &Instance, a: &Assignment) -> PyResult<Vec<String>> {
    if a.inner.n_avs() != inst.inner.n_avs() {
        return Err(PyValueError::new_err(format!(
            "assignment covers {} vehicles but the instance has {}",
            a.inner.n_avs(),
            inst.inner.n_avs(),
        )));
    }
    Ok(core::check_feasibility(&inst.inner, &a.inner)
        .iter()
        .map(|v| v.to_string())
        .collect())
}

#[pymodule]
fn avpark_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Assignment>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(solve_exact, m)?)?;
    m.add_function(wrap_pyfunction!(solve_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(solve_distributed, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
