//! Python bindings: grids, states, system descriptions, time stepping, diagnostics, the
//! Bourgain-space norm and the experiment runner.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ckdv_core::bourgain::norm::{xsb_norm, NormParams, SpaceTimeField};
use ckdv_core::diagnostics::{DiagnosticRecord, InvariantSet};
use ckdv_core::grid::GridSpec;
use ckdv_core::harness::{self, ExperimentConfig, ExperimentKind};
use ckdv_core::solver::{simulate as core_simulate, StepperConfig};
use ckdv_core::systems::{self, SystemSpec};
use ckdv_core::transforms;

fn err(e: ckdv_core::Error) -> PyErr {
    match e {
        ckdv_core::Error::BlowupDetected { .. } | ckdv_core::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Uniform periodic grid of `n` points on `[-period/2, period/2)`.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(GridSpec);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n: usize, period: f64) -> PyResult<Self> {
        GridSpec::new(n, period).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.0.period()
    }

    fn points(&self) -> Vec<f64> {
        self.0.points()
    }

    fn wavenumbers(&self) -> Vec<f64> {
        (0..self.0.n()).map(|j| self.0.wavenumber(j)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, period={})", self.0.n(), self.0.period())
    }
}

/// Coupled system parameters, built from the same JSON used by experiment configs.
#[pyclass(name = "System", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySystem(SystemSpec);

#[pymethods]
impl PySystem {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec: SystemSpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        spec.validate().map_err(err)?;
        Ok(Self(spec))
    }

    #[staticmethod]
    fn hirota_satsuma(a: f64, b: f64) -> PyResult<Self> {
        let spec = SystemSpec::HirotaSatsuma { a, b };
        spec.validate().map_err(err)?;
        Ok(Self(spec))
    }

    #[staticmethod]
    #[pyo3(signature = (a1, a2, a3, b1, b2, r=0.0))]
    fn gear_grimshaw(a1: f64, a2: f64, a3: f64, b1: f64, b2: f64, r: f64) -> PyResult<Self> {
        let spec = SystemSpec::GearGrimshaw { a1, a2, a3, b1, b2, r };
        spec.validate().map_err(err)?;
        Ok(Self(spec))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("serializable")
    }

    /// Coefficient matrix of the third-derivative terms, row by row.
    fn dispersion_matrix(&self) -> PyResult<[[f64; 2]; 2]> {
        self.0.dispersion_matrix().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("System({})", self.to_json())
    }
}

/// Pair `(u, v)` of real periodic fields at time `t`.
#[pyclass(name = "State", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState(systems::State);

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (grid, u, v, t=0.0))]
    fn new(grid: &PyGrid, u: Vec<f64>, v: Vec<f64>, t: f64) -> PyResult<Self> {
        systems::State::from_samples(&grid.0, &u, &v, t).map(Self).map_err(err)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid().clone())
    }

    fn u(&self) -> Vec<f64> {
        self.0.u.to_samples()
    }

    fn v(&self) -> Vec<f64> {
        self.0.v.to_samples()
    }

    fn max_abs_diff(&self, other: &PyState) -> PyResult<f64> {
        if self.0.grid() != other.0.grid() {
            return Err(PyValueError::new_err("states live on different grids"));
        }
        Ok(self.0.max_abs_diff(&other.0))
    }

    /// Conserved quantities and Sobolev norms; entries absent for the system are `None`.
    #[pyo3(signature = (system, s=1.0))]
    fn diagnostics(&self, system: &PySystem, s: f64) -> PyResult<HashMap<&'static str, Option<f64>>> {
        let rec = InvariantSet::for_spec(&system.0).record(&self.0, s).map_err(err)?;
        Ok(DiagnosticRecord::HEADER.iter().copied().zip(rec.values()).collect())
    }
}

/// Integrates `system` from `initial` to `final_time`; returns the states stored every
/// `sample_interval`.
#[pyfunction]
#[pyo3(signature = (system, initial, final_time, dt=1e-4, sample_interval=None))]
fn simulate(
    py: Python<'_>,
    system: &PySystem,
    initial: &PyState,
    final_time: f64,
    dt: f64,
    sample_interval: Option<f64>,
) -> PyResult<Vec<PyState>> {
    let cfg = StepperConfig {
        dt,
        sample_interval: sample_interval.unwrap_or(final_time.max(dt)),
        ..StepperConfig::default()
    };
    let (spec, init) = (system.0.clone(), initial.0.clone());
    let traj = py
        .detach(move || core_simulate(&init, &spec, final_time, &cfg, &mut []))
        .map_err(err)?;
    Ok(traj.states.into_iter().map(PyState).collect())
}

/// `(λ, α₊, α₋)` of the Gear–Grimshaw change of variables.
#[pyfunction]
fn gg_lambda_alpha(b1: f64, b2: f64, a3: f64) -> PyResult<(f64, f64, f64)> {
    transforms::gg_lambda_alpha(b1, b2, a3).map_err(err)
}

/// Bourgain-space norm of the separable field `cutoff(t) u₀(x)` given by samples on
/// spatial and temporal grids.
#[pyfunction]
fn separable_xsb_norm(
    x: &PyGrid,
    t: &PyGrid,
    u0: Vec<f64>,
    time_profile: Vec<f64>,
    a: f64,
    s: f64,
    b: f64,
) -> PyResult<f64> {
    if time_profile.len() != t.0.n() {
        return Err(PyValueError::new_err("time profile length differs from the time grid"));
    }
    let u0 = x.0.forward(&u0).map_err(err)?;
    let tgrid = t.0.clone();
    let field = SpaceTimeField::separable(&x.0, &t.0, u0.coeffs(), |s| {
        let k = ((s + 0.5 * tgrid.period()) / tgrid.period() * tgrid.n() as f64).round() as usize % tgrid.n();
        time_profile[k]
    })
    .map_err(err)?;
    xsb_norm(&field, &NormParams::new(a, s, b)).map_err(err)
}

/// Runs a named experiment from a JSON config into `out_dir`; returns the manifest JSON.
#[pyfunction]
#[pyo3(signature = (kind, config_json, out_dir))]
fn run_experiment(py: Python<'_>, kind: &str, config_json: &str, out_dir: PathBuf) -> PyResult<String> {
    let kind: ExperimentKind = serde_json::from_value(serde_json::Value::String(kind.to_string()))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    let manifest = py.detach(move || harness::run(&cfg, kind, &out_dir)).map_err(err)?;
    Ok(serde_json::to_string(&manifest).expect("serializable"))
}

#[pymodule]
fn ckdv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(gg_lambda_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(separable_xsb_norm, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
