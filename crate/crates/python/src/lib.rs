//! Python bindings for the partitioned FSI solver.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fsi::assembly::{
    BlockOperatorSet, BoundaryLayout, Discretization, PhysicalConstants as Constants,
};
use fsi::conditioning::{auto_mode, condition_row};
use fsi::coupling::{advance, FsiSystem, SchurSolver, TimeState};
use fsi::harness;
use fsi::manufactured::{compute_error_norms, DiscreteFields, ExactSolution as Exact, Variant};
use fsi::sparse::KrylovOptions;
use fsi::FsiError;

fn to_py(e: FsiError) -> PyErr {
    let msg = format!("[{}] {e}", e.kind());
    match e {
        FsiError::InvalidArgument(_) | FsiError::Config { .. } | FsiError::Size { .. } => {
            PyValueError::new_err(msg)
        }
        _ => PyRuntimeError::new_err(msg),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

/// Physical constants; all default to 1.
#[pyclass(name = "PhysicalConstants", from_py_object)]
#[derive(Clone, Copy)]
struct PyConstants {
    #[pyo3(get, set)]
    rho_f: f64,
    #[pyo3(get, set)]
    rho_s: f64,
    #[pyo3(get, set)]
    nu_f: f64,
    #[pyo3(get, set)]
    nu_s: f64,
    #[pyo3(get, set)]
    lambda_: f64,
}

impl From<PyConstants> for Constants {
    fn from(c: PyConstants) -> Self {
        Constants {
            rho_f: c.rho_f,
            rho_s: c.rho_s,
            nu_f: c.nu_f,
            nu_s: c.nu_s,
            lambda: c.lambda_,
        }
    }
}

#[pymethods]
impl PyConstants {
    #[new]
    #[pyo3(signature = (rho_f=1.0, rho_s=1.0, nu_f=1.0, nu_s=1.0, lambda_=1.0))]
    fn new(rho_f: f64, rho_s: f64, nu_f: f64, nu_s: f64, lambda_: f64) -> PyResult<Self> {
        let c = Self {
            rho_f,
            rho_s,
            nu_f,
            nu_s,
            lambda_,
        };
        Constants::from(c).validate().map_err(to_py)?;
        Ok(c)
    }

    fn __repr__(&self) -> String {
        format!(
            "PhysicalConstants(rho_f={}, rho_s={}, nu_f={}, nu_s={}, lambda_={})",
            self.rho_f, self.rho_s, self.nu_f, self.nu_s, self.lambda_
        )
    }
}

/// Closed-form manufactured fields.
#[pyclass(name = "ExactSolution")]
struct PyExact(Exact);

#[pymethods]
impl PyExact {
    #[new]
    #[pyo3(signature = (constants=None, variant="corrected"))]
    fn new(constants: Option<PyConstants>, variant: &str) -> PyResult<Self> {
        let c = constants.map(Constants::from).unwrap_or_default();
        Ok(Self(Exact::new(c, parse::<Variant>(variant)?)))
    }

    fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let v = self.0.velocity(x, y, t);
        (v[0], v[1])
    }

    fn pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        self.0.pressure(x, y, t)
    }

    fn displacement(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let v = self.0.displacement(x, y, t);
        (v[0], v[1])
    }

    /// Interface traction at (x, 1).
    fn multiplier(&self, x: f64, t: f64) -> (f64, f64) {
        let v = self.0.multiplier(x, t);
        (v[0], v[1])
    }
}

/// Assembled system for one mesh and time step, advancing the manufactured problem.
#[pyclass(name = "Simulation")]
struct PySimulation {
    system: FsiSystem,
    exact: Exact,
    state: TimeState,
    opts: KrylovOptions,
}

#[pymethods]
impl PySimulation {
    #[new]
    #[pyo3(signature = (n, dt, constants=None, lm_coarsening=1, variant="corrected", rel_tol=1e-10))]
    fn new(
        n: usize,
        dt: f64,
        constants: Option<PyConstants>,
        lm_coarsening: usize,
        variant: &str,
        rel_tol: f64,
    ) -> PyResult<Self> {
        let c = constants.map(Constants::from).unwrap_or_default();
        let exact = Exact::new(c, parse::<Variant>(variant)?);
        let disc = Discretization::unit_boxes(n, lm_coarsening, BoundaryLayout::default())
            .map_err(to_py)?;
        let blocks = BlockOperatorSet::assemble(disc, c).map_err(to_py)?;
        let system = FsiSystem::build(blocks, dt).map_err(to_py)?;
        let state = TimeState::initial(&system, &exact, 0.0);
        Ok(Self {
            system,
            exact,
            state,
            opts: KrylovOptions {
                rel_tol,
                max_iter: None,
            },
        })
    }

    #[getter]
    fn time(&self) -> f64 {
        self.state.time
    }

    #[getter]
    fn step(&self) -> usize {
        self.state.step
    }

    #[getter]
    fn schur_dim(&self) -> usize {
        self.system.schur_dim()
    }

    /// Dof counts as a dict with keys n_u, n_p, n_eta, n_gamma.
    fn dofs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = self.system.dofs();
        let out = PyDict::new(py);
        out.set_item("n_u", d.n_u)?;
        out.set_item("n_p", d.n_p)?;
        out.set_item("n_eta", d.n_eta)?;
        out.set_item("n_gamma", d.n_gamma)?;
        Ok(out)
    }

    fn apply_schur(&self, z: Vec<f64>) -> PyResult<Vec<f64>> {
        if z.len() != self.system.schur_dim() {
            return Err(PyValueError::new_err(format!(
                "expected {} entries, got {}",
                self.system.schur_dim(),
                z.len()
            )));
        }
        Ok(self.system.apply_schur(&z))
    }

    /// Advances `steps` time steps; returns the diagnostics of the last one.
    #[pyo3(signature = (steps=1, solver="pcg"))]
    fn advance<'py>(
        &mut self,
        py: Python<'py>,
        steps: usize,
        solver: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let solver: SchurSolver = parse(solver)?;
        let out = PyDict::new(py);
        for _ in 0..steps {
            let (next, d) = py
                .detach(|| advance(&self.system, &self.state, &self.exact, solver, &self.opts))
                .map_err(to_py)?;
            self.state = next;
            out.set_item("step", d.step)?;
            out.set_item("time", d.time)?;
            out.set_item("schur_iterations", d.schur_iterations)?;
            out.set_item("schur_residual", d.schur_residual)?;
            out.set_item("constraint_residual", d.constraint_residual)?;
        }
        Ok(out)
    }

    /// Error norms of the current state against the exact solution.
    fn errors<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = &self.state;
        let fields = DiscreteFields {
            u: &s.u,
            p: &s.p,
            eta: &s.eta,
            g: &s.g,
        };
        let e = compute_error_norms(&self.system.blocks().disc, fields, &self.exact, s.time)
            .map_err(to_py)?;
        let out = PyDict::new(py);
        for (k, v) in [
            ("eta_l2", e.eta_l2),
            ("eta_h1", e.eta_h1),
            ("u_l2", e.u_l2),
            ("u_h1", e.u_h1),
            ("p_l2", e.p_l2),
            ("g_l2", e.g_l2),
        ] {
            out.set_item(k, v)?;
        }
        Ok(out)
    }

    #[getter]
    fn velocity(&self) -> Vec<f64> {
        self.state.u.clone()
    }

    #[getter]
    fn pressure(&self) -> Vec<f64> {
        self.state.p.clone()
    }

    #[getter]
    fn displacement(&self) -> Vec<f64> {
        self.state.eta.clone()
    }

    #[getter]
    fn multiplier(&self) -> Vec<f64> {
        self.state.g.clone()
    }

    /// (kappa_cg, kappa_pcg, iters_cg, iters_pcg) for the first step from the current state.
    fn condition(&self, py: Python<'_>) -> PyResult<(f64, f64, usize, usize)> {
        let n = self.system.blocks().disc.interface.num_segments()
            * self.system.blocks().disc.interface.coarsening_factor();
        let r = py
            .detach(|| {
                condition_row(
                    &self.system,
                    1.0 / n as f64,
                    &self.state,
                    &self.exact,
                    &self.opts,
                    auto_mode(n),
                )
            })
            .map_err(to_py)?;
        Ok((r.cond_cg.kappa, r.cond_pcg.kappa, r.iters_cg, r.iters_pcg))
    }
}

/// Runs a study described by a flat TOML document and returns the CSV text.
#[pyfunction]
#[pyo3(signature = (config, study=None))]
fn run_study(py: Python<'_>, config: &str, study: Option<&str>) -> PyResult<String> {
    let mut c = harness::parse_config(config).map_err(to_py)?;
    if let Some(s) = study {
        c.study = parse(s)?;
    }
    let report = py.detach(|| harness::run_study(&c)).map_err(to_py)?;
    Ok(report.to_csv())
}

/// Validates a configuration and returns its normalized TOML form.
#[pyfunction]
fn normalize_config(config: &str) -> PyResult<String> {
    Ok(harness::parse_config(config).map_err(to_py)?.to_toml())
}

#[pymodule]
fn fsi_schur(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConstants>()?;
    m.add_class::<PyExact>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_config, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
