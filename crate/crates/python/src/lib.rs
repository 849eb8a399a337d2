//! Python bindings. Core errors surface as `ValueError`.

use magnon_bath as core;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(value_error)
    }
}

#[pyclass(name = "ModelParams", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams(core::ModelParams);

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (d=1, J=1.0, S=1.0, gamma_z=1.0, h=0.0, omega0=3.0, g=1.0))]
    #[allow(non_snake_case)]
    fn new(d: usize, J: f64, S: f64, gamma_z: f64, h: f64, omega0: f64, g: f64) -> PyResult<Self> {
        core::ModelParams::new(d, J, S, gamma_z, h, omega0, g).map(PyModelParams).py()
    }

    /// Chain with J = S = γ_z = 1.
    #[staticmethod]
    fn chain(h: f64, omega0: f64, g: f64) -> PyResult<Self> {
        Self::new(1, 1.0, 1.0, 1.0, h, omega0, g)
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d
    }
    #[getter(J)]
    fn j(&self) -> f64 {
        self.0.j
    }
    #[getter(S)]
    fn s(&self) -> f64 {
        self.0.s
    }
    #[getter]
    fn gamma_z(&self) -> f64 {
        self.0.gamma_z
    }
    #[getter]
    fn h(&self) -> f64 {
        self.0.h
    }
    #[getter]
    fn omega0(&self) -> f64 {
        self.0.omega0
    }
    #[getter]
    fn g(&self) -> f64 {
        self.0.g
    }

    fn with_h(&self, h: f64) -> PyResult<Self> {
        let p = self.0.with_h(h);
        p.validate().py()?;
        Ok(PyModelParams(p))
    }

    fn with_omega0(&self, omega0: f64) -> PyResult<Self> {
        let p = self.0.with_omega0(omega0);
        p.validate().py()?;
        Ok(PyModelParams(p))
    }

    fn with_g(&self, g: f64) -> PyResult<Self> {
        let p = self.0.with_g(g);
        p.validate().py()?;
        Ok(PyModelParams(p))
    }

    /// `(omega_min, omega_max, h_tilde)`.
    fn spectrum_bounds(&self) -> (f64, f64, f64) {
        let b = core::spectrum_bounds(&self.0);
        (b.omega_min, b.omega_max, b.h_tilde)
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "ModelParams(d={}, J={}, S={}, gamma_z={}, h={}, omega0={}, g={})",
            p.d, p.j, p.s, p.gamma_z, p.h, p.omega0, p.g
        )
    }
}

#[pyclass(name = "BoundState", frozen, get_all, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyBoundState {
    energy: f64,
    weight: f64,
}

#[pymethods]
impl PyBoundState {
    fn __repr__(&self) -> String {
        format!("BoundState(energy={}, weight={})", self.energy, self.weight)
    }
}

fn bound_states(states: &[core::BoundState]) -> Vec<PyBoundState> {
    states.iter().map(|s| PyBoundState { energy: s.energy, weight: s.weight }).collect()
}

/// Exact amplitude, rates and density matrix up to `t_max`.
#[pyclass(name = "ExactDynamics", frozen)]
struct PyExactDynamics(core::ExactDynamics);

#[pymethods]
impl PyExactDynamics {
    #[new]
    fn new(py: Python<'_>, params: &PyModelParams, t_max: f64) -> PyResult<Self> {
        let p = params.0;
        py.detach(|| core::ExactDynamics::new(&p, t_max)).map(PyExactDynamics).py()
    }

    fn amplitude(&self, t: f64) -> PyResult<Complex64> {
        Ok(self.0.amplitude(t).py()?.phi)
    }

    fn amplitudes(&self, py: Python<'_>, times: Vec<f64>) -> PyResult<Vec<Complex64>> {
        let samples = py.detach(|| self.0.amplitudes(&times)).py()?;
        Ok(samples.iter().map(|a| a.phi).collect())
    }

    /// `(kappa, xi, singular)`.
    fn rates(&self, t: f64) -> PyResult<(f64, f64, bool)> {
        let r = self.0.rates(t).py()?;
        Ok((r.kappa, r.xi, r.singular))
    }

    /// `(rho11, rho12)` from `alpha_plus|+⟩ + alpha_minus|−⟩`.
    fn evolve(&self, alpha_plus: Complex64, alpha_minus: Complex64, t: f64) -> PyResult<(f64, Complex64)> {
        let psi = core::PureState::new(alpha_plus, alpha_minus).py()?;
        let rho = self.0.evolve(&psi, t).py()?;
        Ok((rho.rho11, rho.rho12))
    }

    #[getter]
    fn bound_states(&self) -> Vec<PyBoundState> {
        bound_states(self.0.bound_states())
    }
}

/// Second-order dynamics on a fixed time grid.
#[pyclass(name = "WeakDynamics", frozen)]
struct PyWeakDynamics(core::WeakDynamics);

#[pymethods]
impl PyWeakDynamics {
    #[new]
    #[pyo3(signature = (params, times, temperature=0.0))]
    fn new(params: &PyModelParams, times: Vec<f64>, temperature: f64) -> PyResult<Self> {
        let tp = core::ThermalParams::new(temperature).py()?;
        core::WeakDynamics::new(&params.0, &tp, &times).map(PyWeakDynamics).py()
    }

    /// `[(t, kappa, xi), ...]`.
    fn rates(&self) -> Vec<(f64, f64, f64)> {
        self.0.samples().iter().map(|s| (s.t, s.kappa, s.xi)).collect()
    }

    /// `[(rho11, rho12), ...]` from the given initial matrix.
    #[pyo3(signature = (rho11=1.0, rho12=Complex64::new(0.0, 0.0)))]
    fn evolve(&self, rho11: f64, rho12: Complex64) -> PyResult<Vec<(f64, Complex64)>> {
        let rho0 = core::DensityMatrix2 { rho11, rho12 };
        Ok(self.0.evolve(&rho0).py()?.iter().map(|r| (r.rho11, r.rho12)).collect())
    }
}

/// Finite-lattice oracle with `n_modes` sites per axis.
#[pyclass(name = "FiniteLattice", frozen)]
struct PyFiniteLattice(core::FiniteLattice);

#[pymethods]
impl PyFiniteLattice {
    #[new]
    fn new(py: Python<'_>, params: &PyModelParams, n_modes: usize) -> PyResult<Self> {
        let p = params.0;
        py.detach(|| core::FiniteLattice::new(&p, &core::OracleSpec::new(n_modes)?))
            .map(PyFiniteLattice)
            .py()
    }

    fn amplitude(&self, t: f64) -> Complex64 {
        self.0.amplitude(t)
    }

    fn amplitudes(&self, times: Vec<f64>) -> Vec<Complex64> {
        self.0.amplitudes(&times)
    }
}

#[pyfunction]
fn sigma_ret(params: &PyModelParams, eps: f64) -> PyResult<Complex64> {
    core::sigma_ret(&params.0, eps).py()
}

#[pyfunction]
fn sigma_numeric(params: &PyModelParams, eps: f64, nu: f64) -> PyResult<Complex64> {
    core::sigma_numeric(&params.0, eps, nu).py()
}

#[pyfunction]
fn spectral_density(params: &PyModelParams, eps: f64) -> PyResult<f64> {
    core::spectral_density(&params.0, eps).py()
}

#[pyfunction]
fn find_bound_states(params: &PyModelParams) -> PyResult<Vec<PyBoundState>> {
    Ok(bound_states(&core::find_bound_states(&params.0).py()?))
}

#[pyfunction]
fn sum_rule(params: &PyModelParams) -> PyResult<f64> {
    core::sum_rule(&params.0).py()
}

/// `(kappa, xi, divergent)`.
#[pyfunction]
fn markov_limits(params: &PyModelParams) -> PyResult<(f64, f64, bool)> {
    let m = core::markov_limits(&params.0).py()?;
    Ok((m.kappa, m.xi, m.divergent))
}

/// `(gamma, delta, tau_d)`.
#[pyfunction]
#[pyo3(signature = (params, temperature=0.0))]
fn short_time(params: &PyModelParams, temperature: f64) -> PyResult<(f64, f64, f64)> {
    let tp = core::ThermalParams::new(temperature).py()?;
    let s = core::short_time(&params.0, &tp).py()?;
    Ok((s.gamma, s.delta, s.tau_d))
}

#[pyfunction]
fn survival(params: &PyModelParams, tau: f64, n_meas: u32) -> PyResult<f64> {
    core::survival(&params.0, tau, n_meas).py()
}

/// `[(kappa_eff, saturated), ...]`.
#[pyfunction]
fn effective_rates(py: Python<'_>, params: &PyModelParams, taus: Vec<f64>) -> PyResult<Vec<(f64, bool)>> {
    let p = params.0;
    let rates = py.detach(|| core::effective_rates(&p, &taus)).py()?;
    Ok(rates.iter().map(|r| (r.kappa_eff, r.saturated)).collect())
}

#[pyfunction]
fn weak_effective_rate(params: &PyModelParams, tau: f64) -> PyResult<f64> {
    core::weak_effective_rate(&params.0, tau).py()
}

#[pyfunction]
fn crossover_tau(params: &PyModelParams) -> PyResult<Option<f64>> {
    core::crossover_tau(&params.0).py()
}

#[pyfunction]
#[pyo3(signature = (params, h_grid, horizon=10.0))]
fn critical_field(py: Python<'_>, params: &PyModelParams, h_grid: Vec<f64>, horizon: f64) -> PyResult<Option<f64>> {
    let p = params.0;
    py.detach(|| core::critical_field(&p, &h_grid, horizon)).py()
}

#[pymodule]
#[pyo3(name = "magnon_bath")]
fn magnon_bath_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyBoundState>()?;
    m.add_class::<PyExactDynamics>()?;
    m.add_class::<PyWeakDynamics>()?;
    m.add_class::<PyFiniteLattice>()?;
    m.add_function(wrap_pyfunction!(sigma_ret, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_density, m)?)?;
    m.add_function(wrap_pyfunction!(find_bound_states, m)?)?;
    m.add_function(wrap_pyfunction!(sum_rule, m)?)?;
    m.add_function(wrap_pyfunction!(markov_limits, m)?)?;
    m.add_function(wrap_pyfunction!(short_time, m)?)?;
    m.add_function(wrap_pyfunction!(survival, m)?)?;
    m.add_function(wrap_pyfunction!(effective_rates, m)?)?;
    m.add_function(wrap_pyfunction!(weak_effective_rate, m)?)?;
    m.add_function(wrap_pyfunction!(crossover_tau, m)?)?;
    m.add_function(wrap_pyfunction!(critical_field, m)?)?;
    Ok(())
}
