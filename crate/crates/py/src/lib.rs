//! Python bindings. The extension module is imported as `tfim_wannier`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use tfim_wannier as core;
use tfim_wannier::vqe::best_of_restarts;
use tfim_wannier::{BandKind, InitScheme, InitialStateSpec, VqeConfig, WallSign};

create_exception!(tfim_wannier, CapabilityError, PyRuntimeError);
create_exception!(tfim_wannier, ConsistencyError, PyRuntimeError);
create_exception!(tfim_wannier, DegenerateChannelError, PyRuntimeError);

fn to_py(e: core::Error) -> PyErr {
    let msg = e.to_string();
    match e {
        core::Error::InvalidArgument(_) => PyValueError::new_err(msg),
        core::Error::Capability(_) => CapabilityError::new_err(msg),
        core::Error::Consistency(_) => ConsistencyError::new_err(msg),
        core::Error::DegenerateChannel { .. } => DegenerateChannelError::new_err(msg),
    }
}

/// Transverse-field Ising ring with `N` sites, coupling `J` and field `h`.
#[pyclass(name = "ModelSpec", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyModelSpec {
    inner: core::ModelSpec,
}

#[pymethods]
impl PyModelSpec {
    #[new]
    #[pyo3(signature = (n, j, h, twisted = false))]
    fn new(n: usize, j: f64, h: f64, twisted: bool) -> PyResult<Self> {
        Ok(Self { inner: core::ModelSpec::new(n, j, h, twisted).map_err(to_py)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn j(&self) -> f64 {
        self.inner.j
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn twisted(&self) -> bool {
        self.inner.twisted
    }

    /// Hilbert-space dimension `2^N`.
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Number of momentum labels: `N` plain, `2N` twisted.
    fn momentum_period(&self) -> usize {
        self.inner.momentum_period()
    }

    /// Expectation value of the Hamiltonian in a state given as amplitudes.
    fn energy(&self, amplitudes: Vec<Complex64>) -> PyResult<f64> {
        let state = core::StateVector::from_amplitudes(self.inner.n, amplitudes).map_err(to_py)?;
        self.inner.hamiltonian().energy(&state).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let m = &self.inner;
        format!("ModelSpec(n={}, j={}, h={}, twisted={})", m.n, m.j, m.h, if m.twisted { "True" } else { "False" })
    }
}

fn band_kind(name: &str) -> PyResult<BandKind> {
    match name {
        "magnon" => Ok(BandKind::Magnon),
        "soliton" => Ok(BandKind::Soliton),
        "ground" => Ok(BandKind::Ground),
        other => Err(PyValueError::new_err(format!("unknown band `{other}`; expected magnon, soliton or ground"))),
    }
}

/// Exact spectrum with momentum and parity labels.
#[pyclass(name = "Spectrum", frozen)]
pub struct PySpectrum {
    inner: core::LabeledSpectrum,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.entries.iter().map(|e| e.energy).collect()
    }

    #[getter]
    fn momentum_indices(&self) -> Vec<usize> {
        self.inner.entries.iter().map(|e| e.momentum_index).collect()
    }

    #[getter]
    fn parities(&self) -> Vec<i8> {
        self.inner.entries.iter().map(|e| e.parity).collect()
    }

    #[getter]
    fn ground_energy(&self) -> f64 {
        self.inner.ground_energy()
    }

    /// Band energies indexed by momentum label.
    fn band(&self, kind: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.band(band_kind(kind)?).map_err(to_py)?.energies)
    }

    /// Amplitudes of the gauge-fixed band state at one momentum label.
    fn band_state(&self, kind: &str, index: usize) -> PyResult<Vec<Complex64>> {
        Ok(self.inner.band_state(band_kind(kind)?, index).map_err(to_py)?.amplitudes().to_vec())
    }

    /// `(z_k, z_x_max)` of the magnon band.
    fn exact_weights(&self) -> PyResult<(Vec<f64>, f64)> {
        let w = self.inner.exact_weights().map_err(to_py)?;
        Ok((w.z_k, w.z_x_max))
    }

    fn __len__(&self) -> usize {
        self.inner.entries.len()
    }
}

/// Outcome of a variational preparation.
#[pyclass(name = "VqeResult", frozen)]
pub struct PyVqeResult {
    inner: core::VqeResult,
}

#[pymethods]
impl PyVqeResult {
    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    fn params(&self) -> Vec<f64> {
        self.inner.params.theta.clone()
    }

    #[getter]
    fn initial_params(&self) -> Vec<f64> {
        self.inner.initial_params.theta.clone()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn gradient_norm(&self) -> f64 {
        self.inner.gradient_norm
    }

    /// `(iteration, energy)` pairs.
    #[getter]
    fn trace(&self) -> Vec<(usize, f64)> {
        self.inner.trace.clone()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.final_state.amplitudes().to_vec()
    }

    #[getter]
    fn model(&self) -> PyModelSpec {
        PyModelSpec { inner: self.inner.model }
    }

    /// Translation count of the initial excitation.
    #[getter]
    fn anchor(&self) -> usize {
        self.inner.init.anchor(self.inner.model.n)
    }

    /// `⟨X_r⟩` for `r = 1..=N`.
    fn magnetization_profile(&self) -> Vec<f64> {
        core::magnetization_profile(&self.inner.final_state)
    }
}

fn init_spec(kind: &str, site: Option<usize>, n: usize) -> PyResult<InitialStateSpec> {
    let center = n.div_ceil(2);
    Ok(match kind {
        "all-plus" => InitialStateSpec::AllPlus,
        "all-minus" => InitialStateSpec::AllMinus,
        "spin-flip" => InitialStateSpec::SpinFlip { x: site.unwrap_or(center) },
        "domain-wall" => InitialStateSpec::DomainWall { sigma: WallSign::Plus, x: site.unwrap_or(n / 2) },
        "bell-pair" => {
            let x1 = site.unwrap_or(center);
            InitialStateSpec::BellPair { x1, x2: x1 % n + 1 }
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown initial state `{other}`; expected all-plus, all-minus, spin-flip, domain-wall or bell-pair"
            )))
        }
    })
}

/// Symmetry-labeled exact spectrum (N ≤ 14).
#[pyfunction]
fn exact_spectrum(py: Python<'_>, model: &PyModelSpec) -> PyResult<PySpectrum> {
    let spec = model.inner;
    let inner = py.detach(|| core::full_labeled_spectrum(&spec)).map_err(to_py)?;
    Ok(PySpectrum { inner })
}

/// Best of `restarts` optimizations of the symmetric ansatz.
///
/// `start` is `"zeros"` (angles near zero) or `"uniform"` (angles drawn
/// from (−π/2, π/2)).
#[pyfunction]
#[pyo3(signature = (model, init = "spin-flip", site = None, depth = 8, restarts = 1, seed = 0, start = "zeros"))]
fn optimize(
    py: Python<'_>,
    model: &PyModelSpec,
    init: &str,
    site: Option<usize>,
    depth: usize,
    restarts: usize,
    seed: u64,
    start: &str,
) -> PyResult<PyVqeResult> {
    let spec = model.inner;
    let init = init_spec(init, site, spec.n)?;
    let config = VqeConfig::default().with_seed(seed);
    let config = match start {
        "zeros" => config,
        "uniform" => config.with_scheme(InitScheme::Uniform { low: -FRAC_PI_2, high: FRAC_PI_2 }),
        other => return Err(PyValueError::new_err(format!("unknown start `{other}`; expected zeros or uniform"))),
    };
    let inner = py.detach(|| best_of_restarts(&spec, init, depth, &config, restarts)).map_err(to_py)?;
    Ok(PyVqeResult { inner })
}

/// Band energies `ε_k` reconstructed from a prepared Wannier state.
#[pyfunction]
fn dispersion(result: &PyVqeResult) -> PyResult<Vec<f64>> {
    core::dispersion_from_wannier(&result.inner.model, &result.inner.final_state).map_err(to_py)
}

/// `(z_x, phi_k)`: bare-flip weight and per-momentum phases relative to
/// the exact magnon band.
#[pyfunction]
fn weight_and_phases(result: &PyVqeResult, spectrum: &PySpectrum) -> PyResult<(f64, Vec<f64>)> {
    let w = core::weight_and_phases(&result.inner.final_state, &spectrum.inner, result.anchor()).map_err(to_py)?;
    Ok((w.z_x, w.phi_k))
}

/// Momentum-sector weights of a prepared state.
#[pyfunction]
fn momentum_weights(result: &PyVqeResult) -> Vec<f64> {
    let kind = core::MomentumKind::of(&result.inner.model);
    core::momentum_decompose(&result.inner.final_state, kind, result.anchor()).weights()
}

/// Infinite-chain band average and bandwidth of the magnon band.
#[pyfunction]
fn thermodynamic_band_integrals<'py>(py: Python<'py>, j: f64, h: f64) -> PyResult<Bound<'py, PyDict>> {
    let b = core::thermodynamic_band_integrals(j, h).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("avg_gap", b.avg_gap)?;
    out.set_item("bandwidth", b.bandwidth)?;
    Ok(out)
}

#[pymodule(name = "tfim_wannier")]
pub fn tfim_wannier_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelSpec>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyVqeResult>()?;
    m.add_function(wrap_pyfunction!(exact_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(weight_and_phases, m)?)?;
    m.add_function(wrap_pyfunction!(momentum_weights, m)?)?;
    m.add_function(wrap_pyfunction!(thermodynamic_band_integrals, m)?)?;
    let py = m.py();
    m.add("CapabilityError", py.get_type::<CapabilityError>())?;
    m.add("ConsistencyError", py.get_type::<ConsistencyError>())?;
    m.add("DegenerateChannelError", py.get_type::<DegenerateChannelError>())?;
    Ok(())
}
