//! Python bindings: hypersurfaces, energies, variations, spectra and lab runs.

use aclab_core::energy::{balanced_energy_with, DEFAULT_NX};
use aclab_core::geometry::{self, geodesic_circle, make_warped_torus, point_pair, Ambient};
use aclab_core::{minmax, profiles1d, variation};
use aclab_lab::config::{Kind, RunConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use std::collections::BTreeMap;
use std::path::PathBuf;

fn core_err(e: aclab_core::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A separating hypersurface: a graph over a geodesic circle or a point pair.
#[pyclass(name = "Hypersurface", frozen, skip_from_py_object)]
struct PyHypersurface {
    inner: geometry::Hypersurface,
}

#[pymethods]
impl PyHypersurface {
    /// Geodesic circle `x = c` of the warped torus `h = a + b cos x`.
    #[staticmethod]
    #[pyo3(signature = (c, ny, a = 2.0, b = 0.3, strip = "centred"))]
    fn circle(c: f64, ny: usize, a: f64, b: f64, strip: &str) -> PyResult<Self> {
        let m = make_warped_torus(a, b).map_err(core_err)?;
        let amb = match strip {
            "centred" => Ambient::centred_strip(m),
            "shifted" => Ambient::shifted_strip(m),
            _ => return Err(PyValueError::new_err("strip must be 'centred' or 'shifted'")),
        };
        let inner = geodesic_circle(amb, c, ny).map_err(core_err)?;
        Ok(Self { inner })
    }

    /// Two points `p < q` on the circle of circumference 2π.
    #[staticmethod]
    fn point_pair(p: f64, q: f64) -> PyResult<Self> {
        Ok(Self { inner: point_pair(p, q).map_err(core_err)? })
    }

    /// Same base, new graph offsets.
    fn with_graph(&self, graph: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_graph(graph).map_err(core_err)? })
    }

    #[getter]
    fn ny(&self) -> usize {
        self.inner.ny()
    }

    #[getter]
    fn graph(&self) -> Vec<f64> {
        self.inner.graph.clone()
    }

    fn positions(&self) -> Vec<f64> {
        self.inner.positions()
    }

    fn y_grid(&self) -> Vec<f64> {
        self.inner.y_grid()
    }

    fn __repr__(&self) -> String {
        format!("Hypersurface(base={}, ny={})", self.inner.base, self.inner.ny())
    }
}

#[pyfunction]
fn constants() -> BTreeMap<&'static str, f64> {
    let c = profiles1d::constants();
    BTreeMap::from([("sigma0", c.sigma0), ("sigma", c.sigma), ("hprime_sq_integral", c.hprime_sq_integral)])
}

/// `(tanh(z / sqrt 2), derivative)`.
#[pyfunction]
fn heteroclinic(z: f64) -> (f64, f64) {
    profiles1d::heteroclinic(z)
}

#[pyfunction]
#[pyo3(signature = (sigma, eps, nx = DEFAULT_NX))]
fn balanced_energy(sigma: &PyHypersurface, eps: f64, nx: usize) -> PyResult<BTreeMap<&'static str, f64>> {
    let r = balanced_energy_with(&sigma.inner, eps, nx).map_err(core_err)?;
    Ok(BTreeMap::from([
        ("eps", r.eps),
        ("e_plus", r.e_plus),
        ("e_minus", r.e_minus),
        ("balanced", r.balanced),
        ("area", r.area),
        ("reference", r.reference),
    ]))
}

/// Analytic first variation against the finite-difference oracle:
/// `(analytic, fd, relative)`.
#[pyfunction]
#[pyo3(signature = (sigma, f, eps, nx = DEFAULT_NX, step = 1e-3))]
fn first_variation(sigma: &PyHypersurface, f: Vec<f64>, eps: f64, nx: usize, step: f64) -> PyResult<(f64, f64, f64)> {
    let c = variation::first_variation_check(&sigma.inner, &f, eps, nx, step).map_err(core_err)?;
    Ok((c.analytic, c.fd, c.relative))
}

/// Gram eigenvalues of the second variation on the lowest Jacobi modes.
#[pyfunction]
#[pyo3(signature = (sigma, eps, modes = 3, nx = DEFAULT_NX))]
fn second_variation_spectrum(sigma: &PyHypersurface, eps: f64, modes: usize, nx: usize) -> PyResult<Vec<f64>> {
    variation::second_variation_spectrum(&sigma.inner, eps, nx, modes).map_err(core_err)
}

/// `(eigenvalues, index, nullity)` of the stability operator.
#[pyfunction]
#[pyo3(signature = (sigma, modes = 5, points = 256))]
fn jacobi_spectrum(sigma: &PyHypersurface, modes: usize, points: usize) -> PyResult<(Vec<f64>, usize, usize)> {
    let s = geometry::jacobi_spectrum(&sigma.inner, modes, points).map_err(core_err)?;
    Ok((s.eigenvalues, s.index, s.nullity))
}

/// `(energy, dual_norm, direction)`.
#[pyfunction]
#[pyo3(signature = (sigma, eps, nx = DEFAULT_NX))]
fn pseudogradient(sigma: &PyHypersurface, eps: f64, nx: usize) -> PyResult<(f64, f64, Vec<f64>)> {
    let (e, p) = minmax::evaluate(&sigma.inner, eps, nx).map_err(core_err)?;
    Ok((e, p.dual_norm, p.direction))
}

/// Run a lab experiment; returns `(passed, output directory)`.
#[pyfunction]
#[pyo3(signature = (kind, config = "", out = None))]
fn run(py: Python<'_>, kind: &str, config: &str, out: Option<PathBuf>) -> PyResult<(bool, String)> {
    let kind: Kind = kind.parse().map_err(|e: aclab_lab::LabError| PyValueError::new_err(e.to_string()))?;
    let mut cfg = RunConfig::parse(kind, config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    if out.is_some() {
        cfg.out = out;
    }
    let dir = cfg.output_dir().display().to_string();
    let m = py.detach(|| aclab_lab::run(&cfg)).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((m.passed(), dir))
}

#[pymodule]
fn aclab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHypersurface>()?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(heteroclinic, m)?)?;
    m.add_function(wrap_pyfunction!(balanced_energy, m)?)?;
    m.add_function(wrap_pyfunction!(first_variation, m)?)?;
    m.add_function(wrap_pyfunction!(second_variation_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(pseudogradient, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
