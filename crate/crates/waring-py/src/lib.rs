//! Python bindings: tensors, the decomposition pipelines, finite-field
//! format verification and the count formulas.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use waring::error::Error;
use waring::exponent::Exponent;
use waring::ff::{self, FormatVerdict, PointSource};
use waring::hankel::{binary_decompose, BinaryParams};
use waring::io;
use waring::jennrich::{self, reconstruction_residual};
use waring::linalg::c;
use waring::linsys;
use waring::monomial::{self, MonomialSpec, ParamChoice};
use waring::tensor::{self, Decomposition, PointSet};

fn to_py_err(e: Error) -> PyErr {
    match e.root() {
        Error::Parse { .. } | Error::OutOfRange(_) | Error::NotPrime(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Dehomogenized symmetric tensor.
#[pyclass(name = "Tensor", skip_from_py_object)]
#[derive(Clone)]
struct PyTensor {
    inner: waring::SymTensor,
}

#[pymethods]
impl PyTensor {
    /// Builds a tensor from `(exponent tuple, complex)` coefficient pairs.
    #[new]
    fn new(n: usize, d: u32, coeffs: Vec<(Vec<u32>, Complex64)>) -> PyResult<Self> {
        let mut inner = waring::SymTensor::zeros(n, d);
        for (e, v) in coeffs {
            if e.len() != n {
                return Err(PyValueError::new_err(format!(
                    "exponent {e:?} does not have {n} entries"
                )));
            }
            let e = Exponent(e);
            if e.size() > d {
                return Err(PyValueError::new_err(format!(
                    "exponent of size {} exceeds d={d}",
                    e.size()
                )));
            }
            inner.set(&e, c(v.re, v.im));
        }
        Ok(PyTensor { inner })
    }

    /// Parses the line-oriented text format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyTensor {
            inner: io::read_tensor(text).map_err(to_py_err)?,
        })
    }

    /// Weighted power sum of dehomogenized points (leading 1 implicit).
    #[staticmethod]
    fn from_points(points: Vec<Vec<Complex64>>, weights: Vec<Complex64>, d: u32) -> PyResult<Self> {
        let rows: Vec<Vec<waring::C64>> = points
            .iter()
            .map(|p| p.iter().map(|z| c(z.re, z.im)).collect())
            .collect();
        let ps = PointSet::from_affine(&rows);
        let w: Vec<waring::C64> = weights.iter().map(|z| c(z.re, z.im)).collect();
        Ok(PyTensor {
            inner: tensor::tensor_from_points(&ps, &w, d).map_err(to_py_err)?,
        })
    }

    fn to_text(&self) -> String {
        io::write_tensor(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> u32 {
        self.inner.d()
    }

    fn coefficient(&self, exponent: Vec<u32>) -> PyResult<Complex64> {
        if exponent.len() != self.inner.n() {
            return Err(PyValueError::new_err("wrong exponent length"));
        }
        let v = self.inner.coeff(&Exponent(exponent));
        Ok(Complex64::new(v.re, v.im))
    }

    /// Catalecticant rank sequence.
    #[pyo3(signature = (tol = 0.0))]
    fn hilbert_function(&self, tol: f64) -> Vec<usize> {
        tensor::hilbert_function(&self.inner, tol)
    }

    fn __repr__(&self) -> String {
        format!("Tensor(n={}, d={})", self.inner.n(), self.inner.d())
    }
}

/// Points, weights and reconstruction residual of one decomposition.
#[pyclass(name = "Decomposition")]
struct PyDecomposition {
    #[pyo3(get)]
    points: Vec<Vec<Complex64>>,
    #[pyo3(get)]
    weights: Vec<Complex64>,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    certificate: Option<String>,
}

impl PyDecomposition {
    fn build(phi: &waring::SymTensor, dec: &Decomposition, cert: Option<String>) -> Self {
        let points = (0..dec.size())
            .map(|i| {
                (0..=dec.points.n())
                    .map(|j| {
                        let v = dec.points.mat[(i, j)];
                        Complex64::new(v.re, v.im)
                    })
                    .collect()
            })
            .collect();
        let weights = dec
            .weights
            .iter()
            .map(|w| Complex64::new(w.re, w.im))
            .collect();
        PyDecomposition {
            points,
            weights,
            residual: reconstruction_residual(phi, dec),
            certificate: cert,
        }
    }
}

#[pymethods]
impl PyDecomposition {
    fn __len__(&self) -> usize {
        self.points.len()
    }

    fn to_text(&self) -> String {
        let rows: Vec<Vec<waring::C64>> = self
            .points
            .iter()
            .map(|p| p[1..].iter().map(|z| c(z.re, z.im)).collect())
            .collect();
        let dec = Decomposition {
            points: PointSet::from_affine(&rows),
            weights: self.weights.iter().map(|z| c(z.re, z.im)).collect(),
        };
        io::write_decomposition(&dec)
    }
}

/// Order-4 linear-extension decomposition (with certificate); odd orders and
/// binary tensors are routed to their own paths.
#[pyfunction]
#[pyo3(signature = (tensor, seed = 0, tol = 1e-8))]
fn decompose(tensor: &PyTensor, seed: u64, tol: f64) -> PyResult<PyDecomposition> {
    let phi = &tensor.inner;
    if phi.n() == 1 {
        let ranks = tensor::hilbert_function(phi, 0.0);
        let lower = ranks.iter().copied().max().unwrap_or(0);
        let mut last = Error::Defective;
        for s in lower..=(phi.d() as usize + 1) {
            match binary_decompose(phi, s, BinaryParams::Seed(seed), tol) {
                Ok(dec) => return Ok(PyDecomposition::build(phi, &dec, None)),
                Err(e) => last = e,
            }
        }
        return Err(to_py_err(last));
    }
    if phi.d() % 2 == 1 {
        let dec = jennrich::jennrich_decompose(phi, seed, tol).map_err(to_py_err)?;
        return Ok(PyDecomposition::build(phi, &dec, None));
    }
    let (dec, cert) = linsys::decompose4(phi, seed, tol).map_err(to_py_err)?;
    Ok(PyDecomposition::build(phi, &dec, Some(cert.to_string())))
}

/// Simultaneous-diagonalization decomposition.
#[pyfunction]
#[pyo3(signature = (tensor, seed = 0, tol = 1e-8))]
fn jennrich_path(tensor: &PyTensor, seed: u64, tol: f64) -> PyResult<PyDecomposition> {
    let dec = jennrich::jennrich_decompose(&tensor.inner, seed, tol).map_err(to_py_err)?;
    Ok(PyDecomposition::build(&tensor.inner, &dec, None))
}

/// Monomial decomposition; `seed=None` selects the roots-of-unity canonical
/// decomposition.
#[pyfunction]
#[pyo3(signature = (degrees, seed = None))]
fn monomial_decompose(degrees: Vec<u32>, seed: Option<u64>) -> PyResult<PyDecomposition> {
    let spec = MonomialSpec::new(degrees).map_err(to_py_err)?;
    let choice = match seed {
        None => ParamChoice::Canonical,
        Some(s) => ParamChoice::Seed(s),
    };
    let dec = monomial::monomial_decompose(&spec, choice).map_err(to_py_err)?;
    let phi = spec.tensor();
    Ok(PyDecomposition::build(&phi, &dec, None))
}

#[pyfunction]
fn monomial_rank(degrees: Vec<u32>) -> PyResult<usize> {
    Ok(monomial::monomial_rank(
        &MonomialSpec::new(degrees).map_err(to_py_err)?,
    ))
}

/// Dimension of the space of minimal decompositions of a monomial.
#[pyfunction]
fn monomial_decomposition_dimension(degrees: Vec<u32>) -> PyResult<usize> {
    monomial::vsp_dimension(&MonomialSpec::new(degrees).map_err(to_py_err)?).map_err(to_py_err)
}

/// Finite-field full-column-rank check; returns `(verdict, rank, columns)`
/// with verdict one of "full_column_rank", "deficient",
/// "not_enough_equations".
#[pyfunction]
#[pyo3(signature = (n, r, prime = ff::DEFAULT_PRIME, seed = 0))]
fn verify_format(n: usize, r: usize, prime: u64, seed: u64) -> PyResult<(String, usize, usize)> {
    match ff::verify_format(n, r, prime, PointSource::Seed(seed)).map_err(to_py_err)? {
        FormatVerdict::FullColumnRank(cert) => {
            Ok(("full_column_rank".into(), cert.rank, cert.columns))
        }
        FormatVerdict::Deficient { rank, columns } => Ok(("deficient".into(), rank, columns)),
        FormatVerdict::NotEnoughEquations { rows, columns } => {
            Ok(("not_enough_equations".into(), rows, columns))
        }
    }
}

/// `(|Y|, |E1|)` at the full stratum of the given depth.
#[pyfunction]
fn count_y_e1(n: usize, c: usize) -> PyResult<(u64, u64)> {
    linsys::count_y_e1(n, c).map_err(to_py_err)
}

#[pyfunction]
fn tstar() -> f64 {
    linsys::tstar()
}

#[pyfunction]
fn count_threshold(t: f64) -> PyResult<usize> {
    linsys::count_threshold(t).map_err(to_py_err)
}

#[pymodule]
fn waring_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTensor>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(jennrich_path, m)?)?;
    m.add_function(wrap_pyfunction!(monomial_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(monomial_rank, m)?)?;
    m.add_function(wrap_pyfunction!(monomial_decomposition_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(verify_format, m)?)?;
    m.add_function(wrap_pyfunction!(count_y_e1, m)?)?;
    m.add_function(wrap_pyfunction!(tstar, m)?)?;
    m.add_function(wrap_pyfunction!(count_threshold, m)?)?;
    Ok(())
}
