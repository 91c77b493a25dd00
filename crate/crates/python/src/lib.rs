//! Python bindings. Matrices cross the boundary as lists of rows; a matrix
//! is complex as soon as one entry has a non-zero imaginary part.

use jordan_angles::grassmann::{self, Subspace};
use jordan_angles::harness::{self, Space, TrialConfig};
use jordan_angles::metrics::{self, HCurve};
use jordan_angles::noncompact::{self, BallPoint, PosDefPoint};
use jordan_angles::norms::NormSpec;
use jordan_angles::weyl::{self, ConvexTerm, Group};
use jordan_angles::{Error, Field, Matrix, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Convergence { .. } | Error::NumericalConsistency(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix_from_rows(rows: Vec<Vec<C64>>) -> PyResult<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    let data: Vec<C64> = rows.into_iter().flatten().collect();
    let field = if data.iter().all(|z| z.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    };
    Matrix::new(r, c, field, data).map_err(to_py)
}

fn matrix_to_py(py: Python<'_>, a: &Matrix) -> PyResult<Py<PyAny>> {
    let rows = (0..a.rows()).map(|i| (0..a.cols()).map(move |j| a[(i, j)]));
    Ok(match a.field() {
        Field::Real => rows
            .map(|row| row.map(|z| z.re).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .into_pyobject(py)?
            .into_any()
            .unbind(),
        Field::Complex => rows
            .map(|row| row.collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .into_pyobject(py)?
            .into_any()
            .unbind(),
    })
}

/// Round-trips a serializable value through JSON into Python objects.
fn to_python_value<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_norm(spec: &str) -> PyResult<NormSpec> {
    spec.parse().map_err(to_py)
}

fn parse_group(signed: bool) -> Group {
    if signed {
        Group::Signed
    } else {
        Group::PermutationOnly
    }
}

/// `(weight, permutation, signs)` per convex term.
type Terms = Vec<(f64, Vec<usize>, Vec<i8>)>;

fn terms_to_py(terms: &[ConvexTerm]) -> Terms {
    terms
        .iter()
        .map(|t| (t.weight, t.element.permutation().to_vec(), t.element.signs().to_vec()))
        .collect()
}

/// A `p`-dimensional subspace of `F^{p+q}`, stored by an orthonormal frame.
#[pyclass(name = "Subspace", frozen, from_py_object, module = "jordan_angles_py")]
#[derive(Clone)]
struct PySubspace(Subspace);

#[pymethods]
impl PySubspace {
    /// Orthonormalizes the columns of `basis`.
    #[new]
    fn new(basis: Vec<Vec<C64>>) -> PyResult<Self> {
        Subspace::from_basis(&matrix_from_rows(basis)?)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }

    #[getter]
    fn is_complex(&self) -> bool {
        self.0.field() == Field::Complex
    }

    fn frame(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        matrix_to_py(py, self.0.frame())
    }

    fn projector(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        matrix_to_py(py, &self.0.projector())
    }

    /// Image under an invertible `(p+q)×(p+q)` matrix.
    fn transform(&self, g: Vec<Vec<C64>>) -> PyResult<Self> {
        self.0.transform(&matrix_from_rows(g)?).map(Self).map_err(to_py)
    }

    /// Frobenius distance between the orthogonal projectors.
    fn span_distance(&self, other: &PySubspace) -> f64 {
        self.0.span_distance(&other.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "Subspace(dim={}, ambient_dim={}, complex={})",
            self.0.dim(),
            self.0.ambient_dim(),
            self.is_complex()
        )
    }
}

/// Constant-speed curve of minimal length between two subspaces.
#[pyclass(name = "HCurve", frozen, module = "jordan_angles_py")]
struct PyHCurve(HCurve);

#[pymethods]
impl PyHCurve {
    #[new]
    fn new(l: &PySubspace, m: &PySubspace) -> PyResult<Self> {
        metrics::hcurve_between(&l.0, &m.0).map(Self).map_err(to_py)
    }

    #[getter]
    fn invariants(&self) -> Vec<f64> {
        self.0.invariants().to_vec()
    }

    fn at(&self, s: f64) -> PyResult<PySubspace> {
        metrics::hcurve_eval(&self.0, s).map(PySubspace).map_err(to_py)
    }

    fn sufficiently_near(&self, s: f64, t: f64) -> bool {
        self.0.sufficiently_near(s, t)
    }
}

/// Jordan angles of `(l, m)`, increasing. `route` is `jordan` or `projector`.
#[pyfunction(name = "jordan_angles")]
#[pyo3(signature = (l, m, route = "jordan"))]
fn subspace_angles(l: &PySubspace, m: &PySubspace, route: &str) -> PyResult<Vec<f64>> {
    let angles = match route {
        "jordan" => grassmann::jordan_angles(&l.0, &m.0),
        "projector" => grassmann::projector_angles(&l.0, &m.0),
        other => return Err(PyValueError::new_err(format!("unknown route {other:?}"))),
    };
    angles.map(|a| a.into_inner()).map_err(to_py)
}

/// Jordan angles between the column spans of two arbitrary bases.
#[pyfunction]
fn angles_from_bases(a: Vec<Vec<C64>>, b: Vec<Vec<C64>>) -> PyResult<Vec<f64>> {
    grassmann::angles_from_bases(&matrix_from_rows(a)?, &matrix_from_rows(b)?)
        .map(|a| a.into_inner())
        .map_err(to_py)
}

/// Invariant distance for a norm spec such as `l2`, `ky-fan:2` or
/// `custom:1,0.5;1,1`.
#[pyfunction]
#[pyo3(signature = (l, m, norm = "l2"))]
fn distance(l: &PySubspace, m: &PySubspace, norm: &str) -> PyResult<f64> {
    metrics::distance(&l.0, &m.0, &parse_norm(norm)?).map_err(to_py)
}

/// Length of a piecewise path under the Finsler metric of `norm`.
#[pyfunction]
#[pyo3(signature = (path, norm = "l2"))]
fn finsler_length(path: Vec<PySubspace>, norm: &str) -> PyResult<f64> {
    let path: Vec<Subspace> = path.into_iter().map(|s| s.0).collect();
    metrics::finsler_length(&path, &parse_norm(norm)?).map_err(to_py)
}

/// Triangle inclusion report as a dict.
#[pyfunction]
#[pyo3(signature = (l, m, n, certificate = false))]
fn triangle_check(
    py: Python<'_>,
    l: &PySubspace,
    m: &PySubspace,
    n: &PySubspace,
    certificate: bool,
) -> PyResult<Py<PyAny>> {
    let report = metrics::triangle_check(&l.0, &m.0, &n.0, certificate).map_err(to_py)?;
    to_python_value(py, &report)
}

/// Signed margin of `x` against the hull of the orbit of `psi`.
#[pyfunction]
#[pyo3(signature = (x, psi, signed = true))]
fn majorization_slack(x: Vec<f64>, psi: Vec<f64>, signed: bool) -> f64 {
    weyl::majorization_slack(&x, &psi, parse_group(signed))
}

/// `(inside, slack, certificate)` where the certificate lists
/// `(weight, permutation, signs)` terms.
#[pyfunction]
#[pyo3(signature = (x, psi, signed = true, certificate = true))]
fn orbit_membership(
    x: Vec<f64>,
    psi: Vec<f64>,
    signed: bool,
    certificate: bool,
) -> PyResult<(bool, f64, Option<Terms>)> {
    let res = weyl::orbit_membership(&x, &psi, parse_group(signed), certificate).map_err(to_py)?;
    Ok((res.inside, res.slack, res.certificate.as_deref().map(terms_to_py)))
}

/// Convex combination of permutation matrices; `signed` decomposes a
/// quasistochastic matrix over signed permutations instead.
#[pyfunction]
#[pyo3(signature = (matrix, signed = false))]
fn decompose(matrix: Vec<Vec<C64>>, signed: bool) -> PyResult<Terms> {
    let a = matrix_from_rows(matrix)?;
    let terms = if signed {
        weyl::quasistochastic_decompose(&a)
    } else {
        weyl::birkhoff_decompose(&a)
    };
    terms.map(|t| terms_to_py(&t)).map_err(to_py)
}

/// Angles between positive-definite matrices, decreasing.
#[pyfunction]
fn posdef_angles(l: Vec<Vec<C64>>, m: Vec<Vec<C64>>) -> PyResult<Vec<f64>> {
    let l = PosDefPoint::new(matrix_from_rows(l)?).map_err(to_py)?;
    let m = PosDefPoint::new(matrix_from_rows(m)?).map_err(to_py)?;
    noncompact::posdef_angles(&l, &m).map_err(to_py)
}

/// Angles between symmetric points of the matrix ball, increasing.
#[pyfunction]
fn ball_angles(t: Vec<Vec<C64>>, s: Vec<Vec<C64>>) -> PyResult<Vec<f64>> {
    let t = BallPoint::new(matrix_from_rows(t)?).map_err(to_py)?;
    let s = BallPoint::new(matrix_from_rows(s)?).map_err(to_py)?;
    noncompact::ball_angles(&t, &s).map_err(to_py)
}

/// Seeded randomized check run; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (space, trials, seed, p = 3, q = 4, n = 3, certificates = false))]
#[allow(clippy::too_many_arguments)]
fn fuzz(
    py: Python<'_>,
    space: &str,
    trials: usize,
    seed: u64,
    p: usize,
    q: usize,
    n: usize,
    certificates: bool,
) -> PyResult<Py<PyAny>> {
    let space: Space = space.parse().map_err(to_py)?;
    let mut cfg = TrialConfig::new(space, trials, seed);
    cfg.p = p;
    cfg.q = q;
    cfg.n = n;
    cfg.certificates = certificates;
    let report = py
        .detach(|| harness::run_trials(&cfg))
        .map_err(to_py)?;
    to_python_value(py, &report)
}

#[pymodule]
pub fn jordan_angles_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySubspace>()?;
    m.add_class::<PyHCurve>()?;
    m.add_function(wrap_pyfunction!(subspace_angles, m)?)?;
    m.add_function(wrap_pyfunction!(angles_from_bases, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(finsler_length, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_check, m)?)?;
    m.add_function(wrap_pyfunction!(majorization_slack, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_membership, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(posdef_angles, m)?)?;
    m.add_function(wrap_pyfunction!(ball_angles, m)?)?;
    m.add_function(wrap_pyfunction!(fuzz, m)?)?;
    Ok(())
}
