//! Python bindings. Reports come back as plain dicts built from the library's JSON form,
//! so numbers inside them are 17-digit decimal strings.

use fermat_chabauty as fc;
use fc::chabauty::Patch;
use fc::forest::{SearchOptions, SpiralSource};
use fc::lattice::Basis2;
use fc::limits::{BetaMode, PredictionInput};
use fc::spiral::SpiralConfig;
use fc::{AngleSpec, Point2};
use num_bigint::BigInt;
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

create_exception!(fermat_chabauty, PrecisionExhausted, PyArithmeticError);
create_exception!(fermat_chabauty, NotALattice, PyValueError);

type Xy = (f64, f64);

fn err(e: fc::Error) -> PyErr {
    match e {
        fc::Error::PrecisionExhausted(_) => PrecisionExhausted::new_err(e.to_string()),
        fc::Error::NotALattice { .. } => NotALattice::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn xy(p: Point2) -> Xy {
    (p.x, p.y)
}

fn pt((x, y): Xy) -> Point2 {
    Point2::new(x, y)
}

fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "AngleSpec", frozen, skip_from_py_object, module = "fermat_chabauty")]
#[derive(Clone)]
struct PyAngle(AngleSpec);

#[pymethods]
impl PyAngle {
    /// `rat:p/q`, `quad:a,b,c,d` for (a+b√d)/c, or `dec:<digits>@<bits>`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        spec.parse().map(PyAngle).map_err(err)
    }

    #[staticmethod]
    fn golden() -> Self {
        PyAngle(AngleSpec::golden())
    }

    fn __float__(&self) -> f64 {
        self.0.to_f64()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("AngleSpec('{}')", self.0)
    }
}

#[pyclass(name = "Patch", frozen, skip_from_py_object, module = "fermat_chabauty")]
#[derive(Clone)]
struct PyPatch(Patch);

#[pymethods]
impl PyPatch {
    #[new]
    #[pyo3(signature = (points, window_radius, provenance = "python"))]
    fn new(points: Vec<Xy>, window_radius: f64, provenance: &str) -> PyResult<Self> {
        Patch::new(points.into_iter().map(pt).collect(), window_radius, provenance)
            .map(PyPatch)
            .map_err(err)
    }

    #[getter]
    fn window_radius(&self) -> f64 {
        self.0.window_radius
    }

    #[getter]
    fn points(&self) -> Vec<Xy> {
        self.0.points.iter().copied().map(xy).collect()
    }

    fn rotated(&self, angle: f64) -> Self {
        PyPatch(self.0.rotated(angle))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "Spiral", frozen, skip_from_py_object, module = "fermat_chabauty")]
struct PySpiral(fc::spiral::Spiral);

#[pymethods]
impl PySpiral {
    #[new]
    #[pyo3(signature = (alpha, n_min = 1))]
    fn new(alpha: &PyAngle, n_min: u64) -> PyResult<Self> {
        let config = SpiralConfig {
            n_min,
            ..SpiralConfig::default()
        };
        fc::spiral::Spiral::new(&alpha.0, config).map(PySpiral).map_err(err)
    }

    /// `(x, y, error_bound)` of `x_n`.
    fn point(&self, n: u64) -> PyResult<(f64, f64, f64)> {
        let p = self.0.point(n).map_err(err)?;
        Ok((p.position.x, p.position.y, p.error_bound))
    }

    fn displacement(&self, m: u64, n: u64) -> Xy {
        xy(self.0.displacement(m, n))
    }

    fn indices_in_ball(&self, center: Xy, radius: f64) -> PyResult<Vec<u64>> {
        Ok(self.0.indices_in_ball(pt(center), radius).map_err(err)?.indices)
    }

    /// `(m, offset n − m, distance)`.
    fn nearest_neighbor(&self, n: u64) -> PyResult<(u64, i64, f64)> {
        let nb = self.0.nearest_neighbor(n).map_err(err)?;
        Ok((nb.m, nb.offset, nb.distance))
    }

    /// `(X − x_n) ∩ B_W(0)` and the indices of its points.
    fn patch(&self, n: u64, window_radius: f64) -> PyResult<(PyPatch, Vec<u64>)> {
        let ep = fc::limits::empirical_limit_patch(&self.0, n, window_radius).map_err(err)?;
        Ok((PyPatch(ep.patch), ep.indices))
    }
}

/// `[(j, a_j, p_j, q_j)]`, 1-based.
#[pyfunction]
fn convergents(alpha: &PyAngle, count: usize) -> PyResult<Vec<(usize, BigInt, BigInt, BigInt)>> {
    let quotients = fc::number_theory::expand_cf(&alpha.0, count).map_err(err)?;
    let cs = fc::number_theory::convergents(&alpha.0, count).map_err(err)?;
    Ok(cs
        .into_iter()
        .zip(quotients)
        .map(|(c, a)| (c.j, a, c.p, c.q))
        .collect())
}

/// `(beta, c, ctilde)` at index `j`.
#[pyfunction]
fn triplet(alpha: &PyAngle, j: usize) -> PyResult<(f64, f64, f64)> {
    let t = fc::number_theory::triplet(&alpha.0, j).map_err(err)?;
    Ok((t.beta.value, t.c.value, t.ctilde.value))
}

/// Limit of the residue class containing `j`, for quadratic irrationals.
#[pyfunction]
fn limit_triplet(alpha: &PyAngle, j: usize) -> PyResult<(f64, f64, f64)> {
    let t = fc::number_theory::limit_triplet(&alpha.0, j).map_err(err)?;
    Ok((t.beta, t.c, t.ctilde))
}

/// Largest identity residual over `j in [lo, hi]` and whether every sign product is negative.
#[pyfunction]
fn verify_cf_identities(alpha: &PyAngle, lo: usize, hi: usize) -> PyResult<(f64, bool)> {
    let r = fc::number_theory::verify_cf_identities(&alpha.0, lo..=hi).map_err(err)?;
    Ok((r.max_residual(), r.all_signs_negative()))
}

#[pyfunction]
fn chabauty_distance(a: &PyPatch, b: &PyPatch) -> PyResult<f64> {
    fc::chabauty::chabauty_distance(&a.0, &b.0).map_err(err)
}

fn basis(v1: Xy, v2: Xy) -> PyResult<Basis2> {
    Basis2::new(pt(v1), pt(v2)).map_err(err)
}

#[pyfunction]
fn covolume(v1: Xy, v2: Xy) -> PyResult<f64> {
    fc::lattice::covolume(&basis(v1, v2)?).map_err(err)
}

#[pyfunction]
fn gauss_reduce(v1: Xy, v2: Xy) -> PyResult<(Xy, Xy)> {
    let r = fc::lattice::gauss_reduce(&basis(v1, v2)?).map_err(err)?;
    Ok((xy(r.v1()), xy(r.v2())))
}

#[pyfunction]
fn lattice_ball(v1: Xy, v2: Xy, radius: f64) -> PyResult<PyPatch> {
    fc::lattice::lattice_ball(&basis(v1, v2)?, radius).map(PyPatch).map_err(err)
}

/// `(v1, v2, residual, covolume)` of the reduced fitted basis.
#[pyfunction]
#[pyo3(signature = (patch, tol = 0.05))]
fn fit_lattice(patch: &PyPatch, tol: f64) -> PyResult<(Xy, Xy, f64, f64)> {
    let f = fc::lattice::fit_lattice(&patch.0, tol).map_err(err)?;
    Ok((xy(f.basis.v1()), xy(f.basis.v2()), f.residual, f.covolume))
}

/// Proof-form generators `(v, ṽ)`.
#[pyfunction]
#[pyo3(signature = (beta, c, ctilde, t = 1.0, theta = 0.0))]
fn predicted_basis(beta: f64, c: f64, ctilde: f64, t: f64, theta: f64) -> PyResult<(Xy, Xy)> {
    let input = PredictionInput::new(beta, c, ctilde, t, theta).map_err(err)?;
    let b = fc::limits::predicted_basis(&input).basis;
    Ok((xy(b.v1), xy(b.v2)))
}

#[pyfunction]
#[pyo3(signature = (beta, c, ctilde, t = 1.0, theta = 0.0))]
fn theorem_form_basis(beta: f64, c: f64, ctilde: f64, t: f64, theta: f64) -> PyResult<(Xy, Xy)> {
    let input = PredictionInput::new(beta, c, ctilde, t, theta).map_err(err)?;
    let b = fc::limits::theorem_form_basis(&input).basis;
    Ok((xy(b.v1), xy(b.v2)))
}

/// `[(j, n_j)]` for the limit-triplet centers.
#[pyfunction]
#[pyo3(signature = (alpha, lo, hi, t = 1.0))]
fn center_indices(alpha: &PyAngle, lo: usize, hi: usize, t: f64) -> PyResult<Vec<(usize, u64)>> {
    let s = fc::limits::center_indices(&alpha.0, t, lo..=hi, BetaMode::Limit).map_err(err)?;
    Ok(s.entries.iter().map(|e| (e.j, e.n)).collect())
}

/// Full comparison report as a dict.
#[pyfunction]
#[pyo3(signature = (alpha, lo, hi, t = 1.0, window_radius = 8.0, tol = 0.05))]
fn empirical_vs_predicted<'py>(
    py: Python<'py>,
    alpha: &PyAngle,
    lo: usize,
    hi: usize,
    t: f64,
    window_radius: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = fc::limits::empirical_vs_predicted(&alpha.0, t, lo..=hi, window_radius, tol, BetaMode::Limit).map_err(err)?;
    to_python(py, &r)
}

#[pyfunction]
#[pyo3(signature = (spiral, center, b_lo, b_hi, window_radius = 8.0, tol = 0.05))]
fn rotation_orbit<'py>(
    py: Python<'py>,
    spiral: &PySpiral,
    center: u64,
    b_lo: i64,
    b_hi: i64,
    window_radius: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = fc::limits::rotation_orbit(&spiral.0, center, b_lo..=b_hi, window_radius, tol).map_err(err)?;
    to_python(py, &r)
}

/// `(sums_checked, inverses_checked, violations)`.
#[pyfunction]
#[pyo3(signature = (patch, tol = 0.05))]
fn group_closure(patch: &PyPatch, tol: f64) -> (usize, usize, usize) {
    let c = fc::limits::group_closure(&patch.0, tol);
    (c.sums_checked, c.inverses_checked, c.violations())
}

/// Verified empty `width × length` rectangle in the spiral's `B_R(0)`, or `None`.
#[pyfunction]
fn empty_rectangle<'py>(py: Python<'py>, alpha: &PyAngle, radius: f64, width: f64, length: f64) -> PyResult<Option<Bound<'py, PyAny>>> {
    let source = SpiralSource::new(&alpha.0, radius).map_err(err)?;
    let found = fc::forest::empty_rectangle_search(&source, width, length, &SearchOptions::default()).map_err(err)?;
    match found {
        Some(w) if fc::forest::verify_empty(&source, &w.probe).map_err(err)? => Ok(Some(to_python(py, &w)?)),
        _ => Ok(None),
    }
}

/// `(packing, covering_estimate, points)` over the disc `B_r(center)`.
#[pyfunction]
#[pyo3(signature = (alpha, center, radius, grid_step = 0.1))]
fn delone_constants(alpha: &PyAngle, center: Xy, radius: f64, grid_step: f64) -> PyResult<(f64, f64, usize)> {
    let c = pt(center);
    let source = SpiralSource::new(&alpha.0, c.norm() + radius + 1.0).map_err(err)?;
    let d = fc::forest::delone_constants(&source, c, radius, grid_step).map_err(err)?;
    Ok((d.packing, d.covering_estimate, d.points))
}

#[pyfunction]
#[pyo3(signature = (r, n_min = 1))]
fn density_ratio(r: f64, n_min: u64) -> PyResult<f64> {
    Ok(fc::forest::density_ratio(r, n_min).map_err(err)?.ratio)
}

#[pymodule]
#[pyo3(name = "fermat_chabauty")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds every class, function and exception to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PrecisionExhausted", m.py().get_type::<PrecisionExhausted>())?;
    m.add("NotALattice", m.py().get_type::<NotALattice>())?;
    m.add_class::<PyAngle>()?;
    m.add_class::<PyPatch>()?;
    m.add_class::<PySpiral>()?;
    m.add_function(wrap_pyfunction!(convergents, m)?)?;
    m.add_function(wrap_pyfunction!(triplet, m)?)?;
    m.add_function(wrap_pyfunction!(limit_triplet, m)?)?;
    m.add_function(wrap_pyfunction!(verify_cf_identities, m)?)?;
    m.add_function(wrap_pyfunction!(chabauty_distance, m)?)?;
    m.add_function(wrap_pyfunction!(covolume, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_reduce, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_ball, m)?)?;
    m.add_function(wrap_pyfunction!(fit_lattice, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_basis, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_form_basis, m)?)?;
    m.add_function(wrap_pyfunction!(center_indices, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_vs_predicted, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(group_closure, m)?)?;
    m.add_function(wrap_pyfunction!(empty_rectangle, m)?)?;
    m.add_function(wrap_pyfunction!(delone_constants, m)?)?;
    m.add_function(wrap_pyfunction!(density_ratio, m)?)?;
    Ok(())
}
