//! Python bindings for `aip-core`.

use aip_core::classical;
use aip_core::estimator::{self, EstimatorConfig, PointEstimate};
use aip_core::geometry::{hausdorff_distance, intersection_area, AffineMap};
use aip_core::symmetry::{automorphism_group, fixed_points, FixedSet, SymmetryReport};
use aip_core::{AipError, ConvexPolygon, Point, UnimodularMap};
use nalgebra::{Matrix2, Vector2};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(aip, AipException, PyValueError);
create_exception!(aip, DegenerateWeightsError, AipException);

fn to_py(e: AipError) -> PyErr {
    match e {
        AipError::DegenerateWeights { .. } => DegenerateWeightsError::new_err(e.to_string()),
        _ => AipException::new_err(e.to_string()),
    }
}

fn pt(p: (f64, f64)) -> Point {
    Point::new(p.0, p.1)
}

/// A convex polygon in canonical counter-clockwise form.
#[pyclass(name = "Polygon", module = "aip", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPolygon {
    inner: ConvexPolygon,
}

#[pymethods]
impl PyPolygon {
    /// Convex hull of the given points.
    #[new]
    fn new(points: Vec<(f64, f64)>) -> PyResult<Self> {
        ConvexPolygon::from_xy(&points).map(|inner| Self { inner }).map_err(to_py)
    }

    #[getter]
    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices().iter().map(|p| (p.x, p.y)).collect()
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    fn centroid(&self) -> (f64, f64) {
        let c = self.inner.centroid();
        (c.x, c.y)
    }

    /// Returns `(P / s, s)` with `s` the square root of the area.
    fn normalize_to_unit_area(&self) -> (Self, f64) {
        let (inner, s) = self.inner.normalize_to_unit_area();
        (Self { inner }, s)
    }

    /// Image under `p ↦ A p + t`, with `A` given row-major.
    #[pyo3(signature = (matrix, translation = (0.0, 0.0)))]
    fn apply_affine(&self, matrix: [[f64; 2]; 2], translation: (f64, f64)) -> PyResult<Self> {
        let a = Matrix2::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1]);
        let map = AffineMap::new(a, Vector2::new(translation.0, translation.1));
        self.inner.apply_affine(&map).map(|inner| Self { inner }).map_err(to_py)
    }

    fn contains(&self, point: (f64, f64)) -> bool {
        self.inner.contains(&pt(point))
    }

    fn intersection_area(&self, other: &PyPolygon) -> f64 {
        intersection_area(&self.inner, &other.inner)
    }

    fn hausdorff_distance(&self, other: &PyPolygon) -> f64 {
        hausdorff_distance(&self.inner, &other.inner).value()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Polygon({:?})", self.vertices())
    }
}

/// Result of a `T_k` estimate.
#[pyclass(name = "Estimate", module = "aip", frozen, get_all)]
struct PyEstimate {
    value: (f64, f64),
    std_error: (f64, f64),
    ess: f64,
    r_stability: f64,
    hits: usize,
    samples: usize,
}

impl From<PointEstimate> for PyEstimate {
    fn from(e: PointEstimate) -> Self {
        Self {
            value: (e.value[0], e.value[1]),
            std_error: (e.std_error[0], e.std_error[1]),
            ess: e.ess,
            r_stability: e.r_stability,
            hits: e.hits,
            samples: e.samples,
        }
    }
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(value={:?}, std_error={:?}, ess={:.1}, r_stability={:.3e})",
            self.value, self.std_error, self.ess, self.r_stability
        )
    }
}

/// Affine automorphism group summary.
#[pyclass(name = "SymmetryReport", module = "aip", frozen)]
struct PySymmetryReport {
    inner: SymmetryReport,
}

#[pymethods]
impl PySymmetryReport {
    #[getter]
    fn order(&self) -> usize {
        self.inner.order
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.to_string()
    }

    /// `("whole-plane",)`, `("line", point, direction)` or `("single-point", point)`.
    #[getter]
    fn fixed_set<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let obj = match self.inner.fixed_set {
            FixedSet::WholePlane => ("whole-plane",).into_pyobject(py)?.into_any(),
            FixedSet::SinglePoint(p) => ("single-point", (p.x, p.y)).into_pyobject(py)?.into_any(),
            FixedSet::Line { point, direction } => {
                ("line", (point.x, point.y), (direction.x, direction.y)).into_pyobject(py)?.into_any()
            }
        };
        Ok(obj)
    }

    fn contains(&self, probe: (f64, f64)) -> bool {
        fixed_points(&self.inner, &pt(probe))
    }

    fn to_json(&self) -> String {
        self.inner.to_json_value().to_string()
    }

    fn __repr__(&self) -> String {
        format!("SymmetryReport(order={}, kind={})", self.inner.order, self.inner.kind)
    }
}

#[pyfunction]
fn centroid(p: &PyPolygon) -> (f64, f64) {
    p.centroid()
}

#[pyfunction]
fn john_center(p: &PyPolygon) -> PyResult<(f64, f64)> {
    let c = classical::john_center(&p.inner).map_err(to_py)?;
    Ok((c.x, c.y))
}

#[pyfunction]
fn symmetry(p: &PyPolygon) -> PySymmetryReport {
    PySymmetryReport { inner: automorphism_group(&p.inner) }
}

#[allow(clippy::too_many_arguments)]
fn config(k: u32, samples: usize, radius: f64, seed: u64, rounds: u32, threads: Option<usize>) -> EstimatorConfig {
    EstimatorConfig { k, samples, radius, seed, r_doubling_rounds: rounds, threads, ..Default::default() }
}

/// Estimates `T_{k,K,v}(L)` for a unit-area `K` and any `L`.
#[pyfunction]
#[pyo3(signature = (k_body, anchor, l_body, *, k = 8, samples = 200_000, radius = 16.0, seed = 0, rounds = 1, threads = None))]
#[allow(clippy::too_many_arguments)]
fn estimate_tk(
    py: Python<'_>,
    k_body: &PyPolygon,
    anchor: (f64, f64),
    l_body: &PyPolygon,
    k: u32,
    samples: usize,
    radius: f64,
    seed: u64,
    rounds: u32,
    threads: Option<usize>,
) -> PyResult<PyEstimate> {
    let cfg = config(k, samples, radius, seed, rounds, threads);
    let (kb, lb) = (k_body.inner.clone(), l_body.inner.clone());
    py.detach(|| estimator::estimate_tk(&kb, &pt(anchor), &lb, &cfg))
        .map(PyEstimate::from)
        .map_err(to_py)
}

/// `[(k, value, std_error, distance to anchor)]` for each `k`; the anchor
/// must be fixed by every automorphism of `K`.
#[pyfunction]
#[pyo3(signature = (k_body, anchor, ks, *, samples = 200_000, radius = 16.0, seed = 0, rounds = 1, threads = None))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn convergence_sweep(
    py: Python<'_>,
    k_body: &PyPolygon,
    anchor: (f64, f64),
    ks: Vec<u32>,
    samples: usize,
    radius: f64,
    seed: u64,
    rounds: u32,
    threads: Option<usize>,
) -> PyResult<Vec<(u32, (f64, f64), (f64, f64), f64)>> {
    let cfg = config(8, samples, radius, seed, rounds, threads);
    let kb = k_body.inner.clone();
    let rows = py.detach(|| estimator::convergence_sweep(&kb, &pt(anchor), &ks, &cfg)).map_err(to_py)?;
    Ok(rows
        .iter()
        .map(|r| {
            let e = &r.estimate;
            (r.k, (e.value[0], e.value[1]), (e.std_error[0], e.std_error[1]), r.err_to_anchor)
        })
        .collect())
}

/// `∫ fᵏ g / ∫ fᵏ` over `domain` by adaptive quadrature.
#[pyfunction]
fn power_ratio_limit(f: Bound<'_, PyAny>, g: Bound<'_, PyAny>, domain: (f64, f64), k: f64) -> PyResult<f64> {
    let failure: std::cell::RefCell<Option<PyErr>> = std::cell::RefCell::new(None);
    let call = |h: &Bound<'_, PyAny>, x: f64| -> f64 {
        match h.call1((x,)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let r = estimator::power_ratio_limit(|x| call(&f, x), |x| call(&g, x), domain, k);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    r.map_err(to_py)
}

/// Singular values `(λ₁, λ₂)` of a 2×2 matrix with `|det| = 1`.
#[pyfunction]
fn singular_values(matrix: [[f64; 2]; 2]) -> PyResult<(f64, f64)> {
    let m = UnimodularMap::new(Matrix2::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1])).map_err(to_py)?;
    let s = m.singular_values();
    Ok((s.lambda1, s.lambda2))
}

#[pymodule]
fn aip(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolygon>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PySymmetryReport>()?;
    m.add_function(wrap_pyfunction!(centroid, m)?)?;
    m.add_function(wrap_pyfunction!(john_center, m)?)?;
    m.add_function(wrap_pyfunction!(symmetry, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_tk, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(power_ratio_limit, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add("AipError", m.py().get_type::<AipException>())?;
    m.add("DegenerateWeightsError", m.py().get_type::<DegenerateWeightsError>())?;
    Ok(())
}
