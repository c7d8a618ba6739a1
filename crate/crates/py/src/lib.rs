//! Python bindings: grid functions, dyadic analysis, torus maps, symbols,
//! paradifferential operators and the paracomposition toolkit.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use paracalc_core as core;
use paracalc_core::dyadic::NormKind;
use paracalc_core::symbol::FreqFn;

fn err(e: core::CoreError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "TorusGrid", from_py_object)]
#[derive(Clone)]
struct PyTorusGrid {
    inner: core::TorusGrid,
}

#[pymethods]
impl PyTorusGrid {
    #[new]
    #[pyo3(signature = (d, j, length=None))]
    fn new(d: usize, j: u32, length: Option<f64>) -> PyResult<Self> {
        let inner = match length {
            Some(l) => core::TorusGrid::with_length(d, j, l).map_err(err)?,
            None => core::TorusGrid::new(d, j).map_err(err)?,
        };
        Ok(PyTorusGrid { inner })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn j(&self) -> u32 {
        self.inner.j()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.inner.length()
    }

    #[getter]
    fn q_max(&self) -> u32 {
        self.inner.q_max()
    }

    fn total_points(&self) -> usize {
        self.inner.total()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        (0..self.inner.total())
            .map(|i| self.inner.point(i)[..self.inner.d()].to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("TorusGrid(d={}, j={}, length={})", self.inner.d(), self.inner.j(), self.inner.length())
    }
}

#[pyclass(name = "GridFunction", from_py_object)]
#[derive(Clone)]
struct PyGridFunction {
    inner: core::GridFunction,
}

#[pymethods]
impl PyGridFunction {
    /// Build from real samples (row-major).
    #[staticmethod]
    fn from_values(grid: &PyTorusGrid, values: Vec<f64>) -> PyResult<Self> {
        Ok(PyGridFunction { inner: core::GridFunction::from_real_values(grid.inner, values).map_err(err)? })
    }

    /// Build from complex samples given as (re, im) pairs.
    #[staticmethod]
    fn from_complex_values(grid: &PyTorusGrid, values: Vec<(f64, f64)>) -> PyResult<Self> {
        let v = values.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        Ok(PyGridFunction { inner: core::GridFunction::from_values(grid.inner, v).map_err(err)? })
    }

    #[getter]
    fn grid(&self) -> PyTorusGrid {
        PyTorusGrid { inner: *self.inner.grid() }
    }

    fn values(&self) -> Vec<(f64, f64)> {
        self.inner.values().iter().map(|c| (c.re, c.im)).collect()
    }

    fn values_real(&self) -> Vec<f64> {
        self.inner.values().iter().map(|c| c.re).collect()
    }

    /// Fourier coefficients as (re, im) pairs, FFT layout.
    fn coeffs(&self) -> Vec<(f64, f64)> {
        self.inner.coeffs().iter().map(|c| (c.re, c.im)).collect()
    }

    fn is_real(&self) -> bool {
        self.inner.is_real()
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    fn add(&self, other: &PyGridFunction) -> PyResult<Self> {
        Ok(PyGridFunction { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn sub(&self, other: &PyGridFunction) -> PyResult<Self> {
        Ok(PyGridFunction { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn pointwise_mul(&self, other: &PyGridFunction) -> PyResult<Self> {
        Ok(PyGridFunction { inner: self.inner.pointwise_mul(&other.inner).map_err(err)? })
    }

    fn derivative(&self, axis: usize) -> Self {
        PyGridFunction { inner: self.inner.derivative(axis) }
    }

    fn resample(&self, j_new: u32) -> PyResult<Self> {
        Ok(PyGridFunction { inner: self.inner.resample(j_new).map_err(err)? })
    }

    /// Evaluate the trigonometric polynomial at arbitrary points.
    fn evaluate(&self, points: Vec<Vec<f64>>) -> Vec<(f64, f64)> {
        let pts: Vec<[f64; 2]> =
            points.iter().map(|p| [p.first().copied().unwrap_or(0.0), p.get(1).copied().unwrap_or(0.0)]).collect();
        core::evaluate_trig(&self.inner, &pts).iter().map(|c| (c.re, c.im)).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        let v = core::io::grid_function_to_json(&self.inner);
        core::io::to_json_string(&v).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyGridFunction { inner: core::io::grid_function_from_json(&v).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("GridFunction(d={}, j={}, real={})", self.inner.grid().d(), self.inner.grid().j(), self.inner.is_real())
    }
}

#[pyclass(name = "DyadicPartition")]
struct PyDyadicPartition {
    inner: core::DyadicPartition,
}

#[pymethods]
impl PyDyadicPartition {
    #[new]
    fn new(grid: &PyTorusGrid) -> Self {
        PyDyadicPartition { inner: core::DyadicPartition::new(grid.inner) }
    }

    #[getter]
    fn q_max(&self) -> u32 {
        self.inner.q_max()
    }

    fn low_pass(&self, f: &PyGridFunction, k: u32) -> PyGridFunction {
        PyGridFunction { inner: self.inner.low_pass(&f.inner, k) }
    }

    fn block(&self, f: &PyGridFunction, q: u32) -> PyGridFunction {
        PyGridFunction { inner: self.inner.block(&f.inner, q) }
    }

    /// Per-block (sup, l2) norms.
    fn block_norms(&self, f: &PyGridFunction) -> PyResult<Vec<(f64, f64)>> {
        let dec = self.inner.decompose(&f.inner).map_err(err)?;
        Ok(dec.sup_norms.iter().zip(dec.l2_norms.iter()).map(|(&s, &l)| (s, l)).collect())
    }
}

#[pyclass(name = "TorusMap", from_py_object)]
#[derive(Clone)]
struct PyTorusMap {
    inner: core::TorusMap,
}

#[pymethods]
impl PyTorusMap {
    /// Build from the periodic displacement, one component per axis.
    #[new]
    fn new(g: Vec<PyGridFunction>) -> PyResult<Self> {
        let comps = g.into_iter().map(|f| f.inner).collect();
        Ok(PyTorusMap { inner: core::TorusMap::new(comps).map_err(err)? })
    }

    #[staticmethod]
    fn identity(grid: &PyTorusGrid) -> Self {
        PyTorusMap { inner: core::TorusMap::identity(grid.inner) }
    }

    #[getter]
    fn is_diffeo(&self) -> bool {
        self.inner.is_diffeo()
    }

    #[getter]
    fn min_jac(&self) -> f64 {
        self.inner.min_jac()
    }

    fn displacement(&self, axis: usize) -> PyGridFunction {
        PyGridFunction { inner: self.inner.displacement()[axis].clone() }
    }

    fn apply_point(&self, p: Vec<f64>) -> Vec<f64> {
        let q = self.inner.apply_point([p.first().copied().unwrap_or(0.0), p.get(1).copied().unwrap_or(0.0)]);
        q[..self.inner.grid().d()].to_vec()
    }

    fn to_json(&self) -> PyResult<String> {
        let v = core::io::torus_map_to_json(&self.inner);
        core::io::to_json_string(&v).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyTorusMap { inner: core::io::torus_map_from_json(&v).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("TorusMap(d={}, j={}, is_diffeo={})", self.inner.grid().d(), self.inner.grid().j(), self.inner.is_diffeo())
    }
}

#[pyclass(name = "Symbol", from_py_object)]
#[derive(Clone)]
struct PySymbol {
    inner: core::Symbol,
}

fn parse_m_expr(expr: &str) -> PyResult<(FreqFn, f64)> {
    if expr == "one" {
        return Ok((FreqFn::one(), 0.0));
    }
    if expr == "ixi" {
        return Ok((FreqFn::i_xi(0), 1.0));
    }
    if let Some(p) = expr.strip_prefix("abs^") {
        let p: f64 = p.parse().map_err(|_| PyValueError::new_err("bad multiplier power"))?;
        return Ok((FreqFn::abs_pow(p), p));
    }
    if let Some(p) = expr.strip_prefix("japanese^") {
        let p: f64 = p.parse().map_err(|_| PyValueError::new_err("bad multiplier power"))?;
        return Ok((FreqFn::japanese_pow(p), p));
    }
    Err(PyValueError::new_err(format!("unknown multiplier \"{expr}\" (use one, ixi, abs^p, japanese^p)")))
}

#[pymethods]
impl PySymbol {
    /// Frequency multiplier symbol: expr in {one, ixi, abs^p, japanese^p}.
    #[staticmethod]
    #[pyo3(signature = (expr, d=1, rho=1.5))]
    fn multiplier(expr: &str, d: usize, rho: f64) -> PyResult<Self> {
        let (m, order) = parse_m_expr(expr)?;
        Ok(PySymbol { inner: core::Symbol::multiplier(d, order, rho, m) })
    }

    /// Symbol depending on x only.
    #[staticmethod]
    #[pyo3(signature = (b, rho=1.5))]
    fn x_function(b: &PyGridFunction, rho: f64) -> Self {
        PySymbol { inner: core::Symbol::x_function(b.inner.clone(), rho) }
    }

    /// Rank-one symbol b(x) m(xi).
    #[staticmethod]
    #[pyo3(signature = (b, expr, rho=1.5))]
    fn product(b: &PyGridFunction, expr: &str, rho: f64) -> PyResult<Self> {
        let (m, order) = parse_m_expr(expr)?;
        Ok(PySymbol { inner: core::Symbol::rank1(b.inner.clone(), m, order, rho) })
    }

    #[getter]
    fn order(&self) -> f64 {
        self.inner.order
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    fn eval(&self, x: Vec<f64>, xi: Vec<f64>) -> (f64, f64) {
        let v = self.inner.eval(&x, &xi);
        (v.re, v.im)
    }

    fn sharp(&self, other: &PySymbol, rho: f64) -> PyResult<Self> {
        Ok(PySymbol { inner: core::symbol::sharp_product(&self.inner, &other.inner, rho).map_err(err)? })
    }

    fn adjoint(&self, rho: f64) -> PyResult<Self> {
        Ok(PySymbol { inner: core::adjoint_symbol(&self.inner, rho).map_err(err)? })
    }

    fn pullback(&self, chi: &PyTorusMap) -> PyResult<Self> {
        Ok(PySymbol { inner: core::pullback_symbol(&self.inner, &chi.inner).map_err(err)? })
    }

    fn seminorm(&self, m: f64, rho: f64, grid: &PyTorusGrid) -> f64 {
        core::seminorm(&self.inner, m, rho, &grid.inner)
    }
}

#[pyfunction]
fn weierstrass(sigma: f64, k_terms: u32, grid: &PyTorusGrid, seed: u64) -> PyResult<PyGridFunction> {
    Ok(PyGridFunction { inner: core::generate::weierstrass(sigma, k_terms, grid.inner, seed).map_err(err)? })
}

#[pyfunction]
fn sobolev_series(s: f64, grid: &PyTorusGrid, seed: u64) -> PyGridFunction {
    PyGridFunction { inner: core::generate::sobolev_series(s, grid.inner, seed) }
}

#[pyfunction]
fn torus_diffeo(rho: f64, eps: f64, k_terms: u32, grid: &PyTorusGrid, seed: u64) -> PyResult<PyTorusMap> {
    Ok(PyTorusMap { inner: core::generate::torus_diffeo(rho, eps, k_terms, grid.inner, seed).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (width, center, grid))]
fn bump(width: f64, center: Vec<f64>, grid: &PyTorusGrid) -> PyGridFunction {
    let c = [center.first().copied().unwrap_or(0.0), center.get(1).copied().unwrap_or(0.0)];
    PyGridFunction { inner: core::generate::bump(width, c, grid.inner) }
}

#[pyfunction]
fn zygmund_norm(f: &PyGridFunction, r: f64, part: &PyDyadicPartition) -> f64 {
    core::zygmund_norm(&f.inner, r, &part.inner)
}

#[pyfunction]
fn sobolev_norm(f: &PyGridFunction, s: f64, part: &PyDyadicPartition) -> f64 {
    core::sobolev_norm(&f.inner, s, &part.inner)
}

fn report_to_dict<'py>(py: Python<'py>, rep: &core::RegularityReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("exponent", rep.exponent)?;
    d.set_item("norm_kind", rep.norm_kind.to_string())?;
    d.set_item("fit_range", rep.fit_range.to_vec())?;
    d.set_item("residual", rep.residual)?;
    d.set_item("degenerate", rep.degenerate)?;
    let blocks = PyList::empty(py);
    for b in &rep.blocks {
        let item = PyDict::new(py);
        item.set_item("q", b.q)?;
        item.set_item("sup", b.sup)?;
        item.set_item("l2", b.l2)?;
        blocks.append(item)?;
    }
    d.set_item("blocks", blocks)?;
    Ok(d)
}

/// Least-squares block-decay fit; returns a report dict.
#[pyfunction]
#[pyo3(signature = (f, part, norm="zygmund", q_min=1, q_max=None))]
fn fit_regularity<'py>(
    py: Python<'py>,
    f: &PyGridFunction,
    part: &PyDyadicPartition,
    norm: &str,
    q_min: u32,
    q_max: Option<u32>,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = match norm {
        "zygmund" => NormKind::Zygmund,
        "sobolev" => NormKind::Sobolev,
        other => return Err(PyValueError::new_err(format!("unknown norm kind \"{other}\""))),
    };
    let dec = part.inner.decompose(&f.inner).map_err(err)?;
    let hi = q_max.unwrap_or(part.inner.q_max().saturating_sub(1).max(2));
    let rep = core::fit_regularity(&dec, kind, q_min, hi).map_err(err)?;
    report_to_dict(py, &rep)
}

#[pyfunction]
fn paraproduct(a: &PyGridFunction, u: &PyGridFunction, part: &PyDyadicPartition) -> PyResult<PyGridFunction> {
    Ok(PyGridFunction { inner: core::paraproduct(&a.inner, &u.inner, &part.inner).map_err(err)? })
}

/// Apply T_a: the factored fast path when a rank decomposition is present,
/// otherwise the direct reference quantization.
#[pyfunction]
#[pyo3(signature = (a, u, n0=3))]
fn paradiff_apply(a: &PySymbol, u: &PyGridFunction, n0: u32) -> PyResult<PyGridFunction> {
    let part = core::DyadicPartition::new(*u.inner.grid());
    let psi = core::AdmissibleCutoff::new(&part, n0).map_err(err)?;
    let out = if a.inner.rank_terms().is_some() {
        core::paradiff_apply_lowrank(&a.inner, &u.inner, &psi).map_err(err)?
    } else {
        core::paradiff_apply_direct(&a.inner, &u.inner, &psi).map_err(err)?
    };
    Ok(PyGridFunction { inner: out })
}

#[pyfunction]
#[pyo3(signature = (u, chi, part, n=None, alinhac=false))]
fn paracompose(
    u: &PyGridFunction,
    chi: &PyTorusMap,
    part: &PyDyadicPartition,
    n: Option<u32>,
    alinhac: bool,
) -> PyResult<PyGridFunction> {
    let out = if alinhac {
        core::paracompose_alinhac(&u.inner, &chi.inner, &part.inner, n).map_err(err)?
    } else {
        core::paracompose_new(&u.inner, &chi.inner, &part.inner, n).map_err(err)?
    };
    Ok(PyGridFunction { inner: out })
}

/// Full paralinearization; returns a dict with the components, the residual
/// and the per-remainder reports.
#[pyfunction]
fn paralinearize<'py>(
    py: Python<'py>,
    u: &PyGridFunction,
    chi: &PyTorusMap,
    part: &PyDyadicPartition,
) -> PyResult<Bound<'py, PyDict>> {
    let res = core::paralinearize(&u.inner, &chi.inner, &part.inner).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("chi_star_u", PyGridFunction { inner: res.chi_star_u }.into_pyobject(py)?)?;
    d.set_item("t_term", PyGridFunction { inner: res.t_term }.into_pyobject(py)?)?;
    d.set_item("r0", PyGridFunction { inner: res.r0 }.into_pyobject(py)?)?;
    d.set_item("r1", PyGridFunction { inner: res.r1 }.into_pyobject(py)?)?;
    d.set_item("r2", PyGridFunction { inner: res.r2 }.into_pyobject(py)?)?;
    d.set_item("bookkeeping", PyGridFunction { inner: res.bookkeeping }.into_pyobject(py)?)?;
    d.set_item("residual", res.residual)?;
    d.set_item("n_used", res.n_used)?;
    let reports = PyDict::new(py);
    for (name, rep) in &res.reports {
        match rep {
            Some(r) => reports.set_item(name, report_to_dict(py, r)?)?,
            None => reports.set_item(name, py.None())?,
        }
    }
    d.set_item("reports", reports)?;
    Ok(d)
}

#[pyfunction]
fn functorial_defect(
    u: &PyGridFunction,
    chi: &PyTorusMap,
    chitilde: &PyTorusMap,
    part: &PyDyadicPartition,
) -> PyResult<PyGridFunction> {
    Ok(PyGridFunction {
        inner: core::functorial_defect(&u.inner, &chi.inner, &chitilde.inner, &part.inner).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (a, u, chi, part, n0=3))]
fn conjugation_defect(
    a: &PySymbol,
    u: &PyGridFunction,
    chi: &PyTorusMap,
    part: &PyDyadicPartition,
    n0: u32,
) -> PyResult<PyGridFunction> {
    let psi = core::AdmissibleCutoff::new(&part.inner, n0).map_err(err)?;
    Ok(PyGridFunction {
        inner: core::conjugation_defect(&a.inner, &u.inner, &chi.inner, &part.inner, &psi).map_err(err)?,
    })
}

#[pyfunction]
fn select_n(chi: &PyTorusMap, part: &PyDyadicPartition) -> u32 {
    core::select_n(&chi.inner, &part.inner)
}

/// Probe the order of T_a built from a symbol; returns a dict.
#[pyfunction]
#[pyo3(signature = (a, part, seed=7, n0=3))]
fn probe_symbol_order<'py>(
    py: Python<'py>,
    a: &PySymbol,
    part: &PyDyadicPartition,
    seed: u64,
    n0: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let psi = core::AdmissibleCutoff::new(&part.inner, n0).map_err(err)?;
    let rank = a.inner.rank_terms().is_some();
    let result = core::probe_operator_order(
        |u| {
            if rank {
                core::paradiff_apply_lowrank(&a.inner, u, &psi)
            } else {
                core::paradiff_apply_direct(&a.inner, u, &psi)
            }
        },
        &part.inner,
        seed,
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("fitted_order", result.fitted_order)?;
    d.set_item("per_band_gains", result.per_band_gains)?;
    d.set_item("fit_residual", result.fit_residual)?;
    d.set_item("degenerate", result.degenerate)?;
    d.set_item("seed", result.seed)?;
    Ok(d)
}

/// Run the verification suite; returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (only=None))]
fn run_verify(only: Option<String>) -> PyResult<String> {
    let report = core::verify::run_all(only.as_deref());
    core::io::to_json_string(&report).map_err(err)
}

#[pymodule]
fn paracalc_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    core::init_threads();
    m.add_class::<PyTorusGrid>()?;
    m.add_class::<PyGridFunction>()?;
    m.add_class::<PyDyadicPartition>()?;
    m.add_class::<PyTorusMap>()?;
    m.add_class::<PySymbol>()?;
    m.add_function(wrap_pyfunction!(weierstrass, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_series, m)?)?;
    m.add_function(wrap_pyfunction!(torus_diffeo, m)?)?;
    m.add_function(wrap_pyfunction!(bump, m)?)?;
    m.add_function(wrap_pyfunction!(zygmund_norm, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_norm, m)?)?;
    m.add_function(wrap_pyfunction!(fit_regularity, m)?)?;
    m.add_function(wrap_pyfunction!(paraproduct, m)?)?;
    m.add_function(wrap_pyfunction!(paradiff_apply, m)?)?;
    m.add_function(wrap_pyfunction!(paracompose, m)?)?;
    m.add_function(wrap_pyfunction!(paralinearize, m)?)?;
    m.add_function(wrap_pyfunction!(functorial_defect, m)?)?;
    m.add_function(wrap_pyfunction!(conjugation_defect, m)?)?;
    m.add_function(wrap_pyfunction!(select_n, m)?)?;
    m.add_function(wrap_pyfunction!(probe_symbol_order, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    m.add("__version__", core::VERSION)?;
    Ok(())
}
