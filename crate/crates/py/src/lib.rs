//! Python bindings for the magdirac spectral probes.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use magdirac::classify::predict_regime_for;
use magdirac::radial::sector_tridiagonal;
use magdirac::zeromodes::{build_zero_mode, dstar_on_zero_mode, residual_d};
use magdirac::{QuasimodeParams, RadialGrid, SectorIndex, SectorRange, Variant};

create_exception!(magdirac_py, MagdiracError, PyValueError);

fn err(e: magdirac::Error) -> PyErr {
    MagdiracError::new_err(format!("{}: {e}", e.code()))
}

// Reports go through JSON so Python sees plain dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| MagdiracError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Radial field: power-law, regularized or tabulated `V` and `B`.
#[pyclass(name = "FieldSpec", frozen)]
struct FieldSpec {
    inner: magdirac::RadialFieldSpec,
}

#[pymethods]
impl FieldSpec {
    /// `V = V0 r^t`, `B = B0 r^s`.
    #[staticmethod]
    fn power_law(v0: f64, b0: f64, t: f64, s: f64) -> PyResult<Self> {
        Ok(Self { inner: magdirac::RadialFieldSpec::power_law(v0, b0, t, s).map_err(err)? })
    }

    /// `V = V0 (1+r²)^{t/2}`, `B = B0 (1+r²)^{s/2}`.
    #[staticmethod]
    fn regularized(v0: f64, b0: f64, t: f64, s: f64) -> PyResult<Self> {
        Ok(Self { inner: magdirac::RadialFieldSpec::regularized(v0, b0, t, s).map_err(err)? })
    }

    /// Tabulated `V` and `B` on the mesh `r`.
    #[staticmethod]
    fn tabulated(r: Vec<f64>, v: Vec<f64>, b: Vec<f64>) -> PyResult<Self> {
        let table = magdirac::RadialTable::new(r, v, b).map_err(err)?;
        Ok(Self { inner: magdirac::RadialFieldSpec::tabulated(table) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: magdirac::RadialFieldSpec::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Copy with `V` replaced by `V + e`.
    fn with_energy_shift(&self, e: f64) -> Self {
        Self { inner: self.inner.clone().with_energy_shift(e) }
    }

    fn v(&self, r: f64) -> f64 {
        self.inner.v(r)
    }

    fn b(&self, r: f64) -> f64 {
        self.inner.b(r)
    }

    fn radial_a(&self, r: f64) -> PyResult<f64> {
        self.inner.radial_a(r).map_err(err)
    }

    fn flux_phi(&self, r: f64) -> PyResult<f64> {
        self.inner.flux_phi(r).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("FieldSpec({})", self.inner.to_json().split_whitespace().collect::<String>())
    }
}

/// Regime label of a power-law field from the exponent inequalities.
#[pyfunction]
fn predict_regime<'py>(py: Python<'py>, v0: f64, b0: f64, t: f64, s: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = magdirac::predict_regime(v0, b0, t, s).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn classify<'py>(py: Python<'py>, spec: &FieldSpec) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &predict_regime_for(&spec.inner).map_err(err)?)
}

/// Eigenvalues of `h_j` in `(lo, hi)` on `[0, radius]` with `cells` cells.
#[pyfunction]
#[pyo3(signature = (spec, j, radius, cells, lo, hi, tol = 1e-8))]
fn sector_eigenvalues(
    py: Python<'_>,
    spec: &FieldSpec,
    j: i64,
    radius: f64,
    cells: usize,
    lo: f64,
    hi: f64,
    tol: f64,
) -> PyResult<Vec<f64>> {
    py.detach(|| {
        let grid = RadialGrid::new(radius, cells)?;
        let t = sector_tridiagonal(&spec.inner, &grid, SectorIndex::new(j))?;
        Ok(magdirac::eigs_in_window(&t, lo, hi, tol)?.eigenvalues)
    })
    .map_err(err)
}

/// Window counts in `(-energy, energy)` summed over sectors, per radius.
#[pyfunction]
#[pyo3(signature = (spec, radii, energy = 1.0, density = 40.0, sectors = None))]
fn probe_accumulation<'py>(
    py: Python<'py>,
    spec: &FieldSpec,
    radii: Vec<f64>,
    energy: f64,
    density: f64,
    sectors: Option<(i64, i64)>,
) -> PyResult<Bound<'py, PyAny>> {
    let range = sectors.map_or(SectorRange::default(), |(a, b)| SectorRange::Fixed(a, b));
    let report =
        py.detach(|| magdirac::probe_accumulation(&spec.inner, energy, &radii, range, density)).map_err(err)?;
    to_py(py, &report)
}

/// Half-gap around zero for a field with `V ≡ E`.
#[pyfunction]
#[pyo3(signature = (spec, radii, cells_per_unit = 100.0, sectors = (-5, 5)))]
fn probe_gap<'py>(
    py: Python<'py>,
    spec: &FieldSpec,
    radii: Vec<f64>,
    cells_per_unit: f64,
    sectors: (i64, i64),
) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| magdirac::probe_gap(&spec.inner, &radii, cells_per_unit, sectors)).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
fn coercivity(spec: &FieldSpec, j: i64, radius: f64, cells: usize) -> PyResult<f64> {
    let grid = RadialGrid::new(radius, cells).map_err(err)?;
    magdirac::coercivity_ratio(&spec.inner, &grid, SectorIndex::new(j)).map_err(err)
}

/// `‖d*Ω_m‖` identity error and `‖dΩ_m‖/‖Ω_m‖` for the zero mode of degree `m`.
#[pyfunction]
#[pyo3(signature = (spec, m, radius = 20.0, cells = 100, step = 1e-3))]
fn zero_mode<'py>(
    py: Python<'py>,
    spec: &FieldSpec,
    m: u32,
    radius: f64,
    cells: usize,
    step: f64,
) -> PyResult<Bound<'py, PyAny>> {
    #[derive(Serialize)]
    struct Row {
        m: u32,
        ln_norm_sq: f64,
        mass_tail: f64,
        dstar_rel_err: f64,
        residual_d: f64,
    }
    let grid = RadialGrid::new(radius, cells).map_err(err)?;
    let mode = build_zero_mode(&spec.inner, m, &grid).map_err(err)?;
    let row = Row {
        m,
        ln_norm_sq: mode.ln_norm_sq,
        mass_tail: mode.mass_tail,
        dstar_rel_err: dstar_on_zero_mode(&mode).rel_err,
        residual_d: residual_d(&mode, &spec.inner, step),
    };
    to_py(py, &row)
}

/// Residuals of the localized Landau-level states at points `(x, y)`.
#[pyfunction]
#[pyo3(signature = (spec, centers, k = 1, eps = 0.5))]
fn quasimodes<'py>(
    py: Python<'py>,
    spec: &FieldSpec,
    centers: Vec<(f64, f64)>,
    k: u32,
    eps: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let field = magdirac::lift_to_2d(&spec.inner);
    let points: Vec<[f64; 2]> = centers.iter().map(|&(x, y)| [x, y]).collect();
    let qs = py
        .detach(|| {
            let params = QuasimodeParams::at_points(&field, Variant::Thm3a { k, eps }, &points)?;
            magdirac::residual_sequence(&field, &params)
        })
        .map_err(err)?;
    to_py(py, &qs)
}

/// Quadrature norms of the ladder state against their closed-form bounds.
#[pyfunction]
fn norm_bounds<'py>(py: Python<'py>, b: f64, v: f64, p: u32, r: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &magdirac::norm_bounds_check(b, v, p, r).map_err(err)?)
}

#[pymodule]
fn magdirac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("MagdiracError", m.py().get_type::<MagdiracError>())?;
    m.add_class::<FieldSpec>()?;
    m.add_function(wrap_pyfunction!(predict_regime, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(sector_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(probe_accumulation, m)?)?;
    m.add_function(wrap_pyfunction!(probe_gap, m)?)?;
    m.add_function(wrap_pyfunction!(coercivity, m)?)?;
    m.add_function(wrap_pyfunction!(zero_mode, m)?)?;
    m.add_function(wrap_pyfunction!(quasimodes, m)?)?;
    m.add_function(wrap_pyfunction!(norm_bounds, m)?)?;
    Ok(())
}
