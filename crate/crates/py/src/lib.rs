//! Python bindings: GUE minor processes, weight fields and hive values,
//! maximum-weight tilings, tileability, surface-tension estimates, the
//! variational functional and dyadic decompositions.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hivelab::height::{is_tileable as tileable, LatticeDomain, TiltVector};
use hivelab::hive::{gt_from_minors, LargeGapTuple};
use hivelab::lozenge::render::tiling_json;
use hivelab::lozenge::{
    lambda_offset, max_weight_tiling as max_tiling, octahedron_field, ExcavationHexagon, Half, Side, Triangle,
};
use hivelab::qdiff::{cz_decompose as decompose, verify_cz, CZParams, Sampled};
use hivelab::randmat::{self, semicircle_cdf as sc_cdf};
use hivelab::tension::{sigma_m_from_processes, TensionQuery};
use hivelab::varsolve::{f_ddagger, maximize_sv, s_v, MaximizeConfig, TensionTable, TauField};
use hivelab::HiveError;

fn err(e: HiveError) -> PyErr {
    if e.is_config() || matches!(e, HiveError::Range(_)) {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn side(s: &str) -> PyResult<Side> {
    match s {
        "up" => Ok(Side::Up),
        "lo" => Ok(Side::Lo),
        _ => Err(PyValueError::new_err(format!("side must be 'up' or 'lo', got {s:?}"))),
    }
}

/// Spectra of the leading minors of one GUE matrix.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct MinorProcess {
    inner: randmat::MinorProcess,
}

#[pymethods]
impl MinorProcess {
    #[new]
    #[pyo3(signature = (n, variance=1.0, seed=0, index=0))]
    fn new(n: usize, variance: f64, seed: u64, index: u64) -> PyResult<Self> {
        Ok(Self { inner: randmat::sample_minor_process(n, variance, seed, index).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.inner.scale
    }

    /// Row `k` (1-based level), non-increasing.
    fn row(&self, k: usize) -> PyResult<Vec<f64>> {
        if k == 0 || k > self.inner.n() {
            return Err(PyValueError::new_err(format!("level {k} outside 1..={}", self.inner.n())));
        }
        Ok(self.inner.rows[k - 1].clone())
    }

    fn top(&self) -> Vec<f64> {
        self.inner.top().values
    }

    fn interlacing_defect(&self) -> f64 {
        self.inner.interlacing_defect()
    }

    fn __repr__(&self) -> String {
        format!("MinorProcess(n={})", self.inner.n())
    }
}

/// Glued weight field of a `(lambda, mu)` pair with its large-gap tuple.
#[pyclass(frozen)]
struct WeightField {
    inner: hivelab::lozenge::WeightField,
    big: LargeGapTuple,
}

#[pymethods]
impl WeightField {
    #[new]
    fn new(lam: &MinorProcess, mu: &MinorProcess) -> PyResult<Self> {
        if lam.inner.n() != mu.inner.n() {
            return Err(PyValueError::new_err("lambda and mu must have the same size"));
        }
        let gl = gt_from_minors(&lam.inner).map_err(err)?;
        let gm = gt_from_minors(&mu.inner).map_err(err)?;
        let big = LargeGapTuple::default_for(gl.n(), gl.spread().max(gm.spread()));
        let inner = hivelab::lozenge::WeightField::from_patterns(&gm, &gl, &big).map_err(err)?;
        Ok(Self { inner, big })
    }

    #[getter]
    fn n(&self) -> i64 {
        self.inner.n
    }

    /// `h~(v)` by maximum-weight tiling of the excavation hexagon.
    fn hive_value(&self, v: (i64, i64)) -> PyResult<f64> {
        let h = ExcavationHexagon::new(v, self.inner.n).map_err(err)?;
        Ok(max_tiling(&h, &self.inner, None).map_err(err)?.1)
    }

    /// `h~` on the whole square by the octahedron recurrence, row-major in
    /// `y`, with `(n + 1)^2` entries.
    fn octahedron(&self) -> Vec<f64> {
        octahedron_field(&self.inner).top
    }

    /// `n^-2 (h~(v) - offset)`, the normalized value with the large-gap
    /// part removed.
    fn normalized(&self, v: (i64, i64)) -> PyResult<f64> {
        let n = self.inner.n;
        if v.0 < 0 || v.1 < 0 || v.0 > n || v.1 > n {
            return Err(PyValueError::new_err(format!("vertex {v:?} outside the square")));
        }
        Ok((octahedron_field(&self.inner).at(v) - lambda_offset(v, &self.big)) / (n * n) as f64)
    }

    fn lambda_offset(&self, v: (i64, i64)) -> f64 {
        lambda_offset(v, &self.big)
    }
}

/// Maximum-weight tiling of the hexagon around `v`: `(value, tiling)` with
/// the tiling as a JSON string.
#[pyfunction]
fn max_weight_tiling(field: &WeightField, v: (i64, i64)) -> PyResult<(f64, String)> {
    let h = ExcavationHexagon::new(v, field.inner.n).map_err(err)?;
    let (t, value) = max_tiling(&h, &field.inner, None).map_err(err)?;
    Ok((value, tiling_json(&h, &t).to_string()))
}

/// Whether a simply connected set of unit triangles `(x, y, upper)` has a
/// lozenge tiling.
#[pyfunction]
fn is_tileable(triangles: Vec<(i64, i64, bool)>) -> PyResult<bool> {
    let tris = triangles
        .into_iter()
        .map(|(x, y, up)| Triangle { x, y, half: if up { Half::Upper } else { Half::Lower } })
        .collect();
    let d = LatticeDomain::from_triangles(tris).map_err(err)?;
    tileable(&d).map_err(err)
}

#[pyfunction]
fn semicircle_cdf(u: f64) -> f64 {
    sc_cdf(u)
}

/// Monte Carlo surface tension `sigma_m` at a tilt (lattice-basis
/// coordinates) from the given processes: `(mean, std_error)`.
#[pyfunction]
#[pyo3(signature = (processes, side_name, position, tilt, m, eps=None))]
fn sigma_m(
    processes: Vec<MinorProcess>,
    side_name: &str,
    position: (f64, f64),
    tilt: (f64, f64),
    m: usize,
    eps: Option<f64>,
) -> PyResult<(f64, f64)> {
    let procs: Vec<randmat::MinorProcess> = processes.into_iter().map(|p| p.inner).collect();
    let q = TensionQuery { side: side(side_name)?, position, tilt: TiltVector::new(tilt.0, tilt.1), m, eps, trials: procs.len() };
    let e = sigma_m_from_processes(&q, &procs).map_err(err)?;
    Ok((e.mean, e.std_error))
}

/// Variational functional at `f_ddagger` and its maximum on a mesh of
/// resolution `res` around `v`, for a constant tension `c` and constant
/// equator fields: `(value_at_start, maximum, gap)`.
#[pyfunction]
#[pyo3(signature = (v, res, c, tau_up=0.0, tau_lo=0.0, s_hex=0.0, iterations=300))]
fn solve_constant(v: (i64, i64), res: i64, c: f64, tau_up: f64, tau_lo: f64, s_hex: f64, iterations: usize) -> PyResult<(f64, f64, f64)> {
    let h = ExcavationHexagon::new(v, res).map_err(err)?;
    let start = f_ddagger(&h).map_err(err)?;
    let table = TensionTable::constant(c);
    let tau = TauField::constant(res as usize, tau_up, tau_lo);
    let at_start = s_v(&start, &table, &tau, s_hex).map_err(err)?.total;
    let best = maximize_sv(&start, &table, &tau, s_hex, &MaximizeConfig { iterations, gap_tol: 1e-9 }).map_err(err)?;
    Ok((at_start, best.value.total, best.gap))
}

/// Dyadic decomposition of a Python function `f(x, y)` on the unit square:
/// `(good_count, bad_count, bad_volume, clean)`.
#[pyfunction]
#[pyo3(signature = (f, eps, eta, k, c_sharp=hivelab::qdiff::C_SHARP))]
fn cz_decompose(f: &Bound<'_, PyAny>, eps: f64, eta: f64, k: u32, c_sharp: f64) -> PyResult<(usize, usize, f64, bool)> {
    let cells = 1usize << (k + 2);
    let mut values = Vec::with_capacity((cells + 1) * (cells + 1));
    for b in 0..=cells {
        for a in 0..=cells {
            let (x, y) = (a as f64 / cells as f64, b as f64 / cells as f64);
            values.push(f.call1((x, y))?.extract::<f64>()?);
        }
    }
    let sampled = Sampled::from_fn(k + 2, |x, y| {
        let (a, b) = ((x * cells as f64).round() as usize, (y * cells as f64).round() as usize);
        values[b * (cells + 1) + a]
    });
    let r = decompose(&sampled, CZParams { c_sharp, ..CZParams::new(eps, eta, k) }).map_err(err)?;
    let clean = verify_cz(&sampled, &r).is_clean();
    Ok((r.good.len(), r.bad.len(), r.bad_volume(), clean))
}

#[pymodule]
pub fn hivelab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MinorProcess>()?;
    m.add_class::<WeightField>()?;
    m.add_function(wrap_pyfunction!(max_weight_tiling, m)?)?;
    m.add_function(wrap_pyfunction!(is_tileable, m)?)?;
    m.add_function(wrap_pyfunction!(semicircle_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_m, m)?)?;
    m.add_function(wrap_pyfunction!(solve_constant, m)?)?;
    m.add_function(wrap_pyfunction!(cz_decompose, m)?)?;
    Ok(())
}
