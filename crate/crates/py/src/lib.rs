//! Python bindings: particle systems, seeded runs, the exact oracle and the
//! diffusion fit.

use std::str::FromStr;

use num_traits::ToPrimitive;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use amoebot::dynamics::{self, DynamicsParams, Kernel, Mode, Trajectory};
use amoebot::io::config::{parse_rational, RunConfig};
use amoebot::io::{render, simulate};
use amoebot::lattice::AxialCoord;
use amoebot::light::LightField;
use amoebot::metrics::{self, Series};
use amoebot::oracle;
use amoebot::system;
use amoebot::verify;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "ParticleSystem", module = "amoebot_py", skip_from_py_object)]
#[derive(Clone)]
struct PySystem {
    inner: system::ParticleSystem,
}

#[pymethods]
impl PySystem {
    #[new]
    fn new(coords: Vec<(i32, i32)>) -> PyResult<Self> {
        let inner = system::ParticleSystem::new(coords.into_iter().map(|(u, v)| AxialCoord::new(u, v)))
            .map_err(value_err)?;
        Ok(PySystem { inner })
    }

    #[staticmethod]
    fn line(n: usize) -> PyResult<Self> {
        Ok(PySystem { inner: system::ParticleSystem::line(n).map_err(value_err)? })
    }

    #[staticmethod]
    fn hexagon(r: u32) -> Self {
        PySystem { inner: system::ParticleSystem::hexagon(r) }
    }

    #[staticmethod]
    fn from_snapshot(text: &str) -> PyResult<Self> {
        Ok(PySystem { inner: system::ParticleSystem::from_snapshot(text).map_err(value_err)? })
    }

    fn to_snapshot(&self) -> String {
        self.inner.to_snapshot()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("ParticleSystem(n={}, edges={})", self.inner.len(), self.inner.edge_count())
    }

    /// Particle positions by id, as (u, v).
    fn coords(&self) -> Vec<(i32, i32)> {
        self.inner.particles().iter().map(|c| (c.u, c.v)).collect()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn has_hole(&self) -> bool {
        self.inner.has_hole()
    }

    /// Centroid height as (numerator, denominator).
    fn centroid_height(&self) -> (i64, i64) {
        let h = self.inner.centroid_height();
        (*h.numer(), *h.denom())
    }

    fn centroid_x(&self) -> f64 {
        self.inner.centroid_x()
    }

    #[pyo3(signature = (light = true))]
    fn lit_count(&self, light: bool) -> usize {
        LightField { enabled: light }.lit_count(&self.inner)
    }

    /// Valid target cells of the particle with id `particle`.
    fn valid_targets(&self, particle: usize) -> PyResult<Vec<(i32, i32)>> {
        self.check(particle)?;
        Ok(self.inner.valid_targets(self.inner.position(particle)).iter().map(|m| (m.to.u, m.to.v)).collect())
    }

    /// Moves `particle` to (u, v) if the local rule allows it. Returns the
    /// change in edge count, or None when the move is invalid.
    fn try_move(&mut self, particle: usize, u: i32, v: i32) -> PyResult<Option<i32>> {
        self.check(particle)?;
        Ok(self.inner.try_move(particle, AxialCoord::new(u, v)).map(|m| m.edge_delta()))
    }

    fn ascii(&self) -> String {
        render::ascii(&self.inner)
    }

    fn svg(&self) -> String {
        render::svg(&self.inner)
    }
}

impl PySystem {
    fn check(&self, particle: usize) -> PyResult<()> {
        if particle < self.inner.len() {
            Ok(())
        } else {
            Err(value_err(format!("no particle {particle} in a system of {}", self.inner.len())))
        }
    }
}

type Row = (u64, f64, f64, usize, usize);

fn rows(t: &Trajectory) -> Vec<Row> {
    t.records.iter().map(|r| (r.t, r.centroid_x, r.centroid_y_f64(), r.edges, r.lit_count)).collect()
}

/// One seeded run. Returns (t, centroid_x, centroid_y, edges, lit_count) rows
/// and the final configuration.
#[pyfunction]
#[pyo3(signature = (system, iterations, record_interval, lam = 4.0, dim_prob = "1/4", kernel = "uniform6", mode = "phototax", light = true, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn run(
    system: &PySystem,
    iterations: u64,
    record_interval: u64,
    lam: f64,
    dim_prob: &str,
    kernel: &str,
    mode: &str,
    light: bool,
    seed: u64,
) -> PyResult<(Vec<Row>, PySystem)> {
    let params = DynamicsParams {
        lambda: lam,
        dim_prob: parse_rational(dim_prob).map_err(value_err)?,
        kernel: Kernel::from_str(kernel).map_err(value_err)?,
        mode: Mode::from_str(mode).map_err(value_err)?,
        seed,
    };
    let mut last = system.inner.clone();
    let t = dynamics::run_observed(
        system.inner.clone(),
        params,
        LightField { enabled: light },
        iterations,
        record_interval,
        "python",
        |_, s| last = s.clone(),
    )
    .map_err(value_err)?;
    Ok((rows(&t), PySystem { inner: last }))
}

/// All trials of a `key = value` configuration, without writing files.
#[pyfunction]
fn run_config(text: &str) -> PyResult<Vec<Vec<Row>>> {
    let cfg = RunConfig::parse(text).map_err(value_err)?;
    cfg.validate().map_err(value_err)?;
    Ok(simulate(&cfg, |_, _, _| {}).map_err(value_err)?.iter().map(rows).collect())
}

/// Text report of the exact chain over all `n`-particle configurations.
#[pyfunction]
#[pyo3(signature = (n = 3, lam = "4", dim_prob = "1/4"))]
fn oracle_report(n: usize, lam: &str, dim_prob: &str) -> PyResult<String> {
    let report = exact_report(n, lam, dim_prob)?;
    Ok(report.to_string())
}

/// Exact k-activation drifts per state class, as fraction strings.
#[pyfunction]
#[pyo3(signature = (n = 3, lam = "4", dim_prob = "1/4"))]
fn oracle_drifts(n: usize, lam: &str, dim_prob: &str) -> PyResult<Vec<(Vec<(i32, i32)>, Vec<String>)>> {
    let report = exact_report(n, lam, dim_prob)?;
    Ok(report
        .states
        .iter()
        .map(|s| {
            (
                s.class.canonical.iter().map(|c| (c.u, c.v)).collect(),
                s.drifts.iter().map(|d| d.to_string()).collect(),
            )
        })
        .collect())
}

fn exact_report(n: usize, lam: &str, dim_prob: &str) -> PyResult<oracle::OracleReport> {
    let l = parse_rational(lam).map_err(value_err)?;
    let d = parse_rational(dim_prob).map_err(value_err)?;
    let big = num_rational::BigRational::new((*l.numer()).into(), (*l.denom()).into());
    oracle::oracle_report(n, &big, d).map_err(value_err)
}

/// Ensemble MSD fit over trials given as (times, [(x, y), ...]). Returns
/// gamma, ln(4D), the fit range and the classification.
#[pyfunction]
#[pyo3(signature = (trials, t_min = None, t_max = None))]
fn msd_fit(
    trials: Vec<(Vec<u64>, Vec<(f64, f64)>)>,
    t_min: Option<u64>,
    t_max: Option<u64>,
) -> PyResult<(f64, f64, (u64, u64), String)> {
    let series: Vec<Series> = trials.into_iter().map(|(t, p)| Series::new(t, p)).collect();
    let range = match (t_min, t_max) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => return Err(value_err("give both t_min and t_max or neither")),
    };
    let r = metrics::msd(&series, range).map_err(value_err)?;
    Ok((r.gamma, r.log_intercept, r.fit_range, r.classification().to_string()))
}

/// Runs one acceptance check; returns (passed, result line).
#[pyfunction]
fn verify_criterion(id: u8) -> PyResult<(bool, String)> {
    let c = verify::criterion(id).ok_or_else(|| value_err(format!("no criterion {id}")))?;
    let r = c.run();
    Ok((r.passed, r.to_string()))
}

/// Floating-point value of a fraction string such as "3/32".
#[pyfunction]
fn fraction_value(s: &str) -> PyResult<f64> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let r = num_rational::BigRational::new(
        n.trim().parse().map_err(value_err)?,
        d.trim().parse().map_err(value_err)?,
    );
    r.to_f64().ok_or_else(|| value_err("out of range"))
}

#[pymodule]
fn amoebot_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_report, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_drifts, m)?)?;
    m.add_function(wrap_pyfunction!(msd_fit, m)?)?;
    m.add_function(wrap_pyfunction!(verify_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(fraction_value, m)?)?;
    Ok(())
}
