//! Python bindings for the Dirac oscillator wave packet engine.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use diracosc::density;
use diracosc::evolution::{self, DiracState};
use diracosc::observables;
use diracosc::wavepacket::{self, SimConfig};

/// (theta, phi, values[theta][phi])
type MapData = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

fn err(e: diracosc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Packet and representation choices for a run.
#[pyclass(module = "diracosc_py", skip_from_py_object)]
#[derive(Clone)]
struct Config {
    inner: SimConfig,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (n, r, alpha=None, beta=None, representation="dirac", tail_tolerance=1e-12))]
    fn new(
        n: f64,
        r: f64,
        alpha: Option<Complex64>,
        beta: Option<Complex64>,
        representation: &str,
        tail_tolerance: f64,
    ) -> PyResult<Self> {
        let mut cfg = SimConfig::new(n, r).map_err(err)?;
        if alpha.is_some() || beta.is_some() {
            cfg = cfg
                .with_spin(
                    alpha.unwrap_or(Complex64::new(0.0, 0.0)),
                    beta.unwrap_or(Complex64::new(0.0, 0.0)),
                )
                .map_err(err)?;
        }
        cfg.representation = representation.parse().map_err(err)?;
        cfg.tail_tolerance = tail_tolerance;
        cfg.validate().map_err(err)?;
        Ok(Config { inner: cfg })
    }

    #[getter]
    fn n(&self) -> f64 {
        self.inner.n_mean
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }

    #[getter]
    fn alpha(&self) -> Complex64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> Complex64 {
        self.inner.beta
    }

    #[getter]
    fn representation(&self) -> String {
        self.inner.representation.to_string()
    }

    #[getter]
    fn orbit_radius(&self) -> f64 {
        self.inner.orbit_radius()
    }

    #[getter]
    fn nonrel_period(&self) -> f64 {
        self.inner.nonrel_period()
    }

    fn initial_state(&self) -> PyResult<State> {
        Ok(State {
            inner: wavepacket::initial_state(&self.inner).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(n={}, r={}, representation='{}')",
            self.inner.n_mean, self.inner.r, self.inner.representation
        )
    }
}

/// A four-component packet at one instant.
#[pyclass(module = "diracosc_py", skip_from_py_object)]
#[derive(Clone)]
struct State {
    inner: DiracState,
}

#[pymethods]
impl State {
    #[getter]
    fn time(&self) -> f64 {
        self.inner.time
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.inner.norm_sqr().sqrt()
    }

    #[getter]
    fn l_max(&self) -> usize {
        self.inner.l_max()
    }

    fn evolve_to(&self, t: f64) -> State {
        State {
            inner: self.inner.evolve_to(t),
        }
    }

    fn evolve_by(&self, dt: f64) -> State {
        State {
            inner: self.inner.evolve_by(dt),
        }
    }

    /// (sigma_x, sigma_y, sigma_z)
    fn spin(&self) -> (f64, f64, f64) {
        let [x, y, z] = observables::spin_expectations(&self.inner);
        (x, y, z)
    }

    fn orbital_z(&self) -> f64 {
        observables::orbital_z(&self.inner)
    }

    fn component_weights(&self) -> [f64; 4] {
        self.inner.component_weights()
    }

    /// (positive_weight, negative_weight); defined in the Dirac picture only.
    fn sector_weights(&self) -> PyResult<(f64, f64)> {
        let proj = evolution::project_energy_sectors(&self.inner).map_err(err)?;
        Ok((proj.positive_weight, proj.negative_weight))
    }

    /// The positive or negative energy part of the packet, unnormalized.
    fn project(&self, sector: &str) -> PyResult<State> {
        let sector = sector.parse().map_err(err)?;
        Ok(State {
            inner: evolution::projected_state(&self.inner, sector).map_err(err)?,
        })
    }

    fn observables<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let rec = observables::observe(&self.inner);
        let d = PyDict::new(py);
        d.set_item("t", rec.t)?;
        d.set_item("sigma_x", rec.sigma_x)?;
        d.set_item("sigma_y", rec.sigma_y)?;
        d.set_item("sigma_z", rec.sigma_z)?;
        d.set_item("l_z", rec.l_z)?;
        d.set_item("j_z", rec.j_z)?;
        d.set_item("norm", rec.norm)?;
        d.set_item("pos_weight", rec.positive_weight)?;
        d.set_item("neg_weight", rec.negative_weight)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "State(time={}, l_max={}, norm={})",
            self.inner.time,
            self.inner.l_max(),
            self.inner.norm_sqr().sqrt()
        )
    }
}

/// Coherent weight amplitudes lambda_l up to the tail cutoff.
#[pyfunction]
#[pyo3(signature = (n, tail_tolerance=1e-12))]
fn coherent_weights(n: f64, tail_tolerance: f64) -> PyResult<Vec<f64>> {
    Ok(wavepacket::coherent_weights(n, tail_tolerance)
        .map_err(err)?
        .lambdas)
}

/// Gaussian collapse time of the spin beat, in slow-phase units.
#[pyfunction]
fn collapse_time(n: f64) -> f64 {
    observables::collapse_time(n)
}

/// Closed-form (sigma_x, sigma_y, sigma_z) sums for an x-polarized packet.
#[pyfunction]
fn spin_closed_form(config: &Config, t: f64) -> PyResult<(f64, f64, f64)> {
    let s = observables::spin_series(&config.inner, t).map_err(err)?;
    Ok((s.sigma_x, s.sigma_y, s.sigma_z))
}

/// Documented start offset of the closed-form sigma_z sum.
#[pyfunction]
fn sigma_z_offset(config: &Config) -> PyResult<f64> {
    observables::sigma_z_series_offset(&config.inner).map_err(err)
}

/// Columns of observables over an inclusive time grid, as a dict of lists.
#[pyfunction]
fn observable_series<'py>(
    py: Python<'py>,
    config: &Config,
    t_start: f64,
    t_end: f64,
    steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let s0 = wavepacket::initial_state(&config.inner).map_err(err)?;
    let grid = wavepacket::time_span(t_start, t_end, steps);
    let records: Vec<_> = grid
        .iter()
        .map(|t| observables::observe(&s0.evolve_to(*t)))
        .collect();
    let d = PyDict::new(py);
    d.set_item("t", records.iter().map(|r| r.t).collect::<Vec<_>>())?;
    d.set_item(
        "sigma_x",
        records.iter().map(|r| r.sigma_x).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "sigma_y",
        records.iter().map(|r| r.sigma_y).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "sigma_z",
        records.iter().map(|r| r.sigma_z).collect::<Vec<_>>(),
    )?;
    d.set_item("l_z", records.iter().map(|r| r.l_z).collect::<Vec<_>>())?;
    d.set_item("j_z", records.iter().map(|r| r.j_z).collect::<Vec<_>>())?;
    d.set_item("norm", records.iter().map(|r| r.norm).collect::<Vec<_>>())?;
    d.set_item(
        "pos_weight",
        records
            .iter()
            .map(|r| r.positive_weight)
            .collect::<Vec<_>>(),
    )?;
    d.set_item(
        "neg_weight",
        records
            .iter()
            .map(|r| r.negative_weight)
            .collect::<Vec<_>>(),
    )?;
    Ok(d)
}

/// Probability density on a sphere: (theta, phi, values[theta][phi]).
#[pyfunction]
#[pyo3(signature = (state, radius, kind="total", theta_points=181, phi_points=361))]
fn density_map(
    state: &State,
    radius: f64,
    kind: &str,
    theta_points: usize,
    phi_points: usize,
) -> PyResult<MapData> {
    let kind = kind.parse().map_err(err)?;
    let map =
        density::density_map(&state.inner, kind, radius, theta_points, phi_points).map_err(err)?;
    let values = (0..map.theta.len())
        .map(|i| (0..map.phi.len()).map(|j| map.value(i, j)).collect())
        .collect();
    Ok((map.theta, map.phi, values))
}

/// Density along one ring of constant theta: (phi, values).
#[pyfunction]
#[pyo3(signature = (state, radius, theta, kind="total", phi_points=361))]
fn phi_profile(
    state: &State,
    radius: f64,
    theta: f64,
    kind: &str,
    phi_points: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let kind = kind.parse().map_err(err)?;
    let profile =
        density::phi_profile(&state.inner, kind, radius, theta, phi_points).map_err(err)?;
    Ok((profile.phi, profile.values))
}

/// Max amplitude gap between the closed-form engine and the block-matrix
/// reference after evolving the packet to time t.
#[pyfunction]
fn oracle_max_deviation(config: &Config, t: f64) -> PyResult<f64> {
    let s0 = wavepacket::initial_state(&config.inner).map_err(err)?;
    let analytic = s0.evolve_to(t);
    let reference = evolution::oracle_evolve(&s0, t).map_err(err)?;
    Ok(evolution::max_amplitude_deviation(&analytic, &reference))
}

#[pymodule]
fn diracosc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<State>()?;
    m.add_function(wrap_pyfunction!(coherent_weights, m)?)?;
    m.add_function(wrap_pyfunction!(collapse_time, m)?)?;
    m.add_function(wrap_pyfunction!(spin_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_z_offset, m)?)?;
    m.add_function(wrap_pyfunction!(observable_series, m)?)?;
    m.add_function(wrap_pyfunction!(density_map, m)?)?;
    m.add_function(wrap_pyfunction!(phi_profile, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_max_deviation, m)?)?;
    Ok(())
}
