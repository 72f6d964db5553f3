//! Circular coherent packets and the run configuration.
//!
//! The packet is a coherent state of the orbital motion placed on a circle of
//! radius `x0 = sqrt(N/r)` with momentum `p0 = sqrt(N r)` and `<L_z> = N`,
//! carried entirely by stretched levels: partial wave l enters with the
//! Poisson amplitude
//!
//! `lambda_l = (-1)^l exp(-N/2) N^(l/2) / sqrt(l!)`
//!
//! on the ket `|n=l, l, m_l=l>`, with an overall spinor `(alpha, beta, 0, 0)`.
//! The alternating sign is what points the packet along +x at t = 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::evolution::{DiracState, SectorState};
use crate::{Error, Result};

/// Hard cap on the partial-wave index; Poisson tails for any sane `N` die
/// far below this.
pub const L_CAP: usize = 512;

/// Which dynamics the amplitudes follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// Full dynamics with upper-lower mixing.
    Dirac,
    /// Foldy-Wouthuysen picture: same spectrum, mixing transformed away.
    FoldyWouthuysen,
    /// Nonrelativistic limit: `E_plus = 0`, `E_minus = (2l+1) omega`.
    NonRelativistic,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Dirac => "dirac",
            Representation::FoldyWouthuysen => "fw",
            Representation::NonRelativistic => "nonrel",
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dirac" => Ok(Representation::Dirac),
            "fw" | "foldy-wouthuysen" | "foldy_wouthuysen" => Ok(Representation::FoldyWouthuysen),
            "nonrel" | "nonrelativistic" => Ok(Representation::NonRelativistic),
            other => Err(Error::Config(format!("unknown representation '{other}'"))),
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full description of one run. Angles in radians, times in natural units,
/// lengths in oscillator lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Mean orbital excitation `N = <L_z>`.
    pub n_mean: f64,
    /// Trap-to-rest-energy ratio `hbar omega / m c^2`; also omega itself.
    pub r: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub representation: Representation,
    /// Poisson tail mass allowed past the last kept partial wave.
    pub tail_tolerance: f64,
    pub time_grid: Vec<f64>,
    /// Points on `[0, pi]` inclusive for density maps.
    pub theta_points: usize,
    /// Points on `[0, 2 pi)` for density maps.
    pub phi_points: usize,
    /// Sphere radius for density maps, in oscillator lengths; `None` means
    /// the orbit radius `sqrt(N)`.
    pub radius: Option<f64>,
}

impl SimConfig {
    /// Spin-x-polarized packet, default grids, no time points.
    pub fn new(n_mean: f64, r: f64) -> Result<Self> {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let cfg = Self {
            n_mean,
            r,
            alpha: Complex64::new(half, 0.0),
            beta: Complex64::new(half, 0.0),
            representation: Representation::Dirac,
            tail_tolerance: 1e-12,
            time_grid: Vec::new(),
            theta_points: 181,
            phi_points: 361,
            radius: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n_mean.is_finite() || self.n_mean <= 0.0 {
            return Err(Error::Config(format!("N = {} must be positive", self.n_mean)));
        }
        if !self.r.is_finite() || self.r <= 0.0 {
            return Err(Error::Config(format!("r = {} must be positive", self.r)));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1.0) {
            return Err(Error::Config(format!(
                "tail_tolerance = {} must lie in (0, 1)",
                self.tail_tolerance
            )));
        }
        if self.alpha.norm_sqr() + self.beta.norm_sqr() == 0.0 {
            return Err(Error::Config("alpha and beta cannot both vanish".into()));
        }
        if self.theta_points < 2 || self.phi_points < 4 {
            return Err(Error::Config("density grids need >= 2 x 4 points".into()));
        }
        if let Some(u) = self.radius {
            if !u.is_finite() || u <= 0.0 {
                return Err(Error::Config(format!("radius = {u} must be positive")));
            }
        }
        Ok(())
    }

    /// Normalizes the spinor in place; call after editing alpha/beta.
    pub fn normalize_spin(&mut self) -> Result<()> {
        let n = (self.alpha.norm_sqr() + self.beta.norm_sqr()).sqrt();
        if n == 0.0 {
            return Err(Error::Config("alpha and beta cannot both vanish".into()));
        }
        self.alpha /= n;
        self.beta /= n;
        Ok(())
    }

    pub fn with_spin(mut self, alpha: Complex64, beta: Complex64) -> Result<Self> {
        self.alpha = alpha;
        self.beta = beta;
        self.normalize_spin()?;
        Ok(self)
    }

    pub fn with_representation(mut self, rep: Representation) -> Self {
        self.representation = rep;
        self
    }

    /// Uniform grid of `steps` points from `t_start` to `t_end` inclusive.
    pub fn with_time_span(mut self, t_start: f64, t_end: f64, steps: usize) -> Self {
        self.time_grid = time_span(t_start, t_end, steps);
        self
    }

    /// True when the spinor is the x-polarized choice `alpha = beta = 1/sqrt(2)`.
    pub fn is_x_polarized(&self) -> bool {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        (self.alpha - Complex64::new(half, 0.0)).norm() < 1e-12
            && (self.beta - Complex64::new(half, 0.0)).norm() < 1e-12
    }

    /// Orbit radius in oscillator lengths.
    pub fn orbit_radius(&self) -> f64 {
        self.n_mean.sqrt()
    }

    /// Sphere radius used for maps: configured value or the orbit radius.
    pub fn map_radius(&self) -> f64 {
        self.radius.unwrap_or_else(|| self.orbit_radius())
    }

    /// Nonrelativistic recurrence period `2 pi / omega`.
    pub fn nonrel_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.r
    }
}

pub fn time_span(t_start: f64, t_end: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![t_start];
    }
    let dt = (t_end - t_start) / (steps as f64 - 1.0);
    (0..steps).map(|i| t_start + dt * i as f64).collect()
}

/// Signed Poisson amplitudes `lambda_l` up to the smallest `l_max` whose tail
/// mass drops below the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub n_mean: f64,
    pub tail_tolerance: f64,
    /// `lambdas[l]` = signed amplitude of partial wave l.
    pub lambdas: Vec<f64>,
    /// Poisson mass left beyond `l_max`.
    pub tail: f64,
}

impl WeightTable {
    pub fn l_max(&self) -> usize {
        self.lambdas.len() - 1
    }

    /// `lambda_l^2`, the Poisson probability of wave l.
    pub fn weight(&self, l: usize) -> f64 {
        self.lambdas[l] * self.lambdas[l]
    }
}

/// Evaluates the amplitudes in log space (no factorial overflow) and cuts at
/// the tolerance; errors out if the hard cap cannot honor it.
pub fn coherent_weights(n_mean: f64, tail_tolerance: f64) -> Result<WeightTable> {
    if !n_mean.is_finite() || n_mean <= 0.0 {
        return Err(Error::Domain(format!("N = {n_mean} must be positive")));
    }
    if !(tail_tolerance > 0.0 && tail_tolerance < 1.0) {
        return Err(Error::Domain(format!(
            "tail tolerance {tail_tolerance} must lie in (0, 1)"
        )));
    }
    let ln_n = n_mean.ln();
    let mut lambdas = Vec::with_capacity(64);
    let mut cumulative = 0.0;
    for l in 0..=L_CAP {
        let lf = l as f64;
        let ln_p = -n_mean + lf * ln_n - ln_gamma(lf + 1.0);
        let amp = (0.5 * ln_p).exp();
        lambdas.push(if l % 2 == 0 { amp } else { -amp });
        cumulative += amp * amp;
        if 1.0 - cumulative < tail_tolerance {
            return Ok(WeightTable {
                n_mean,
                tail_tolerance,
                lambdas,
                tail: (1.0 - cumulative).max(0.0),
            });
        }
    }
    Err(Error::Truncation(format!(
        "tail {tail_tolerance} not reachable below the l = {L_CAP} cap for N = {n_mean}"
    )))
}

/// Packet centroid: orbit radius `x0 = sqrt(N/r)` and momentum
/// `p0 = sqrt(N r)`, in Compton units.
pub fn centroid_parameters(config: &SimConfig) -> (f64, f64) {
    ((config.n_mean / config.r).sqrt(), (config.n_mean * config.r).sqrt())
}

/// Assembles the t = 0 state: `alpha lambda_l` on the first component,
/// `beta lambda_l` on the second, nothing anywhere else.
pub fn initial_state(config: &SimConfig) -> Result<DiracState> {
    config.validate()?;
    let mut cfg = config.clone();
    cfg.normalize_spin()?;
    let table = coherent_weights(cfg.n_mean, cfg.tail_tolerance)?;
    let sectors = table
        .lambdas
        .iter()
        .enumerate()
        .map(|(l, lambda)| SectorState {
            l: l as u32,
            amp_c1_ml: cfg.alpha * *lambda,
            amp_c1_mlm1: Complex64::new(0.0, 0.0),
            amp_c2_ml: cfg.beta * *lambda,
            amp_c3: Complex64::new(0.0, 0.0),
        })
        .collect();
    Ok(DiracState {
        sectors,
        representation: cfg.representation,
        r: cfg.r,
        time: 0.0,
    })
}
