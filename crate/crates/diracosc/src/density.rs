//! Probability density on a sphere of fixed radius.
//!
//! Every populated ket factorizes into a node-free radial profile and a
//! stretched harmonic, so a spinor component at fixed radius is a short
//! Fourier series in phi with theta-dependent coefficients. Maps are built
//! row by row from that series; the only special functions involved are the
//! ones in [`crate::angular`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::angular::{radial_node_free, stretched_harmonic_theta};
use crate::evolution::{projected_state, DiracState, EnergySector};
use crate::{Error, Result};

/// One product ket of a spinor component: amplitude times
/// `R_{l_rad}(u) Y_{l_harm}^{m}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Term {
    pub amp: Complex64,
    pub l_rad: u32,
    pub l_harm: u32,
    pub m: i64,
}

/// Expands spinor component `component` (zero-based) of the state into
/// radial-times-harmonic terms. The fourth component is always empty.
pub(crate) fn component_terms(state: &DiracState, component: usize) -> Vec<Term> {
    let mut terms = Vec::new();
    for sec in &state.sectors {
        let l = sec.l;
        match component {
            0 => {
                if sec.amp_c1_ml.norm_sqr() > 0.0 {
                    terms.push(Term {
                        amp: sec.amp_c1_ml,
                        l_rad: l,
                        l_harm: l,
                        m: i64::from(l),
                    });
                }
                if l >= 1 && sec.amp_c1_mlm1.norm_sqr() > 0.0 {
                    terms.push(Term {
                        amp: sec.amp_c1_mlm1,
                        l_rad: l,
                        l_harm: l,
                        m: i64::from(l) - 1,
                    });
                }
            }
            1 => {
                if sec.amp_c2_ml.norm_sqr() > 0.0 {
                    terms.push(Term {
                        amp: sec.amp_c2_ml,
                        l_rad: l,
                        l_harm: l,
                        m: i64::from(l),
                    });
                }
            }
            2 if l >= 1 && sec.amp_c3.norm_sqr() > 0.0 => {
                terms.push(Term {
                    amp: sec.amp_c3,
                    l_rad: l - 1,
                    l_harm: l - 1,
                    m: i64::from(l) - 1,
                });
            }
            _ => {}
        }
    }
    terms
}

/// What a map integrates: everything, one spinor slot, or one energy branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Total,
    /// Zero-based spinor slot; the CLI spelling `component:1..4` is
    /// one-based.
    Component(u8),
    Sector(EnergySector),
}

impl DensityKind {
    /// Zero-based spinor slots this kind sums over.
    fn components(self) -> std::ops::Range<usize> {
        match self {
            DensityKind::Component(k) => usize::from(k)..usize::from(k) + 1,
            _ => 0..4,
        }
    }
}

impl std::fmt::Display for DensityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityKind::Total => f.write_str("total"),
            DensityKind::Component(k) => write!(f, "component:{}", k + 1),
            DensityKind::Sector(s) => write!(f, "sector:{s}"),
        }
    }
}

impl std::str::FromStr for DensityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "total" {
            return Ok(DensityKind::Total);
        }
        if let Some(k) = t.strip_prefix("component:") {
            let k: u8 = k
                .parse()
                .map_err(|_| Error::Config(format!("bad component index in '{s}'")))?;
            if !(1..=4).contains(&k) {
                return Err(Error::Config(format!(
                    "component index {k} out of range 1..4"
                )));
            }
            return Ok(DensityKind::Component(k - 1));
        }
        if let Some(sec) = t.strip_prefix("sector:") {
            return Ok(DensityKind::Sector(sec.parse()?));
        }
        Err(Error::Config(format!(
            "unknown density kind '{s}' (total | component:1..4 | sector:positive|negative)"
        )))
    }
}

/// Density over the full `(theta, phi)` grid at one radius and instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    pub kind: DensityKind,
    pub time: f64,
    /// Sphere radius in oscillator lengths.
    pub radius: f64,
    /// `[0, pi]`, both poles included.
    pub theta: Vec<f64>,
    /// `[0, 2 pi)`, endpoint excluded.
    pub phi: Vec<f64>,
    /// Row-major: `values[i * phi.len() + j]` belongs to `(theta[i], phi[j])`.
    pub values: Vec<f64>,
}

impl DensityMap {
    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.phi.len() + i_phi]
    }

    pub fn row(&self, i_theta: usize) -> &[f64] {
        &self.values[i_theta * self.phi.len()..(i_theta + 1) * self.phi.len()]
    }

    /// Grid indices and value of the largest entry.
    pub fn peak(&self) -> (usize, usize, f64) {
        let (mut bi, mut bj, mut bv) = (0, 0, f64::NEG_INFINITY);
        for i in 0..self.theta.len() {
            for (j, v) in self.row(i).iter().enumerate() {
                if *v > bv {
                    (bi, bj, bv) = (i, j, *v);
                }
            }
        }
        (bi, bj, bv)
    }

    /// Index of the row closest to the equator.
    pub fn equator_index(&self) -> usize {
        let half = std::f64::consts::FRAC_PI_2;
        (0..self.theta.len())
            .min_by(|a, b| {
                (self.theta[*a] - half)
                    .abs()
                    .partial_cmp(&(self.theta[*b] - half).abs())
                    .unwrap()
            })
            .unwrap_or(0)
    }
}

/// Density around one circle of constant `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiProfile {
    pub kind: DensityKind,
    pub time: f64,
    pub radius: f64,
    pub theta: f64,
    pub phi: Vec<f64>,
    pub values: Vec<f64>,
}

fn grid(n: usize, span: f64, inclusive: bool) -> Vec<f64> {
    let denom = if inclusive { n - 1 } else { n } as f64;
    (0..n).map(|i| span * i as f64 / denom).collect()
}

/// Sums `|component|^2` over the kind's spinor slots along one theta row.
fn row_values(
    terms: &[Vec<Term>],
    radial: &[f64],
    theta: f64,
    phase: &[Complex64],
    n_phi: usize,
) -> Vec<f64> {
    let n_m = radial.len();
    let mut out = vec![0.0; n_phi];
    for comp in terms {
        if comp.is_empty() {
            continue;
        }
        let mut cm = vec![Complex64::new(0.0, 0.0); n_m];
        for t in comp {
            let y = stretched_harmonic_theta(t.l_harm, t.m, theta)
                .expect("terms carry valid stretched orders");
            cm[t.m as usize] += t.amp * radial[t.l_rad as usize] * y;
        }
        for (j, slot) in out.iter_mut().enumerate() {
            let mut f = Complex64::new(0.0, 0.0);
            for (m, c) in cm.iter().enumerate() {
                if c.norm_sqr() > 0.0 {
                    f += c * phase[m * n_phi + j];
                }
            }
            *slot += f.norm_sqr();
        }
    }
    out
}

fn resolve_kind<'a>(
    state: &'a DiracState,
    kind: DensityKind,
) -> Result<std::borrow::Cow<'a, DiracState>> {
    match kind {
        DensityKind::Sector(s) => Ok(std::borrow::Cow::Owned(projected_state(state, s)?)),
        DensityKind::Component(k) if k > 3 => {
            Err(Error::Config(format!("component index {k} out of range")))
        }
        _ => Ok(std::borrow::Cow::Borrowed(state)),
    }
}

fn phase_table(n_m: usize, phi: &[f64]) -> Vec<Complex64> {
    let n_phi = phi.len();
    let mut table = vec![Complex64::new(0.0, 0.0); n_m * n_phi];
    for m in 0..n_m {
        for (j, p) in phi.iter().enumerate() {
            table[m * n_phi + j] = Complex64::from_polar(1.0, m as f64 * p);
        }
    }
    table
}

/// Builds the full map. Rows are independent and evaluated in parallel.
pub fn density_map(
    state: &DiracState,
    kind: DensityKind,
    radius: f64,
    theta_points: usize,
    phi_points: usize,
) -> Result<DensityMap> {
    if !radius.is_finite() || radius <= 0.0 || theta_points < 2 || phi_points < 4 {
        return Err(Error::Config(format!(
            "bad map grid: radius {radius}, {theta_points} x {phi_points}"
        )));
    }
    let source = resolve_kind(state, kind)?;
    let terms: Vec<Vec<Term>> = kind
        .components()
        .map(|k| component_terms(&source, k))
        .collect();
    let n_m = source.l_max() + 1;
    let radial: Vec<f64> = (0..n_m as u32)
        .map(|l| radial_node_free(l, radius))
        .collect();
    let theta = grid(theta_points, std::f64::consts::PI, true);
    let phi = grid(phi_points, 2.0 * std::f64::consts::PI, false);
    let phase = phase_table(n_m, &phi);
    let values: Vec<f64> = theta
        .par_iter()
        .flat_map_iter(|th| row_values(&terms, &radial, *th, &phase, phi_points))
        .collect();
    Ok(DensityMap {
        kind,
        time: state.time,
        radius,
        theta,
        phi,
        values,
    })
}

/// One circle of the map, without building the rest.
pub fn phi_profile(
    state: &DiracState,
    kind: DensityKind,
    radius: f64,
    theta: f64,
    phi_points: usize,
) -> Result<PhiProfile> {
    if !radius.is_finite() || radius <= 0.0 || phi_points < 4 || !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Config(format!(
            "bad profile: radius {radius}, theta {theta}, {phi_points} points"
        )));
    }
    let source = resolve_kind(state, kind)?;
    let terms: Vec<Vec<Term>> = kind
        .components()
        .map(|k| component_terms(&source, k))
        .collect();
    let n_m = source.l_max() + 1;
    let radial: Vec<f64> = (0..n_m as u32)
        .map(|l| radial_node_free(l, radius))
        .collect();
    let phi = grid(phi_points, 2.0 * std::f64::consts::PI, false);
    let phase = phase_table(n_m, &phi);
    let values = row_values(&terms, &radial, theta, &phase, phi_points);
    Ok(PhiProfile {
        kind,
        time: state.time,
        radius,
        theta,
        phi,
        values,
    })
}

/// Weighted circular mean of the profile's angle, in `(-pi, pi]`.
/// Robust against wrap-around, which a plain weighted average is not.
pub fn circular_mean_phi(phi: &[f64], values: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (p, v) in phi.iter().zip(values) {
        s += v * p.sin();
        c += v * p.cos();
    }
    s.atan2(c)
}
