//! Truncated-basis cross-checks for the closed-form engine.
//!
//! The packet only ever populates, per conserved `(j, m_j)`, either a single
//! level pinned at the rest energy or one partner pair. This module builds
//! those blocks as explicit Hermitian matrices - diagonal `(+1, -1)` in rest
//! units, off-diagonal coupling of magnitude `sqrt(2 r (2l+1))` with the
//! +-i phase from [`crate::angular::sgn_phase`] - and exponentiates them via
//! the closed-form 2x2 eigendecomposition. No general eigensolver, and none
//! of the engine's trigonometric shortcuts, so agreement is a real check.
//!
//! The second half is plain quadrature: Gauss-Legendre nodes and a
//! product-grid norm integral used to validate the position-space
//! reconstruction against the amplitude norm.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::angular::{sgn_phase, stretched_harmonic_theta};
use crate::density::component_terms;
use crate::evolution::DiracState;
use crate::{Error, Result};

/// One conserved `(j, m_j)` block of the Hamiltonian over the `n = l` levels
/// reachable by a circular packet, together with its eigensystem.
#[derive(Debug, Clone)]
pub struct JBlock {
    pub l: u32,
    pub two_j: u32,
    pub two_m_j: i64,
    pub dimension: usize,
    /// Row-major Hamiltonian; for dimension 1 only `[0][0]` is meaningful.
    pub hamiltonian: [[Complex64; 2]; 2],
    pub eigenvalues: [f64; 2],
    /// Columns are the eigenvectors matching `eigenvalues`.
    pub eigenvectors: [[Complex64; 2]; 2],
}

/// Builds the block for the upper level `|n=l, l, j>` at total momentum
/// `two_j in {2l+1, 2l-1}`. The `2l+1` block is the degenerate tower (1x1,
/// eigenvalue exactly 1); the `2l-1` block couples to the partner at
/// orbital `l-1`.
pub fn build_block(l: u32, two_j: u32, two_m_j: i64, r: f64) -> Result<JBlock> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("r = {r} must be positive")));
    }
    if two_m_j.rem_euclid(2) != 1 || two_m_j.abs() > i64::from(two_j) {
        return Err(Error::Domain(format!(
            "two_m_j = {two_m_j} invalid for two_j = {two_j}"
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    if two_j == 2 * l + 1 {
        return Ok(JBlock {
            l,
            two_j,
            two_m_j,
            dimension: 1,
            hamiltonian: [[one, zero], [zero, zero]],
            eigenvalues: [1.0, 0.0],
            eigenvectors: [[one, zero], [zero, zero]],
        });
    }
    if l >= 1 && two_j == 2 * l - 1 {
        // Coupling magnitude sqrt(2r) * sqrt(2l+1) from the ladder algebra.
        let h = sgn_phase(l, l - 1, two_j)?.value()
            * (2.0 * r * f64::from(2 * l + 1)).sqrt();
        let e = (1.0 + h.norm_sqr()).sqrt();
        let norm = (2.0 * e * (e + 1.0)).sqrt();
        let v_plus = [Complex64::new((1.0 + e) / norm, 0.0), h / norm];
        let v_minus = [-h.conj() / norm, Complex64::new((1.0 + e) / norm, 0.0)];
        return Ok(JBlock {
            l,
            two_j,
            two_m_j,
            dimension: 2,
            hamiltonian: [[one, h.conj()], [h, -one]],
            eigenvalues: [e, -e],
            eigenvectors: [
                [v_plus[0], v_minus[0]],
                [v_plus[1], v_minus[1]],
            ],
        });
    }
    Err(Error::Domain(format!(
        "two_j = {two_j} is not 2l +- 1 for l = {l}"
    )))
}

impl JBlock {
    /// `exp(-i H t)` assembled from the eigensystem.
    pub fn propagator(&self, t: f64) -> [[Complex64; 2]; 2] {
        let zero = Complex64::new(0.0, 0.0);
        let mut u = [[zero; 2]; 2];
        for k in 0..self.dimension {
            let phase = Complex64::from_polar(1.0, -self.eigenvalues[k] * t);
            for (row, u_row) in u.iter_mut().enumerate().take(self.dimension) {
                for (col, entry) in u_row.iter_mut().enumerate().take(self.dimension) {
                    *entry += phase * self.eigenvectors[row][k] * self.eigenvectors[col][k].conj();
                }
            }
        }
        u
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence; good to machine precision
/// for the orders used here (tested against exact polynomial integrals).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let mid = n / 2;
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[mid] = 0.0;
        weights[mid] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Squared norm of the position-space reconstruction over a product grid:
/// Gauss-Legendre in the radius and in `cos(theta)`, trapezoid in `phi`.
/// Must close on the squared amplitude norm; the gap measures the
/// special-function stack, not the state.
///
/// `radial_order` and `angular_order` are the Gauss-Legendre orders; the
/// `phi` count is derived so the trapezoid rule is exact for every azimuthal
/// mode the state contains. Orders below 16 are rejected as meaningless.
pub fn quadrature_norm_sqr(
    state: &DiracState,
    radial_order: usize,
    angular_order: usize,
) -> Result<f64> {
    if radial_order < 16 || angular_order < 16 {
        return Err(Error::Contract(
            "quadrature orders below 16 are not meaningful here".into(),
        ));
    }
    let l_max = state.l_max();
    let u_max = (2.0 * l_max as f64 + 3.0).sqrt() + 8.0;
    let (xu, wu) = gauss_legendre(radial_order);
    let (xc, wc) = gauss_legendre(angular_order);
    let n_phi = (2 * l_max + 4).max(2 * angular_order);
    let d_phi = 2.0 * std::f64::consts::PI / n_phi as f64;

    let terms: Vec<_> = (0..4).map(|k| component_terms(state, k)).collect();
    let n_m = l_max + 1;
    // exp(i m phi) table, m-major
    let mut phase = vec![Complex64::new(0.0, 0.0); n_m * n_phi];
    for m in 0..n_m {
        for (ip, slot) in phase[m * n_phi..(m + 1) * n_phi].iter_mut().enumerate() {
            *slot = Complex64::from_polar(1.0, m as f64 * d_phi * ip as f64);
        }
    }

    let total: f64 = xu
        .par_iter()
        .zip(wu.par_iter())
        .map(|(xi, wi)| {
            let u = 0.5 * u_max * (xi + 1.0);
            let du_w = 0.5 * u_max * wi;
            let radial: Vec<f64> = (0..=l_max as u32)
                .map(|l| crate::angular::radial_node_free(l, u))
                .collect();
            let mut shell = 0.0;
            for (ct, wt) in xc.iter().zip(&wc) {
                let theta = ct.acos();
                let mut row = 0.0;
                for comp in &terms {
                    let mut cm = vec![Complex64::new(0.0, 0.0); n_m];
                    for t in comp {
                        let y = stretched_harmonic_theta(t.l_harm, t.m, theta)
                            .expect("terms carry valid stretched orders");
                        cm[t.m as usize] += t.amp * radial[t.l_rad as usize] * y;
                    }
                    for ip in 0..n_phi {
                        let mut f = Complex64::new(0.0, 0.0);
                        for (m, c) in cm.iter().enumerate() {
                            if c.norm_sqr() > 0.0 {
                                f += c * phase[m * n_phi + ip];
                            }
                        }
                        row += f.norm_sqr() * d_phi;
                    }
                }
                shell += wt * row;
            }
            du_w * u * u * shell
        })
        .sum();
    Ok(total)
}
