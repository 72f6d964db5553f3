//! Angular algebra for circular packets: the spin-orbit split of a stretched
//! spin-down ket, the +-i coupling phases, and the two special-function
//! families the packet ever touches.
//!
//! Phase conventions are pinned once here: Condon-Shortley harmonics and the
//! standard Clebsch-Gordan choice that keeps the stretched component of
//! `|j = l + 1/2>` positive. Everything downstream (evolution, projection,
//! densities) inherits these choices, and the upper-lower coupling phase is
//! then exactly +-i as encoded in [`SgnPhase`].

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Decomposition of `|l, m_l = l> x |down>` into total-j states with
/// `m_j = l - 1/2`:
///
/// `|l,l,down> = c_plus |l, j=l+1/2> + c_minus |l, j=l-1/2>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOrbitSplit {
    pub l: u32,
    pub c_plus: f64,
    pub c_minus: f64,
}

/// `c_plus = 1/sqrt(2l+1)`, `c_minus = sqrt(2l/(2l+1))`.
pub fn spin_orbit_split(l: u32) -> SpinOrbitSplit {
    let d = f64::from(2 * l + 1);
    SpinOrbitSplit {
        l,
        c_plus: 1.0 / d.sqrt(),
        c_minus: (f64::from(2 * l) / d).sqrt(),
    }
}

/// Phase of the upper-to-lower coupling matrix element, fixed by the
/// conventions above: `-i` when the partner steps up in l, `+i` when it
/// steps down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgnPhase {
    PlusI,
    MinusI,
}

impl SgnPhase {
    pub fn value(self) -> Complex64 {
        match self {
            SgnPhase::PlusI => Complex64::new(0.0, 1.0),
            SgnPhase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

/// Coupling phase for a partner pair `(l -> l_prime)` at total momentum
/// `two_j = 2j`. Valid pairs: `l' = l + 1` with `j = l + 1/2`, or
/// `l' = l - 1` with `j = l - 1/2`.
pub fn sgn_phase(l: u32, l_prime: u32, two_j: u32) -> Result<SgnPhase> {
    if l_prime == l + 1 && two_j == 2 * l + 1 {
        Ok(SgnPhase::MinusI)
    } else if l > 0 && l_prime == l - 1 && two_j == 2 * l - 1 {
        Ok(SgnPhase::PlusI)
    } else {
        Err(Error::Domain(format!(
            "no partner pair l={l} -> l'={l_prime} at two_j={two_j}"
        )))
    }
}

/// Theta-dependent part of the stretched harmonic `Y_l^m`, `m in {l, l-1}`,
/// including normalization and the Condon-Shortley sign; the full harmonic is
/// this times `exp(i m phi)`.
///
/// Evaluated in log space so l up to a few hundred stays finite:
/// `Y_l^l ~ (-1)^l sin^l(theta)`, `Y_l^{l-1} ~ (-1)^{l-1} cos(theta) sin^{l-1}(theta)`.
pub fn stretched_harmonic_theta(l: u32, m: i64, theta: f64) -> Result<f64> {
    let lf = f64::from(l);
    if m == i64::from(l) {
        // ln of sqrt((2l+1)/(4 pi (2l)!)) * (2l-1)!!
        let ln_norm = 0.5 * ((2.0 * lf + 1.0).ln() - (4.0 * std::f64::consts::PI).ln())
            + 0.5 * ln_gamma(2.0 * lf + 1.0)
            - lf * std::f64::consts::LN_2
            - ln_gamma(lf + 1.0);
        let s = theta.sin();
        if l > 0 && s <= 0.0 {
            return Ok(0.0);
        }
        let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
        // l = 0 must not touch ln(sin) at the poles
        let ln_sin = if l == 0 { 0.0 } else { lf * s.ln() };
        Ok(sign * (ln_norm + ln_sin).exp())
    } else if l >= 1 && m == i64::from(l) - 1 {
        // ln of sqrt((2l+1)/(4 pi (2l-1)!)) * (2l-1)!!
        let ln_norm = 0.5 * ((2.0 * lf + 1.0).ln() - (4.0 * std::f64::consts::PI).ln())
            - 0.5 * ln_gamma(2.0 * lf)
            + ln_gamma(2.0 * lf + 1.0)
            - lf * std::f64::consts::LN_2
            - ln_gamma(lf + 1.0);
        let s = theta.sin();
        let c = theta.cos();
        if l > 1 && s <= 0.0 {
            return Ok(0.0);
        }
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        let body = if l == 1 {
            c
        } else {
            c * ((lf - 1.0) * s.ln()).exp()
        };
        Ok(sign * ln_norm.exp() * body)
    } else {
        Err(Error::UnsupportedOrder { l, m })
    }
}

/// Stretched harmonic `Y_l^m(theta, phi)` for `m in {l, l-1}`.
pub fn stretched_harmonic(l: u32, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    let body = stretched_harmonic_theta(l, m, theta)?;
    let mf = m as f64;
    Ok(Complex64::from_polar(1.0, mf * phi) * body)
}

/// Node-free radial function of the lowest level at orbital l,
/// `R_l(u) = sqrt(2/Gamma(l + 3/2)) u^l exp(-u^2/2)`, with u in oscillator
/// lengths and `int R_l^2 u^2 du = 1`.
pub fn radial_node_free(l: u32, u: f64) -> f64 {
    assert!(u >= 0.0, "radius must be nonnegative");
    let lf = f64::from(l);
    let ln_norm = 0.5 * (std::f64::consts::LN_2 - ln_gamma(lf + 1.5));
    if l == 0 {
        return (ln_norm - 0.5 * u * u).exp();
    }
    if u == 0.0 {
        return 0.0;
    }
    (ln_norm + lf * u.ln() - 0.5 * u * u).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::gauss_legendre;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn split_of_low_orbitals() {
        let s0 = spin_orbit_split(0);
        assert_abs_diff_eq!(s0.c_plus, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(s0.c_minus, 0.0, epsilon = 0.0);
        let s1 = spin_orbit_split(1);
        assert_abs_diff_eq!(s1.c_plus, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s1.c_minus, (2f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn sgn_phase_table() {
        assert_eq!(sgn_phase(1, 2, 3).unwrap(), SgnPhase::MinusI);
        assert_eq!(sgn_phase(1, 0, 1).unwrap(), SgnPhase::PlusI);
        assert_eq!(sgn_phase(7, 6, 13).unwrap(), SgnPhase::PlusI);
        assert!(sgn_phase(1, 3, 3).is_err());
        assert!(sgn_phase(1, 0, 3).is_err());
        assert_eq!(sgn_phase(0, 1, 1).unwrap(), SgnPhase::MinusI);
    }

    #[test]
    fn harmonic_reference_values() {
        let y00 = stretched_harmonic(0, 0, 1.234, 0.777).unwrap();
        assert_abs_diff_eq!(y00.re, 1.0 / (4.0 * PI).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(y00.im, 0.0, epsilon = 1e-15);

        // Y_1^1 at the equator: -sqrt(3/(8 pi))
        let y11 = stretched_harmonic(1, 1, PI / 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(y11.re, -(3.0 / (8.0 * PI)).sqrt(), epsilon = 1e-15);

        // Y_1^0 = sqrt(3/(4 pi)) cos(theta)
        let y10 = stretched_harmonic(1, 0, 0.3, 0.0).unwrap();
        assert_abs_diff_eq!(
            y10.re,
            (3.0 / (4.0 * PI)).sqrt() * 0.3f64.cos(),
            epsilon = 1e-14
        );

        // poles: sin^l kills everything with l >= 1
        assert_abs_diff_eq!(
            stretched_harmonic(5, 5, 0.0, 1.0).unwrap().norm(),
            0.0,
            epsilon = 0.0
        );

        // large order must stay finite in log space
        let big = stretched_harmonic(200, 200, PI / 2.0, 0.0).unwrap();
        assert!(big.norm().is_finite() && big.norm() > 0.0);

        assert!(stretched_harmonic(3, 1, 1.0, 0.0).is_err());
        assert!(stretched_harmonic(0, -1, 1.0, 0.0).is_err());
    }

    #[test]
    fn radial_reference_values() {
        // R_0(0) = sqrt(2/Gamma(3/2)) = sqrt(4/sqrt(pi))
        assert_abs_diff_eq!(
            radial_node_free(0, 0.0),
            (4.0 / PI.sqrt()).sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(radial_node_free(3, 0.0), 0.0, epsilon = 0.0);
        let v = radial_node_free(40, 20f64.sqrt());
        assert!(v.is_finite() && v > 0.0);
    }

    /// Quadrature closure of the radial normalization, including high orders.
    #[test]
    fn radial_norm_by_quadrature() {
        let (x, w) = gauss_legendre(220);
        for l in [0u32, 1, 2, 7, 40, 60] {
            let u_max = (2.0 * f64::from(l) + 3.0).sqrt() + 8.0;
            let mut s = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                let u = 0.5 * u_max * (xi + 1.0);
                let r = radial_node_free(l, u);
                s += wi * 0.5 * u_max * r * r * u * u;
            }
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    /// Orthonormality of the two stretched families on the sphere.
    #[test]
    fn harmonic_norms_by_quadrature() {
        let (x, w) = gauss_legendre(160);
        let n_phi = 400usize;
        for l in [0u32, 1, 2, 5, 20, 40, 60] {
            for m in [i64::from(l), i64::from(l) - 1] {
                if m < 0 {
                    continue;
                }
                // phi integral of |Y|^2 is 2 pi; theta part via GL in cos(theta)
                let mut s = 0.0;
                for (xi, wi) in x.iter().zip(&w) {
                    let theta = xi.acos();
                    let y = stretched_harmonic_theta(l, m, theta).unwrap();
                    s += wi * y * y;
                }
                assert_abs_diff_eq!(2.0 * PI * s, 1.0, epsilon = 1e-10);
            }
            // <Y_l^l, Y_l^{l-1}> vanishes through the phi phases
            if l >= 1 {
                let dphi = 2.0 * PI / n_phi as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (xi, wi) in x.iter().zip(&w) {
                    let theta = xi.acos();
                    for k in 0..n_phi {
                        let phi = dphi * k as f64;
                        let a = stretched_harmonic(l, i64::from(l), theta, phi).unwrap();
                        let b = stretched_harmonic(l, i64::from(l) - 1, theta, phi).unwrap();
                        acc += wi * dphi * a.conj() * b;
                    }
                }
                assert!(acc.norm() < 1e-10, "l={l}: {acc}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn split_is_complete(l in 0u32..4000) {
            let s = spin_orbit_split(l);
            let total = s.c_plus * s.c_plus + s.c_minus * s.c_minus;
            proptest::prop_assert!((total - 1.0).abs() < 1e-14);
        }
    }
}
