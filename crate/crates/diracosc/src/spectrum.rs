//! Level labels, exact eigenvalues, and the per-wave mixing coefficients.
//!
//! Bound states carry `(n, l, j)` with `j = l +- 1/2`; the radial quantum
//! number is `(n - l)/2` so `n >= l` and `n - l` must be even. In natural
//! units the eigenvalue is
//!
//! `E = sqrt(r A + 1)`, with
//! `A = 2(n - j) + 1` for `l = j - 1/2` and `A = 2(n + j) + 3` for `l = j + 1/2`.
//!
//! Levels with `A = 0` (the `n = l`, `j = l + 1/2` tower) sit exactly at the
//! rest energy and are infinitely degenerate; they are annihilated by the
//! lowering side of the spin-orbit coupling and have no partner level.
//! Every other level mixes with exactly one partner, which is what makes the
//! time evolution closed-form.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rest/Compton frequency in natural units.
pub const OMEGA0: f64 = 1.0;

/// Oscillator length `b = 1/sqrt(r)` in Compton units.
pub fn oscillator_length(r: f64) -> f64 {
    assert!(r > 0.0, "r must be positive");
    1.0 / r.sqrt()
}

/// Which side of the spin-orbit doublet a level sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `j = l + 1/2` (spin parallel to l, i.e. `l = j - 1/2`).
    JPlus,
    /// `j = l - 1/2` (spin antiparallel, i.e. `l = j + 1/2`).
    JMinus,
}

/// A bound-state label `(n, l, j)`. Half-integers are stored doubled, so
/// `two_j = 2j` is always an odd integer and never a rounded float.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelLabel {
    pub n: u32,
    pub l: u32,
    pub two_j: u32,
}

impl LevelLabel {
    /// Validates `j = l +- 1/2`, `n >= l`, `n - l` even.
    pub fn new(n: u32, l: u32, two_j: u32) -> Result<Self> {
        let ok_j = two_j == 2 * l + 1 || (l > 0 && two_j == 2 * l - 1);
        if !ok_j {
            return Err(Error::Domain(format!(
                "two_j = {two_j} is not 2l +- 1 for l = {l}"
            )));
        }
        if n < l || !(n - l).is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "n = {n} must be >= l = {l} with n - l even"
            )));
        }
        Ok(Self { n, l, two_j })
    }

    pub fn branch(&self) -> Branch {
        if self.two_j == 2 * self.l + 1 {
            Branch::JPlus
        } else {
            Branch::JMinus
        }
    }

    /// The integer `A` entering `E = sqrt(r A + 1)`.
    pub fn a_index(&self) -> u32 {
        match self.branch() {
            // 2(n - j) + 1 with j = l + 1/2
            Branch::JPlus => 2 * (self.n - self.l),
            // 2(n + j) + 3 with j = l - 1/2
            Branch::JMinus => 2 * (self.n + self.l + 1),
        }
    }

    pub fn j(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }
}

impl std::fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(n={}, l={}, j={}/2)", self.n, self.l, self.two_j)
    }
}

/// Exact eigenvalue `sqrt(r A + 1)` in rest-energy units.
pub fn energy(label: LevelLabel, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("r = {r} must be positive")));
    }
    Ok((r * f64::from(label.a_index()) + 1.0).sqrt())
}

/// The unique partner level mixed in by the off-diagonal coupling:
/// same `j`, `n' = n - 1`, and `l' = l + 1` on the `j = l + 1/2` branch,
/// `l' = l - 1` on the `j = l - 1/2` branch. Levels with `A = 0` have none.
pub fn partner_label(label: LevelLabel) -> Result<LevelLabel> {
    if label.a_index() == 0 {
        return Err(Error::NoPartner(label.to_string()));
    }
    let (n, l) = match label.branch() {
        Branch::JPlus => (label.n - 1, label.l + 1),
        Branch::JMinus => (label.n - 1, label.l - 1),
    };
    LevelLabel::new(n, l, label.two_j)
}

/// Frequencies and mixing amplitude for the partial wave `|n=l, l, m=l>` with
/// spin down, the only structured piece of a circular packet.
///
/// The spin-down part at orbital l splits between `j = l + 1/2` (stays at the
/// rest energy) and `j = l - 1/2` with
/// `omega_l = sqrt(2 r (2l+1) + 1)` and mixing amplitude
/// `a_l = sqrt(1 - (omega0/omega_l)^2)` to its partner at orbital `l - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoefficients {
    pub l: u32,
    /// `j = l - 1/2` eigenvalue; doubles as the mixing frequency.
    pub e_minus: f64,
    /// Same number as `e_minus`: in natural units E and omega coincide.
    pub omega_l: f64,
    /// Upper-lower mixing amplitude, `a_l^2 + (omega0/omega_l)^2 = 1`.
    pub a_l: f64,
}

pub fn spectral_coefficients(l: u32, r: f64) -> SpectralCoefficients {
    assert!(r > 0.0, "r must be positive");
    let s = 2.0 * r * f64::from(2 * l + 1);
    let omega_l = (s + 1.0).sqrt();
    // s / (1 + s) evaluated this way keeps the identity with omega0/omega_l
    // exact to rounding for both tiny and large r.
    let a_l = (s / (s + 1.0)).sqrt();
    SpectralCoefficients {
        l,
        e_minus: omega_l,
        omega_l,
        a_l,
    }
}

/// Nonrelativistic `j = l - 1/2` splitting, `(2l + 1) omega` above the
/// (zeroed) `j = l + 1/2` tower.
pub fn nonrel_e_minus(l: u32, r: f64) -> f64 {
    r * f64::from(2 * l + 1)
}

/// First-order expansion `omega_l ~ omega0 + (2l+1) omega`, valid for
/// `r (2l+1) << 1`.
///
/// Diagnostic only: it is the reading under which the structured part of the
/// packet becomes two rigid waves drifting at angular velocity +-2 omega in
/// phi. The engine always uses the exact `omega_l`.
pub fn linearized_omega_l(l: u32, r: f64) -> f64 {
    OMEGA0 * (1.0 + r * f64::from(2 * l + 1))
}
