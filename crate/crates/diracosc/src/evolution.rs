//! Closed-form time evolution, sector by sector.
//!
//! A circular packet populates, per orbital index l, only four kets. The
//! total-j decomposition splits them into a rest-energy tower and one mixing
//! pair, so the propagator factorizes into 1x1 phases and a 2x2 rotation:
//! exact at any time, for any step, in all three representations, and
//! composable (`U(t1 + t2) = U(t2) U(t1)`).
//!
//! The same decomposition diagonalizes the energy-sign split: the mixing
//! pair carries the only negative-energy content, with time-independent
//! weights and a counter-rotating phase.

use num_complex::Complex64;

use crate::angular::spin_orbit_split;
use crate::spectrum::{nonrel_e_minus, spectral_coefficients, OMEGA0};
use crate::wavepacket::Representation;
use crate::{Error, Result};

/// Amplitudes of one orbital sector.
///
/// Kets, in field order: upper spin-up `|n=l, l, m_l=l>`, upper spin-up
/// `|n=l, l, m_l=l-1>`, upper spin-down `|n=l, l, m_l=l>`, lower spin-up
/// `|n=l-1, l-1, m_l=l-1>`. The lower spin-down component is never reached.
/// For l = 0 the second and fourth kets do not exist and must stay zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorState {
    pub l: u32,
    pub amp_c1_ml: Complex64,
    pub amp_c1_mlm1: Complex64,
    pub amp_c2_ml: Complex64,
    pub amp_c3: Complex64,
}

impl SectorState {
    pub fn empty(l: u32) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        SectorState {
            l,
            amp_c1_ml: zero,
            amp_c1_mlm1: zero,
            amp_c2_ml: zero,
            amp_c3: zero,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_c1_ml.norm_sqr()
            + self.amp_c1_mlm1.norm_sqr()
            + self.amp_c2_ml.norm_sqr()
            + self.amp_c3.norm_sqr()
    }

    pub fn is_empty(&self) -> bool {
        self.norm_sqr() == 0.0
    }
}

/// Full state of a packet at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracState {
    /// One entry per orbital index, contiguous from zero: `sectors[i].l == i`.
    pub sectors: Vec<SectorState>,
    pub representation: Representation,
    pub r: f64,
    /// Instant the amplitudes refer to.
    pub time: f64,
}

impl DiracState {
    pub fn l_max(&self) -> usize {
        self.sectors.len().saturating_sub(1)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sectors.iter().map(SectorState::norm_sqr).sum()
    }

    /// Probability carried by each spinor component; the last entry is the
    /// never-populated lower spin-down slot.
    pub fn component_weights(&self) -> [f64; 4] {
        let mut w = [0.0; 4];
        for s in &self.sectors {
            w[0] += s.amp_c1_ml.norm_sqr() + s.amp_c1_mlm1.norm_sqr();
            w[1] += s.amp_c2_ml.norm_sqr();
            w[2] += s.amp_c3.norm_sqr();
        }
        w
    }

    /// Drops every sector above `l_cap`. The result is not renormalized;
    /// the discarded mass is exactly the dropped sector norms.
    pub fn truncated(&self, l_cap: usize) -> DiracState {
        let keep = (l_cap + 1).min(self.sectors.len());
        DiracState {
            sectors: self.sectors[..keep].to_vec(),
            ..self.clone()
        }
    }

    /// State at absolute time `t`, reached in one exact step from here.
    pub fn evolve_to(&self, t: f64) -> DiracState {
        self.evolve_by(t - self.time)
    }

    /// State a step `dt` later (or earlier, for negative `dt`).
    pub fn evolve_by(&self, dt: f64) -> DiracState {
        let sectors = self
            .sectors
            .iter()
            .map(|s| advance_sector(s, self.representation, self.r, dt))
            .collect();
        DiracState {
            sectors,
            representation: self.representation,
            r: self.r,
            time: self.time + dt,
        }
    }
}

/// Rotates one sector through `dt`.
///
/// The stretched tower (first ket, and the `j = l + 1/2` share of the
/// second/third) sits exactly at the rest energy, so it only picks up the
/// representation's tower phase. The `j = l - 1/2` share mixes with the
/// lower partner through a 2x2 block whose closed form is a trig rotation.
fn advance_sector(sec: &SectorState, rep: Representation, r: f64, dt: f64) -> SectorState {
    // phase of the rest-energy tower
    let tower = match rep {
        Representation::Dirac | Representation::FoldyWouthuysen => {
            Complex64::from_polar(1.0, -OMEGA0 * dt)
        }
        // nonrelativistic energies are measured from the rest energy
        Representation::NonRelativistic => Complex64::new(1.0, 0.0),
    };
    if sec.l == 0 {
        return SectorState {
            l: 0,
            amp_c1_ml: tower * sec.amp_c1_ml,
            amp_c1_mlm1: sec.amp_c1_mlm1,
            amp_c2_ml: tower * sec.amp_c2_ml,
            amp_c3: sec.amp_c3,
        };
    }
    let split = spin_orbit_split(sec.l);
    let (c_p, c_m) = (
        Complex64::new(split.c_plus, 0.0),
        Complex64::new(split.c_minus, 0.0),
    );
    let p = c_m * sec.amp_c1_mlm1 + c_p * sec.amp_c2_ml;
    let q = -c_p * sec.amp_c1_mlm1 + c_m * sec.amp_c2_ml;
    let d = sec.amp_c3;

    let p_t = tower * p;
    let (q_t, d_t) = match rep {
        Representation::Dirac => {
            let sc = spectral_coefficients(sec.l, r);
            let (sin, cos) = (sc.omega_l * dt).sin_cos();
            // exp(-i H dt) on the (upper, lower) pair, H = omega_l * M,
            // M Hermitian with M^2 = 1
            let f = Complex64::new(cos, -(OMEGA0 / sc.omega_l) * sin);
            let mix = sc.a_l * sin;
            (f * q - mix * d, mix * q + f.conj() * d)
        }
        Representation::FoldyWouthuysen => (
            Complex64::from_polar(1.0, -spectral_coefficients(sec.l, r).omega_l * dt) * q,
            // the decoupled lower slot belongs to the -omega_l eigenvalue
            Complex64::from_polar(1.0, spectral_coefficients(sec.l, r).omega_l * dt) * d,
        ),
        Representation::NonRelativistic => (
            Complex64::from_polar(1.0, -nonrel_e_minus(sec.l, r) * dt) * q,
            d,
        ),
    };
    SectorState {
        l: sec.l,
        amp_c1_ml: tower * sec.amp_c1_ml,
        amp_c1_mlm1: c_m * p_t - c_p * q_t,
        amp_c2_ml: c_p * p_t + c_m * q_t,
        amp_c3: d_t,
    }
}

/// Sign of the energy branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergySector {
    Positive,
    Negative,
}

impl EnergySector {
    pub fn as_str(self) -> &'static str {
        match self {
            EnergySector::Positive => "positive",
            EnergySector::Negative => "negative",
        }
    }
}

impl std::str::FromStr for EnergySector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+" => Ok(EnergySector::Positive),
            "negative" | "neg" | "-" => Ok(EnergySector::Negative),
            other => Err(Error::Config(format!("unknown energy sector '{other}'"))),
        }
    }
}

impl std::fmt::Display for EnergySector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Energy-sign weights of one orbital sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorSplit {
    pub l: u32,
    pub positive: f64,
    pub negative: f64,
}

/// Energy-sign decomposition of a state; weights are constants of motion.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorProjection {
    pub per_l: Vec<SectorSplit>,
    pub positive_weight: f64,
    pub negative_weight: f64,
}

/// `(q_plus, q_minus)` for eigenvalue `e`: the spinor weights of the
/// positive branch, `q_plus^2 + q_minus^2 = 1`.
fn branch_weights(e: f64) -> (f64, f64) {
    (((e + OMEGA0) / (2.0 * e)).sqrt(), ((e - OMEGA0) / (2.0 * e)).sqrt())
}

/// Rest-tower amplitude `p` and mixing-pair amplitude `q` of a sector.
fn tower_pair(sec: &SectorState) -> (Complex64, Complex64) {
    let split = spin_orbit_split(sec.l);
    (
        split.c_minus * sec.amp_c1_mlm1 + split.c_plus * sec.amp_c2_ml,
        -split.c_plus * sec.amp_c1_mlm1 + split.c_minus * sec.amp_c2_ml,
    )
}

/// Branch amplitudes `(positive, negative)` of the mixing pair.
fn branch_amplitudes(sec: &SectorState, r: f64) -> (Complex64, Complex64) {
    let (_, q) = tower_pair(sec);
    let e = spectral_coefficients(sec.l, r).omega_l;
    let (qp, qm) = branch_weights(e);
    let i = Complex64::new(0.0, 1.0);
    (qp * q - i * qm * sec.amp_c3, qm * q + i * qp * sec.amp_c3)
}

/// Splits the norm between the energy branches. Only meaningful for the
/// full dynamics; the transformed representations have no lower content by
/// construction.
pub fn project_energy_sectors(state: &DiracState) -> Result<SectorProjection> {
    if state.representation != Representation::Dirac {
        return Err(Error::Representation(format!(
            "energy-sign split is defined for the dirac representation, not {}",
            state.representation
        )));
    }
    let mut per_l = Vec::with_capacity(state.sectors.len());
    let (mut pos, mut neg) = (0.0, 0.0);
    for sec in &state.sectors {
        let split = if sec.l == 0 {
            SectorSplit {
                l: 0,
                positive: sec.norm_sqr(),
                negative: 0.0,
            }
        } else {
            let (p, _) = tower_pair(sec);
            let (bp, bn) = branch_amplitudes(sec, state.r);
            SectorSplit {
                l: sec.l,
                positive: sec.amp_c1_ml.norm_sqr() + p.norm_sqr() + bp.norm_sqr(),
                negative: bn.norm_sqr(),
            }
        };
        pos += split.positive;
        neg += split.negative;
        per_l.push(split);
    }
    Ok(SectorProjection {
        per_l,
        positive_weight: pos,
        negative_weight: neg,
    })
}

/// Keeps one energy branch of the state, unnormalized, so the two
/// projections sum back to the original amplitudes.
pub fn projected_state(state: &DiracState, sector: EnergySector) -> Result<DiracState> {
    if state.representation != Representation::Dirac {
        return Err(Error::Representation(format!(
            "energy-sign split is defined for the dirac representation, not {}",
            state.representation
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    let sectors = state
        .sectors
        .iter()
        .map(|sec| {
            if sec.l == 0 {
                return match sector {
                    EnergySector::Positive => *sec,
                    EnergySector::Negative => SectorState::empty(0),
                };
            }
            let split = spin_orbit_split(sec.l);
            let (p, _) = tower_pair(sec);
            let e = spectral_coefficients(sec.l, state.r).omega_l;
            let (qp, qm) = branch_weights(e);
            let (bp, bn) = branch_amplitudes(sec, state.r);
            let (a, p_kept, q_kept, d_kept) = match sector {
                EnergySector::Positive => (sec.amp_c1_ml, p, qp * bp, i * qm * bp),
                EnergySector::Negative => {
                    let zero = Complex64::new(0.0, 0.0);
                    (zero, zero, qm * bn, -i * qp * bn)
                }
            };
            SectorState {
                l: sec.l,
                amp_c1_ml: a,
                amp_c1_mlm1: split.c_minus * p_kept - split.c_plus * q_kept,
                amp_c2_ml: split.c_plus * p_kept + split.c_minus * q_kept,
                amp_c3: d_kept,
            }
        })
        .collect();
    Ok(DiracState {
        sectors,
        ..state.clone()
    })
}

/// Evolves through the explicit block Hamiltonians instead of the engine's
/// trig shortcuts. Slow path, full dynamics only; used to cross-check
/// `evolve_to`.
pub fn oracle_evolve(state: &DiracState, t: f64) -> Result<DiracState> {
    if state.representation != Representation::Dirac {
        return Err(Error::Representation(
            "the block cross-check covers the dirac representation only".into(),
        ));
    }
    let dt = t - state.time;
    let sectors = state
        .sectors
        .iter()
        .map(|sec| -> Result<SectorState> {
            let l = sec.l;
            let stretched = crate::oracle::build_block(l, 2 * l + 1, i64::from(2 * l) + 1, state.r)?;
            let us = stretched.propagator(dt)[0][0];
            if l == 0 {
                return Ok(SectorState {
                    l,
                    amp_c1_ml: us * sec.amp_c1_ml,
                    amp_c1_mlm1: sec.amp_c1_mlm1,
                    amp_c2_ml: us * sec.amp_c2_ml,
                    amp_c3: sec.amp_c3,
                });
            }
            let split = spin_orbit_split(l);
            let (c_p, c_m) = (
                Complex64::new(split.c_plus, 0.0),
                Complex64::new(split.c_minus, 0.0),
            );
            let (p, q) = tower_pair(sec);
            let pair = crate::oracle::build_block(l, 2 * l - 1, i64::from(2 * l) - 1, state.r)?;
            let u = pair.propagator(dt);
            let p_t = us * p;
            let q_t = u[0][0] * q + u[0][1] * sec.amp_c3;
            let d_t = u[1][0] * q + u[1][1] * sec.amp_c3;
            Ok(SectorState {
                l,
                amp_c1_ml: us * sec.amp_c1_ml,
                amp_c1_mlm1: c_m * p_t - c_p * q_t,
                amp_c2_ml: c_p * p_t + c_m * q_t,
                amp_c3: d_t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiracState {
        sectors,
        representation: state.representation,
        r: state.r,
        time: t,
    })
}

/// Largest single-amplitude distance between two states; shorter states are
/// padded with empty sectors.
pub fn max_amplitude_deviation(a: &DiracState, b: &DiracState) -> f64 {
    let n = a.sectors.len().max(b.sectors.len());
    let mut worst = 0.0f64;
    for l in 0..n {
        let ea = SectorState::empty(l as u32);
        let sa = a.sectors.get(l).unwrap_or(&ea);
        let sb = b.sectors.get(l).unwrap_or(&ea);
        for (x, y) in [
            (sa.amp_c1_ml, sb.amp_c1_ml),
            (sa.amp_c1_mlm1, sb.amp_c1_mlm1),
            (sa.amp_c2_ml, sb.amp_c2_ml),
            (sa.amp_c3, sb.amp_c3),
        ] {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{initial_state, SimConfig};
    use approx::assert_abs_diff_eq;

    fn single_sector(l: u32, amps: [Complex64; 4], rep: Representation, r: f64) -> DiracState {
        let mut sectors: Vec<_> = (0..=l).map(SectorState::empty).collect();
        sectors[l as usize] = SectorState {
            l,
            amp_c1_ml: amps[0],
            amp_c1_mlm1: amps[1],
            amp_c2_ml: amps[2],
            amp_c3: amps[3],
        };
        DiracState {
            sectors,
            representation: rep,
            r,
            time: 0.0,
        }
    }

    fn sigma_z(state: &DiracState) -> f64 {
        state
            .sectors
            .iter()
            .map(|s| {
                s.amp_c1_ml.norm_sqr() + s.amp_c1_mlm1.norm_sqr() + s.amp_c3.norm_sqr()
                    - s.amp_c2_ml.norm_sqr()
            })
            .sum()
    }

    #[test]
    fn zero_step_is_identity() {
        let cfg = SimConfig::new(6.0, 0.5).unwrap();
        for rep in [
            Representation::Dirac,
            Representation::FoldyWouthuysen,
            Representation::NonRelativistic,
        ] {
            let s = initial_state(&cfg.clone().with_representation(rep)).unwrap();
            assert!(max_amplitude_deviation(&s, &s.evolve_by(0.0)) < 1e-15);
        }
    }

    #[test]
    fn pure_upper_tower_gets_a_global_phase() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let cfg = SimConfig::new(5.0, 0.5)
            .unwrap()
            .with_spin(one, zero)
            .unwrap();
        let s0 = initial_state(&cfg).unwrap();
        let t = 2.3;
        let s = s0.evolve_to(t);
        let phase = Complex64::from_polar(1.0, -t);
        for (a, b) in s.sectors.iter().zip(&s0.sectors) {
            assert!((a.amp_c1_ml - phase * b.amp_c1_ml).norm() < 1e-15);
            assert_eq!(a.amp_c2_ml.norm(), 0.0);
            assert_eq!(a.amp_c3.norm(), 0.0);
        }
        // the nonrelativistic tower does not move at all
        let s_nr = initial_state(&cfg.with_representation(Representation::NonRelativistic))
            .unwrap()
            .evolve_to(t);
        assert_abs_diff_eq!(sigma_z(&s_nr), s_nr.norm_sqr(), epsilon = 1e-15);
        assert!((s_nr.sectors[3].amp_c1_ml.im).abs() < 1e-15);
    }

    #[test]
    fn nonrel_single_sector_spin_oscillation() {
        // one spin-down sector: sigma_z = -1 + (16 l / (2l+1)^2) sin^2((2l+1) r t / 2)
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        for (l, r) in [(1u32, 0.5), (2, 0.3), (7, 0.05)] {
            let s0 = single_sector(
                l,
                [zero, zero, one, zero],
                Representation::NonRelativistic,
                r,
            );
            let d = f64::from(2 * l + 1);
            for t in [0.3, 1.0, 4.7, 9.2] {
                let s = s0.evolve_to(t);
                let want = -1.0 + 16.0 * f64::from(l) / (d * d) * (d * r * t / 2.0).sin().powi(2);
                assert_abs_diff_eq!(sigma_z(&s), want, epsilon = 1e-12);
            }
            // full recurrence one period later
            let period = 2.0 * std::f64::consts::PI / (r * d);
            assert!(max_amplitude_deviation(&s0, &s0.evolve_to(period)) < 1e-12);
        }
        // the deepest flip of the packet's sectors: l = 2 reaches -1 + 1.28
        let s0 = single_sector(2, [zero, zero, one, zero], Representation::NonRelativistic, 0.3);
        let t_peak = std::f64::consts::PI / (5.0 * 0.3);
        assert_abs_diff_eq!(sigma_z(&s0.evolve_to(t_peak)), 0.28, epsilon = 1e-12);
    }

    #[test]
    fn fw_single_sector_keeps_lower_empty() {
        let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let s0 = single_sector(
            1,
            [half, zero, half, zero],
            Representation::FoldyWouthuysen,
            0.5,
        );
        // omega_1 = 2, so the mixing beat is at omega_1 - omega0 = 1
        let s = s0.evolve_to(std::f64::consts::PI);
        assert_eq!(s.sectors[1].amp_c3.norm(), 0.0);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-13);
        let want = 4.0 / 9.0 * (1.0 - std::f64::consts::PI.cos());
        assert_abs_diff_eq!(sigma_z(&s), want, epsilon = 1e-12);
    }

    #[test]
    fn dirac_matches_the_block_oracle() {
        let cfg = SimConfig::new(4.0, 0.5).unwrap();
        let s0 = initial_state(&cfg).unwrap();
        for t in [0.9, 1.7, 13.4] {
            let fast = s0.evolve_to(t);
            let slow = oracle_evolve(&s0, t).unwrap();
            assert!(max_amplitude_deviation(&fast, &slow) < 1e-12);
        }
        let fw = initial_state(&cfg.with_representation(Representation::FoldyWouthuysen)).unwrap();
        assert!(matches!(
            oracle_evolve(&fw, 1.0),
            Err(Error::Representation(_))
        ));
    }

    #[test]
    fn branch_split_of_a_pure_mixing_pair() {
        // amplitudes arranged so p = 0, q = 1 at l = 1: the negative share
        // is (omega_l - 1) / (2 omega_l) = 1/4 at omega_1 = 2
        let split = spin_orbit_split(1);
        let s0 = single_sector(
            1,
            [
                Complex64::new(0.0, 0.0),
                Complex64::new(-split.c_plus, 0.0),
                Complex64::new(split.c_minus, 0.0),
                Complex64::new(0.0, 0.0),
            ],
            Representation::Dirac,
            0.5,
        );
        let proj = project_energy_sectors(&s0).unwrap();
        assert_abs_diff_eq!(proj.negative_weight, 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(proj.positive_weight, 0.75, epsilon = 1e-14);
    }

    #[test]
    fn branch_weights_are_constants_of_motion() {
        let cfg = SimConfig::new(6.0, 0.5).unwrap();
        let s0 = initial_state(&cfg).unwrap();
        let p0 = project_energy_sectors(&s0).unwrap();
        assert_abs_diff_eq!(p0.positive_weight + p0.negative_weight, s0.norm_sqr(), epsilon = 1e-13);
        for t in [0.4, 2.9, 17.0] {
            let p = project_energy_sectors(&s0.evolve_to(t)).unwrap();
            assert_abs_diff_eq!(p.negative_weight, p0.negative_weight, epsilon = 1e-13);
            for (a, b) in p.per_l.iter().zip(&p0.per_l) {
                assert_abs_diff_eq!(a.negative, b.negative, epsilon = 1e-13);
                assert_abs_diff_eq!(a.positive, b.positive, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn branch_projections_reassemble_exactly() {
        let cfg = SimConfig::new(6.0, 0.5).unwrap();
        let s = initial_state(&cfg).unwrap().evolve_to(3.1);
        let pos = projected_state(&s, EnergySector::Positive).unwrap();
        let neg = projected_state(&s, EnergySector::Negative).unwrap();
        for ((a, b), c) in pos.sectors.iter().zip(&neg.sectors).zip(&s.sectors) {
            assert!((a.amp_c1_ml + b.amp_c1_ml - c.amp_c1_ml).norm() < 1e-14);
            assert!((a.amp_c1_mlm1 + b.amp_c1_mlm1 - c.amp_c1_mlm1).norm() < 1e-14);
            assert!((a.amp_c2_ml + b.amp_c2_ml - c.amp_c2_ml).norm() < 1e-14);
            assert!((a.amp_c3 + b.amp_c3 - c.amp_c3).norm() < 1e-14);
        }
        // each projection is itself invariant under evolve-then-project
        let pos_t = projected_state(&s.evolve_to(7.7), EnergySector::Positive).unwrap();
        assert!(max_amplitude_deviation(&pos.evolve_to(7.7), &pos_t) < 1e-12);
    }

    #[test]
    fn negative_branch_counter_rotates() {
        let split = spin_orbit_split(1);
        let s0 = single_sector(
            1,
            [
                Complex64::new(0.0, 0.0),
                Complex64::new(-split.c_plus, 0.0),
                Complex64::new(split.c_minus, 0.0),
                Complex64::new(0.0, 0.0),
            ],
            Representation::Dirac,
            0.5,
        );
        let omega = spectral_coefficients(1, 0.5).omega_l;
        let t = 0.83;
        let (_, n0) = branch_amplitudes(&s0.sectors[1], 0.5);
        let (p1, n1) = branch_amplitudes(&s0.evolve_to(t).sectors[1], 0.5);
        assert!((n1 - Complex64::from_polar(1.0, omega * t) * n0).norm() < 1e-13);
        let (p0, _) = branch_amplitudes(&s0.sectors[1], 0.5);
        assert!((p1 - Complex64::from_polar(1.0, -omega * t) * p0).norm() < 1e-13);
    }

    #[test]
    fn branch_split_requires_full_dynamics() {
        let cfg = SimConfig::new(4.0, 0.5)
            .unwrap()
            .with_representation(Representation::NonRelativistic);
        let s = initial_state(&cfg).unwrap();
        assert!(matches!(
            project_energy_sectors(&s),
            Err(Error::Representation(_))
        ));
        assert!(matches!(
            projected_state(&s, EnergySector::Negative),
            Err(Error::Representation(_))
        ));
    }

    #[test]
    fn truncation_drops_tail_sectors() {
        let cfg = SimConfig::new(6.0, 0.5).unwrap();
        let s = initial_state(&cfg).unwrap();
        let t = s.truncated(4);
        assert_eq!(t.l_max(), 4);
        assert!(t.norm_sqr() < s.norm_sqr());
        assert!(max_amplitude_deviation(&t, &s.truncated(s.l_max() + 9)).min(1.0) > 0.0);
    }

    #[test]
    fn small_r_engine_reduces_to_the_nonrel_one() {
        // modulo the rest phase exp(-i t), the full engine at r = 1e-8
        // tracks the nonrel engine through a whole slow period; the residue
        // is the O(sqrt(r)) lower-component content plus O(r^2) beat drift
        let r = 1e-8;
        let cfg = SimConfig::new(20.0, r).unwrap();
        let full = initial_state(&cfg).unwrap();
        let slow =
            initial_state(&cfg.clone().with_representation(Representation::NonRelativistic))
                .unwrap();
        let period = cfg.nonrel_period();
        for frac in [0.05, 0.31, 0.5, 1.0] {
            let t = frac * period;
            let mut shifted = slow.evolve_to(t);
            let phase = Complex64::from_polar(1.0, -t);
            for sec in &mut shifted.sectors {
                sec.amp_c1_ml *= phase;
                sec.amp_c1_mlm1 *= phase;
                sec.amp_c2_ml *= phase;
                sec.amp_c3 *= phase;
            }
            assert!(max_amplitude_deviation(&full.evolve_to(t), &shifted) < 1e-3);
        }
    }

    proptest::proptest! {
        #[test]
        fn sector_norm_is_conserved(
            l in 1u32..=60,
            amps in proptest::array::uniform8(-1.0f64..1.0),
            dt in 0.0f64..25.0,
            r in 0.01f64..4.0,
        ) {
            let a = [
                Complex64::new(amps[0], amps[1]),
                Complex64::new(amps[2], amps[3]),
                Complex64::new(amps[4], amps[5]),
                Complex64::new(amps[6], amps[7]),
            ];
            for rep in [
                Representation::Dirac,
                Representation::FoldyWouthuysen,
                Representation::NonRelativistic,
            ] {
                let s0 = single_sector(l, a, rep, r);
                let s1 = s0.evolve_by(dt);
                proptest::prop_assert!((s1.norm_sqr() - s0.norm_sqr()).abs() < 1e-12);
                // one step of dt equals two steps of dt/2
                let two = s0.evolve_by(dt / 2.0).evolve_by(dt / 2.0);
                proptest::prop_assert!(max_amplitude_deviation(&s1, &two) < 1e-12);
                // and stepping back returns the start
                let back = s1.evolve_by(-dt);
                proptest::prop_assert!(max_amplitude_deviation(&back, &s0) < 1e-12);
            }
        }
    }
}
