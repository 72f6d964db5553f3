//! Circular coherent wave packets in the (3+1)-dimensional Dirac oscillator.
//!
//! The Dirac oscillator is the Dirac equation with the minimal substitution
//! `p -> p - i m omega r beta`; it is exactly solvable and its spectrum is
//! organized in spin-orbit doublets. A circular coherent packet (maximal
//! orbital projection, Poisson-weighted partial waves) started on the upper
//! components evolves in closed form: every partial wave mixes with exactly
//! one partner level, so the propagator reduces to 1x1 and 2x2 blocks per
//! conserved (j, m_j) manifold and no time stepping is ever needed.
//!
//! The crate computes that evolution in three representations (full Dirac,
//! Foldy-Wouthuysen, and the nonrelativistic limit), the resulting spin and
//! angular-momentum time series (collapse and revival of the transverse spin,
//! the spin-orbit pendulum), the decomposition into positive- and
//! negative-energy sectors with a co-rotating and a counter-rotating density
//! lobe, and probability-density maps on spheres centred on the packet orbit.
//!
//! Units are natural throughout: `hbar = m = c = 1`, so the rest energy is 1,
//! the Compton frequency `omega0 = 1`, and the single model parameter
//! `r = hbar*omega / (m c^2)` is both the trap frequency `omega` and the
//! inverse squared oscillator length, `b = 1/sqrt(r)`. Lengths are quoted in
//! units of `b` unless stated otherwise.

pub mod angular;
pub mod density;
pub mod evolution;
pub mod observables;
pub mod oracle;
pub mod scenario;
pub mod spectrum;
pub mod wavepacket;

use thiserror::Error;

/// Error type shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Quantum numbers that do not label a physical level.
    #[error("invalid quantum numbers: {0}")]
    Domain(String),
    /// Level exists but has no spin-orbit partner (it is annihilated by the
    /// lowering side of the coupling).
    #[error("level {0} has no partner: it lies in the degenerate tower with E = 1")]
    NoPartner(String),
    /// Harmonic order outside the stretched set m in {l, l-1}.
    #[error("unsupported harmonic order: l = {l}, m = {m}")]
    UnsupportedOrder { l: u32, m: i64 },
    /// Poisson tail tolerance not reachable under the hard partial-wave cap.
    #[error("truncation failure: {0}")]
    Truncation(String),
    /// An operation was called on a state in the wrong representation.
    #[error("representation mismatch: {0}")]
    Representation(String),
    /// An API contract was violated (bad argument combination).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Configuration file or flag errors.
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
