//! Arrival-time distributions for free and tunneling quantum wave packets.
//!
//! The detector is modeled as a narrow imaginary (absorbing) potential well:
//! the absorption rate of a wave packet gives a raw arrival-time distribution,
//! and operator normalization compensates the undetected (reflected or
//! transmitted) amplitude per momentum component.  Stationary scattering
//! states of piecewise-constant complex potentials are assembled with 2x2
//! transfer matrices, momentum-space integrals run on Gauss-Legendre grids,
//! and an independent Crank-Nicolson propagator cross-checks the stationary
//! results.
//!
//! Modules:
//! - [`potential`]: piecewise-constant complex potential profiles
//! - [`transfer`]: matching and transfer matrices
//! - [`scattering`]: per-region amplitudes, transmission amplitude and phase
//! - [`kernels`]: absorption kernel and its normalized limit regimes
//! - [`wavepacket`]: momentum-space amplitudes on quadrature grids
//! - [`distributions`]: arrival-time densities on time grids
//! - [`moments`]: mean arrival times and tunneling times
//! - [`tdse`]: Crank-Nicolson grid propagation oracle

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the
// out-of-domain sign, which `x <= 0.0` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod kernels;
pub mod moments;
pub mod potential;
pub mod quadrature;
pub mod scattering;
pub mod tdse;
pub mod transfer;
pub mod wavepacket;

mod error;
pub(crate) mod numeric;

pub use error::{Error, Result};
pub use potential::{
    standard_profiles, AbsorberScaling, PotentialProfile, ProfileKind, Region, ScalingCase,
};
pub use scattering::{BoundaryCondition, ScatteringSolution, TransmissionData};
pub use transfer::Matrix2c;
pub use wavepacket::{GaussianSpec, MomentumAmplitude};

/// Particle mass and reduced Planck constant used by every formula.
///
/// The default is atomic units (`m = hbar = 1`), matching the parameter
/// conventions of the shipped CLI defaults.  Both constants are kept explicit
/// so the formulas stay dimensionally honest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub mass: f64,
    pub hbar: f64,
}

impl Units {
    pub const fn atomic() -> Self {
        Units {
            mass: 1.0,
            hbar: 1.0,
        }
    }

    /// `2m / hbar^2`, the factor converting potential to squared wavenumber.
    pub fn two_m_over_hbar2(&self) -> f64 {
        2.0 * self.mass / (self.hbar * self.hbar)
    }
}

impl Default for Units {
    fn default() -> Self {
        Self::atomic()
    }
}
