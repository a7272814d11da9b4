//! Physical constants (SI) and a few unit helpers.

use std::f64::consts::PI;

/// Fundamental constants used throughout the engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant [J s].
    pub h: f64,
    /// Reduced Planck constant [J s].
    pub hbar: f64,
    /// Speed of light [m/s].
    pub c: f64,
    /// Vacuum permittivity [F/m].
    pub eps0: f64,
    /// Boltzmann constant [J/K].
    pub k_b: f64,
    /// Atomic mass unit [kg].
    pub amu: f64,
    /// Standard gravity [m/s^2].
    pub g_earth: f64,
    /// Earth rotation rate [rad/s].
    pub omega_earth: f64,
}

pub const H: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = H / (2.0 * PI);
pub const C: f64 = 299_792_458.0;
pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const K_B: f64 = 1.380_649e-23;
pub const AMU: f64 = 1.660_539_066_60e-27;
pub const G_EARTH: f64 = 9.806_65;
pub const OMEGA_EARTH: f64 = 7.292_115_0e-5;
/// One Debye [C m].
pub const DEBYE: f64 = 3.335_640_951_98e-30;

pub const SI: PhysicalConstants = PhysicalConstants {
    h: H,
    hbar: HBAR,
    c: C,
    eps0: EPS0,
    k_b: K_B,
    amu: AMU,
    g_earth: G_EARTH,
    omega_earth: OMEGA_EARTH,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        SI
    }
}

/// Converts a polarizability volume in cubic angstrom to SI units [C m^2/V],
/// i.e. returns `4π ε0 · volume`.
pub fn polarizability_from_a3(volume_a3: f64) -> f64 {
    4.0 * PI * EPS0 * volume_a3 * 1e-30
}

/// Inverse of [`polarizability_from_a3`].
pub fn polarizability_to_a3(alpha: f64) -> f64 {
    alpha / (4.0 * PI * EPS0 * 1e-30)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_positive_and_consistent() {
        let c = PhysicalConstants::default();
        for v in [c.h, c.hbar, c.c, c.eps0, c.k_b, c.amu, c.g_earth, c.omega_earth] {
            assert!(v > 0.0);
        }
        assert!((c.hbar - c.h / (2.0 * PI)).abs() / c.hbar < 1e-12);
    }

    #[test]
    fn polarizability_volume_round_trip() {
        let a = polarizability_from_a3(100.0);
        assert!((polarizability_to_a3(a) - 100.0).abs() < 1e-12);
        assert!((a - 1.112_650_056e-38).abs() / a < 1e-8);
    }
}
