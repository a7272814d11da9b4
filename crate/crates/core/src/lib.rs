//! Near-field matter-wave interferometry for molecules, clusters and nanoparticles.
//!
//! The engine works entirely with periodic Fourier amplitudes: grating transmission
//! coefficients, Talbot coefficients `B_n(ξ)` (quantum) and `C_n(ξ)` (classical
//! ballistic), density carpets behind a single grating, and three-grating Talbot-Lau
//! fringe signals for material-mask (TL), Kapitza-Dirac (KDTLI) and pulsed
//! photo-depletion (OTIMA) setups. Decoherence and collapse models enter as
//! multiplicative reductions of the fringe harmonics.

// negated comparisons deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carpet;
pub mod config;
pub mod constants;
pub mod decoherence;
pub mod error;
pub mod gratings;
pub mod metrology;
pub mod particle;
pub mod signal;
pub mod specialfn;

pub use config::{GratingKind, GratingSpec, InterferometerConfig, LaserSettings, Scheme, Separation};
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use particle::{ParticleSpec, VelocityDist};

pub use num_complex::Complex64;
