//! Grating transmission functions, their Fourier coefficients and the quantum
//! and classical Talbot coefficients.
//!
//! A grating with transmission `t(x) = Σ b_n e^{2πinx/d}` enters every near-field
//! calculation only through its Talbot coefficients
//!
//! ```text
//! B_n(ξ) = Σ_j b_j b*_{j-n} exp[iπ(n - 2j)ξ]
//! ```
//!
//! which equal the Fourier components of `t(x - ξd/2) t*(x + ξd/2)`. Closed forms
//! exist for the standing-wave gratings; the direct sum is kept as the reference
//! route. Classical (ballistic) coefficients `C_n(ξ)` replace the autocorrelation
//! by the transmission probability and the eikonal momentum kick.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::{GratingKind, GratingSpec};
use crate::constants::{C, EPS0, H};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::particle::ParticleSpec;
use crate::specialfn::{bessel_i_complex, bessel_j, bessel_j_complex, sinc};

/// Largest tail magnitude tolerated at the truncation boundary of `b_n`.
pub const TAIL_TOLERANCE: f64 = 1e-10;

const CLASSICAL_MAX_POINTS: usize = 1 << 18;
const CLASSICAL_REL_TOL: f64 = 1e-7;

/// Fourier amplitudes indexed `n = -order_max ..= order_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    order_max: usize,
    values: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn from_fn(order_max: usize, f: impl Fn(i32) -> Complex64) -> Self {
        let n = order_max as i32;
        FourierCoeffs {
            order_max,
            values: (-n..=n).map(f).collect(),
        }
    }

    pub fn order_max(&self) -> usize {
        self.order_max
    }

    /// Coefficient `n`; zero outside the stored range.
    pub fn get(&self, n: i32) -> Complex64 {
        let idx = n + self.order_max as i32;
        if idx < 0 || idx as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[idx as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        let n = self.order_max as i32;
        (-n..=n).zip(self.values.iter().copied())
    }

    /// Largest magnitude among the two boundary coefficients.
    pub fn tail(&self) -> f64 {
        let n = self.order_max as i32;
        self.get(n).norm().max(self.get(-n).norm())
    }

    /// Evaluates the Fourier sum at `x / d = u`.
    pub fn evaluate(&self, u: f64) -> Complex64 {
        self.iter()
            .map(|(n, c)| c * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * u))
            .sum()
    }
}

/// Fourier components `A_n = f sinc(πnf)` of a binary mask's transmission probability.
pub fn mask_fourier(open_fraction: f64, order_max: usize) -> Result<FourierCoeffs> {
    if !(open_fraction > 0.0 && open_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "open fraction must lie in (0, 1), got {open_fraction}"
        )));
    }
    Ok(FourierCoeffs::from_fn(order_max, |n| {
        Complex64::new(open_fraction * sinc(PI * n as f64 * open_fraction), 0.0)
    }))
}

/// Peak eikonal phase of a continuous Gaussian standing wave,
/// `φ0 = 4√(2π) α P_L / (h c ε0 w_y v_z)`.
pub fn kdtli_phi0(particle: &ParticleSpec, power: f64, waist_y: f64, velocity: f64) -> Result<f64> {
    require_positive("laser power", power)?;
    require_positive("laser waist", waist_y)?;
    require_positive("velocity", velocity)?;
    Ok(4.0 * (2.0 * PI).sqrt() * particle.alpha_opt * power / (H * C * EPS0 * waist_y * velocity))
}

/// Phase and mean antinode photon number of a short standing-wave pulse.
///
/// `φ0 = 4π α E_L f(0,0) / (h c ε0)` and `n0 = 4 σ_abs E_L λ f(0,0) / (h c)`, the
/// photon fluence at the antinode times the cross-section.
pub fn otima_pulse_params(
    particle: &ParticleSpec,
    pulse_energy: f64,
    spot_peak: f64,
    wavelength: f64,
) -> Result<(f64, f64)> {
    require_positive("pulse energy", pulse_energy)?;
    require_positive("spot profile peak", spot_peak)?;
    require_positive("wavelength", wavelength)?;
    let phi0 = 4.0 * PI * particle.alpha_opt * pulse_energy * spot_peak / (H * C * EPS0);
    let n0 = 4.0 * particle.sigma_abs * pulse_energy * wavelength * spot_peak / (H * C);
    Ok((phi0, n0))
}

/// Absorption-to-phase ratio `β = n0 / 2φ0 = σ_abs ε0 λ / (2π α)`.
pub fn beta_parameter(particle: &ParticleSpec, wavelength: f64) -> Result<f64> {
    require_positive("wavelength", wavelength)?;
    if particle.alpha_opt == 0.0 {
        return Err(Error::DegenerateParticle(
            "beta is undefined for vanishing optical polarizability".into(),
        ));
    }
    Ok(particle.sigma_abs * EPS0 * wavelength / (2.0 * PI * particle.alpha_opt))
}

/// Transmission coefficients of the phase grating `t(x) = exp[iφ0 cos²(πx/d)]`:
/// `b_n = iⁿ e^{iφ0/2} J_n(φ0/2)`.
pub fn phase_grating_bn(phi0: f64, order_max: usize) -> FourierCoeffs {
    let prefactor = Complex64::from_polar(1.0, 0.5 * phi0);
    FourierCoeffs::from_fn(order_max, |n| {
        Complex64::i().powi(n.rem_euclid(4)) * prefactor * bessel_j(n, 0.5 * phi0)
    })
}

/// Transmission coefficients of the depleting standing wave
/// `t(x) = exp[(iφ0 - n0/2) cos²(πx/d)]`: `b_n = e^{c} I_n(c)` with `c = iφ0/2 - n0/4`.
pub fn ionizing_grating_bn(phi0: f64, n0: f64, order_max: usize) -> Result<FourierCoeffs> {
    require_non_negative("n0", n0)?;
    let c = Complex64::new(-0.25 * n0, 0.5 * phi0);
    let prefactor = c.exp();
    Ok(FourierCoeffs::from_fn(order_max, |n| {
        prefactor * bessel_i_complex(n, c)
    }))
}

/// Transmission coefficients `b_n` of a grating (for a binary mask `b_n = A_n`).
pub fn transmission_coeffs(spec: &GratingSpec, order_max: usize) -> Result<FourierCoeffs> {
    spec.validate()?;
    match spec.kind {
        GratingKind::MaterialMask { open_fraction } => mask_fourier(open_fraction, order_max),
        GratingKind::PhaseGrating { phi0 } => Ok(phase_grating_bn(phi0, order_max)),
        GratingKind::IonizingGrating { phi0, n0 } => ionizing_grating_bn(phi0, n0, order_max),
    }
}

/// Fourier components `A_n` of the transmission probability `|t(x)|²`.
pub fn transmission_probability_coeffs(spec: &GratingSpec, order_max: usize) -> Result<FourierCoeffs> {
    spec.validate()?;
    Ok(match spec.kind {
        GratingKind::MaterialMask { open_fraction } => mask_fourier(open_fraction, order_max)?,
        GratingKind::PhaseGrating { .. } => {
            FourierCoeffs::from_fn(order_max, |n| Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0))
        }
        GratingKind::IonizingGrating { n0, .. } => {
            let scale = (-0.5 * n0).exp();
            FourierCoeffs::from_fn(order_max, |n| {
                scale * bessel_i_complex(n, Complex64::new(-0.5 * n0, 0.0))
            })
        }
    })
}

/// Complex transmission `t(x)` at `x / d = u`. Mask slits are centered on integer `u`.
pub fn transmission(spec: &GratingSpec, u: f64) -> Complex64 {
    match spec.kind {
        GratingKind::MaterialMask { open_fraction } => {
            let r = u - u.round();
            if r.abs() < 0.5 * open_fraction {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
        GratingKind::PhaseGrating { phi0 } => {
            let c2 = (PI * u).cos().powi(2);
            Complex64::from_polar(1.0, phi0 * c2)
        }
        GratingKind::IonizingGrating { phi0, n0 } => {
            let c2 = (PI * u).cos().powi(2);
            Complex64::new(-0.5 * n0 * c2, phi0 * c2).exp()
        }
    }
}

/// Poisson probability of absorbing `k` photons at position `x` in a standing wave
/// of period `d` (wavelength `2d`) with antinode mean `n0`.
pub fn absorption_probability(k: u32, x: f64, n0: f64, period: f64) -> Result<f64> {
    require_non_negative("n0", n0)?;
    require_positive("period", period)?;
    let n = n0 * (PI * x / period).cos().powi(2);
    if n == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    // log form keeps large k finite
    let mut log_fact = 0.0;
    for i in 2..=k {
        log_fact += (i as f64).ln();
    }
    Ok((-n + k as f64 * n.ln() - log_fact).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffLabel {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, PartialEq)]
enum Route {
    /// `B_n(ξ) = J_n(φ0 sin πξ)`.
    PhaseBessel {
        phi0: f64,
    },
    /// Closed form for depleting standing waves with direct-sum fallback.
    Ionizing {
        phi0: f64,
        n0: f64,
        fallback: FourierCoeffs,
    },
    /// Exact overlap of shifted slit apertures.
    MaskOverlap {
        open_fraction: f64,
    },
    Direct(FourierCoeffs),
    /// A mask has no phase profile, so `C_n(ξ) = A_n`.
    ClassicalMask {
        open_fraction: f64,
    },
    ClassicalQuadrature {
        spec: GratingSpec,
        points: usize,
    },
}

/// A Talbot coefficient function `(n, ξ) -> B_n(ξ)` (or `C_n(ξ)`).
#[derive(Debug, Clone, PartialEq)]
pub struct TalbotCoeffFn {
    label: CoeffLabel,
    spec: Option<GratingSpec>,
    route: Route,
}

impl TalbotCoeffFn {
    pub fn label(&self) -> CoeffLabel {
        self.label
    }

    pub fn spec(&self) -> Option<&GratingSpec> {
        self.spec.as_ref()
    }

    /// Evaluates the coefficient of harmonic `n` at argument `ξ`.
    pub fn eval(&self, n: i32, xi: f64) -> Result<Complex64> {
        match &self.route {
            Route::PhaseBessel { phi0 } => Ok(Complex64::new(bessel_j(n, phi0 * (PI * xi).sin()), 0.0)),
            Route::Ionizing { phi0, n0, fallback } => {
                Ok(ionizing_closed_form(n, xi, *phi0, *n0).unwrap_or_else(|| direct_sum(fallback, n, xi)))
            }
            Route::MaskOverlap { open_fraction } => Ok(mask_overlap(*open_fraction, n, xi)),
            Route::Direct(coeffs) => Ok(direct_sum(coeffs, n, xi)),
            Route::ClassicalMask { open_fraction } => {
                Ok(Complex64::new(open_fraction * sinc(PI * n as f64 * open_fraction), 0.0))
            }
            Route::ClassicalQuadrature { spec, points } => classical_quadrature(spec, *points, n, xi),
        }
    }

    /// The transmission-probability component `A_n = B_n(0)`.
    pub fn a(&self, n: i32) -> Result<Complex64> {
        self.eval(n, 0.0)
    }
}

/// Quantum Talbot coefficients of a grating via the closed forms.
pub fn talbot_coeff_quantum(spec: &GratingSpec) -> Result<TalbotCoeffFn> {
    talbot_coeff_quantum_with_order(spec, spec.default_order())
}

/// As [`talbot_coeff_quantum`], with an explicit truncation order for the
/// direct-sum fallback of depleting gratings.
pub fn talbot_coeff_quantum_with_order(spec: &GratingSpec, order_max: usize) -> Result<TalbotCoeffFn> {
    spec.validate()?;
    let route = match spec.kind {
        GratingKind::PhaseGrating { phi0 } => Route::PhaseBessel { phi0 },
        GratingKind::IonizingGrating { phi0, n0 } => {
            let fallback = ionizing_grating_bn(phi0, n0, order_max)?;
            let tail = fallback.tail();
            if tail > TAIL_TOLERANCE {
                return Err(Error::Truncation { order: order_max, tail });
            }
            Route::Ionizing { phi0, n0, fallback }
        }
        GratingKind::MaterialMask { open_fraction } => Route::MaskOverlap { open_fraction },
    };
    Ok(TalbotCoeffFn {
        label: CoeffLabel::Quantum,
        spec: Some(*spec),
        route,
    })
}

/// Talbot coefficients by direct summation over the given transmission coefficients.
pub fn talbot_coeff_direct(coeffs: FourierCoeffs) -> TalbotCoeffFn {
    TalbotCoeffFn {
        label: CoeffLabel::Quantum,
        spec: None,
        route: Route::Direct(coeffs),
    }
}

/// Classical ballistic coefficients
/// `C_n(ξ) = ∫ du |t(u)|² exp[-2πinu - iξ d ∂_x φ]` over one period, evaluated by
/// the trapezoidal rule with at least `quadrature_points` nodes, doubled until
/// two successive levels agree.
pub fn talbot_coeff_classical(spec: &GratingSpec, quadrature_points: usize) -> Result<TalbotCoeffFn> {
    spec.validate()?;
    if quadrature_points < 256 {
        return Err(Error::Domain(format!(
            "classical quadrature needs at least 256 points, got {quadrature_points}"
        )));
    }
    let route = match spec.kind {
        GratingKind::MaterialMask { open_fraction } => Route::ClassicalMask { open_fraction },
        _ => Route::ClassicalQuadrature {
            spec: *spec,
            points: quadrature_points,
        },
    };
    Ok(TalbotCoeffFn {
        label: CoeffLabel::Classical,
        spec: Some(*spec),
        route,
    })
}

fn direct_sum(coeffs: &FourierCoeffs, n: i32, xi: f64) -> Complex64 {
    let order = coeffs.order_max() as i32;
    let lo = (-order).max(n - order);
    let hi = order.min(n + order);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in lo..=hi {
        let phase = PI * (n - 2 * j) as f64 * xi;
        sum += coeffs.get(j) * coeffs.get(j - n).conj() * Complex64::from_polar(1.0, phase);
    }
    sum
}

/// Closed form of the depleting-grating coefficients in principal-branch complex
/// arithmetic:
///
/// `B_n(ξ) = e^{-n0/2} [(ζc - ζi)/(ζc + ζi)]^{n/2} J_n[sgn(ζc + ζi) √(ζc² - ζi²)]`
///
/// with `ζc = φ0 sin πξ` and `ζi = (n0/2) cos πξ`. Returns `None` where `ζc + ζi`
/// (nearly) vanishes and the ratio is singular.
pub fn ionizing_closed_form(n: i32, xi: f64, phi0: f64, n0: f64) -> Option<Complex64> {
    let zc = phi0 * (PI * xi).sin();
    let zi = 0.5 * n0 * (PI * xi).cos();
    ionizing_from_zetas(n, zc, zi, n0)
}

pub(crate) fn ionizing_from_zetas(n: i32, zc: f64, zi: f64, n0: f64) -> Option<Complex64> {
    let sum = zc + zi;
    let diff = zc - zi;
    if sum.abs() <= 1e-6 * zc.abs().max(zi.abs()) || sum == 0.0 {
        return None;
    }
    let ratio = Complex64::new(diff / sum, 0.0);
    let root = ratio.sqrt();
    let arg = Complex64::new(diff * sum, 0.0).sqrt() * sum.signum();
    let value = (-0.5 * n0).exp() * root.powi(n) * bessel_j_complex(n, arg);
    value.is_finite().then_some(value)
}

/// Exact `B_n(ξ)` of a binary slit mask: the Fourier component of the overlap of
/// the aperture with its copy shifted by `ξd`, re-centered by `ξd/2`.
fn mask_overlap(f: f64, n: i32, xi: f64) -> Complex64 {
    let s = xi - xi.floor();
    let mut total = Complex64::new(0.0, 0.0);
    let mut interval = |a: f64, b: f64| {
        let len = b - a;
        if len <= 0.0 {
            return;
        }
        let nf = n as f64;
        total += len * sinc(PI * nf * len) * Complex64::from_polar(1.0, -PI * nf * (a + b));
    };
    if s < f {
        interval(s - 0.5 * f, 0.5 * f);
    }
    if s > 1.0 - f {
        interval(1.0 - 0.5 * f, s + 0.5 * f);
    }
    total * Complex64::from_polar(1.0, PI * n as f64 * xi)
}

fn classical_quadrature(spec: &GratingSpec, points: usize, n: i32, xi: f64) -> Result<Complex64> {
    let (phi0, n0) = match spec.kind {
        GratingKind::PhaseGrating { phi0 } => (phi0, 0.0),
        GratingKind::IonizingGrating { phi0, n0 } => (phi0, n0),
        GratingKind::MaterialMask { .. } => unreachable!("masks use the exact route"),
    };
    // |t|² = exp(-n0 cos²πu), d ∂x φ = -π φ0 sin 2πu
    let trapezoid = |m: usize| -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..m {
            let u = k as f64 / m as f64 - 0.5;
            let weight = (-n0 * (PI * u).cos().powi(2)).exp();
            let phase = -2.0 * PI * n as f64 * u + xi * PI * phi0 * (2.0 * PI * u).sin();
            sum += weight * Complex64::from_polar(1.0, phase);
        }
        sum / m as f64
    };
    let mut m = points;
    let mut coarse = trapezoid(m);
    while m < CLASSICAL_MAX_POINTS {
        m *= 2;
        let fine = trapezoid(m);
        let change = (fine - coarse).norm();
        if change <= CLASSICAL_REL_TOL * fine.norm().max(1e-3) {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Accuracy(format!(
        "classical coefficient C_{n}({xi}) not converged with {m} quadrature points"
    )))
}
