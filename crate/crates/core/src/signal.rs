//! Three-grating fringe signals.
//!
//! With the particle counted behind the third grating as a function of its
//! transverse shift `x_s`, the signal is the Fourier sum
//!
//! ```text
//! S(x_s) = Σ_ℓ A¹_{-ℓ} A³_{-ℓ} B²_{2ℓ}(ℓT/T_T) exp[2πiℓ(x_s - aT²)/d]
//! ```
//!
//! where `A` are the transmission-probability coefficients of the outer gratings
//! and `B²` the Talbot coefficients of the middle one.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::{GratingKind, GratingSpec, InterferometerConfig, Scheme};
use crate::decoherence::{apply_channels, DecoherenceChannel};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::gratings::{
    beta_parameter, kdtli_phi0, otima_pulse_params, talbot_coeff_classical, talbot_coeff_quantum, TalbotCoeffFn,
};
use crate::particle::{talbot_time, velocity_quadrature, ParticleSpec};
use crate::specialfn::{bessel_i_complex, bessel_j, bessel_j_complex, sinc};

/// Velocity nodes used when averaging over a continuous distribution.
pub const VELOCITY_NODES: usize = 48;
const VISIBILITY_GRID: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Quantum,
    Classical,
}

/// Fringe signal as Fourier amplitudes `S_ℓ`, `ℓ = -L..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeSignal {
    period: f64,
    scheme: Scheme,
    amplitudes: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityResult {
    /// `(max - min) / (max + min)` of the fringe.
    pub v_full: f64,
    /// `2|S_1| / S_0`.
    pub v_sin: f64,
    /// `arg S_1` [rad].
    pub phase: f64,
}

impl FringeSignal {
    /// Builds a signal from `2L + 1` amplitudes ordered from `ℓ = -L`.
    pub fn new(period: f64, scheme: Scheme, amplitudes: Vec<Complex64>) -> Result<Self> {
        require_positive("period", period)?;
        if amplitudes.len().is_multiple_of(2) {
            return Err(Error::Domain("fringe amplitudes need an odd count".into()));
        }
        Ok(FringeSignal {
            period,
            scheme,
            amplitudes,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Highest harmonic `L`.
    pub fn order(&self) -> usize {
        self.amplitudes.len() / 2
    }

    pub fn amplitude(&self, l: i32) -> Complex64 {
        let idx = l + self.order() as i32;
        if idx < 0 || idx as usize >= self.amplitudes.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.amplitudes[idx as usize]
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Mean transmission `S_0`.
    pub fn offset(&self) -> f64 {
        self.amplitude(0).re
    }

    /// `S(x_s)` at transverse shift `x_s` [m].
    pub fn evaluate(&self, x_s: f64) -> f64 {
        let l_max = self.order() as i32;
        let u = x_s / self.period;
        let mut sum = 0.0;
        for l in -l_max..=l_max {
            sum += (self.amplitude(l) * Complex64::from_polar(1.0, 2.0 * PI * l as f64 * u)).re;
        }
        sum
    }

    /// Multiplies harmonic `ℓ` by `factor(ℓ)`.
    pub fn map_harmonics(&self, factor: impl Fn(i32) -> f64) -> Self {
        let l_max = self.order() as i32;
        let amplitudes = (-l_max..=l_max).map(|l| self.amplitude(l) * factor(l)).collect();
        FringeSignal {
            amplitudes,
            ..self.clone()
        }
    }

    /// The fringe translated by `dx` [m]: `S'(x_s) = S(x_s - dx)`.
    pub fn shifted(&self, dx: f64) -> Self {
        let l_max = self.order() as i32;
        let amplitudes = (-l_max..=l_max)
            .map(|l| self.amplitude(l) * Complex64::from_polar(1.0, -2.0 * PI * l as f64 * dx / self.period))
            .collect();
        FringeSignal {
            amplitudes,
            ..self.clone()
        }
    }

    pub fn visibility(&self) -> Result<VisibilityResult> {
        let s0 = self.offset();
        if !(s0 > 0.0) {
            return Err(Error::DegenerateSignal(format!("offset S_0 = {s0} is not positive")));
        }
        let s1 = self.amplitude(1);
        let v_sin = 2.0 * s1.norm() / s0;
        let (max, min) = self.extrema();
        let v_full = if max + min > 0.0 {
            ((max - min) / (max + min)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok(VisibilityResult {
            v_full,
            v_sin,
            phase: s1.arg(),
        })
    }

    fn extrema(&self) -> (f64, f64) {
        if (1..=self.order() as i32).all(|l| self.amplitude(l).norm() == 0.0) {
            let s0 = self.offset();
            return (s0, s0);
        }
        let n = VISIBILITY_GRID;
        let step = self.period / n as f64;
        let values: Vec<f64> = (0..n).map(|k| self.evaluate(k as f64 * step)).collect();
        let (mut imax, mut imin) = (0, 0);
        for (k, &v) in values.iter().enumerate() {
            if v > values[imax] {
                imax = k;
            }
            if v < values[imin] {
                imin = k;
            }
        }
        let max = self.golden(imax as f64 * step, step, 1.0).max(values[imax]);
        let min = -self.golden(imin as f64 * step, step, -1.0);
        (max, min.min(values[imin]))
    }

    /// Maximum of `sign·S` on `[x - h, x + h]` by golden-section search.
    fn golden(&self, x: f64, h: f64, sign: f64) -> f64 {
        let f = |t: f64| sign * self.evaluate(t);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (x - h, x + h);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..80 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        fc.max(fd)
    }
}

fn coefficient_fn(spec: &GratingSpec, mode: Mode) -> Result<TalbotCoeffFn> {
    match mode {
        Mode::Quantum => talbot_coeff_quantum(spec),
        Mode::Classical => talbot_coeff_classical(spec, 256),
    }
}

/// Amplitudes for given gratings, pulse separation `time` and Talbot time.
#[allow(clippy::too_many_arguments)]
fn three_grating_signal(
    gratings: &[GratingSpec; 3],
    scheme: Scheme,
    mode: Mode,
    time: f64,
    talbot: f64,
    acceleration: f64,
    order: usize,
) -> Result<FringeSignal> {
    let period = gratings[0].period;
    let a1 = talbot_coeff_quantum(&gratings[0])?;
    let a3 = talbot_coeff_quantum(&gratings[2])?;
    let b2 = coefficient_fn(&gratings[1], mode)?;
    let l_max = order as i32;
    let drift = acceleration * time * time / period;
    let mut amplitudes = Vec::with_capacity(2 * order + 1);
    for l in -l_max..=l_max {
        let lf = l as f64;
        let s = a1.a(-l)?
            * a3.a(-l)?
            * b2.eval(2 * l, lf * time / talbot)?
            * Complex64::from_polar(1.0, -2.0 * PI * lf * drift);
        amplitudes.push(s);
    }
    FringeSignal::new(period, scheme, amplitudes)
}

/// Fringe signal of the configured gratings for one particle mass and velocity.
pub fn tl_fringe(config: &InterferometerConfig, mass: f64, velocity: f64, mode: Mode) -> Result<FringeSignal> {
    config.validate()?;
    require_positive("velocity", velocity)?;
    let talbot = talbot_time(mass, config.period())?;
    let time = config.separation.time_at(velocity);
    three_grating_signal(
        &config.gratings,
        config.scheme,
        mode,
        time,
        talbot,
        config.acceleration,
        config.fourier_order,
    )
}

/// Middle grating seen by a particle at velocity `v` in a standing-wave setup.
///
/// With laser settings the phase follows the particle's polarizability and
/// transit time. A non-zero absorption cross-section turns the grating into a
/// depleting one with `n0 = 2βφ0`.
pub fn kdtli_middle_grating(
    config: &InterferometerConfig,
    particle: &ParticleSpec,
    velocity: f64,
) -> Result<GratingSpec> {
    let base = config.gratings[1];
    let Some(laser) = config.laser else {
        return Ok(base);
    };
    let phi0 = kdtli_phi0(particle, laser.power, laser.waist_y, velocity)?;
    if particle.sigma_abs == 0.0 {
        return GratingSpec::phase(base.period, phi0);
    }
    let beta = beta_parameter(particle, config.wavelength())?;
    GratingSpec::ionizing(base.period, phi0, 2.0 * beta * phi0)
}

/// Signal averaged over the particle's velocity distribution, with the middle
/// grating and decoherence evaluated per velocity node. Amplitudes are averaged,
/// not visibilities.
pub fn velocity_averaged_fringe(
    config: &InterferometerConfig,
    particle: &ParticleSpec,
    mode: Mode,
    channels: &[DecoherenceChannel],
    middle: &dyn Fn(f64) -> Result<GratingSpec>,
) -> Result<FringeSignal> {
    config.validate()?;
    particle.validate()?;
    let talbot = talbot_time(particle.mass, config.period())?;
    let nodes = velocity_quadrature(&particle.velocity, VELOCITY_NODES)?;
    let order = config.fourier_order;
    let mut total = vec![Complex64::new(0.0, 0.0); 2 * order + 1];
    for (v, w) in nodes {
        let gratings = [config.gratings[0], middle(v)?, config.gratings[2]];
        let time = config.separation.time_at(v);
        let signal = three_grating_signal(&gratings, config.scheme, mode, time, talbot, config.acceleration, order)?;
        let signal = apply_channels(&signal, channels, particle.mass, time)?;
        for (acc, s) in total.iter_mut().zip(signal.amplitudes()) {
            *acc += w * s;
        }
    }
    FringeSignal::new(config.period(), config.scheme, total)
}

/// Velocity-averaged visibility of a Kapitza-Dirac-Talbot-Lau setup.
pub fn kdtli_visibility(
    config: &InterferometerConfig,
    particle: &ParticleSpec,
    mode: Mode,
) -> Result<VisibilityResult> {
    if config.scheme != Scheme::Kdtli {
        return Err(Error::Configuration("kdtli_visibility needs the KDTLI scheme".into()));
    }
    kdtli_fringe(config, particle, mode, &[])?.visibility()
}

/// Velocity-averaged KDTLI signal including decoherence channels.
pub fn kdtli_fringe(
    config: &InterferometerConfig,
    particle: &ParticleSpec,
    mode: Mode,
    channels: &[DecoherenceChannel],
) -> Result<FringeSignal> {
    velocity_averaged_fringe(config, particle, mode, channels, &|v| {
        kdtli_middle_grating(config, particle, v)
    })
}

/// Single-velocity sinusoidal visibility of a KDTLI with mask open fractions
/// `f1`, `f3`: `2|sinc(πf1) sinc(πf3) J_2(φ0 sin(πL/L_T))|`, with `sin(πL/L_T)`
/// replaced by `πL/L_T` in the classical case.
pub fn kdtli_sinusoidal_visibility(f1: f64, f3: f64, phi0: f64, length_over_talbot: f64, mode: Mode) -> f64 {
    let x = PI * length_over_talbot;
    let arg = match mode {
        Mode::Quantum => phi0 * x.sin(),
        Mode::Classical => phi0 * x,
    };
    2.0 * (sinc(PI * f1) * sinc(PI * f3) * bessel_j(2, arg)).abs()
}

/// `(φ0, n0)` of the three pulses for a particle.
pub fn otima_pulses(
    config: &InterferometerConfig,
    particle: &ParticleSpec,
    pulse_energies: [f64; 3],
) -> Result<[(f64, f64); 3]> {
    let laser = config
        .laser
        .ok_or_else(|| Error::Configuration("pulsed gratings need laser settings".into()))?;
    let mut out = [(0.0, 0.0); 3];
    for (slot, &energy) in out.iter_mut().zip(&pulse_energies) {
        *slot = if energy == 0.0 {
            (0.0, 0.0)
        } else {
            otima_pulse_params(particle, energy, laser.spot_peak, config.wavelength())?
        };
    }
    Ok(out)
}

/// Closed-form signal of three depleting standing-wave pulses:
///
/// `S_ℓ = e^{-(n1+n2+n3)/2} I_ℓ(n1/2) I_ℓ(n3/2) [(ζc-ζi)/(ζc+ζi)]^ℓ J_{2ℓ}(√(ζc² - ζi²)) e^{-2πiℓaT²/d}`
///
/// with `ζc = φ0² sin(πℓT/T_T)` and `ζi = (n0²/2) cos(πℓT/T_T)` of the middle pulse.
pub fn otima_closed_form(
    pulses: [(f64, f64); 3],
    period: f64,
    time: f64,
    talbot: f64,
    acceleration: f64,
    order: usize,
) -> Result<FringeSignal> {
    require_positive("period", period)?;
    require_positive("pulse separation", time)?;
    for &(phi0, n0) in &pulses {
        require_non_negative("n0", n0)?;
        if !phi0.is_finite() {
            return Err(Error::Domain("phi0 must be finite".into()));
        }
    }
    let [(_, n1), (phi2, n2), (_, n3)] = pulses;
    let middle = GratingSpec::ionizing(period, phi2, n2)?;
    let mut fallback: Option<TalbotCoeffFn> = None;
    let outer = (-0.5 * (n1 + n3)).exp();
    let depletion = (-0.5 * n2).exp();
    let l_max = order as i32;
    let mut amplitudes = Vec::with_capacity(2 * order + 1);
    for l in -l_max..=l_max {
        let lf = l as f64;
        let xi = lf * time / talbot;
        let outer_l = outer
            * bessel_i_complex(l, Complex64::new(0.5 * n1, 0.0))
            * bessel_i_complex(l, Complex64::new(0.5 * n3, 0.0));
        let zc = phi2 * (PI * xi).sin();
        let zi = 0.5 * n2 * (PI * xi).cos();
        let sum = zc + zi;
        // J_{2ℓ} is even, so only the integer power of the ratio enters
        let closed = (sum.abs() > 1e-6 * zc.abs().max(zi.abs()) && sum != 0.0)
            .then(|| {
                let ratio = Complex64::new((zc - zi) / sum, 0.0);
                let w = Complex64::new((zc - zi) * sum, 0.0).sqrt();
                depletion * ratio.powi(l) * bessel_j_complex(2 * l, w)
            })
            .filter(|v| v.is_finite());
        let middle_l = match closed {
            Some(v) => v,
            None => {
                if fallback.is_none() {
                    fallback = Some(talbot_coeff_quantum(&middle)?);
                }
                fallback.as_ref().expect("set above").eval(2 * l, xi)?
            }
        };
        let drift = Complex64::from_polar(1.0, -2.0 * PI * lf * acceleration * time * time / period);
        amplitudes.push(outer_l * middle_l * drift);
    }
    FringeSignal::new(period, Scheme::Otima, amplitudes)
}

/// The same signal through the generic three-grating pipeline.
pub fn otima_generic(
    pulses: [(f64, f64); 3],
    period: f64,
    time: f64,
    talbot: f64,
    acceleration: f64,
    order: usize,
) -> Result<FringeSignal> {
    let gratings = [
        GratingSpec::ionizing(period, pulses[0].0, pulses[0].1)?,
        GratingSpec::ionizing(period, pulses[1].0, pulses[1].1)?,
        GratingSpec::ionizing(period, pulses[2].0, pulses[2].1)?,
    ];
    three_grating_signal(
        &gratings,
        Scheme::Otima,
        Mode::Quantum,
        time,
        talbot,
        acceleration,
        order,
    )
}

fn otima_time(config: &InterferometerConfig, particle: &ParticleSpec) -> Result<f64> {
    if config.scheme != Scheme::Otima {
        return Err(Error::Configuration("pulsed signal needs the OTIMA scheme".into()));
    }
    Ok(config.separation.time_at(particle.velocity.mean()?))
}

/// Signal of a pulsed all-optical interferometer for the given pulse energies [J].
pub fn otima_signal(
    config: &InterferometerConfig,
    particle: &ParticleSpec,
    pulse_energies: [f64; 3],
) -> Result<FringeSignal> {
    config.validate()?;
    let time = otima_time(config, particle)?;
    let pulses = otima_pulses(config, particle, pulse_energies)?;
    let talbot = talbot_time(particle.mass, config.period())?;
    otima_closed_form(
        pulses,
        config.period(),
        time,
        talbot,
        config.acceleration,
        config.fourier_order,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassScanPoint {
    pub mass: f64,
    pub v_sin: f64,
    /// `(S_R - S_O) / S_O`: resonant signal at zero shift against its mean.
    pub signal_difference: f64,
}

/// Normalized signal difference across a mass range. Polarizability and
/// cross-section of the template scale linearly with mass.
pub fn otima_mass_scan(
    config: &InterferometerConfig,
    template: &ParticleSpec,
    masses: &[f64],
    pulse_energies: [f64; 3],
) -> Result<Vec<MassScanPoint>> {
    masses
        .iter()
        .map(|&mass| {
            require_positive("mass", mass)?;
            let particle = template.scaled(mass / template.mass)?;
            let signal = otima_signal(config, &particle, pulse_energies)?;
            let s_o = signal.offset();
            if !(s_o > 0.0) {
                return Err(Error::DegenerateSignal(format!("no transmission at mass {mass:e} kg")));
            }
            Ok(MassScanPoint {
                mass,
                v_sin: 2.0 * signal.amplitude(1).norm() / s_o,
                signal_difference: (signal.evaluate(0.0) - s_o) / s_o,
            })
        })
        .collect()
}

/// Contrast multiplier for a pulse-timing imbalance `ΔT` [s] and a beam of
/// half-divergence `α` [rad]: the fringe phase `2π v tan(a) ΔT / d` averaged over
/// angles `a` uniform in `[-α, α]`, `|sinc(2π v tanα ΔT / d)|`.
pub fn timing_imbalance_envelope(divergence: f64, velocity: f64, period: f64, imbalance: f64) -> Result<f64> {
    require_non_negative("divergence", divergence)?;
    require_positive("velocity", velocity)?;
    require_positive("period", period)?;
    Ok(sinc(2.0 * PI * velocity * divergence.tan() * imbalance / period).abs())
}

/// First zero of the imbalance envelope, `ΔT_max = d / (2 v tanα)`.
pub fn timing_imbalance_limit(divergence: f64, velocity: f64, period: f64) -> Result<f64> {
    require_positive("divergence", divergence)?;
    require_positive("velocity", velocity)?;
    require_positive("period", period)?;
    Ok(period / (2.0 * velocity * divergence.tan()))
}

/// Divergence angle whose envelope best matches measured `(ΔT, contrast)` pairs
/// in the least-squares sense, searched on `(0, max_divergence]`.
pub fn fit_divergence(samples: &[(f64, f64)], velocity: f64, period: f64, max_divergence: f64) -> Result<f64> {
    require_positive("maximum divergence", max_divergence)?;
    if samples.len() < 2 {
        return Err(Error::Domain("divergence fit needs at least two samples".into()));
    }
    let cost = |alpha: f64| -> Result<f64> {
        let mut c = 0.0;
        for &(dt, contrast) in samples {
            let r = timing_imbalance_envelope(alpha, velocity, period, dt)? - contrast;
            c += r * r;
        }
        Ok(c)
    };
    let grid = 2000;
    let mut best = (f64::INFINITY, 0.0);
    for k in 1..=grid {
        let a = max_divergence * k as f64 / grid as f64;
        let c = cost(a)?;
        if c < best.0 {
            best = (c, a);
        }
    }
    let h = max_divergence / grid as f64;
    let (mut lo, mut hi) = ((best.1 - h).max(1e-3 * h), (best.1 + h).min(max_divergence));
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if cost(m1)? < cost(m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Effective shift of the middle pulse when the retro-reflecting mirror is tilted
/// by `θ` and the particles pass at height `h` above it: `h (1 - cos θ)`.
pub fn tilt_scan_shift(height: f64, tilt: f64) -> Result<f64> {
    require_non_negative("height", height)?;
    require_non_negative("tilt", tilt)?;
    let half = (0.5 * tilt).sin();
    Ok(2.0 * height * half * half)
}

/// Fringe phase from grating displacements, `(2π/d)(Δx1 - 2Δx2 + Δx3)`.
pub fn total_fringe_phase(dx1: f64, dx2: f64, dx3: f64, period: f64) -> f64 {
    2.0 * PI / period * (dx1 - 2.0 * dx2 + dx3)
}

/// Shortcut for the transmission probability of a grating kind at `ξ = 0`.
pub fn mean_transmission(spec: &GratingSpec) -> Result<f64> {
    Ok(match spec.kind {
        GratingKind::MaterialMask { open_fraction } => open_fraction,
        _ => talbot_coeff_quantum(spec)?.a(0)?.re,
    })
}
