//! Decoherence as a multiplicative reduction of the fringe harmonics.
//!
//! A channel is a random momentum-kick process with event rate `Γ(t)` and
//! single-event characteristic function `κ(s)`. The `n`th harmonic of a
//! Talbot-Lau signal is reduced by
//!
//! ```text
//! R_n = exp{-∫_{-T}^{T} dt Γ(t) [1 - κ(n d (T - |t|) / T_T)]}
//! ```
//!
//! All kernels provided here are symmetric, so `κ` is real.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::constants::{AMU, C, HBAR, K_B};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::particle::talbot_time;
use crate::signal::FringeSignal;
use crate::specialfn::erf;

/// Relative tolerance of the time quadrature in [`log_reduction_factor`].
pub const QUADRATURE_TOLERANCE: f64 = 1e-13;
const MAX_DEPTH: u32 = 40;

/// Visibility loss reported as excluded when no suppression is observed.
pub const CSL_NULL_LOSS: f64 = 0.05;

#[derive(Clone)]
enum Rate {
    Constant(f64),
    Profile(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

#[derive(Clone)]
enum Kernel {
    /// `κ(s) = exp(-s² σ_q² / 2ħ²)`.
    Gaussian {
        sigma_q: f64,
    },
    /// Every event reveals the path: `κ(s) = 0` for `s ≠ 0`.
    Resolving,
    /// Isotropic emission: `κ(s) = Σ w_i sinc(ω_i s / c)`, weights summing to one.
    Isotropic {
        omegas: Arc<[f64]>,
        weights: Arc<[f64]>,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A decoherence process: event rate `Γ(t)` [1/s] and kernel `κ(s)`, `s` in meters.
#[derive(Clone)]
pub struct DecoherenceChannel {
    label: String,
    rate: Rate,
    kernel: Kernel,
}

impl fmt::Debug for DecoherenceChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rate = match self.rate {
            Rate::Constant(r) => format!("{r}"),
            Rate::Profile(_) => "profile".to_string(),
        };
        f.debug_struct("DecoherenceChannel")
            .field("label", &self.label)
            .field("rate", &rate)
            .finish_non_exhaustive()
    }
}

impl DecoherenceChannel {
    /// Constant-rate channel with a Gaussian momentum-kick distribution of
    /// standard deviation `sigma_q` [kg m/s] along the grating axis.
    pub fn gaussian(label: &str, rate: f64, sigma_q: f64) -> Result<Self> {
        require_non_negative("rate", rate)?;
        require_positive("momentum spread", sigma_q)?;
        Ok(DecoherenceChannel {
            label: label.to_string(),
            rate: Rate::Constant(rate),
            kernel: Kernel::Gaussian { sigma_q },
        })
    }

    /// Constant-rate channel whose every event fully destroys coherence.
    pub fn resolving(label: &str, rate: f64) -> Result<Self> {
        require_non_negative("rate", rate)?;
        Ok(DecoherenceChannel {
            label: label.to_string(),
            rate: Rate::Constant(rate),
            kernel: Kernel::Resolving,
        })
    }

    /// Channel from user-supplied rate profile and kernel. The kernel must satisfy
    /// `κ(0) = 1` and `|κ| ≤ 1`, checked on a sample of points.
    pub fn custom(
        label: &str,
        rate: impl Fn(f64) -> f64 + Send + Sync + 'static,
        kernel: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if (kernel(0.0) - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("kernel must equal one at zero displacement".into()));
        }
        for k in 1..=200 {
            let s = 1e-10 * 1.1f64.powi(k);
            let v = kernel(s);
            if !(v.abs() <= 1.0 + 1e-12) {
                return Err(Error::Domain(format!("kernel exceeds one in magnitude at s = {s}")));
            }
        }
        Ok(DecoherenceChannel {
            label: label.to_string(),
            rate: Rate::Profile(Arc::new(rate)),
            kernel: Kernel::Custom(Arc::new(kernel)),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        match &self.rate {
            Rate::Constant(r) => *r,
            Rate::Profile(f) => f(t),
        }
    }

    pub fn kernel_at(&self, s: f64) -> f64 {
        1.0 - self.one_minus_kernel(s)
    }

    /// The same channel with its rate multiplied by `factor`.
    pub fn with_rate_scaled(&self, factor: f64) -> Self {
        let rate = match &self.rate {
            Rate::Constant(r) => Rate::Constant(r * factor),
            Rate::Profile(f) => {
                let f = Arc::clone(f);
                Rate::Profile(Arc::new(move |t| factor * f(t)))
            }
        };
        DecoherenceChannel {
            label: self.label.clone(),
            rate,
            kernel: self.kernel.clone(),
        }
    }

    fn one_minus_kernel(&self, s: f64) -> f64 {
        match &self.kernel {
            Kernel::Gaussian { sigma_q } => {
                let x = s * sigma_q / HBAR;
                -(-0.5 * x * x).exp_m1()
            }
            Kernel::Resolving => {
                if s == 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Kernel::Isotropic { omegas, weights } => omegas
                .iter()
                .zip(weights.iter())
                .map(|(&w, &p)| p * one_minus_sinc(w * s / C))
                .sum(),
            Kernel::Custom(f) => 1.0 - f(s),
        }
    }
}

fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 / 6.0 - x2 * x2 / 120.0
    } else {
        1.0 - x.sin() / x
    }
}

/// Exponent `ln R_n` of the reduction factor; non-positive.
pub fn log_reduction_factor(channel: &DecoherenceChannel, n: i32, mass: f64, period: f64, time: f64) -> Result<f64> {
    require_positive("time", time)?;
    let tt = talbot_time(mass, period)?;
    if n == 0 {
        return Ok(0.0);
    }
    let scale = n as f64 * period / tt;
    let exponent = match (&channel.kernel, &channel.rate) {
        (Kernel::Resolving, Rate::Constant(r)) => 2.0 * r * time,
        (Kernel::Resolving, Rate::Profile(_)) => {
            integrate(&|t| channel.rate_at(t), -time, 0.0)? + integrate(&|t| channel.rate_at(t), 0.0, time)?
        }
        _ => {
            // in τ = T - |t| the kernel argument carries no cancellation near the end points
            let f = |tau: f64| {
                (channel.rate_at(tau - time) + channel.rate_at(time - tau)) * channel.one_minus_kernel(scale * tau)
            };
            integrate(&f, 0.0, time)?
        }
    };
    Ok(-exponent)
}

/// Reduction factor `R_n ∈ (0, 1]` of the `n`th fringe harmonic.
pub fn reduction_factor(channel: &DecoherenceChannel, n: i32, mass: f64, period: f64, time: f64) -> Result<f64> {
    Ok(log_reduction_factor(channel, n, mass, period, time)?.exp())
}

/// Multiplies every harmonic `S_ℓ` by the product of the channels' `R_ℓ`.
pub fn apply_channels(
    signal: &FringeSignal,
    channels: &[DecoherenceChannel],
    mass: f64,
    time: f64,
) -> Result<FringeSignal> {
    if channels.is_empty() {
        return Ok(signal.clone());
    }
    let order = signal.order() as i32;
    let mut logs = vec![0.0; signal.order() + 1];
    for (l, slot) in logs.iter_mut().enumerate().skip(1) {
        for ch in channels {
            *slot += log_reduction_factor(ch, l as i32, mass, signal.period(), time)?;
        }
    }
    Ok(signal.map_harmonics(|l| {
        debug_assert!(l.abs() <= order);
        logs[l.unsigned_abs() as usize].exp()
    }))
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // scale for the tolerance from a fixed composite rule on |f|
    let panels = 64;
    let h = (b - a) / panels as f64;
    let mut coarse = 0.0;
    for k in 0..panels {
        let x0 = a + k as f64 * h;
        coarse += h / 6.0 * (f(x0).abs() + 4.0 * f(x0 + 0.5 * h).abs() + f(x0 + h).abs());
    }
    if coarse == 0.0 {
        return Ok(0.0);
    }
    let tol = QUADRATURE_TOLERANCE * coarse;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // the halved tolerance eventually drops below the rounding error of the panel sums
    let floor = 4.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol.max(floor) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Accuracy(format!(
            "adaptive quadrature did not converge on [{a}, {b}]"
        )));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Total rate and kernel of thermal photon emission from a particle at internal
/// temperature `t_int`, for a spectral absorption cross-section `σ_abs(ω)` [m²].
pub fn thermal_emission_rate(sigma_abs: impl Fn(f64) -> f64, t_int: f64) -> Result<(f64, DecoherenceChannel)> {
    require_positive("internal temperature", t_int)?;
    let omega_t = K_B * t_int / HBAR;
    let points = 600;
    let (lo, hi) = ((omega_t / 100.0).ln(), (100.0 * omega_t).ln());
    let step = (hi - lo) / (points - 1) as f64;
    let mut omegas = Vec::with_capacity(points);
    let mut weights = Vec::with_capacity(points);
    for k in 0..points {
        let w = (lo + k as f64 * step).exp();
        let sigma = sigma_abs(w);
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Domain(format!("absorption cross-section invalid at ω = {w:e}")));
        }
        let spectral = (w / (PI * C)).powi(2) * sigma * (-w / omega_t).exp();
        // dω = ω d(ln ω), trapezoidal end weights
        let end = if k == 0 || k == points - 1 { 0.5 } else { 1.0 };
        omegas.push(w);
        weights.push(end * step * w * spectral);
    }
    let rate: f64 = weights.iter().sum();
    let peak = weights.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 && weights[points - 1] > 1e-6 * peak {
        return Err(Error::Domain(
            "emission spectrum does not decay inside the frequency window".into(),
        ));
    }
    let normalized: Vec<f64> = if rate > 0.0 {
        weights.iter().map(|w| w / rate).collect()
    } else {
        let mut v = vec![0.0; points];
        v[0] = 1.0;
        v
    };
    let channel = DecoherenceChannel {
        label: "thermal emission".to_string(),
        rate: Rate::Constant(rate),
        kernel: Kernel::Isotropic {
            omegas: omegas.into(),
            weights: normalized.into(),
        },
    };
    Ok((rate, channel))
}

/// Background gas parameters for collisional decoherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    /// Gas particle mass [kg].
    pub mass: f64,
    /// Gas temperature [K].
    pub temperature: f64,
}

/// Kinetic collision rate `n_gas σ_eff v̄` with `n_gas = p / k_B T` and mean
/// speed `v̄ = √(8 k_B T / π m_gas)`.
pub fn collision_rate(pressure: f64, sigma_eff: f64, gas: GasParams) -> Result<f64> {
    require_non_negative("pressure", pressure)?;
    require_non_negative("collision cross-section", sigma_eff)?;
    require_positive("gas mass", gas.mass)?;
    require_positive("gas temperature", gas.temperature)?;
    let density = pressure / (K_B * gas.temperature);
    let mean_speed = (8.0 * K_B * gas.temperature / (PI * gas.mass)).sqrt();
    Ok(density * sigma_eff * mean_speed)
}

/// Rest-gas collisions, each of which destroys coherence.
pub fn collisional_channel(pressure: f64, sigma_eff: f64, gas: GasParams) -> Result<DecoherenceChannel> {
    DecoherenceChannel::resolving("collisions", collision_rate(pressure, sigma_eff, gas)?)
}

/// Rest-gas collisions with a Gaussian momentum-transfer distribution.
pub fn collisional_channel_gaussian(
    pressure: f64,
    sigma_eff: f64,
    gas: GasParams,
    sigma_q: f64,
) -> Result<DecoherenceChannel> {
    DecoherenceChannel::gaussian("collisions", collision_rate(pressure, sigma_eff, gas)?, sigma_q)
}

/// Collapse-model parameters: rate `λ` [1/s] and localization length `r_c` [m].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslParams {
    pub lambda: f64,
    pub r_c: f64,
}

impl CslParams {
    pub fn new(lambda: f64, r_c: f64) -> Result<Self> {
        require_non_negative("collapse rate", lambda)?;
        require_positive("localization length", r_c)?;
        Ok(CslParams { lambda, r_c })
    }
}

/// `1 - √π erf(x) / 2x`, with its Taylor series for small `x`.
fn csl_bracket(x: f64) -> f64 {
    if x < 0.1 {
        let x2 = x * x;
        // Σ_{k≥1} (-1)^{k+1} x^{2k} / (k! (2k+1))
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..12 {
            term *= -x2 / k as f64;
            sum -= term / (2 * k + 1) as f64;
        }
        sum
    } else {
        1.0 - PI.sqrt() * erf(x) / (2.0 * x)
    }
}

/// `ln` of the collapse-induced visibility factor.
pub fn log_csl_visibility_factor(params: CslParams, mass: f64, period: f64, time: f64, talbot: f64) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("period", period)?;
    require_non_negative("time", time)?;
    require_positive("Talbot time", talbot)?;
    if time == 0.0 {
        return Ok(0.0);
    }
    let rate = (mass / AMU).powi(2) * params.lambda;
    let x = period * time / (2.0 * params.r_c * talbot);
    Ok(-2.0 * rate * time * csl_bracket(x))
}

/// First-harmonic visibility factor
/// `exp{-2 (m/u)² λ T [1 - (√π r_c T_T / d T) erf(d T / 2 r_c T_T)]}`.
pub fn csl_visibility_factor(params: CslParams, mass: f64, period: f64, time: f64, talbot: f64) -> Result<f64> {
    Ok(log_csl_visibility_factor(params, mass, period, time, talbot)?.exp())
}

/// The collapse model as a constant-rate channel `Γ = (m/u)² λ` with Gaussian
/// kicks of spread `ħ / (√2 r_c)`.
pub fn csl_as_channel(params: CslParams, mass: f64) -> Result<DecoherenceChannel> {
    require_positive("mass", mass)?;
    DecoherenceChannel::gaussian(
        "csl",
        (mass / AMU).powi(2) * params.lambda,
        HBAR / (2.0f64.sqrt() * params.r_c),
    )
}

/// Largest collapse rate compatible with an observed visibility.
///
/// Losses below [`CSL_NULL_LOSS`] are treated as unresolved, so an observation
/// matching the prediction excludes rates above the one causing a 5% loss. An
/// observation above the prediction returns infinity.
#[allow(clippy::too_many_arguments)]
pub fn csl_exclusion_bound(
    observed: f64,
    predicted: f64,
    mass: f64,
    period: f64,
    time: f64,
    talbot: f64,
    r_c: f64,
) -> Result<f64> {
    require_positive("observed visibility", observed)?;
    require_positive("predicted visibility", predicted)?;
    let ratio = observed / predicted;
    if ratio > 1.0 + 1e-12 {
        return Ok(f64::INFINITY);
    }
    let ratio = ratio.min(1.0 - CSL_NULL_LOSS);
    let unit = -log_csl_visibility_factor(CslParams::new(1.0, r_c)?, mass, period, time, talbot)?;
    if unit == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-ratio.ln() / unit)
}
