//! Run configuration: a single JSON document with units fixed by field suffixes.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use talbot_core::constants::{polarizability_from_a3, AMU, DEBYE};
use talbot_core::{GratingSpec, InterferometerConfig, LaserSettings, ParticleSpec, Scheme, Separation, VelocityDist};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub particle: ParticleCfg,
    pub gratings: [GratingCfg; 3],
    pub interferometer: InterferometerCfg,
    #[serde(default)]
    pub decoherence: Vec<ChannelCfg>,
    pub scan: Option<ScanCfg>,
    pub carpet: Option<CarpetCfg>,
    pub fit: Option<FitCfg>,
    /// Output directory, relative to the working directory; `--out` overrides it.
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Scan,
    Carpet,
    Fit,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleCfg {
    pub mass_u: f64,
    pub velocity: VelocityCfg,
    /// Optical polarizability volume [Å³].
    #[serde(default, rename = "alpha_opt_A3")]
    pub alpha_opt_a3: f64,
    #[serde(default)]
    pub sigma_abs_m2: f64,
    /// Static polarizability volume [Å³].
    #[serde(default, rename = "alpha_stat_A3")]
    pub alpha_stat_a3: f64,
    /// Thermal mean of the squared dipole along the field [D²].
    #[serde(default, rename = "dipole_sq_mean_D2")]
    pub dipole_sq_mean_d2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityCfg {
    Delta { mean_m_per_s: f64 },
    Gaussian { mean_m_per_s: f64, fwhm_m_per_s: f64 },
    Tabulated { points: Vec<VelocityPoint> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityPoint {
    pub velocity_m_per_s: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GratingCfg {
    Mask { open_fraction: f64 },
    Phase { phi0: f64 },
    Ionizing { phi0: f64, n0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SchemeCfg {
    #[serde(rename = "TL")]
    TalbotLau,
    #[serde(rename = "KDTLI")]
    Kdtli,
    #[serde(rename = "OTIMA")]
    Otima,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometerCfg {
    pub scheme: SchemeCfg,
    pub period_m: f64,
    pub length_m: Option<f64>,
    pub time_s: Option<f64>,
    #[serde(default)]
    pub acceleration_m_per_s2: f64,
    #[serde(default = "default_fourier_order")]
    pub fourier_order: usize,
    pub laser: Option<LaserCfg>,
}

fn default_fourier_order() -> usize {
    5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserCfg {
    #[serde(default, rename = "power_W")]
    pub power_w: f64,
    #[serde(default)]
    pub waist_y_m: f64,
    #[serde(default)]
    pub spot_peak_per_m2: f64,
    #[serde(default, rename = "pulse_energies_J")]
    pub pulse_energies_j: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelCfg {
    Gaussian {
        rate_per_s: f64,
        sigma_q_kg_m_per_s: f64,
    },
    Resolving {
        rate_per_s: f64,
    },
    Collisional {
        #[serde(rename = "pressure_Pa")]
        pressure_pa: f64,
        sigma_eff_m2: f64,
        gas_mass_u: f64,
        #[serde(rename = "gas_temperature_K")]
        gas_temperature_k: f64,
        /// Gaussian momentum spread; without it every collision resolves the path.
        sigma_q_kg_m_per_s: Option<f64>,
    },
    Csl {
        lambda_per_s: f64,
        r_c_m: f64,
    },
    Thermal {
        #[serde(rename = "temperature_K")]
        temperature_k: f64,
        /// Absorption spectrum, linearly interpolated and zero outside the table.
        spectrum: Vec<SpectrumPoint>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumPoint {
    pub omega_rad_per_s: f64,
    pub sigma_m2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Power,
    Length,
    Time,
    Mass,
    TiltHeight,
    TimingImbalance,
    Pressure,
    Temperature,
    CslLambda,
}

impl Axis {
    /// CSV column name, carrying the unit of `start` and `stop`.
    pub fn column(self) -> &'static str {
        match self {
            Axis::Power => "power_W",
            Axis::Length => "length_m",
            Axis::Time => "time_s",
            Axis::Mass => "mass_u",
            Axis::TiltHeight => "tilt_height_m",
            Axis::TimingImbalance => "timing_imbalance_s",
            Axis::Pressure => "pressure_Pa",
            Axis::Temperature => "temperature_K",
            Axis::CslLambda => "csl_lambda_per_s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanCfg {
    pub axis: Axis,
    /// Range in the unit named by [`Axis::column`].
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Mirror tilt for the `tilt_height` axis.
    pub tilt_rad: Option<f64>,
    /// Beam half-divergence for the `timing_imbalance` axis.
    pub divergence_rad: Option<f64>,
}

impl ScanCfg {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                if k == 0 {
                    return self.start;
                }
                if k == n - 1 {
                    return self.stop;
                }
                match self.spacing {
                    Spacing::Linear => self.start + f * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarpetCfg {
    /// Which of the three gratings casts the carpet.
    #[serde(default = "default_carpet_grating")]
    pub grating: usize,
    pub times: usize,
    #[serde(default = "default_carpet_span")]
    pub t_max_talbot: f64,
    pub positions: usize,
    #[serde(default = "default_carpet_order")]
    pub order: usize,
}

fn default_carpet_grating() -> usize {
    1
}

fn default_carpet_span() -> f64 {
    2.0
}

fn default_carpet_order() -> usize {
    40
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitCfg {
    /// CSV of `power_W,visibility` rows, relative to the configuration file.
    pub data_csv: PathBuf,
    #[serde(rename = "alpha_range_A3")]
    pub alpha_range_a3: [f64; 2],
    pub sigma_range_m2: Option<[f64; 2]>,
}

fn schema(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("{field}: {message}"))
}

fn finite(field: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(schema(field, format!("must be finite, got {value}")))
    }
}

fn positive(field: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(schema(field, format!("must be positive, got {value}")))
    }
}

impl RunConfig {
    /// Parses a configuration; errors carry the JSON line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    /// Semantic checks beyond the JSON schema. `base` is the configuration's directory.
    pub fn validate(&self, base: &Path) -> Result<(), CliError> {
        self.particle()?;
        self.interferometer()?;
        for (i, ch) in self.decoherence.iter().enumerate() {
            ch.validate(&format!("decoherence[{i}]"))?;
        }
        match self.task {
            Task::Scan => {
                let scan = self
                    .scan
                    .as_ref()
                    .ok_or_else(|| schema("scan", "required for the scan task"))?;
                self.validate_scan(scan)?;
            }
            Task::Carpet => {
                let c = self
                    .carpet
                    .as_ref()
                    .ok_or_else(|| schema("carpet", "required for the carpet task"))?;
                if c.grating > 2 {
                    return Err(schema("carpet.grating", "must be 0, 1 or 2"));
                }
                if c.times < 2 || c.positions < 2 {
                    return Err(schema("carpet", "times and positions must be at least 2"));
                }
                positive("carpet.t_max_talbot", c.t_max_talbot)?;
                if c.order < 1 {
                    return Err(schema("carpet.order", "must be at least 1"));
                }
            }
            Task::Fit => {
                let f = self
                    .fit
                    .as_ref()
                    .ok_or_else(|| schema("fit", "required for the fit task"))?;
                if self.interferometer.scheme != SchemeCfg::Kdtli || self.interferometer.laser.is_none() {
                    return Err(schema("fit", "needs a KDTLI interferometer with laser settings"));
                }
                let path = base.join(&f.data_csv);
                if !path.is_file() {
                    return Err(schema(
                        "fit.data_csv",
                        format!("file {} does not exist", path.display()),
                    ));
                }
                let [lo, hi] = f.alpha_range_a3;
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(schema("fit.alpha_range_A3", "must be an increasing finite pair"));
                }
                if let Some([lo, hi]) = f.sigma_range_m2 {
                    if !(lo >= 0.0 && hi.is_finite() && lo < hi) {
                        return Err(schema("fit.sigma_range_m2", "must be an increasing non-negative pair"));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_scan(&self, scan: &ScanCfg) -> Result<(), CliError> {
        finite("scan.start", scan.start)?;
        finite("scan.stop", scan.stop)?;
        if scan.points < 2 {
            return Err(schema(
                "scan.points",
                format!("must be at least 2, got {}", scan.points),
            ));
        }
        if scan.start == scan.stop {
            return Err(schema("scan", "start and stop must differ"));
        }
        if scan.spacing == Spacing::Log && !(scan.start > 0.0 && scan.stop > 0.0) {
            return Err(schema("scan.spacing", "log spacing needs a positive range"));
        }
        let lo = scan.start.min(scan.stop);
        let needs_positive = !matches!(
            scan.axis,
            Axis::TiltHeight | Axis::TimingImbalance | Axis::Pressure | Axis::CslLambda
        );
        if lo < 0.0 || (needs_positive && lo <= 0.0) {
            return Err(schema("scan", format!("{} range must be positive", scan.axis.column())));
        }
        let stationary = self.interferometer.scheme != SchemeCfg::Otima;
        let count = |pred: fn(&ChannelCfg) -> bool| self.decoherence.iter().filter(|c| pred(c)).count();
        match scan.axis {
            Axis::Power if !(stationary && self.interferometer.laser.is_some()) => Err(schema(
                "scan.axis",
                "power scans need a standing-wave laser in a stationary setup",
            )),
            Axis::TiltHeight => scan
                .tilt_rad
                .ok_or_else(|| schema("scan.tilt_rad", "required for the tilt_height axis"))
                .and_then(|t| finite("scan.tilt_rad", t)),
            Axis::TimingImbalance => scan
                .divergence_rad
                .ok_or_else(|| schema("scan.divergence_rad", "required for the timing_imbalance axis"))
                .and_then(|a| positive("scan.divergence_rad", a)),
            Axis::Pressure if count(|c| matches!(c, ChannelCfg::Collisional { .. })) == 0 => {
                Err(schema("scan.axis", "pressure scans need a collisional channel"))
            }
            Axis::Temperature if count(|c| matches!(c, ChannelCfg::Thermal { .. })) == 0 => {
                Err(schema("scan.axis", "temperature scans need a thermal channel"))
            }
            Axis::CslLambda if count(|c| matches!(c, ChannelCfg::Csl { .. })) == 0 => {
                Err(schema("scan.axis", "csl_lambda scans need a csl channel"))
            }
            _ => Ok(()),
        }
    }

    pub fn particle(&self) -> Result<ParticleSpec, CliError> {
        let p = &self.particle;
        positive("particle.mass_u", p.mass_u)?;
        let velocity = match &p.velocity {
            VelocityCfg::Delta { mean_m_per_s } => VelocityDist::Delta { v0: *mean_m_per_s },
            VelocityCfg::Gaussian {
                mean_m_per_s,
                fwhm_m_per_s,
            } => VelocityDist::Gaussian {
                v0: *mean_m_per_s,
                fwhm: *fwhm_m_per_s,
            },
            VelocityCfg::Tabulated { points } => {
                VelocityDist::Tabulated(points.iter().map(|p| (p.velocity_m_per_s, p.weight)).collect())
            }
        };
        ParticleSpec::new(p.mass_u * AMU, velocity)
            .and_then(|s| s.with_optical(polarizability_from_a3(p.alpha_opt_a3), p.sigma_abs_m2))
            .and_then(|s| {
                s.with_static(
                    polarizability_from_a3(p.alpha_stat_a3),
                    p.dipole_sq_mean_d2 * DEBYE * DEBYE,
                )
            })
            .map_err(|e| schema("particle", e))
    }

    pub fn interferometer(&self) -> Result<InterferometerConfig, CliError> {
        let c = &self.interferometer;
        positive("interferometer.period_m", c.period_m)?;
        let separation = match (c.length_m, c.time_s) {
            (Some(l), None) => Separation::Length(l),
            (None, Some(t)) => Separation::Time(t),
            _ => {
                return Err(schema("interferometer", "give exactly one of length_m and time_s"));
            }
        };
        let mut gratings = [GratingSpec::mask(c.period_m, 0.5).expect("valid placeholder"); 3];
        for (i, (slot, g)) in gratings.iter_mut().zip(&self.gratings).enumerate() {
            let spec = match *g {
                GratingCfg::Mask { open_fraction } => GratingSpec::mask(c.period_m, open_fraction),
                GratingCfg::Phase { phi0 } => GratingSpec::phase(c.period_m, phi0),
                GratingCfg::Ionizing { phi0, n0 } => GratingSpec::ionizing(c.period_m, phi0, n0),
            };
            *slot = spec.map_err(|e| schema(&format!("gratings[{i}]"), e))?;
        }
        let scheme = match c.scheme {
            SchemeCfg::TalbotLau => Scheme::TalbotLau,
            SchemeCfg::Kdtli => Scheme::Kdtli,
            SchemeCfg::Otima => Scheme::Otima,
        };
        let mut config = InterferometerConfig::new(scheme, gratings, separation)
            .map_err(|e| schema("interferometer", e))?
            .with_acceleration(c.acceleration_m_per_s2)
            .with_fourier_order(c.fourier_order);
        if let Some(l) = &c.laser {
            config = config.with_laser(LaserSettings {
                power: l.power_w,
                waist_y: l.waist_y_m,
                spot_peak: l.spot_peak_per_m2,
                pulse_energies: l.pulse_energies_j,
            });
        }
        config.validate().map_err(|e| schema("interferometer", e))?;
        Ok(config)
    }
}

impl ChannelCfg {
    fn validate(&self, field: &str) -> Result<(), CliError> {
        let values: Vec<(&str, f64)> = match self {
            ChannelCfg::Gaussian {
                rate_per_s,
                sigma_q_kg_m_per_s,
            } => vec![("rate_per_s", *rate_per_s), ("sigma_q_kg_m_per_s", *sigma_q_kg_m_per_s)],
            ChannelCfg::Resolving { rate_per_s } => vec![("rate_per_s", *rate_per_s)],
            ChannelCfg::Collisional {
                pressure_pa,
                sigma_eff_m2,
                gas_mass_u,
                gas_temperature_k,
                sigma_q_kg_m_per_s,
            } => {
                let mut v = vec![
                    ("pressure_Pa", *pressure_pa),
                    ("sigma_eff_m2", *sigma_eff_m2),
                    ("gas_mass_u", *gas_mass_u),
                    ("gas_temperature_K", *gas_temperature_k),
                ];
                if let Some(s) = sigma_q_kg_m_per_s {
                    v.push(("sigma_q_kg_m_per_s", *s));
                }
                v
            }
            ChannelCfg::Csl { lambda_per_s, r_c_m } => vec![("lambda_per_s", *lambda_per_s), ("r_c_m", *r_c_m)],
            ChannelCfg::Thermal {
                temperature_k,
                spectrum,
            } => {
                if spectrum.len() < 2 {
                    return Err(schema(&format!("{field}.spectrum"), "needs at least two points"));
                }
                if spectrum
                    .windows(2)
                    .any(|w| !(w[1].omega_rad_per_s > w[0].omega_rad_per_s))
                {
                    return Err(schema(&format!("{field}.spectrum"), "frequencies must increase"));
                }
                let mut v = vec![("temperature_K", *temperature_k)];
                v.extend(spectrum.iter().map(|p| ("spectrum.sigma_m2", p.sigma_m2)));
                v
            }
        };
        for (name, value) in values {
            if !(value.is_finite() && value >= 0.0) {
                return Err(schema(
                    &format!("{field}.{name}"),
                    format!("must be non-negative, got {value}"),
                ));
            }
        }
        Ok(())
    }
}
