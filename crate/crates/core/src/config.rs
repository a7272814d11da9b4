//! Grating and interferometer descriptions.

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Modulation of a single grating. All parameters are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GratingKind {
    /// Binary absorptive mask with slit opening fraction `f = s/d`.
    MaterialMask { open_fraction: f64 },
    /// Standing-wave phase grating, `φ(x) = φ0 cos²(πx/d)`.
    PhaseGrating { phi0: f64 },
    /// Standing-wave pulse that imprints the phase `φ0 cos²(πx/d)` and depletes
    /// with mean photon number `n0 cos²(πx/d)`.
    IonizingGrating { phi0: f64, n0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingSpec {
    /// Grating period `d` [m].
    pub period: f64,
    pub kind: GratingKind,
}

impl GratingSpec {
    pub fn mask(period: f64, open_fraction: f64) -> Result<Self> {
        Self::new(period, GratingKind::MaterialMask { open_fraction })
    }

    pub fn phase(period: f64, phi0: f64) -> Result<Self> {
        Self::new(period, GratingKind::PhaseGrating { phi0 })
    }

    pub fn ionizing(period: f64, phi0: f64, n0: f64) -> Result<Self> {
        Self::new(period, GratingKind::IonizingGrating { phi0, n0 })
    }

    pub fn new(period: f64, kind: GratingKind) -> Result<Self> {
        let spec = GratingSpec { period, kind };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("grating period", self.period)?;
        match self.kind {
            GratingKind::MaterialMask { open_fraction } => {
                if !(open_fraction > 0.0 && open_fraction < 1.0) {
                    return Err(Error::Domain(format!(
                        "open fraction must lie in (0, 1), got {open_fraction}"
                    )));
                }
            }
            GratingKind::PhaseGrating { phi0 } => {
                if !phi0.is_finite() {
                    return Err(Error::Domain("phi0 must be finite".into()));
                }
            }
            GratingKind::IonizingGrating { phi0, n0 } => {
                if !phi0.is_finite() {
                    return Err(Error::Domain("phi0 must be finite".into()));
                }
                require_non_negative("n0", n0)?;
            }
        }
        Ok(())
    }

    /// Default Fourier truncation for the transmission coefficients: the smallest
    /// order `N ≥ 8` at which the bound `e^{|c|} (|c|/2)^N / N!` on `|b_N|` drops
    /// below `1e-13`, with `|c| = √(φ0²/4 + n0²/16)`.
    pub fn default_order(&self) -> usize {
        let c = match self.kind {
            GratingKind::MaterialMask { .. } => return 8,
            GratingKind::PhaseGrating { phi0 } => 0.5 * phi0.abs(),
            GratingKind::IonizingGrating { phi0, n0 } => (0.25 * phi0 * phi0 + n0 * n0 / 16.0).sqrt(),
        };
        let mut log_bound = c;
        let mut n = 0usize;
        loop {
            n += 1;
            log_bound += (0.5 * c).ln() - (n as f64).ln();
            if n >= 8 && log_bound < (1e-13f64).ln() {
                return n;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Three material masks.
    TalbotLau,
    /// Material masks around a standing-wave phase grating.
    Kdtli,
    /// Three pulsed ionizing standing waves.
    Otima,
}

/// Grating separation: a length for stationary setups, a time for pulsed ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Separation {
    Length(f64),
    Time(f64),
}

impl Separation {
    /// Free-flight time between adjacent gratings for longitudinal velocity `v`.
    pub fn time_at(&self, velocity: f64) -> f64 {
        match *self {
            Separation::Length(l) => l / velocity,
            Separation::Time(t) => t,
        }
    }
}

/// Optical grating laser parameters. Wavelength is always twice the grating period.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaserSettings {
    /// Continuous-wave power for a stationary standing-wave grating [W].
    pub power: f64,
    /// Vertical waist of the continuous-wave beam [m].
    pub waist_y: f64,
    /// Peak of the normalized pulse spot profile `f(0,0)` [1/m^2].
    pub spot_peak: f64,
    /// Pulse energies of the three pulsed gratings [J].
    pub pulse_energies: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerConfig {
    pub scheme: Scheme,
    pub gratings: [GratingSpec; 3],
    pub separation: Separation,
    /// Acceleration along the grating axis [m/s^2].
    pub acceleration: f64,
    /// Highest fringe harmonic kept in signals.
    pub fourier_order: usize,
    pub laser: Option<LaserSettings>,
}

impl InterferometerConfig {
    pub fn new(scheme: Scheme, gratings: [GratingSpec; 3], separation: Separation) -> Result<Self> {
        let config = InterferometerConfig {
            scheme,
            gratings,
            separation,
            acceleration: 0.0,
            fourier_order: 5,
            laser: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_acceleration(mut self, acceleration: f64) -> Self {
        self.acceleration = acceleration;
        self
    }

    pub fn with_laser(mut self, laser: LaserSettings) -> Self {
        self.laser = Some(laser);
        self
    }

    pub fn with_fourier_order(mut self, order: usize) -> Self {
        self.fourier_order = order;
        self
    }

    pub fn period(&self) -> f64 {
        self.gratings[0].period
    }

    /// Laser wavelength of a standing-wave grating with this period.
    pub fn wavelength(&self) -> f64 {
        2.0 * self.period()
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gratings {
            g.validate()?;
        }
        let d = self.gratings[0].period;
        if self.gratings.iter().any(|g| (g.period - d).abs() > 1e-12 * d) {
            return Err(Error::Configuration("all three grating periods must be equal".into()));
        }
        match self.separation {
            Separation::Length(v) | Separation::Time(v) => {
                require_positive("grating separation", v).map_err(|e| Error::Configuration(e.to_string()))?
            }
        }
        if !self.acceleration.is_finite() {
            return Err(Error::Configuration("acceleration must be finite".into()));
        }
        if self.fourier_order < 1 {
            return Err(Error::Configuration("fourier order must be at least 1".into()));
        }
        use GratingKind::*;
        let kinds = self.gratings.map(|g| g.kind);
        let ok = match self.scheme {
            Scheme::TalbotLau => matches!(kinds[0], MaterialMask { .. }) && matches!(kinds[2], MaterialMask { .. }),
            Scheme::Kdtli => {
                matches!(kinds[0], MaterialMask { .. })
                    && matches!(kinds[1], PhaseGrating { .. })
                    && matches!(kinds[2], MaterialMask { .. })
            }
            Scheme::Otima => kinds.iter().all(|k| matches!(k, IonizingGrating { .. })),
        };
        if !ok {
            return Err(Error::Configuration(format!(
                "grating kinds {kinds:?} do not match scheme {:?}",
                self.scheme
            )));
        }
        Ok(())
    }
}
