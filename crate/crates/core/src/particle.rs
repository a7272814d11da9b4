//! Particle description, velocity distributions and the basic matter-wave scales.

use crate::constants::H;
use crate::error::{require_non_negative, require_positive, Error, Result};

/// Longitudinal velocity distribution of the interfering beam [m/s].
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityDist {
    Delta {
        v0: f64,
    },
    /// Gaussian in velocity, parameterized by mean and full width at half maximum.
    Gaussian {
        v0: f64,
        fwhm: f64,
    },
    /// Arbitrary list of `(velocity, weight)` pairs.
    Tabulated(Vec<(f64, f64)>),
}

impl VelocityDist {
    pub fn validate(&self) -> Result<()> {
        match self {
            VelocityDist::Delta { v0 } => require_positive("velocity", *v0),
            VelocityDist::Gaussian { v0, fwhm } => {
                require_positive("mean velocity", *v0)?;
                require_positive("velocity fwhm", *fwhm)
            }
            VelocityDist::Tabulated(table) => {
                if table.is_empty() {
                    return Err(Error::Domain("empty tabulated velocity distribution".into()));
                }
                let mut total = 0.0;
                for &(v, w) in table {
                    require_positive("tabulated velocity", v)?;
                    require_non_negative("tabulated weight", w)?;
                    total += w;
                }
                if total <= 0.0 {
                    return Err(Error::Domain("tabulated weights sum to zero".into()));
                }
                Ok(())
            }
        }
    }

    /// Weighted mean velocity.
    pub fn mean(&self) -> Result<f64> {
        Ok(velocity_quadrature(self, 64)?.iter().map(|(v, w)| v * w).sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSpec {
    /// [kg]
    pub mass: f64,
    /// Real optical polarizability at the grating wavelength [C m^2/V].
    pub alpha_opt: f64,
    /// Absorption cross-section at the grating wavelength [m^2].
    pub sigma_abs: f64,
    /// Static polarizability [C m^2/V].
    pub alpha_stat: f64,
    /// Thermal average of the squared dipole component along the field axis [C^2 m^2].
    pub dipole_sq_mean: f64,
    pub velocity: VelocityDist,
}

impl ParticleSpec {
    pub fn new(mass: f64, velocity: VelocityDist) -> Result<Self> {
        let p = ParticleSpec {
            mass,
            alpha_opt: 0.0,
            sigma_abs: 0.0,
            alpha_stat: 0.0,
            dipole_sq_mean: 0.0,
            velocity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_optical(mut self, alpha_opt: f64, sigma_abs: f64) -> Result<Self> {
        self.alpha_opt = alpha_opt;
        self.sigma_abs = sigma_abs;
        self.validate()?;
        Ok(self)
    }

    pub fn with_static(mut self, alpha_stat: f64, dipole_sq_mean: f64) -> Result<Self> {
        self.alpha_stat = alpha_stat;
        self.dipole_sq_mean = dipole_sq_mean;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("mass", self.mass)?;
        require_non_negative("absorption cross-section", self.sigma_abs)?;
        require_non_negative("mean squared dipole", self.dipole_sq_mean)?;
        if !self.alpha_opt.is_finite() || !self.alpha_stat.is_finite() {
            return Err(Error::Domain("polarizabilities must be finite".into()));
        }
        self.velocity.validate()
    }

    /// A cluster of `size` copies of this particle: mass, polarizabilities and
    /// cross-section scale linearly, the velocity distribution is kept.
    pub fn scaled(&self, size: f64) -> Result<Self> {
        require_positive("cluster size", size)?;
        Ok(ParticleSpec {
            mass: self.mass * size,
            alpha_opt: self.alpha_opt * size,
            sigma_abs: self.sigma_abs * size,
            alpha_stat: self.alpha_stat * size,
            dipole_sq_mean: self.dipole_sq_mean * size,
            velocity: self.velocity.clone(),
        })
    }
}

/// Talbot time `T_T = m d² / h` [s].
pub fn talbot_time(mass: f64, period: f64) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("period", period)?;
    Ok(mass * period * period / H)
}

/// Talbot length `L_T = v T_T = d² / λ_dB` [m].
pub fn talbot_length(mass: f64, velocity: f64, period: f64) -> Result<f64> {
    require_positive("velocity", velocity)?;
    Ok(velocity * talbot_time(mass, period)?)
}

/// De Broglie wavelength `h / (m v)` [m].
pub fn de_broglie_wavelength(mass: f64, velocity: f64) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("velocity", velocity)?;
    Ok(H / (mass * velocity))
}

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3; // 2 sqrt(2 ln 2)

/// Discretizes a velocity distribution into nodes with weights summing to one.
///
/// Gaussian distributions use Gauss-Legendre nodes on `[v0 - 4σ, v0 + 4σ]`,
/// clipped to positive velocities.
pub fn velocity_quadrature(dist: &VelocityDist, n_points: usize) -> Result<Vec<(f64, f64)>> {
    if n_points == 0 {
        return Err(Error::Domain("velocity quadrature needs at least one point".into()));
    }
    dist.validate()?;
    match dist {
        VelocityDist::Delta { v0 } => Ok(vec![(*v0, 1.0)]),
        VelocityDist::Gaussian { v0, fwhm } => {
            let sigma = fwhm / FWHM_PER_SIGMA;
            let lo = (v0 - 4.0 * sigma).max(0.0);
            let hi = v0 + 4.0 * sigma;
            let (x, w) = gauss_legendre(n_points);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            let mut nodes: Vec<(f64, f64)> = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| {
                    let v = mid + half * xi;
                    let z = (v - v0) / sigma;
                    (v, wi * half * (-0.5 * z * z).exp())
                })
                .filter(|&(v, _)| v > 0.0)
                .collect();
            normalize(&mut nodes)?;
            Ok(nodes)
        }
        VelocityDist::Tabulated(table) => {
            let mut nodes = table.clone();
            normalize(&mut nodes)?;
            Ok(nodes)
        }
    }
}

fn normalize(nodes: &mut [(f64, f64)]) -> Result<()> {
    let total: f64 = nodes.iter().map(|(_, w)| w).sum();
    if !(total > 0.0) {
        return Err(Error::Domain("velocity weights are not normalizable".into()));
    }
    for node in nodes.iter_mut() {
        node.1 /= total;
    }
    Ok(())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                let kf = k as f64;
                p0 = ((2.0 * kf + 1.0) * z * p1 - kf * p2) / (kf + 1.0);
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            z = 0.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::AMU;

    #[test]
    fn talbot_time_for_one_mass_unit_at_78nm() {
        let tt = talbot_time(AMU, 78.5e-9).unwrap();
        assert!((tt - 15.4e-9).abs() / 15.4e-9 < 0.01);
        let doubled = talbot_time(2.0 * AMU, 78.5e-9).unwrap();
        assert_eq!(doubled, 2.0 * tt);
        // oracle: direct evaluation with the hard-coded constants
        let anthracene = talbot_time(178.0 * AMU, 78.5e-9).unwrap();
        assert!((anthracene - 2.748_858_494e-6).abs() / anthracene < 1e-8);
    }

    #[test]
    fn talbot_length_examples() {
        let lt = talbot_length(840.0 * AMU, 100.0, 990e-9).unwrap();
        assert!((lt - 0.206_320_671_8).abs() / lt < 1e-8);
        let lt2 = talbot_length(840.0 * AMU, 200.0, 990e-9).unwrap();
        assert!((lt2 - 2.0 * lt).abs() / lt < 1e-15);
        let lambda = de_broglie_wavelength(840.0 * AMU, 100.0).unwrap();
        assert!((lt * lambda / 990e-9 - 990e-9).abs() / 990e-9 < 1e-12);
    }

    #[test]
    fn de_broglie_examples() {
        let l = de_broglie_wavelength(1000.0 * AMU, 200.0).unwrap();
        assert!((l - 2.0e-12).abs() < 0.05e-12);
        let half = de_broglie_wavelength(2000.0 * AMU, 200.0).unwrap();
        assert!((half - l / 2.0).abs() / half < 1e-15);
        let ac = de_broglie_wavelength(178.0 * AMU, 925.0).unwrap();
        assert!((ac - 2.423_512_125e-12).abs() / ac < 1e-8);
    }

    #[test]
    fn non_positive_inputs_rejected() {
        assert!(matches!(talbot_time(0.0, 1e-7), Err(Error::Domain(_))));
        assert!(talbot_time(AMU, -1.0).is_err());
        assert!(talbot_length(AMU, 0.0, 1e-7).is_err());
        assert!(de_broglie_wavelength(AMU, f64::NAN).is_err());
    }

    #[test]
    fn delta_quadrature_is_single_node() {
        let nodes = velocity_quadrature(&VelocityDist::Delta { v0: 200.0 }, 17).unwrap();
        assert_eq!(nodes, vec![(200.0, 1.0)]);
    }

    #[test]
    fn gaussian_quadrature_normalized_and_centered() {
        let dist = VelocityDist::Gaussian { v0: 600.0, fwhm: 120.0 };
        let nodes = velocity_quadrature(&dist, 24).unwrap();
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean: f64 = nodes.iter().map(|(v, w)| v * w).sum();
        assert!((mean - 600.0).abs() / 600.0 < 1e-3);
        assert!(nodes.iter().all(|&(v, _)| v > 0.0));
    }

    #[test]
    fn gaussian_quadrature_clips_negative_velocities() {
        let dist = VelocityDist::Gaussian { v0: 50.0, fwhm: 200.0 };
        let nodes = velocity_quadrature(&dist, 32).unwrap();
        assert!(nodes.iter().all(|&(v, _)| v > 0.0));
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_is_deterministic() {
        let dist = VelocityDist::Gaussian { v0: 190.0, fwhm: 30.0 };
        let a = velocity_quadrature(&dist, 20).unwrap();
        let b = velocity_quadrature(&dist, 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_table_is_domain_error() {
        let err = velocity_quadrature(&VelocityDist::Tabulated(vec![]), 4).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((integral - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn cluster_scaling_is_linear() {
        let p = ParticleSpec::new(178.0 * AMU, VelocityDist::Delta { v0: 900.0 })
            .unwrap()
            .with_optical(1e-39, 1e-21)
            .unwrap();
        let c = p.scaled(7.0).unwrap();
        assert!((c.mass - 7.0 * p.mass).abs() / c.mass < 1e-15);
        assert!((c.sigma_abs - 7.0 * p.sigma_abs).abs() / c.sigma_abs < 1e-15);
    }
}
