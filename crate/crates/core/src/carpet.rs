//! Density patterns behind a single grating under plane-wave illumination.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::GratingSpec;
use crate::error::{Error, Result};
use crate::gratings::{talbot_coeff_classical, TalbotCoeffFn};

/// Coefficient magnitude at the truncation order above which a carpet is flagged.
pub const CARPET_TAIL_WARNING: f64 = 1e-6;

/// Density `w_t(x)` sampled on a grid of times `t/T_T` (rows) and positions `x/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarpetGrid {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub density: Vec<Vec<f64>>,
    /// Largest `|B_{±N}|` met at the truncation order.
    pub tail: f64,
    /// Largest imaginary part left after hermitian symmetrization.
    pub imag_residue: f64,
}

impl CarpetGrid {
    pub fn truncation_warning(&self) -> bool {
        self.tail > CARPET_TAIL_WARNING
    }

    /// Mean over the sampled positions of row `i`.
    pub fn row_mean(&self, i: usize) -> f64 {
        let row = &self.density[i];
        row.iter().sum::<f64>() / row.len() as f64
    }
}

/// `n` uniformly spaced positions `x/d` covering `[0, 1)`.
pub fn uniform_positions(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / n as f64).collect()
}

/// Quantum (or, with classical coefficients, ballistic) carpet
/// `w_t(x) = Σ_{|n| ≤ N} B_n(n t/T_T) e^{2πinx/d}`.
pub fn carpet(coeff_fn: &TalbotCoeffFn, times: &[f64], positions: &[f64], order: usize) -> Result<CarpetGrid> {
    if let Some(&t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Domain(format!("carpet times must be non-negative, got {t}")));
    }
    if positions.is_empty() {
        return Err(Error::Domain("carpet needs at least one position".into()));
    }
    let n_max = order as i32;
    let mut density = Vec::with_capacity(times.len());
    let mut tail = 0.0f64;
    let mut imag_residue = 0.0f64;
    for &t in times {
        let mut coeffs = Vec::with_capacity(2 * order + 1);
        for n in -n_max..=n_max {
            coeffs.push(coeff_fn.eval(n, n as f64 * t)?);
        }
        tail = tail.max(coeffs[0].norm()).max(coeffs[2 * order].norm());
        // B_{-n}(-ξ) = B_n(ξ)*, enforce it before summing
        let sym: Vec<Complex64> = (0..=order)
            .map(|k| 0.5 * (coeffs[order + k] + coeffs[order - k].conj()))
            .collect();
        imag_residue = imag_residue.max(sym[0].im.abs());
        let row = positions
            .iter()
            .map(|&u| {
                let mut w = sym[0].re;
                for (k, c) in sym.iter().enumerate().skip(1) {
                    w += 2.0 * (c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * u)).re;
                }
                w
            })
            .collect();
        density.push(row);
    }
    Ok(CarpetGrid {
        times: times.to_vec(),
        positions: positions.to_vec(),
        density,
        tail,
        imag_residue,
    })
}

/// Ballistic carpet from the classical coefficients `C_n(ξ)`.
pub fn classical_carpet(spec: &GratingSpec, times: &[f64], positions: &[f64], order: usize) -> Result<CarpetGrid> {
    let coeff = talbot_coeff_classical(spec, 256)?;
    carpet(&coeff, times, positions, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gratings::{talbot_coeff_quantum, transmission};

    #[test]
    fn phase_grating_starts_flat() {
        let spec = GratingSpec::phase(1.0, PI).unwrap();
        let b = talbot_coeff_quantum(&spec).unwrap();
        let grid = carpet(&b, &[0.0], &uniform_positions(64), 24).unwrap();
        assert!(grid.density[0].iter().all(|w| (w - 1.0).abs() < 1e-14));
    }

    #[test]
    fn ionizing_revival_images_the_shifted_mask() {
        let spec = GratingSpec::ionizing(1.0, 2.0, 2.0).unwrap();
        let b = talbot_coeff_quantum(&spec).unwrap();
        let pos = uniform_positions(128);
        let grid = carpet(&b, &[1.0, 2.0], &pos, 30).unwrap();
        for (j, &u) in pos.iter().enumerate() {
            assert!((grid.density[0][j] - transmission(&spec, u + 0.5).norm_sqr()).abs() < 1e-8);
            assert!((grid.density[1][j] - transmission(&spec, u).norm_sqr()).abs() < 1e-8);
        }
        assert!(!grid.truncation_warning());
    }

    #[test]
    fn classical_equals_quantum_at_zero_time() {
        let spec = GratingSpec::ionizing(1.0, PI, 2.0).unwrap();
        let pos = uniform_positions(64);
        let q = carpet(&talbot_coeff_quantum(&spec).unwrap(), &[0.0], &pos, 24).unwrap();
        let c = classical_carpet(&spec, &[0.0], &pos, 24).unwrap();
        for j in 0..pos.len() {
            assert!((q.density[0][j] - c.density[0][j]).abs() < 1e-9);
        }
    }

    #[test]
    fn small_order_is_flagged() {
        let spec = GratingSpec::mask(1.0, 0.5).unwrap();
        let grid = carpet(&talbot_coeff_quantum(&spec).unwrap(), &[0.0], &uniform_positions(8), 5).unwrap();
        assert!(grid.truncation_warning());
        assert!(carpet(&talbot_coeff_quantum(&spec).unwrap(), &[-0.1], &uniform_positions(8), 5).is_err());
    }
}
