//! Deflection metrology, inertial phases and inverse fits of optical properties.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::{InterferometerConfig, Scheme};
use crate::constants::{EPS0, G_EARTH, K_B};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::particle::ParticleSpec;
use crate::signal::{kdtli_fringe, Mode};

/// Static field region of a deflection experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectionField {
    /// `(E·∇)E_x` [V²/m³].
    pub field_gradient_product: f64,
    /// Length of the electrode region [m].
    pub electrode_length: f64,
    /// Free flight after the electrodes [m].
    pub drift_distance: f64,
}

impl DeflectionField {
    pub fn new(field_gradient_product: f64, electrode_length: f64, drift_distance: f64) -> Result<Self> {
        require_non_negative("electrode length", electrode_length)?;
        require_non_negative("drift distance", drift_distance)?;
        if !field_gradient_product.is_finite() {
            return Err(Error::Domain("field gradient product must be finite".into()));
        }
        Ok(DeflectionField {
            field_gradient_product,
            electrode_length,
            drift_distance,
        })
    }
}

/// Transverse shift `Δx = χ (E·∇)E_x / (m v²) · s (s/2 + l)`.
pub fn deflection_shift(susceptibility: f64, field: &DeflectionField, mass: f64, velocity: f64) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("velocity", velocity)?;
    let s = field.electrode_length;
    Ok(
        susceptibility * field.field_gradient_product / (mass * velocity * velocity)
            * s
            * (0.5 * s + field.drift_distance),
    )
}

/// Electric susceptibility `χ = α_stat + ⟨d_x²⟩ / k_B T`.
pub fn susceptibility(alpha_stat: f64, dipole_sq_mean: f64, temperature: f64) -> Result<f64> {
    require_positive("temperature", temperature)?;
    require_non_negative("mean squared dipole", dipole_sq_mean)?;
    Ok(alpha_stat + dipole_sq_mean / (K_B * temperature))
}

/// Coriolis phase `4π s·(v × Ω) T² / d` for the unit grating normal `s`.
pub fn coriolis_phase(normal: [f64; 3], velocity: [f64; 3], rotation: [f64; 3], time: f64, period: f64) -> Result<f64> {
    require_positive("period", period)?;
    let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "grating normal must be a unit vector, |s| = {norm}"
        )));
    }
    let [vx, vy, vz] = velocity;
    let [ox, oy, oz] = rotation;
    let cross = [vy * oz - vz * oy, vz * ox - vx * oz, vx * oy - vy * ox];
    let dot: f64 = normal.iter().zip(&cross).map(|(a, b)| a * b).sum();
    Ok(4.0 * PI * dot * time * time / period)
}

/// Free-fall distance `g T² / 2`.
pub fn gravity_fall(time: f64) -> Result<f64> {
    require_non_negative("time", time)?;
    Ok(0.5 * G_EARTH * time * time)
}

/// Polarizability `4πε0 R³ (ε - 1)/(ε + 2)` of a dielectric sphere.
pub fn nanosphere_polarizability(radius: f64, permittivity: Complex64) -> Result<Complex64> {
    require_positive("radius", radius)?;
    let denom = permittivity + 2.0;
    if denom.norm() < 1e-12 {
        return Err(Error::ResonancePole(
            "permittivity at the sphere resonance ε = -2".into(),
        ));
    }
    Ok(4.0 * PI * EPS0 * radius.powi(3) * (permittivity - 1.0) / denom)
}

/// Search bounds of a visibility fit. Without a cross-section range the fit
/// holds `σ_abs = 0` and is one-dimensional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub alpha: (f64, f64),
    pub sigma: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub alpha_opt: f64,
    pub sigma_abs: f64,
    /// Approximate confidence half-widths from the local curvature.
    pub alpha_half_width: f64,
    pub sigma_half_width: f64,
    /// `√Σ residual²`.
    pub residual_norm: f64,
    pub iterations: usize,
    /// The optimum lies on the search-box boundary.
    pub at_boundary: bool,
}

const GRID: usize = 64;
const MAX_ITERATIONS: usize = 500;
const TOLERANCE: f64 = 1e-10;
const MAX_RESTARTS: usize = 20;
const STARTS: usize = 4;

/// Sinusoidal KDTLI visibility at laser power `power` for the given optical
/// parameters; the model behind [`fit_visibility_curve`].
pub fn visibility_model(
    config: &InterferometerConfig,
    template: &ParticleSpec,
    power: f64,
    alpha_opt: f64,
    sigma_abs: f64,
) -> Result<f64> {
    let mut cfg = config.clone();
    let mut laser = cfg
        .laser
        .ok_or_else(|| Error::Configuration("visibility fit needs laser settings".into()))?;
    laser.power = power;
    cfg.laser = Some(laser);
    let mut particle = template.clone();
    particle.alpha_opt = alpha_opt;
    particle.sigma_abs = sigma_abs;
    let signal = kdtli_fringe(&cfg, &particle, Mode::Quantum, &[])?;
    let s0 = signal.offset();
    if !(s0 > 0.0) {
        return Err(Error::DegenerateSignal("no transmission through the masks".into()));
    }
    Ok(2.0 * signal.amplitude(1).norm() / s0)
}

/// Least-squares fit of `(α_opt, σ_abs)` to measured `(P_L, V_sin)` pairs: a
/// `64` (or `64×64`) grid over the search box followed by a Nelder-Mead
/// simplex in box-normalized coordinates.
pub fn fit_visibility_curve(
    data: &[(f64, f64)],
    config: &InterferometerConfig,
    template: &ParticleSpec,
    search: SearchBox,
) -> Result<FitResult> {
    if config.scheme != Scheme::Kdtli {
        return Err(Error::Configuration("visibility fit needs the KDTLI scheme".into()));
    }
    if data.len() < 5 {
        return Err(Error::Domain(format!(
            "fit needs at least 5 data points, got {}",
            data.len()
        )));
    }
    for &(p, v) in data {
        require_positive("laser power", p)?;
        if !v.is_finite() {
            return Err(Error::Domain("measured visibilities must be finite".into()));
        }
    }
    if data.iter().all(|&(_, v)| v == 0.0) {
        return Err(Error::NonIdentifiable("all measured visibilities are zero".into()));
    }
    check_range("alpha", search.alpha)?;
    if let Some(s) = search.sigma {
        if !(s.0 >= 0.0 && s.1 > s.0 && s.1.is_finite()) {
            return Err(Error::Domain(
                "cross-section search range must be ordered and non-negative".into(),
            ));
        }
    }
    let dims = if search.sigma.is_some() { 2 } else { 1 };
    let to_params = |u: &[f64]| -> (f64, f64) {
        let a = search.alpha.0 + fold(u[0]) * (search.alpha.1 - search.alpha.0);
        let s = match search.sigma {
            Some((lo, hi)) => lo + fold(u[1]) * (hi - lo),
            None => 0.0,
        };
        (a, s)
    };
    let cost = |u: &[f64]| -> Result<f64> {
        let (a, s) = to_params(u);
        let mut c = 0.0;
        for &(p, v) in data {
            let r = visibility_model(config, template, p, a, s)? - v;
            c += r * r;
        }
        Ok(c)
    };

    // coarse grid; the stable sort keeps ties in grid order
    let axis: Vec<f64> = (0..GRID).map(|k| k as f64 / (GRID - 1) as f64).collect();
    let points: Vec<Vec<f64>> = if dims == 1 {
        axis.iter().map(|&a| vec![a]).collect()
    } else {
        axis.iter()
            .flat_map(|&a| axis.iter().map(move |&s| vec![a, s]))
            .collect()
    };
    let mut costs = Vec::with_capacity(points.len());
    for u in &points {
        costs.push(cost(u)?);
    }
    let worst = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lowest = costs.iter().cloned().fold(f64::INFINITY, f64::min);
    if worst - lowest <= 1e-14 * worst.max(1e-300) {
        return Err(Error::NonIdentifiable(
            "residual landscape is flat over the search box".into(),
        ));
    }
    let starts = grid_starts(&costs, dims);
    // several starts, since absorption and polarizability trade off along a
    // valley that can hold more than one local minimum
    let step = 1.0 / (GRID - 1) as f64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut iterations = 0;
    for &idx in &starts {
        let (mut u, mut c, it) = nelder_mead(&cost, &points[idx], step)?;
        iterations += it;
        // restarts recover from a simplex collapsed inside a curved valley
        for _ in 0..MAX_RESTARTS {
            let (u2, c2, it) = nelder_mead(&cost, &u, step)?;
            iterations += it;
            let improved = c2 < c * (1.0 - 1e-9);
            if c2 < c {
                u = u2;
                c = c2;
            }
            if !improved {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| c < b.1) {
            best = Some((u, c));
        }
    }
    let (u, c) = best.expect("at least one start");
    let u: Vec<f64> = u.into_iter().map(fold).collect();
    let (alpha_opt, sigma_abs) = to_params(&u);
    let at_boundary = u[0] <= 1e-6 || u[0] >= 1.0 - 1e-6 || (dims == 2 && (u[1] <= 1e-6 || u[1] >= 1.0 - 1e-6));

    let (alpha_half_width, sigma_half_width) = half_widths(&cost, &u, c, data.len(), &search)?;
    Ok(FitResult {
        alpha_opt,
        sigma_abs,
        alpha_half_width,
        sigma_half_width,
        residual_norm: c.sqrt(),
        iterations,
        at_boundary,
    })
}

/// Grid indices to start the simplex from: the lowest local minima of the grid
/// and the best point on the lower cross-section edge, at most [`STARTS`].
fn grid_starts(costs: &[f64], dims: usize) -> Vec<usize> {
    let n = GRID as isize;
    let at = |i: isize, j: isize| -> Option<f64> {
        if i < 0 || i >= n || j < 0 || (dims == 1 && j != 0) || (dims == 2 && j >= n) {
            None
        } else if dims == 1 {
            Some(costs[i as usize])
        } else {
            Some(costs[(i * n + j) as usize])
        }
    };
    let index = |i: isize, j: isize| if dims == 1 { i as usize } else { (i * n + j) as usize };
    let cols = if dims == 1 { 1 } else { n };
    let mut minima = Vec::new();
    for i in 0..n {
        for j in 0..cols {
            let c = at(i, j).expect("inside grid");
            let is_min = (-1..=1)
                .flat_map(|di| (-1..=1).map(move |dj| (di, dj)))
                .filter(|&d| d != (0, 0))
                .all(|(di, dj)| at(i + di, j + dj).is_none_or(|o| c <= o));
            if is_min {
                minima.push(index(i, j));
            }
        }
    }
    minima.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
    minima.truncate(STARTS);
    if dims == 2 {
        let edge = (0..n)
            .map(|i| index(i, 0))
            .min_by(|&a, &b| costs[a].total_cmp(&costs[b]))
            .expect("non-empty grid");
        if !minima.contains(&edge) {
            minima.push(edge);
        }
    }
    minima
}

/// Maps the real line onto `[0, 1]` by mirror reflection at the box faces, so the
/// simplex never needs clamping.
fn fold(u: f64) -> f64 {
    let r = u.rem_euclid(2.0);
    if r > 1.0 {
        2.0 - r
    } else {
        r
    }
}

fn check_range(name: &str, r: (f64, f64)) -> Result<()> {
    if r.0 > 0.0 && r.1 > r.0 && r.1.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} search range must be positive, finite and ordered"
        )))
    }
}

fn nelder_mead(cost: &dyn Fn(&[f64]) -> Result<f64>, start: &[f64], step: f64) -> Result<(Vec<f64>, f64, usize)> {
    let dims = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dims + 1);
    simplex.push((start.to_vec(), cost(start)?));
    for i in 0..dims {
        let mut p = start.to_vec();
        p[i] = if p[i] + step <= 1.0 { p[i] + step } else { p[i] - step };
        let c = cost(&p)?;
        simplex.push((p, c));
    }
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (simplex[0].1, simplex[dims].1);
        let size = (1..=dims)
            .flat_map(|k| (0..dims).map(move |i| (k, i)))
            .map(|(k, i)| (simplex[k].0[i] - simplex[0].0[i]).abs())
            .fold(0.0, f64::max);
        if hi - lo <= TOLERANCE * (lo + TOLERANCE) || size < 1e-14 {
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..dims)
            .map(|i| simplex[..dims].iter().map(|p| p.0[i]).sum::<f64>() / dims as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..dims)
                .map(|i| centroid[i] + t * (simplex[dims].0[i] - centroid[i]))
                .collect()
        };
        let reflected = along(-1.0);
        let cr = cost(&reflected)?;
        if cr < simplex[0].1 {
            let expanded = along(-2.0);
            let ce = cost(&expanded)?;
            simplex[dims] = if ce < cr { (expanded, ce) } else { (reflected, cr) };
        } else if cr < simplex[dims - 1].1 {
            simplex[dims] = (reflected, cr);
        } else {
            let contracted = if cr < hi { along(-0.5) } else { along(0.5) };
            let cc = cost(&contracted)?;
            if cc < hi.min(cr) {
                simplex[dims] = (contracted, cc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = (0..dims).map(|i| best[i] + 0.5 * (p.0[i] - best[i])).collect();
                    p.1 = cost(&shrunk)?;
                    p.0 = shrunk;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (u, c) = simplex.swap_remove(0);
    Ok((u, c, iterations))
}

/// Half-widths `√(2 s² H⁻¹)_ii` with `s² = cost / (N - p)`, from a central
/// finite-difference Hessian in physical units.
fn half_widths(
    cost: &dyn Fn(&[f64]) -> Result<f64>,
    u: &[f64],
    c: f64,
    n_data: usize,
    search: &SearchBox,
) -> Result<(f64, f64)> {
    let dims = u.len();
    let dof = n_data.saturating_sub(dims).max(1) as f64;
    let s2 = c / dof;
    let widths = [
        search.alpha.1 - search.alpha.0,
        search.sigma.map(|(lo, hi)| hi - lo).unwrap_or(1.0),
    ];
    let h: Vec<f64> = (0..dims).map(|i| 1e-4 * u[i].abs().max(1e-3)).collect();
    let at = |shift: &[(usize, f64)]| -> Result<f64> {
        let mut p = u.to_vec();
        for &(i, d) in shift {
            p[i] += d;
        }
        cost(&p)
    };
    let mut hess = [[0.0; 2]; 2];
    for i in 0..dims {
        hess[i][i] = (at(&[(i, h[i])])? - 2.0 * c + at(&[(i, -h[i])])?) / (h[i] * h[i]);
    }
    if dims == 2 {
        let off = (at(&[(0, h[0]), (1, h[1])])? - at(&[(0, h[0]), (1, -h[1])])? - at(&[(0, -h[0]), (1, h[1])])?
            + at(&[(0, -h[0]), (1, -h[1])])?)
            / (4.0 * h[0] * h[1]);
        hess[0][1] = off;
        hess[1][0] = off;
    }
    let cov_diag: [f64; 2] = if dims == 1 {
        [2.0 * s2 / hess[0][0], 0.0]
    } else {
        let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
        [2.0 * s2 * hess[1][1] / det, 2.0 * s2 * hess[0][0] / det]
    };
    let width = |i: usize| -> f64 {
        let v = cov_diag[i];
        if v.is_finite() && v >= 0.0 {
            v.sqrt() * widths[i]
        } else {
            f64::INFINITY
        }
    };
    Ok((width(0), if dims == 2 { width(1) } else { 0.0 }))
}
