//! Task execution: scans, carpets and fits, producing in-memory tables.

use std::path::Path;

use rayon::prelude::*;
use talbot_core::carpet::{carpet, classical_carpet, uniform_positions, CarpetGrid};
use talbot_core::constants::{polarizability_from_a3, polarizability_to_a3, AMU};
use talbot_core::decoherence::{
    apply_channels, collisional_channel, collisional_channel_gaussian, csl_as_channel, thermal_emission_rate,
    CslParams, DecoherenceChannel, GasParams,
};
use talbot_core::gratings::talbot_coeff_quantum;
use talbot_core::metrology::{fit_visibility_curve, visibility_model, SearchBox};
use talbot_core::particle::talbot_time;
use talbot_core::signal::{
    kdtli_fringe, otima_signal, tilt_scan_shift, timing_imbalance_envelope, total_fringe_phase,
    velocity_averaged_fringe, FringeSignal, Mode,
};
use talbot_core::{InterferometerConfig, ParticleSpec, Scheme, Separation};

use crate::config::{Axis, ChannelCfg, RunConfig, ScanCfg, SpectrumPoint};
use crate::CliError;

/// A named CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `#` metadata lines.
    pub notes: Vec<String>,
    /// Plot the first column on a log axis.
    pub log_x: bool,
}

pub fn execute(config: &RunConfig, base: &Path) -> Result<Vec<Table>, CliError> {
    match config.task {
        crate::config::Task::Scan => scan(config, config.scan.as_ref().expect("validated")).map(|t| vec![t]),
        crate::config::Task::Carpet => carpets(config),
        crate::config::Task::Fit => fit(config, base),
    }
}

/// Everything a single scan point needs, with the axis value applied.
struct Point {
    config: InterferometerConfig,
    particle: ParticleSpec,
    channels: Vec<ChannelCfg>,
}

fn apply_axis(config: &RunConfig, axis: Axis, value: f64) -> Result<Point, CliError> {
    let mut interferometer = config.interferometer()?;
    let mut particle = config.particle()?;
    let mut channels = config.decoherence.clone();
    match axis {
        Axis::Power => {
            if let Some(laser) = interferometer.laser.as_mut() {
                laser.power = value;
            }
        }
        Axis::Length => interferometer.separation = Separation::Length(value),
        Axis::Time => interferometer.separation = Separation::Time(value),
        Axis::Mass => particle = particle.scaled(value * AMU / particle.mass)?,
        Axis::Pressure => {
            for ch in &mut channels {
                if let ChannelCfg::Collisional { pressure_pa, .. } = ch {
                    *pressure_pa = value;
                }
            }
        }
        Axis::Temperature => {
            for ch in &mut channels {
                if let ChannelCfg::Thermal { temperature_k, .. } = ch {
                    *temperature_k = value;
                }
            }
        }
        Axis::CslLambda => {
            for ch in &mut channels {
                if let ChannelCfg::Csl { lambda_per_s, .. } = ch {
                    *lambda_per_s = value;
                }
            }
        }
        Axis::TiltHeight | Axis::TimingImbalance => {}
    }
    Ok(Point {
        config: interferometer,
        particle,
        channels,
    })
}

fn interpolate(spectrum: &[SpectrumPoint], omega: f64) -> f64 {
    let i = spectrum.partition_point(|p| p.omega_rad_per_s <= omega);
    if i == 0 || i == spectrum.len() {
        return 0.0;
    }
    let (a, b) = (&spectrum[i - 1], &spectrum[i]);
    let f = (omega - a.omega_rad_per_s) / (b.omega_rad_per_s - a.omega_rad_per_s);
    a.sigma_m2 + f * (b.sigma_m2 - a.sigma_m2)
}

fn build_channels(channels: &[ChannelCfg], mass: f64) -> Result<Vec<DecoherenceChannel>, CliError> {
    channels
        .iter()
        .map(|ch| {
            Ok(match ch {
                ChannelCfg::Gaussian {
                    rate_per_s,
                    sigma_q_kg_m_per_s,
                } => DecoherenceChannel::gaussian("gaussian", *rate_per_s, *sigma_q_kg_m_per_s)?,
                ChannelCfg::Resolving { rate_per_s } => DecoherenceChannel::resolving("resolving", *rate_per_s)?,
                ChannelCfg::Collisional {
                    pressure_pa,
                    sigma_eff_m2,
                    gas_mass_u,
                    gas_temperature_k,
                    sigma_q_kg_m_per_s,
                } => {
                    let gas = GasParams {
                        mass: gas_mass_u * AMU,
                        temperature: *gas_temperature_k,
                    };
                    match sigma_q_kg_m_per_s {
                        Some(s) => collisional_channel_gaussian(*pressure_pa, *sigma_eff_m2, gas, *s)?,
                        None => collisional_channel(*pressure_pa, *sigma_eff_m2, gas)?,
                    }
                }
                ChannelCfg::Csl { lambda_per_s, r_c_m } => {
                    csl_as_channel(CslParams::new(*lambda_per_s, *r_c_m)?, mass)?
                }
                ChannelCfg::Thermal {
                    temperature_k,
                    spectrum,
                } => thermal_emission_rate(|w| interpolate(spectrum, w), *temperature_k)?.1,
            })
        })
        .collect()
}

/// Quantum and, for stationary setups, classical fringe signals of one point.
fn signals(point: &Point) -> Result<(FringeSignal, Option<FringeSignal>), CliError> {
    let channels = build_channels(&point.channels, point.particle.mass)?;
    let (config, particle) = (&point.config, &point.particle);
    if config.scheme == Scheme::Otima {
        let signal = match config.laser {
            Some(laser) => {
                let s = otima_signal(config, particle, laser.pulse_energies)?;
                let time = config.separation.time_at(particle.velocity.mean()?);
                apply_channels(&s, &channels, particle.mass, time)?
            }
            None => velocity_averaged_fringe(config, particle, Mode::Quantum, &channels, &|_| Ok(config.gratings[1]))?,
        };
        return Ok((signal, None));
    }
    let run = |mode| -> Result<FringeSignal, CliError> {
        Ok(match config.scheme {
            Scheme::Kdtli => kdtli_fringe(config, particle, mode, &channels)?,
            _ => velocity_averaged_fringe(config, particle, mode, &channels, &|_| Ok(config.gratings[1]))?,
        })
    };
    Ok((run(Mode::Quantum)?, Some(run(Mode::Classical)?)))
}

fn v_sin(s: &FringeSignal) -> Result<f64, CliError> {
    Ok(s.visibility()?.v_sin)
}

fn scan_point(config: &RunConfig, scan: &ScanCfg, value: f64) -> Result<Vec<f64>, CliError> {
    let point = apply_axis(config, scan.axis, value)?;
    let (quantum, classical) = signals(&point)?;
    let mut row = vec![value];
    match scan.axis {
        Axis::TiltHeight => {
            let shift = tilt_scan_shift(value, scan.tilt_rad.expect("validated").abs())?;
            let d = point.config.period();
            let phase = total_fringe_phase(0.0, shift, 0.0, d);
            let dx = -phase * d / (2.0 * std::f64::consts::PI);
            row.push(shift);
            row.push(quantum.shifted(dx).evaluate(0.0));
            if let Some(c) = classical {
                row.push(c.shifted(dx).evaluate(0.0));
            }
        }
        Axis::TimingImbalance => {
            let v = point.particle.velocity.mean()?;
            let envelope =
                timing_imbalance_envelope(scan.divergence_rad.expect("validated"), v, point.config.period(), value)?;
            row.push(envelope);
            row.push(envelope * v_sin(&quantum)?);
            if let Some(c) = classical {
                row.push(envelope * v_sin(&c)?);
            }
        }
        _ if point.config.scheme == Scheme::Otima => {
            let s0 = quantum.offset();
            if !(s0 > 0.0) {
                return Err(CliError::Accuracy(format!(
                    "no transmission at {} = {value}",
                    scan.axis.column()
                )));
            }
            row.push(2.0 * quantum.amplitude(1).norm() / s0);
            row.push((quantum.evaluate(0.0) - s0) / s0);
        }
        _ => {
            let q = quantum.visibility()?;
            let c = classical
                .expect("stationary setups have a classical signal")
                .visibility()?;
            row.extend([q.v_sin, c.v_sin, q.v_full, c.v_full]);
        }
    }
    Ok(row)
}

fn scan_header(config: &RunConfig, axis: Axis) -> Vec<String> {
    let otima = config.interferometer.scheme == crate::config::SchemeCfg::Otima;
    let mut header = vec![axis.column()];
    header.extend(match (axis, otima) {
        (Axis::TiltHeight, false) => vec!["shift_m", "signal_quantum", "signal_classical"],
        (Axis::TiltHeight, true) => vec!["shift_m", "signal"],
        (Axis::TimingImbalance, false) => vec!["envelope", "v_sin_quantum", "v_sin_classical"],
        (Axis::TimingImbalance, true) => vec!["envelope", "v_sin"],
        (_, true) => vec!["v_sin", "signal_difference"],
        (_, false) => vec!["v_sin_quantum", "v_sin_classical", "v_full_quantum", "v_full_classical"],
    });
    header.into_iter().map(String::from).collect()
}

pub fn scan(config: &RunConfig, scan: &ScanCfg) -> Result<Table, CliError> {
    let values = scan.values();
    // points run concurrently; collecting keeps axis order and the first error
    let results: Vec<Result<Vec<f64>, CliError>> = values.par_iter().map(|&v| scan_point(config, scan, v)).collect();
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(Table {
        name: "scan".into(),
        header: scan_header(config, scan.axis),
        rows,
        notes: vec![format!("axis: {}", scan.axis.column())],
        log_x: scan.spacing == crate::config::Spacing::Log,
    })
}

fn carpet_table(name: &str, grid: &CarpetGrid) -> Table {
    let mut header = vec!["t_over_talbot".to_string()];
    header.extend(
        grid.positions
            .iter()
            .map(|u| format!("u={}", crate::output::number(*u))),
    );
    let rows = grid
        .times
        .iter()
        .zip(&grid.density)
        .map(|(t, row)| std::iter::once(*t).chain(row.iter().copied()).collect())
        .collect();
    let mut notes = vec![
        "columns: position u = x/d over one period".to_string(),
        format!("truncation_tail: {}", crate::output::number(grid.tail)),
    ];
    if grid.truncation_warning() {
        notes.push("warning: Fourier truncation tail above 1e-6".into());
    }
    Table {
        name: name.into(),
        header,
        rows,
        notes,
        log_x: false,
    }
}

pub fn carpets(config: &RunConfig) -> Result<Vec<Table>, CliError> {
    let c = config.carpet.as_ref().expect("validated");
    let interferometer = config.interferometer()?;
    let spec = interferometer.gratings[c.grating];
    let times: Vec<f64> = (0..c.times)
        .map(|k| c.t_max_talbot * k as f64 / (c.times - 1) as f64)
        .collect();
    let positions = uniform_positions(c.positions);
    let (quantum, classical) = rayon::join(
        || -> Result<CarpetGrid, CliError> { Ok(carpet(&talbot_coeff_quantum(&spec)?, &times, &positions, c.order)?) },
        || -> Result<CarpetGrid, CliError> { Ok(classical_carpet(&spec, &times, &positions, c.order)?) },
    );
    let quantum = quantum?;
    let classical = classical?;
    for (name, grid) in [("quantum", &quantum), ("classical", &classical)] {
        if grid.truncation_warning() {
            eprintln!(
                "warning: {name} carpet truncation tail {:e} at order {}",
                grid.tail, c.order
            );
        }
    }
    Ok(vec![
        carpet_table("carpet_quantum", &quantum),
        carpet_table("carpet_classical", &classical),
    ])
}

fn read_fit_data(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut data = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        let field = |k: usize| -> Result<f64, CliError> {
            record.get(k).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| {
                CliError::Schema(format!(
                    "{}: data row {} needs power_W,visibility",
                    path.display(),
                    i + 1
                ))
            })
        };
        data.push((field(0)?, field(1)?));
    }
    Ok(data)
}

pub fn fit(config: &RunConfig, base: &Path) -> Result<Vec<Table>, CliError> {
    let f = config.fit.as_ref().expect("validated");
    let data = read_fit_data(&base.join(&f.data_csv))?;
    let interferometer = config.interferometer()?;
    let template = config.particle()?;
    let search = SearchBox {
        alpha: (
            polarizability_from_a3(f.alpha_range_a3[0]),
            polarizability_from_a3(f.alpha_range_a3[1]),
        ),
        sigma: f.sigma_range_m2.map(|[lo, hi]| (lo, hi)),
    };
    let result = fit_visibility_curve(&data, &interferometer, &template, search)?;
    let summary = Table {
        name: "fit".into(),
        header: [
            "alpha_opt_A3",
            "alpha_half_width_A3",
            "sigma_abs_m2",
            "sigma_half_width_m2",
            "residual_norm",
            "iterations",
            "at_boundary",
        ]
        .map(String::from)
        .to_vec(),
        rows: vec![vec![
            polarizability_to_a3(result.alpha_opt),
            polarizability_to_a3(result.alpha_half_width),
            result.sigma_abs,
            result.sigma_half_width,
            result.residual_norm,
            result.iterations as f64,
            if result.at_boundary { 1.0 } else { 0.0 },
        ]],
        notes: vec![format!("data points: {}", data.len())],
        log_x: false,
    };
    let curve = data
        .par_iter()
        .map(|&(p, v)| {
            visibility_model(&interferometer, &template, p, result.alpha_opt, result.sigma_abs).map(|m| vec![p, v, m])
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let curve = Table {
        name: "fit_curve".into(),
        header: ["power_W", "measured", "model"].map(String::from).to_vec(),
        rows: curve,
        notes: vec![],
        log_x: false,
    };
    Ok(vec![summary, curve])
}

/// Talbot time of the configured particle, reported as metadata.
pub fn talbot_note(config: &RunConfig) -> Result<String, CliError> {
    let p = config.particle()?;
    let tt = talbot_time(p.mass, config.interferometer.period_m)?;
    Ok(format!("talbot_time_s: {}", crate::output::number(tt)))
}
