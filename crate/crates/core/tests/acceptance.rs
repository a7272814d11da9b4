//! End-to-end acceptance checks. Prints one line per criterion and fails if any
//! criterion misses its tolerance or its runtime budget.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use talbot_core::carpet::{carpet, classical_carpet, uniform_positions};
use talbot_core::constants::{polarizability_from_a3, AMU, C, EPS0, H, K_B};
use talbot_core::decoherence::{
    apply_channels, collisional_channel_gaussian, csl_as_channel, log_csl_visibility_factor, log_reduction_factor,
    reduction_factor, CslParams, DecoherenceChannel, GasParams,
};
use talbot_core::gratings::{
    absorption_probability, ionizing_closed_form, kdtli_phi0, talbot_coeff_direct, talbot_coeff_quantum, transmission,
    transmission_coeffs,
};
use talbot_core::metrology::{fit_visibility_curve, visibility_model, SearchBox};
use talbot_core::particle::{talbot_length, talbot_time};
use talbot_core::signal::{
    kdtli_fringe, kdtli_sinusoidal_visibility, otima_closed_form, otima_generic, otima_mass_scan, tilt_scan_shift,
    timing_imbalance_envelope, timing_imbalance_limit, tl_fringe, Mode,
};
use talbot_core::specialfn::{bessel_i_complex, bessel_j};
use talbot_core::{
    Complex64, GratingSpec, InterferometerConfig, LaserSettings, ParticleSpec, Result, Scheme, Separation, VelocityDist,
};

const D_OTIMA: f64 = 78.5e-9;
const D_KDTLI: f64 = 266e-9;

struct Outcome {
    pass: bool,
    measured: String,
}

fn run(id: u32, title: &str, budget: Duration, check: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let (pass, measured) = match outcome {
        Ok(o) => (o.pass && elapsed <= budget, o.measured),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "[{}] {id:>2} {title}: {measured} ({:.3} ms, budget {} ms)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64() * 1e3,
        budget.as_millis()
    );
    pass
}

fn kdtli(phi0: f64, length: f64) -> InterferometerConfig {
    let mask = GratingSpec::mask(D_KDTLI, 0.42).unwrap();
    let phase = GratingSpec::phase(D_KDTLI, phi0).unwrap();
    InterferometerConfig::new(Scheme::Kdtli, [mask, phase, mask], Separation::Length(length)).unwrap()
}

fn talbot_time_constant() -> Result<Outcome> {
    let per_u = talbot_time(AMU, D_OTIMA)?;
    Ok(Outcome {
        pass: (per_u / 15.4e-9 - 1.0).abs() <= 0.01,
        measured: format!("T_T/m = {:.4} ns/u", per_u * 1e9),
    })
}

fn kdtli_phase_magnitude() -> Result<Outcome> {
    let p = ParticleSpec::new(720.0 * AMU, VelocityDist::Delta { v0: 200.0 })?
        .with_optical(polarizability_from_a3(100.0), 0.0)?;
    let phi0 = kdtli_phi0(&p, 10.0, 1e-3, 200.0)?;
    Ok(Outcome {
        pass: (phi0 / PI - 1.0).abs() <= 0.1,
        measured: format!("phi0 = {phi0:.4} rad = {:.4} pi", phi0 / PI),
    })
}

fn talbot_self_imaging() -> Result<Outcome> {
    let spec = GratingSpec::ionizing(D_OTIMA, 2.0, 2.0)?;
    let pos = uniform_positions(512);
    let q = carpet(&talbot_coeff_quantum(&spec)?, &[1.0], &pos, 40)?;
    let c = classical_carpet(&spec, &[1.0], &pos, 40)?;
    let mut dq = 0.0f64;
    let mut dc = 0.0f64;
    for (j, &u) in pos.iter().enumerate() {
        let image = transmission(&spec, u + 0.5).norm_sqr();
        dq = dq.max((q.density[0][j] - image).abs());
        dc = dc.max((c.density[0][j] - image).abs());
    }
    Ok(Outcome {
        pass: dq <= 1e-8 && dc > 0.05,
        measured: format!("quantum max dev {dq:.2e}, classical max dev {dc:.3}"),
    })
}

fn addition_theorem() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut closed_hits = 0usize;
    for &phi0 in &[0.5, PI, 2.0 * PI] {
        for &n0 in &[0.0, 1.0, 3.0] {
            let mut specs = vec![GratingSpec::ionizing(D_OTIMA, phi0, n0)?];
            if n0 == 0.0 {
                specs.push(GratingSpec::phase(D_OTIMA, phi0)?);
            }
            for spec in specs {
                let closed = talbot_coeff_quantum(&spec)?;
                let direct = talbot_coeff_direct(transmission_coeffs(&spec, 40)?);
                for n in -6..=6 {
                    for k in 0..=40 {
                        let xi = 2.0 * k as f64 / 40.0;
                        let reference = direct.eval(n, xi)?;
                        worst = worst.max((closed.eval(n, xi)? - reference).norm());
                        if let Some(v) = ionizing_closed_form(n, xi, phi0, n0) {
                            closed_hits += 1;
                            worst = worst.max((v - reference).norm());
                        }
                    }
                }
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-8 && closed_hits > 0,
        measured: format!("max |closed - direct| = {worst:.2e} ({closed_hits} branch evaluations)"),
    })
}

fn kdtli_contrast_zeros() -> Result<Outcome> {
    let m = 720.0 * AMU;
    let v = 200.0;
    let lt = talbot_length(m, v, D_KDTLI)?;
    let mut quantum = 0.0f64;
    let mut classical = f64::INFINITY;
    for r in [1.0, 2.0] {
        quantum = quantum.max(kdtli_sinusoidal_visibility(0.42, 0.42, PI, r, Mode::Quantum));
        classical = classical.min(kdtli_sinusoidal_visibility(0.42, 0.42, PI, r, Mode::Classical));
        let q = tl_fringe(&kdtli(PI, r * lt), m, v, Mode::Quantum)?.visibility()?.v_sin;
        let c = tl_fringe(&kdtli(PI, r * lt), m, v, Mode::Classical)?
            .visibility()?
            .v_sin;
        quantum = quantum.max(q);
        classical = classical.min(c);
    }
    Ok(Outcome {
        pass: quantum <= 1e-10 && classical > 1e-3,
        measured: format!("quantum V at L_T, 2L_T <= {quantum:.2e}, classical V >= {classical:.4}"),
    })
}

fn otima_equivalence() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for i in 0..5 {
        let n0 = 0.2 + 0.9 * i as f64;
        for j in 0..5 {
            let phi0 = 0.3 + 1.4 * j as f64;
            for k in 0..5 {
                let r = 0.15 + 0.45 * k as f64;
                let pulses = [(phi0, n0), (phi0, n0), (phi0, n0)];
                let a = otima_closed_form(pulses, D_OTIMA, r, 1.0, 0.0, 5)?;
                let b = otima_generic(pulses, D_OTIMA, r, 1.0, 0.0, 5)?;
                for l in -5..=5 {
                    worst = worst.max((a.amplitude(l) - b.amplitude(l)).norm());
                }
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-8,
        measured: format!("max amplitude difference {worst:.2e}"),
    })
}

/// Anthracene template with β = 1, 1 mm spot and pulse energies giving an
/// antinode photon number of 8 for the heptamer.
fn anthracene_scan(time: f64) -> Result<usize> {
    let wavelength = 2.0 * D_OTIMA;
    let alpha1 = polarizability_from_a3(25.0);
    let sigma1 = 2.0 * PI * alpha1 / (EPS0 * wavelength);
    let spot_peak = 2.0 / (PI * 1e-6);
    let energy = 8.0 * H * C / (4.0 * 7.0 * sigma1 * wavelength * spot_peak);
    let g = GratingSpec::ionizing(D_OTIMA, 1.0, 1.0)?;
    let cfg = InterferometerConfig::new(Scheme::Otima, [g; 3], Separation::Time(time))?.with_laser(LaserSettings {
        spot_peak,
        ..Default::default()
    });
    let template = ParticleSpec::new(178.0 * AMU, VelocityDist::Delta { v0: 925.0 })?.with_optical(alpha1, sigma1)?;
    let masses: Vec<f64> = (3..=12).map(|n| n as f64 * 178.0 * AMU).collect();
    let scan = otima_mass_scan(&cfg, &template, &masses, [energy; 3])?;
    let (best, _) = scan
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.signal_difference.abs().total_cmp(&b.1.signal_difference.abs()))
        .expect("non-empty scan");
    Ok(best + 3)
}

fn otima_mass_resonance() -> Result<Outcome> {
    let early = anthracene_scan(18.9e-6)?;
    let late = anthracene_scan(25.2e-6)?;
    Ok(Outcome {
        pass: (6..=8).contains(&early) && (9..=10).contains(&late),
        measured: format!("peak at Ac{early} (18.9 us), Ac{late} (25.2 us)"),
    })
}

fn timing_zero() -> Result<Outcome> {
    let limit = timing_imbalance_limit(1e-3, 1000.0, D_OTIMA)?;
    let at_zero = timing_imbalance_envelope(1e-3, 1000.0, D_OTIMA, limit)?;
    Ok(Outcome {
        pass: (39e-9..=40e-9).contains(&limit) && at_zero < 1e-12,
        measured: format!("first zero at {:.3} ns", limit * 1e9),
    })
}

fn tilt_shift() -> Result<Outcome> {
    let shift = tilt_scan_shift(1.5e-3, 5.1e-3)?;
    Ok(Outcome {
        pass: (19e-9..=21e-9).contains(&shift),
        measured: format!("shift {:.3} nm", shift * 1e9),
    })
}

fn csl_equivalence() -> Result<Outcome> {
    let params = CslParams::new(1e-8, 100e-9)?;
    let mut worst = 0.0f64;
    for m_u in [1e3, 1e5, 1e7] {
        let m = m_u * AMU;
        let tt = talbot_time(m, D_OTIMA)?;
        let channel = csl_as_channel(params, m)?;
        for r in [0.5, 1.0, 2.0] {
            let a = log_csl_visibility_factor(params, m, D_OTIMA, r * tt, tt)?;
            let b = log_reduction_factor(&channel, 1, m, D_OTIMA, r * tt)?;
            worst = worst.max(((a - b) / a).abs());
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-9,
        measured: format!("max relative difference {worst:.2e}"),
    })
}

fn collisional_form() -> Result<Outcome> {
    let m = 720.0 * AMU;
    let v = 200.0;
    let length = 0.105;
    let cfg = kdtli(1.2 * PI, length);
    let p = ParticleSpec::new(m, VelocityDist::Delta { v0: v })?;
    let gas = GasParams {
        mass: 28.0 * AMU,
        temperature: 293.0,
    };
    let sigma_q = (2.0 * gas.mass * K_B * gas.temperature).sqrt();
    let sigma_eff = 1e-16;
    let pressures: Vec<f64> = (0..=20).map(|k| 1e-6 * 10f64.powf(0.1 * k as f64)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &pr in &pressures {
        let ch = collisional_channel_gaussian(pr, sigma_eff, gas, sigma_q)?;
        let vis = kdtli_fringe(&cfg, &p, Mode::Quantum, &[ch])?.visibility()?.v_sin;
        xs.push(pr);
        ys.push(vis.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    let drop = (ys[0] - ys[ys.len() - 1]).exp();
    Ok(Outcome {
        pass: r2 > 0.999 && sxy < 0.0 && drop > 1.5,
        measured: format!("R^2 = {r2:.8} over 1e-6..1e-4 Pa, contrast ratio {drop:.2}"),
    })
}

fn fit_round_trip() -> Result<Outcome> {
    let mask = GratingSpec::mask(D_KDTLI, 0.42)?;
    let phase = GratingSpec::phase(D_KDTLI, 1.0)?;
    let cfg = InterferometerConfig::new(Scheme::Kdtli, [mask, phase, mask], Separation::Length(0.105))?.with_laser(
        LaserSettings {
            power: 1.0,
            waist_y: 1e-3,
            ..Default::default()
        },
    );
    let alpha = polarizability_from_a3(100.0);
    let p = ParticleSpec::new(840.0 * AMU, VelocityDist::Delta { v0: 200.0 })?.with_optical(alpha, 0.0)?;
    let clean: Vec<(f64, f64)> = (1..=12)
        .map(|k| {
            let power = 0.8 * k as f64;
            visibility_model(&cfg, &p, power, alpha, 0.0).map(|v| (power, v))
        })
        .collect::<Result<_>>()?;
    let search = SearchBox {
        alpha: (0.2 * alpha, 5.0 * alpha),
        sigma: None,
    };
    let noiseless = (fit_visibility_curve(&clean, &cfg, &p, search)?.alpha_opt / alpha - 1.0).abs();
    let noise = Normal::new(0.0, 0.02).expect("valid normal");
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<(f64, f64)> = clean
            .iter()
            .map(|&(pw, v)| (pw, v * (1.0 + noise.sample(&mut rng))))
            .collect();
        let fit = fit_visibility_curve(&noisy, &cfg, &p, search)?;
        worst = worst.max((fit.alpha_opt / alpha - 1.0).abs());
    }
    Ok(Outcome {
        pass: noiseless <= 1e-3 && worst <= 0.05,
        measured: format!(
            "noiseless error {noiseless:.2e}, worst of 100 noisy seeds {:.2}%",
            worst * 100.0
        ),
    })
}

fn property_suites() -> Result<Outcome> {
    let mut failures = Vec::new();

    let mut bessel = 0.0f64;
    for n in 1..25 {
        for k in 1..60 {
            let x = 0.5 * k as f64;
            let lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
            let rhs = 2.0 * n as f64 / x * bessel_j(n, x);
            bessel = bessel.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
            let z = Complex64::new(0.3 * k as f64 - 9.0, 0.2 * k as f64 - 5.0);
            let lhs = bessel_i_complex(n - 1, z) - bessel_i_complex(n + 1, z);
            let rhs = 2.0 * n as f64 / z * bessel_i_complex(n, z);
            let scale = bessel_i_complex(n - 1, z).norm() + bessel_i_complex(n + 1, z).norm();
            bessel = bessel.max((lhs - rhs).norm() / scale);
        }
    }
    if bessel > 1e-10 {
        failures.push(format!("bessel recurrence {bessel:.1e}"));
    }

    let mut poisson = 0.0f64;
    for &n0 in &[0.0, 0.5, 3.0, 10.0] {
        for k in 0..16 {
            let x = k as f64 / 16.0 * D_OTIMA;
            let total: f64 = (0..80)
                .map(|j| absorption_probability(j, x, n0, D_OTIMA).unwrap())
                .sum();
            poisson = poisson.max((total - 1.0).abs());
        }
    }
    if poisson > 1e-12 {
        failures.push(format!("poisson normalization {poisson:.1e}"));
    }

    let mut herm = 0.0f64;
    let m = 720.0 * AMU;
    let lt = talbot_length(m, 200.0, D_KDTLI)?;
    for r in [0.3, 0.77, 1.4] {
        let base = kdtli(2.5, r * lt);
        let s = tl_fringe(&base, m, 200.0, Mode::Quantum)?;
        let g = tl_fringe(&base.clone().with_acceleration(9.81), m, 200.0, Mode::Quantum)?;
        for l in 0..=5 {
            herm = herm.max((s.amplitude(-l) - s.amplitude(l).conj()).norm());
            if (s.amplitude(l).norm() - g.amplitude(l).norm()).abs() > 1e-14 {
                failures.push(format!("gravity changed |S_{l}|"));
            }
        }
    }
    if herm > 1e-14 {
        failures.push(format!("fringe hermiticity {herm:.1e}"));
    }

    let s = otima_closed_form([(1.0, 1.0), (2.0, 1.5), (1.0, 1.0)], D_OTIMA, 0.8, 1.0, 0.0, 5)?;
    let mass = 1e4 * AMU;
    let t = 0.8 * talbot_time(mass, D_OTIMA)?;
    let a = DecoherenceChannel::gaussian("a", 40.0, 1e-27)?;
    let b = DecoherenceChannel::resolving("b", 25.0)?;
    let ab = apply_channels(&s, &[a.clone(), b.clone()], mass, t)?;
    let ba = apply_channels(&s, &[b, a.clone()], mass, t)?;
    if (-5..=5).any(|l| ab.amplitude(l) != ba.amplitude(l)) {
        failures.push("channel order matters".into());
    }
    let r = reduction_factor(&a, 1, mass, D_OTIMA, t)?;
    if !(r > 0.0 && r <= 1.0) {
        failures.push(format!("reduction factor {r} outside (0, 1]"));
    }

    Ok(Outcome {
        pass: failures.is_empty(),
        measured: if failures.is_empty() {
            format!("recurrence {bessel:.1e}, poisson {poisson:.1e}, hermiticity {herm:.1e}")
        } else {
            failures.join("; ")
        },
    })
}

#[test]
fn acceptance_criteria() {
    let ms = Duration::from_millis;
    let results = [
        run(1, "Talbot time constant", ms(1), talbot_time_constant),
        run(2, "KDTLI phase magnitude", ms(1), kdtli_phase_magnitude),
        run(3, "Talbot self-imaging", ms(1000), talbot_self_imaging),
        run(4, "addition-theorem oracle", ms(5000), addition_theorem),
        run(5, "KDTLI contrast zeros", ms(100), kdtli_contrast_zeros),
        run(6, "OTIMA closed form vs pipeline", ms(10_000), otima_equivalence),
        run(7, "OTIMA mass-scan resonance", ms(10_000), otima_mass_resonance),
        run(8, "timing-imbalance zero", ms(1), timing_zero),
        run(9, "tilt-scan shift", ms(1), tilt_shift),
        run(10, "CSL equivalence", ms(5000), csl_equivalence),
        run(11, "collisional log-linear form", ms(30_000), collisional_form),
        run(12, "fit round trip", ms(30_000), fit_round_trip),
        run(13, "property suites", ms(30_000), property_suites),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
