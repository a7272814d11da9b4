use std::f64::consts::PI;

use talbot_core::carpet::{carpet, classical_carpet, uniform_positions};
use talbot_core::gratings::{talbot_coeff_quantum, transmission};
use talbot_core::GratingSpec;

const D: f64 = 78.5e-9;

#[test]
fn classical_carpet_has_no_revival() {
    let spec = GratingSpec::ionizing(D, PI, 2.0).unwrap();
    let pos = uniform_positions(256);
    let c = classical_carpet(&spec, &[1.0], &pos, 40).unwrap();
    let dev = pos
        .iter()
        .enumerate()
        .map(|(j, &u)| (c.density[0][j] - transmission(&spec, u + 0.5).norm_sqr()).abs())
        .fold(0.0, f64::max);
    assert!(dev > 0.05, "max deviation {dev}");
}

#[test]
fn classical_phase_grating_focuses() {
    let spec = GratingSpec::phase(D, PI).unwrap();
    let pos = uniform_positions(256);
    let times: Vec<f64> = (1..50).map(|k| k as f64 / 50.0).collect();
    let c = classical_carpet(&spec, &times, &pos, 60).unwrap();
    let peak = c.density.iter().flatten().cloned().fold(f64::MIN, f64::max);
    assert!(peak > 1.0, "peak {peak}");
}

#[test]
fn classical_carpet_is_not_periodic() {
    let spec = GratingSpec::phase(D, PI).unwrap();
    let pos = uniform_positions(64);
    let c = classical_carpet(&spec, &[0.3, 2.3], &pos, 80).unwrap();
    let diff = (0..pos.len())
        .map(|j| (c.density[0][j] - c.density[1][j]).abs())
        .fold(0.0, f64::max);
    assert!(diff > 1e-3);
}

#[test]
fn second_revival_is_unshifted() {
    for spec in [
        GratingSpec::ionizing(D, 1.3, 0.7).unwrap(),
        GratingSpec::phase(D, 2.0).unwrap(),
    ] {
        let pos = uniform_positions(128);
        let g = carpet(&talbot_coeff_quantum(&spec).unwrap(), &[2.0], &pos, 30).unwrap();
        for (j, &u) in pos.iter().enumerate() {
            assert!((g.density[0][j] - transmission(&spec, u).norm_sqr()).abs() < 1e-9);
        }
    }
}

#[test]
fn mask_carpet_flags_truncation_but_conserves_mean() {
    let spec = GratingSpec::mask(D, 0.42).unwrap();
    let pos = uniform_positions(200);
    let g = carpet(&talbot_coeff_quantum(&spec).unwrap(), &[0.0, 0.25, 0.5], &pos, 51).unwrap();
    assert!(g.truncation_warning());
    for i in 0..3 {
        assert!((g.row_mean(i) - 0.42).abs() < 1e-9);
    }
}
