//! Two independent routes to the Haar mass of a region of `SL(2)`: Cartan
//! sampling, and Lebesgue integration of the exponential-chart density.

mod common;

use aip_core::haar::{ball_mass, exp_chart_jacobian, exp_traceless, log_sl2, sample_cartan, stream_rng};
use aip_core::unimodular::singular_values_of;
use nalgebra::Matrix2;
use rand::Rng;

const R: f64 = 2.0;

fn in_region(m: &Matrix2<f64>) -> bool {
    m.determinant() > 0.0 && m.trace() > 0.0 && singular_values_of(m).0 <= R
}

#[test]
fn chart_density_matches_cartan_mass() {
    let n = 2_000_000;
    let mut rng = stream_rng(71, 0);
    let hits = (0..n).filter(|_| in_region(&sample_cartan(R, &mut rng).decode().matrix().clone_owned())).count();
    let f = hits as f64 / n as f64;
    let cartan = ball_mass(R) * f;
    let cartan_se = ball_mass(R) * (f * (1.0 - f) / n as f64).sqrt();

    // every point of the region has a chart preimage inside this box
    let b = 5.0;
    let volume = (2.0 * b) * (2.0 * b) * (2.0 * b);
    let mut r = common::rng(72);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let (x, y, z) = (r.random_range(-b..b), r.random_range(-b..b), r.random_range(-b..b));
        let inj = x * x + y * z > -std::f64::consts::PI.powi(2);
        let v = if inj && in_region(&exp_traceless(x, y, z)) { exp_chart_jacobian(x, y, z) } else { 0.0 };
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let chart = volume * mean;
    let chart_se = volume * ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    let se = cartan_se.hypot(chart_se);
    assert!((cartan - chart).abs() <= 4.0 * se, "cartan {cartan} ± {cartan_se}, chart {chart} ± {chart_se}");
}

#[test]
fn log_inverts_exp_on_the_region() {
    let mut rng = stream_rng(73, 0);
    for _ in 0..10_000 {
        let m = sample_cartan(R, &mut rng).decode();
        let m = m.matrix();
        if m.determinant() < 0.0 || m.trace() <= -1.9 {
            assert!(m.determinant() < 0.0 || m.trace() > -2.0 || log_sl2(m).is_none());
            continue;
        }
        let [a, b, c] = log_sl2(m).expect("trace above −2");
        assert!((exp_traceless(a, b, c) - m).abs().max() < 1e-9);
    }
}
