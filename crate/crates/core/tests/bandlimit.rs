use std::f64::consts::PI;

use paetex::bandlimit::{abel_radial, apply_bandpass, apply_spectral_mask, make_even, psf, AbelOptions};
use paetex::{BandSpec, SensorData, SensorGeometry};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_causal(seed: u64, sensors: usize, steps: usize, dt: f64) -> SensorData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geom = SensorGeometry::new([0.0, 0.0], 10.0, sensors).unwrap();
    let traces = (0..sensors * steps).map(|_| rng.random_range(-1.0..1.0)).collect();
    SensorData::new(geom, dt, steps, 0, traces).unwrap()
}

fn max_diff(a: &SensorData, b: &SensorData) -> f64 {
    assert_eq!((a.num_steps, a.time_origin), (b.num_steps, b.time_origin));
    a.traces.iter().zip(&b.traces).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `m_even[n] = m[|n|]` read off the causal samples directly.
fn mirror_error(m: &SensorData) -> f64 {
    let e = make_even(m).unwrap();
    let o = e.time_origin as isize;
    let mut worst: f64 = 0.0;
    for j in 0..m.num_sensors() {
        for (k, v) in e.trace(j).iter().enumerate() {
            let n = (k as isize - o).unsigned_abs();
            let want = if n < m.num_steps { m.trace(j)[n] } else { 0.0 };
            worst = worst.max((v - want).abs());
        }
    }
    worst
}

#[test]
fn mirror_oracle_on_1000_random_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let steps = rng.random_range(2..200);
        let dt = rng.random_range(0.01..1.0);
        worst = worst.max(mirror_error(&random_causal(case, 3, steps, dt)));
    }
    assert!(worst <= 1e-12, "worst mirror deviation {worst:e}");
}

#[test]
fn bandpass_commutes_with_even_extension() {
    let m = random_causal(5, 4, 300, 0.05);
    let band = BandSpec::new(3.0, 40.0).unwrap();
    let a = apply_bandpass(&make_even(&m).unwrap(), &band).unwrap();
    let b = make_even(&apply_bandpass(&m, &band).unwrap()).unwrap();
    assert!(max_diff(&a, &b) <= 1e-9);
}

#[test]
fn bandpass_is_idempotent() {
    let m = random_causal(6, 3, 257, 0.1);
    let band = BandSpec::new(0.5, 20.0).unwrap();
    let once = apply_bandpass(&m, &band).unwrap();
    let twice = apply_bandpass(&once, &band).unwrap();
    assert!(max_diff(&once, &twice) <= 1e-12);
}

#[test]
fn fha_cycle_closes_for_both_bands() {
    for (lo, hi) in [(0.4, 10.0), (1.8, 10.0)] {
        let band = BandSpec::new(lo, hi).unwrap();
        let s: Vec<f64> = (0..401).map(|k| 20.0 / hi * k as f64 / 400.0).collect();
        let abel = abel_radial(&band, &s, AbelOptions::default()).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (si, a) in s.iter().zip(&abel) {
            let r = paetex::irf(*si, &band);
            num += (a - r).powi(2);
            den += r * r;
        }
        let rel = (num / den).sqrt();
        assert!(rel <= 0.02, "band ({lo}, {hi}): {rel}");
    }
}

#[test]
fn psf_spot_values() {
    let band = BandSpec::<f64>::new(0.4, 10.0).unwrap();
    assert!((psf(0.0, &band) - 7.94505).abs() < 1e-4);
    assert!((psf(0.0, &band) - 99.84 / (4.0 * PI)).abs() < 1e-12);
    assert!((psf(1.0, &band) - 0.056712).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn smooth_mask_commutes_with_even_extension(seed in 0u64..10_000, width in 0.5..30.0f64, steps in 8usize..150) {
        let m = random_causal(seed, 3, steps, 0.1);
        let mask = move |k: f64| (-(k / width).powi(2)).exp();
        let a = apply_spectral_mask(&make_even(&m).unwrap(), mask).unwrap();
        let b = make_even(&apply_spectral_mask(&m, mask).unwrap()).unwrap();
        prop_assert!(max_diff(&a, &b) <= 1e-9);
    }

    #[test]
    fn evenized_traces_are_symmetric(seed in 0u64..10_000, steps in 2usize..120) {
        let e = make_even(&random_causal(seed, 3, steps, 0.3)).unwrap();
        let o = e.time_origin;
        for n in 0..o.min(e.num_steps - o) {
            prop_assert!((e.trace(0)[o + n] - e.trace(0)[o - n]).abs() <= 1e-12);
        }
    }
}
