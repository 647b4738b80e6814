//! Reference values computed independently of the library's fast paths.

use std::f64::consts::PI;

use paetex::bandlimit::{abel_radial, irf, psf, AbelOptions};
use paetex::wave::{wave_trace_oracle_fn, OracleOptions};
use paetex::BandSpec;

pub const SUITES: [&str; 3] = ["psf", "fha", "wave"];

/// `J₁(x) = (1/π) ∫₀^π cos(τ − x sin τ) dτ` by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand.
pub fn bessel_j1_integral(x: f64) -> f64 {
    let n = 64 + 4 * x.abs().ceil() as usize;
    let h = PI / n as f64;
    let f = |tau: f64| (tau - x * tau.sin()).cos();
    let inner: f64 = (1..n).map(|k| f(k as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

/// `Ψ(r)` assembled from [`bessel_j1_integral`]; `r = 0` uses the limit
/// `(κ_max² − κ_min²) / (4π)`.
pub fn psf_reference(r: f64, kappa_min: f64, kappa_max: f64) -> f64 {
    if r == 0.0 {
        return (kappa_max * kappa_max - kappa_min * kappa_min) / (4.0 * PI);
    }
    (kappa_max * bessel_j1_integral(kappa_max * r) - kappa_min * bessel_j1_integral(kappa_min * r)) / (2.0 * PI * r)
}

/// Relative L2 distance of the Abel transform of `Ψ` from the impulse
/// response over `s ∈ [0, 20/κ_max]`.
pub fn fha_closure(kappa_min: f64, kappa_max: f64, samples: usize) -> paetex::Result<f64> {
    let band = BandSpec::new(kappa_min, kappa_max)?;
    let s: Vec<f64> = (0..samples)
        .map(|k| 20.0 / kappa_max * k as f64 / (samples - 1) as f64)
        .collect();
    let abel = abel_radial(&band, &s, AbelOptions::default())?;
    let (mut num, mut den) = (0.0, 0.0);
    for (si, a) in s.iter().zip(&abel) {
        let r = irf(*si, &band);
        num += (a - r).powi(2);
        den += r * r;
    }
    Ok((num / den).sqrt())
}

fn suite_psf() -> Vec<String> {
    let mut out = Vec::new();
    for (lo, hi) in [(0.4, 10.0), (1.8, 10.0)] {
        let band = BandSpec::new(lo, hi).expect("valid band");
        for r in [0.0, 0.25, 0.5, 1.0, 2.0] {
            out.push(format!(
                "psf band=({lo},{hi}) r={r}: reference {:.8} library {:.8}",
                psf_reference(r, lo, hi),
                psf(r, &band)
            ));
        }
    }
    out
}

fn suite_fha() -> Vec<String> {
    [(0.4, 10.0), (1.8, 10.0)]
        .into_iter()
        .map(|(lo, hi)| match fha_closure(lo, hi, 401) {
            Ok(e) => format!("fha band=({lo},{hi}) s in [0, {}]: rel L2 {e:.3e}", 20.0 / hi),
            Err(e) => format!("fha band=({lo},{hi}): error {e}"),
        })
        .collect()
}

fn suite_wave() -> Vec<String> {
    let sigma: f64 = 4.0;
    let gauss = move |x: [f64; 2]| (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * sigma * sigma)).exp();
    let x = [24.0, 0.0];
    let t: Vec<f64> = (1..=8).map(|k| 4.0 * k as f64).collect();
    match wave_trace_oracle_fn(gauss, x, &t, &OracleOptions::default()) {
        Ok(p) => t
            .iter()
            .zip(p)
            .map(|(t, p)| format!("wave gaussian sigma=4 sensor=(24,0) t={t}: {p:.10}"))
            .collect(),
        Err(e) => vec![format!("wave: error {e}")],
    }
}

/// Output lines of the named suite, or `None` for an unknown name; `all`
/// runs every suite.
pub fn run_suite(name: &str) -> Option<Vec<String>> {
    match name {
        "psf" => Some(suite_psf()),
        "fha" => Some(suite_fha()),
        "wave" => Some(suite_wave()),
        "all" => Some(SUITES.iter().flat_map(|s| run_suite(s).expect("known suite")).collect()),
        _ => None,
    }
}
