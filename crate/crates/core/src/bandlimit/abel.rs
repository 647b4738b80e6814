use std::f64::consts::PI;

use crate::band::BandSpec;
use crate::error::{Error, Result};
use crate::Real;

use super::psf;

/// Quadrature controls for [`abel_radial`].
#[derive(Clone, Copy, Debug)]
pub struct AbelOptions {
    /// The PSF is integrated out to the radius where its asymptotic
    /// envelope falls below this bound.
    pub envelope_tol: f64,
    /// Gauss–Legendre panels per oscillation period of `κ_max`.
    pub panels_per_period: usize,
}

impl Default for AbelOptions {
    fn default() -> Self {
        Self {
            envelope_tol: 1e-6,
            panels_per_period: 2,
        }
    }
}

const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Radius beyond which `|Ψ(r)| < tol`, from `|J₁(z)| ≲ √(2/(πz))`.
fn truncation_radius(band: &BandSpec<f64>, tol: f64) -> f64 {
    let c = ((2.0 * band.kappa_max / PI).sqrt() + (2.0 * band.kappa_min / PI).sqrt()) / (2.0 * PI);
    (c / tol).powf(2.0 / 3.0)
}

/// `2 ∫₀^W Ψ(√(s² + w²)) dw` on `panels` equal Gauss–Legendre panels.
fn abel_at(band: &BandSpec<f64>, s: f64, w_max: f64, panels: usize) -> f64 {
    let h = w_max / panels as f64;
    let s2 = s * s;
    let mut acc = 0.0;
    for p in 0..panels {
        let m = (p as f64 + 0.5) * h;
        let mut part = 0.0;
        for k in 0..4 {
            let d = 0.5 * h * GL_X[k];
            let a = m + d;
            let b = m - d;
            part += GL_W[k] * (psf((s2 + a * a).sqrt(), band) + psf((s2 + b * b).sqrt(), band));
        }
        acc += part;
    }
    acc * h
}

/// Abel transform (the Radon projection of a radial function) of the band's
/// PSF, `ℛΨ(s) = 2 ∫_{|s|}^∞ Ψ(r) r / √(r² − s²) dr`, at each `s`.
///
/// The substitution `w = √(r² − s²)` removes the endpoint singularity; the
/// tail is truncated where the PSF envelope drops below
/// [`AbelOptions::envelope_tol`]. The result is even in `s` by construction.
pub fn abel_radial<T: Real>(band: &BandSpec<T>, s_samples: &[T], opts: AbelOptions) -> Result<Vec<T>> {
    let b = BandSpec {
        kappa_min: band.kappa_min.f64(),
        kappa_max: band.kappa_max.f64(),
    };
    if !(b.kappa_min >= 0.0 && b.kappa_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "band [{}, {}] is not valid",
            b.kappa_min, b.kappa_max
        )));
    }
    if b.is_empty() {
        return Ok(vec![T::zero(); s_samples.len()]);
    }
    let s_max = s_samples.iter().fold(0.0f64, |m, s| m.max(s.f64().abs()));
    let r_max = truncation_radius(&b, opts.envelope_tol).max(2.0 * s_max + 1.0);
    let period = 2.0 * PI / b.kappa_max;
    let panel_width = period / opts.panels_per_period.max(1) as f64;

    let eval = |s: f64, refine: usize| {
        let w_max = (r_max * r_max - s * s).sqrt();
        let panels = ((w_max / panel_width).ceil() as usize).max(1) * refine;
        abel_at(&b, s, w_max, panels)
    };

    // Self-convergence probe at the largest |s|: the oscillatory tail is hardest there.
    let probe = eval(s_max, 1);
    let fine = eval(s_max, 2);
    let scale = b.kappa_max / PI;
    if !(probe.is_finite() && fine.is_finite()) || (probe - fine).abs() > 1e-6 * scale {
        return Err(Error::Quadrature(format!(
            "Abel integral at s = {s_max} changed by {:.3e} under refinement",
            (probe - fine).abs()
        )));
    }

    Ok(s_samples
        .iter()
        .map(|s| T::of(eval(s.f64().abs(), 1)))
        .collect())
}
