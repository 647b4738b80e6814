//! Band-limited texture machinery: the band-pass impulse response, its
//! radially symmetric point-spread function, and the temporal and spatial
//! filters that realize them on sampled data.
//!
//! Both kernels use the canonical normalization: the impulse response is the
//! 1D inverse Fourier transform of the band indicator and the PSF is the 2D
//! inverse Fourier transform of the annulus indicator (forward transform
//! `∫ f(y) e^{−iy·κ} dy`, inverse carrying `(2π)^{−n}`). Under this pair the
//! Radon projection of the PSF equals the impulse response exactly.

mod abel;
mod spatial;
mod temporal;

pub use abel::{abel_radial, AbelOptions};
pub use spatial::{
    convolve_psf, convolve_psf_periodic, convolve_radial_kernel, convolve_radial_mask, Boundary,
};
pub use temporal::{
    apply_bandpass, apply_spectral_mask, convolve_time, make_even, spectral_length, TimeKernel,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::band::BandSpec;
use crate::bessel::bessel_j1;
use crate::Real;

/// Normalization convention of a [`RadialKernel`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Fourier transforms of the kernels are exactly the band indicators.
    #[default]
    Canonical,
}

/// The impulse-response / point-spread pair generated by a band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialKernel<T = f64> {
    pub band: BandSpec<T>,
    pub normalization: Normalization,
}

impl<T: Real> RadialKernel<T> {
    pub fn new(band: BandSpec<T>) -> Self {
        Self {
            band,
            normalization: Normalization::Canonical,
        }
    }

    pub fn irf(&self, t: T) -> T {
        irf(t, &self.band)
    }

    pub fn psf(&self, r: T) -> T {
        psf(r, &self.band)
    }
}

/// Band-pass impulse response
/// `φ(t) = (sin(κ_max t) − sin(κ_min t)) / (π t) = (2/π) cos(κ₀ t) sin(a t) / t`.
pub fn irf<T: Real>(t: T, band: &BandSpec<T>) -> T {
    let t = t.f64();
    let a = 0.5 * (band.kappa_max - band.kappa_min).f64();
    let k0 = band.kappa_min.f64() + a;
    let at = a * t;
    // sin(a t)/t, with the removable singularity expanded
    let sinc = if at.abs() < 1e-4 {
        a * (1.0 - at * at / 6.0)
    } else {
        at.sin() / t
    };
    T::of(2.0 / PI * (k0 * t).cos() * sinc)
}

/// `J₁(z)/z`, finite at `z = 0`.
fn j1_over_arg(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        0.5 - z * z / 16.0
    } else {
        bessel_j1(z) / z
    }
}

/// Point-spread function of the band,
/// `Ψ(r) = (κ_max J₁(κ_max r) − κ_min J₁(κ_min r)) / (2π r)`.
pub fn psf<T: Real>(r: T, band: &BandSpec<T>) -> T {
    let r = r.f64().abs();
    let hi = band.kappa_max.f64();
    let lo = band.kappa_min.f64();
    T::of((hi * hi * j1_over_arg(hi * r) - lo * lo * j1_over_arg(lo * r)) / (2.0 * PI))
}

/// Samples of [`irf`] on `[−half_len·dt, half_len·dt]`, as a convolution kernel.
pub fn irf_kernel<T: Real>(band: &BandSpec<T>, dt: T, half_len: usize) -> TimeKernel<T> {
    let values = (0..2 * half_len + 1)
        .map(|k| irf(T::of(k as f64 - half_len as f64) * dt, band))
        .collect();
    TimeKernel { dt, values }
}
