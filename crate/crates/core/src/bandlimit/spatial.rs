use num_complex::Complex;

use crate::band::BandSpec;
use crate::error::{Error, Result};
use crate::fft::{bin_frequency, fast_len, fft2};
use crate::image::Image;
use crate::Real;

use super::psf;

/// How an image is extended before its spectrum is filtered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Boundary {
    /// Zero-padded to at least twice each dimension: linear convolution.
    #[default]
    ZeroPadded,
    /// The image is one period of a periodic signal.
    Periodic,
}

/// Multiplies the 2D spectrum of `f` by `weight(|κ|)` and transforms back.
pub fn convolve_radial_mask<T: Real>(
    f: &Image<T>,
    boundary: Boundary,
    weight: impl Fn(T) -> T,
) -> Result<Image<T>> {
    f.grid.validate()?;
    let (w, h) = (f.width(), f.height());
    let (pw, ph) = match boundary {
        Boundary::ZeroPadded => (fast_len(2 * w), fast_len(2 * h)),
        Boundary::Periodic => (w, h),
    };
    let dx = f.grid.dx;
    let zero = Complex::new(T::zero(), T::zero());
    let mut buf = vec![zero; pw * ph];
    for j in 0..h {
        for i in 0..w {
            buf[j * pw + i].re = f.get(i, j);
        }
    }
    fft2(&mut buf, pw, ph, false);
    let kx: Vec<T> = (0..pw).map(|k| bin_frequency(k, pw, dx)).collect();
    for j in 0..ph {
        let ky = bin_frequency(j, ph, dx);
        for i in 0..pw {
            let g = weight(kx[i].hypot(ky));
            buf[j * pw + i] = buf[j * pw + i] * g;
        }
    }
    fft2(&mut buf, pw, ph, true);
    let norm = T::one() / T::of_usize(pw * ph);
    let mut out = Image::zeros(f.grid);
    for j in 0..h {
        for i in 0..w {
            out.set(i, j, buf[j * pw + i].re * norm);
        }
    }
    Ok(out)
}

fn check_nyquist<T: Real>(f: &Image<T>, band: &BandSpec<T>) -> Result<()> {
    band.validate()?;
    let nyquist = T::PI() / f.grid.dx;
    if band.kappa_max > nyquist {
        return Err(Error::AboveNyquist {
            kappa: band.kappa_max.f64(),
            nyquist: nyquist.f64(),
        });
    }
    Ok(())
}

/// Linear convolution `dx² Σ_y K(|x − y|) f(y)` with a radial kernel
/// sampled on the grid, evaluated by FFT on a buffer large enough that no
/// wrap-around reaches the output window.
pub fn convolve_radial_kernel<T: Real>(f: &Image<T>, kernel: impl Fn(T) -> T) -> Result<Image<T>> {
    f.grid.validate()?;
    let (w, h) = (f.width(), f.height());
    let (pw, ph) = (fast_len(2 * w - 1), fast_len(2 * h - 1));
    let dx = f.grid.dx;
    let zero = Complex::new(T::zero(), T::zero());
    let mut kbuf = vec![zero; pw * ph];
    let lag = |k: usize, n: usize| if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    for j in 0..ph {
        let dy = lag(j, ph);
        if dy.abs() >= h as f64 {
            continue;
        }
        for i in 0..pw {
            let ddx = lag(i, pw);
            if ddx.abs() >= w as f64 {
                continue;
            }
            let r = dx * T::of(ddx.hypot(dy));
            kbuf[j * pw + i].re = kernel(r) * dx * dx;
        }
    }
    let mut buf = vec![zero; pw * ph];
    for j in 0..h {
        for i in 0..w {
            buf[j * pw + i].re = f.get(i, j);
        }
    }
    fft2(&mut kbuf, pw, ph, false);
    fft2(&mut buf, pw, ph, false);
    for (b, k) in buf.iter_mut().zip(&kbuf) {
        *b = *b * *k;
    }
    fft2(&mut buf, pw, ph, true);
    let norm = T::one() / T::of_usize(pw * ph);
    let mut out = Image::zeros(f.grid);
    for j in 0..h {
        for i in 0..w {
            out.set(i, j, buf[j * pw + i].re * norm);
        }
    }
    Ok(out)
}

/// `Ψ ∗ f` for the band's PSF.
///
/// With the band below the grid Nyquist frequency, the sampled PSF has the
/// annulus indicator as its discrete-time Fourier transform, so this is the
/// exact discrete counterpart of the continuous convolution (no periodic
/// wrap of the slowly decaying kernel tails).
pub fn convolve_psf<T: Real>(f: &Image<T>, band: &BandSpec<T>) -> Result<Image<T>> {
    check_nyquist(f, band)?;
    convolve_radial_kernel(f, |r| psf(r, band))
}

/// `Ψ ∗ f` for an image that is one period of a periodic function: the
/// annulus indicator applied directly to its DFT.
pub fn convolve_psf_periodic<T: Real>(f: &Image<T>, band: &BandSpec<T>) -> Result<Image<T>> {
    check_nyquist(f, band)?;
    convolve_radial_mask(f, Boundary::Periodic, |k| {
        if band.contains(k) {
            T::one()
        } else {
            T::zero()
        }
    })
}
