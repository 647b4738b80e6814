//! Thin helpers over `rustfft` for 1D batches and 2D transforms.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::Real;

/// Smallest `n' ≥ n` whose only prime factors are 2, 3 and 5.
pub fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Smallest even 5-smooth length `≥ n`.
pub fn fast_even_len(n: usize) -> usize {
    let mut m = fast_len(n);
    while m % 2 == 1 {
        m = fast_len(m + 1);
    }
    m
}

/// Unnormalized in-place transforms of consecutive rows of length `len`.
pub fn fft_rows<T: Real>(data: &mut [Complex<T>], len: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    };
    plan.process(data);
}

/// Unnormalized in-place 2D transform of a row-major `width × height` array.
pub fn fft2<T: Real>(data: &mut [Complex<T>], width: usize, height: usize, inverse: bool) {
    fft_rows(data, width, inverse);
    let mut col = vec![Complex::new(T::zero(), T::zero()); width * height];
    for j in 0..height {
        for i in 0..width {
            col[i * height + j] = data[j * width + i];
        }
    }
    fft_rows(&mut col, height, inverse);
    for j in 0..height {
        for i in 0..width {
            data[j * width + i] = col[i * height + j];
        }
    }
}

/// Angular frequency of DFT bin `k` for `n` samples spaced by `h`.
#[inline]
pub fn bin_frequency<T: Real>(k: usize, n: usize, h: T) -> T {
    let signed = if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    };
    T::of(2.0 * std::f64::consts::PI * signed) / (T::of_usize(n) * h)
}
