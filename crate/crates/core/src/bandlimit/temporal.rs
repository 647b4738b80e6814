//! Spectral operations on sensor traces.
//!
//! Causal (or otherwise windowed) traces are embedded in a zero-padded
//! circular buffer whose index 0 is `t = 0`; the result is returned as one
//! period of that buffer with `t = 0` in the middle. Traces already flagged
//! periodic are transformed as they are.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::band::BandSpec;
use crate::error::{invalid, Error, Result};
use crate::fft::{bin_frequency, fast_even_len, fast_len};
use crate::sensor::SensorData;
use crate::Real;

/// A convolution kernel sampled on `dt` and centered on its middle sample.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeKernel<T = f64> {
    pub dt: T,
    /// Odd number of samples; `values[len/2]` sits at `t = 0`.
    pub values: Vec<T>,
}

impl<T: Real> TimeKernel<T> {
    /// Discrete delta `1/dt` delayed by `shift` samples.
    pub fn delta(dt: T, shift: isize) -> Self {
        let half = shift.unsigned_abs();
        let mut values = vec![T::zero(); 2 * half + 1];
        values[(half as isize + shift) as usize] = T::one() / dt;
        Self { dt, values }
    }

    #[inline]
    pub fn center(&self) -> usize {
        self.values.len() / 2
    }
}

/// Length of the circular buffer used for a non-periodic window of
/// `num_steps` samples with `t = 0` at `time_origin`.
pub fn spectral_length(num_steps: usize, time_origin: usize) -> usize {
    let reach = time_origin.max(num_steps.saturating_sub(1 + time_origin));
    fast_even_len(2 * (2 * reach + 1))
}

/// Circular layout `(len, output time origin)` used for `m`, and whether
/// its `t = 0` sample enters with half weight.
fn layout<T: Real>(m: &SensorData<T>) -> (usize, usize, bool) {
    if m.periodic {
        (m.num_steps, m.time_origin, false)
    } else {
        let len = spectral_length(m.num_steps, m.time_origin);
        (len, len / 2, m.time_origin == 0)
    }
}

/// Per-sensor transform → `op(spectrum)` → inverse, in the circular layout.
fn spectral_map<T: Real>(
    m: &SensorData<T>,
    op: impl Fn(&mut [Complex<T>]) + Sync,
) -> Result<SensorData<T>> {
    m.validate()?;
    let (len, out_origin, half_first) = layout(m);
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let t0 = m.time_origin;
    let norm = T::one() / T::of_usize(len);
    let mut traces = vec![T::zero(); m.num_sensors() * len];
    traces
        .par_chunks_mut(len)
        .enumerate()
        .for_each(|(j, out)| {
            let src = m.trace(j);
            let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
            for (k, v) in src.iter().enumerate() {
                let idx = (k + len - t0 % len) % len;
                buf[idx].re = *v;
            }
            if half_first {
                buf[0].re = buf[0].re * T::of(0.5);
            }
            fwd.process(&mut buf);
            op(&mut buf);
            inv.process(&mut buf);
            for (k, o) in out.iter_mut().enumerate() {
                *o = buf[(k + len - out_origin) % len].re * norm;
            }
        });
    Ok(SensorData {
        geometry: m.geometry,
        dt: m.dt,
        num_steps: len,
        time_origin: out_origin,
        periodic: true,
        traces,
    })
}

/// Multiplies each trace's spectrum by `weight(κ)` (angular frequency).
pub fn apply_spectral_mask<T: Real>(
    m: &SensorData<T>,
    weight: impl Fn(T) -> T + Sync,
) -> Result<SensorData<T>> {
    let len = layout(m).0;
    let dt = m.dt;
    let w: Vec<T> = (0..len).map(|k| weight(bin_frequency(k, len, dt))).collect();
    spectral_map(m, |buf| {
        for (b, wk) in buf.iter_mut().zip(&w) {
            *b = *b * *wk;
        }
    })
}

/// Hard band-pass: keeps the bins with `|κ|` inside the band (edges inclusive).
pub fn apply_bandpass<T: Real>(m: &SensorData<T>, band: &BandSpec<T>) -> Result<SensorData<T>> {
    band.validate()?;
    let nyquist = T::PI() / m.dt;
    if band.kappa_max > nyquist {
        return Err(Error::AboveNyquist {
            kappa: band.kappa_max.f64(),
            nyquist: nyquist.f64(),
        });
    }
    apply_spectral_mask(m, |k| if band.contains(k) { T::one() } else { T::zero() })
}

/// Even extension in time through the spectral identity `2·Re(m̂)`.
///
/// For raw causal traces this is the mirror `m_even[n] = m[|n|]`; periodic
/// traces are symmetrized about their own time origin.
pub fn make_even<T: Real>(m: &SensorData<T>) -> Result<SensorData<T>> {
    if !(m.is_causal() || m.periodic) {
        return invalid("make_even needs causal traces (time origin 0)");
    }
    let two = T::of(2.0);
    spectral_map(m, |buf| {
        for b in buf.iter_mut() {
            *b = Complex::new(two * b.re, T::zero());
        }
    })
}

/// Linear convolution of every trace with `kernel`, scaled by `dt`.
/// The output keeps the input's time window; samples beyond it are treated
/// as zero.
pub fn convolve_time<T: Real>(kernel: &TimeKernel<T>, m: &SensorData<T>) -> Result<SensorData<T>> {
    m.validate()?;
    if kernel.values.len() % 2 == 0 {
        return invalid("time kernel needs an odd number of samples");
    }
    let rel = ((kernel.dt - m.dt) / m.dt).abs();
    if rel > T::of(1e-9) {
        return Err(Error::GridMismatch(format!(
            "kernel dt {} differs from data dt {}",
            kernel.dt, m.dt
        )));
    }
    let n = m.num_steps;
    let kl = kernel.values.len();
    let c = kernel.center();
    let len = fast_len(n + kl - 1);
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let zero = Complex::new(T::zero(), T::zero());
    let mut kspec = vec![zero; len];
    for (k, v) in kernel.values.iter().enumerate() {
        kspec[k].re = *v;
    }
    fwd.process(&mut kspec);
    let scale = m.dt / T::of_usize(len);
    let mut traces = vec![T::zero(); m.num_sensors() * n];
    traces.par_chunks_mut(n).enumerate().for_each(|(j, out)| {
        let mut buf = vec![zero; len];
        for (b, v) in buf.iter_mut().zip(m.trace(j)) {
            b.re = *v;
        }
        fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&kspec) {
            *b = *b * *k;
        }
        inv.process(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf[c..c + n]) {
            *o = b.re * scale;
        }
    });
    Ok(SensorData {
        geometry: m.geometry,
        dt: m.dt,
        num_steps: n,
        time_origin: m.time_origin,
        periodic: false,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::SensorGeometry;
    use std::f64::consts::PI;

    fn geom(n: usize) -> SensorGeometry {
        SensorGeometry::new([0.0, 0.0], 1.0, n).unwrap()
    }

    fn causal(values: Vec<f64>, dt: f64) -> SensorData {
        let n = values.len();
        SensorData::new(geom(3), dt, n / 3, 0, values).unwrap()
    }

    fn lcg(seed: u64, n: usize) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn mirror_extension_of_causal_trace() {
        let m = causal(lcg(1, 3 * 17), 0.1);
        let e = make_even(&m).unwrap();
        let o = e.time_origin as isize;
        for j in 0..3 {
            for k in 0..e.num_steps {
                let n = (k as isize - o).unsigned_abs();
                let want = if n < 17 { m.trace(j)[n] } else { 0.0 };
                assert!((e.trace(j)[k] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn even_exponential() {
        let dt = 1e-3;
        let n = 20_000;
        let vals: Vec<f64> = (0..3 * n).map(|k| (-((k % n) as f64) * dt).exp()).collect();
        let e = make_even(&causal(vals, dt)).unwrap();
        for k in (0..e.num_steps).step_by(97) {
            let t = e.time(k).abs();
            let want = if t < n as f64 * dt { (-t).exp() } else { 0.0 };
            assert!((e.trace(0)[k] - want).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_windowed_non_causal_input() {
        let m = SensorData::new(geom(3), 0.1, 4, 1, vec![0.0; 12]).unwrap();
        assert!(make_even(&m).is_err());
    }

    #[test]
    fn bandpass_matches_direct_dft() {
        let m = causal(lcg(9, 3 * 25), 0.2);
        let band = BandSpec::new(1.0, 9.0).unwrap();
        let out = apply_bandpass(&m, &band).unwrap();
        let len = out.num_steps;
        for j in 0..3 {
            let mut x = vec![0.0; len];
            for (k, v) in m.trace(j).iter().enumerate() {
                x[k] = *v;
            }
            x[0] *= 0.5;
            for (k, o) in out.trace(j).iter().enumerate() {
                let n = (k + len - out.time_origin) % len;
                let mut acc = 0.0;
                for b in 0..len {
                    let kappa = bin_frequency(b, len, 0.2f64);
                    if !band.contains(kappa) {
                        continue;
                    }
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for (q, xq) in x.iter().enumerate() {
                        let a = -2.0 * PI * (b * q) as f64 / len as f64;
                        re += xq * a.cos();
                        im += xq * a.sin();
                    }
                    let a = 2.0 * PI * (b * n) as f64 / len as f64;
                    acc += re * a.cos() - im * a.sin();
                }
                assert!((o - acc / len as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn above_nyquist_is_rejected() {
        let m = causal(vec![0.0; 12], 0.5);
        let band = BandSpec::new(1.0, 7.0).unwrap();
        assert!(matches!(apply_bandpass(&m, &band), Err(Error::AboveNyquist { .. })));
    }

    #[test]
    fn delta_kernels() {
        let m = causal(lcg(3, 3 * 40), 0.05);
        let id = convolve_time(&TimeKernel::delta(0.05, 0), &m).unwrap();
        for (a, b) in id.traces.iter().zip(&m.traces) {
            assert!((a - b).abs() < 1e-12);
        }
        let sh = convolve_time(&TimeKernel::delta(0.05, 3), &m).unwrap();
        for j in 0..3 {
            assert!(sh.trace(j)[..3].iter().all(|v| v.abs() < 1e-12));
            for k in 3..40 {
                assert!((sh.trace(j)[k] - m.trace(j)[k - 3]).abs() < 1e-12);
            }
        }
        assert!(convolve_time(&TimeKernel::delta(0.1, 0), &m).is_err());
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let dt = 0.3;
        let m = causal(lcg(4, 3 * 31), dt);
        let kernel = TimeKernel {
            dt,
            values: lcg(5, 11),
        };
        let out = convolve_time(&kernel, &m).unwrap();
        for j in 0..3 {
            for n in 0..31isize {
                let mut acc = 0.0;
                for (k, v) in kernel.values.iter().enumerate() {
                    let q = n - (k as isize - 5);
                    if (0..31).contains(&q) {
                        acc += v * m.trace(j)[q as usize];
                    }
                }
                assert!((out.trace(j)[n as usize] - acc * dt).abs() < 1e-10);
            }
        }
    }
}
