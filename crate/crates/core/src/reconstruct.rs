//! Inverse problem by time reversal: the recorded traces are imposed as
//! boundary values on the discretized detector circle while the wave
//! equation runs backward from `T` to `0`.

use crate::band::BandSpec;
use crate::bandlimit::{apply_bandpass, make_even};
use crate::error::{invalid, Result};
use crate::image::{Grid, Image};
use crate::sensor::SensorData;
use crate::wave::{leapfrog_step, SolverConfig};
use crate::Real;

/// Interior state assumed at the start time `T` of the backward run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FinalState {
    /// Zero pressure and velocity inside the circle.
    Zero,
    /// Harmonic extension of the boundary values at `T` and `T − dt`.
    #[default]
    Harmonic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeReversalOptions {
    pub final_state: FinalState,
    /// Treat the traces as the `t ≥ 0` half of even data, so that lookups
    /// at negative times mirror instead of returning zero.
    pub even_data: bool,
    /// Largest admissible arc length between neighbouring sensors, in cells.
    pub max_sensor_spacing: f64,
    /// Relative threshold used by [`reconstruct_textured`] to cut the
    /// filtered traces once they have decayed.
    pub tail_threshold: f64,
}

impl Default for TimeReversalOptions {
    fn default() -> Self {
        Self {
            final_state: FinalState::Harmonic,
            even_data: false,
            max_sensor_spacing: 4.0,
            tail_threshold: 1e-3,
        }
    }
}

/// A boundary cell and where its values come from.
struct RingCell<T> {
    index: usize,
    sensors: [usize; 2],
    weight: T,
    /// Travel-time offset `r − R` of the cell beyond the circle.
    delay: T,
    /// Cylindrical spreading `√(R/r)`.
    spread: T,
}

struct Layout<T> {
    interior: Vec<bool>,
    ring: Vec<RingCell<T>>,
}

fn layout<T: Real>(m: &SensorData<T>, grid: &Grid<T>) -> Result<Layout<T>> {
    let geom = &m.geometry;
    let (w, h) = (grid.width, grid.height);
    let interior: Vec<bool> = (0..grid.len())
        .map(|k| geom.distance_from_center(grid.position(k % w, k / w)) < geom.radius)
        .collect();
    let n = geom.num_sensors;
    let two_pi = T::of(std::f64::consts::TAU);
    let mut ring = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            if interior[k] {
                if i == 0 || j == 0 || i + 1 == w || j + 1 == h {
                    return invalid("the detector circle plus one boundary cell must fit inside the grid");
                }
                continue;
            }
            let touches = (i > 0 && interior[k - 1])
                || (i + 1 < w && interior[k + 1])
                || (j > 0 && interior[k - w])
                || (j + 1 < h && interior[k + w]);
            if !touches {
                continue;
            }
            let x = grid.position(i, j);
            let r = geom.distance_from_center(x);
            let mut theta = (x[1] - geom.center[1]).atan2(x[0] - geom.center[0]);
            if theta < T::zero() {
                theta = theta + two_pi;
            }
            let u = theta / two_pi * T::of_usize(n);
            let j0 = u.floor().to_usize().unwrap_or(0).min(n - 1);
            ring.push(RingCell {
                index: k,
                sensors: [j0, (j0 + 1) % n],
                weight: u - T::of_usize(j0),
                delay: r - geom.radius,
                spread: (geom.radius / r).sqrt(),
            });
        }
    }
    Ok(Layout { interior, ring })
}

/// Linear interpolation of a causal trace at time `t` (zero beyond its ends,
/// mirrored at negative times for even data).
#[inline]
fn sample<T: Real>(trace: &[T], dt: T, t: T, even: bool) -> T {
    let t = if t < T::zero() {
        if even {
            -t
        } else {
            return T::zero();
        }
    } else {
        t
    };
    let s = t / dt;
    let k = s.floor().to_usize().unwrap_or(usize::MAX);
    if k + 1 >= trace.len() {
        return if k + 1 == trace.len() && s == T::of_usize(k) {
            trace[k]
        } else {
            T::zero()
        };
    }
    let f = s - T::of_usize(k);
    trace[k] * (T::one() - f) + trace[k + 1] * f
}

fn fill_ring<T: Real>(field: &mut [T], ring: &[RingCell<T>], m: &SensorData<T>, t: T, even: bool) {
    for c in ring {
        let tt = t - c.delay;
        let a = sample(m.trace(c.sensors[0]), m.dt, tt, even);
        let b = sample(m.trace(c.sensors[1]), m.dt, tt, even);
        field[c.index] = c.spread * (a * (T::one() - c.weight) + b * c.weight);
    }
}

/// Solves the discrete Laplace equation on the interior with the current
/// ring values as Dirichlet data (conjugate gradients, in place).
fn harmonic_extension<T: Real>(field: &mut [T], interior: &[bool], w: usize, h: usize) {
    let idx: Vec<usize> = (0..field.len()).filter(|k| interior[*k]).collect();
    let four = T::of(4.0);
    // A·u for u supported on the interior, zero elsewhere
    let apply = |u: &[T], out: &mut [T]| {
        for &k in &idx {
            let (i, j) = (k % w, k / w);
            let mut s = four * u[k];
            if i > 0 {
                s = s - u[k - 1];
            }
            if i + 1 < w {
                s = s - u[k + 1];
            }
            if j > 0 {
                s = s - u[k - w];
            }
            if j + 1 < h {
                s = s - u[k + w];
            }
            out[k] = s;
        }
    };
    let n = field.len();
    // right-hand side: boundary contributions
    let mut bnd = field.to_vec();
    for &k in &idx {
        bnd[k] = T::zero();
    }
    let mut rhs = vec![T::zero(); n];
    apply(&bnd, &mut rhs);
    let mut x = vec![T::zero(); n];
    for &k in &idx {
        x[k] = field[k];
    }
    let mut ax = vec![T::zero(); n];
    apply(&x, &mut ax);
    let mut r = vec![T::zero(); n];
    for &k in &idx {
        r[k] = -rhs[k] - ax[k];
    }
    let dot = |a: &[T], b: &[T]| idx.iter().fold(T::zero(), |s, &k| s + a[k] * b[k]);
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = T::of(1e-24) * dot(&rhs, &rhs).max(T::min_positive_value());
    let mut ap = vec![T::zero(); n];
    for _ in 0..10 * (w + h) {
        if rr <= stop {
            break;
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for &k in &idx {
            x[k] = x[k] + alpha * p[k];
            r[k] = r[k] - alpha * ap[k];
        }
        let next = dot(&r, &r);
        let beta = next / rr;
        rr = next;
        for &k in &idx {
            p[k] = r[k] + beta * p[k];
        }
    }
    for &k in &idx {
        field[k] = x[k];
    }
}

/// Time reversal with default options.
pub fn reconstruct_time_reversal<T: Real>(
    m: &SensorData<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig,
) -> Result<Image<T>> {
    reconstruct_time_reversal_with(m, grid, cfg, &TimeReversalOptions::default())
}

pub fn reconstruct_time_reversal_with<T: Real>(
    m: &SensorData<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig,
    opts: &TimeReversalOptions,
) -> Result<Image<T>> {
    m.validate()?;
    grid.validate()?;
    cfg.validate()?;
    if !m.is_causal() {
        return invalid("time reversal needs traces starting at t = 0");
    }
    let geom = &m.geometry;
    let spacing = geom.spacing() / grid.dx;
    if spacing > T::of(opts.max_sensor_spacing) {
        return invalid(format!(
            "{} sensors are too sparse: arc spacing {spacing} cells exceeds {}",
            geom.num_sensors, opts.max_sensor_spacing
        ));
    }
    let t_end = m.end_time();
    let diameter = T::of(2.0) * geom.radius;
    if t_end < diameter * T::of(1.0 - 1e-9) {
        return invalid(format!(
            "recording time {t_end} is shorter than the circle diameter {diameter}"
        ));
    }
    let lay = layout(m, grid)?;
    let (w, h) = (grid.width, grid.height);
    let steps = (t_end.f64() / (cfg.cfl * grid.dx.f64())).ceil() as usize;
    if steps < 2 {
        return invalid("recording too short for a backward run");
    }
    let dt = t_end / T::of_usize(steps);
    let c2 = (dt / grid.dx) * (dt / grid.dx);
    let even = opts.even_data;

    let time = |k: usize| t_end - T::of_usize(k) * dt;
    let mut cur = vec![T::zero(); grid.len()];
    let mut prev = vec![T::zero(); grid.len()];
    fill_ring(&mut prev, &lay.ring, m, time(0), even);
    fill_ring(&mut cur, &lay.ring, m, time(1), even);
    if opts.final_state == FinalState::Harmonic {
        harmonic_extension(&mut prev, &lay.interior, w, h);
        harmonic_extension(&mut cur, &lay.interior, w, h);
    }
    for k in 2..=steps {
        leapfrog_step(&mut prev, &cur, w, h, c2);
        for (v, inside) in prev.iter_mut().zip(&lay.interior) {
            if !inside {
                *v = T::zero();
            }
        }
        fill_ring(&mut prev, &lay.ring, m, time(k), even);
        std::mem::swap(&mut prev, &mut cur);
    }
    let values = cur
        .iter()
        .zip(&lay.interior)
        .map(|(v, inside)| if *inside { *v } else { T::zero() })
        .collect();
    Image::new(*grid, values)
}

/// Last time at which any trace exceeds `rel · max|m|`.
pub fn decay_time<T: Real>(m: &SensorData<T>, rel: f64) -> T {
    let thresh = m.max_abs() * T::of(rel);
    let mut last = 0;
    for j in 0..m.num_sensors() {
        if let Some(n) = m.trace(j).iter().rposition(|v| v.abs() > thresh) {
            last = last.max(n);
        }
    }
    m.time(last)
}

/// Textured image `≈ Ψ ∗ f` from causal data: band-pass, even extension,
/// restriction to `t ∈ [0, T]` and time reversal with mirrored lookups.
/// `T` is where the filtered traces have decayed below the tail threshold,
/// but never shorter than the solver's recording time.
pub fn reconstruct_textured<T: Real>(
    m: &SensorData<T>,
    band: &BandSpec<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig,
) -> Result<Image<T>> {
    reconstruct_textured_with(m, band, grid, cfg, &TimeReversalOptions::default())
}

pub fn reconstruct_textured_with<T: Real>(
    m: &SensorData<T>,
    band: &BandSpec<T>,
    grid: &Grid<T>,
    cfg: &SolverConfig,
    opts: &TimeReversalOptions,
) -> Result<Image<T>> {
    if !m.is_causal() {
        return invalid("textured reconstruction needs causal traces");
    }
    let even = make_even(&apply_bandpass(m, band)?)?;
    let floor = T::of(cfg.recording_time(m.geometry.radius.f64()));
    let t_cut = decay_time(&even, opts.tail_threshold).max(floor);
    let causal = even.causal_part(t_cut);
    let opts = TimeReversalOptions {
        even_data: true,
        ..*opts
    };
    reconstruct_time_reversal_with(&causal, grid, cfg, &opts)
}
