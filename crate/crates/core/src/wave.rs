//! Forward problem: the 2D wave equation with initial pressure `f`, zero
//! initial velocity and unit sound speed, observed on a detector circle.
//!
//! The solver is the standard leapfrog scheme with the five-point Laplacian
//! on a lattice aligned with the source image, enlarged around the detector
//! circle and terminated by a multiplicative sponge layer.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::image::{Grid, Image};
use crate::sensor::{SensorData, SensorGeometry};
use crate::Real;

/// Outer boundary treatment of the computational domain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTreatment {
    #[default]
    AbsorbingSponge,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Free space kept around the detector circle on each side, as a
    /// fraction of its radius. `None` picks `max(0.5, T / 2R)`, which keeps
    /// echoes from the sponge out of the recording window.
    pub padding: Option<f64>,
    /// `dt = cfl · dx`.
    pub cfl: f64,
    /// Recording time `T`; `None` means `2R + tail_margin · R`.
    pub total_time: Option<f64>,
    /// Extra recording time beyond `2R`, as a fraction of `R`.
    pub tail_margin: f64,
    /// Width of the damping layer in cells.
    pub sponge_cells: usize,
    /// Damping exponent per time step at the outer edge of the sponge; the
    /// exponent grows quadratically with depth.
    pub sponge_strength: f64,
    pub boundary: BoundaryTreatment,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            padding: None,
            cfl: 0.7,
            total_time: None,
            tail_margin: 0.5,
            sponge_cells: 32,
            sponge_strength: 0.3,
            boundary: BoundaryTreatment::AbsorbingSponge,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= FRAC_1_SQRT_2 + 1e-12) {
            return Err(Error::Stability(format!(
                "CFL number {} outside (0, 1/sqrt(2)]",
                self.cfl
            )));
        }
        if let Some(p) = self.padding {
            if !(p >= 0.5 && p.is_finite()) {
                return invalid(format!("padding must be at least 0.5 R, got {p}"));
            }
        }
        if self.sponge_cells < 20 {
            return invalid(format!(
                "sponge needs at least 20 cells, got {}",
                self.sponge_cells
            ));
        }
        if !(self.sponge_strength > 0.0 && self.sponge_strength.is_finite()) {
            return invalid("sponge strength must be positive");
        }
        if !(self.tail_margin >= 0.0) {
            return invalid("tail margin must be nonnegative");
        }
        if let Some(t) = self.total_time {
            if !(t > 0.0 && t.is_finite()) {
                return invalid(format!("total time must be positive, got {t}"));
            }
        }
        Ok(())
    }

    /// Recording time for a circle of radius `radius`.
    pub fn recording_time(&self, radius: f64) -> f64 {
        self.total_time
            .unwrap_or(2.0 * radius + self.tail_margin * radius)
    }

    /// Padding fraction actually used for a circle of radius `radius`.
    pub fn padding_for(&self, radius: f64) -> f64 {
        self.padding
            .unwrap_or_else(|| (self.recording_time(radius) / (2.0 * radius)).max(0.5))
    }

    pub fn dt(&self, dx: f64) -> f64 {
        self.cfl * dx
    }

    /// Number of recorded samples `0, dt, …` up to `T`.
    pub fn num_steps(&self, radius: f64, dx: f64) -> usize {
        (self.recording_time(radius) / self.dt(dx) + 1e-9).floor() as usize + 1
    }
}

/// Applies `next = 2·cur − prev + c2·Δ_h cur` on a `w × h` lattice with zero
/// values outside it. `prev` is overwritten with `next`.
pub(crate) fn leapfrog_step<T: Real>(prev: &mut [T], cur: &[T], w: usize, h: usize, c2: T) {
    let two = T::of(2.0);
    let four = T::of(4.0);
    prev.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        let base = j * w;
        for i in 0..w {
            let k = base + i;
            let c = cur[k];
            let l = if i > 0 { cur[k - 1] } else { T::zero() };
            let r = if i + 1 < w { cur[k + 1] } else { T::zero() };
            let d = if j > 0 { cur[k - w] } else { T::zero() };
            let u = if j + 1 < h { cur[k + w] } else { T::zero() };
            row[i] = two * c - row[i] + c2 * (l + r + d + u - four * c);
        }
    });
}

/// Four lattice indices and bilinear weights for a point, clamped inside.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil<T> {
    pub idx: [usize; 4],
    pub wts: [T; 4],
}

impl<T: Real> Stencil<T> {
    pub fn new(grid: &Grid<T>, x: [T; 2]) -> Self {
        let p = grid.to_index_coords(x);
        let px = p[0].max(T::zero()).min(T::of_usize(grid.width - 1));
        let py = p[1].max(T::zero()).min(T::of_usize(grid.height - 1));
        let i0 = px.floor().to_usize().unwrap_or(0).min(grid.width.saturating_sub(2));
        let j0 = py.floor().to_usize().unwrap_or(0).min(grid.height.saturating_sub(2));
        let fx = px - T::of_usize(i0);
        let fy = py - T::of_usize(j0);
        let one = T::one();
        let w = grid.width;
        Self {
            idx: [j0 * w + i0, j0 * w + i0 + 1, (j0 + 1) * w + i0, (j0 + 1) * w + i0 + 1],
            wts: [
                (one - fx) * (one - fy),
                fx * (one - fy),
                (one - fx) * fy,
                fx * fy,
            ],
        }
    }

    #[inline]
    pub fn apply(&self, field: &[T]) -> T {
        self.wts[0] * field[self.idx[0]]
            + self.wts[1] * field[self.idx[1]]
            + self.wts[2] * field[self.idx[2]]
            + self.wts[3] * field[self.idx[3]]
    }
}

/// Computational lattice: the source grid extended to hold the padded
/// detector circle and the sponge.
struct Domain<T> {
    grid: Grid<T>,
    /// Lattice position of source pixel (0, 0).
    offset: [usize; 2],
    damping: Vec<T>,
}

impl<T: Real> Domain<T> {
    fn new(src: &Grid<T>, geom: &SensorGeometry<T>, cfg: &SolverConfig) -> Self {
        let dx = src.dx.f64();
        let r = geom.radius.f64();
        let reach = r * (1.0 + cfg.padding_for(r));
        let c = [geom.center[0].f64(), geom.center[1].f64()];
        let o = [src.origin[0].f64(), src.origin[1].f64()];
        let extent = [src.width, src.height];
        let s = cfg.sponge_cells as isize;
        let mut lo = [0isize; 2];
        let mut hi = [0isize; 2];
        for a in 0..2 {
            let lo_circle = ((c[a] - reach - o[a]) / dx).floor() as isize;
            let hi_circle = ((c[a] + reach - o[a]) / dx).ceil() as isize;
            lo[a] = lo_circle.min(0) - s;
            hi[a] = hi_circle.max(extent[a] as isize - 1) + s;
        }
        let width = (hi[0] - lo[0] + 1) as usize;
        let height = (hi[1] - lo[1] + 1) as usize;
        let grid = Grid {
            width,
            height,
            dx: src.dx,
            origin: [
                src.origin[0] + T::of(lo[0] as f64) * src.dx,
                src.origin[1] + T::of(lo[1] as f64) * src.dx,
            ],
        };
        let n = cfg.sponge_cells;
        let mut damping = vec![T::one(); width * height];
        for j in 0..height {
            for i in 0..width {
                let edge = i.min(j).min(width - 1 - i).min(height - 1 - j);
                if edge < n {
                    let depth = (n - edge) as f64;
                    damping[j * width + i] = T::of((-cfg.sponge_strength * (depth / n as f64).powi(2)).exp());
                }
            }
        }
        Self {
            grid,
            offset: [(-lo[0]) as usize, (-lo[1]) as usize],
            damping,
        }
    }

    fn embed(&self, f: &Image<T>) -> Vec<T> {
        let mut out = vec![T::zero(); self.grid.len()];
        for j in 0..f.height() {
            let dst = (j + self.offset[1]) * self.grid.width + self.offset[0];
            out[dst..dst + f.width()].copy_from_slice(&f.values[j * f.width()..(j + 1) * f.width()]);
        }
        out
    }
}

/// Checks that `f` vanishes (relative to its peak) outside the open disc.
pub fn check_support<T: Real>(f: &Image<T>, geom: &SensorGeometry<T>) -> Result<()> {
    let peak = f.max_abs();
    if peak == T::zero() {
        return Ok(());
    }
    let thresh = peak * T::of(1e-6);
    let r = geom.radius;
    for j in 0..f.height() {
        for i in 0..f.width() {
            if f.get(i, j).abs() > thresh && geom.distance_from_center(f.grid.position(i, j)) >= r {
                return Err(Error::SupportViolation(format!(
                    "pixel ({i}, {j}) with value {} lies outside the sensor circle of radius {r}",
                    f.get(i, j)
                )));
            }
        }
    }
    Ok(())
}

/// Forward problem for a source strictly inside the detector circle.
pub fn simulate<T: Real>(
    f: &Image<T>,
    geom: &SensorGeometry<T>,
    cfg: &SolverConfig,
) -> Result<SensorData<T>> {
    check_support(f, geom)?;
    propagate(f, geom, cfg)
}

/// Same as [`simulate`] without the support requirement, for sources such
/// as filtered images whose tails extend past the circle.
pub fn propagate<T: Real>(
    f: &Image<T>,
    geom: &SensorGeometry<T>,
    cfg: &SolverConfig,
) -> Result<SensorData<T>> {
    cfg.validate()?;
    geom.validate()?;
    f.grid.validate()?;
    let dx = f.grid.dx.f64();
    let radius = geom.radius.f64();
    let dt = cfg.dt(dx);
    let steps = cfg.num_steps(radius, dx);
    let dom = Domain::new(&f.grid, geom, cfg);
    let (w, h) = (dom.grid.width, dom.grid.height);
    let stencils: Vec<Stencil<T>> = geom
        .positions()
        .into_iter()
        .map(|x| Stencil::new(&dom.grid, x))
        .collect();
    let c2 = T::of(cfg.cfl * cfg.cfl);

    let mut data = SensorData::zeros(*geom, T::of(dt), steps);
    let record = |data: &mut SensorData<T>, field: &[T], n: usize| {
        for (s, st) in stencils.iter().enumerate() {
            data.traces[s * steps + n] = st.apply(field);
        }
    };

    let mut prev = dom.embed(f);
    record(&mut data, &prev, 0);
    if steps == 1 {
        return Ok(data);
    }
    // p¹ = p⁰ + ½ c2 Δ_h p⁰ (zero initial velocity)
    let mut cur = prev.clone();
    {
        let mut tmp = prev.clone();
        leapfrog_step(&mut tmp, &prev, w, h, c2);
        let half = T::of(0.5);
        for k in 0..cur.len() {
            cur[k] = (half * (tmp[k] + prev[k])) * dom.damping[k];
        }
    }
    record(&mut data, &cur, 1);
    for n in 2..steps {
        leapfrog_step(&mut prev, &cur, w, h, c2);
        for k in 0..cur.len() {
            let d = dom.damping[k];
            if d != T::one() {
                prev[k] = prev[k] * d;
                cur[k] = cur[k] * d;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        record(&mut data, &cur, n);
    }
    Ok(data)
}

/// Accuracy controls of [`wave_trace_oracle`].
#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Relative tolerance of the adaptive radial quadrature.
    pub rel_tol: f64,
    /// Step of the fourth-order central difference in time.
    pub h: f64,
    /// Starting number of angular nodes (periodic trapezoid, doubled until
    /// converged).
    pub min_angles: usize,
    pub max_angles: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            h: 1e-2,
            min_angles: 128,
            max_angles: 1 << 14,
        }
    }
}

impl OracleOptions {
    /// Twice as strict on every accuracy knob.
    pub fn refined(&self) -> Self {
        Self {
            rel_tol: self.rel_tol / 2.0,
            h: self.h / 2.0,
            min_angles: self.min_angles * 2,
            max_angles: self.max_angles * 2,
        }
    }
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss–Kronrod 15-point rule on `[a, b]`: (Kronrod value, error estimate).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(m);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let y = f(m + r * GK_X[i]) + f(m - r * GK_X[i]);
        k += GK_WK[i] * y;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * y;
        }
    }
    (k * r, ((k - g) * r).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, depth: u32) -> Result<f64> {
    let (v, e) = gk15(f, a, b);
    if e <= abs_tol || (b - a).abs() < 1e-12 {
        return Ok(v);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "radial integral on [{a}, {b}] stuck at error {e:.3e}"
        )));
    }
    let m = 0.5 * (a + b);
    Ok(adaptive(f, a, m, 0.5 * abs_tol, depth - 1)? + adaptive(f, m, b, 0.5 * abs_tol, depth - 1)?)
}

/// Spherical-mean potential `W(t) = (t/2π) ∫₀^{2π} ∫₀^{π/2} f(x + t sinφ θ) sinφ dφ dθ`,
/// so that `p(x, t) = W'(t)`; extended oddly to `t < 0`.
fn potential(f: &dyn Fn([f64; 2]) -> f64, x: [f64; 2], t: f64, scale: f64, opts: &OracleOptions) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let sign = t.signum();
    let t = t.abs();
    let ring = |theta: f64| -> Result<f64> {
        let (s, c) = theta.sin_cos();
        let g = |phi: f64| {
            let (sp, _) = phi.sin_cos();
            f([x[0] + t * sp * c, x[1] + t * sp * s]) * sp
        };
        adaptive(&g, 0.0, PI / 2.0, opts.rel_tol * scale, 40)
    };
    let mut n = opts.min_angles.max(4);
    let mut sum: f64 = (0..n).map(|k| ring(2.0 * PI * k as f64 / n as f64)).sum::<Result<f64>>()?;
    let mut value = sum / n as f64;
    loop {
        let extra: f64 = (0..n)
            .map(|k| ring(2.0 * PI * (k as f64 + 0.5) / n as f64))
            .sum::<Result<f64>>()?;
        sum += extra;
        n *= 2;
        let next = sum / n as f64;
        let done = (next - value).abs() <= opts.rel_tol * scale.max(next.abs());
        value = next;
        if done {
            break;
        }
        if n >= opts.max_angles {
            return Err(Error::Quadrature(format!(
                "angular integral at t = {t} not converged with {n} nodes"
            )));
        }
    }
    Ok(sign * t * value)
}

/// Reference trace at `x` from the classical 2D solution formula, evaluated
/// by adaptive polar quadrature and a fourth-order central difference in
/// time. Slow; intended for smooth test sources.
pub fn wave_trace_oracle_fn(
    f: impl Fn([f64; 2]) -> f64 + Sync,
    x: [f64; 2],
    t_samples: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<f64>> {
    if t_samples.iter().any(|t| !(*t > 0.0)) {
        return invalid("oracle times must be positive");
    }
    // peak of |f| over the disc the quadrature can reach, on a coarse lattice
    let reach = t_samples.iter().fold(0.0f64, |m, t| m.max(*t)) + 2.0 * opts.h;
    let mut scale = 0.0f64;
    for a in 0..=200 {
        for b in 0..=200 {
            let p = [
                x[0] + reach * (a as f64 / 100.0 - 1.0),
                x[1] + reach * (b as f64 / 100.0 - 1.0),
            ];
            scale = scale.max(f(p).abs());
        }
    }
    if scale == 0.0 {
        return Ok(vec![0.0; t_samples.len()]);
    }
    let h = opts.h;
    t_samples
        .par_iter()
        .map(|&t| {
            let w = |s: f64| potential(&f, x, s, scale, opts);
            let d = (8.0 * (w(t + h)? - w(t - h)?) - (w(t + 2.0 * h)? - w(t - 2.0 * h)?)) / (12.0 * h);
            Ok(d)
        })
        .collect()
}

/// [`wave_trace_oracle_fn`] for a source given as an image (bilinear,
/// zero outside the grid).
pub fn wave_trace_oracle<T: Real>(
    f: &Image<T>,
    x: [f64; 2],
    t_samples: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<f64>> {
    let img = f.cast::<f64>();
    let g = img.grid;
    let lo = [g.origin[0] - 0.5 * g.dx, g.origin[1] - 0.5 * g.dx];
    let hi = [
        lo[0] + g.width as f64 * g.dx,
        lo[1] + g.height as f64 * g.dx,
    ];
    wave_trace_oracle_fn(
        move |p| {
            if p[0] < lo[0] || p[0] > hi[0] || p[1] < lo[1] || p[1] > hi[1] {
                0.0
            } else {
                img.resample_bilinear(p)
            }
        },
        x,
        t_samples,
        opts,
    )
}
