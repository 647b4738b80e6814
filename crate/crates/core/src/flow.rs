//! Horn–Schunck optical flow.
//!
//! Minimizes the discrete energy
//! `Σ_x (f₁ₓ u + f₁ᵧ v + f₂ − f₁)² + λ Σ_{x~y} (|u_x − u_y|² + |v_x − v_y|²)`
//! over 4-neighbour pairs `x~y` inside the grid, which gives homogeneous
//! Neumann conditions at the border. The field solves the linearized
//! constancy equation `∇f₁·u + (f₂ − f₁) = 0`, so for `f₂(x) = f₁(x − s)`
//! it recovers `u ≈ s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::DisplacementField;
use crate::image::Image;
use crate::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientScheme {
    /// Central differences of `f₁`, one-sided at the border.
    #[default]
    Central,
    /// Central differences of `(f₁ + f₂)/2`, one-sided at the border.
    Averaged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub lambda: f64,
    pub max_iterations: usize,
    /// Stop once the Euler–Lagrange residual falls below this fraction of
    /// its value at `u = 0`.
    pub tolerance: f64,
    pub gradient: GradientScheme,
    /// Over-relaxation factor of the red-black block sweeps, in `(0, 2)`.
    pub omega: f64,
    /// Residual check interval, in sweeps.
    pub check_every: usize,
    /// Keep the energy after every sweep in [`FlowResult::energy_trace`].
    pub record_energy: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            lambda: 12.5893,
            max_iterations: 2000,
            tolerance: 1e-6,
            gradient: GradientScheme::Central,
            omega: 1.9,
            check_every: 10,
            record_energy: false,
        }
    }
}

impl FlowConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return invalid(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.tolerance > 0.0) {
            return invalid(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return invalid(format!("relaxation factor must lie in (0, 2), got {}", self.omega));
        }
        if self.max_iterations == 0 || self.check_every == 0 {
            return invalid("iteration counts must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult<T = f64> {
    pub field: DisplacementField<T>,
    pub lambda: f64,
    pub energy: f64,
    pub iterations: usize,
    /// Euler–Lagrange residual relative to its value at `u = 0`.
    pub relative_residual: f64,
    /// `false` when the iteration cap was hit first.
    pub converged: bool,
    pub energy_trace: Vec<f64>,
}

/// Per-pixel coefficients of the normal equations.
struct System {
    w: usize,
    h: usize,
    ix: Vec<f64>,
    iy: Vec<f64>,
    it: Vec<f64>,
    lambda: f64,
}

fn derivative(values: &[f64], w: usize, h: usize, k: usize, along_x: bool) -> f64 {
    let (i, j) = (k % w, k / w);
    let (pos, n, stride) = if along_x { (i, w, 1) } else { (j, h, w) };
    if n == 1 {
        0.0
    } else if pos == 0 {
        values[k + stride] - values[k]
    } else if pos + 1 == n {
        values[k] - values[k - stride]
    } else {
        0.5 * (values[k + stride] - values[k - stride])
    }
}

impl System {
    fn new<T: Real>(f1: &Image<T>, f2: &Image<T>, cfg: &FlowConfig) -> Self {
        let (w, h) = (f1.width(), f1.height());
        let a: Vec<f64> = f1.values.iter().map(|v| v.f64()).collect();
        let b: Vec<f64> = f2.values.iter().map(|v| v.f64()).collect();
        let base: Vec<f64> = match cfg.gradient {
            GradientScheme::Central => a.clone(),
            GradientScheme::Averaged => a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect(),
        };
        let n = w * h;
        Self {
            w,
            h,
            ix: (0..n).map(|k| derivative(&base, w, h, k, true)).collect(),
            iy: (0..n).map(|k| derivative(&base, w, h, k, false)).collect(),
            it: b.iter().zip(&a).map(|(y, x)| y - x).collect(),
            lambda: cfg.lambda,
        }
    }

    /// Neighbour count and neighbour sums of `u` and `v` at pixel `k`.
    #[inline]
    fn neighbours(&self, u: &[f64], v: &[f64], k: usize) -> (f64, f64, f64) {
        let (i, j) = (k % self.w, k / self.w);
        let (mut n, mut su, mut sv) = (0.0, 0.0, 0.0);
        let mut add = |q: usize| {
            n += 1.0;
            su += u[q];
            sv += v[q];
        };
        if i > 0 {
            add(k - 1);
        }
        if i + 1 < self.w {
            add(k + 1);
        }
        if j > 0 {
            add(k - self.w);
        }
        if j + 1 < self.h {
            add(k + self.w);
        }
        (n, su, sv)
    }

    /// One red-black block SOR sweep.
    fn sweep(&self, u: &mut [f64], v: &mut [f64], omega: f64) {
        let lam = self.lambda;
        for color in 0..2 {
            for j in 0..self.h {
                let start = (j + color) % 2;
                for i in (start..self.w).step_by(2) {
                    let k = j * self.w + i;
                    let (n, su, sv) = self.neighbours(u, v, k);
                    let (ix, iy, it) = (self.ix[k], self.iy[k], self.it[k]);
                    let a = ix * ix + lam * n;
                    let d = iy * iy + lam * n;
                    let b = ix * iy;
                    let ru = lam * su - ix * it;
                    let rv = lam * sv - iy * it;
                    let det = a * d - b * b;
                    let nu = (d * ru - b * rv) / det;
                    let nv = (a * rv - b * ru) / det;
                    u[k] += omega * (nu - u[k]);
                    v[k] += omega * (nv - v[k]);
                }
            }
        }
    }

    fn residual_norm(&self, u: &[f64], v: &[f64]) -> f64 {
        let lam = self.lambda;
        (0..u.len())
            .map(|k| {
                let (n, su, sv) = self.neighbours(u, v, k);
                let (ix, iy, it) = (self.ix[k], self.iy[k], self.it[k]);
                let data = ix * u[k] + iy * v[k] + it;
                let ru = ix * data + lam * (n * u[k] - su);
                let rv = iy * data + lam * (n * v[k] - sv);
                ru * ru + rv * rv
            })
            .sum::<f64>()
            .sqrt()
    }

    fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut e = 0.0;
        for k in 0..u.len() {
            let data = self.ix[k] * u[k] + self.iy[k] * v[k] + self.it[k];
            e += data * data;
            let (i, j) = (k % self.w, k / self.w);
            if i + 1 < self.w {
                e += self.lambda * ((u[k + 1] - u[k]).powi(2) + (v[k + 1] - v[k]).powi(2));
            }
            if j + 1 < self.h {
                e += self.lambda * ((u[k + self.w] - u[k]).powi(2) + (v[k + self.w] - v[k]).powi(2));
            }
        }
        e
    }
}

/// Horn–Schunck flow from `f1` to `f2`.
pub fn horn_schunck<T: Real>(f1: &Image<T>, f2: &Image<T>, cfg: &FlowConfig) -> Result<FlowResult<T>> {
    f1.grid.ensure_matches(&f2.grid, "optical flow")?;
    cfg.validate()?;
    let sys = System::new(f1, f2, cfg);
    let n = f1.grid.len();
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let r0 = sys.residual_norm(&u, &v);
    let mut trace = Vec::new();
    if cfg.record_energy {
        trace.push(sys.energy(&u, &v));
    }
    let mut iterations = 0;
    let mut rel = if r0 > 0.0 { 1.0 } else { 0.0 };
    while rel > cfg.tolerance && iterations < cfg.max_iterations {
        sys.sweep(&mut u, &mut v, cfg.omega);
        iterations += 1;
        if cfg.record_energy {
            trace.push(sys.energy(&u, &v));
        }
        if iterations % cfg.check_every == 0 || iterations == cfg.max_iterations {
            rel = sys.residual_norm(&u, &v) / r0;
        }
    }
    let converged = rel <= cfg.tolerance;
    if !converged {
        log::warn!(
            "Horn-Schunck (lambda = {}) stopped after {iterations} sweeps at relative residual {rel:.3e}",
            cfg.lambda
        );
    }
    let energy = sys.energy(&u, &v);
    let field = DisplacementField {
        grid: f1.grid,
        ux: u.into_iter().map(T::of).collect(),
        uy: v.into_iter().map(T::of).collect(),
    };
    Ok(FlowResult {
        field,
        lambda: cfg.lambda,
        energy,
        iterations,
        relative_residual: rel,
        converged,
        energy_trace: trace,
    })
}

/// `n` log-spaced values from `10^lo` to `10^hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![10f64.powf(lo)];
    }
    (0..n)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64))
        .collect()
}

/// 21 log-spaced values over `[10^0.5, 10^2.5]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(0.5, 2.5, 21)
}

/// One flow per `λ`, in the given order; `cfg.lambda` is ignored.
pub fn lambda_sweep<T: Real>(
    f1: &Image<T>,
    f2: &Image<T>,
    lambdas: &[f64],
    cfg: &FlowConfig,
) -> Result<Vec<FlowResult<T>>> {
    if lambdas.is_empty() {
        return invalid("lambda list is empty");
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return invalid(format!("lambda values must be positive, got {l}"));
    }
    lambdas
        .par_iter()
        .map(|&lambda| horn_schunck(f1, f2, &FlowConfig { lambda, ..*cfg }))
        .collect()
}
