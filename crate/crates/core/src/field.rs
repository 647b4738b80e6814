//! Displacement fields on an image grid.

use crate::error::{invalid, Result};
use crate::image::Grid;
use crate::Real;

/// Per-pixel displacement `u = (ux, uy)` in pixel-length units.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementField<T = f64> {
    pub grid: Grid<T>,
    pub ux: Vec<T>,
    pub uy: Vec<T>,
}

impl<T: Real> DisplacementField<T> {
    pub fn new(grid: Grid<T>, ux: Vec<T>, uy: Vec<T>) -> Result<Self> {
        grid.validate()?;
        if ux.len() != grid.len() || uy.len() != grid.len() {
            return invalid("displacement components must match the grid size");
        }
        if ux.iter().chain(&uy).any(|v| !v.is_finite()) {
            return invalid("displacement field contains non-finite values");
        }
        Ok(Self { grid, ux, uy })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::constant(grid, [T::zero(), T::zero()])
    }

    pub fn constant(grid: Grid<T>, u: [T; 2]) -> Self {
        Self {
            grid,
            ux: vec![u[0]; grid.len()],
            uy: vec![u[1]; grid.len()],
        }
    }

    /// Evaluates `f(i, j)` (pixel indices) at every pixel.
    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(usize, usize) -> [T; 2]) -> Self {
        let mut ux = Vec::with_capacity(grid.len());
        let mut uy = Vec::with_capacity(grid.len());
        for j in 0..grid.height {
            for i in 0..grid.width {
                let u = f(i, j);
                ux.push(u[0]);
                uy.push(u[1]);
            }
        }
        Self { grid, ux, uy }
    }

    #[inline]
    pub fn at(&self, k: usize) -> [T; 2] {
        [self.ux[k], self.uy[k]]
    }

    #[inline]
    pub fn magnitude(&self, k: usize) -> T {
        self.ux[k].hypot(self.uy[k])
    }

    pub fn max_magnitude(&self) -> T {
        (0..self.grid.len())
            .map(|k| self.magnitude(k))
            .fold(T::zero(), T::max)
    }

    pub fn mean(&self) -> [T; 2] {
        let n = T::of_usize(self.grid.len());
        [
            self.ux.iter().copied().sum::<T>() / n,
            self.uy.iter().copied().sum::<T>() / n,
        ]
    }

    pub fn negated(&self) -> Self {
        Self {
            grid: self.grid,
            ux: self.ux.iter().map(|v| -*v).collect(),
            uy: self.uy.iter().map(|v| -*v).collect(),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            grid: self.grid,
            ux: self.ux.iter().map(|v| *v * s).collect(),
            uy: self.uy.iter().map(|v| *v * s).collect(),
        }
    }
}
