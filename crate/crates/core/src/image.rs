//! Uniform square-pixel grids and scalar images on them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Real;

/// Geometry of a uniform grid: `width × height` square pixels of side `dx`,
/// with `origin` the physical coordinates of the center of pixel (0, 0).
///
/// Pixel `(i, j)` is column `i`, row `j`; its center sits at
/// `origin + (i·dx, j·dx)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid<T = f64> {
    pub width: usize,
    pub height: usize,
    pub dx: T,
    pub origin: [T; 2],
}

impl<T: Real> Grid<T> {
    pub fn new(width: usize, height: usize, dx: T, origin: [T; 2]) -> Result<Self> {
        let grid = Self {
            width,
            height,
            dx,
            origin,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid whose geometric center is the physical origin.
    pub fn centered(width: usize, height: usize, dx: T) -> Result<Self> {
        let half = |n: usize| -T::of_usize(n.saturating_sub(1)) * dx * T::of(0.5);
        Self::new(width, height, dx, [half(width), half(height)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return invalid(format!(
                "grid dimensions must be positive, got {}x{}",
                self.width, self.height
            ));
        }
        if !(self.dx.is_finite() && self.dx > T::zero()) {
            return invalid(format!("grid spacing must be positive, got {}", self.dx));
        }
        if !(self.origin[0].is_finite() && self.origin[1].is_finite()) {
            return invalid("grid origin must be finite");
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    /// Physical coordinates of the center of pixel `(i, j)`.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> [T; 2] {
        [
            self.origin[0] + T::of_usize(i) * self.dx,
            self.origin[1] + T::of_usize(j) * self.dx,
        ]
    }

    /// Fractional pixel-index coordinates of a physical point.
    #[inline]
    pub fn to_index_coords(&self, x: [T; 2]) -> [T; 2] {
        [
            (x[0] - self.origin[0]) / self.dx,
            (x[1] - self.origin[1]) / self.dx,
        ]
    }

    /// Physical center of the grid.
    pub fn center(&self) -> [T; 2] {
        let h = T::of(0.5);
        [
            self.origin[0] + T::of_usize(self.width - 1) * self.dx * h,
            self.origin[1] + T::of_usize(self.height - 1) * self.dx * h,
        ]
    }

    /// Same shape and pixel placement, up to a relative tolerance on `dx` and origin.
    pub fn matches(&self, other: &Self) -> bool {
        let tol = T::of(1e-9) * self.dx;
        self.width == other.width
            && self.height == other.height
            && (self.dx - other.dx).abs() <= tol
            && (self.origin[0] - other.origin[0]).abs() <= tol
            && (self.origin[1] - other.origin[1]).abs() <= tol
    }

    pub fn ensure_matches(&self, other: &Self, what: &str) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {}x{} (dx {}) vs {}x{} (dx {})",
                self.width, self.height, self.dx, other.width, other.height, other.dx
            )))
        }
    }

    /// Grid extended by `cells` pixels on every side, keeping pixel placement.
    pub fn padded(&self, cells: usize) -> Self {
        let shift = T::of_usize(cells) * self.dx;
        Self {
            width: self.width + 2 * cells,
            height: self.height + 2 * cells,
            dx: self.dx,
            origin: [self.origin[0] - shift, self.origin[1] - shift],
        }
    }

    pub fn cast<U: Real>(&self) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            dx: U::of(self.dx.f64()),
            origin: [U::of(self.origin[0].f64()), U::of(self.origin[1].f64())],
        }
    }
}

/// A scalar field sampled on a [`Grid`], stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image<T = f64> {
    pub grid: Grid<T>,
    pub values: Vec<T>,
}

impl<T: Real> Image<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return invalid(format!(
                "image of {}x{} needs {} values, got {}",
                grid.width,
                grid.height,
                grid.len(),
                values.len()
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite image value at index {k}"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    /// Samples `f` at every pixel center (physical coordinates).
    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut([T; 2]) -> T) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.height {
            for i in 0..grid.width {
                values.push(f(grid.position(i, j)));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.grid.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.grid.height
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.grid.index(i, j);
        self.values[k] = v;
    }

    /// Bilinear interpolation at fractional pixel-index coordinates.
    /// Coordinates outside the grid clamp to the boundary pixels.
    pub fn sample_index(&self, px: T, py: T) -> T {
        let w = self.grid.width;
        let h = self.grid.height;
        let px = px.max(T::zero()).min(T::of_usize(w - 1));
        let py = py.max(T::zero()).min(T::of_usize(h - 1));
        let i0 = px.floor().to_usize().unwrap_or(0).min(w - 1);
        let j0 = py.floor().to_usize().unwrap_or(0).min(h - 1);
        let i1 = (i0 + 1).min(w - 1);
        let j1 = (j0 + 1).min(h - 1);
        let fx = px - T::of_usize(i0);
        let fy = py - T::of_usize(j0);
        let one = T::one();
        let top = self.get(i0, j0) * (one - fx) + self.get(i1, j0) * fx;
        let bottom = self.get(i0, j1) * (one - fx) + self.get(i1, j1) * fx;
        top * (one - fy) + bottom * fy
    }

    /// Bilinear interpolation at a physical point (clamped at the border).
    pub fn resample_bilinear(&self, x: [T; 2]) -> T {
        let p = self.grid.to_index_coords(x);
        self.sample_index(p[0], p[1])
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    pub fn l2_norm(&self) -> T {
        self.values.iter().map(|v| *v * *v).sum::<T>().sqrt()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    /// `a·self + b·other` on matching grids.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.grid.ensure_matches(&other.grid, "image combination")?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * *x + b * *y)
                .collect(),
        })
    }

    /// Copy embedded in a zero border of `cells` pixels.
    pub fn padded(&self, cells: usize) -> Self {
        let grid = self.grid.padded(cells);
        let mut out = Self::zeros(grid);
        for j in 0..self.height() {
            let src = &self.values[j * self.width()..(j + 1) * self.width()];
            let start = grid.index(cells, j + cells);
            out.values[start..start + self.width()].copy_from_slice(src);
        }
        out
    }

    /// The `width × height` window whose lower corner is pixel `(i0, j0)`.
    pub fn crop(&self, i0: usize, j0: usize, width: usize, height: usize) -> Result<Self> {
        if i0 + width > self.width() || j0 + height > self.height() {
            return invalid("crop window exceeds the image");
        }
        let pos = self.grid.position(i0, j0);
        let grid = Grid {
            width,
            height,
            dx: self.grid.dx,
            origin: pos,
        };
        let mut values = Vec::with_capacity(width * height);
        for j in j0..j0 + height {
            let row = self.grid.index(i0, j);
            values.extend_from_slice(&self.values[row..row + width]);
        }
        Ok(Self { grid, values })
    }

    pub fn cast<U: Real>(&self) -> Image<U> {
        Image {
            grid: self.grid.cast(),
            values: self.values.iter().map(|v| U::of(v.f64())).collect(),
        }
    }
}

/// `‖a − b‖₂ / ‖b‖₂` over the entries selected by `mask` (all entries when `None`).
pub fn relative_l2<T: Real>(a: &[T], b: &[T], mask: Option<&[bool]>) -> T {
    let mut num = T::zero();
    let mut den = T::zero();
    for k in 0..a.len().min(b.len()) {
        if mask.is_some_and(|m| !m[k]) {
            continue;
        }
        let d = a[k] - b[k];
        num = num + d * d;
        den = den + b[k] * b[k];
    }
    if den == T::zero() {
        return num.sqrt();
    }
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Image {
        let grid = Grid::new(w, h, 1.0, [0.0, 0.0]).unwrap();
        Image::from_fn(grid, |p| p[0])
    }

    #[test]
    fn sample_at_pixel_center_returns_pixel() {
        let grid = Grid::new(3, 2, 0.5, [1.0, -1.0]).unwrap();
        let img = Image::new(grid, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        for j in 0..2 {
            for i in 0..3 {
                assert_eq!(img.resample_bilinear(grid.position(i, j)), img.get(i, j));
            }
        }
    }

    #[test]
    fn ramp_is_reproduced_between_nodes() {
        let img = ramp(8, 4);
        assert_eq!(img.resample_bilinear([2.5, 1.0]), 2.5);
        assert!((img.resample_bilinear([4.25, 2.75]) - 4.25).abs() < 1e-15);
    }

    #[test]
    fn out_of_grid_clamps_to_border() {
        let img = ramp(5, 5);
        assert_eq!(img.resample_bilinear([-3.0, 2.0]), 0.0);
        assert_eq!(img.resample_bilinear([10.0, -7.0]), 4.0);
    }

    #[test]
    fn rejects_size_mismatch_and_nan() {
        let grid = Grid::new(3, 3, 1.0, [0.0, 0.0]).unwrap();
        assert!(Image::new(grid, vec![0.0; 8]).is_err());
        let mut v = vec![0.0; 9];
        v[4] = f64::NAN;
        assert!(Image::new(grid, v).is_err());
    }

    #[test]
    fn pad_then_crop_is_identity() {
        let img = ramp(6, 3);
        let back = img.padded(4).crop(4, 4, 6, 3).unwrap();
        assert!(back.grid.matches(&img.grid));
        assert_eq!(back.values, img.values);
    }

    #[test]
    fn centered_grid_is_symmetric() {
        let g = Grid::<f64>::centered(5, 4, 2.0).unwrap();
        assert_eq!(g.center(), [0.0, 0.0]);
        assert_eq!(g.origin, [-4.0, -3.0]);
    }

    #[test]
    fn generic_over_f32() {
        let grid = Grid::<f32>::new(4, 4, 1.0, [0.0, 0.0]).unwrap();
        let img = Image::from_fn(grid, |p| p[0] + 2.0 * p[1]);
        assert!((img.resample_bilinear([1.5, 0.5]) - 2.5).abs() < 1e-6);
    }
}
