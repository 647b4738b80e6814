use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::Real;

/// Hard frequency window `kappa_min ≤ |κ| ≤ kappa_max`, in radians per
/// length unit (sound speed is 1, so temporal and spatial frequencies
/// coincide).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSpec<T = f64> {
    pub kappa_min: T,
    pub kappa_max: T,
}

impl<T: Real> BandSpec<T> {
    pub fn new(kappa_min: T, kappa_max: T) -> Result<Self> {
        let band = Self {
            kappa_min,
            kappa_max,
        };
        band.validate()?;
        Ok(band)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_min.is_finite() && self.kappa_max.is_finite()) {
            return invalid("band edges must be finite");
        }
        if !(self.kappa_min >= T::zero() && self.kappa_min < self.kappa_max) {
            return invalid(format!(
                "band needs 0 <= kappa_min < kappa_max, got [{}, {}]",
                self.kappa_min, self.kappa_max
            ));
        }
        Ok(())
    }

    /// Half bandwidth `a`.
    pub fn half_width(&self) -> T {
        (self.kappa_max - self.kappa_min) * T::of(0.5)
    }

    /// Center frequency `kappa_min + a`.
    pub fn center(&self) -> T {
        self.kappa_min + self.half_width()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa_max <= self.kappa_min
    }

    /// Inclusive membership test on `|kappa|`.
    #[inline]
    pub fn contains(&self, kappa: T) -> bool {
        let k = kappa.abs();
        k >= self.kappa_min && k <= self.kappa_max
    }

    /// Band with both edges multiplied by `s` (e.g. `1/R` to map a
    /// unit-disc band onto a circle of radius `R`).
    pub fn scaled(&self, s: T) -> Self {
        Self {
            kappa_min: self.kappa_min * s,
            kappa_max: self.kappa_max * s,
        }
    }
}
