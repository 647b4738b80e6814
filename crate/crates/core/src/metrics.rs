//! Flow validation measures. Integrals over the domain are realized as
//! pixel means.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::DisplacementField;
use crate::image::Image;
use crate::phantom::warp_image;
use crate::Real;

/// Default magnitude below which angles and relative errors are undefined.
pub const EPS_MAG: f64 = 1e-3;

/// Pixels where `|u0| ≥ eps`.
pub fn magnitude_mask<T: Real>(u0: &DisplacementField<T>, eps: f64) -> Vec<bool> {
    (0..u0.grid.len())
        .map(|k| u0.magnitude(k).f64() >= eps)
        .collect()
}

fn check<T: Real>(u: &DisplacementField<T>, u0: &DisplacementField<T>, mask: Option<&[bool]>) -> Result<()> {
    u.grid.ensure_matches(&u0.grid, "flow comparison")?;
    if let Some(m) = mask {
        if m.len() != u.grid.len() {
            return invalid("mask size does not match the grid");
        }
    }
    Ok(())
}

fn masked_mean(values: impl Iterator<Item = (bool, f64)>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (keep, v) in values {
        if keep {
            sum += v;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Absolute angle difference wrapped to `[0, π]`.
#[inline]
pub fn angle_difference(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = a[1].atan2(a[0]) - b[1].atan2(b[0]);
    let w = d.rem_euclid(std::f64::consts::TAU);
    w.min(std::f64::consts::TAU - w)
}

/// Average angular error over `mask`.
pub fn aae<T: Real>(u: &DisplacementField<T>, u0: &DisplacementField<T>, mask: &[bool]) -> Result<f64> {
    check(u, u0, Some(mask))?;
    masked_mean((0..mask.len()).map(|k| {
        let a = [u.ux[k].f64(), u.uy[k].f64()];
        let b = [u0.ux[k].f64(), u0.uy[k].f64()];
        (mask[k], angle_difference(a, b))
    }))
    .ok_or(Error::EmptyMask(EPS_MAG))
}

fn endpoint<T: Real>(u: &DisplacementField<T>, u0: &DisplacementField<T>, k: usize) -> f64 {
    (u.ux[k] - u0.ux[k]).f64().hypot((u.uy[k] - u0.uy[k]).f64())
}

/// Average endpoint error over all pixels.
pub fn aee<T: Real>(u: &DisplacementField<T>, u0: &DisplacementField<T>) -> Result<f64> {
    check(u, u0, None)?;
    Ok(masked_mean((0..u.grid.len()).map(|k| (true, endpoint(u, u0, k)))).unwrap_or(0.0))
}

/// Average of `|u − u0| / |u0|` over `mask`.
pub fn aee_rel<T: Real>(u: &DisplacementField<T>, u0: &DisplacementField<T>, mask: &[bool]) -> Result<f64> {
    check(u, u0, Some(mask))?;
    masked_mean((0..mask.len()).map(|k| {
        let keep = mask[k] && u0.magnitude(k) > T::zero();
        (keep, if keep { endpoint(u, u0, k) / u0.magnitude(k).f64() } else { 0.0 })
    }))
    .ok_or(Error::EmptyMask(EPS_MAG))
}

/// Mean of `|f₂(x) − f₁(x + u(x))|`, warping as in [`warp_image`].
pub fn warping_error<T: Real>(f1: &Image<T>, f2: &Image<T>, u: &DisplacementField<T>) -> Result<f64> {
    f1.grid.ensure_matches(&f2.grid, "warping error")?;
    let pred = warp_image(f1, u)?;
    Ok(masked_mean(
        f2.values
            .iter()
            .zip(&pred.values)
            .map(|(a, b)| (true, (*a - *b).abs().f64())),
    )
    .unwrap_or(0.0))
}

/// One row of an error table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub mode: String,
    pub lambda: f64,
    pub aae: f64,
    pub aee: f64,
    pub aee_rel: f64,
    pub warping: f64,
    /// Pixels in the `|u0| ≥ ε` mask used by the angular and relative errors.
    pub mask_pixels: usize,
    pub total_pixels: usize,
}

impl ErrorRow {
    /// All four measures of `u` against `u0` for the pair `(f1, f2)`. When
    /// no pixel reaches `eps` (a null displacement) AAE and AEErel are NaN.
    pub fn evaluate<T: Real>(
        mode: &str,
        lambda: f64,
        f1: &Image<T>,
        f2: &Image<T>,
        u: &DisplacementField<T>,
        u0: &DisplacementField<T>,
        eps: f64,
    ) -> Result<Self> {
        let mask = magnitude_mask(u0, eps);
        let mask_pixels = mask.iter().filter(|m| **m).count();
        let row = Self {
            mode: mode.to_string(),
            lambda,
            aae: if mask_pixels > 0 { aae(u, u0, &mask)? } else { f64::NAN },
            aee: aee(u, u0)?,
            aee_rel: if mask_pixels > 0 { aee_rel(u, u0, &mask)? } else { f64::NAN },
            warping: warping_error(f1, f2, u)?,
            mask_pixels,
            total_pixels: mask.len(),
        };
        row.validate()?;
        Ok(row)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mask_pixels == 0 && self.aae.is_nan() && self.aee_rel.is_nan() {
            return Self::check_finite([("AEE", self.aee), ("warping", self.warping)]);
        }
        Self::check_finite([
            ("AAE", self.aae),
            ("AEE", self.aee),
            ("AEErel", self.aee_rel),
            ("warping", self.warping),
        ])
    }

    fn check_finite<const N: usize>(values: [(&str, f64); N]) -> Result<()> {
        for (name, v) in values {
            if !(v.is_finite() && v >= 0.0) {
                return invalid(format!("{name} must be finite and nonnegative, got {v}"));
            }
        }
        Ok(())
    }
}

/// Error rows keyed by texture mode and `λ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn push(&mut self, row: ErrorRow) -> Result<()> {
        row.validate()?;
        self.rows.push(row);
        Ok(())
    }

    pub fn for_mode<'a>(&'a self, mode: &'a str) -> impl Iterator<Item = &'a ErrorRow> + 'a {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    /// Row of `mode` whose `λ` is closest to `lambda` (relative 1e-3).
    pub fn at(&self, mode: &str, lambda: f64) -> Option<&ErrorRow> {
        self.rows
            .iter()
            .find(|r| r.mode == mode && ((r.lambda - lambda) / lambda).abs() < 1e-3)
    }

    /// Per-measure minimum over `λ` for `mode`, as `[AAE, AEE, AEErel, warping]`;
    /// NaN where the measure is undefined for every row.
    pub fn best(&self, mode: &str) -> Option<[f64; 4]> {
        let mut it = self.for_mode(mode).peekable();
        it.peek()?;
        Some(it.fold([f64::NAN; 4], |b, r| {
            [
                b[0].min(r.aae),
                b[1].min(r.aee),
                b[2].min(r.aee_rel),
                b[3].min(r.warping),
            ]
        }))
    }

    pub fn modes(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.mode) {
                out.push(r.mode.clone());
            }
        }
        out
    }
}
