//! Synthetic sources, ground-truth deformations, warping and the additive
//! Gaussian texture.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::DisplacementField;
use crate::image::{Grid, Image};
use crate::sensor::SensorGeometry;
use crate::Real;

/// Largest admissible displacement magnitude, in pixels.
pub const MAX_DISPLACEMENT: f64 = 5.0;

/// Required clearance between the source support and the detector circle,
/// as a fraction of its radius.
pub const SENSOR_MARGIN: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhantomKind {
    Disc {
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    /// Recursively forking segments: every segment of depth `d > 0` carries
    /// two children at its tip, rotated by about `±spread`, scaled by
    /// `ratio` in length and width.
    BranchingTree {
        /// Foot of the trunk.
        base: [f64; 2],
        /// Trunk direction in radians from the +x axis.
        #[serde(default = "default_heading")]
        heading: f64,
        length: f64,
        width: f64,
        depth: u32,
        #[serde(default = "default_spread")]
        spread: f64,
        #[serde(default = "default_ratio")]
        ratio: f64,
        /// Random perturbation of branch angles, in radians.
        #[serde(default)]
        jitter: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_heading() -> f64 {
    std::f64::consts::FRAC_PI_2
}

fn default_spread() -> f64 {
    0.5
}

fn default_ratio() -> f64 {
    0.7
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub shape: PhantomKind,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl PhantomSpec {
    pub fn new(shape: PhantomKind) -> Self {
        Self {
            shape,
            amplitude: 1.0,
        }
    }
}

/// Straight branch of a tree: a `width`-wide rectangle along `a → b`.
#[derive(Clone, Copy, Debug)]
struct Segment {
    a: [f64; 2],
    b: [f64; 2],
    width: f64,
}

impl Segment {
    fn contains(&self, p: [f64; 2]) -> bool {
        let d = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let len = d[0].hypot(d[1]);
        if len == 0.0 {
            return false;
        }
        let q = [p[0] - self.a[0], p[1] - self.a[1]];
        let along = (q[0] * d[0] + q[1] * d[1]) / len;
        let across = (q[0] * d[1] - q[1] * d[0]) / len;
        (0.0..=len).contains(&along) && across.abs() <= 0.5 * self.width
    }

    /// Farthest distance of the rectangle's corners from `c`.
    fn reach(&self, c: [f64; 2]) -> f64 {
        let d = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let len = d[0].hypot(d[1]).max(1e-300);
        let n = [-d[1] / len * 0.5 * self.width, d[0] / len * 0.5 * self.width];
        [self.a, self.b]
            .iter()
            .flat_map(|e| [[e[0] + n[0], e[1] + n[1]], [e[0] - n[0], e[1] - n[1]]])
            .map(|p| (p[0] - c[0]).hypot(p[1] - c[1]))
            .fold(0.0, f64::max)
    }
}

#[allow(clippy::too_many_arguments)]
fn grow(
    out: &mut Vec<Segment>,
    rng: &mut ChaCha8Rng,
    start: [f64; 2],
    heading: f64,
    length: f64,
    width: f64,
    depth: u32,
    spread: f64,
    ratio: f64,
    jitter: f64,
) {
    let end = [start[0] + length * heading.cos(), start[1] + length * heading.sin()];
    out.push(Segment {
        a: start,
        b: end,
        width,
    });
    if depth == 0 {
        return;
    }
    for side in [-1.0, 1.0] {
        let wobble = if jitter > 0.0 {
            rng.random_range(-jitter..=jitter)
        } else {
            0.0
        };
        grow(
            out,
            rng,
            end,
            heading + side * spread + wobble,
            length * ratio,
            width * ratio,
            depth - 1,
            spread,
            ratio,
            jitter,
        );
    }
}

enum Shape {
    Disc([f64; 2], f64),
    Annulus([f64; 2], f64, f64),
    Tree(Vec<Segment>),
}

impl Shape {
    fn from_kind(kind: &PhantomKind) -> Result<Self> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                invalid(format!("{what} must be finite and nonnegative, got {v}"))
            }
        };
        Ok(match *kind {
            PhantomKind::Disc { center, radius } => {
                positive(radius, "disc radius")?;
                Shape::Disc(center, radius)
            }
            PhantomKind::Annulus {
                center,
                inner,
                outer,
            } => {
                positive(inner, "annulus inner radius")?;
                positive(outer, "annulus outer radius")?;
                if inner > outer {
                    return invalid("annulus inner radius exceeds outer radius");
                }
                Shape::Annulus(center, inner, outer)
            }
            PhantomKind::BranchingTree {
                base,
                heading,
                length,
                width,
                depth,
                spread,
                ratio,
                jitter,
                seed,
            } => {
                positive(length, "trunk length")?;
                positive(width, "trunk width")?;
                positive(jitter, "jitter")?;
                if !(ratio > 0.0 && ratio <= 1.0) {
                    return invalid(format!("branch ratio must lie in (0, 1], got {ratio}"));
                }
                if depth > 12 {
                    return invalid(format!("tree depth {depth} is too large (max 12)"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut segs = Vec::new();
                grow(&mut segs, &mut rng, base, heading, length, width, depth, spread, ratio, jitter);
                Shape::Tree(segs)
            }
        })
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Shape::Disc(c, r) => *r > 0.0 && (p[0] - c[0]).hypot(p[1] - c[1]) <= *r,
            Shape::Annulus(c, a, b) => {
                let d = (p[0] - c[0]).hypot(p[1] - c[1]);
                *b > 0.0 && d >= *a && d <= *b
            }
            Shape::Tree(segs) => segs.iter().any(|s| s.contains(p)),
        }
    }

    /// Radius around `c` that encloses the shape.
    fn reach(&self, c: [f64; 2]) -> f64 {
        match self {
            Shape::Disc(o, r) | Shape::Annulus(o, _, r) => (o[0] - c[0]).hypot(o[1] - c[1]) + r,
            Shape::Tree(segs) => segs.iter().map(|s| s.reach(c)).fold(0.0, f64::max),
        }
    }
}

/// Piecewise-constant source: `amplitude` at pixels whose centers lie in the
/// shape, zero elsewhere. The shape must keep a clearance of
/// [`SENSOR_MARGIN`]·R from the detector circle.
pub fn make_phantom<T: Real>(
    spec: &PhantomSpec,
    grid: &Grid<T>,
    geom: &SensorGeometry<T>,
) -> Result<Image<T>> {
    grid.validate()?;
    geom.validate()?;
    if !spec.amplitude.is_finite() {
        return invalid("phantom amplitude must be finite");
    }
    let shape = Shape::from_kind(&spec.shape)?;
    let c = [geom.center[0].f64(), geom.center[1].f64()];
    let r = geom.radius.f64();
    let reach = shape.reach(c);
    if reach > (1.0 - SENSOR_MARGIN) * r {
        return Err(Error::SupportViolation(format!(
            "phantom reaches {reach:.3} from the circle center; at most {:.3} allowed",
            (1.0 - SENSOR_MARGIN) * r
        )));
    }
    let amp = T::of(spec.amplitude);
    Ok(Image::from_fn(*grid, |p| {
        if shape.contains([p[0].f64(), p[1].f64()]) {
            amp
        } else {
            T::zero()
        }
    }))
}

/// Pixels where the image is nonzero.
pub fn support_mask<T: Real>(f: &Image<T>) -> Vec<bool> {
    f.values.iter().map(|v| *v != T::zero()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeformationSpec {
    /// Constant shift, in pixels.
    RigidTranslation { shift: [f64; 2] },
    /// `u(x) = Rot_θ(x − c) − (x − c)` with `c` in physical coordinates.
    RigidRotation { angle: f64, pivot: [f64; 2] },
    /// `u(x) = A·exp(−|x − c|²/(2σ²))·d̂`; `σ` in physical units, `A` in pixels.
    NonrigidBump {
        center: [f64; 2],
        sigma: f64,
        amplitude: f64,
        direction: [f64; 2],
    },
}

/// Ground-truth displacement field (pixel units) on `grid`.
pub fn make_displacement<T: Real>(spec: &DeformationSpec, grid: &Grid<T>) -> Result<DisplacementField<T>> {
    grid.validate()?;
    let dx = grid.dx.f64();
    let field = match *spec {
        DeformationSpec::RigidTranslation { shift } => {
            DisplacementField::constant(*grid, [T::of(shift[0]), T::of(shift[1])])
        }
        DeformationSpec::RigidRotation { angle, pivot } => {
            let (s, c) = angle.sin_cos();
            DisplacementField::from_fn(*grid, |i, j| {
                let p = grid.position(i, j);
                let q = [p[0].f64() - pivot[0], p[1].f64() - pivot[1]];
                let rot = [c * q[0] - s * q[1], s * q[0] + c * q[1]];
                [T::of((rot[0] - q[0]) / dx), T::of((rot[1] - q[1]) / dx)]
            })
        }
        DeformationSpec::NonrigidBump {
            center,
            sigma,
            amplitude,
            direction,
        } => {
            if !(sigma > 0.0) {
                return invalid(format!("bump width must be positive, got {sigma}"));
            }
            let norm = direction[0].hypot(direction[1]);
            if !(norm > 0.0 && norm.is_finite()) {
                return invalid("bump direction must be a nonzero vector");
            }
            let d = [direction[0] / norm, direction[1] / norm];
            DisplacementField::from_fn(*grid, |i, j| {
                let p = grid.position(i, j);
                let r2 = (p[0].f64() - center[0]).powi(2) + (p[1].f64() - center[1]).powi(2);
                let a = amplitude * (-r2 / (2.0 * sigma * sigma)).exp();
                [T::of(a * d[0]), T::of(a * d[1])]
            })
        }
    };
    if field.ux.iter().chain(&field.uy).any(|v| !v.is_finite()) {
        return invalid("deformation produced non-finite displacements");
    }
    let peak = field.max_magnitude().f64();
    if peak > MAX_DISPLACEMENT {
        return invalid(format!(
            "deformation reaches {peak:.3} px, above the {MAX_DISPLACEMENT} px limit"
        ));
    }
    Ok(field)
}

/// `f₂(x) = f₁(x + u(x))` by bilinear resampling (clamped at the border).
pub fn warp_image<T: Real>(f1: &Image<T>, u: &DisplacementField<T>) -> Result<Image<T>> {
    f1.grid.ensure_matches(&u.grid, "warp")?;
    let w = f1.width();
    let values = (0..f1.grid.len())
        .map(|k| {
            let (i, j) = (k % w, k / w);
            f1.sample_index(T::of_usize(i) + u.ux[k], T::of_usize(j) + u.uy[k])
        })
        .collect();
    Ok(Image {
        grid: f1.grid,
        values,
    })
}

/// `f + α·r` with `r` i.i.d. standard normal from a seeded ChaCha stream.
pub fn add_gaussian_texture<T: Real>(f: &Image<T>, alpha: f64, seed: u64) -> Result<Image<T>> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return invalid(format!("texture strength must be nonnegative, got {alpha}"));
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Image {
        grid: f.grid,
        values: f
            .values
            .iter()
            .map(|v| {
                let r: f64 = rng.sample(StandardNormal);
                *v + T::of(alpha * r)
            })
            .collect(),
    })
}
