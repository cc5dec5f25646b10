//! Rigid 2D poses and the discrete pose lattice.
//!
//! Rotation follows the usual matrix `[cos -sin; sin cos]` applied in raster
//! coordinates (x right, y down), so positive angles turn clockwise on
//! screen. A mirrored convention would only negate θ.

use crate::error::{Error, Result};

/// Rigid transform hypothesis. Angles are radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub ux: f64,
    pub uy: f64,
    pub theta: f64,
}

impl Pose {
    pub const fn new(ux: f64, uy: f64, theta: f64) -> Self {
        Self { ux, uy, theta }
    }

    pub fn from_degrees(ux: f64, uy: f64, theta_deg: f64) -> Self {
        Self::new(ux, uy, theta_deg.to_radians())
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn rotation(&self) -> Rotation {
        Rotation::new(self.theta)
    }

    /// `R(θ)·t + u`.
    #[inline]
    pub fn transform_point(&self, t: (f64, f64)) -> (f64, f64) {
        let (rx, ry) = self.rotation().apply(t);
        (rx + self.ux, ry + self.uy)
    }

    /// `R(θ)·d`, renormalized. Translation does not apply to directions.
    #[inline]
    pub fn rotate_direction(&self, d: (f64, f64)) -> (f64, f64) {
        self.rotation().rotate_direction(d)
    }
}

/// Precomputed `cos θ`, `sin θ`. Shared by single-pose scoring and the
/// batched search so both produce bit-identical projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    cos: f64,
    sin: f64,
}

impl Rotation {
    #[inline]
    pub fn new(theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        Self { cos, sin }
    }

    #[inline]
    pub fn apply(&self, (tx, ty): (f64, f64)) -> (f64, f64) {
        (self.cos * tx - self.sin * ty, self.sin * tx + self.cos * ty)
    }

    #[inline]
    pub fn rotate_direction(&self, d: (f64, f64)) -> (f64, f64) {
        let (x, y) = self.apply(d);
        let norm = (x * x + y * y).sqrt();
        (x / norm, y / norm)
    }
}

/// One axis of the lattice: `start, start + step, …` up to `end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && step.is_finite()) {
            return Err(Error::InvalidGrid("axis bounds must be finite".into()));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if start > end {
            return Err(Error::InvalidGrid(format!("start {start} exceeds end {end}")));
        }
        Ok(Self { start, end, step })
    }

    /// `floor((end - start) / step) + 1`. A relative slack of 1e-9 keeps
    /// ranges like 0..=90° in 3° steps from losing their endpoint to
    /// radian round-off.
    pub fn count(&self) -> usize {
        let ratio = (self.end - self.start) / self.step;
        (ratio + 1e-9 * ratio.max(1.0)).floor() as usize + 1
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    fn scaled(&self, factor: f64) -> Self {
        Self { start: self.start * factor, end: self.end * factor, step: self.step * factor }
    }
}

/// Discrete pose lattice. Poses are linearized with θ slowest and x fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseGrid {
    pub x: Axis,
    pub y: Axis,
    /// Radians.
    pub theta: Axis,
}

impl PoseGrid {
    pub fn new(x: Axis, y: Axis, theta: Axis) -> Self {
        Self { x, y, theta }
    }

    /// Grid from `(start, end, step)` triples with the rotation axis in degrees.
    pub fn from_degrees(x: (f64, f64, f64), y: (f64, f64, f64), theta_deg: (f64, f64, f64)) -> Result<Self> {
        Ok(Self {
            x: Axis::new(x.0, x.1, x.2)?,
            y: Axis::new(y.0, y.1, y.2)?,
            theta: Axis::new(theta_deg.0.to_radians(), theta_deg.1.to_radians(), theta_deg.2.to_radians())?,
        })
    }

    /// A grid holding exactly `pose`.
    pub fn single(pose: Pose) -> Self {
        let axis = |v: f64| Axis { start: v, end: v, step: 1.0 };
        Self { x: axis(pose.ux), y: axis(pose.uy), theta: axis(pose.theta) }
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.x.count(), self.y.count(), self.theta.count())
    }

    /// `nx · ny · nθ`, saturating on overflow.
    pub fn size(&self) -> usize {
        let (nx, ny, nt) = self.counts();
        nx.saturating_mul(ny).saturating_mul(nt)
    }

    pub fn pose_at(&self, index: usize) -> Result<Pose> {
        let size = self.size();
        if index >= size {
            return Err(Error::IndexOutOfRange { index, size });
        }
        let (ix, iy, it) = self.split_index(index);
        Ok(Pose::new(self.x.value(ix), self.y.value(iy), self.theta.value(it)))
    }

    /// `(ix, iy, iθ)` of a linear index.
    #[inline]
    pub fn split_index(&self, index: usize) -> (usize, usize, usize) {
        let (nx, ny, _) = self.counts();
        let plane = nx * ny;
        (index % nx, (index % plane) / nx, index / plane)
    }

    /// Translations and steps scaled by `factor`; rotation untouched.
    pub fn scale_translation(&self, factor: f64) -> Self {
        Self { x: self.x.scaled(factor), y: self.y.scaled(factor), theta: self.theta }
    }
}
