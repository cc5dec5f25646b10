//! Normalized edge-orientation consistency score.
//!
//! Each model point votes with the cosine between its (rotated) gradient
//! direction and the working-image gradient near its projection; the pose
//! score is the mean vote over all `n` model points:
//!
//! ```text
//! M = 1/n · Σ_i max_{w ∈ N(p_i)} (d_i · g_w) / ‖g_w‖
//! ```
//!
//! where `N(p_i)` is a square window around the rounded projection of point
//! `i`. Taking the maximum over the window absorbs lattice discretization and
//! keeps isolated clutter from outscoring the true pose.

use crate::edges::{EdgeModel, GradientField};
use crate::error::{Error, Result};
use crate::pose::{Pose, Rotation};

/// How vote signs are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    /// Votes are signed cosines; contrast reversal scores negative.
    #[default]
    Signed,
    /// Absolute cosines; dark-on-light and light-on-dark match equally.
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    neighborhood: usize,
    polarity: Polarity,
    eps_mag: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self { neighborhood: 3, polarity: Polarity::Signed, eps_mag: 1e-9 }
    }
}

impl ScoreParams {
    pub fn new(neighborhood: usize, polarity: Polarity, eps_mag: f64) -> Result<Self> {
        if neighborhood == 0 || neighborhood.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("neighborhood must be odd and >= 1, got {neighborhood}")));
        }
        if !(eps_mag > 0.0 && eps_mag.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps_mag must be positive, got {eps_mag}")));
        }
        Ok(Self { neighborhood, polarity, eps_mag })
    }

    /// Default params with the given window size.
    pub fn with_neighborhood(neighborhood: usize) -> Result<Self> {
        let d = Self::default();
        Self::new(neighborhood, d.polarity, d.eps_mag)
    }

    pub fn neighborhood(&self) -> usize {
        self.neighborhood
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn eps_mag(&self) -> f64 {
        self.eps_mag
    }

    #[inline]
    fn radius(&self) -> i64 {
        (self.neighborhood / 2) as i64
    }
}

/// Score of one pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseScore {
    /// Mean vote, in `[-1, 1]` (signed) or `[0, 1]` (ignore).
    pub value: f64,
    /// Model points whose rounded projection fell inside the field.
    pub n_inbounds: usize,
}

/// Nearest integer, exact halves rounding toward +∞.
#[inline]
pub fn round_half_up(v: f64) -> i64 {
    let f = v.floor();
    if v - f >= 0.5 {
        f as i64 + 1
    } else {
        f as i64
    }
}

/// Best vote of direction `dir` over the window centered at `(cx, cy)`.
/// Pixels below `eps_mag` vote 0; a window entirely outside the field
/// votes 0.
#[inline]
pub fn point_vote(dir: (f64, f64), field: &GradientField, cx: i64, cy: i64, params: &ScoreParams) -> f64 {
    let r = params.radius();
    let (w, h) = (field.width() as i64, field.height() as i64);
    let (x0, x1) = ((cx - r).max(0), (cx + r).min(w - 1));
    let (y0, y1) = ((cy - r).max(0), (cy + r).min(h - 1));
    if x0 > x1 || y0 > y1 {
        return 0.0;
    }
    let cells = field.cells();
    let mut best = f64::NEG_INFINITY;
    for y in y0..=y1 {
        let row = &cells[(y * w + x0) as usize..=(y * w + x1) as usize];
        for &[gx, gy, m] in row {
            let mut vote = if m >= params.eps_mag { (dir.0 * gx + dir.1 * gy) / m } else { 0.0 };
            if params.polarity == Polarity::Ignore {
                vote = vote.abs();
            }
            if vote > best {
                best = vote;
            }
        }
    }
    best
}

/// Model points rotated by one angle: `(rx, ry, dx, dy)` per point, where
/// `(rx, ry)` is the rotated centroid-relative position and `(dx, dy)` the
/// co-rotated unit direction. Translating and scoring many poses of the same
/// angle reuses this.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedModel {
    points: Vec<[f64; 4]>,
}

impl RotatedModel {
    pub fn new(model: &EdgeModel, theta: f64) -> Self {
        let rot = Rotation::new(theta);
        let points = model
            .points()
            .iter()
            .map(|p| {
                let (rx, ry) = rot.apply((p.x_rel, p.y_rel));
                let (dx, dy) = rot.rotate_direction((p.dx, p.dy));
                [rx, ry, dx, dy]
            })
            .collect();
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rounded pixel of each point under translation `(ux, uy)`.
    pub fn projections(&self, ux: f64, uy: f64) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.points.iter().map(move |p| (round_half_up(p[0] + ux), round_half_up(p[1] + uy)))
    }

    /// Score at translation `(ux, uy)`. Votes are summed in model order.
    pub fn score_at(&self, ux: f64, uy: f64, field: &GradientField, params: &ScoreParams) -> PoseScore {
        let (w, h) = (field.width() as i64, field.height() as i64);
        let mut sum = 0.0;
        let mut n_inbounds = 0;
        for p in &self.points {
            let cx = round_half_up(p[0] + ux);
            let cy = round_half_up(p[1] + uy);
            if cx < 0 || cy < 0 || cx >= w || cy >= h {
                continue;
            }
            n_inbounds += 1;
            sum += point_vote((p[2], p[3]), field, cx, cy, params);
        }
        PoseScore { value: if self.points.is_empty() { 0.0 } else { sum / self.points.len() as f64 }, n_inbounds }
    }
}

/// Mean vote of `model` placed at `pose` against `field`. Points projecting
/// outside the field vote 0 but still count toward `n`.
pub fn pose_score(model: &EdgeModel, pose: &Pose, field: &GradientField, params: &ScoreParams) -> Result<PoseScore> {
    if model.is_empty() {
        return Err(Error::EmptyModel { max_magnitude: 0.0 });
    }
    Ok(RotatedModel::new(model, pose.theta).score_at(pose.ux, pose.uy, field, params))
}

/// Rounded pixel of every model point under `pose`, in model order. These
/// are exactly the window centers the score uses.
pub fn project_model(model: &EdgeModel, pose: &Pose) -> Vec<(i64, i64)> {
    RotatedModel::new(model, pose.theta).projections(pose.ux, pose.uy).collect()
}
