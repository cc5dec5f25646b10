//! Seeded synthetic templates and scenes with ground truth.
//!
//! Scenes are composed in a fixed order: light ground, random clutter
//! segments, the template stamped at the true pose, an optional flat
//! occluder, an illumination map and finally additive Gaussian noise.
//!
//! Randomness comes from [`SplitMix64`] so scenes can be reproduced by any
//! implementation:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! return z ^ (z >> 31)
//! ```
//!
//! Uniform reals are `(next >> 11) * 2^-53`. Gaussian samples use one
//! Box-Muller draw per pair of uniforms: `sqrt(-2 ln(1 - u1)) * cos(2π u2)`.
//! Each clutter segment consumes six values in order: `x0, y0, x1, y1`
//! (uniform over the canvas), the gray value (uniform in `[0, 255)`) and the
//! stroke width (`1 + next % 2`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::edges::EdgeModel;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::pose::{Pose, Rotation};
use crate::similarity::round_half_up;

/// Ground luminance of templates and canvases.
pub const GROUND: f64 = 200.0;
/// Luminance of template strokes.
pub const STROKE: f64 = 40.0;
pub const STROKE_WIDTH: usize = 2;
pub const MIN_TEMPLATE_SIZE: usize = 16;

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal sample.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateShape {
    Rectangle,
    Ring,
    LBracket,
    Cross,
}

impl TemplateShape {
    pub const ALL: [TemplateShape; 4] = [Self::Rectangle, Self::Ring, Self::LBracket, Self::Cross];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Rectangle => "rectangle",
            Self::Ring => "ring",
            Self::LBracket => "l_bracket",
            Self::Cross => "cross",
        }
    }
}

impl fmt::Display for TemplateShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| Error::UnknownTemplate(s.to_string()))
    }
}

fn in_shape(shape: TemplateShape, size: usize, x: usize, y: usize) -> bool {
    let m = (size / 8).max(2);
    let sw = STROKE_WIDTH;
    let inside = |v: usize, lo: usize, hi: usize| lo <= v && v < hi;
    match shape {
        TemplateShape::Rectangle => {
            // wider than tall, so only 180° symmetric
            let (x0, x1) = (m, size - m);
            let (y0, y1) = (m + size / 8, size - m - size / 8);
            let outer = inside(x, x0, x1) && inside(y, y0, y1);
            let inner = inside(x, x0 + sw, x1 - sw) && inside(y, y0 + sw, y1 - sw);
            outer && !inner
        }
        TemplateShape::Ring => {
            let c = (size as f64 - 1.0) / 2.0;
            let r_out = (size / 2 - m) as f64;
            let d = (x as f64 - c).hypot(y as f64 - c);
            (r_out - sw as f64) <= d && d < r_out
        }
        TemplateShape::LBracket => {
            let vertical = inside(x, m, m + sw) && inside(y, m, size - m);
            let horizontal = inside(y, size - m - sw, size - m) && inside(x, m, size - m - size / 4);
            vertical || horizontal
        }
        TemplateShape::Cross => {
            let h = size / 2;
            let vertical = inside(x, h - 1, h + 1) && inside(y, m, size - m);
            let horizontal = inside(y, h - 1, h + 1) && inside(x, m, size - m);
            vertical || horizontal
        }
    }
}

/// Dark 2-pixel strokes on a light square of side `size`, hard edged.
pub fn render_template(shape: TemplateShape, size: usize) -> Result<Image> {
    if size < MIN_TEMPLATE_SIZE {
        return Err(Error::InvalidParameter(format!("template size must be at least {MIN_TEMPLATE_SIZE}, got {size}")));
    }
    Image::from_fn(size, size, |x, y| if in_shape(shape, size, x, y) { STROKE } else { GROUND })
}

/// Pose with the angle in degrees, as written in JSON documents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDeg {
    pub x: f64,
    pub y: f64,
    pub theta_deg: f64,
}

impl PoseDeg {
    pub fn to_pose(&self) -> Pose {
        Pose::from_degrees(self.x, self.y, self.theta_deg)
    }

    pub fn from_pose(pose: &Pose) -> Self {
        Self { x: pose.ux, y: pose.uy, theta_deg: pose.theta_deg() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
}

/// Flat rectangle painted over the scene, `[x, x+w) × [y, y+h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occluder {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub fill: f64,
}

impl Occluder {
    fn contains(&self, px: i64, py: i64) -> bool {
        px >= self.x as i64 && py >= self.y as i64 && px < (self.x + self.w) as i64 && py < (self.y + self.h) as i64
    }
}

/// `v ← gain · (v/255)^gamma · 255 + bias`; with `gamma == 1` exactly
/// `gain · v + bias`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Illumination {
    pub gain: f64,
    pub bias: f64,
    pub gamma: f64,
}

impl Default for Illumination {
    fn default() -> Self {
        Self { gain: 1.0, bias: 0.0, gamma: 1.0 }
    }
}

impl Illumination {
    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        if self.gamma == 1.0 {
            self.gain * v + self.bias
        } else {
            self.gain * (v / 255.0).powf(self.gamma) * 255.0 + self.bias
        }
    }
}

/// Recipe for one synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub canvas: Canvas,
    pub template_id: TemplateShape,
    pub template_size: usize,
    /// Where the template's center lands, and its rotation.
    pub true_pose: PoseDeg,
    pub clutter_segments: usize,
    pub clutter_seed: u64,
    pub occluder: Option<Occluder>,
    pub illumination: Illumination,
    pub noise_sigma: f64,
    pub noise_seed: u64,
}

impl SceneSpec {
    /// Clean scene: no clutter, occluder or noise, neutral lighting.
    pub fn clean(
        width: usize,
        height: usize,
        template_id: TemplateShape,
        template_size: usize,
        true_pose: PoseDeg,
    ) -> Self {
        Self {
            canvas: Canvas { width, height },
            template_id,
            template_size,
            true_pose,
            clutter_segments: 0,
            clutter_seed: 0,
            occluder: None,
            illumination: Illumination::default(),
            noise_sigma: 0.0,
            noise_seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("scene spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene spec serializes")
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.canvas.width < 3 || self.canvas.height < 3 {
            return bad(format!("canvas {}x{} is too small", self.canvas.width, self.canvas.height));
        }
        let il = &self.illumination;
        if !(il.gain > 0.0 && il.gain.is_finite()) {
            return bad(format!("gain must be positive, got {}", il.gain));
        }
        if !(il.gamma > 0.0 && il.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", il.gamma));
        }
        if !il.bias.is_finite() {
            return bad("bias must be finite".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        let p = &self.true_pose;
        if !(p.x.is_finite() && p.y.is_finite() && p.theta_deg.is_finite()) {
            return bad("true_pose must be finite".into());
        }
        if let Some(o) = &self.occluder {
            if !o.fill.is_finite() {
                return bad("occluder fill must be finite".into());
            }
        }
        Ok(())
    }
}

/// What a composed scene contains.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Template center placement and rotation.
    pub pose: Pose,
    /// Fraction of template edge pixels under the occluder.
    pub occluded_fraction: f64,
    pub template: Image,
}

#[derive(Serialize)]
struct GroundTruthDoc {
    pose: PoseDeg,
    occluded_fraction: f64,
}

impl GroundTruth {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GroundTruthDoc {
            pose: PoseDeg::from_pose(&self.pose),
            occluded_fraction: self.occluded_fraction,
        })
        .expect("ground truth serializes")
    }

    /// Pose a search should report for `model` (extracted from the level-0
    /// template): searches place the model centroid, which sits off the
    /// template center for asymmetric shapes.
    pub fn expected_pose(&self, model: &EdgeModel) -> Pose {
        let c = template_center(&self.template);
        let (mx, my) = model.centroid_abs();
        let (ox, oy) = self.pose.rotation().apply((mx - c.0, my - c.1));
        Pose::new(self.pose.ux + ox, self.pose.uy + oy, self.pose.theta)
    }
}

fn template_center(template: &Image) -> (f64, f64) {
    ((template.width() as f64 - 1.0) / 2.0, (template.height() as f64 - 1.0) / 2.0)
}

fn draw_segment(canvas: &mut Image, rng: &mut SplitMix64) {
    let (w, h) = (canvas.width(), canvas.height());
    let x0 = rng.next_f64() * w as f64;
    let y0 = rng.next_f64() * h as f64;
    let x1 = rng.next_f64() * w as f64;
    let y1 = rng.next_f64() * h as f64;
    let value = rng.next_f64() * 255.0;
    let width = 1 + rng.next_u64() % 2;
    let (dx, dy) = (x1 - x0, y1 - y0);
    let samples = dx.abs().max(dy.abs()).ceil() as usize + 1;
    let mostly_horizontal = dx.abs() >= dy.abs();
    let data = canvas.data_mut();
    let mut put = |x: i64, y: i64| {
        if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
            data[y as usize * w + x as usize] = value;
        }
    };
    for i in 0..samples {
        let t = if samples > 1 { i as f64 / (samples - 1) as f64 } else { 0.0 };
        let (px, py) = (round_half_up(x0 + t * dx), round_half_up(y0 + t * dy));
        put(px, py);
        if width == 2 {
            if mostly_horizontal {
                put(px, py + 1);
            } else {
                put(px + 1, py);
            }
        }
    }
}

/// Pixels whose value differs from an in-bounds 4-neighbor.
fn template_edge_pixels(template: &Image) -> Vec<(usize, usize)> {
    let (w, h) = (template.width(), template.height());
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = template.get(x, y);
            let differs = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)]
                .iter()
                .any(|&(ox, oy)| template.get_checked(x as i64 + ox, y as i64 + oy).is_some_and(|n| n != v));
            if differs {
                out.push((x, y));
            }
        }
    }
    out
}

/// Renders `spec` and reports its ground truth.
pub fn compose_scene(spec: &SceneSpec) -> Result<(Image, GroundTruth)> {
    spec.validate()?;
    let template = render_template(spec.template_id, spec.template_size)?;
    let pose = spec.true_pose.to_pose();
    let (w, h) = (spec.canvas.width, spec.canvas.height);
    let c = template_center(&template);
    let rot = pose.rotation();

    // rotated template square must fit inside the canvas
    let half = spec.template_size as f64 / 2.0;
    let corners = [(-half, -half), (half, -half), (half, half), (-half, half)];
    let placed: Vec<(f64, f64)> = corners.iter().map(|&p| pose.transform_point(p)).collect();
    let (min_x, max_x) = placed.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (min_y, max_y) = placed.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    if min_x < -0.5 || min_y < -0.5 || max_x > w as f64 - 0.5 || max_y > h as f64 - 0.5 {
        return Err(Error::Geometry(format!(
            "template spans x [{min_x:.1}, {max_x:.1}] y [{min_y:.1}, {max_y:.1}], outside the {w}x{h} canvas"
        )));
    }

    let mut canvas = Image::filled(w, h, GROUND)?;
    let mut rng = SplitMix64::new(spec.clutter_seed);
    for _ in 0..spec.clutter_segments {
        draw_segment(&mut canvas, &mut rng);
    }

    // nearest-neighbor stamp through the inverse rotation
    let inverse = Rotation::new(-pose.theta);
    let (tw, th) = (template.width() as i64, template.height() as i64);
    let x_range = (min_x.floor().max(0.0) as usize)..=(max_x.ceil() as usize).min(w - 1);
    let y_range = (min_y.floor().max(0.0) as usize)..=(max_y.ceil() as usize).min(h - 1);
    {
        let data = canvas.data_mut();
        for y in y_range {
            for x in x_range.clone() {
                let (rx, ry) = inverse.apply((x as f64 - pose.ux, y as f64 - pose.uy));
                let (tx, ty) = (round_half_up(rx + c.0), round_half_up(ry + c.1));
                if tx >= 0 && ty >= 0 && tx < tw && ty < th && template.get(tx as usize, ty as usize) == STROKE {
                    data[y * w + x] = STROKE;
                }
            }
        }
    }

    let edges = template_edge_pixels(&template);
    let mut occluded = 0usize;
    if let Some(o) = &spec.occluder {
        for &(tx, ty) in &edges {
            let (rx, ry) = rot.apply((tx as f64 - c.0, ty as f64 - c.1));
            if o.contains(round_half_up(rx + pose.ux), round_half_up(ry + pose.uy)) {
                occluded += 1;
            }
        }
        let data = canvas.data_mut();
        for y in o.y..(o.y + o.h).min(h) {
            for x in o.x..(o.x + o.w).min(w) {
                data[y * w + x] = o.fill;
            }
        }
    }

    let il = spec.illumination;
    let mut noise = SplitMix64::new(spec.noise_seed);
    let sigma = spec.noise_sigma;
    for v in canvas.data_mut() {
        *v = il.apply(*v);
        if sigma > 0.0 {
            *v += sigma * noise.next_gaussian();
        }
    }
    if let Some(i) = canvas.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("illumination produced a non-finite pixel at {i}")));
    }

    let occluded_fraction = if edges.is_empty() { 0.0 } else { occluded as f64 / edges.len() as f64 };
    Ok((canvas, GroundTruth { pose, occluded_fraction, template }))
}
