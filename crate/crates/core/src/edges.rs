//! Sobel gradients and sparse oriented edge models.
//!
//! The template side of matching is an [`EdgeModel`]: thin, hysteresis
//! thresholded edge pixels with unit gradient directions, positioned relative
//! to their centroid. The search side is a dense [`GradientField`] that is
//! never thresholded.

use crate::error::{Error, Result};
use crate::image::Image;

/// Per-pixel Sobel gradient of an image. The outermost ring is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
    mag: Vec<f64>,
    /// `[gx, gy, mag]` per pixel; one cache line per window row when scoring.
    cells: Vec<[f64; 3]>,
}

impl GradientField {
    /// Field from explicit components; magnitudes are derived.
    pub fn from_components(width: usize, height: usize, gx: Vec<f64>, gy: Vec<f64>) -> Result<Self> {
        let n = width * height;
        if width == 0 || height == 0 || gx.len() != n || gy.len() != n {
            return Err(Error::InvalidParameter(format!("gradient components must have {width}x{height} entries")));
        }
        if gx.iter().chain(&gy).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite gradient component".into()));
        }
        let mag: Vec<f64> = gx.iter().zip(&gy).map(|(x, y)| (x * x + y * y).sqrt()).collect();
        let cells = (0..n).map(|i| [gx[i], gy[i], mag[i]]).collect();
        Ok(Self { width, height, gx, gy, mag, cells })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn gx(&self) -> &[f64] {
        &self.gx
    }

    pub fn gy(&self) -> &[f64] {
        &self.gy
    }

    pub fn mag(&self) -> &[f64] {
        &self.mag
    }

    #[inline]
    pub(crate) fn cells(&self) -> &[[f64; 3]] {
        &self.cells
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64, f64) {
        let i = y * self.width + x;
        (self.gx[i], self.gy[i], self.mag[i])
    }

    pub fn max_magnitude(&self) -> f64 {
        self.mag.iter().copied().fold(0.0, f64::max)
    }
}

/// 3x3 Sobel, unnormalized integer weights, y pointing down.
pub fn compute_gradients(image: &Image) -> Result<GradientField> {
    let (w, h) = (image.width(), image.height());
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall { width: w, height: h, min: 3 });
    }
    let p = image.data();
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 1..h - 1 {
        let (up, mid, down) = ((y - 1) * w, y * w, (y + 1) * w);
        for x in 1..w - 1 {
            let right = p[up + x + 1] + 2.0 * p[mid + x + 1] + p[down + x + 1];
            let left = p[up + x - 1] + 2.0 * p[mid + x - 1] + p[down + x - 1];
            let below = p[down + x - 1] + 2.0 * p[down + x] + p[down + x + 1];
            let above = p[up + x - 1] + 2.0 * p[up + x] + p[up + x + 1];
            gx[mid + x] = right - left;
            gy[mid + x] = below - above;
        }
    }
    GradientField::from_components(w, h, gx, gy)
}

/// One template edge pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    /// Position relative to the model centroid.
    pub x_rel: f64,
    pub y_rel: f64,
    /// Unit gradient direction.
    pub dx: f64,
    pub dy: f64,
    /// Gradient magnitude at the source pixel.
    pub mag: f64,
}

/// Dual gradient-magnitude thresholds for hysteresis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeThresholds {
    low: f64,
    high: f64,
}

impl EdgeThresholds {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high) {
            return Err(Error::InvalidParameter(format!(
                "edge thresholds need 0 <= low <= high, got low={low} high={high}"
            )));
        }
        Ok(Self { low, high })
    }

    /// `high = high_fraction * max_magnitude`, `low = 0.5 * high`.
    pub fn relative(max_magnitude: f64, high_fraction: f64) -> Result<Self> {
        let high = high_fraction * max_magnitude;
        Self::new(0.5 * high, high)
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }
}

/// Sparse oriented edge model of a template.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeModel {
    points: Vec<EdgePoint>,
    centroid_abs: (f64, f64),
    source_level: usize,
}

impl EdgeModel {
    /// Builds a model from absolute pixel positions and raw gradients,
    /// re-centering positions on their centroid. Points with zero or
    /// non-finite gradient are rejected.
    pub fn from_absolute(points: &[(f64, f64, f64, f64)], source_level: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyModel { max_magnitude: 0.0 });
        }
        let n = points.len() as f64;
        let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
        let mut out = Vec::with_capacity(points.len());
        for &(x, y, gx, gy) in points {
            let mag = (gx * gx + gy * gy).sqrt();
            if !(mag > 0.0 && mag.is_finite() && x.is_finite() && y.is_finite()) {
                return Err(Error::InvalidParameter(format!("edge point ({x}, {y}) needs a finite nonzero gradient")));
            }
            out.push(EdgePoint { x_rel: x - cx, y_rel: y - cy, dx: gx / mag, dy: gy / mag, mag });
        }
        Ok(Self { points: out, centroid_abs: (cx, cy), source_level })
    }

    pub fn points(&self) -> &[EdgePoint] {
        &self.points
    }

    /// Number of model points, the `n` normalizing the pose score.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Centroid of the edge pixels in source-image coordinates.
    pub fn centroid_abs(&self) -> (f64, f64) {
        self.centroid_abs
    }

    pub fn source_level(&self) -> usize {
        self.source_level
    }
}

/// Quantizes a gradient angle into one of four NMS bins (0°, 45°, 90°,
/// 135°). Boundary angles go to the lower bin index.
fn direction_bin(gx: f64, gy: f64) -> usize {
    let mut deg = gy.atan2(gx).to_degrees();
    if deg < 0.0 {
        deg += 180.0;
    }
    if deg >= 180.0 {
        deg -= 180.0;
    }
    bin_of_degrees(deg)
}

/// Bin of an angle in `[0, 180)` degrees.
fn bin_of_degrees(deg: f64) -> usize {
    if deg <= 22.5 || deg >= 157.5 {
        0
    } else if deg <= 67.5 {
        1
    } else if deg <= 112.5 {
        2
    } else {
        3
    }
}

/// Neighbor offset along the positive gradient direction for each bin.
const BIN_OFFSETS: [(i64, i64); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];

fn non_max_suppression(field: &GradientField) -> Vec<bool> {
    let (w, h) = (field.width as i64, field.height as i64);
    let mag_at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w || y >= h {
            0.0
        } else {
            field.mag[(y * w + x) as usize]
        }
    };
    let mut keep = vec![false; field.mag.len()];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            let m = field.mag[i];
            if m <= 0.0 {
                continue;
            }
            let (ox, oy) = BIN_OFFSETS[direction_bin(field.gx[i], field.gy[i])];
            // On a plateau of equal magnitudes across the gradient, the
            // pixel furthest along the gradient survives.
            keep[i] = m >= mag_at(x - ox, y - oy) && m > mag_at(x + ox, y + oy);
        }
    }
    keep
}

/// Extracts a thin edge model: 4-bin non-maximum suppression followed by
/// dual-threshold hysteresis over 8-connected NMS survivors.
pub fn extract_edge_model(field: &GradientField, thresholds: EdgeThresholds, level: usize) -> Result<EdgeModel> {
    let nms = non_max_suppression(field);
    let (w, h) = (field.width, field.height);
    let mut kept = vec![false; nms.len()];
    let mut stack = Vec::new();
    for (i, &survivor) in nms.iter().enumerate() {
        if survivor && field.mag[i] >= thresholds.high && !kept[i] {
            kept[i] = true;
            stack.push(i);
            while let Some(j) = stack.pop() {
                let (jx, jy) = ((j % w) as i64, (j / w) as i64);
                for ny in jy - 1..=jy + 1 {
                    for nx in jx - 1..=jx + 1 {
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let k = ny as usize * w + nx as usize;
                        if !kept[k] && nms[k] && field.mag[k] >= thresholds.low {
                            kept[k] = true;
                            stack.push(k);
                        }
                    }
                }
            }
        }
    }
    let points: Vec<_> = kept
        .iter()
        .enumerate()
        .filter(|(_, &k)| k)
        .map(|(i, _)| ((i % w) as f64, (i / w) as f64, field.gx[i], field.gy[i]))
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyModel { max_magnitude: field.max_magnitude() });
    }
    EdgeModel::from_absolute(&points, level)
}
