//! Grayscale raster, Netpbm I/O and box-filter pyramids.
//!
//! Pixels are `f64` luminance. Inputs are 8-bit, but synthetic illumination
//! transforms produce values outside `[0, 255]` and must survive unclamped;
//! clamping only happens when writing files.

use crate::error::{Error, Result};

/// Smallest width/height allowed for any level above the base of a pyramid.
pub const MIN_PYRAMID_DIM: usize = 8;

/// Owned row-major grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("dimensions must be positive, got {width}x{height}")));
        }
        let needed = width.checked_mul(height).ok_or_else(|| Error::InvalidImage("dimensions overflow".into()))?;
        if data.len() != needed {
            return Err(Error::InvalidImage(format!(
                "expected {needed} samples for {width}x{height}, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidImage(format!("non-finite sample at index {i}")));
        }
        Ok(Self { width, height, data })
    }

    /// Image with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel value, or `None` outside the raster.
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> Option<f64> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            None
        } else {
            Some(self.data[y as usize * self.width + x as usize])
        }
    }

    /// Applies `f` to every pixel. Non-finite results are rejected.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Stack of images, index 0 at full resolution, each level half the previous.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    levels: Vec<Image>,
}

impl Pyramid {
    pub fn levels(&self) -> &[Image] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> Option<&Image> {
        self.levels.get(index)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Coarsest level.
    pub fn top(&self) -> &Image {
        self.levels.last().expect("pyramid is never empty")
    }
}

/// Halves both dimensions with a 2x2 box mean. An odd trailing row or
/// column is dropped.
pub fn downsample(image: &Image) -> Result<Image> {
    if image.width < 2 || image.height < 2 {
        return Err(Error::ImageTooSmall { width: image.width, height: image.height, min: 2 });
    }
    let (w, h) = (image.width / 2, image.height / 2);
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let r0 = &image.data[(2 * y) * image.width..];
        let r1 = &image.data[(2 * y + 1) * image.width..];
        for x in 0..w {
            // pairwise so that a constant block sums exactly
            let sum = (r0[2 * x] + r0[2 * x + 1]) + (r1[2 * x] + r1[2 * x + 1]);
            data.push(sum * 0.25);
        }
    }
    Image::new(w, h, data)
}

/// Number of levels `image` supports while every level above the base
/// stays at least [`MIN_PYRAMID_DIM`] on both axes.
pub fn max_pyramid_levels(width: usize, height: usize) -> usize {
    let (mut w, mut h, mut levels) = (width, height, 1);
    while w / 2 >= MIN_PYRAMID_DIM && h / 2 >= MIN_PYRAMID_DIM {
        w /= 2;
        h /= 2;
        levels += 1;
    }
    levels
}

pub fn build_pyramid(image: &Image, num_levels: usize) -> Result<Pyramid> {
    if num_levels == 0 {
        return Err(Error::InvalidParameter("pyramid needs at least one level".into()));
    }
    let max_levels = max_pyramid_levels(image.width, image.height);
    if num_levels > max_levels {
        return Err(Error::PyramidDepth { requested: num_levels, max_levels });
    }
    let mut levels = Vec::with_capacity(num_levels);
    levels.push(image.clone());
    for _ in 1..num_levels {
        let next = downsample(levels.last().unwrap())?;
        levels.push(next);
    }
    Ok(Pyramid { levels })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Parse { offset: self.pos, reason: reason.into() }
    }

    /// Skips whitespace and `#` comments.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn unsigned(&mut self, what: &str) -> Result<u64> {
        self.skip_separators();
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u64::from(b - b'0')))
                .ok_or_else(|| self.err(format!("{what} overflows")))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(if self.pos >= self.bytes.len() {
                self.err(format!("truncated: expected {what}"))
            } else {
                self.err(format!("expected {what}, found byte 0x{:02x}", self.bytes[self.pos]))
            });
        }
        Ok(value)
    }
}

/// Parses a plain (`P2`) or binary (`P5`) graymap with maxval <= 255.
/// Sample values are taken as-is, without rescaling by maxval.
pub fn load_pgm(bytes: &[u8]) -> Result<Image> {
    let mut cur = Cursor { bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some(m) => return Err(cur.err(format!("unsupported magic {:?}", String::from_utf8_lossy(m)))),
        None => return Err(cur.err("truncated: missing magic")),
    };
    cur.pos = 2;
    if !bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(cur.err("expected whitespace after magic"));
    }
    let width = cur.unsigned("width")? as usize;
    let height = cur.unsigned("height")? as usize;
    if width == 0 || height == 0 {
        return Err(cur.err(format!("zero dimension {width}x{height}")));
    }
    cur.skip_separators();
    let maxval_offset = cur.pos;
    let maxval = cur.unsigned("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse { offset: maxval_offset, reason: format!("unsupported maxval {maxval}") });
    }
    let count = width.checked_mul(height).ok_or_else(|| cur.err("dimensions overflow"))?;
    let mut data = Vec::with_capacity(count);
    if binary {
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            Some(_) => return Err(cur.err("expected single whitespace before raster")),
            None => return Err(cur.err("truncated: missing raster")),
        }
        let raster = &bytes[cur.pos..];
        if raster.len() < count {
            return Err(Error::Parse {
                offset: bytes.len(),
                reason: format!("truncated raster: expected {count} bytes, found {}", raster.len()),
            });
        }
        for (i, &b) in raster[..count].iter().enumerate() {
            if u64::from(b) > maxval {
                return Err(Error::Parse {
                    offset: cur.pos + i,
                    reason: format!("sample {b} exceeds maxval {maxval}"),
                });
            }
            data.push(f64::from(b));
        }
    } else {
        for _ in 0..count {
            let offset = {
                cur.skip_separators();
                cur.pos
            };
            let v = cur.unsigned("sample")?;
            if v > maxval {
                return Err(Error::Parse { offset, reason: format!("sample {v} exceeds maxval {maxval}") });
            }
            data.push(v as f64);
        }
    }
    Image::new(width, height, data)
}

#[inline]
fn to_byte(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Binary `P5` graymap, values clamped to `[0, 255]` and rounded half-up.
pub fn save_pgm(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(image.data.iter().map(|&v| to_byte(v)));
    out
}

/// Binary `P6` pixmap: the image as gray RGB with `overlay` pixels painted
/// in `color`. Out-of-bounds overlay points are skipped.
pub fn save_ppm(image: &Image, overlay: &[(i64, i64)], color: [u8; 3]) -> Vec<u8> {
    let mut rgb: Vec<u8> = image.data.iter().flat_map(|&v| [to_byte(v); 3]).collect();
    for &(x, y) in overlay {
        if x >= 0 && y >= 0 && (x as usize) < image.width && (y as usize) < image.height {
            let i = 3 * (y as usize * image.width + x as usize);
            rgb[i..i + 3].copy_from_slice(&color);
        }
    }
    let mut out = format!("P6\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(rgb);
    out
}
