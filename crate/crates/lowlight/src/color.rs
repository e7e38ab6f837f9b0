//! Full-range BT.601 luma/chroma split.
//!
//! Color images are enhanced on the luma plane only, so the conversion here
//! must invert exactly: the inverse below uses the reciprocal of the very
//! coefficients the forward direction multiplies by, which keeps a round
//! trip within f64 roundoff instead of the ~1e-3 error the usual rounded
//! constants (1.403, 1.773) would introduce. No clamping happens in either
//! direction; out-of-range values are the caller's to quantize at save time.

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage};

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;
const CB_SCALE: f64 = 0.564;
const CR_SCALE: f64 = 0.713;
const OFFSET: f64 = 128.0;

/// Luma plane plus offset chroma planes, planar row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct YccImage {
    width: usize,
    height: usize,
    y: Vec<f64>,
    cb: Vec<f64>,
    cr: Vec<f64>,
}

impl YccImage {
    /// Wraps three planes; each must be finite with `width * height` samples.
    pub fn from_planes(
        width: usize,
        height: usize,
        y: Vec<f64>,
        cb: Vec<f64>,
        cr: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        for plane in [&y, &cb, &cr] {
            if plane.len() != width * height {
                return Err(Error::BufferLength {
                    expected: width * height,
                    actual: plane.len(),
                });
            }
            if !plane.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("plane samples"));
            }
        }
        Ok(Self {
            width,
            height,
            y,
            cb,
            cr,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn planes(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.y, &self.cb, &self.cr)
    }

    /// The luma plane as a standalone image.
    pub fn luma(&self) -> GrayImage {
        GrayImage::from_vec(self.width, self.height, self.y.clone())
            .expect("luma plane is already validated")
    }

    /// Replaces the luma plane, keeping both chroma planes bit-identical.
    pub fn with_luma(mut self, luma: GrayImage) -> Result<Self> {
        if (luma.width(), luma.height()) != (self.width, self.height) {
            return Err(Error::DimensionMismatch {
                expected: (self.width, self.height),
                actual: (luma.width(), luma.height()),
            });
        }
        self.y = luma.as_slice().to_vec();
        Ok(self)
    }
}

/// Forward split: `Y = 0.299 R + 0.587 G + 0.114 B`, chroma offset by 128.
pub fn rgb_to_ycc(img: &RgbImage) -> YccImage {
    let (r, g, b) = img.planes();
    let n = r.len();
    let mut y = Vec::with_capacity(n);
    let mut cb = Vec::with_capacity(n);
    let mut cr = Vec::with_capacity(n);
    for i in 0..n {
        let luma = KR * r[i] + KG * g[i] + KB * b[i];
        y.push(luma);
        cb.push(OFFSET + CB_SCALE * (b[i] - luma));
        cr.push(OFFSET + CR_SCALE * (r[i] - luma));
    }
    YccImage {
        width: img.width(),
        height: img.height(),
        y,
        cb,
        cr,
    }
}

/// Exact inverse of [`rgb_to_ycc`]: recovers R and B from their chroma
/// definitions, then G from the luma definition.
pub fn ycc_to_rgb(img: &YccImage) -> Result<RgbImage> {
    let n = img.y.len();
    let mut r = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let y = img.y[i];
        let red = y + (img.cr[i] - OFFSET) / CR_SCALE;
        let blue = y + (img.cb[i] - OFFSET) / CB_SCALE;
        r.push(red);
        b.push(blue);
        g.push((y - KR * red - KB * blue) / KG);
    }
    RgbImage::from_planes(img.width, img.height, r, g, b)
}
