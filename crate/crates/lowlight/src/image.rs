//! Real-valued image containers and 8-bit quantization.
//!
//! Every pipeline stage works on `f64` samples so precision is only spent
//! once, at output time. Rounding to 8-bit levels happens on save or through
//! [`quantize`], never implicitly.

use crate::error::{Error, Result};

/// Closed intensity interval `[min, max]` that integrated pixels must lie in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityRange {
    min: f64,
    max: f64,
}

impl IntensityRange {
    /// The standard 8-bit display range `[0, 255]`.
    pub const EIGHT_BIT: Self = Self {
        min: 0.0,
        max: 255.0,
    };

    /// Creates a range; both ends must be finite with `min < max`.
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidParam(
                "intensity range bounds must be finite".into(),
            ));
        }
        if min >= max {
            return Err(Error::InvalidParam(format!(
                "intensity range needs min < max, got {min}:{max}"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    /// Clamps `v` into the range.
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    /// True if `v` lies inside the closed interval.
    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

impl Default for IntensityRange {
    fn default() -> Self {
        Self::EIGHT_BIT
    }
}

/// Single-channel image of finite `f64` samples in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Wraps a row-major buffer. Dimensions must be positive, the length must
    /// be `width * height`, and every sample must be finite.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if data.len() != width * height {
            return Err(Error::BufferLength {
                expected: width * height,
                actual: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("image samples"));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image with every sample set to `value`.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::from_vec(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_vec(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Sample at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mutable samples. Callers must keep every value finite.
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Applies `f` to every sample; the results must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_vec(self.width, self.height, self.data.iter().map(|v| f(*v)).collect())
    }

    /// True when every sample lies inside `range`.
    pub fn within(&self, range: &IntensityRange) -> bool {
        self.data.iter().all(|v| range.contains(*v))
    }
}

/// Three-channel image with planar `f64` storage, row-major per plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    r: Vec<f64>,
    g: Vec<f64>,
    b: Vec<f64>,
}

impl RgbImage {
    /// Wraps three planes; each must satisfy the [`GrayImage`] buffer rules.
    pub fn from_planes(
        width: usize,
        height: usize,
        r: Vec<f64>,
        g: Vec<f64>,
        b: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        for plane in [&r, &g, &b] {
            if plane.len() != width * height {
                return Err(Error::BufferLength {
                    expected: width * height,
                    actual: plane.len(),
                });
            }
            if !plane.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("image samples"));
            }
        }
        Ok(Self {
            width,
            height,
            r,
            g,
            b,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Channel triple at column `x`, row `y`.
    pub fn rgb(&self, x: usize, y: usize) -> (f64, f64, f64) {
        debug_assert!(x < self.width && y < self.height);
        let i = y * self.width + x;
        (self.r[i], self.g[i], self.b[i])
    }

    pub fn planes(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.r, &self.g, &self.b)
    }
}

/// Clamps every sample into `range`, then rounds half away from zero.
///
/// Idempotent: quantizing a quantized image changes nothing.
pub fn quantize(img: &GrayImage, range: &IntensityRange) -> GrayImage {
    // f64::round is round-half-away-from-zero.
    img.map(|v| range.clamp(v).round())
        .expect("clamp and round keep samples finite")
}
