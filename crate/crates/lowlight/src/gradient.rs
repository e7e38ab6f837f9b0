//! Forward-difference gradients and the dark-pixel amplification gain.
//!
//! The horizontal plane stores `gh(x, y) = f(x+1, y) - f(x, y)` and the
//! vertical plane `gv(x, y) = f(x, y+1) - f(x, y)`; a field derived from a
//! `width x height` image therefore has `height` rows of `width - 1`
//! horizontal samples and `height - 1` rows of `width` vertical samples,
//! with no padding. One-pixel-wide or -tall images just have an empty plane.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Forward-difference gradient planes of a `width x height` image.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    gh: Vec<f64>,
    gv: Vec<f64>,
}

impl GradientField {
    /// Wraps raw planes: `gh` must hold `height * (width - 1)` finite samples
    /// and `gv` `(height - 1) * width`.
    pub fn from_planes(width: usize, height: usize, gh: Vec<f64>, gv: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if gh.len() != height * (width - 1) {
            return Err(Error::BufferLength {
                expected: height * (width - 1),
                actual: gh.len(),
            });
        }
        if gv.len() != (height - 1) * width {
            return Err(Error::BufferLength {
                expected: (height - 1) * width,
                actual: gv.len(),
            });
        }
        if !gh.iter().chain(gv.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("gradient samples"));
        }
        Ok(Self {
            width,
            height,
            gh,
            gv,
        })
    }

    /// All-zero field for a `width x height` image.
    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        Ok(Self {
            width,
            height,
            gh: vec![0.0; height * (width - 1)],
            gv: vec![0.0; (height - 1) * width],
        })
    }

    /// Width of the originating image (not of the `gh` plane).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Horizontal sample between `(x, y)` and `(x+1, y)`; needs `x < width - 1`.
    pub fn gh(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x + 1 < self.width && y < self.height);
        self.gh[y * (self.width - 1) + x]
    }

    /// Vertical sample between `(x, y)` and `(x, y+1)`; needs `y < height - 1`.
    pub fn gv(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y + 1 < self.height);
        self.gv[y * self.width + x]
    }

    /// Raw `(gh, gv)` planes.
    pub fn planes(&self) -> (&[f64], &[f64]) {
        (&self.gh, &self.gv)
    }

    /// True when `other` describes an image of the same dimensions.
    pub fn same_shape(&self, other: &GradientField) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Selects how the gain tapers off at the dark threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    /// `(beta - 1)(1 - xi/tau)^2 + 1`: reaches exactly 1 at `tau` with zero
    /// slope, so the gain curve has no jump.
    Continuous,
    /// `(beta-1)/(2 tau^2) xi^2 - (beta-1)/tau xi + beta`: classic quadratic
    /// that still sits at `(beta + 1)/2` when `xi` reaches `tau`, then drops
    /// to 1 above it.
    Literal,
}

/// Gain curve parameters: maximum gain `beta` at intensity zero, threshold
/// `tau` above which gradients pass through unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnhancementParams {
    pub beta: f64,
    pub tau: f64,
    pub mode: GainMode,
}

impl EnhancementParams {
    /// Continuous-mode parameters; `beta >= 1` and `tau > 0`, both finite.
    pub fn new(beta: f64, tau: f64) -> Result<Self> {
        let p = Self {
            beta,
            tau,
            mode: GainMode::Continuous,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_mode(mut self, mode: GainMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < 1.0 {
            return Err(Error::InvalidParam(format!(
                "beta must be finite and >= 1, got {}",
                self.beta
            )));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "tau must be finite and > 0, got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

impl Default for EnhancementParams {
    fn default() -> Self {
        Self {
            beta: 15.0,
            tau: 50.0,
            mode: GainMode::Continuous,
        }
    }
}

/// Gain applied to a gradient sample whose base pixel has intensity `xi`.
///
/// Dark pixels get up to the full factor `beta` (exactly `beta` at zero); the
/// gain is 1 for every intensity above `tau`. Negative intensities clamp to
/// zero first. `p` must be valid per [`EnhancementParams::validate`].
pub fn enhancement_gain(xi: f64, p: &EnhancementParams) -> f64 {
    let xi = xi.max(0.0);
    if xi > p.tau {
        return 1.0;
    }
    match p.mode {
        GainMode::Continuous => {
            let t = 1.0 - xi / p.tau;
            (p.beta - 1.0) * t * t + 1.0
        }
        GainMode::Literal => {
            // written in t = xi/tau so the value at tau is exactly (beta+1)/2
            let t = xi / p.tau;
            (p.beta - 1.0) * (0.5 * t * t - t) + p.beta
        }
    }
}

/// Forward differences of `img`.
pub fn compute_gradients(img: &GrayImage) -> GradientField {
    let (w, h) = (img.width(), img.height());
    let f = img.as_slice();
    let mut gh = Vec::with_capacity(h * (w - 1));
    let mut gv = Vec::with_capacity((h - 1) * w);
    for y in 0..h {
        let row = y * w;
        for x in 0..w - 1 {
            gh.push(f[row + x + 1] - f[row + x]);
        }
    }
    for y in 0..h - 1 {
        let row = y * w;
        for x in 0..w {
            gv.push(f[row + w + x] - f[row + x]);
        }
    }
    GradientField {
        width: w,
        height: h,
        gh,
        gv,
    }
}

/// Negative adjoint of [`compute_gradients`]: backward differences with zero
/// contribution beyond the border, so `<Du, q> = -<u, divergence(q)>` holds
/// for every image `u` and field `q` (up to roundoff).
pub fn divergence(g: &GradientField) -> GrayImage {
    let (w, h) = (g.width, g.height);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let row = y * w;
        let ghrow = y * (w - 1);
        for x in 0..w {
            let mut d = 0.0;
            if x + 1 < w {
                d += g.gh[ghrow + x];
            }
            if x > 0 {
                d -= g.gh[ghrow + x - 1];
            }
            if y + 1 < h {
                d += g.gv[row + x];
            }
            if y > 0 {
                d -= g.gv[row - w + x];
            }
            out[row + x] = d;
        }
    }
    GrayImage::from_vec(w, h, out).expect("divergence of a finite field is finite")
}

/// Scales every gradient sample by the gain of its base pixel `f(x, y)`.
pub fn enhance_gradients(
    img: &GrayImage,
    g: &GradientField,
    p: &EnhancementParams,
) -> Result<GradientField> {
    p.validate()?;
    if img.width() != g.width || img.height() != g.height {
        return Err(Error::DimensionMismatch {
            expected: (g.width, g.height),
            actual: (img.width(), img.height()),
        });
    }
    let (w, h) = (g.width, g.height);
    let f = img.as_slice();
    let mut qh = Vec::with_capacity(g.gh.len());
    let mut qv = Vec::with_capacity(g.gv.len());
    for y in 0..h {
        let row = y * w;
        let ghrow = y * (w - 1);
        for x in 0..w - 1 {
            qh.push(g.gh[ghrow + x] * enhancement_gain(f[row + x], p));
        }
    }
    for y in 0..h - 1 {
        let row = y * w;
        for x in 0..w {
            qv.push(g.gv[row + x] * enhancement_gain(f[row + x], p));
        }
    }
    GradientField::from_planes(w, h, qh, qv)
}

/// Applies a caller-supplied transform to the field and checks that it kept
/// the shape. Pass `|g| g` for the identity.
pub fn manipulate<F>(g: GradientField, hook: F) -> Result<GradientField>
where
    F: FnOnce(GradientField) -> GradientField,
{
    let (w, h) = (g.width, g.height);
    let out = hook(g);
    if out.width != w || out.height != h {
        return Err(Error::DimensionMismatch {
            expected: (w, h),
            actual: (out.width, out.height),
        });
    }
    Ok(out)
}
