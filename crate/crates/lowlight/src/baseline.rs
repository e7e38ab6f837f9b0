//! Pointwise comparison methods: histogram equalization and a direct
//! intensity gain map. Neither touches gradients; they exist so the
//! gradient-domain path has something classical to be compared against.

use crate::error::Result;
use crate::gradient::{enhancement_gain, EnhancementParams};
use crate::image::{GrayImage, IntensityRange};

/// Classic histogram equalization over 256 levels of `range`.
///
/// Samples are binned by the same clamp-and-round rule used at save time,
/// then remapped through the normalized cumulative histogram
/// `lut[k] = round(255 * (cdf[k] - cdf_min) / (n - cdf_min))` and placed back
/// into `range`. The lowest occupied bin lands on the range minimum and the
/// highest on the maximum. An image that is constant after binning has no
/// contrast to stretch and comes back unchanged.
pub fn histogram_equalize(img: &GrayImage, range: &IntensityRange) -> GrayImage {
    let bin_of = |v: f64| -> usize {
        let t = (range.clamp(v) - range.min()) * 255.0 / range.span();
        t.round() as usize
    };
    let mut hist = [0usize; 256];
    for &v in img.as_slice() {
        hist[bin_of(v)] += 1;
    }
    let n = img.as_slice().len();
    let cdf_min = hist.iter().copied().find(|&c| c > 0).unwrap_or(0);
    if cdf_min == n {
        return img.clone();
    }
    let mut lut = [0.0f64; 256];
    let mut cdf = 0usize;
    for k in 0..256 {
        cdf += hist[k];
        // saturating: bins below the first occupied one are never looked up
        let level = (255.0 * cdf.saturating_sub(cdf_min) as f64 / (n - cdf_min) as f64).round();
        lut[k] = range.min() + level * range.span() / 255.0;
    }
    img.map(|v| lut[bin_of(v)])
        .expect("lut values stay inside the finite range")
}

/// Pointwise brightening: every pixel is multiplied by its own gain and
/// clamped into `range`. Shares the gain curve with the gradient path but
/// amplifies intensities instead of differences, so it lifts dark regions
/// without regard for detail.
pub fn gain_map_enhance(
    img: &GrayImage,
    params: &EnhancementParams,
    range: &IntensityRange,
) -> Result<GrayImage> {
    params.validate()?;
    img.map(|v| range.clamp(v * enhancement_gain(v, params)))
}
