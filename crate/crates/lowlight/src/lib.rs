//! Gradient-domain low-light enhancement.
//!
//! The pipeline lifts detail out of dark regions in three steps: take
//! forward-difference gradients of the luminance plane, amplify samples
//! whose base pixel is dark, then solve a box-constrained least-squares
//! problem to integrate the amplified field back into an image that stays
//! inside the representable intensity range. Color images are processed on
//! the luma channel of a YCbCr decomposition so chroma passes through
//! untouched.

pub mod baseline;
pub mod color;
pub mod error;
pub mod gradient;
pub mod image;
pub mod integrate;
pub mod io;
pub mod pipeline;
pub mod testkit;

pub use error::{Error, Result};
pub use gradient::{
    compute_gradients, divergence, enhance_gradients, enhancement_gain, manipulate,
    EnhancementParams, GainMode, GradientField,
};
pub use image::{quantize, GrayImage, IntensityRange, RgbImage};
pub use integrate::{anchor, integrate, kkt_report, objective, KktReport, SolveReport, SolverConfig};
pub use pipeline::{enhance_color, enhance_color_with, enhance_gray, enhance_gray_with};
