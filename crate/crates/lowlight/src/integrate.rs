//! Box-constrained least-squares integration of a gradient field.
//!
//! Given a target field `q`, find the image `u` inside the intensity range
//! that minimizes the energy `sum (Du - q)^2`, where `D` takes forward
//! differences. The solver is a projected Gauss-Seidel / successive
//! over-relaxation scheme: each pixel is relaxed toward the average its
//! neighbors vote for and clamped back into the range immediately, so every
//! iterate is feasible.
//!
//! Shifting every pixel by a constant leaves the energy unchanged, which
//! makes the unconstrained minimizer a one-parameter family. When a caller
//! asks for a mean level via `anchor_mean`, the converged solution is shifted
//! toward that mean as far as the range allows.

use crate::error::{Error, Result};
use crate::gradient::GradientField;
use crate::image::{GrayImage, IntensityRange};

/// Residual passes cost a full image scan, so they run only every 16 sweeps.
const CHECK_EVERY: usize = 16;

/// Stopping and relaxation parameters for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on the max-norm projected residual.
    pub tol: f64,
    /// Hard cap on relaxation sweeps.
    pub max_sweeps: usize,
    /// Over-relaxation factor, must lie in (0, 2).
    pub omega: f64,
    /// Mean intensity to shift the converged solution toward, if any.
    pub anchor_mean: Option<f64>,
    /// Worker threads; above 1 the solver switches to a red-black sweep
    /// whose two half-passes update independent pixels in parallel.
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_sweeps: 10_000,
            omega: 1.5,
            anchor_mean: None,
            threads: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tol.is_finite() || self.tol < 0.0 {
            return Err(Error::InvalidParam(format!(
                "tol must be finite and >= 0, got {}",
                self.tol
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidParam("max_sweeps must be >= 1".into()));
        }
        if !self.omega.is_finite() || self.omega <= 0.0 || self.omega >= 2.0 {
            return Err(Error::InvalidParam(format!(
                "omega must lie strictly inside (0, 2), got {}",
                self.omega
            )));
        }
        if let Some(m) = self.anchor_mean {
            if !m.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "anchor mean must be finite, got {m}"
                )));
            }
        }
        if self.threads == 0 {
            return Err(Error::InvalidParam("threads must be >= 1".into()));
        }
        Ok(())
    }
}

/// What the solver did and where it stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Relaxation sweeps actually performed.
    pub sweeps_used: usize,
    /// Max-norm projected residual at the last check.
    pub final_residual: f64,
    /// Energy `sum (Du - q)^2` of the returned image.
    pub objective: f64,
    /// True when the residual dropped to `tol` within the sweep budget.
    pub converged: bool,
}

/// First-order optimality of `u` split by which pixels sit on a bound.
///
/// With `r` the half-gradient of the energy, an optimal interior pixel has
/// `r = 0`, a pixel at the lower bound has `r >= 0` (the energy would only
/// grow by moving it up) and a pixel at the upper bound has `r <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// Signed residual `r` of every pixel, as an image.
    pub residuals: GrayImage,
    pub interior: usize,
    pub at_lower: usize,
    pub at_upper: usize,
    /// Pixels whose optimality measure exceeds the tolerance.
    pub violations: usize,
    /// Largest optimality measure over all pixels.
    pub max_violation: f64,
}

/// Neighbor vote for pixel `(x, y)`: `s` accumulates, for each existing
/// neighbor, its current value corrected by the field sample on the shared
/// edge, and `n` counts the neighbors. The pixel's residual is `n*u - s`.
#[inline]
fn neighbor_vote(
    u: &[f64],
    w: usize,
    h: usize,
    qh: &[f64],
    qv: &[f64],
    x: usize,
    y: usize,
) -> (f64, usize) {
    let i = y * w + x;
    let hrow = y * (w - 1);
    let mut s = 0.0;
    let mut n = 0usize;
    if x > 0 {
        s += u[i - 1] + qh[hrow + x - 1];
        n += 1;
    }
    if x + 1 < w {
        s += u[i + 1] - qh[hrow + x];
        n += 1;
    }
    if y > 0 {
        s += u[i - w] + qv[i - w];
        n += 1;
    }
    if y + 1 < h {
        s += u[i + w] - qv[i];
        n += 1;
    }
    (s, n)
}

#[inline]
fn relax_pixel(
    u: &mut [f64],
    w: usize,
    h: usize,
    qh: &[f64],
    qv: &[f64],
    range: &IntensityRange,
    omega: f64,
    x: usize,
    y: usize,
) {
    let (s, n) = neighbor_vote(u, w, h, qh, qv, x, y);
    if n == 0 {
        return;
    }
    let i = y * w + x;
    let target = s / n as f64;
    u[i] = range.clamp(u[i] + omega * (target - u[i]));
}

fn sweep_lex(
    u: &mut [f64],
    w: usize,
    h: usize,
    qh: &[f64],
    qv: &[f64],
    range: &IntensityRange,
    omega: f64,
) {
    for y in 0..h {
        for x in 0..w {
            relax_pixel(u, w, h, qh, qv, range, omega, x, y);
        }
    }
}

/// Raw pointer the red-black phases share. Each phase writes only pixels of
/// one parity and reads only the other parity, so writes never alias reads
/// or each other.
struct SharedPlane(*mut f64);
unsafe impl Sync for SharedPlane {}

#[allow(clippy::too_many_arguments)]
fn sweep_red_black(
    u: &mut [f64],
    w: usize,
    h: usize,
    qh: &[f64],
    qv: &[f64],
    range: &IntensityRange,
    omega: f64,
) {
    use rayon::prelude::*;
    let plane = SharedPlane(u.as_mut_ptr());
    let len = u.len();
    for parity in 0..2usize {
        let plane = &plane;
        (0..h).into_par_iter().for_each(move |y| {
            // Writes within one phase hit disjoint, same-parity pixels.
            let view = unsafe { std::slice::from_raw_parts_mut(plane.0, len) };
            let mut x = (parity + y) % 2;
            while x < w {
                relax_pixel(view, w, h, qh, qv, range, omega, x, y);
                x += 2;
            }
        });
    }
}

fn max_projected_residual(
    u: &[f64],
    w: usize,
    h: usize,
    qh: &[f64],
    qv: &[f64],
    range: &IntensityRange,
) -> f64 {
    let mut worst = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            let (s, n) = neighbor_vote(u, w, h, qh, qv, x, y);
            let i = y * w + x;
            let r = n as f64 * u[i] - s;
            let step = u[i] - range.clamp(u[i] - r);
            worst = worst.max(step.abs());
        }
    }
    worst
}

/// Energy `sum (Du - q)^2` of image `u` against field `q`.
///
/// Panics if `q` was not derived from an image of `u`'s dimensions.
pub fn objective(u: &GrayImage, q: &GradientField) -> f64 {
    assert_eq!(
        (u.width(), u.height()),
        (q.width(), q.height()),
        "objective needs matching shapes"
    );
    let (w, h) = (u.width(), u.height());
    let f = u.as_slice();
    let (qh, qv) = q.planes();
    let mut e = 0.0;
    for y in 0..h {
        let row = y * w;
        let hrow = y * (w - 1);
        for x in 0..w - 1 {
            let d = f[row + x + 1] - f[row + x] - qh[hrow + x];
            e += d * d;
        }
    }
    for y in 0..h - 1 {
        let row = y * w;
        for x in 0..w {
            let d = f[row + w + x] - f[row + x] - qv[row + x];
            e += d * d;
        }
    }
    e
}

/// Shifts every pixel by one constant so the mean lands as close to
/// `target_mean` as the range permits, then returns the shift. The image
/// must already be inside `range`; it stays inside.
pub fn anchor(img: &mut GrayImage, range: &IntensityRange, target_mean: f64) -> f64 {
    let mean = img.mean();
    let lo = range.min() - img.min_value();
    let hi = range.max() - img.max_value();
    // max/min instead of clamp: roundoff may leave lo a hair above hi
    let c = (target_mean - mean).max(lo).min(hi);
    for v in img.data_mut() {
        *v = range.clamp(*v + c);
    }
    c
}

/// First-order optimality report for `u` against field `q`. Pixels count as
/// on-bound only when they equal the bound exactly, which the solver and
/// [`anchor`] guarantee for every pixel they saturate.
///
/// Panics if shapes differ.
pub fn kkt_report(u: &GrayImage, q: &GradientField, range: &IntensityRange, tol: f64) -> KktReport {
    assert_eq!(
        (u.width(), u.height()),
        (q.width(), q.height()),
        "kkt_report needs matching shapes"
    );
    let (w, h) = (u.width(), u.height());
    let f = u.as_slice();
    let (qh, qv) = q.planes();
    let mut residuals = vec![0.0; w * h];
    let (mut interior, mut at_lower, mut at_upper, mut violations) = (0, 0, 0, 0);
    let mut max_violation = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            let (s, n) = neighbor_vote(f, w, h, qh, qv, x, y);
            let i = y * w + x;
            let r = n as f64 * f[i] - s;
            residuals[i] = r;
            let measure = if f[i] == range.min() {
                at_lower += 1;
                (-r).max(0.0)
            } else if f[i] == range.max() {
                at_upper += 1;
                r.max(0.0)
            } else {
                interior += 1;
                r.abs()
            };
            if measure > tol {
                violations += 1;
            }
            max_violation = max_violation.max(measure);
        }
    }
    KktReport {
        residuals: GrayImage::from_vec(w, h, residuals).expect("residuals of a finite image"),
        interior,
        at_lower,
        at_upper,
        violations,
        max_violation,
    }
}

/// Integrates field `q` into an image constrained to `range`.
///
/// `init` seeds the iteration (it is clamped into the range first); when
/// absent the start is a constant plane at the anchor mean, or at the middle
/// of the range if no anchor was requested. The residual is checked before
/// the first sweep, so a start that is already optimal returns untouched
/// with zero sweeps.
pub fn integrate(
    q: &GradientField,
    range: &IntensityRange,
    cfg: &SolverConfig,
    init: Option<&GrayImage>,
) -> Result<(GrayImage, SolveReport)> {
    cfg.validate()?;
    let (w, h) = (q.width(), q.height());
    let mut u: Vec<f64> = match init {
        Some(img) => {
            if (img.width(), img.height()) != (w, h) {
                return Err(Error::DimensionMismatch {
                    expected: (w, h),
                    actual: (img.width(), img.height()),
                });
            }
            img.as_slice().iter().map(|v| range.clamp(*v)).collect()
        }
        None => {
            let level = cfg
                .anchor_mean
                .unwrap_or_else(|| (range.min() + range.max()) / 2.0);
            vec![range.clamp(level); w * h]
        }
    };
    let (qh, qv) = q.planes();

    let pool = if cfg.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let run = |u: &mut Vec<f64>| -> (usize, f64, bool) {
        let mut sweeps = 0usize;
        let mut residual = max_projected_residual(u, w, h, qh, qv, range);
        let mut converged = residual <= cfg.tol;
        while !converged && sweeps < cfg.max_sweeps {
            let batch = CHECK_EVERY.min(cfg.max_sweeps - sweeps);
            for _ in 0..batch {
                if cfg.threads > 1 {
                    sweep_red_black(u, w, h, qh, qv, range, cfg.omega);
                } else {
                    sweep_lex(u, w, h, qh, qv, range, cfg.omega);
                }
            }
            sweeps += batch;
            residual = max_projected_residual(u, w, h, qh, qv, range);
            converged = residual <= cfg.tol;
        }
        (sweeps, residual, converged)
    };

    let (sweeps, residual, converged) = match &pool {
        Some(p) => p.install(|| run(&mut u)),
        None => run(&mut u),
    };

    let mut out = GrayImage::from_vec(w, h, u).expect("iterates stay clamped and finite");
    if let Some(target) = cfg.anchor_mean {
        anchor(&mut out, range, target);
    }
    let report = SolveReport {
        sweeps_used: sweeps,
        final_residual: residual,
        objective: objective(&out, q),
        converged,
    };
    Ok((out, report))
}
