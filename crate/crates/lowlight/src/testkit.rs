//! Deterministic fixtures and an independent reference solver for tests.
//!
//! Everything here exists to check the production solver from the outside:
//! the reference solver shares no code with it (different update rule,
//! different gradient accumulation, different stopping rule), the instance
//! generators are seeded so failures replay exactly, and the synthetic
//! photos give the end-to-end path realistic low-light statistics without
//! shipping binary fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gradient::{compute_gradients, GradientField};
use crate::image::{quantize, GrayImage, IntensityRange};

/// Hard cap on reference-solver problem size; projected gradient descent is
/// far too slow beyond toy shapes and silently accepting bigger inputs would
/// just hang a test.
const ORACLE_MAX_SIDE: usize = 16;
const ORACLE_MAX_ITERS: usize = 200_000;

/// Energy and its gradient in one pass over the edges, accumulated per
/// endpoint. Kept deliberately separate from the production solver's
/// neighbor bookkeeping.
fn energy_and_gradient(
    u: &[f64],
    w: usize,
    h: usize,
    qh: &[f64],
    qv: &[f64],
    grad: &mut [f64],
) -> f64 {
    grad.fill(0.0);
    let mut e = 0.0;
    for y in 0..h {
        let row = y * w;
        let hrow = y * (w - 1);
        for x in 0..w - 1 {
            let d = u[row + x + 1] - u[row + x] - qh[hrow + x];
            e += d * d;
            grad[row + x + 1] += 2.0 * d;
            grad[row + x] -= 2.0 * d;
        }
    }
    for y in 0..h - 1 {
        let row = y * w;
        for x in 0..w {
            let d = u[row + w + x] - u[row + x] - qv[row + x];
            e += d * d;
            grad[row + w + x] += 2.0 * d;
            grad[row + x] -= 2.0 * d;
        }
    }
    e
}

/// Reference solution of the box-constrained integration problem by plain
/// projected gradient descent.
///
/// The step size 1/16 is safe because each pixel touches at most 4 edges and
/// each edge couples 2 pixels, bounding the curvature by 2 * 2 * 4 = 16.
/// Iterates until the energy moves less than 1e-12 per step. Returns the
/// solution and its energy.
///
/// Panics when either side exceeds 16 pixels.
pub fn qp_oracle(q: &GradientField, range: &IntensityRange) -> (GrayImage, f64) {
    let (w, h) = (q.width(), q.height());
    assert!(
        w <= ORACLE_MAX_SIDE && h <= ORACLE_MAX_SIDE,
        "reference solver is restricted to {ORACLE_MAX_SIDE}x{ORACLE_MAX_SIDE}, got {w}x{h}"
    );
    let (qh, qv) = q.planes();
    let mid = range.clamp((range.min() + range.max()) / 2.0);
    let mut u = vec![mid; w * h];
    let mut grad = vec![0.0; w * h];
    let step = 1.0 / 16.0;
    let mut prev = f64::INFINITY;
    let mut energy = energy_and_gradient(&u, w, h, qh, qv, &mut grad);
    for _ in 0..ORACLE_MAX_ITERS {
        if (prev - energy).abs() < 1e-12 {
            break;
        }
        for i in 0..u.len() {
            u[i] = range.clamp(u[i] - step * grad[i]);
        }
        prev = energy;
        energy = energy_and_gradient(&u, w, h, qh, qv, &mut grad);
    }
    let img = GrayImage::from_vec(w, h, u).expect("projected iterates are finite");
    (img, energy)
}

/// Exact antiderivative of an integrable field: pins the top-left pixel to
/// zero, walks the first row by the horizontal samples, then each later row
/// by the vertical ones. Only meaningful when the field came from an image;
/// for such a field the result equals that image minus its top-left value.
pub fn path_integrate(q: &GradientField) -> GrayImage {
    let (w, h) = (q.width(), q.height());
    let (qh, qv) = q.planes();
    let mut u = vec![0.0; w * h];
    for x in 1..w {
        u[x] = u[x - 1] + qh[x - 1];
    }
    for y in 1..h {
        let row = y * w;
        for x in 0..w {
            u[row + x] = u[row - w + x] + qv[row - w + x];
        }
    }
    GrayImage::from_vec(w, h, u).expect("finite samples sum to finite paths")
}

/// Flavors of generated solver instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    /// Field taken from a random 8-bit image, so an exact feasible
    /// antiderivative exists and the optimum has zero energy.
    Integrable,
    /// Independent uniform samples in [-64, 64]; generally not integrable.
    Random,
    /// Integrable field scaled so its antiderivative spans 330 intensity
    /// levels, forcing the box constraints to bite.
    Saturating,
}

/// Seeded random image plus a field of the requested flavor. The image is
/// always a plain random 8-bit picture, handy as a warm start.
pub fn make_instance(
    seed: u64,
    width: usize,
    height: usize,
    kind: InstanceKind,
) -> (GrayImage, GradientField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_image = |rng: &mut ChaCha8Rng| {
        GrayImage::from_vec(
            width,
            height,
            (0..width * height)
                .map(|_| rng.gen_range(0..=255u32) as f64)
                .collect(),
        )
        .expect("generated samples are finite bytes")
    };
    match kind {
        InstanceKind::Integrable => {
            let img = draw_image(&mut rng);
            let q = compute_gradients(&img);
            (img, q)
        }
        InstanceKind::Random => {
            let img = draw_image(&mut rng);
            let gh: Vec<f64> = (0..height * (width - 1))
                .map(|_| rng.gen_range(-64.0..=64.0))
                .collect();
            let gv: Vec<f64> = (0..(height - 1) * width)
                .map(|_| rng.gen_range(-64.0..=64.0))
                .collect();
            let q = GradientField::from_planes(width, height, gh, gv)
                .expect("generated planes have the right lengths");
            (img, q)
        }
        InstanceKind::Saturating => {
            let mut img = draw_image(&mut rng);
            if width * height == 1 {
                // a single pixel has no differences to scale
                let q = compute_gradients(&img);
                return (img, q);
            }
            // redraw until the image has contrast; one draw all but surely does
            while img.max_value() - img.min_value() < 128.0 {
                img = draw_image(&mut rng);
            }
            let scale = 330.0 / (img.max_value() - img.min_value());
            let g = compute_gradients(&img);
            let (gh, gv) = g.planes();
            let q = GradientField::from_planes(
                width,
                height,
                gh.iter().map(|v| v * scale).collect(),
                gv.iter().map(|v| v * scale).collect(),
            )
            .expect("scaling keeps plane lengths");
            (img, q)
        }
    }
}

/// Synthetic low-light scenes for end-to-end runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scene {
    /// A dim room lit by one lamp: dark gradient base, bright local pool,
    /// furniture-scale albedo patches.
    DimInterior,
    /// A night street: near-black sky, moon, two lit pools on the ground,
    /// building silhouettes with a few lit windows.
    NightStreet,
}

struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.x0 && u < self.x1 && v >= self.y0 && v < self.y1
    }
}

// interior furniture, in unit coordinates
const SOFA: Rect = Rect { x0: 0.08, x1: 0.36, y0: 0.55, y1: 0.93 };
const TABLE: Rect = Rect { x0: 0.44, x1: 0.60, y0: 0.60, y1: 0.88 };
const FRAME: Rect = Rect { x0: 0.05, x1: 0.30, y0: 0.10, y1: 0.38 };
const DOOR: Rect = Rect { x0: 0.36, x1: 0.42, y0: 0.10, y1: 0.90 };

// street-scene building silhouettes
const BUILDING_A: Rect = Rect { x0: 0.06, x1: 0.26, y0: 0.15, y1: 0.45 };
const BUILDING_B: Rect = Rect { x0: 0.62, x1: 0.80, y0: 0.10, y1: 0.45 };

fn gaussian(du: f64, dv: f64, sx: f64, sy: f64) -> f64 {
    (-(du * du) / (2.0 * sx * sx) - (dv * dv) / (2.0 * sy * sy)).exp()
}

/// Renders a deterministic 8-bit test photograph. Most pixels are well
/// below intensity 50 with gentle texture; a few regions are bright enough
/// to saturate once gradients are amplified, which is exactly the regime
/// the enhancement pipeline is for.
pub fn make_photo(scene: Scene, width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let aspect = width as f64 / height as f64;
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let u = if width > 1 { x as f64 / (width - 1) as f64 } else { 0.5 };
            let v = if height > 1 { y as f64 / (height - 1) as f64 } else { 0.5 };
            let noise = rng.gen_range(-1.5..=1.5);
            let val = match scene {
                Scene::DimInterior => {
                    let base = 9.0 + 9.0 * v;
                    let du = (u - 0.76) * aspect;
                    let dv = v - 0.30;
                    let lamp = 225.0 * gaussian(du, dv, 0.16, 0.16);
                    let glow = 30.0 * gaussian(du, dv, 0.42, 0.42);
                    let albedo = if SOFA.contains(u, v) {
                        2.4
                    } else if TABLE.contains(u, v) {
                        0.55
                    } else if FRAME.contains(u, v) {
                        1.7
                    } else if DOOR.contains(u, v) {
                        1.25
                    } else {
                        1.0
                    };
                    albedo * (base + glow) + lamp + noise
                }
                Scene::NightStreet => {
                    let sky = 3.0 + 9.0 * ((0.45 - v).max(0.0) / 0.45);
                    let street = if v > 0.45 {
                        9.0 + 18.0 * (v - 0.45) / 0.55
                    } else {
                        0.0
                    };
                    let moon = 175.0 * gaussian((u - 0.20) * aspect, v - 0.12, 0.035, 0.035);
                    let pool1 = 185.0 * gaussian((u - 0.55) * aspect, v - 0.72, 0.05, 0.10);
                    let pool2 = 120.0 * gaussian((u - 0.85) * aspect, v - 0.80, 0.04, 0.08);
                    let mut val = sky + street + moon + pool1 + pool2;
                    if BUILDING_A.contains(u, v) || BUILDING_B.contains(u, v) {
                        val = if BUILDING_A.contains(u, v) { 14.0 } else { 10.0 };
                        let lit = (u * 40.0 * std::f64::consts::PI).sin() > 0.55
                            && (v * 25.0 * std::f64::consts::PI).sin() > 0.50;
                        if lit {
                            val = 90.0;
                        }
                    }
                    val + noise
                }
            };
            data.push(val);
        }
    }
    let img = GrayImage::from_vec(width, height, data).expect("scene values are finite");
    quantize(&img, &IntensityRange::EIGHT_BIT)
}

/// Mean over pixels strictly below `threshold`, or `None` if there are none.
pub fn dark_mean(img: &GrayImage, threshold: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for &v in img.as_slice() {
        if v < threshold {
            sum += v;
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}
