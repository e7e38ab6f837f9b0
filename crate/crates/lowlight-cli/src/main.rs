//! Batch front end for gradient-domain low-light enhancement.
//!
//! The default action reads one image, brightens it, writes the result, and
//! prints a single JSON line describing the run. The `verify` subcommand
//! re-derives the target gradient field from the original input and checks a
//! previously produced output for first-order optimality.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 verification
//! failure. A solver that stops on its sweep budget still exits 0; the
//! report carries `"converged": false` and a warning goes to stderr.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lowlight::baseline::{gain_map_enhance, histogram_equalize};
use lowlight::color::rgb_to_ycc;
use lowlight::io::{load_image, save_gray, save_rgb, LoadedImage};
use lowlight::{
    compute_gradients, enhance_color, enhance_gradients, enhance_gray, kkt_report,
    EnhancementParams, Error, GainMode, GrayImage, IntensityRange, SolveReport, SolverConfig,
};

#[derive(Parser)]
#[command(
    name = "enhance",
    version,
    about = "Brightens low-light images by amplifying dark-region gradients \
             and reintegrating within an intensity range",
    args_conflicts_with_subcommands = true,
    subcommand_negates_reqs = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    enhance: EnhanceArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Check a produced image against the optimality conditions of the
    /// constrained integration problem
    Verify(VerifyArgs),
}

#[derive(Args)]
struct EnhanceArgs {
    /// Input image (PNG, PGM, or PPM)
    #[arg(required = true, value_name = "INPUT")]
    input: Option<PathBuf>,

    /// Output image path; the extension picks the format
    #[arg(short, long, required = true, value_name = "OUTPUT")]
    output: Option<PathBuf>,

    /// Enhancement method
    #[arg(long, value_enum, default_value_t = MethodArg::Gradient)]
    method: MethodArg,

    #[command(flatten)]
    gain: GainArgs,

    /// Convergence threshold on the max-norm projected residual
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,

    /// Cap on relaxation sweeps
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,

    /// Over-relaxation factor, strictly between 0 and 2
    #[arg(long, default_value_t = 1.5)]
    omega: f64,

    /// Target mean intensity of the output (default: input luminance mean)
    #[arg(long)]
    anchor_mean: Option<f64>,

    /// Solver threads; more than one selects the red-black parallel sweep,
    /// which may differ from the sequential result within the tolerance
    #[arg(long, default_value_t = 1)]
    threads: usize,

    /// Append the JSON report line to this file as well as stdout
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// The original input image
    #[arg(value_name = "INPUT")]
    input: PathBuf,

    /// The enhanced image to check
    #[arg(value_name = "PRODUCED")]
    produced: PathBuf,

    #[command(flatten)]
    gain: GainArgs,

    /// Residual tolerance for the optimality check
    /// (default: 4.5 quantization steps of the range)
    #[arg(long)]
    tol: Option<f64>,
}

/// Knobs shared by enhancement and verification; they define the target
/// gradient field and the feasible box.
#[derive(Args)]
struct GainArgs {
    /// Gradient gain applied where intensity is zero
    #[arg(long, default_value_t = 15.0)]
    beta: f64,

    /// Intensity at and above which gradients pass through unchanged
    #[arg(long, default_value_t = 50.0)]
    tau: f64,

    /// Gain curve variant
    #[arg(long, value_enum, default_value_t = ModeArg::Continuous)]
    mode: ModeArg,

    /// Working intensity range as MIN:MAX
    #[arg(long, value_parser = parse_range, default_value = "0:255")]
    range: IntensityRange,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ModeArg {
    Continuous,
    Literal,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Gradient,
    Histeq,
    Gainmap,
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::Continuous => "continuous",
            ModeArg::Literal => "literal",
        }
    }
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Gradient => "gradient",
            MethodArg::Histeq => "histeq",
            MethodArg::Gainmap => "gainmap",
        }
    }
}

fn parse_range(s: &str) -> Result<IntensityRange, String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected MIN:MAX, got {s:?}"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("range minimum {lo:?} is not a number"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("range maximum {hi:?} is not a number"))?;
    IntensityRange::new(lo, hi).map_err(|e| e.to_string())
}

impl GainArgs {
    fn params(&self) -> Result<EnhancementParams, Error> {
        let mode = match self.mode {
            ModeArg::Continuous => GainMode::Continuous,
            ModeArg::Literal => GainMode::Literal,
        };
        Ok(EnhancementParams::new(self.beta, self.tau)?.with_mode(mode))
    }
}

/// One line of the machine-readable run report. The solver block is absent
/// for methods that do not integrate.
#[derive(Serialize)]
struct RunReport {
    input: String,
    output: String,
    method: &'static str,
    beta: f64,
    tau: f64,
    mode: &'static str,
    range: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweeps_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    wall_ms: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Some(Command::Verify(args)) => run_verify(&args),
        None => run_enhance(&cli.enhance),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Io { .. } | Error::Decode { .. } | Error::UnsupportedFormat { .. } => 2,
                _ => 1,
            })
        }
    }
}

/// Luminance plane of either layout, in raw byte units.
fn luma_of(img: &LoadedImage) -> GrayImage {
    match img {
        LoadedImage::Gray(g) => g.clone(),
        LoadedImage::Rgb(c) => rgb_to_ycc(c).luma(),
    }
}

fn run_enhance(args: &EnhanceArgs) -> Result<ExitCode, Error> {
    let input = args.input.as_deref().expect("clap enforces INPUT");
    let output = args.output.as_deref().expect("clap enforces --output");
    let params = args.gain.params()?;
    let range = args.gain.range;
    let cfg = SolverConfig {
        tol: args.tol,
        max_sweeps: args.max_sweeps,
        omega: args.omega,
        anchor_mean: args.anchor_mean,
        threads: args.threads,
    };
    cfg.validate()?;

    let started = Instant::now();
    let loaded = load_image(input)?;
    let solve: Option<SolveReport> = match args.method {
        MethodArg::Gradient => match &loaded {
            LoadedImage::Gray(img) => {
                let (out, rep) = enhance_gray(img, &params, &range, &cfg)?;
                save_gray(&out, &range, output)?;
                Some(rep)
            }
            LoadedImage::Rgb(img) => {
                let (out, rep) = enhance_color(img, &params, &range, &cfg)?;
                save_rgb(&out, &range, output)?;
                Some(rep)
            }
        },
        MethodArg::Histeq => {
            save_pointwise(&loaded, &range, output, |luma| {
                Ok(histogram_equalize(luma, &range))
            })?;
            None
        }
        MethodArg::Gainmap => {
            save_pointwise(&loaded, &range, output, |luma| {
                gain_map_enhance(luma, &params, &range)
            })?;
            None
        }
    };
    let wall_ms = u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX);

    let report = RunReport {
        input: input.display().to_string(),
        output: output.display().to_string(),
        method: args.method.name(),
        beta: args.gain.beta,
        tau: args.gain.tau,
        mode: args.gain.mode.name(),
        range: format!("{}:{}", range.min(), range.max()),
        sweeps_used: solve.as_ref().map(|r| r.sweeps_used),
        final_residual: solve.as_ref().map(|r| r.final_residual),
        objective: solve.as_ref().map(|r| r.objective),
        converged: solve.as_ref().map(|r| r.converged),
        wall_ms,
    };
    let line = serde_json::to_string(&report).expect("report fields all serialize");
    println!("{line}");
    if let Some(path) = &args.report {
        append_line(path, &line)?;
    }
    if let Some(rep) = &solve {
        if !rep.converged {
            eprintln!(
                "warning: stopped after {} sweeps with residual {} above tolerance {}",
                rep.sweeps_used, rep.final_residual, cfg.tol
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Runs a luminance-only transform and writes the result: gray images map
/// directly, color images keep their chrominance.
fn save_pointwise<F>(
    loaded: &LoadedImage,
    range: &IntensityRange,
    output: &std::path::Path,
    transform: F,
) -> Result<(), Error>
where
    F: FnOnce(&GrayImage) -> Result<GrayImage, Error>,
{
    match loaded {
        LoadedImage::Gray(img) => save_gray(&transform(img)?, range, output),
        LoadedImage::Rgb(img) => {
            let ycc = rgb_to_ycc(img);
            let luma = transform(&ycc.luma())?;
            let out = lowlight::color::ycc_to_rgb(&ycc.with_luma(luma)?)?;
            save_rgb(&out, range, output)
        }
    }
}

fn append_line(path: &std::path::Path, line: &str) -> Result<(), Error> {
    use std::io::Write;
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    writeln!(file, "{line}").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run_verify(args: &VerifyArgs) -> Result<ExitCode, Error> {
    let params = args.gain.params()?;
    let range = args.gain.range;
    let original = load_image(&args.input)?;
    let produced = load_image(&args.produced)?;
    if (produced.width(), produced.height()) != (original.width(), original.height()) {
        return Err(Error::DimensionMismatch {
            expected: (original.width(), original.height()),
            actual: (produced.width(), produced.height()),
        });
    }

    let base = luma_of(&original);
    let g = compute_gradients(&base);
    let q = enhance_gradients(&base, &g, &params)?;

    // Saved bytes encode the working range affinely; undo that map and snap
    // values that land a rounding error away from a bound back onto it, so
    // saturated pixels are classified as saturated.
    let bytes = luma_of(&produced);
    let u = if range == IntensityRange::EIGHT_BIT {
        bytes
    } else {
        let snap = 1e-9 * range.span();
        bytes
            .map(|b| {
                let v = range.min() + b * range.span() / 255.0;
                if (v - range.min()).abs() <= snap {
                    range.min()
                } else if (v - range.max()).abs() <= snap {
                    range.max()
                } else {
                    v
                }
            })
            .expect("affine remap keeps values finite")
    };

    // Quantization moves each pixel up to half a step, which shifts a
    // 4-neighbor residual by at most 4 steps; 4.5 leaves margin for the
    // solver's own tolerance.
    let tol = args.tol.unwrap_or(4.5 * range.span() / 255.0);
    let kkt = kkt_report(&u, &q, &range, tol);
    let total = u.as_slice().len();
    println!(
        "checked {total} pixels: {} interior, {} at lower bound, {} at upper bound",
        kkt.interior, kkt.at_lower, kkt.at_upper
    );
    println!(
        "violations: {} at tolerance {tol} (largest measure {})",
        kkt.violations, kkt.max_violation
    );
    if kkt.violations > 0 {
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
