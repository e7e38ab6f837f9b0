//! End-to-end checks of the `enhance` binary: flag handling, exit codes,
//! report format, and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lowlight::io::{load_image, save_gray, LoadedImage};
use lowlight::testkit::{make_photo, Scene};
use lowlight::{GrayImage, IntensityRange};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enhance"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit signal")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().next().expect("one report line");
    serde_json::from_str(line).expect("report line parses as JSON")
}

fn write_photo(dir: &Path, name: &str, scene: Scene, w: usize, h: usize, seed: u64) -> PathBuf {
    let img = make_photo(scene, w, h, seed);
    let path = dir.join(name);
    save_gray(&img, &IntensityRange::EIGHT_BIT, &path).unwrap();
    path
}

fn load_gray(path: &Path) -> GrayImage {
    match load_image(path).unwrap() {
        LoadedImage::Gray(g) => g,
        LoadedImage::Rgb(_) => panic!("expected grayscale at {}", path.display()),
    }
}

#[test]
fn reruns_write_byte_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 40, 30, 5);
    let out_a = dir.path().join("a.png");
    let out_b = dir.path().join("b.png");
    let ra = run(&[input.to_str().unwrap(), "-o", out_a.to_str().unwrap()]);
    let rb = run(&[input.to_str().unwrap(), "-o", out_b.to_str().unwrap()]);
    assert_eq!(code(&ra), 0, "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(code(&rb), 0);
    let bytes_a = std::fs::read(&out_a).unwrap();
    let bytes_b = std::fs::read(&out_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "sequential runs must be reproducible");
}

#[test]
fn report_line_carries_the_run_description() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 24, 18, 9);
    let output = dir.path().join("out.png");
    let report_path = dir.path().join("runs.jsonl");
    let args = [
        input.to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ];
    let first = run(&args);
    assert_eq!(code(&first), 0);
    let v = stdout_json(&first);
    assert_eq!(v["method"], "gradient");
    assert_eq!(v["beta"], 15.0);
    assert_eq!(v["tau"], 50.0);
    assert_eq!(v["mode"], "continuous");
    assert_eq!(v["range"], "0:255");
    assert_eq!(v["converged"], true);
    assert!(v["sweeps_used"].is_u64());
    assert!(v["final_residual"].is_number());
    assert!(v["objective"].is_number());
    assert!(v["wall_ms"].is_u64());
    assert_eq!(v["input"], input.to_str().unwrap());
    assert_eq!(v["output"], output.to_str().unwrap());

    // a second run appends, leaving two parseable lines
    let second = run(&args);
    assert_eq!(code(&second), 0);
    let content = std::fs::read_to_string(&report_path).unwrap();
    let lines: Vec<&str> = content.lines().collect();
    assert_eq!(lines.len(), 2);
    for line in lines {
        let parsed: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(parsed["method"], "gradient");
    }
}

#[test]
fn unit_beta_reproduces_the_input_pixels() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.pgm", Scene::NightStreet, 32, 24, 3);
    let output = dir.path().join("out.pgm");
    let r = run(&[
        input.to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
        "--beta",
        "1",
    ]);
    assert_eq!(code(&r), 0);
    assert_eq!(
        load_gray(&output).as_slice(),
        load_gray(&input).as_slice(),
        "beta 1 must be an exact no-op"
    );
}

#[test]
fn histeq_runs_without_solver_fields_in_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 20, 16, 7);
    let output = dir.path().join("out.png");
    let r = run(&[
        input.to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
        "--method",
        "histeq",
    ]);
    assert_eq!(code(&r), 0);
    let v = stdout_json(&r);
    assert_eq!(v["method"], "histeq");
    assert!(v.get("sweeps_used").is_none(), "histeq does not integrate");
    assert!(v.get("final_residual").is_none());
    assert!(v.get("objective").is_none());
    assert!(v.get("converged").is_none());
    assert!(v["wall_ms"].is_u64());
}

#[test]
fn gainmap_method_brightens_pointwise() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 20, 16, 11);
    let output = dir.path().join("out.png");
    let r = run(&[
        input.to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
        "--method",
        "gainmap",
    ]);
    assert_eq!(code(&r), 0);
    let v = stdout_json(&r);
    assert_eq!(v["method"], "gainmap");
    assert!(v.get("converged").is_none());
    let before = load_gray(&input);
    let after = load_gray(&output);
    assert!(after.mean() > before.mean(), "dark photo must brighten");
}

#[test]
fn custom_range_is_echoed_and_respected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 16, 12, 13);
    let output = dir.path().join("out.png");
    let r = run(&[
        input.to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
        "--range",
        "10:200",
        "--tol",
        "0.01",
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let v = stdout_json(&r);
    assert_eq!(v["range"], "10:200");
    assert!(load_gray(&output).within(&IntensityRange::EIGHT_BIT));
}

#[test]
fn usage_errors_exit_one() {
    let no_args = run(&[]);
    assert_eq!(code(&no_args), 1);

    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 8, 8, 1);
    let out = dir.path().join("o.png");

    let bad_flag = run(&[input.to_str().unwrap(), "-o", out.to_str().unwrap(), "--nope"]);
    assert_eq!(code(&bad_flag), 1);

    let bad_range = run(&[
        input.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--range",
        "255",
    ]);
    assert_eq!(code(&bad_range), 1);

    let bad_omega = run(&[
        input.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--omega",
        "2.5",
    ]);
    assert_eq!(code(&bad_omega), 1);

    let bad_beta = run(&[
        input.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--beta",
        "0.5",
    ]);
    assert_eq!(code(&bad_beta), 1);
}

#[test]
fn io_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.png");
    let missing = run(&["/no/such/image.png", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&missing), 2);

    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 8, 8, 2);
    let unwritable = run(&[
        input.to_str().unwrap(),
        "-o",
        "/no/such/dir/out.png",
    ]);
    assert_eq!(code(&unwritable), 2);

    let bad_ext = run(&[
        input.to_str().unwrap(),
        "-o",
        dir.path().join("out.tiff").to_str().unwrap(),
    ]);
    assert_eq!(code(&bad_ext), 2);
}

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("--beta"));
    let version = run(&["--version"]);
    assert_eq!(code(&version), 0);
}

#[test]
fn verify_accepts_a_fresh_solver_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 32, 24, 17);
    let output = dir.path().join("out.png");
    let enhanced = run(&[input.to_str().unwrap(), "-o", output.to_str().unwrap()]);
    assert_eq!(code(&enhanced), 0);
    let verdict = run(&[
        "verify",
        input.to_str().unwrap(),
        output.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&verdict),
        0,
        "fresh output must verify: {}",
        String::from_utf8_lossy(&verdict.stdout)
    );
    let text = String::from_utf8_lossy(&verdict.stdout);
    assert!(text.contains("violations: 0"), "summary says: {text}");
}

#[test]
fn verify_rejects_mismatched_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 32, 24, 19);
    let output = dir.path().join("out.png");
    let enhanced = run(&[input.to_str().unwrap(), "-o", output.to_str().unwrap()]);
    assert_eq!(code(&enhanced), 0);
    let verdict = run(&[
        "verify",
        input.to_str().unwrap(),
        output.to_str().unwrap(),
        "--beta",
        "40",
    ]);
    assert_eq!(code(&verdict), 3, "wrong beta must fail verification");
}

#[test]
fn verify_rejects_a_pointwise_clipped_image() {
    // a gain-map output is brightened and clipped but never re-optimized,
    // so it cannot satisfy the integration optimality conditions
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::NightStreet, 32, 24, 23);
    let output = dir.path().join("out.png");
    let made = run(&[
        input.to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
        "--method",
        "gainmap",
    ]);
    assert_eq!(code(&made), 0);
    let verdict = run(&[
        "verify",
        input.to_str().unwrap(),
        output.to_str().unwrap(),
    ]);
    assert_eq!(code(&verdict), 3);
    let text = String::from_utf8_lossy(&verdict.stdout);
    assert!(!text.contains("violations: 0"), "summary says: {text}");
}

#[test]
fn verify_rejects_mismatched_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 16, 12, 29);
    let other = write_photo(dir.path(), "small.png", Scene::DimInterior, 8, 6, 29);
    let verdict = run(&[
        "verify",
        input.to_str().unwrap(),
        other.to_str().unwrap(),
    ]);
    assert_eq!(code(&verdict), 1, "shape mismatch is a usage error");
}

#[test]
fn parallel_solve_converges_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_photo(dir.path(), "in.png", Scene::DimInterior, 32, 24, 31);
    let output = dir.path().join("out.png");
    let r = run(&[
        input.to_str().unwrap(),
        "-o",
        output.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert_eq!(code(&r), 0);
    let v = stdout_json(&r);
    assert_eq!(v["converged"], true);
    assert!(load_gray(&output).within(&IntensityRange::EIGHT_BIT));
}

#[test]
fn color_input_round_trips_through_the_pipeline() {
    use lowlight::io::save_rgb;
    use lowlight::RgbImage;
    let dir = tempfile::tempdir().unwrap();
    // a dim color gradient: dark enough to engage the gain
    let (w, h) = (24, 18);
    let img = RgbImage::from_planes(
        w,
        h,
        (0..w * h).map(|i| (i % 40) as f64).collect(),
        (0..w * h).map(|i| ((i * 3) % 45) as f64).collect(),
        (0..w * h).map(|i| ((i * 7) % 50) as f64).collect(),
    )
    .unwrap();
    let input = dir.path().join("in.png");
    save_rgb(&img, &IntensityRange::EIGHT_BIT, &input).unwrap();
    let output = dir.path().join("out.png");
    let r = run(&[input.to_str().unwrap(), "-o", output.to_str().unwrap()]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    match load_image(&output).unwrap() {
        LoadedImage::Rgb(out) => {
            let (w2, h2) = (out.width(), out.height());
            assert_eq!((w2, h2), (w, h));
        }
        LoadedImage::Gray(_) => panic!("color in, color out"),
    }
    let v = stdout_json(&r);
    assert_eq!(v["converged"], true);
}
