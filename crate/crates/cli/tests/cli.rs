use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lumenlift_core::{
    adaptive_chromaticity, decode_image, encode_png, load_image, mean_luma, save_image, AcParams, ImageF32,
};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lumenlift"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn summary(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "{text}");
    serde_json::from_str(&text).unwrap()
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../testdata/dark").join(name)
}

fn golden(name: &str, key: &str) -> f64 {
    let text = std::fs::read_to_string(data("golden.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    v[name][key].as_f64().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn enhance_writes_brighter_png() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.png");
    let input = data("dusk_64x64.png");
    let sum = summary(&run(&["enhance", "-i", s(&input), "-o", s(&out_path)]));
    for key in ["input_mean_luma", "output_mean_luma", "elapsed_ms"] {
        assert!(sum[key].is_number(), "{key}");
    }
    assert!(sum["output_mean_luma"].as_f64() > sum["input_mean_luma"].as_f64());
    let written = mean_luma(&load_image(&out_path).unwrap()).unwrap();
    let expect = golden("dusk_64x64.png", "enhance_png_mean_luma");
    assert!((written - expect).abs() <= 1e-4, "{written} vs {expect}");
}

#[test]
fn enhance_missing_input_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["enhance", "-i", s(&dir.path().join("missing.png")), "-o", s(&dir.path().join("o.png"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn invalid_flags_are_usage_errors_naming_the_flag() {
    let input = data("dusk_64x64.png");
    let cases: [(&[&str], &str); 5] = [
        (&["--gamma", "0"], "--gamma"),
        (&["--alphas", "0.1,4"], "--alphas"),
        (&["--th", "-0.5"], "--th"),
        (&["--lv", "0"], "--lv"),
        (&["--levels", "9"], "--levels"),
    ];
    for (extra, flag) in cases {
        let mut args = vec!["enhance", "-i", s(&input), "-o", "/nonexistent/out.png"];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{extra:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(flag), "{extra:?}: {err}");
    }
    assert_eq!(run(&["enhance", "--frobnicate"]).status.code(), Some(2));
}

#[test]
fn dac_paper_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.png");
    let input = data("cellar_128x96.png");
    let sum = summary(&run(&["dac", "-i", s(&input), "-o", s(&out_path), "--alpha", "0.25", "--gamma", "0.6"]));
    assert!(sum["output_mean_luma"].as_f64() > sum["input_mean_luma"].as_f64());
    let written = mean_luma(&load_image(&out_path).unwrap()).unwrap();
    let expect = golden("cellar_128x96.png", "preview_png_mean_luma");
    assert!((written - expect).abs() <= 1e-4, "{written} vs {expect}");
}

#[test]
fn dac_without_denoise_is_pure_ac() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.png");
    let input = data("hallway_96x64.png");
    summary(&run(&["dac", "-i", s(&input), "-o", s(&out_path), "--th", "0"]));
    let ac = adaptive_chromaticity(&load_image(&input).unwrap(), &AcParams::new(0.25, 0.6)).unwrap();
    let expect = decode_image(&encode_png(&ac).unwrap()).unwrap();
    assert_eq!(load_image(&out_path).unwrap(), expect);
}

fn write_frames(dir: &Path, frames: &[ImageF32]) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, f) in frames.iter().enumerate() {
        save_image(f, dir.join(format!("frame_{i:03}.png"))).unwrap();
    }
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn video_static_frames() {
    let dir = tempfile::tempdir().unwrap();
    let frame = load_image(data("dusk_64x64.png")).unwrap();
    write_frames(&dir.path().join("in"), &vec![frame; 3]);
    std::fs::write(dir.path().join("in/notes.txt"), "not a frame").unwrap();
    let out_dir = dir.path().join("out");
    let sum = summary(&run(&["video", "-i", s(&dir.path().join("in")), "-o", s(&out_dir)]));
    assert_eq!(sum["frames"], 3);
    assert_eq!(sum["flicker_index"].as_f64(), Some(0.0));
    let files = dir_bytes(&out_dir);
    assert_eq!(files.len(), 3);
    assert_eq!(files[0].0, "frame_000.png");
    assert!(files.windows(2).all(|w| w[0].1 == w[1].1));
}

#[test]
fn video_jobs_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let frames: Vec<_> = (0..5).map(|i| lumenlift_core::synth::dark_scene(48, 32, i)).collect();
    write_frames(&dir.path().join("in"), &frames);
    let input = dir.path().join("in");
    let one = dir.path().join("one");
    let eight = dir.path().join("eight");
    summary(&run(&["video", "-i", s(&input), "-o", s(&one), "--jobs", "1"]));
    let sum = summary(&run(&["video", "-i", s(&input), "-o", s(&eight), "--jobs", "8"]));
    assert!(sum["flicker_index"].as_f64().unwrap() > 0.0);
    assert_eq!(dir_bytes(&one), dir_bytes(&eight));
}

#[test]
fn video_single_frame_has_null_flicker() {
    let dir = tempfile::tempdir().unwrap();
    write_frames(&dir.path().join("in"), &[lumenlift_core::synth::dark_scene(32, 32, 1)]);
    let sum = summary(&run(&["video", "-i", s(&dir.path().join("in")), "-o", s(&dir.path().join("out"))]));
    assert_eq!(sum["frames"], 1);
    assert!(sum["flicker_index"].is_null());
}

#[test]
fn video_failures() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = run(&["video", "-i", s(&empty), "-o", s(&dir.path().join("o1"))]);
    assert_eq!(out.status.code(), Some(1));

    let drift = dir.path().join("drift");
    write_frames(&drift, &[ImageF32::filled(32, 32, 3, 0.1), ImageF32::filled(32, 24, 3, 0.1)]);
    let out = run(&["video", "-i", s(&drift), "-o", s(&dir.path().join("o2"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frame 1"));
}

#[test]
fn loe_command() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("porch_75x101.png");
    let sum = summary(&run(&["loe", s(&input), s(&input)]));
    assert_eq!(sum["loe"].as_f64(), Some(0.0));

    // 20x20 gray image with 400 distinct levels needs 16-bit precision; use a
    // 16x16 gray ramp of 256 distinct 8-bit values instead
    let levels: Vec<f32> = (0..256).map(|i| ((i * 97) % 256) as f32 / 255.0).collect();
    let img = ImageF32::new(16, 16, 1, levels).unwrap().to_rgb();
    let inv = img.map(|v| 1.0 - v);
    let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    save_image(&img, &a).unwrap();
    save_image(&inv, &b).unwrap();
    let sum = summary(&run(&["loe", s(&a), s(&b)]));
    assert_eq!(sum["m"], 256);
    assert_eq!(sum["loe"].as_f64(), Some(255.0));

    let small = dir.path().join("small.png");
    save_image(&ImageF32::filled(8, 8, 3, 0.2), &small).unwrap();
    assert_eq!(run(&["loe", s(&a), s(&small)]).status.code(), Some(1));
}

#[test]
fn bench_command() {
    let sum = summary(&run(&["bench", "--resolution", "160x120", "--variant", "dac", "--iters", "3"]));
    assert_eq!(sum["variant"], "dac");
    assert_eq!(sum["resolution"], "160x120");
    assert!(sum["median_ms"].as_f64().unwrap() > 0.0);
    assert!(sum["p90_ms"].as_f64() >= sum["median_ms"].as_f64());

    let out = run(&["bench", "--resolution", "0x0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--resolution"));
}
