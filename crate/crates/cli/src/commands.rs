use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lumenlift_core::{
    dac, enhance, enhance_video_parallel, load_image, loe_report, mean_luma, save_image, synth, Error, FlickerMeter,
    ImageF32, LoeConfig, PipelineConfig,
};
use serde_json::{json, Value};

use crate::args::{Command, Variant};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag values; exit status 2.
    Usage(String),
    /// Everything else; exit status 1.
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match &err {
            Error::InvalidParams { field, reason } => CliError::Usage(format!("{}: {reason}", flag_for(field))),
            Error::TooManyLevels { .. } => CliError::Usage(format!("--levels: {err}")),
            _ => CliError::Runtime(err.to_string()),
        }
    }
}

fn flag_for(field: &str) -> String {
    match field {
        "pyramid_levels" => "--levels".into(),
        other => format!("--{}", other.replace('_', "-")),
    }
}

fn io_err(path: &Path, err: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {err}", path.display()))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn run(command: Command) -> Result<Value, CliError> {
    match command {
        Command::Enhance { input, output, pipeline } => {
            let config = pipeline.config();
            config.validate()?;
            single(&input, &output, |img| enhance(img, &config))
        }
        Command::Dac { input, output, alpha, gamma, denoise } => {
            let params = denoise.params();
            single(&input, &output, |img| dac(img, alpha, gamma, &params))
        }
        Command::Video { input, output, jobs, pipeline } => {
            let config = pipeline.config();
            config.validate()?;
            let jobs = jobs.map(|j| j as usize).unwrap_or_else(|| {
                std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
            });
            video(&input, &output, &config, jobs)
        }
        Command::Loe { original, enhanced, max_dim } => {
            let a = load_image(&original)?;
            let b = load_image(&enhanced)?;
            let config = LoeConfig { max_dim: max_dim as usize, ..LoeConfig::default() };
            let report = loe_report(&a, &b, &config)?;
            Ok(json!({ "loe": report.loe, "m": report.m }))
        }
        Command::Bench { resolution, iters, warmup, variant } => bench(resolution, iters, warmup, variant),
    }
}

fn single(input: &Path, output: &Path, op: impl Fn(&ImageF32) -> lumenlift_core::Result<ImageF32>) -> Result<Value, CliError> {
    let image = load_image(input)?;
    let start = Instant::now();
    let out = op(&image)?;
    let elapsed = elapsed_ms(start);
    save_image(&out, output)?;
    Ok(json!({
        "input_mean_luma": mean_luma(&image)?,
        "output_mean_luma": mean_luma(&out)?,
        "elapsed_ms": elapsed,
    }))
}

/// PNG files in `dir`, sorted by file name.
fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        let is_png = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(paths)
}

fn video(input: &Path, output: &Path, config: &PipelineConfig, jobs: usize) -> Result<Value, CliError> {
    let paths = frame_paths(input)?;
    if paths.is_empty() {
        return Err(CliError::Runtime(format!("{}: no PNG frames", input.display())));
    }
    fs::create_dir_all(output).map_err(|e| io_err(output, e))?;

    let start = Instant::now();
    let mut meter = FlickerMeter::new();
    let frames = paths.iter().map(load_image);
    let count = enhance_video_parallel(frames, config, jobs, |i, frame| {
        meter.push(&frame)?;
        let name = paths[i].file_name().expect("listed files have names");
        save_image(&frame, output.join(name))
    })?;
    let flicker = match meter.value() {
        Ok(v) => json!(v),
        Err(Error::TooFewFrames(_)) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    Ok(json!({
        "frames": count,
        "flicker_index": flicker,
        "elapsed_ms": elapsed_ms(start),
    }))
}

fn bench((w, h): (usize, usize), iters: u32, warmup: u32, variant: Variant) -> Result<Value, CliError> {
    let image = synth::uniform_noise(w, h, 0.25, 0);
    let config = PipelineConfig::default();
    let run = || -> lumenlift_core::Result<ImageF32> {
        match variant {
            Variant::Dac => dac(&image, lumenlift_core::pipeline::PREVIEW_ALPHA, config.gamma, &config.denoise),
            Variant::Full => enhance(&image, &config),
        }
    };
    for _ in 0..warmup {
        run()?;
    }
    let mut times = Vec::with_capacity(iters as usize);
    for _ in 0..iters {
        let start = Instant::now();
        std::hint::black_box(run()?);
        times.push(elapsed_ms(start));
    }
    let (median, p90) = summarize(&mut times);
    Ok(json!({
        "variant": variant.name(),
        "resolution": format!("{w}x{h}"),
        "median_ms": median,
        "p90_ms": p90,
    }))
}

/// Median and nearest-rank 90th percentile.
fn summarize(times: &mut [f64]) -> (f64, f64) {
    times.sort_by(f64::total_cmp);
    let n = times.len();
    let median = if n % 2 == 1 {
        times[n / 2]
    } else {
        (times[n / 2 - 1] + times[n / 2]) / 2.0
    };
    let rank = (0.9 * n as f64).ceil() as usize;
    (median, times[rank.saturating_sub(1)])
}
