use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lumenlift_core::pipeline::{ALPHA_MAX, GAMMA_MAX, PREVIEW_ALPHA};
use lumenlift_core::{NlmParams, PipelineConfig};

#[derive(Parser, Debug)]
#[command(name = "lumenlift", version, about = "Low-light image and video enhancement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Full pipeline: exposure sequence, fusion and denoising
    Enhance {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Fast preview: one adaptive chromaticity plus denoising
    Dac {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, allow_negative_numbers = true, default_value_t = PREVIEW_ALPHA, value_parser = parse_alpha)]
        alpha: f32,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.6, value_parser = parse_gamma)]
        gamma: f32,
        #[command(flatten)]
        denoise: DenoiseArgs,
    },
    /// Enhance every PNG frame in a directory
    Video {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Parallel frame workers (output does not depend on this)
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Lightness order error between an original and an enhanced image
    Loe {
        original: PathBuf,
        enhanced: PathBuf,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(2..))]
        max_dim: u32,
    },
    /// Time the pipeline on synthetic input
    Bench {
        #[arg(long, default_value = "1920x1080", value_parser = parse_resolution)]
        resolution: (usize, usize),
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        iters: u32,
        /// Untimed iterations run first
        #[arg(long, default_value_t = 1)]
        warmup: u32,
        #[arg(long, value_enum, default_value_t = Variant::Full)]
        variant: Variant,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Dac,
    Full,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Dac => "dac",
            Variant::Full => "full",
        }
    }
}

#[derive(Args, Debug)]
pub struct DenoiseArgs {
    /// Denoising strength; 0 disables it
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.7, value_parser = parse_th)]
    pub th: f32,
    /// Denoising bandwidth scale
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.5, value_parser = parse_lv)]
    pub lv: f32,
}

impl DenoiseArgs {
    pub fn params(&self) -> NlmParams {
        NlmParams::with_strength(self.th, self.lv)
    }
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',', default_value = "0.15,0.6,0.85", value_parser = parse_alpha)]
    pub alphas: Vec<f32>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.6, value_parser = parse_gamma)]
    pub gamma: f32,
    /// Pyramid levels
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub levels: u32,
    #[arg(long)]
    pub no_denoise: bool,
    #[command(flatten)]
    pub denoise: DenoiseArgs,
}

impl PipelineArgs {
    pub fn config(&self) -> PipelineConfig {
        PipelineConfig {
            alphas: self.alphas.clone(),
            gamma: self.gamma,
            pyramid_levels: self.levels as usize,
            denoise: self.denoise.params(),
            denoise_enabled: !self.no_denoise,
            ..PipelineConfig::default()
        }
    }
}

fn parse_f32(s: &str) -> Result<f32, String> {
    let v: f32 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn parse_alpha(s: &str) -> Result<f32, String> {
    let v = parse_f32(s)?;
    if (0.0..=ALPHA_MAX).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must be in [0, {ALPHA_MAX}]"))
    }
}

fn parse_gamma(s: &str) -> Result<f32, String> {
    let v = parse_f32(s)?;
    if v > 0.0 && v <= GAMMA_MAX {
        Ok(v)
    } else {
        Err(format!("must be in (0, {GAMMA_MAX}]"))
    }
}

fn parse_th(s: &str) -> Result<f32, String> {
    let v = parse_f32(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err("must be >= 0".into())
    }
}

fn parse_lv(s: &str) -> Result<f32, String> {
    let v = parse_f32(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("must be > 0".into())
    }
}

pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let w: usize = w.parse().map_err(|_| format!("bad width `{w}`"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height `{h}`"))?;
    if w == 0 || h == 0 {
        return Err("width and height must be positive".into());
    }
    Ok((w, h))
}
