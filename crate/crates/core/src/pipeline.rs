//! End-to-end enhancement.
//!
//! `enhance` generates a virtual exposure sequence (one adaptive chromaticity per
//! alpha), fuses it with quality-weighted pyramid blending, and denoises the result
//! once. `dac` is the fast preview path: a single adaptive chromaticity followed by
//! denoising. Videos are enhanced frame by frame with one shared configuration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chroma::{adaptive_chromaticity, AcParams, DEFAULT_H};
use crate::denoise::{nlm_denoise, NlmParams};
use crate::error::{Error, Result};
use crate::fusion::{fuse, fusion_weights, QualityExponents};
use crate::imgcore::ImageF32;

pub const ALPHA_MAX: f32 = 3.5;
pub const GAMMA_MAX: f32 = 1.5;
pub const RECOMMENDED_ALPHA: (f32, f32) = (0.1, 3.5);
pub const RECOMMENDED_GAMMA: (f32, f32) = (0.6, 1.0);
/// Single-exposure alpha used by the preview path.
pub const PREVIEW_ALPHA: f32 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub alphas: Vec<f32>,
    pub gamma: f32,
    pub h: f32,
    pub pyramid_levels: usize,
    pub exponents: QualityExponents,
    pub denoise: NlmParams,
    pub denoise_enabled: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.15, 0.6, 0.85],
            gamma: 0.6,
            h: DEFAULT_H,
            pyramid_levels: 4,
            exponents: QualityExponents::default(),
            denoise: NlmParams::default(),
            denoise_enabled: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::invalid("alphas", "need at least one exposure"));
        }
        for &a in &self.alphas {
            if !a.is_finite() || !(0.0..=ALPHA_MAX).contains(&a) {
                return Err(Error::invalid("alphas", format!("{a} outside [0, {ALPHA_MAX}]")));
            }
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 || self.gamma > GAMMA_MAX {
            return Err(Error::invalid("gamma", format!("{} outside (0, {GAMMA_MAX}]", self.gamma)));
        }
        if self.pyramid_levels < 1 {
            return Err(Error::invalid("pyramid_levels", "must be >= 1"));
        }
        if !self.h.is_finite() || self.h <= 0.0 {
            return Err(Error::invalid("h", format!("must be > 0, got {}", self.h)));
        }
        self.exponents.validate()?;
        self.denoise.validate()
    }

    /// Values that are valid but outside the empirically recommended ranges.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for &a in &self.alphas {
            if a < RECOMMENDED_ALPHA.0 || a > RECOMMENDED_ALPHA.1 {
                out.push(format!(
                    "alpha {a} outside recommended range [{}, {}]",
                    RECOMMENDED_ALPHA.0, RECOMMENDED_ALPHA.1
                ));
            }
        }
        if self.gamma < RECOMMENDED_GAMMA.0 || self.gamma > RECOMMENDED_GAMMA.1 {
            out.push(format!(
                "gamma {} outside recommended range [{}, {}]",
                self.gamma, RECOMMENDED_GAMMA.0, RECOMMENDED_GAMMA.1
            ));
        }
        out
    }

    fn ac_params(&self, alpha: f32) -> AcParams {
        AcParams {
            alpha,
            gamma: self.gamma,
            h: self.h,
        }
    }
}

/// Exposures `E_k`, one per configured alpha, in configuration order.
#[derive(Clone, Debug)]
pub struct ExposureSequence {
    exposures: Vec<ImageF32>,
}

impl ExposureSequence {
    pub fn exposures(&self) -> &[ImageF32] {
        &self.exposures
    }

    pub fn len(&self) -> usize {
        self.exposures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exposures.is_empty()
    }

    pub fn into_vec(self) -> Vec<ImageF32> {
        self.exposures
    }
}

pub fn generate_ves(image: &ImageF32, config: &PipelineConfig) -> Result<ExposureSequence> {
    config.validate()?;
    let exposures = config
        .alphas
        .iter()
        .map(|&a| adaptive_chromaticity(image, &config.ac_params(a)))
        .collect::<Result<_>>()?;
    Ok(ExposureSequence { exposures })
}

pub fn enhance(image: &ImageF32, config: &PipelineConfig) -> Result<ImageF32> {
    for w in config.warnings() {
        log::warn!("{w}");
    }
    let seq = generate_ves(image, config)?;
    let weights = fusion_weights(seq.exposures(), &config.exponents)?;
    let fused = fuse(seq.exposures(), &weights, config.pyramid_levels)?;
    let out = if config.denoise_enabled {
        nlm_denoise(&fused, &config.denoise)?
    } else {
        fused
    };
    Ok(out.clamped())
}

/// Denoised adaptive chromaticity.
pub fn dac(image: &ImageF32, alpha: f32, gamma: f32, denoise: &NlmParams) -> Result<ImageF32> {
    denoise.validate()?;
    let ac = adaptive_chromaticity(image, &AcParams::new(alpha, gamma))?;
    nlm_denoise(&ac, denoise)
}

fn tag(index: usize) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        e @ Error::DimensionDrift { .. } => e,
        e => Error::Frame {
            index,
            source: Box::new(e),
        },
    }
}

fn check_drift(index: usize, expected: &mut Option<(usize, usize)>, frame: &ImageF32) -> Result<()> {
    match *expected {
        None => *expected = Some(frame.dims()),
        Some(dims) if dims != frame.dims() => {
            return Err(Error::DimensionDrift {
                index,
                expected: dims,
                found: frame.dims(),
            })
        }
        _ => {}
    }
    Ok(())
}

/// Enhances every frame of `frames` in order and hands results to `sink`.
/// Returns the number of frames processed.
pub fn enhance_video<I, S>(frames: I, config: &PipelineConfig, sink: S) -> Result<usize>
where
    I: IntoIterator<Item = Result<ImageF32>>,
    S: FnMut(usize, ImageF32) -> Result<()>,
{
    enhance_video_parallel(frames, config, 1, sink)
}

/// Like [`enhance_video`], enhancing up to `jobs` frames concurrently. Output is
/// identical for every `jobs` value and is delivered in source order.
pub fn enhance_video_parallel<I, S>(frames: I, config: &PipelineConfig, jobs: usize, mut sink: S) -> Result<usize>
where
    I: IntoIterator<Item = Result<ImageF32>>,
    S: FnMut(usize, ImageF32) -> Result<()>,
{
    config.validate()?;
    let jobs = jobs.max(1);
    let pool = if jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::invalid("jobs", e.to_string()))?,
        )
    } else {
        None
    };

    let mut dims = None;
    let mut count = 0usize;
    let mut source = frames.into_iter().enumerate().peekable();
    while source.peek().is_some() {
        let mut batch = Vec::with_capacity(jobs);
        for (index, frame) in source.by_ref().take(jobs) {
            let frame = frame.map_err(tag(index))?;
            check_drift(index, &mut dims, &frame)?;
            batch.push((index, frame));
        }
        let run = || -> Vec<(usize, Result<ImageF32>)> {
            batch
                .par_iter()
                .map(|(index, frame)| (*index, enhance(frame, config)))
                .collect()
        };
        let results = match &pool {
            Some(pool) => pool.install(run),
            None => run(),
        };
        for (index, result) in results {
            sink(index, result.map_err(tag(index))?).map_err(tag(index))?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptySequence);
    }
    Ok(count)
}
