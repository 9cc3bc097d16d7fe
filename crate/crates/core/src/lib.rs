//! Low-light image and video enhancement.
//!
//! The engine brightens dark images without decomposing them into illumination
//! and reflectance. It computes several *adaptive chromaticities* of the input,
//! each a per-pixel division by luma plus an intensity-gap dependent term, and
//! blends them as a virtual exposure sequence with quality-weighted pyramid
//! fusion. A non-local means pass removes remaining noise.
//!
//! ```no_run
//! use lumenlift_core::{enhance, load_image, save_image, PipelineConfig};
//!
//! let input = load_image("dark.png")?;
//! let output = enhance(&input, &PipelineConfig::default())?;
//! save_image(&output, "bright.png")?;
//! # Ok::<(), lumenlift_core::Error>(())
//! ```
//!
//! Every stage is a pure function over [`ImageF32`] values; identical inputs give
//! bit-identical outputs regardless of thread count, which keeps per-frame video
//! processing free of flicker on static content.

pub mod chroma;
pub mod denoise;
pub mod error;
pub mod fusion;
pub mod imgcore;
pub mod metrics;
pub mod pipeline;
pub mod synth;

pub use chroma::{adaptive_chromaticity, chromaticity, AcParams};
pub use denoise::{nlm_denoise, NlmParams};
pub use error::{Error, Result};
pub use fusion::{
    contrast_measure, fuse, fusion_weights, gaussian_pyramid, laplacian_pyramid, saturation_measure,
    well_exposedness_measure, Pyramid, PyramidKind, QualityExponents, WeightStack,
};
pub use imgcore::{
    decode_image, encode_png, intensity_gap, load_image, luma, save_image, ImageF32, IntensityMap,
};
pub use metrics::{flicker_index, loe, loe_report, mean_luma, FlickerMeter, LoeConfig, LoeReport};
pub use pipeline::{
    dac, enhance, enhance_video, enhance_video_parallel, generate_ves, ExposureSequence,
    PipelineConfig,
};
