//! Chromaticity and adaptive chromaticity.
//!
//! Plain chromaticity divides every channel by the pixel's luma, which brightens
//! the image but blows up noise where luma is small. Adaptive chromaticity adds
//! `alpha * (f(y) + h)` to the denominator, where `y = 1 - luma` is the intensity
//! gap, so dark pixels are divided by a larger value. A gamma exponent is then
//! applied per channel:
//!
//! ```text
//! A = clamp( (I / (In + alpha * (f(y) + h)))^gamma, 0, 1 )
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{luma_of, ImageF32, MAX_INTENSITY};

/// Division guard; only reachable when `alpha == 0`.
pub const DIV_EPSILON: f32 = 1e-6;

pub const DEFAULT_H: f32 = 0.01;

/// Adaptive term of the denominator. Must be near zero for small gaps and grow for large ones.
pub trait GapFunction {
    fn eval(y: f32) -> f32;
}

/// `f(y) = y^2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Quadratic;

impl GapFunction for Quadratic {
    #[inline(always)]
    fn eval(y: f32) -> f32 {
        y * y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcParams {
    pub alpha: f32,
    pub gamma: f32,
    pub h: f32,
}

impl AcParams {
    pub fn new(alpha: f32, gamma: f32) -> Self {
        Self {
            alpha,
            gamma,
            h: DEFAULT_H,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::invalid("alpha", format!("must be >= 0, got {}", self.alpha)));
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 || self.gamma > 1.5 {
            return Err(Error::invalid("gamma", format!("must be in (0, 1.5], got {}", self.gamma)));
        }
        if !self.h.is_finite() || self.h <= 0.0 {
            return Err(Error::invalid("h", format!("must be > 0, got {}", self.h)));
        }
        Ok(())
    }
}

/// `C = I / In(I)`, clamped to `[0, 1]`.
pub fn chromaticity(image: &ImageF32) -> Result<ImageF32> {
    image.require_channels(3)?;
    Ok(image.map_rgb(|[r, g, b]| {
        let denom = luma_of(r, g, b).max(DIV_EPSILON);
        [
            (r / denom).clamp(0.0, 1.0),
            (g / denom).clamp(0.0, 1.0),
            (b / denom).clamp(0.0, 1.0),
        ]
    }))
}

pub fn adaptive_chromaticity(image: &ImageF32, params: &AcParams) -> Result<ImageF32> {
    adaptive_chromaticity_with::<Quadratic>(image, params)
}

pub fn adaptive_chromaticity_with<F: GapFunction>(image: &ImageF32, params: &AcParams) -> Result<ImageF32> {
    image.require_channels(3)?;
    params.validate()?;
    let AcParams { alpha, gamma, h } = *params;
    Ok(image.map_rgb(|px| ac_pixel::<F>(px, alpha, gamma, h)))
}

#[inline(always)]
fn ac_pixel<F: GapFunction>([r, g, b]: [f32; 3], alpha: f32, gamma: f32, h: f32) -> [f32; 3] {
    let intensity = luma_of(r, g, b);
    let gap = MAX_INTENSITY - intensity;
    let denom = (intensity + alpha * (F::eval(gap) + h)).max(DIV_EPSILON);
    let scale = |v: f32| {
        let ratio = (v / denom).max(0.0);
        let out = if gamma == 1.0 { ratio } else { ratio.powf(gamma) };
        out.clamp(0.0, 1.0)
    };
    [scale(r), scale(g), scale(b)]
}
