//! Non-local means denoising.
//!
//! Patch distances are measured on luma and shared by all three channels. Each
//! pixel is replaced by a weighted mean over a square search window with
//!
//! ```text
//! w(p, q) = exp(-max(d2(p, q) - 2 * sigma^2, 0) / h^2)
//! ```
//!
//! where `d2` is the mean squared difference of the two luma patches. The two
//! user-facing knobs map onto the filter as `h = 0.04 * th * lv` and
//! `sigma = 0.02 * th`; `th = 0` disables the filter.
//!
//! The image is treated as extended by reflection, so every window and patch is
//! complete. Distances are evaluated one search offset at a time over a padded
//! copy of the image, which keeps the inner loops branch-free.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{luma, reflect101, ImageF32};

pub const STRENGTH_SCALE: f32 = 0.04;
pub const NOISE_SCALE: f32 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NlmParams {
    pub th: f32,
    pub lv: f32,
    pub patch_radius: usize,
    pub search_radius: usize,
}

impl Default for NlmParams {
    fn default() -> Self {
        Self {
            th: 0.7,
            lv: 1.5,
            patch_radius: 1,
            search_radius: 3,
        }
    }
}

impl NlmParams {
    pub fn with_strength(th: f32, lv: f32) -> Self {
        Self {
            th,
            lv,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.th.is_finite() || self.th < 0.0 {
            return Err(Error::invalid("th", format!("must be >= 0, got {}", self.th)));
        }
        if !self.lv.is_finite() || self.lv <= 0.0 {
            return Err(Error::invalid("lv", format!("must be > 0, got {}", self.lv)));
        }
        if self.patch_radius < 1 {
            return Err(Error::invalid("patch_radius", "must be >= 1"));
        }
        if self.search_radius < self.patch_radius {
            return Err(Error::invalid("search_radius", "must be >= patch_radius"));
        }
        Ok(())
    }

    /// Exponential bandwidth `h`.
    pub fn bandwidth(&self) -> f32 {
        STRENGTH_SCALE * self.th * self.lv
    }

    /// Assumed noise deviation `sigma`.
    pub fn noise_sigma(&self) -> f32 {
        NOISE_SCALE * self.th
    }
}

pub fn nlm_denoise(image: &ImageF32, params: &NlmParams) -> Result<ImageF32> {
    image.require_channels(3)?;
    params.validate()?;
    if params.th == 0.0 {
        return Ok(image.clone());
    }

    let (w, h) = image.dims();
    let pad = params.patch_radius + params.search_radius;
    let intensity = luma(image)?;
    let bw = params.bandwidth();
    let ctx = Context {
        w,
        pr: params.patch_radius,
        sr: params.search_radius,
        pad,
        lum: Padded::new(intensity.data(), w, h, 1, 0, pad),
        planes: std::array::from_fn(|c| Padded::new(image.data(), w, h, 3, c, pad)),
        inv_h2: 1.0 / (bw * bw),
        bias: 2.0 * params.noise_sigma().powi(2),
        inv_area: 1.0 / ((2 * params.patch_radius + 1).pow(2)) as f32,
    };
    let range = channel_range(image.data());

    let mut out = vec![0.0f32; w * h * 3];
    out.par_chunks_mut(BAND * w * 3).enumerate().for_each(|(i, chunk)| {
        let y0 = i * BAND;
        let rows = chunk.len() / (w * 3);
        filter_band(&ctx, y0, rows, chunk);
        for px in chunk.chunks_exact_mut(3) {
            for (v, (lo, hi)) in px.iter_mut().zip(range) {
                *v = v.clamp(lo, hi);
            }
        }
    });
    ImageF32::new(w, h, 3, out)
}

const BAND: usize = 16;

struct Context {
    w: usize,
    pr: usize,
    sr: usize,
    pad: usize,
    lum: Padded,
    planes: [Padded; 3],
    inv_h2: f32,
    bias: f32,
    inv_area: f32,
}

fn channel_range(data: &[f32]) -> [(f32, f32); 3] {
    let mut range = [(f32::INFINITY, f32::NEG_INFINITY); 3];
    for px in data.chunks_exact(3) {
        for (r, &v) in range.iter_mut().zip(px) {
            *r = (r.0.min(v), r.1.max(v));
        }
    }
    range
}

fn filter_band(ctx: &Context, y0: usize, rows: usize, out: &mut [f32]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the required CPU feature was detected at runtime.
            return unsafe { filter_band_avx2(ctx, y0, rows, out) };
        }
    }
    filter_band_generic(ctx, y0, rows, out)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn filter_band_avx2(ctx: &Context, y0: usize, rows: usize, out: &mut [f32]) {
    filter_band_generic(ctx, y0, rows, out)
}

/// Filters output rows `y0..y0 + rows` into `out` (interleaved RGB).
#[inline(always)]
fn filter_band_generic(ctx: &Context, y0: usize, rows: usize, out: &mut [f32]) {
    let Context { w, pr, sr, pad, .. } = *ctx;
    let span = w + 2 * pr;
    let taps = 2 * pr + 1;
    let mut diff = vec![0.0f32; (rows + 2 * pr) * span];
    let mut colsum = vec![0.0f32; span];
    let mut weight = vec![0.0f32; w];
    let mut wsum = vec![0.0f32; rows * w];
    let mut acc: [Vec<f32>; 3] = std::array::from_fn(|_| vec![0.0f32; rows * w]);

    for dy in -(sr as isize)..=sr as isize {
        for dx in -(sr as isize)..=sr as isize {
            let qx = (pad as isize + dx) as usize;

            // squared luma differences for every row any patch in the band touches
            for (r, d) in diff.chunks_exact_mut(span).enumerate() {
                let py = y0 + pad - pr + r;
                let qy = (py as isize + dy) as usize;
                let a = &ctx.lum.row(py)[pad - pr..pad - pr + span];
                let b = &ctx.lum.row(qy)[qx - pr..qx - pr + span];
                for ((d, &u), &v) in d.iter_mut().zip(a).zip(b) {
                    let e = u - v;
                    *d = e * e;
                }
            }

            for r in 0..rows {
                colsum.copy_from_slice(&diff[r * span..(r + 1) * span]);
                for t in 1..taps {
                    let src = &diff[(r + t) * span..(r + t + 1) * span];
                    for (s, &v) in colsum.iter_mut().zip(src) {
                        *s += v;
                    }
                }
                weight.copy_from_slice(&colsum[..w]);
                for t in 1..taps {
                    for (d2, &v) in weight.iter_mut().zip(&colsum[t..t + w]) {
                        *d2 += v;
                    }
                }
                for wgt in weight.iter_mut() {
                    *wgt = exp_neg((*wgt * ctx.inv_area - ctx.bias).max(0.0) * ctx.inv_h2);
                }
                for (s, &wgt) in wsum[r * w..(r + 1) * w].iter_mut().zip(&weight) {
                    *s += wgt;
                }
                let py = y0 + pad + r;
                let qy = (py as isize + dy) as usize;
                for (c, plane) in ctx.planes.iter().enumerate() {
                    let p = &plane.row(py)[pad..pad + w];
                    let q = &plane.row(qy)[qx..qx + w];
                    let a = &mut acc[c][r * w..(r + 1) * w];
                    for (((a, &wgt), &p), &q) in a.iter_mut().zip(&weight).zip(p).zip(q) {
                        *a += wgt * (q - p);
                    }
                }
            }
        }
    }

    for r in 0..rows {
        let py = y0 + pad + r;
        let line = &mut out[r * w * 3..(r + 1) * w * 3];
        for (c, plane) in ctx.planes.iter().enumerate() {
            let p = &plane.row(py)[pad..pad + w];
            let a = &acc[c][r * w..(r + 1) * w];
            let s = &wsum[r * w..(r + 1) * w];
            for x in 0..w {
                line[x * 3 + c] = p[x] + a[x] / s[x];
            }
        }
    }
}

/// One channel copied into a reflect-padded plane.
struct Padded {
    stride: usize,
    data: Vec<f32>,
}

impl Padded {
    fn new(src: &[f32], w: usize, h: usize, channels: usize, channel: usize, pad: usize) -> Self {
        let stride = w + 2 * pad;
        let rows = h + 2 * pad;
        let cols: Vec<usize> = (0..stride).map(|x| reflect101(x as isize - pad as isize, w)).collect();
        let mut data = vec![0.0f32; stride * rows];
        data.par_chunks_mut(stride).enumerate().for_each(|(y, row)| {
            let sy = reflect101(y as isize - pad as isize, h);
            let line = &src[sy * w * channels..(sy + 1) * w * channels];
            for (o, &sx) in row.iter_mut().zip(&cols) {
                *o = line[sx * channels + channel];
            }
        });
        Self { stride, data }
    }

    #[inline]
    fn row(&self, y: usize) -> &[f32] {
        &self.data[y * self.stride..(y + 1) * self.stride]
    }
}

/// `exp(-x)` for `x >= 0`, branch-free so the weight loop vectorizes.
/// Relative error below 2e-7; `exp_neg(0) == 1` exactly.
#[inline(always)]
pub(crate) fn exp_neg(x: f32) -> f32 {
    const LOG2E: f32 = std::f32::consts::LOG2_E;
    const ROUND: f32 = 12_582_912.0; // 1.5 * 2^23
    let t = (-x * LOG2E).max(-126.0);
    // after adding ROUND, the low mantissa bits hold round(t)
    let k = t + ROUND;
    let n = k - ROUND;
    let f = t - n;
    // 2^f on [-0.5, 0.5]
    let p = 1.535_336_2e-4f32;
    let p = p * f + 1.339_887_4e-3;
    let p = p * f + 9.618_437e-3;
    let p = p * f + 5.550_332_4e-2;
    let p = p * f + 2.402_264_9e-1;
    let p = p * f + 6.931_472e-1;
    let p = p * f + 1.0;
    let ni = k.to_bits().wrapping_sub(ROUND.to_bits());
    let scale = f32::from_bits(ni.wrapping_add(127) << 23);
    p * scale
}
