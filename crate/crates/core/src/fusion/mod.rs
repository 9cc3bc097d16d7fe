//! Exposure fusion of a virtual exposure sequence.
//!
//! Each exposure is scored per pixel by contrast, saturation and well-exposedness,
//! the scores are combined into weights that sum to one per pixel, and the
//! exposures are blended level by level in a Laplacian pyramid using Gaussian
//! pyramids of the weights.
//!
//! All per-pixel sums over the exposures are taken in a canonical order (terms
//! sorted by value) so that the output does not depend on the order of the
//! exposure list.

pub mod pyramid;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{luma, reflect101, ImageF32, IntensityMap};
pub use pyramid::{gaussian_pyramid, laplacian_pyramid, Pyramid, PyramidKind};

/// Spread of the well-exposedness Gaussian around mid-gray.
pub const WELL_EXPOSED_SIGMA: f32 = 0.2;
/// Added to every raw weight before normalization.
pub const WEIGHT_DELTA: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QualityExponents {
    pub upsilon_c: f32,
    pub upsilon_s: f32,
    pub upsilon_e: f32,
}

impl Default for QualityExponents {
    fn default() -> Self {
        Self {
            upsilon_c: 1.0,
            upsilon_s: 1.0,
            upsilon_e: 1.0,
        }
    }
}

impl QualityExponents {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("upsilon_c", self.upsilon_c),
            ("upsilon_s", self.upsilon_s),
            ("upsilon_e", self.upsilon_e),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(field, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Normalized per-exposure weight maps.
#[derive(Clone, Debug)]
pub struct WeightStack {
    maps: Vec<IntensityMap>,
}

impl WeightStack {
    pub fn count(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[IntensityMap] {
        &self.maps
    }

    pub fn dims(&self) -> (usize, usize) {
        self.maps[0].dims()
    }

    /// Builds a stack from arbitrary maps, normalizing them per pixel.
    pub fn normalized(maps: Vec<IntensityMap>) -> Result<Self> {
        let first = maps.first().ok_or(Error::EmptySequence)?;
        let dims = first.dims();
        for m in &maps {
            if m.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: m.dims(),
                });
            }
        }
        let raw: Vec<&[f32]> = maps.iter().map(|m| m.data()).collect();
        Ok(Self {
            maps: normalize(&raw, dims),
        })
    }
}

/// `|Laplacian(luma)|` with the 4-neighbour kernel and reflected borders.
pub fn contrast_measure(image: &ImageF32) -> Result<IntensityMap> {
    let l = luma(image)?;
    let (w, h) = l.dims();
    let src = l.data();
    let mut out = vec![0.0f32; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let up = reflect101(y as isize - 1, h);
        let down = reflect101(y as isize + 1, h);
        for (x, o) in row.iter_mut().enumerate() {
            let left = reflect101(x as isize - 1, w);
            let right = reflect101(x as isize + 1, w);
            let v = src[up * w + x] + src[down * w + x] + src[y * w + left] + src[y * w + right]
                - 4.0 * src[y * w + x];
            *o = v.abs();
        }
    });
    IntensityMap::new(w, h, out)
}

/// Population standard deviation of the three channels.
pub fn saturation_measure(image: &ImageF32) -> Result<IntensityMap> {
    image.require_channels(3)?;
    let data = image
        .data()
        .par_chunks_exact(3)
        .map(|p| saturation_of(p[0], p[1], p[2]))
        .collect();
    IntensityMap::new(image.width(), image.height(), data)
}

/// Product over channels of `exp(-(v - 0.5)^2 / (2 * 0.2^2))`.
pub fn well_exposedness_measure(image: &ImageF32) -> Result<IntensityMap> {
    image.require_channels(3)?;
    let data = image
        .data()
        .par_chunks_exact(3)
        .map(|p| well_exposedness_of(p[0], p[1], p[2]))
        .collect();
    IntensityMap::new(image.width(), image.height(), data)
}

#[inline]
fn saturation_of(r: f32, g: f32, b: f32) -> f32 {
    let mean = (r + g + b) / 3.0;
    (((r - mean).powi(2) + (g - mean).powi(2) + (b - mean).powi(2)) / 3.0).sqrt()
}

#[inline]
fn well_exposedness_of(r: f32, g: f32, b: f32) -> f32 {
    let gauss = |v: f32| (-(v - 0.5).powi(2) / (2.0 * WELL_EXPOSED_SIGMA * WELL_EXPOSED_SIGMA)).exp();
    gauss(r) * gauss(g) * gauss(b)
}

/// `x^p` with `0^0 = 1`.
#[inline]
fn pow0(x: f32, p: f32) -> f32 {
    if p == 0.0 {
        1.0
    } else if p == 1.0 {
        x
    } else {
        x.powf(p)
    }
}

fn check_sequence(exposures: &[ImageF32]) -> Result<(usize, usize)> {
    let first = exposures.first().ok_or(Error::EmptySequence)?;
    for e in exposures {
        e.require_channels(3)?;
        first.require_same_dims(e)?;
    }
    Ok(first.dims())
}

/// Per-exposure quality weights `c^uc * s^us * e^ue`, normalized per pixel.
pub fn fusion_weights(exposures: &[ImageF32], exponents: &QualityExponents) -> Result<WeightStack> {
    let dims = check_sequence(exposures)?;
    exponents.validate()?;
    let QualityExponents {
        upsilon_c,
        upsilon_s,
        upsilon_e,
    } = *exponents;

    let raw: Vec<Vec<f32>> = exposures
        .iter()
        .map(|img| -> Result<Vec<f32>> {
            let contrast = if upsilon_c == 0.0 {
                None
            } else {
                Some(contrast_measure(img)?)
            };
            let mut w: Vec<f32> = img
                .data()
                .par_chunks_exact(3)
                .map(|p| {
                    pow0(saturation_of(p[0], p[1], p[2]), upsilon_s)
                        * pow0(well_exposedness_of(p[0], p[1], p[2]), upsilon_e)
                })
                .collect();
            if let Some(c) = contrast {
                w.par_iter_mut()
                    .zip(c.data().par_iter())
                    .for_each(|(w, &c)| *w *= pow0(c, upsilon_c));
            }
            Ok(w)
        })
        .collect::<Result<_>>()?;
    let raw: Vec<&[f32]> = raw.iter().map(Vec::as_slice).collect();
    Ok(WeightStack {
        maps: normalize(&raw, dims),
    })
}

fn normalize(raw: &[&[f32]], (w, h): (usize, usize)) -> Vec<IntensityMap> {
    let n = raw.len();
    // pixel-major: flat[i * n + k]
    let mut flat = vec![0.0f32; w * h * n];
    flat.par_chunks_mut(w * n).enumerate().for_each(|(y, row)| {
        let mut terms = vec![0.0f64; n];
        let mut scratch = vec![0.0f64; n];
        for x in 0..w {
            let i = y * w + x;
            for (t, r) in terms.iter_mut().zip(raw) {
                *t = r[i] as f64 + WEIGHT_DELTA;
            }
            scratch.copy_from_slice(&terms);
            let total = canonical_sum(&mut scratch);
            for (k, t) in terms.iter().enumerate() {
                row[x * n + k] = (t / total) as f32;
            }
        }
    });
    (0..n)
        .map(|k| {
            let data = flat.iter().skip(k).step_by(n).copied().collect();
            IntensityMap::new(w, h, data).expect("weight map dims")
        })
        .collect()
}

/// Sum independent of the order of `terms`.
#[inline]
fn canonical_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// Blends exposures with `L(O)_l = sum_k G(w_k)_l * L(E_k)_l` and collapses the result.
pub fn fuse(exposures: &[ImageF32], weights: &WeightStack, levels: usize) -> Result<ImageF32> {
    let dims = check_sequence(exposures)?;
    if weights.count() != exposures.len() {
        return Err(Error::invalid(
            "weights",
            format!("{} weight maps for {} exposures", weights.count(), exposures.len()),
        ));
    }
    if weights.dims() != dims {
        return Err(Error::DimensionMismatch {
            expected: dims,
            found: weights.dims(),
        });
    }
    pyramid::check_levels(dims.0, dims.1, levels)?;

    let lap: Vec<Pyramid> = exposures
        .iter()
        .map(|e| laplacian_pyramid(e, levels))
        .collect::<Result<_>>()?;
    let gauss: Vec<Pyramid> = weights
        .maps()
        .iter()
        .map(|m| gaussian_pyramid(&ImageF32::from(m.clone()), levels))
        .collect::<Result<_>>()?;

    let n = exposures.len();
    let fused: Vec<ImageF32> = (0..levels)
        .map(|l| {
            let template = lap[0].level(l);
            let (w, c) = (template.width(), template.channels());
            let mut data = vec![0.0f32; template.data().len()];
            let wl: Vec<&[f32]> = gauss.iter().map(|p| p.level(l).data()).collect();
            let ll: Vec<&[f32]> = lap.iter().map(|p| p.level(l).data()).collect();
            data.par_chunks_mut(w * c).enumerate().for_each(|(y, row)| {
                let mut terms = vec![0.0f64; n];
                for x in 0..w {
                    let i = y * w + x;
                    for ch in 0..c {
                        for (k, t) in terms.iter_mut().enumerate() {
                            *t = (wl[k][i] * ll[k][i * c + ch]) as f64;
                        }
                        row[x * c + ch] = canonical_sum(&mut terms) as f32;
                    }
                }
            });
            template.with_data(data)
        })
        .collect();

    let out = Pyramid::from_levels(PyramidKind::Laplacian, fused)?.collapse();
    Ok(out.clamped())
}
