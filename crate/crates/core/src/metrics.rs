//! Quality and stability metrics: lightness order error, a flicker index for
//! frame sequences, and mean luma.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{luma, ImageF32};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lightness {
    /// `max(r, g, b)`
    #[default]
    ChannelMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoeConfig {
    /// Lightness maps are box-downsampled until the longer side is at most this.
    pub max_dim: usize,
    pub lightness: Lightness,
}

impl Default for LoeConfig {
    fn default() -> Self {
        Self {
            max_dim: 100,
            lightness: Lightness::ChannelMax,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LoeReport {
    pub loe: f64,
    /// Pixel count after downsampling.
    pub m: usize,
}

fn lightness_map(image: &ImageF32, kind: Lightness) -> Result<ImageF32> {
    image.require_channels(3)?;
    let data = match kind {
        Lightness::ChannelMax => image
            .data()
            .par_chunks_exact(3)
            .map(|p| p[0].max(p[1]).max(p[2]))
            .collect(),
    };
    ImageF32::new(image.width(), image.height(), 1, data)
}

/// Lightness order error: the mean over pixels `x` of the number of pixels `y`
/// whose relative lightness order with `x` differs between the two images.
pub fn loe(original: &ImageF32, enhanced: &ImageF32, config: &LoeConfig) -> Result<f64> {
    loe_report(original, enhanced, config).map(|r| r.loe)
}

pub fn loe_report(original: &ImageF32, enhanced: &ImageF32, config: &LoeConfig) -> Result<LoeReport> {
    original.require_same_dims(enhanced)?;
    if config.max_dim < 2 {
        return Err(Error::invalid("max_dim", "must be >= 2"));
    }
    let a = lightness_map(original, config.lightness)?.area_downsample(config.max_dim);
    let b = lightness_map(enhanced, config.lightness)?.area_downsample(config.max_dim);
    let (la, lb) = (a.data(), b.data());
    let m = la.len();
    let counts: Vec<u64> = (0..m)
        .into_par_iter()
        .map(|x| {
            let (ax, bx) = (la[x], lb[x]);
            la.iter()
                .zip(lb)
                .map(|(&ay, &by)| ((ax >= ay) != (bx >= by)) as u64)
                .sum()
        })
        .collect();
    let total: u64 = counts.iter().sum();
    Ok(LoeReport {
        loe: total as f64 / m as f64,
        m,
    })
}

pub fn mean_luma(image: &ImageF32) -> Result<f64> {
    Ok(luma(image)?.mean())
}

/// Streaming flicker index: mean over consecutive frame pairs of the mean
/// absolute luma difference.
#[derive(Debug, Default)]
pub struct FlickerMeter {
    previous: Option<Vec<f32>>,
    dims: Option<(usize, usize)>,
    frames: usize,
    sum: f64,
}

impl FlickerMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, frame: &ImageF32) -> Result<()> {
        let current = luma(frame)?;
        match self.dims {
            Some(d) if d != current.dims() => {
                return Err(Error::DimensionDrift {
                    index: self.frames,
                    expected: d,
                    found: current.dims(),
                })
            }
            _ => self.dims = Some(current.dims()),
        }
        let current = current.into_data();
        if let Some(prev) = &self.previous {
            let diff: f64 = prev
                .iter()
                .zip(&current)
                .map(|(a, b)| (a - b).abs() as f64)
                .sum();
            self.sum += diff / current.len() as f64;
        }
        self.previous = Some(current);
        self.frames += 1;
        Ok(())
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn value(&self) -> Result<f64> {
        if self.frames < 2 {
            return Err(Error::TooFewFrames(self.frames));
        }
        Ok(self.sum / (self.frames - 1) as f64)
    }
}

pub fn flicker_index<'a>(frames: impl IntoIterator<Item = &'a ImageF32>) -> Result<f64> {
    let mut meter = FlickerMeter::new();
    for f in frames {
        meter.push(f)?;
    }
    meter.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, values: &[f32]) -> ImageF32 {
        ImageF32::new(w, h, 1, values.to_vec()).unwrap().to_rgb()
    }

    /// Literal double loop over all ordered pairs.
    fn loe_oracle(a: &[f32], b: &[f32]) -> f64 {
        let m = a.len();
        let mut total = 0usize;
        for x in 0..m {
            for y in 0..m {
                if (a[x] >= a[y]) != (b[x] >= b[y]) {
                    total += 1;
                }
            }
        }
        total as f64 / m as f64
    }

    fn distinct_levels(w: usize, h: usize) -> Vec<f32> {
        let m = w * h;
        // a fixed permutation of m distinct levels
        (0..m).map(|i| ((i * 7919) % m) as f32 / m as f32).collect()
    }

    #[test]
    fn loe_of_identical_is_zero() {
        let img = ImageF32::from_rgb_fn(30, 20, |x, y| [x as f32 / 30.0, y as f32 / 20.0, 0.2]);
        assert_eq!(loe(&img, &img, &LoeConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn loe_ignores_monotone_maps() {
        let levels = distinct_levels(12, 9);
        let img = gray(12, 9, &levels);
        let brighter = img.map(|v| v.sqrt());
        assert_eq!(loe(&img, &brighter, &LoeConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn loe_inversion_flips_everything() {
        let levels = distinct_levels(20, 20);
        let img = gray(20, 20, &levels);
        let inv = img.map(|v| 1.0 - v);
        let r = loe_report(&img, &inv, &LoeConfig::default()).unwrap();
        assert_eq!(r.m, 400);
        assert_eq!(r.loe, 399.0);
        let inv_levels: Vec<f32> = levels.iter().map(|v| 1.0 - v).collect();
        assert_eq!(r.loe, loe_oracle(&levels, &inv_levels));
    }

    #[test]
    fn loe_downsamples_large_inputs() {
        let img = ImageF32::from_rgb_fn(300, 150, |x, y| [((x * 13 + y * 7) % 255) as f32 / 255.0, 0.0, 0.0]);
        let inv = img.map(|v| 1.0 - v);
        let r = loe_report(&img, &inv, &LoeConfig::default()).unwrap();
        assert_eq!(r.m, 100 * 50);
        assert!(r.loe <= (r.m - 1) as f64);
    }

    #[test]
    fn loe_errors() {
        let a = ImageF32::filled(4, 4, 3, 0.5);
        let b = ImageF32::filled(4, 5, 3, 0.5);
        assert!(matches!(loe(&a, &b, &LoeConfig::default()), Err(Error::DimensionMismatch { .. })));
        let cfg = LoeConfig { max_dim: 1, ..Default::default() };
        assert!(loe(&a, &a, &cfg).is_err());
    }

    #[test]
    fn flicker_examples() {
        let frame = ImageF32::filled(4, 4, 3, 0.3);
        assert_eq!(flicker_index([&frame, &frame, &frame]).unwrap(), 0.0);

        let black = ImageF32::filled(4, 4, 3, 0.0);
        let white = ImageF32::filled(4, 4, 3, 1.0);
        assert!((flicker_index([&black, &white, &black, &white]).unwrap() - 1.0).abs() < 1e-6);

        let f: Vec<_> = [0.1f32, 0.2, 0.4].iter().map(|&v| ImageF32::filled(3, 3, 3, v)).collect();
        assert!((flicker_index(&f).unwrap() - 0.15).abs() < 1e-6);
    }

    #[test]
    fn flicker_errors() {
        let a = ImageF32::filled(4, 4, 3, 0.0);
        assert!(matches!(flicker_index([&a]), Err(Error::TooFewFrames(1))));
        let b = ImageF32::filled(5, 4, 3, 0.0);
        assert!(matches!(flicker_index([&a, &b]), Err(Error::DimensionDrift { index: 1, .. })));
    }

    #[test]
    fn mean_luma_examples() {
        assert!((mean_luma(&ImageF32::filled(3, 3, 3, 0.42)).unwrap() - 0.42).abs() < 1e-6);
        let half = ImageF32::from_rgb_fn(4, 2, |x, _| if x < 2 { [0.0; 3] } else { [1.0; 3] });
        assert!((mean_luma(&half).unwrap() - 0.5).abs() < 1e-6);
        let two = ImageF32::new(2, 1, 3, vec![0.2, 0.4, 0.6, 0.5, 0.5, 0.5]).unwrap();
        assert!((mean_luma(&two).unwrap() - 0.4315).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn loe_symmetric_and_bounded(seed in any::<u64>(), w in 2usize..12, h in 2usize..12) {
            let mut s = seed | 1;
            let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((s >> 56) as f32) / 255.0 };
            let a = ImageF32::from_rgb_fn(w, h, |_, _| [next(), next(), next()]);
            let b = ImageF32::from_rgb_fn(w, h, |_, _| [next(), next(), next()]);
            let cfg = LoeConfig::default();
            let ab = loe(&a, &b, &cfg).unwrap();
            prop_assert_eq!(ab, loe(&b, &a, &cfg).unwrap());
            prop_assert!(ab >= 0.0 && ab <= (w * h - 1) as f64);
            let la: Vec<f32> = a.data().chunks(3).map(|p| p[0].max(p[1]).max(p[2])).collect();
            let lb: Vec<f32> = b.data().chunks(3).map(|p| p[0].max(p[1]).max(p[2])).collect();
            prop_assert_eq!(ab, loe_oracle(&la, &lb));
        }

        #[test]
        fn loe_ignores_random_monotone_maps(
            levels in proptest::collection::vec(0u8..=255, 16..64),
            knots in proptest::collection::vec(1u32..50, 4),
        ) {
            // piecewise-linear, strictly increasing, slope >= 1 so 8-bit steps stay distinct
            let phi = |v: f32| {
                let seg = 0.25f32;
                let mut base = 0.0f32;
                for (i, &k) in knots.iter().enumerate() {
                    let lo = i as f32 * seg;
                    let slope = k as f32;
                    if v <= lo + seg || i == knots.len() - 1 {
                        return base + slope * (v - lo);
                    }
                    base += slope * seg;
                }
                unreachable!()
            };
            let w = levels.len();
            let img = ImageF32::from_rgb_fn(w, 1, |x, _| {
                let v = levels[x] as f32 / 255.0;
                [v, v * 0.5, v * 0.25]
            });
            let mapped = img.map(phi);
            prop_assert_eq!(loe(&img, &mapped, &LoeConfig::default()).unwrap(), 0.0);
        }
    }
}
