//! Image buffers and intensity primitives.
//!
//! Samples are stored as interleaved, row-major `f32` in nominal range `[0, 1]`,
//! holding sRGB values as encoded (no linearization).

mod io;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use io::{decode_image, encode_png, load_image, save_image};

/// BT.601 luma weights.
pub const LUMA_R: f32 = 0.299;
pub const LUMA_G: f32 = 0.587;
pub const LUMA_B: f32 = 0.114;

/// Maximum intensity of the normalized encoding.
pub const MAX_INTENSITY: f32 = 1.0;

/// Reflect-101 border index (`-1 -> 1`, `n -> n - 2`), folded until in range.
#[inline]
pub(crate) fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let last = n as isize - 1;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i;
        } else if i > last {
            i = 2 * last - i;
        } else {
            return i as usize;
        }
    }
}

#[inline]
pub fn luma_of(r: f32, g: f32, b: f32) -> f32 {
    (LUMA_R * r + LUMA_G * g + LUMA_B * b).clamp(0.0, 1.0)
}

/// Interleaved floating-point image with 1 or 3 channels.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageF32 {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageF32 {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannelCount(channels));
        }
        if width == 0 || height == 0 || data.len() != width * height * channels {
            return Err(Error::InvalidBuffer {
                width,
                height,
                channels,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Constant image. Panics on zero dimensions or a channel count other than 1 or 3.
    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        Self::new(width, height, channels, vec![value; width * height * channels])
            .expect("valid constant image")
    }

    /// Builds an RGB image from a per-pixel function.
    pub fn from_rgb_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, 3, data).expect("valid rgb image")
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn row(&self, y: usize) -> &[f32] {
        let stride = self.width * self.channels;
        &self.data[y * stride..(y + 1) * stride]
    }

    pub(crate) fn require_channels(&self, expected: usize) -> Result<()> {
        if self.channels != expected {
            return Err(Error::ChannelMismatch {
                expected,
                found: self.channels,
            });
        }
        Ok(())
    }

    pub(crate) fn require_same_dims(&self, other: &ImageF32) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }

    /// Copy with every sample clamped to `[0, 1]`.
    pub fn clamped(&self) -> ImageF32 {
        let data = self.data.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        ImageF32 { data, ..*self }
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(f32) -> f32 + Sync) -> ImageF32 {
        let data = self.data.par_iter().map(|&v| f(v)).collect();
        ImageF32 { data, ..*self }
    }

    /// Applies a per-pixel RGB transform. Caller guarantees three channels.
    pub(crate) fn map_rgb(&self, f: impl Fn([f32; 3]) -> [f32; 3] + Sync) -> ImageF32 {
        debug_assert_eq!(self.channels, 3);
        let mut data = vec![0.0f32; self.data.len()];
        data.par_chunks_mut(3 * 1024)
            .zip(self.data.par_chunks(3 * 1024))
            .for_each(|(dst, src)| {
                for (d, s) in dst.chunks_exact_mut(3).zip(src.chunks_exact(3)) {
                    d.copy_from_slice(&f([s[0], s[1], s[2]]));
                }
            });
        ImageF32 { data, ..*self }
    }

    pub(crate) fn with_data(&self, data: Vec<f32>) -> ImageF32 {
        debug_assert_eq!(data.len(), self.data.len());
        ImageF32 { data, ..*self }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    /// Box-averages the image by the smallest integer factor that brings the longer
    /// side to at most `max_dim`. Edge blocks average only the pixels they cover.
    pub fn area_downsample(&self, max_dim: usize) -> ImageF32 {
        let longest = self.width.max(self.height);
        let max_dim = max_dim.max(1);
        if longest <= max_dim {
            return self.clone();
        }
        let factor = longest.div_ceil(max_dim);
        let (w, h, c) = (self.width.div_ceil(factor), self.height.div_ceil(factor), self.channels);
        let mut data = vec![0.0f32; w * h * c];
        data.par_chunks_mut(w * c).enumerate().for_each(|(oy, row)| {
            let y0 = oy * factor;
            let y1 = (y0 + factor).min(self.height);
            let mut acc = vec![0.0f64; c];
            for ox in 0..w {
                let x0 = ox * factor;
                let x1 = (x0 + factor).min(self.width);
                acc.iter_mut().for_each(|a| *a = 0.0);
                for y in y0..y1 {
                    for x in x0..x1 {
                        for (a, &v) in acc.iter_mut().zip(self.pixel(x, y)) {
                            *a += v as f64;
                        }
                    }
                }
                let n = ((y1 - y0) * (x1 - x0)) as f64;
                for (ch, a) in acc.iter().enumerate() {
                    row[ox * c + ch] = (a / n) as f32;
                }
            }
        });
        ImageF32::new(w, h, c, data).expect("downsampled dims are non-zero")
    }

    /// Expands a single-channel image into three equal channels.
    pub fn to_rgb(&self) -> ImageF32 {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        ImageF32 {
            data,
            channels: 3,
            ..*self
        }
    }
}

/// Single-channel intensity plane with samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl IntensityMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidBuffer {
                width,
                height,
                channels: 1,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }
}

impl From<IntensityMap> for ImageF32 {
    fn from(map: IntensityMap) -> Self {
        ImageF32 {
            width: map.width,
            height: map.height,
            channels: 1,
            data: map.data,
        }
    }
}

/// Per-pixel BT.601 luma of an RGB image, clamped to `[0, 1]`.
pub fn luma(image: &ImageF32) -> Result<IntensityMap> {
    image.require_channels(3)?;
    let data = image
        .data()
        .par_chunks_exact(3)
        .map(|p| luma_of(p[0], p[1], p[2]))
        .collect();
    IntensityMap::new(image.width(), image.height(), data)
}

/// Intensity gap `y = MaxIn - In`, large for dark pixels.
pub fn intensity_gap(intensity: &IntensityMap) -> IntensityMap {
    let data = intensity.data().iter().map(|&v| MAX_INTENSITY - v).collect();
    IntensityMap {
        data,
        ..*intensity
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rgb(px: &[[f32; 3]]) -> ImageF32 {
        ImageF32::new(px.len(), 1, 3, px.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(
            ImageF32::new(2, 2, 4, vec![0.0; 16]),
            Err(Error::UnsupportedChannelCount(4))
        ));
        assert!(matches!(
            ImageF32::new(2, 2, 3, vec![0.0; 11]),
            Err(Error::InvalidBuffer { .. })
        ));
        assert!(ImageF32::new(0, 2, 3, vec![]).is_err());
    }

    #[test]
    fn luma_examples() {
        let l = luma(&rgb(&[[0.5, 0.5, 0.5], [1.0, 0.0, 0.0], [0.2, 0.4, 0.6]])).unwrap();
        assert!((l.data()[0] - 0.5).abs() < 1e-6);
        assert!((l.data()[1] - 0.299).abs() < 1e-7);
        assert!((l.data()[2] - 0.3630).abs() < 1e-6);
    }

    #[test]
    fn luma_requires_rgb() {
        let gray = ImageF32::filled(2, 2, 1, 0.3);
        assert!(matches!(luma(&gray), Err(Error::ChannelMismatch { expected: 3, found: 1 })));
    }

    #[test]
    fn intensity_gap_examples() {
        let m = IntensityMap::new(3, 1, vec![0.05, 0.8, 1.0]).unwrap();
        let y = intensity_gap(&m);
        assert!((y.data()[0] - 0.95).abs() < 1e-7);
        assert!((y.data()[1] - 0.2).abs() < 1e-7);
        assert_eq!(y.data()[2], 0.0);
    }

    #[test]
    fn area_downsample_bounds_longer_side() {
        let img = ImageF32::from_rgb_fn(250, 101, |x, y| [(x % 7) as f32 / 7.0, (y % 3) as f32 / 3.0, 0.5]);
        let small = img.area_downsample(100);
        assert_eq!(small.dims(), (84, 34));
        assert!(small.width().max(small.height()) <= 100);
        let flat = ImageF32::filled(31, 17, 3, 0.25).area_downsample(10);
        assert!(flat.data().iter().all(|&v| v == 0.25));
    }

    proptest! {
        #[test]
        fn gap_plus_luma_is_exactly_one(px in prop::collection::vec(prop::array::uniform3(0.0f32..=1.0), 1..64)) {
            let l = luma(&rgb(&px)).unwrap();
            let y = intensity_gap(&l);
            for (a, b) in l.data().iter().zip(y.data()) {
                prop_assert_eq!(a + b, 1.0);
            }
        }

        #[test]
        fn luma_is_linear(
            px in prop::collection::vec((prop::array::uniform3(0.0f32..=1.0), prop::array::uniform3(0.0f32..=1.0)), 1..64),
            a in 0.0f32..=1.0,
            t in 0.0f32..=1.0,
        ) {
            let b = (1.0 - a) * t;
            let i1 = rgb(&px.iter().map(|p| p.0).collect::<Vec<_>>());
            let i2 = rgb(&px.iter().map(|p| p.1).collect::<Vec<_>>());
            let mix: Vec<f32> = i1.data().iter().zip(i2.data()).map(|(u, v)| a * u + b * v).collect();
            let mixed = luma(&i1.with_data(mix)).unwrap();
            let (l1, l2) = (luma(&i1).unwrap(), luma(&i2).unwrap());
            for i in 0..px.len() {
                let expect = a * l1.data()[i] + b * l2.data()[i];
                prop_assert!((mixed.data()[i] - expect).abs() < 1e-6);
            }
        }
    }
}
