//! Burt–Adelson Gaussian and Laplacian pyramids.
//!
//! Reduction blurs with the separable binomial kernel `(1, 4, 6, 4, 1) / 16` and keeps
//! even-indexed samples, so a level of size `n` becomes `ceil(n / 2)`. Expansion
//! zero-inserts back to the recorded parent size and blurs with four times the kernel.
//! Borders are reflected without repeating the edge sample (reflect-101).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgcore::{reflect101, ImageF32};

const KERNEL: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
/// Per-axis expansion kernel; the 2-D gain is 4.
const KERNEL_UP: [f32; 5] = [2.0 / 16.0, 8.0 / 16.0, 12.0 / 16.0, 8.0 / 16.0, 2.0 / 16.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PyramidKind {
    Gaussian,
    Laplacian,
}

#[derive(Clone, Debug)]
pub struct Pyramid {
    kind: PyramidKind,
    levels: Vec<ImageF32>,
}

impl Pyramid {
    pub fn kind(&self) -> PyramidKind {
        self.kind
    }

    pub fn levels(&self) -> &[ImageF32] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> &ImageF32 {
        &self.levels[l]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Wraps caller-built levels (e.g. a fused Laplacian stack) for collapsing.
    /// Level `l + 1` must be `ceil` half the size of level `l`.
    pub fn from_levels(kind: PyramidKind, levels: Vec<ImageF32>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("levels", "pyramid needs at least one level"));
        }
        for pair in levels.windows(2) {
            let (w, h) = pair[0].dims();
            let expect = (w.div_ceil(2), h.div_ceil(2));
            if pair[1].dims() != expect || pair[1].channels() != pair[0].channels() {
                return Err(Error::DimensionMismatch {
                    expected: expect,
                    found: pair[1].dims(),
                });
            }
        }
        Ok(Self { kind, levels })
    }

    /// Reconstructs the full-resolution image. A Gaussian pyramid collapses to its
    /// finest level.
    pub fn collapse(&self) -> ImageF32 {
        match self.kind {
            PyramidKind::Gaussian => self.levels[0].clone(),
            PyramidKind::Laplacian => {
                let mut iter = self.levels.iter().rev();
                let mut acc = iter.next().expect("non-empty pyramid").clone();
                for detail in iter {
                    let up = expand(&acc, detail.width(), detail.height());
                    let data = detail.data().iter().zip(up.data()).map(|(d, u)| d + u).collect();
                    acc = detail.with_data(data);
                }
                acc
            }
        }
    }
}

/// Validates that `levels` reductions fit in a `width` x `height` image.
pub fn check_levels(width: usize, height: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::invalid("levels", "must be >= 1"));
    }
    let needed = 1usize.checked_shl((levels - 1) as u32).unwrap_or(usize::MAX);
    if levels > usize::BITS as usize || needed > width.min(height) {
        return Err(Error::TooManyLevels {
            levels,
            needed,
            width,
            height,
        });
    }
    Ok(())
}

pub fn gaussian_pyramid(image: &ImageF32, levels: usize) -> Result<Pyramid> {
    check_levels(image.width(), image.height(), levels)?;
    let mut out = Vec::with_capacity(levels);
    out.push(image.clone());
    for _ in 1..levels {
        let next = reduce(out.last().unwrap());
        out.push(next);
    }
    Ok(Pyramid {
        kind: PyramidKind::Gaussian,
        levels: out,
    })
}

pub fn laplacian_pyramid(image: &ImageF32, levels: usize) -> Result<Pyramid> {
    let gauss = gaussian_pyramid(image, levels)?.levels;
    let mut out = Vec::with_capacity(levels);
    for pair in gauss.windows(2) {
        let (fine, coarse) = (&pair[0], &pair[1]);
        let up = expand(coarse, fine.width(), fine.height());
        let data = fine.data().iter().zip(up.data()).map(|(f, u)| f - u).collect();
        out.push(fine.with_data(data));
    }
    out.push(gauss.last().unwrap().clone());
    Ok(Pyramid {
        kind: PyramidKind::Laplacian,
        levels: out,
    })
}

/// Blur then keep even rows and columns.
pub(crate) fn reduce(img: &ImageF32) -> ImageF32 {
    let (w, h, c) = (img.width(), img.height(), img.channels());
    let (ow, oh) = (w.div_ceil(2), h.div_ceil(2));
    let src = img.data();

    // horizontal pass evaluated only at even columns
    let mut horiz = vec![0.0f32; ow * h * c];
    horiz.par_chunks_mut(ow * c).enumerate().for_each(|(y, row)| {
        let line = &src[y * w * c..(y + 1) * w * c];
        for ox in 0..ow {
            let x = (2 * ox) as isize;
            for ch in 0..c {
                let mut acc = 0.0f32;
                for (k, kv) in KERNEL.iter().enumerate() {
                    acc += kv * line[reflect101(x + k as isize - 2, w) * c + ch];
                }
                row[ox * c + ch] = acc;
            }
        }
    });

    let stride = ow * c;
    let mut out = vec![0.0f32; ow * oh * c];
    out.par_chunks_mut(stride).enumerate().for_each(|(oy, row)| {
        let y = (2 * oy) as isize;
        for (k, kv) in KERNEL.iter().enumerate() {
            let sy = reflect101(y + k as isize - 2, h);
            let line = &horiz[sy * stride..(sy + 1) * stride];
            for (o, s) in row.iter_mut().zip(line) {
                *o += kv * s;
            }
        }
    });
    ImageF32::new(ow, oh, c, out).expect("reduced dims are non-zero")
}

/// Zero-insert to `width` x `height` and blur with the gain-4 kernel.
pub(crate) fn expand(img: &ImageF32, width: usize, height: usize) -> ImageF32 {
    let (cw, ch_, c) = (img.width(), img.height(), img.channels());
    debug_assert_eq!(cw, width.div_ceil(2));
    debug_assert_eq!(ch_, height.div_ceil(2));
    let src = img.data();

    // horizontal: child rows -> parent width
    let stride = width * c;
    let mut horiz = vec![0.0f32; stride * ch_];
    horiz.par_chunks_mut(stride).enumerate().for_each(|(y, row)| {
        let line = &src[y * cw * c..(y + 1) * cw * c];
        for x in 0..width {
            for ch in 0..c {
                let mut acc = 0.0f32;
                for (k, kv) in KERNEL_UP.iter().enumerate() {
                    let j = reflect101(x as isize + k as isize - 2, width);
                    if j % 2 == 0 {
                        acc += kv * line[(j / 2) * c + ch];
                    }
                }
                row[x * c + ch] = acc;
            }
        }
    });

    let mut out = vec![0.0f32; stride * height];
    out.par_chunks_mut(stride).enumerate().for_each(|(y, row)| {
        for (k, kv) in KERNEL_UP.iter().enumerate() {
            let j = reflect101(y as isize + k as isize - 2, height);
            if j % 2 != 0 {
                continue;
            }
            let line = &horiz[(j / 2) * stride..(j / 2 + 1) * stride];
            for (o, s) in row.iter_mut().zip(line) {
                *o += kv * s;
            }
        }
    });
    ImageF32::new(width, height, c, out).expect("expanded dims are non-zero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn noise(w: usize, h: usize, c: usize, seed: u64) -> ImageF32 {
        let mut s = seed | 1;
        let data = (0..w * h * c)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 40) as f32 / (1u64 << 24) as f32
            })
            .collect();
        ImageF32::new(w, h, c, data).unwrap()
    }

    /// Full 2-D convolution with the 5x5 outer-product kernel, then decimation.
    fn reduce_oracle(img: &ImageF32) -> Vec<f64> {
        let k = [1.0, 4.0, 6.0, 4.0, 1.0];
        let (w, h) = img.dims();
        let mut out = Vec::new();
        for y in (0..h).step_by(2) {
            for x in (0..w).step_by(2) {
                let mut acc = 0.0f64;
                for dy in 0..5 {
                    for dx in 0..5 {
                        let sy = reflect101(y as isize + dy as isize - 2, h);
                        let sx = reflect101(x as isize + dx as isize - 2, w);
                        acc += k[dy] * k[dx] / 256.0 * img.pixel(sx, sy)[0] as f64;
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    #[test]
    fn reflect_indices() {
        assert_eq!(reflect101(-1, 5), 1);
        assert_eq!(reflect101(-2, 5), 2);
        assert_eq!(reflect101(5, 5), 3);
        assert_eq!(reflect101(6, 5), 2);
        assert_eq!(reflect101(-2, 2), 0);
        assert_eq!(reflect101(3, 2), 1);
        assert_eq!(reflect101(-2, 1), 0);
    }

    #[test]
    fn single_level_is_input() {
        let img = noise(9, 7, 3, 3);
        let g = gaussian_pyramid(&img, 1).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.level(0), &img);
        assert_eq!(laplacian_pyramid(&img, 1).unwrap().collapse(), img);
    }

    #[test]
    fn constant_levels_stay_constant() {
        let img = ImageF32::filled(20, 13, 3, 0.37);
        let g = gaussian_pyramid(&img, 4).unwrap();
        let dims: Vec<_> = g.levels().iter().map(|l| l.dims()).collect();
        assert_eq!(dims, vec![(20, 13), (10, 7), (5, 4), (3, 2)]);
        for level in g.levels() {
            assert!(level.data().iter().all(|v| (v - 0.37).abs() < 1e-6));
        }
        let l = laplacian_pyramid(&img, 4).unwrap();
        for detail in &l.levels()[..3] {
            assert!(detail.data().iter().all(|v| v.abs() < 1e-6));
        }
        assert!(l.level(3).data().iter().all(|v| (v - 0.37).abs() < 1e-6));
    }

    #[test]
    fn ramp_reduction_matches_direct_convolution() {
        let ramp = ImageF32::new(4, 4, 1, (0..16).map(|i| i as f32 / 15.0).collect()).unwrap();
        let level1 = gaussian_pyramid(&ramp, 2).unwrap().level(1).clone();
        let expect = reduce_oracle(&ramp);
        assert_eq!(level1.dims(), (2, 2));
        for (a, b) in level1.data().iter().zip(&expect) {
            assert!((*a as f64 - b).abs() < 1e-6, "{a} vs {b}");
        }
        let odd = noise(11, 9, 1, 99);
        let expect = reduce_oracle(&odd);
        for (a, b) in reduce(&odd).data().iter().zip(&expect) {
            assert!((*a as f64 - b).abs() < 1e-6);
        }
    }

    #[test]
    fn two_level_reconstruction_of_noise() {
        let img = noise(8, 8, 1, 7);
        let l = laplacian_pyramid(&img, 2).unwrap();
        let up = expand(l.level(1), 8, 8);
        for ((a, d), u) in img.data().iter().zip(l.level(0).data()).zip(up.data()) {
            assert!((a - (d + u)).abs() < 1e-5);
        }
    }

    #[test]
    fn too_many_levels() {
        let img = ImageF32::filled(16, 7, 1, 0.0);
        assert!(gaussian_pyramid(&img, 3).is_ok());
        assert!(matches!(gaussian_pyramid(&img, 4), Err(Error::TooManyLevels { needed: 8, .. })));
        assert!(gaussian_pyramid(&img, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn collapse_reconstructs(w in 16usize..40, h in 16usize..40, levels in 1usize..=4, c in prop::sample::select(vec![1usize, 3]), seed in any::<u64>()) {
            let img = noise(w, h, c, seed);
            let rec = laplacian_pyramid(&img, levels).unwrap().collapse();
            prop_assert_eq!(rec.dims(), img.dims());
            for (a, b) in img.data().iter().zip(rec.data()) {
                prop_assert!((a - b).abs() < 1e-5);
            }
        }
    }
}
