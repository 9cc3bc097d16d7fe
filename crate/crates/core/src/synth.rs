//! Deterministic synthetic images for tests, benchmarks and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::imgcore::ImageF32;

/// A flat RGB image at `level` with i.i.d. Gaussian noise of deviation `sigma`,
/// clamped to `[0, 1]`.
pub fn flat_noise(width: usize, height: usize, level: f32, sigma: f32, seed: u64) -> ImageF32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0f32, sigma).expect("finite sigma");
    let data = (0..width * height * 3)
        .map(|_| (level + normal.sample(&mut rng)).clamp(0.0, 1.0))
        .collect();
    ImageF32::new(width, height, 3, data).expect("non-empty image")
}

/// Uniform noise in `[0, max]`, used as benchmark input.
pub fn uniform_noise(width: usize, height: usize, max: f32, seed: u64) -> ImageF32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height * 3).map(|_| rng.random::<f32>() * max).collect();
    ImageF32::new(width, height, 3, data).expect("non-empty image")
}

/// A dim, tinted scene with smooth shading, one brighter object and sensor-like
/// noise. Mean luma is close to 0.1.
pub fn dark_scene(width: usize, height: usize, seed: u64) -> ImageF32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: f32 = rng.random::<f32>() * std::f32::consts::TAU;
    let cx = rng.random_range(0.2f32..0.8) * width as f32;
    let cy = rng.random_range(0.2f32..0.8) * height as f32;
    let radius = width.min(height) as f32 / 7.0;
    let tint = [rng.random_range(0.9f32..1.2), 1.0, rng.random_range(0.7f32..1.0)];
    let normal = Normal::new(0.0f32, 0.008).expect("finite sigma");

    let mut data = Vec::with_capacity(width * height * 3);
    for y in 0..height {
        for x in 0..width {
            let u = x as f32 / width as f32;
            let v = y as f32 / height as f32;
            let shade = 0.5 + 0.5 * (std::f32::consts::TAU * 1.3 * u + phase).sin() * (std::f32::consts::TAU * 0.9 * v).cos();
            let mut base = 0.035 + 0.1 * shade;
            let d = ((x as f32 - cx).powi(2) + (y as f32 - cy).powi(2)).sqrt();
            if d < radius {
                base += 0.22 * (1.0 - d / radius);
            }
            for t in tint {
                data.push((base * t + normal.sample(&mut rng)).clamp(0.0, 1.0));
            }
        }
    }
    ImageF32::new(width, height, 3, data).expect("non-empty image")
}
