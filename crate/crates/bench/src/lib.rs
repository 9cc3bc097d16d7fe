//! Shared inputs for the pipeline benchmarks.

use lumenlift_core::{synth, ImageF32};

/// Resolutions named after the rows of the runtime table.
pub const RESOLUTIONS: [(&str, usize, usize); 3] = [("vga", 640, 480), ("hd", 1280, 720), ("fhd", 1920, 1080)];

/// Dark synthetic noise, the same input the CLI `bench` command uses.
pub fn bench_input(width: usize, height: usize) -> ImageF32 {
    synth::uniform_noise(width, height, 0.25, 0)
}
