//! Regenerates the bundled dark test images and their golden summary values.
//!
//! ```text
//! cargo run --release -p lumenlift-core --example make_testdata -- testdata/dark
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use lumenlift_core::pipeline::PREVIEW_ALPHA;
use lumenlift_core::{dac, decode_image, encode_png, enhance, load_image, mean_luma, save_image, synth, NlmParams, PipelineConfig};

const SCENES: [(&str, usize, usize, u64); 5] = [
    ("dusk_64x64.png", 64, 64, 1),
    ("hallway_96x64.png", 96, 64, 7),
    ("cellar_128x96.png", 128, 96, 19),
    ("alley_160x120.png", 160, 120, 23),
    ("porch_75x101.png", 75, 101, 31),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "testdata/dark".into()));
    std::fs::create_dir_all(&dir)?;
    let config = PipelineConfig::default();
    let defaults = NlmParams::default();
    let mut golden = BTreeMap::new();
    for (name, w, h, seed) in SCENES {
        let path = dir.join(name);
        save_image(&synth::dark_scene(w, h, seed), &path)?;
        let input = load_image(&path)?;
        let enhanced = enhance(&input, &config)?;
        let enhanced_png = decode_image(&encode_png(&enhanced)?)?;
        let preview = decode_image(&encode_png(&dac(&input, PREVIEW_ALPHA, config.gamma, &defaults)?)?)?;
        golden.insert(
            name,
            serde_json::json!({
                "input_mean_luma": mean_luma(&input)?,
                "enhance_mean_luma": mean_luma(&enhanced)?,
                "enhance_png_mean_luma": mean_luma(&enhanced_png)?,
                "preview_png_mean_luma": mean_luma(&preview)?,
            }),
        );
    }
    std::fs::write(dir.join("golden.json"), serde_json::to_string_pretty(&golden)? + "\n")?;
    println!("wrote {} images to {}", golden.len(), dir.display());
    Ok(())
}
