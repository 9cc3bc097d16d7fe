use std::io::Cursor;
use std::path::Path;

use image::{ColorType, DynamicImage, ImageEncoder, ImageFormat};

use super::ImageF32;
use crate::error::{Error, Result};

#[inline]
fn to_byte(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Reads a PNG or JPEG file into a 3-channel image, mapping bytes by `v / 255`.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageF32> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    decode_image(&bytes)
}

/// Decodes PNG or JPEG bytes. Grayscale is expanded to three channels and alpha is dropped.
pub fn decode_image(bytes: &[u8]) -> Result<ImageF32> {
    let format = image::guess_format(bytes)
        .map_err(|_| Error::UnsupportedFormat("unrecognized image signature".into()))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(Error::UnsupportedFormat(format!("{format:?}")));
    }
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::CorruptImage(e.to_string()))?;
    let rgb = match decoded {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageRgb8(_)
        | DynamicImage::ImageRgba8(_) => decoded.into_rgb8(),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "{:?} samples (only 8-bit images are supported)",
                other.color()
            )))
        }
    };
    let (w, h) = rgb.dimensions();
    let data = rgb.into_raw().into_iter().map(|b| b as f32 / 255.0).collect();
    ImageF32::new(w as usize, h as usize, 3, data)
}

/// Encodes as 8-bit PNG with `round(clamp(v, 0, 1) * 255)` quantization.
pub fn encode_png(image: &ImageF32) -> Result<Vec<u8>> {
    let bytes: Vec<u8> = image.data().iter().map(|&v| to_byte(v)).collect();
    let color = match image.channels() {
        1 => ColorType::L8,
        3 => ColorType::Rgb8,
        n => return Err(Error::UnsupportedChannelCount(n)),
    };
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(Cursor::new(&mut out))
        .write_image(
            &bytes,
            image.width() as u32,
            image.height() as u32,
            color.into(),
        )
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::Io(io),
            other => Error::CorruptImage(other.to_string()),
        })?;
    Ok(out)
}

pub fn save_image(image: &ImageF32, path: impl AsRef<Path>) -> Result<()> {
    let png = encode_png(image)?;
    std::fs::write(path, png)?;
    Ok(())
}
