//! 8-bit PNG images and label masks.
//!
//! Images decode to RGB in `[0, 1]` (`v / 255`); written samples are
//! quantized with round-to-nearest. Masks are single-channel 8-bit PNGs
//! whose values are class labels.

use std::fs;
use std::io::{BufWriter, Cursor};
use std::path::Path;

use afda_core::{Image, Mask};
use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{DynamicImage, ExtendedColorType, GrayImage, ImageEncoder, RgbImage};

use crate::error::{Error, Result};

/// `[0, 1]` to a byte, nearest level.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn from_rgb8(rgb: &RgbImage) -> Image {
    let (w, h) = rgb.dimensions();
    Image::from_interleaved(h as usize, w as usize, 3, &rgb.as_raw().iter().map(|&b| b as f64 / 255.0).collect::<Vec<_>>())
        .expect("byte values are in range")
}

pub fn from_gray8(gray: &GrayImage) -> Image {
    let (w, h) = gray.dimensions();
    Image::from_interleaved(h as usize, w as usize, 1, &gray.as_raw().iter().map(|&b| b as f64 / 255.0).collect::<Vec<_>>())
        .expect("byte values are in range")
}

/// Interleaved bytes of a 1- or 3-channel image.
pub fn to_bytes(image: &Image) -> Vec<u8> {
    image.to_interleaved().into_iter().map(quantize).collect()
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    image::load_from_memory(&bytes).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Decodes any supported raster to RGB.
pub fn read_image(path: &Path) -> Result<Image> {
    Ok(from_rgb8(&decode(path)?.into_rgb8()))
}

/// Decodes an 8-bit single-channel label raster.
pub fn read_mask(path: &Path) -> Result<Mask> {
    let gray = match decode(path)? {
        DynamicImage::ImageLuma8(g) => g,
        DynamicImage::ImageLumaA8(g) => DynamicImage::ImageLumaA8(g).into_luma8(),
        other => {
            return Err(Error::format(
                path,
                format!("mask must be 8-bit single channel, found {:?}", other.color()),
            ))
        }
    };
    let (w, h) = gray.dimensions();
    Ok(Mask::from_vec(h as usize, w as usize, gray.into_raw())?)
}

/// PNG bytes of an image (1 or 3 channels).
pub fn encode_png(image: &Image) -> Result<Vec<u8>> {
    let color = match image.channel_count() {
        1 => ExtendedColorType::L8,
        3 => ExtendedColorType::Rgb8,
        n => return Err(Error::Invalid(format!("cannot write a {n}-channel image as PNG"))),
    };
    let (h, w) = image.dims();
    png_bytes(&to_bytes(image), w, h, color)
}

fn png_bytes(raw: &[u8], w: usize, h: usize, color: ExtendedColorType) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    PngEncoder::new_with_quality(Cursor::new(&mut out), CompressionType::Fast, FilterType::Adaptive)
        .write_image(raw, w as u32, h as u32, color)
        .map_err(|e| Error::Invalid(format!("png encode: {e}")))?;
    Ok(out)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    std::io::Write::write_all(&mut w, bytes).map_err(|e| Error::io(path, e))?;
    w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    Ok(())
}

/// Writes an 8-bit PNG, creating parent directories.
pub fn write_image(path: &Path, image: &Image) -> Result<()> {
    write_bytes(path, &encode_png(image)?)
}

pub fn write_mask(path: &Path, mask: &Mask) -> Result<()> {
    let (h, w) = mask.dims();
    write_bytes(path, &png_bytes(mask.as_slice(), w, h, ExtendedColorType::L8)?)
}
