//! JPEG corruption through an actual baseline encoder and decoder.

use std::io::Cursor;

use afda_core::corruptions::JpegCodec;
use afda_core::Image;
use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageFormat};

use crate::io::{from_gray8, from_rgb8, to_bytes};

/// Encodes at the requested quality and decodes the stream back.
#[derive(Debug, Clone, Copy, Default)]
pub struct EncoderJpeg;

fn codec_error(detail: impl std::fmt::Display) -> afda_core::Error {
    afda_core::Error::Invalid {
        what: "jpeg",
        detail: detail.to_string(),
    }
}

impl JpegCodec for EncoderJpeg {
    fn round_trip(&self, image: &Image, quality: u8) -> afda_core::Result<Image> {
        let (h, w) = image.dims();
        let color = match image.channel_count() {
            1 => ExtendedColorType::L8,
            3 => ExtendedColorType::Rgb8,
            n => return Err(codec_error(format!("{n} channels"))),
        };
        let mut buf = Vec::new();
        JpegEncoder::new_with_quality(&mut buf, quality.clamp(1, 100))
            .encode(&to_bytes(image), w as u32, h as u32, color)
            .map_err(codec_error)?;
        let decoded = image::load(Cursor::new(buf), ImageFormat::Jpeg).map_err(codec_error)?;
        Ok(if image.channel_count() == 1 {
            from_gray8(&decoded.into_luma8())
        } else {
            from_rgb8(&decoded.into_rgb8())
        })
    }
}
