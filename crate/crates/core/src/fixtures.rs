//! Seeded synthetic rasters for demos, benchmarks and tests.
//!
//! Images are sums of a few random low-frequency sinusoids plus bright
//! elliptical blobs, so they carry both smooth regions and edges. Masks
//! label the same kind of blobs.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{Grid, Image, ImageChannel, Mask};
use crate::math;

struct Blob {
    cy: f64,
    cx: f64,
    ry: f64,
    rx: f64,
}

impl Blob {
    fn random<R: Rng>(rng: &mut R, h: usize, w: usize) -> Self {
        Blob {
            cy: rng.random_range(0.2..0.8) * h as f64,
            cx: rng.random_range(0.2..0.8) * w as f64,
            ry: rng.random_range(0.08..0.25) * h as f64,
            rx: rng.random_range(0.08..0.25) * w as f64,
        }
    }

    fn inside(&self, r: usize, c: usize) -> f64 {
        let dy = (r as f64 - self.cy) / self.ry.max(0.5);
        let dx = (c as f64 - self.cx) / self.rx.max(0.5);
        dy * dy + dx * dx
    }
}

/// Smooth textured image with intensities in `[0, 1]`.
pub fn textured_image(height: usize, width: usize, channels: usize, seed: u64) -> Image {
    domain_image(height, width, channels, seed, 0)
}

/// Textured image with a per-domain colour gain, offset and texture
/// frequency; domain 0 is neutral.
pub fn domain_image(height: usize, width: usize, channels: usize, seed: u64, domain: u32) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((domain as u64) << 48));
    let mut style = ChaCha8Rng::seed_from_u64(0xd0_3a17 + domain as u64);
    let freq_scale = if domain == 0 { 1.0 } else { style.random_range(0.6..2.5) };
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(0.5..4.0) * freq_scale,
                rng.random_range(0.5..4.0) * freq_scale,
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.05..0.15),
            )
        })
        .collect();
    let blobs: Vec<Blob> = (0..3).map(|_| Blob::random(&mut rng, height, width)).collect();
    let planes = (0..channels)
        .map(|ch| {
            let (gain, offset) = if domain == 0 {
                (1.0, 0.0)
            } else {
                (style.random_range(0.5..1.1), style.random_range(-0.15..0.25))
            };
            let tint = 0.05 * ch as f64;
            ImageChannel::from_clamped(Grid::from_fn(height, width, |r, c| {
                let y = r as f64 / height as f64;
                let x = c as f64 / width as f64;
                let mut v = 0.45 + tint;
                for (fy, fx, ph, amp) in &waves {
                    v += amp * math::sin(2.0 * PI * (fy * y + fx * x) + ph + ch as f64);
                }
                for (i, b) in blobs.iter().enumerate() {
                    if b.inside(r, c) <= 1.0 {
                        v += 0.2 + 0.05 * i as f64 - 0.03 * ch as f64;
                    }
                }
                v * gain + offset
            }))
        })
        .collect();
    Image::from_channels(planes).expect("planes share dimensions")
}

/// Mask with up to `classes - 1` labelled blobs on background 0.
pub fn blob_mask(height: usize, width: usize, classes: u8, seed: u64) -> Mask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9) ^ 0x3a5c);
    let blobs: Vec<Blob> = (1..classes.max(1)).map(|_| Blob::random(&mut rng, height, width)).collect();
    Mask::new(Grid::from_fn(height, width, |r, c| {
        blobs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, b)| b.inside(r, c) <= 1.0)
            .map(|(i, _)| i as u8 + 1)
            .unwrap_or(0)
    }))
}

/// Independent uniform values in `[0, 1]`.
pub fn noise_channel(height: usize, width: usize, seed: u64) -> ImageChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImageChannel::from_clamped(Grid::from_fn(height, width, |_, _| rng.random::<f64>()))
}
