//! Base augmentation operations and their magnitude table.
//!
//! Magnitudes follow the AugMix convention: a level `l` in `1..=10` is
//! turned into a per-draw strength `s ~ U(0.1, l)`, and each operation maps
//! `s` linearly onto its own range (rotation up to 30 degrees, shear up to
//! 0.3, translation up to a third of the side, posterize up to 4 dropped
//! bits, solarize threshold down to 0). Geometric strengths get a random
//! sign.

use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::image::{sample_bilinear, Grid, Image, ImageChannel, Mask};
use crate::math;

/// Strength scale shared by every op: level 10 is the maximum.
pub const MAX_LEVEL: f64 = 10.0;
pub const MAX_ROTATE_DEGREES: f64 = 30.0;
pub const MAX_SHEAR: f64 = 0.3;
/// Fraction of the side length.
pub const MAX_TRANSLATE_FRACTION: f64 = 1.0 / 3.0;
pub const MAX_POSTERIZE_DROP_BITS: f64 = 4.0;
pub const SOLARIZE_LEVELS: f64 = 256.0;
/// Lower bound of the per-draw strength.
pub const MIN_STRENGTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AugOpKind {
    AutoContrast,
    Equalize,
    Posterize,
    Rotate,
    Solarize,
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
}

impl AugOpKind {
    pub const ALL: [AugOpKind; 9] = [
        AugOpKind::AutoContrast,
        AugOpKind::Equalize,
        AugOpKind::Posterize,
        AugOpKind::Rotate,
        AugOpKind::Solarize,
        AugOpKind::ShearX,
        AugOpKind::ShearY,
        AugOpKind::TranslateX,
        AugOpKind::TranslateY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AugOpKind::AutoContrast => "auto_contrast",
            AugOpKind::Equalize => "equalize",
            AugOpKind::Posterize => "posterize",
            AugOpKind::Rotate => "rotate",
            AugOpKind::Solarize => "solarize",
            AugOpKind::ShearX => "shear_x",
            AugOpKind::ShearY => "shear_y",
            AugOpKind::TranslateX => "translate_x",
            AugOpKind::TranslateY => "translate_y",
        }
    }

    /// Moves pixels (and therefore mask labels).
    pub fn is_geometric(self) -> bool {
        matches!(
            self,
            AugOpKind::Rotate
                | AugOpKind::ShearX
                | AugOpKind::ShearY
                | AugOpKind::TranslateX
                | AugOpKind::TranslateY
        )
    }

    /// Draws concrete parameters for an image of `(height, width)`.
    pub fn sample<R: Rng + ?Sized>(
        self,
        level: u32,
        rng: &mut R,
        (height, width): (usize, usize),
    ) -> AugOp {
        let upper = (level as f64).max(MIN_STRENGTH);
        let strength = if upper > MIN_STRENGTH {
            rng.random_range(MIN_STRENGTH..upper)
        } else {
            MIN_STRENGTH
        };
        let int_param = |max: f64| math::floor(strength * max / MAX_LEVEL);
        let float_param = |max: f64| strength * max / MAX_LEVEL;
        let mut signed = |v: f64| if rng.random_bool(0.5) { -v } else { v };
        match self {
            AugOpKind::AutoContrast => AugOp::AutoContrast,
            AugOpKind::Equalize => AugOp::Equalize,
            AugOpKind::Posterize => AugOp::Posterize {
                bits: (MAX_POSTERIZE_DROP_BITS - int_param(MAX_POSTERIZE_DROP_BITS)).max(0.0) as u8,
            },
            AugOpKind::Solarize => {
                let threshold8 = SOLARIZE_LEVELS - int_param(SOLARIZE_LEVELS);
                AugOp::Solarize {
                    threshold: ((threshold8 - 1.0) / 255.0).clamp(0.0, 1.0),
                }
            }
            AugOpKind::Rotate => AugOp::Rotate {
                degrees: signed(int_param(MAX_ROTATE_DEGREES)),
            },
            AugOpKind::ShearX => AugOp::ShearX {
                factor: signed(float_param(MAX_SHEAR)),
            },
            AugOpKind::ShearY => AugOp::ShearY {
                factor: signed(float_param(MAX_SHEAR)),
            },
            AugOpKind::TranslateX => AugOp::TranslateX {
                pixels: signed(int_param(width as f64 * MAX_TRANSLATE_FRACTION)),
            },
            AugOpKind::TranslateY => AugOp::TranslateY {
                pixels: signed(int_param(height as f64 * MAX_TRANSLATE_FRACTION)),
            },
        }
    }
}

impl fmt::Display for AugOpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugOpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        AugOpKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::UnknownOp(s.to_string()))
    }
}

/// An operation with its parameters fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AugOp {
    /// Per-channel min/max stretch to the full range.
    AutoContrast,
    /// Per-channel histogram equalization on 256 levels.
    Equalize,
    /// Keep the top `bits` bits of the 8-bit value.
    Posterize { bits: u8 },
    /// Invert values strictly above `threshold`.
    Solarize { threshold: f64 },
    /// Counter-clockwise rotation about the image centre.
    Rotate { degrees: f64 },
    /// Source `x = x + factor·y`.
    ShearX { factor: f64 },
    /// Source `y = y + factor·x`.
    ShearY { factor: f64 },
    /// Source `x = x + pixels`.
    TranslateX { pixels: f64 },
    /// Source `y = y + pixels`.
    TranslateY { pixels: f64 },
}

impl AugOp {
    pub fn kind(&self) -> AugOpKind {
        match self {
            AugOp::AutoContrast => AugOpKind::AutoContrast,
            AugOp::Equalize => AugOpKind::Equalize,
            AugOp::Posterize { .. } => AugOpKind::Posterize,
            AugOp::Solarize { .. } => AugOpKind::Solarize,
            AugOp::Rotate { .. } => AugOpKind::Rotate,
            AugOp::ShearX { .. } => AugOpKind::ShearX,
            AugOp::ShearY { .. } => AugOpKind::ShearY,
            AugOp::TranslateX { .. } => AugOpKind::TranslateX,
            AugOp::TranslateY { .. } => AugOpKind::TranslateY,
        }
    }

    pub fn is_geometric(&self) -> bool {
        self.kind().is_geometric()
    }

    /// Single scalar parameter, for manifests.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            AugOp::AutoContrast | AugOp::Equalize => None,
            AugOp::Posterize { bits } => Some(bits as f64),
            AugOp::Solarize { threshold } => Some(threshold),
            AugOp::Rotate { degrees } => Some(degrees),
            AugOp::ShearX { factor } | AugOp::ShearY { factor } => Some(factor),
            AugOp::TranslateX { pixels } | AugOp::TranslateY { pixels } => Some(pixels),
        }
    }

    /// Inverse map from output pixel `(x, y)` to source coordinates.
    fn source_coords(&self, height: usize, width: usize) -> Option<[f64; 6]> {
        // [a, b, c, d, e, f]: src_x = a·x + b·y + c, src_y = d·x + e·y + f
        match *self {
            AugOp::Rotate { degrees } => {
                let t = degrees.to_radians();
                let (s, c) = (math::sin(t), math::cos(t));
                let cx = (width as f64 - 1.0) / 2.0;
                let cy = (height as f64 - 1.0) / 2.0;
                // output rotated counter-clockwise: sample source at R(-t)
                Some([c, -s, cx - c * cx + s * cy, s, c, cy - s * cx - c * cy])
            }
            AugOp::ShearX { factor } => Some([1.0, factor, 0.0, 0.0, 1.0, 0.0]),
            AugOp::ShearY { factor } => Some([1.0, 0.0, 0.0, factor, 1.0, 0.0]),
            AugOp::TranslateX { pixels } => Some([1.0, 0.0, pixels, 0.0, 1.0, 0.0]),
            AugOp::TranslateY { pixels } => Some([1.0, 0.0, 0.0, 0.0, 1.0, pixels]),
            _ => None,
        }
    }

    /// Applies the op to every image channel. Photometric ops return the
    /// mask unchanged; geometric ops warp it with nearest-neighbour lookup
    /// and fill label 0.
    pub fn apply(&self, image: &Image, mask: Option<&Mask>) -> Result<(Image, Option<Mask>)> {
        if let Some(m) = mask {
            if m.dims() != image.dims() {
                return Err(Error::DimensionMismatch {
                    expected: image.dims(),
                    found: m.dims(),
                });
            }
        }
        Ok((self.apply_image(image), mask.map(|m| self.apply_mask(m))))
    }

    pub fn apply_image(&self, image: &Image) -> Image {
        let (h, w) = image.dims();
        match self.source_coords(h, w) {
            Some(coeffs) => image.map_channels(|ch| warp_channel(ch, &coeffs)),
            None => image.map_channels(|ch| self.photometric(ch)),
        }
    }

    pub fn apply_mask(&self, mask: &Mask) -> Mask {
        let (h, w) = mask.dims();
        match self.source_coords(h, w) {
            Some(coeffs) => warp_mask(mask, &coeffs),
            None => mask.clone(),
        }
    }

    fn photometric(&self, ch: &ImageChannel) -> ImageChannel {
        match *self {
            AugOp::AutoContrast => auto_contrast(ch),
            AugOp::Equalize => equalize(ch),
            AugOp::Posterize { bits } => posterize(ch, bits),
            AugOp::Solarize { threshold } => solarize(ch, threshold),
            _ => ch.clone(),
        }
    }
}

#[inline]
fn to_u8(v: f64) -> u8 {
    math::round(v * 255.0).clamp(0.0, 255.0) as u8
}

fn auto_contrast(ch: &ImageChannel) -> ImageChannel {
    let (lo, hi) = ch
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi <= lo {
        return ch.clone();
    }
    let scale = 1.0 / (hi - lo);
    ImageChannel::from_clamped(ch.grid().map(|&v| (v - lo) * scale))
}

/// Histogram equalization with the same lookup table construction as the
/// Pillow implementation.
fn equalize(ch: &ImageChannel) -> ImageChannel {
    let mut hist = [0usize; 256];
    for &v in ch.as_slice() {
        hist[to_u8(v) as usize] += 1;
    }
    let last_nonzero = hist.iter().rposition(|&c| c > 0).map(|i| hist[i]).unwrap_or(0);
    let step = (ch.as_slice().len() - last_nonzero) / 255;
    if step == 0 {
        return ch.clone();
    }
    let mut lut = [0u8; 256];
    let mut n = step / 2;
    for (i, count) in hist.iter().enumerate() {
        lut[i] = (n / step).min(255) as u8;
        n += count;
    }
    ImageChannel::from_clamped(ch.grid().map(|&v| lut[to_u8(v) as usize] as f64 / 255.0))
}

fn posterize(ch: &ImageChannel, bits: u8) -> ImageChannel {
    let bits = bits.min(8);
    let keep: u8 = if bits == 0 { 0 } else { !((1u16 << (8 - bits)) - 1) as u8 };
    ImageChannel::from_clamped(ch.grid().map(|&v| (to_u8(v) & keep) as f64 / 255.0))
}

fn solarize(ch: &ImageChannel, threshold: f64) -> ImageChannel {
    ImageChannel::from_clamped(ch.grid().map(|&v| if v > threshold { 1.0 - v } else { v }))
}

fn warp_channel(ch: &ImageChannel, k: &[f64; 6]) -> ImageChannel {
    let g = ch.grid();
    let (h, w) = g.dims();
    ImageChannel::from_clamped(Grid::from_fn(h, w, |r, c| {
        let (x, y) = (c as f64, r as f64);
        let sx = k[0] * x + k[1] * y + k[2];
        let sy = k[3] * x + k[4] * y + k[5];
        sample_bilinear(g, sy, sx, 0.0)
    }))
}

fn warp_mask(mask: &Mask, k: &[f64; 6]) -> Mask {
    let g = mask.grid();
    let (h, w) = g.dims();
    Mask::new(Grid::from_fn(h, w, |r, c| {
        let (x, y) = (c as f64, r as f64);
        let sx = math::round(k[0] * x + k[1] * y + k[2]);
        let sy = math::round(k[3] * x + k[4] * y + k[5]);
        if sx < 0.0 || sy < 0.0 || sx >= w as f64 || sy >= h as f64 {
            0
        } else {
            *g.get(sy as usize, sx as usize)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ramp(h: usize, w: usize) -> Image {
        Image::from_fn(h, w, 1, |r, c, _| (r * w + c) as f64 / (h * w - 1) as f64).unwrap()
    }

    fn blob_mask(h: usize, w: usize) -> Mask {
        Mask::new(Grid::from_fn(h, w, |r, c| {
            if (4..10).contains(&r) && (3..8).contains(&c) {
                2
            } else if r > 12 {
                1
            } else {
                0
            }
        }))
    }

    #[test]
    fn zero_rotation_is_identity() {
        let img = ramp(16, 12);
        let mask = blob_mask(16, 12);
        let (out, m) = AugOp::Rotate { degrees: 0.0 }.apply(&img, Some(&mask)).unwrap();
        assert!(img.max_abs_diff(&out).unwrap() < 1e-6);
        assert_eq!(m.unwrap(), mask);
    }

    #[test]
    fn solarize_at_one_is_identity() {
        let img = ramp(8, 8);
        let (out, _) = AugOp::Solarize { threshold: 1.0 }.apply(&img, None).unwrap();
        assert_eq!(out, img);
        let (half, _) = AugOp::Solarize { threshold: 0.5 }.apply(&img, None).unwrap();
        assert!(half.channel(0).as_slice().iter().all(|&v| v <= 0.5 + 1e-12));
    }

    #[test]
    fn posterize_four_bits_has_sixteen_levels() {
        let img = ramp(16, 16);
        let (out, _) = AugOp::Posterize { bits: 4 }.apply(&img, None).unwrap();
        let mut levels: Vec<u8> = out.channel(0).as_slice().iter().map(|&v| to_u8(v)).collect();
        levels.sort_unstable();
        levels.dedup();
        assert_eq!(levels.len(), 16);
        assert!(levels.iter().all(|l| l % 16 == 0));
    }

    #[test]
    fn photometric_ops_keep_mask() {
        let img = ramp(16, 12);
        let mask = blob_mask(16, 12);
        for op in [
            AugOp::AutoContrast,
            AugOp::Equalize,
            AugOp::Posterize { bits: 2 },
            AugOp::Solarize { threshold: 0.3 },
        ] {
            let (_, m) = op.apply(&img, Some(&mask)).unwrap();
            assert_eq!(m.as_ref(), Some(&mask), "{op:?}");
        }
    }

    #[test]
    fn translate_moves_mask_and_fills_zero() {
        let mask = blob_mask(16, 12);
        let moved = AugOp::TranslateX { pixels: 2.0 }.apply_mask(&mask);
        assert_eq!(moved.get(5, 1), 2);
        assert_eq!(moved.get(5, 11), 0);
        assert_eq!(moved.get(5, 10), 0);
        let img = ramp(16, 12);
        let shifted = AugOp::TranslateY { pixels: -3.0 }.apply_image(&img);
        assert_eq!(shifted.channel(0).get(0, 5), 0.0);
        assert!((shifted.channel(0).get(5, 5) - img.channel(0).get(2, 5)).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_rotates_counter_clockwise() {
        let mut data = alloc::vec![0.0; 25];
        data[2] = 1.0; // top centre
        let img = Image::from_interleaved(5, 5, 1, &data).unwrap();
        let out = AugOp::Rotate { degrees: 90.0 }.apply_image(&img);
        // top centre moves to left centre
        assert!((out.channel(0).get(2, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equalize_spreads_narrow_histogram() {
        let img = Image::from_fn(64, 64, 1, |r, _, _| 0.4 + 0.1 * ((r / 4) as f64 / 15.0)).unwrap();
        let (out, _) = AugOp::Equalize.apply(&img, None).unwrap();
        let s = out.channel(0).as_slice();
        let lo = s.iter().cloned().fold(1.0, f64::min);
        let hi = s.iter().cloned().fold(0.0, f64::max);
        assert!(hi - lo > 0.8);
    }

    #[test]
    fn sampled_magnitudes_respect_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            for kind in AugOpKind::ALL {
                let op = kind.sample(10, &mut rng, (30, 60));
                match op {
                    AugOp::Rotate { degrees } => assert!(degrees.abs() <= 30.0),
                    AugOp::ShearX { factor } | AugOp::ShearY { factor } => assert!(factor.abs() <= 0.3),
                    AugOp::TranslateX { pixels } => assert!(pixels.abs() <= 20.0),
                    AugOp::TranslateY { pixels } => assert!(pixels.abs() <= 10.0),
                    AugOp::Posterize { bits } => assert!(bits <= 4),
                    AugOp::Solarize { threshold } => assert!((0.0..=1.0).contains(&threshold)),
                    _ => {}
                }
                assert_eq!(op.kind(), kind);
            }
        }
        let gentle = AugOpKind::Rotate.sample(3, &mut rng, (30, 30));
        assert!(gentle.parameter().unwrap().abs() <= 9.0);
    }

    #[test]
    fn unknown_op_name() {
        assert_eq!("shear-x".parse::<AugOpKind>().unwrap(), AugOpKind::ShearX);
        assert!(matches!("cutout".parse::<AugOpKind>(), Err(Error::UnknownOp(_))));
    }
}
