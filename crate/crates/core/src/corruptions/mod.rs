//! The common-corruptions benchmark: 15 kinds in four groups, each at
//! severities 1 to 5.
//!
//! Constants follow the published ImageNet-C tables. Frost uses a
//! procedural texture unless [`CorruptionAssets`] supplies one, and JPEG
//! runs through a pluggable [`JpegCodec`]; the built-in
//! [`SimulatedJpeg`] reproduces the lossy stages of a baseline encoder.

mod filters;
mod jpeg;
mod weather;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::image::{resize_box, sample_bilinear, Grid, Image, ImageChannel};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CorruptionKind {
    GaussianNoise,
    ShotNoise,
    ImpulseNoise,
    DefocusBlur,
    GlassBlur,
    MotionBlur,
    ZoomBlur,
    Snow,
    Frost,
    Fog,
    Brightness,
    Contrast,
    Elastic,
    Pixelate,
    Jpeg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionGroup {
    Noise,
    Blur,
    Weather,
    Digital,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 15] = [
        Self::GaussianNoise,
        Self::ShotNoise,
        Self::ImpulseNoise,
        Self::DefocusBlur,
        Self::GlassBlur,
        Self::MotionBlur,
        Self::ZoomBlur,
        Self::Snow,
        Self::Frost,
        Self::Fog,
        Self::Brightness,
        Self::Contrast,
        Self::Elastic,
        Self::Pixelate,
        Self::Jpeg,
    ];

    /// Kinds whose image quality falls strictly with severity.
    pub const MONOTONE: [CorruptionKind; 8] = [
        Self::GaussianNoise,
        Self::ShotNoise,
        Self::ImpulseNoise,
        Self::DefocusBlur,
        Self::ZoomBlur,
        Self::Pixelate,
        Self::Jpeg,
        Self::Contrast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::GaussianNoise => "gaussian_noise",
            Self::ShotNoise => "shot_noise",
            Self::ImpulseNoise => "impulse_noise",
            Self::DefocusBlur => "defocus_blur",
            Self::GlassBlur => "glass_blur",
            Self::MotionBlur => "motion_blur",
            Self::ZoomBlur => "zoom_blur",
            Self::Snow => "snow",
            Self::Frost => "frost",
            Self::Fog => "fog",
            Self::Brightness => "brightness",
            Self::Contrast => "contrast",
            Self::Elastic => "elastic",
            Self::Pixelate => "pixelate",
            Self::Jpeg => "jpeg",
        }
    }

    pub fn group(self) -> CorruptionGroup {
        use CorruptionKind::*;
        match self {
            GaussianNoise | ShotNoise | ImpulseNoise => CorruptionGroup::Noise,
            DefocusBlur | GlassBlur | MotionBlur | ZoomBlur => CorruptionGroup::Blur,
            Snow | Frost | Fog => CorruptionGroup::Weather,
            Brightness | Contrast | Elastic | Pixelate | Jpeg => CorruptionGroup::Digital,
        }
    }

    pub fn is_stochastic(self) -> bool {
        use CorruptionKind::*;
        matches!(
            self,
            GaussianNoise | ShotNoise | ImpulseNoise | GlassBlur | MotionBlur | Snow | Frost | Fog | Elastic
        )
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == key)
            .or(match key.as_str() {
                "gauss" | "gaussian" => Some(Self::GaussianNoise),
                "shot" => Some(Self::ShotNoise),
                "impulse" => Some(Self::ImpulseNoise),
                "defocus" => Some(Self::DefocusBlur),
                "glass" => Some(Self::GlassBlur),
                "motion" => Some(Self::MotionBlur),
                "zoom" => Some(Self::ZoomBlur),
                "bright" => Some(Self::Brightness),
                "pixel" => Some(Self::Pixelate),
                "jpeg_compression" => Some(Self::Jpeg),
                "elastic_transform" => Some(Self::Elastic),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownOp(String::from(s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CorruptionSpec {
    kind: CorruptionKind,
    severity: u8,
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, severity: u8) -> Result<Self> {
        if !(1..=5).contains(&severity) {
            return Err(Error::invalid("severity", format!("{severity} is outside 1..=5")));
        }
        Ok(CorruptionSpec { kind, severity })
    }

    pub fn kind(&self) -> CorruptionKind {
        self.kind
    }

    pub fn severity(&self) -> u8 {
        self.severity
    }

    /// Every kind at every severity, kind-major.
    pub fn grid() -> Vec<CorruptionSpec> {
        CorruptionKind::ALL
            .iter()
            .flat_map(|&kind| (1..=5).map(move |severity| CorruptionSpec { kind, severity }))
            .collect()
    }
}

impl fmt::Display for CorruptionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind, self.severity)
    }
}

/// Standard deviation of additive noise.
pub const GAUSSIAN_NOISE: [f64; 5] = [0.08, 0.12, 0.18, 0.26, 0.38];
/// Photon-count scale; lower is noisier.
pub const SHOT_NOISE: [f64; 5] = [60.0, 25.0, 12.0, 5.0, 3.0];
/// Fraction of samples replaced by salt or pepper.
pub const IMPULSE_NOISE: [f64; 5] = [0.03, 0.06, 0.09, 0.17, 0.27];
/// `(disk radius, alias blur)`
pub const DEFOCUS_BLUR: [(f64, f64); 5] = [(3.0, 0.1), (4.0, 0.5), (6.0, 0.5), (8.0, 0.5), (10.0, 0.5)];
/// `(sigma, max shift, iterations)`
pub const GLASS_BLUR: [(f64, usize, usize); 5] = [(0.7, 1, 2), (0.9, 2, 1), (1.0, 2, 3), (1.1, 3, 2), (1.5, 4, 2)];
/// `(radius, sigma)`
pub const MOTION_BLUR: [(usize, f64); 5] = [(10, 3.0), (15, 5.0), (15, 8.0), (15, 12.0), (20, 15.0)];
/// `(first, end, step)` of the zoom factor ranges, end exclusive.
pub const ZOOM_BLUR: [(f64, f64, f64); 5] = [
    (1.0, 1.11, 0.01),
    (1.0, 1.16, 0.01),
    (1.0, 1.21, 0.02),
    (1.0, 1.26, 0.02),
    (1.0, 1.31, 0.03),
];
/// Added to HSV value.
pub const BRIGHTNESS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
/// Contrast scale about the per-channel mean.
pub const CONTRAST: [f64; 5] = [0.4, 0.3, 0.2, 0.1, 0.05];
/// `(peak displacement, smoothing sigma)` as fractions of the short side.
pub const ELASTIC: [(f64, f64); 5] = [(0.01, 0.06), (0.02, 0.05), (0.03, 0.04), (0.045, 0.035), (0.06, 0.03)];
/// Linear downsampling factor.
pub const PIXELATE: [f64; 5] = [0.6, 0.5, 0.4, 0.3, 0.25];
/// Encoder quality.
pub const JPEG_QUALITY: [u8; 5] = [25, 18, 15, 10, 7];

/// A lossy encode/decode round trip at a quality level.
pub trait JpegCodec: Send + Sync {
    fn round_trip(&self, image: &Image, quality: u8) -> Result<Image>;
}

/// Baseline-JPEG lossy stages (YCbCr, 4:2:0, 8×8 DCT, IJG tables,
/// 8-bit rounding) without entropy coding.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulatedJpeg;

impl JpegCodec for SimulatedJpeg {
    fn round_trip(&self, image: &Image, quality: u8) -> Result<Image> {
        Ok(jpeg::jpeg_cycle(image, quality))
    }
}

/// Optional external inputs for higher-fidelity corruptions.
#[derive(Default)]
pub struct CorruptionAssets {
    /// Frost textures; one is picked at random per call.
    pub frost: Vec<Image>,
    /// Replaces [`SimulatedJpeg`].
    pub jpeg: Option<Box<dyn JpegCodec>>,
}

impl fmt::Debug for CorruptionAssets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorruptionAssets")
            .field("frost", &self.frost.len())
            .field("jpeg", &self.jpeg.is_some())
            .finish()
    }
}

/// Applies one corruption with the built-in assets.
pub fn corrupt<R: Rng + ?Sized>(image: &Image, spec: CorruptionSpec, rng: &mut R) -> Result<Image> {
    corrupt_with_assets(image, spec, rng, &CorruptionAssets::default())
}

pub fn corrupt_with_assets<R: Rng + ?Sized>(
    image: &Image,
    spec: CorruptionSpec,
    rng: &mut R,
    assets: &CorruptionAssets,
) -> Result<Image> {
    let s = spec.severity as usize - 1;
    let out = match spec.kind {
        CorruptionKind::GaussianNoise => {
            let normal = Normal::new(0.0, GAUSSIAN_NOISE[s]).expect("positive std");
            per_sample(image, |x| x + normal.sample(rng))
        }
        CorruptionKind::ShotNoise => {
            let lambda = SHOT_NOISE[s];
            per_sample(image, |x| {
                let mean = x * lambda;
                let count = if mean > 0.0 {
                    Poisson::new(mean).expect("positive mean").sample(rng)
                } else {
                    0.0
                };
                count / lambda
            })
        }
        CorruptionKind::ImpulseNoise => {
            let amount = IMPULSE_NOISE[s];
            per_sample(image, |x| {
                if rng.random::<f64>() < amount {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    x
                }
            })
        }
        CorruptionKind::DefocusBlur => {
            let (radius, alias) = DEFOCUS_BLUR[s];
            let kernel = filters::disk_kernel(radius, alias);
            per_plane(image, |g| filters::convolve(g, &kernel))
        }
        CorruptionKind::GlassBlur => glass_blur(image, GLASS_BLUR[s], rng),
        CorruptionKind::MotionBlur => {
            let (radius, sigma) = MOTION_BLUR[s];
            let angle = rng.random_range(-45.0..45.0);
            per_plane(image, |g| filters::motion_blur(g, radius, sigma, angle))
        }
        CorruptionKind::ZoomBlur => zoom_blur(image, ZOOM_BLUR[s]),
        CorruptionKind::Snow => weather::snow(image, spec.severity, rng),
        CorruptionKind::Frost => {
            let (h, w) = image.dims();
            let c = image.channel_count();
            let texture = if assets.frost.is_empty() {
                weather::frost_texture(h, w, c, rng)
            } else {
                let pick = rng.random_range(0..assets.frost.len());
                weather::frost_from_asset(&assets.frost[pick], h, w, c, rng)
            };
            weather::frost_blend(image, spec.severity, &texture)
        }
        CorruptionKind::Fog => weather::fog(image, spec.severity, rng),
        CorruptionKind::Brightness => brightness(image, BRIGHTNESS[s]),
        CorruptionKind::Contrast => {
            let c = CONTRAST[s];
            image.map_channels(|ch| {
                let mean = ch.as_slice().iter().sum::<f64>() / ch.as_slice().len() as f64;
                ImageChannel::from_clamped(ch.grid().map(|&x| (x - mean) * c + mean))
            })
        }
        CorruptionKind::Elastic => elastic(image, ELASTIC[s], rng),
        CorruptionKind::Pixelate => pixelate(image, PIXELATE[s]),
        CorruptionKind::Jpeg => {
            let quality = JPEG_QUALITY[s];
            match &assets.jpeg {
                Some(codec) => codec.round_trip(image, quality)?,
                None => SimulatedJpeg.round_trip(image, quality)?,
            }
        }
    };
    Ok(out)
}

fn per_sample(image: &Image, mut f: impl FnMut(f64) -> f64) -> Image {
    image.map_channels(|ch| ImageChannel::from_clamped(ch.grid().map(|&x| f(x))))
}

fn per_plane(image: &Image, mut f: impl FnMut(&Grid<f64>) -> Grid<f64>) -> Image {
    image.map_channels(|ch| ImageChannel::from_clamped(f(ch.grid())))
}

/// Raises the HSV value of every pixel by `delta`, hue and saturation
/// unchanged. Single-channel images are shifted directly.
pub fn brightness(image: &Image, delta: f64) -> Image {
    if image.channel_count() != 3 {
        return per_sample(image, |x| x + delta);
    }
    let (h, w) = image.dims();
    let (r, g, b) = (
        image.channel(0).as_slice(),
        image.channel(1).as_slice(),
        image.channel(2).as_slice(),
    );
    let scale: Vec<f64> = (0..h * w)
        .map(|i| {
            let v = r[i].max(g[i]).max(b[i]);
            if v > 0.0 {
                math::clamp01(v + delta) / v
            } else {
                f64::NAN
            }
        })
        .collect();
    let fill = math::clamp01(delta);
    let planes = [r, g, b]
        .iter()
        .map(|p| {
            ImageChannel::from_clamped(Grid::from_parts(
                h,
                w,
                p.iter()
                    .zip(&scale)
                    .map(|(&x, &k)| if k.is_nan() { fill } else { x * k })
                    .collect(),
            ))
        })
        .collect();
    Image::from_channels(planes).expect("planes share dimensions")
}

/// Box-filter down to `factor` of each side, then box-filter back up.
pub fn pixelate(image: &Image, factor: f64) -> Image {
    let (h, w) = image.dims();
    let sh = (math::floor(h as f64 * factor) as usize).max(1);
    let sw = (math::floor(w as f64 * factor) as usize).max(1);
    per_plane(image, |g| resize_box(&resize_box(g, sh, sw), h, w))
}

fn zoom_blur(image: &Image, (first, end, step): (f64, f64, f64)) -> Image {
    let count = math::ceil((end - first) / step - 1e-9) as usize;
    let zooms: Vec<f64> = (0..count).map(|i| first + i as f64 * step).collect();
    per_plane(image, |g| {
        let mut acc = g.clone();
        for &z in &zooms {
            let zoomed = filters::centre_zoom(g, z);
            acc.as_mut_slice().iter_mut().zip(zoomed.as_slice()).for_each(|(a, b)| *a += b);
        }
        acc.map(|&v| v / (zooms.len() + 1) as f64)
    })
}

fn glass_blur<R: Rng + ?Sized>(image: &Image, (sigma, shift, iterations): (f64, usize, usize), rng: &mut R) -> Image {
    let (h, w) = image.dims();
    let mut planes: Vec<Grid<f64>> = image
        .channels()
        .iter()
        .map(|ch| filters::gaussian_blur(ch.grid(), sigma))
        .collect();
    let d = shift as i64;
    for _ in 0..iterations {
        for r in (shift..h.saturating_sub(shift)).rev() {
            for c in (shift..w.saturating_sub(shift)).rev() {
                let dy = rng.random_range(-d..d);
                let dx = rng.random_range(-d..d);
                let (r2, c2) = ((r as i64 + dy) as usize, (c as i64 + dx) as usize);
                for p in planes.iter_mut() {
                    let a = *p.get(r, c);
                    *p.get_mut(r, c) = *p.get(r2, c2);
                    *p.get_mut(r2, c2) = a;
                }
            }
        }
    }
    let planes = planes
        .iter()
        .map(|p| ImageChannel::from_clamped(filters::gaussian_blur(p, sigma)))
        .collect();
    Image::from_channels(planes).expect("planes share dimensions")
}

fn elastic<R: Rng + ?Sized>(image: &Image, (magnitude, sigma): (f64, f64), rng: &mut R) -> Image {
    let (h, w) = image.dims();
    let side = h.min(w) as f64;
    let mut field = || {
        let raw = Grid::from_fn(h, w, |_, _| rng.random_range(-1.0..=1.0));
        let smooth = filters::gaussian_blur(&raw, sigma * side);
        let peak = smooth.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = if peak > 0.0 { magnitude * side / peak } else { 0.0 };
        smooth.map(|v| v * scale)
    };
    let dy = field();
    let dx = field();
    per_plane(image, |g| {
        Grid::from_fn(h, w, |r, c| {
            let y = (r as f64 + dy.get(r, c)).clamp(0.0, (h - 1) as f64);
            let x = (c as f64 + dx.get(r, c)).clamp(0.0, (w - 1) as f64);
            sample_bilinear(g, y, x, 0.0)
        })
    })
}
