//! Snow, frost and fog.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::filters::{centre_zoom, motion_blur, plasma_fractal, rotate180};
use crate::image::{sample_bilinear, Grid, Image, ImageChannel};
use crate::math;

/// `(mean, std, zoom, threshold, blur radius, blur sigma, blend)`
pub(crate) const SNOW: [(f64, f64, f64, f64, usize, f64, f64); 5] = [
    (0.1, 0.3, 3.0, 0.5, 10, 4.0, 0.8),
    (0.2, 0.3, 2.0, 0.5, 12, 4.0, 0.7),
    (0.55, 0.3, 4.0, 0.9, 12, 8.0, 0.7),
    (0.55, 0.3, 4.5, 0.85, 12, 8.0, 0.65),
    (0.55, 0.3, 2.5, 0.85, 12, 12.0, 0.55),
];

/// `(image weight, frost weight)`
pub(crate) const FROST: [(f64, f64); 5] = [(1.0, 0.4), (0.8, 0.6), (0.7, 0.7), (0.65, 0.7), (0.6, 0.75)];

/// `(fog strength, fractal decay)`
pub(crate) const FOG: [(f64, f64); 5] = [(1.5, 2.0), (2.0, 2.0), (2.5, 1.7), (2.5, 1.5), (3.0, 1.4)];

pub(crate) fn snow<R: Rng + ?Sized>(image: &Image, severity: u8, rng: &mut R) -> Image {
    let (mean, std, zoom, threshold, radius, sigma, blend) = SNOW[severity as usize - 1];
    let (h, w) = image.dims();
    let normal = Normal::new(mean, std).expect("positive std");
    let layer = Grid::from_fn(h, w, |_, _| normal.sample(rng));
    let layer = centre_zoom(&layer, zoom).map(|&v| if v < threshold { 0.0 } else { math::clamp01(v) });
    let angle = rng.random_range(-135.0..-45.0);
    let flakes = motion_blur(&layer, radius, sigma, angle);
    let flakes_flipped = rotate180(&flakes);
    let gray = image.luma();
    image.map_channels(|ch| {
        let g = ch.grid();
        ImageChannel::from_clamped(Grid::from_fn(h, w, |r, c| {
            let x = *g.get(r, c);
            let lifted = x.max(*gray.get(r, c) * 1.5 + 0.5);
            blend * x + (1.0 - blend) * lifted + *flakes.get(r, c) + *flakes_flipped.get(r, c)
        }))
    })
}

/// Procedural ice texture: ridged multi-scale plasma with a cool tint,
/// values in `[0, 1]`, one plane per channel.
pub(crate) fn frost_texture<R: Rng + ?Sized>(h: usize, w: usize, channels: usize, rng: &mut R) -> Vec<Grid<f64>> {
    let size = h.max(w).next_power_of_two().max(8);
    let coarse = plasma_fractal(size, 2.0, rng);
    let fine = plasma_fractal(size, 1.4, rng);
    let (oy, ox) = (rng.random_range(0..=size - h), rng.random_range(0..=size - w));
    let base = Grid::from_fn(h, w, |r, c| {
        let a = 1.0 - (2.0 * coarse.get(r + oy, c + ox) - 1.0).abs();
        let b = 1.0 - (2.0 * fine.get(r + oy, c + ox) - 1.0).abs();
        0.25 + 0.33 * math::pow(a, 3.0) + 0.4 * math::pow(b, 6.0)
    });
    (0..channels)
        .map(|ch| {
            let tint = if channels == 3 { [0.85, 0.95, 1.0][ch] } else { 1.0 };
            base.map(|v| math::clamp01(v * tint))
        })
        .collect()
}

/// Random crop of a supplied texture, resized up if smaller than the image.
pub(crate) fn frost_from_asset<R: Rng + ?Sized>(asset: &Image, h: usize, w: usize, channels: usize, rng: &mut R) -> Vec<Grid<f64>> {
    let (ah, aw) = asset.dims();
    let scale = (h as f64 / ah as f64).max(w as f64 / aw as f64).max(1.0);
    let (sh, sw) = (math::ceil(ah as f64 * scale) as usize, math::ceil(aw as f64 * scale) as usize);
    let (oy, ox) = (rng.random_range(0..=sh - h), rng.random_range(0..=sw - w));
    (0..channels)
        .map(|ch| {
            let src = asset.channel(ch.min(asset.channel_count() - 1)).grid();
            Grid::from_fn(h, w, |r, c| {
                let y = ((r + oy) as f64 + 0.5) / scale - 0.5;
                let x = ((c + ox) as f64 + 0.5) / scale - 0.5;
                sample_bilinear(src, y.clamp(0.0, (ah - 1) as f64), x.clamp(0.0, (aw - 1) as f64), 0.0)
            })
        })
        .collect()
}

pub(crate) fn frost_blend(image: &Image, severity: u8, texture: &[Grid<f64>]) -> Image {
    let (a, b) = FROST[severity as usize - 1];
    let mut planes = texture.iter();
    image.map_channels(|ch| {
        let t = planes.next().expect("one texture plane per channel");
        ImageChannel::from_clamped(Grid::from_fn(ch.height(), ch.width(), |r, c| a * ch.get(r, c) + b * t.get(r, c)))
    })
}

pub(crate) fn fog<R: Rng + ?Sized>(image: &Image, severity: u8, rng: &mut R) -> Image {
    let (strength, decay) = FOG[severity as usize - 1];
    let (h, w) = image.dims();
    let size = h.max(w).next_power_of_two().max(2);
    let plasma = plasma_fractal(size, decay, rng);
    image.map_channels(|ch| {
        let peak = ch.as_slice().iter().cloned().fold(0.0, f64::max);
        ImageChannel::from_clamped(Grid::from_fn(h, w, |r, c| {
            let v = ch.get(r, c) + strength * plasma.get(r, c);
            v * peak / (peak + strength)
        }))
    })
}
