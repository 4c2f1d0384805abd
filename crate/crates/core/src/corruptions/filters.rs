//! Spatial filters shared by the blur-type corruptions.

use alloc::vec;
use alloc::vec::Vec;

use crate::image::{sample_bilinear, Grid};
use crate::math;

/// Separable Gaussian blur, kernel truncated at `4σ`, edge pixels
/// replicated.
pub(crate) fn gaussian_blur(grid: &Grid<f64>, sigma: f64) -> Grid<f64> {
    if sigma <= 0.0 {
        return grid.clone();
    }
    let radius = math::ceil(4.0 * sigma) as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| math::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let (h, w) = grid.dims();
    let clampi = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let horizontal: Grid<f64> = Grid::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wgt)| wgt * *grid.get(r, clampi(c as isize + k as isize - radius, w)))
            .sum()
    });
    Grid::from_fn(h, w, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, wgt)| wgt * *horizontal.get(clampi(r as isize + k as isize - radius, h), c))
            .sum()
    })
}

/// Index into `0..n` with reflect-101 borders (`dcb|abcd|cba`).
#[inline]
fn reflect101(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut j = i.rem_euclid(period);
    if j >= n {
        j = period - j;
    }
    j as usize
}

/// Dense 2-D correlation with an odd square kernel, reflect-101 borders.
pub(crate) fn convolve(grid: &Grid<f64>, kernel: &Grid<f64>) -> Grid<f64> {
    let (h, w) = grid.dims();
    let (kh, kw) = kernel.dims();
    let (oy, ox) = ((kh / 2) as isize, (kw / 2) as isize);
    let taps: Vec<(isize, isize, f64)> = (0..kh)
        .flat_map(|i| (0..kw).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let k = *kernel.get(i, j);
            (k != 0.0).then_some((i as isize - oy, j as isize - ox, k))
        })
        .collect();
    Grid::from_fn(h, w, |r, c| {
        taps.iter()
            .map(|&(dy, dx, k)| {
                k * *grid.get(reflect101(r as isize + dy, h), reflect101(c as isize + dx, w))
            })
            .sum()
    })
}

/// Anti-aliased disk: indicator of `x² + y² ≤ radius²`, normalized, then
/// smoothed by a small Gaussian of width `alias_blur`.
pub(crate) fn disk_kernel(radius: f64, alias_blur: f64) -> Grid<f64> {
    let half = if radius <= 8.0 { 8 } else { math::ceil(radius) as isize };
    let side = (2 * half + 1) as usize;
    let mut disk = Grid::from_fn(side, side, |r, c| {
        let y = r as f64 - half as f64;
        let x = c as f64 - half as f64;
        if x * x + y * y <= radius * radius {
            1.0
        } else {
            0.0
        }
    });
    let total: f64 = disk.as_slice().iter().sum();
    disk.as_mut_slice().iter_mut().for_each(|v| *v /= total);
    let ksize = if radius <= 8.0 { 3 } else { 5 };
    let blur = small_gaussian(ksize, alias_blur);
    convolve(&disk, &blur)
}

fn small_gaussian(size: usize, sigma: f64) -> Grid<f64> {
    let half = (size / 2) as f64;
    let g: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - half;
            math::exp(-(d * d) / (2.0 * sigma * sigma))
        })
        .collect();
    let total: f64 = g.iter().sum();
    Grid::from_fn(size, size, |r, c| g[r] * g[c] / (total * total))
}

/// One-sided motion blur: Gaussian-weighted average of samples taken along
/// direction `angle_deg` up to `radius` pixels away.
pub(crate) fn motion_blur(grid: &Grid<f64>, radius: usize, sigma: f64, angle_deg: f64) -> Grid<f64> {
    let (h, w) = grid.dims();
    let theta = angle_deg.to_radians();
    let (dy, dx) = (math::sin(theta), math::cos(theta));
    let weights: Vec<f64> = (0..=radius)
        .map(|i| math::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let total: f64 = weights.iter().sum();
    Grid::from_fn(h, w, |r, c| {
        let mut acc = 0.0;
        for (i, wgt) in weights.iter().enumerate() {
            let y = (r as f64 - dy * i as f64).clamp(0.0, (h - 1) as f64);
            let x = (c as f64 - dx * i as f64).clamp(0.0, (w - 1) as f64);
            acc += wgt * sample_bilinear(grid, y, x, 0.0);
        }
        acc / total
    })
}

/// Centre zoom by `factor ≥ 1` with bilinear sampling.
pub(crate) fn centre_zoom(grid: &Grid<f64>, factor: f64) -> Grid<f64> {
    let (h, w) = grid.dims();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    Grid::from_fn(h, w, |r, c| {
        let y = (cy + (r as f64 - cy) / factor).clamp(0.0, (h - 1) as f64);
        let x = (cx + (c as f64 - cx) / factor).clamp(0.0, (w - 1) as f64);
        sample_bilinear(grid, y, x, 0.0)
    })
}

/// Rotation by 180 degrees.
pub(crate) fn rotate180(grid: &Grid<f64>) -> Grid<f64> {
    let (h, w) = grid.dims();
    Grid::from_fn(h, w, |r, c| *grid.get(h - 1 - r, w - 1 - c))
}

/// Diamond-square fractal on a `size × size` torus (`size` a power of two),
/// normalized to `[0, 1]`. Each level's random perturbation shrinks by
/// `decay`.
pub(crate) fn plasma_fractal<R: rand::Rng + ?Sized>(size: usize, decay: f64, rng: &mut R) -> Grid<f64> {
    debug_assert!(size.is_power_of_two());
    let n = size;
    let mut map = vec![0.0f64; n * n];
    let idx = |r: usize, c: usize| r * n + c;
    let mut step = n;
    let mut wibble = 100.0f64;
    let jitter = |value: f64, wibble: f64, rng: &mut R| value / 4.0 + wibble * rng.random_range(-wibble..=wibble);
    while step >= 2 {
        let half = step / 2;
        // squares: centre of each cell from its four corners
        for r in (0..n).step_by(step) {
            for c in (0..n).step_by(step) {
                let r2 = (r + step) % n;
                let c2 = (c + step) % n;
                let sum = map[idx(r, c)] + map[idx(r2, c)] + map[idx(r, c2)] + map[idx(r2, c2)];
                map[idx(r + half, c + half)] = jitter(sum, wibble, rng);
            }
        }
        // diamonds on the cell edges
        for r in (0..n).step_by(step) {
            for c in (0..n).step_by(step) {
                let up = (r + n - half) % n;
                let sum = map[idx(r + half, c + half)]
                    + map[idx(up, c + half)]
                    + map[idx(r, c)]
                    + map[idx(r, (c + step) % n)];
                map[idx(r, c + half)] = jitter(sum, wibble, rng);
            }
        }
        for r in (0..n).step_by(step) {
            for c in (0..n).step_by(step) {
                let left = (c + n - half) % n;
                let sum = map[idx(r + half, c + half)]
                    + map[idx(r + half, left)]
                    + map[idx(r, c)]
                    + map[idx((r + step) % n, c)];
                map[idx(r + half, c)] = jitter(sum, wibble, rng);
            }
        }
        step /= 2;
        wibble /= decay;
    }
    let lo = map.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = map.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    Grid::from_parts(n, n, map.into_iter().map(|v| (v - lo) / span).collect())
}
