//! Low-frequency amplitude fusion between a source and a target image.
//!
//! Inside a centred rectangle of the DC-centred amplitude spectrum the
//! source magnitude is blended toward the target magnitude,
//! `(1 - α)·A_src + α·A_tgt`; everything outside the rectangle and the
//! entire source phase are kept. Masks are never touched by this stage.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::image::{Grid, Image, ImageChannel};
use crate::math;
use crate::spectral::{self, AmplitudeChannel, PhaseChannel, SpectrumChannel};

/// Blend weight `alpha` and region scale `beta`, both in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    alpha: f64,
    beta: f64,
}

impl FusionParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid("alpha", format!("{alpha} is outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::invalid("beta", format!("{beta} is outside [0, 1]")));
        }
        Ok(FusionParams { alpha, beta })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Centred rectangle of fused bins for one grid shape.
///
/// Half extents are `⌊β·H⌋` and `⌊β·W⌋`; the rectangle spans
/// `2·half + 1` bins per axis around DC, clipped to the grid. `β = 0`
/// yields an empty region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusedRegion {
    pub half_height: usize,
    pub half_width: usize,
    rows: Option<(usize, usize)>,
    cols: Option<(usize, usize)>,
}

impl FusedRegion {
    pub fn new(height: usize, width: usize, beta: f64) -> Self {
        let half_height = math::floor(beta * height as f64) as usize;
        let half_width = math::floor(beta * width as f64) as usize;
        if beta <= 0.0 {
            return FusedRegion {
                half_height,
                half_width,
                rows: None,
                cols: None,
            };
        }
        let span = |len: usize, half: usize| {
            let centre = len / 2;
            (centre.saturating_sub(half), (centre + half).min(len - 1))
        };
        FusedRegion {
            half_height,
            half_width,
            rows: Some(span(height, half_height)),
            cols: Some(span(width, half_width)),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_none()
    }

    /// Inclusive row range, `None` when empty.
    pub fn rows(&self) -> Option<(usize, usize)> {
        self.rows
    }

    /// Inclusive column range, `None` when empty.
    pub fn cols(&self) -> Option<(usize, usize)> {
        self.cols
    }

    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        match (self.rows, self.cols) {
            (Some((r0, r1)), Some((c0, c1))) => r0 <= row && row <= r1 && c0 <= col && col <= c1,
            _ => false,
        }
    }

    pub fn bin_count(&self) -> usize {
        match (self.rows, self.cols) {
            (Some((r0, r1)), Some((c0, c1))) => (r1 - r0 + 1) * (c1 - c0 + 1),
            _ => 0,
        }
    }

    pub fn covers(&self, height: usize, width: usize) -> bool {
        self.bin_count() == height * width
    }
}

/// Blends target magnitudes into the source inside the fused region.
pub fn fuse_amplitude(
    source: &AmplitudeChannel,
    target: &AmplitudeChannel,
    params: FusionParams,
) -> Result<AmplitudeChannel> {
    source.grid().ensure_same_dims(target.grid())?;
    let (h, w) = source.dims();
    let region = FusedRegion::new(h, w, params.beta);
    let mut out = source.grid().clone();
    blend_region(&mut out, target.grid(), &region, params.alpha);
    Ok(AmplitudeChannel::from_grid_unchecked(out))
}

fn blend_region(out: &mut Grid<f64>, target: &Grid<f64>, region: &FusedRegion, alpha: f64) {
    let (Some((r0, r1)), Some((c0, c1))) = (region.rows(), region.cols()) else {
        return;
    };
    for r in r0..=r1 {
        for c in c0..=c1 {
            let s = *out.get(r, c);
            let t = *target.get(r, c);
            *out.get_mut(r, c) = ((1.0 - alpha) * s + alpha * t).max(0.0);
        }
    }
}

fn check_channels(source: &Image, target: &Image) -> Result<()> {
    if source.channel_count() != target.channel_count() {
        return Err(Error::ChannelMismatch {
            expected: source.channel_count(),
            found: target.channel_count(),
        });
    }
    Ok(())
}

/// Widest region (in frequency columns) fused through partial DFTs
/// instead of full transforms.
pub const SPARSE_MAX_COLS: usize = 12;

/// Fused planes before clamping, one per channel.
///
/// Narrow regions are evaluated by direct DFTs at the region's bins only:
/// the output is `x + F⁻¹(ΔF)` with `ΔF` supported on the region, which
/// costs `O(HW·k)` for a region `k` columns wide. Wider regions go
/// through full FFTs.
pub fn fda_transform_unclamped(
    source: &Image,
    target: &Image,
    params: FusionParams,
) -> Result<Vec<Grid<f64>>> {
    check_channels(source, target)?;
    let (h, w) = source.dims();
    let resized;
    let target = if target.dims() != (h, w) {
        resized = target.resize_bilinear(h, w)?;
        &resized
    } else {
        target
    };
    let region = FusedRegion::new(h, w, params.beta);
    match region.cols() {
        None => Ok(source.channels().iter().map(|c| c.grid().clone()).collect()),
        Some((c0, c1)) if c1 - c0 < SPARSE_MAX_COLS => Ok(source
            .channels()
            .iter()
            .zip(target.channels())
            .map(|(s, t)| fuse_plane_sparse(s.grid(), t.grid(), &region, params.alpha))
            .collect()),
        Some(_) => fuse_planes_fft(source, target, &region, params.alpha),
    }
}

fn fuse_planes_fft(
    source: &Image,
    target: &Image,
    region: &FusedRegion,
    alpha: f64,
) -> Result<Vec<Grid<f64>>> {
    let mut fused: Vec<SpectrumChannel> = Vec::with_capacity(source.channel_count());
    for (s, t) in source.channels().iter().zip(target.channels()) {
        let (fs, ft) = spectral::forward_dft_pair(s, t)?;
        let (mut amp, phase) = split(&fs);
        let (amp_t, _) = spectral::decompose(&ft);
        blend_region(&mut amp, amp_t.grid(), region, alpha);
        fused.push(spectral::recompose(
            &AmplitudeChannel::from_grid_unchecked(amp),
            &phase,
        )?);
    }

    let mut planes = Vec::with_capacity(fused.len());
    for pair in fused.chunks(2) {
        match pair {
            [a, b] => {
                let (x, y) = spectral::inverse_dft_pair_unclamped(a, b)?;
                planes.push(x);
                planes.push(y);
            }
            [a] => planes.push(spectral::inverse_dft_unclamped(a).real),
            _ => unreachable!(),
        }
    }
    Ok(planes)
}

/// `exp(-2πi·k/n)` for `k < n`.
fn roots(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let a = -2.0 * PI * k as f64 / n as f64;
            Complex64::new(math::cos(a), math::sin(a))
        })
        .collect()
}

fn fuse_plane_sparse(src: &Grid<f64>, tgt: &Grid<f64>, region: &FusedRegion, alpha: f64) -> Grid<f64> {
    let (h, w) = src.dims();
    let (Some((r0, r1)), Some((c0, c1))) = (region.rows(), region.cols()) else {
        return src.clone();
    };
    let zero = Complex64::new(0.0, 0.0);
    let wrap = |f: isize, n: usize| f.rem_euclid(n as isize) as usize;
    let us: Vec<usize> = (r0..=r1).map(|r| wrap(r as isize - (h / 2) as isize, h)).collect();
    let vs: Vec<usize> = (c0..=c1).map(|c| wrap(c as isize - (w / 2) as isize, w)).collect();
    let (kr, kc) = (us.len(), vs.len());
    let (roots_h, roots_w) = (roots(h), roots(w));

    // along rows: R[y][j] = Σ_x x[y, x]·exp(-2πi·v_j·x/w)
    let mut rs = vec![zero; h * kc];
    let mut rt = vec![zero; h * kc];
    for y in 0..h {
        let (srow, trow) = (src.row(y), tgt.row(y));
        for (j, &v) in vs.iter().enumerate() {
            let (mut a, mut b) = (zero, zero);
            let mut k = 0;
            for (&p, &q) in srow.iter().zip(trow) {
                let t = roots_w[k];
                a += t * p;
                b += t * q;
                k += v;
                if k >= w {
                    k -= w;
                }
            }
            rs[y * kc + j] = a;
            rt[y * kc + j] = b;
        }
    }

    // along columns, then the spectral change on each region bin
    let mut delta = vec![zero; kr * kc];
    for (i, &u) in us.iter().enumerate() {
        for j in 0..kc {
            let (mut fs, mut ft) = (zero, zero);
            let mut k = 0;
            for y in 0..h {
                let t = roots_h[k];
                fs += t * rs[y * kc + j];
                ft += t * rt[y * kc + j];
                k += u;
                if k >= h {
                    k -= h;
                }
            }
            let (a_s, a_t) = (fs.norm(), ft.norm());
            let amp = ((1.0 - alpha) * a_s + alpha * a_t).max(0.0);
            let fused = if a_s == 0.0 { Complex64::new(amp, 0.0) } else { fs * (amp / a_s) };
            delta[i * kc + j] = fused - fs;
        }
    }

    // inverse: C[y][j] = Σ_i Δ[i][j]·exp(+2πi·u_i·y/h)
    let mut cy = vec![zero; h * kc];
    for (y, row) in cy.chunks_exact_mut(kc).enumerate() {
        for (i, &u) in us.iter().enumerate() {
            let t = roots_h[(u * y) % h].conj();
            for (c, d) in row.iter_mut().zip(&delta[i * kc..(i + 1) * kc]) {
                *c += t * d;
            }
        }
    }
    let scale = 1.0 / (h * w) as f64;
    let mut out = src.clone();
    for (y, c_row) in cy.chunks_exact(kc).enumerate() {
        let orow = &mut out.as_mut_slice()[y * w..(y + 1) * w];
        for (j, &v) in vs.iter().enumerate() {
            let c = c_row[j] * scale;
            let mut k = 0;
            for o in orow.iter_mut() {
                // Re(c·conj(root))
                let t = roots_w[k];
                *o += c.re * t.re + c.im * t.im;
                k += v;
                if k >= w {
                    k -= w;
                }
            }
        }
    }
    out
}

fn split(spectrum: &SpectrumChannel) -> (Grid<f64>, PhaseChannel) {
    let (amp, phase) = spectral::decompose(spectrum);
    (amp.grid().clone(), phase)
}

/// Source image restyled with the target's low-frequency magnitudes.
///
/// The target is bilinearly resampled to the source size first. An empty
/// region or `α = 0` returns the source unchanged.
pub fn fda_transform(source: &Image, target: &Image, params: FusionParams) -> Result<Image> {
    check_channels(source, target)?;
    let (h, w) = source.dims();
    if params.alpha == 0.0 || FusedRegion::new(h, w, params.beta).is_empty() {
        return Ok(source.clone());
    }
    let planes = fda_transform_unclamped(source, target, params)?;
    Image::from_channels(planes.into_iter().map(ImageChannel::from_clamped).collect())
}
