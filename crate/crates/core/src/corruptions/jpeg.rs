//! Lossy stages of a baseline JPEG encode/decode cycle.
//!
//! Entropy coding is lossless, so the pixels a decoder returns are fully
//! determined by colour conversion, 4:2:0 chroma subsampling, the 8×8 DCT,
//! quantization with the standard tables scaled by quality, and the final
//! rounding to 8 bits. Those stages are reproduced here, which keeps the
//! corruption bit-exact across platforms.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::image::{Grid, Image, ImageChannel};
use crate::math;

const LUMA_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, 12, 12, 14, 19, 26, 58, 60, 55, 14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62, 18, 22, 37, 56, 68, 109, 103, 77, 24, 35, 55, 64, 81, 104, 113,
    92, 49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
];

const CHROMA_TABLE: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99, 24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
];

/// IJG quality scaling of a base table.
fn scaled_table(base: &[u16; 64], quality: u8) -> [f64; 64] {
    let q = quality.clamp(1, 100) as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0.0; 64];
    for (o, &b) in out.iter_mut().zip(base) {
        *o = ((b as u32 * scale + 50) / 100).clamp(1, 255) as f64;
    }
    out
}

struct Dct {
    /// `basis[u][x] = c(u)/2 · cos((2x + 1)uπ/16)`
    basis: [[f64; 8]; 8],
}

impl Dct {
    fn new() -> Self {
        let mut basis = [[0.0; 8]; 8];
        for (u, row) in basis.iter_mut().enumerate() {
            let cu = if u == 0 { 1.0 / math::sqrt(2.0) } else { 1.0 };
            for (x, v) in row.iter_mut().enumerate() {
                *v = cu / 2.0 * math::cos((2 * x + 1) as f64 * u as f64 * PI / 16.0);
            }
        }
        Dct { basis }
    }

    fn forward(&self, block: &[f64; 64]) -> [f64; 64] {
        let mut tmp = [0.0; 64];
        for y in 0..8 {
            for u in 0..8 {
                tmp[y * 8 + u] = (0..8).map(|x| self.basis[u][x] * block[y * 8 + x]).sum();
            }
        }
        let mut out = [0.0; 64];
        for v in 0..8 {
            for u in 0..8 {
                out[v * 8 + u] = (0..8).map(|y| self.basis[v][y] * tmp[y * 8 + u]).sum();
            }
        }
        out
    }

    fn inverse(&self, coeffs: &[f64; 64]) -> [f64; 64] {
        let mut tmp = [0.0; 64];
        for v in 0..8 {
            for x in 0..8 {
                tmp[v * 8 + x] = (0..8).map(|u| self.basis[u][x] * coeffs[v * 8 + u]).sum();
            }
        }
        let mut out = [0.0; 64];
        for y in 0..8 {
            for x in 0..8 {
                out[y * 8 + x] = (0..8).map(|v| self.basis[v][y] * tmp[v * 8 + x]).sum();
            }
        }
        out
    }
}

/// Quantizes a plane of 8-bit-scale samples (`0..=255`) block by block;
/// edges are padded by replication.
fn quantize_plane(plane: &[f64], h: usize, w: usize, table: &[f64; 64], dct: &Dct) -> Vec<f64> {
    let bh = h.div_ceil(8);
    let bw = w.div_ceil(8);
    let mut out = vec![0.0; h * w];
    let mut block = [0.0; 64];
    for by in 0..bh {
        for bx in 0..bw {
            for y in 0..8 {
                let r = (by * 8 + y).min(h - 1);
                for x in 0..8 {
                    let c = (bx * 8 + x).min(w - 1);
                    block[y * 8 + x] = plane[r * w + c] - 128.0;
                }
            }
            let mut coeffs = dct.forward(&block);
            for (c, q) in coeffs.iter_mut().zip(table) {
                *c = math::round(*c / q) * q;
            }
            let back = dct.inverse(&coeffs);
            for y in 0..8 {
                let r = by * 8 + y;
                if r >= h {
                    break;
                }
                for x in 0..8 {
                    let c = bx * 8 + x;
                    if c >= w {
                        break;
                    }
                    out[r * w + c] = back[y * 8 + x] + 128.0;
                }
            }
        }
    }
    out
}

fn downsample2(plane: &[f64], h: usize, w: usize) -> (Vec<f64>, usize, usize) {
    let (hh, hw) = (h.div_ceil(2), w.div_ceil(2));
    let mut out = vec![0.0; hh * hw];
    for r in 0..hh {
        for c in 0..hw {
            let mut acc = 0.0;
            for dy in 0..2 {
                for dx in 0..2 {
                    acc += plane[(2 * r + dy).min(h - 1) * w + (2 * c + dx).min(w - 1)];
                }
            }
            out[r * hw + c] = acc / 4.0;
        }
    }
    (out, hh, hw)
}

/// Triangle-filter 2× upsampling of a half-resolution plane.
fn upsample2(plane: &[f64], hh: usize, hw: usize, h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; h * w];
    let at = |r: isize, c: isize| plane[r.clamp(0, hh as isize - 1) as usize * hw + c.clamp(0, hw as isize - 1) as usize];
    for r in 0..h {
        let (r0, r1) = if r % 2 == 0 {
            ((r / 2) as isize, (r / 2) as isize - 1)
        } else {
            ((r / 2) as isize, (r / 2) as isize + 1)
        };
        for c in 0..w {
            let (c0, c1) = if c % 2 == 0 {
                ((c / 2) as isize, (c / 2) as isize - 1)
            } else {
                ((c / 2) as isize, (c / 2) as isize + 1)
            };
            out[r * w + c] = (9.0 * at(r0, c0) + 3.0 * at(r0, c1) + 3.0 * at(r1, c0) + at(r1, c1)) / 16.0;
        }
    }
    out
}

#[inline]
fn to_byte(v: f64) -> f64 {
    math::round(v).clamp(0.0, 255.0)
}

/// Runs the lossy JPEG stages at `quality` (1..=100). The input is first
/// quantized to 8 bits; the output holds exact multiples of `1/255`.
pub(crate) fn jpeg_cycle(image: &Image, quality: u8) -> Image {
    let (h, w) = image.dims();
    let dct = Dct::new();
    let luma_q = scaled_table(&LUMA_TABLE, quality);
    let chroma_q = scaled_table(&CHROMA_TABLE, quality);
    let bytes: Vec<Vec<f64>> = image
        .channels()
        .iter()
        .map(|c| c.as_slice().iter().map(|v| to_byte(v * 255.0)).collect())
        .collect();

    let planes: Vec<Vec<f64>> = if bytes.len() == 3 {
        let n = h * w;
        let (mut y, mut cb, mut cr) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let (r, g, b) = (bytes[0][i], bytes[1][i], bytes[2][i]);
            y[i] = 0.299 * r + 0.587 * g + 0.114 * b;
            cb[i] = -0.168_735_892 * r - 0.331_264_108 * g + 0.5 * b + 128.0;
            cr[i] = 0.5 * r - 0.418_687_589 * g - 0.081_312_411 * b + 128.0;
        }
        let yq = quantize_plane(&y, h, w, &luma_q, &dct);
        let (cbs, hh, hw) = downsample2(&cb, h, w);
        let (crs, _, _) = downsample2(&cr, h, w);
        let cbq = upsample2(&quantize_plane(&cbs, hh, hw, &chroma_q, &dct), hh, hw, h, w);
        let crq = upsample2(&quantize_plane(&crs, hh, hw, &chroma_q, &dct), hh, hw, h, w);
        let (mut r, mut g, mut b) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            let (yy, u, v) = (to_byte(yq[i]), to_byte(cbq[i]) - 128.0, to_byte(crq[i]) - 128.0);
            r[i] = to_byte(yy + 1.402 * v);
            g[i] = to_byte(yy - 0.344_136_286 * u - 0.714_136_286 * v);
            b[i] = to_byte(yy + 1.772 * u);
        }
        vec![r, g, b]
    } else {
        bytes
            .iter()
            .map(|p| quantize_plane(p, h, w, &luma_q, &dct).into_iter().map(to_byte).collect())
            .collect()
    };

    let channels = planes
        .into_iter()
        .map(|p| ImageChannel::from_clamped(Grid::from_parts(h, w, p.into_iter().map(|v| v / 255.0).collect())))
        .collect();
    Image::from_channels(channels).expect("planes share dimensions")
}
