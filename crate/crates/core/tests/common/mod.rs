//! Reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Textbook double-sum 2-D DFT of a row-major real plane, returned in
/// DC-centred order (zero frequency at `(h/2, w/2)`).
pub fn naive_dft(plane: &[f64], h: usize, w: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for (i, slot) in out.iter_mut().enumerate() {
        let (r, c) = (i / w, i % w);
        let u = r as f64 - (h / 2) as f64;
        let v = c as f64 - (w / 2) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..h {
            for x in 0..w {
                let angle = -2.0 * PI * (u * y as f64 / h as f64 + v * x as f64 / w as f64);
                acc += plane[y * w + x] * Complex64::new(angle.cos(), angle.sin());
            }
        }
        *slot = acc;
    }
    out
}

/// Inverse of [`naive_dft`] with the `1/(hw)` factor; returns the complex
/// result so callers can inspect the imaginary residue.
pub fn naive_idft(centred: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for (i, slot) in out.iter_mut().enumerate() {
        let (y, x) = (i / w, i % w);
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..h {
            for c in 0..w {
                let u = r as f64 - (h / 2) as f64;
                let v = c as f64 - (w / 2) as f64;
                let angle = 2.0 * PI * (u * y as f64 / h as f64 + v * x as f64 / w as f64);
                acc += centred[r * w + c] * Complex64::new(angle.cos(), angle.sin());
            }
        }
        *slot = acc / (h * w) as f64;
    }
    out
}

/// Amplitude fusion through the naive transforms: inside the centred
/// rectangle of half extents `floor(beta·h)`, `floor(beta·w)` (clipped to
/// the grid, empty for `beta = 0`) the magnitude becomes
/// `(1-alpha)·|S| + alpha·|T|`, phase of the source kept.
pub fn naive_fusion(src: &[f64], tgt: &[f64], h: usize, w: usize, alpha: f64, beta: f64) -> Vec<f64> {
    let fs = naive_dft(src, h, w);
    let ft = naive_dft(tgt, h, w);
    let hh = (beta * h as f64).floor() as isize;
    let hw = (beta * w as f64).floor() as isize;
    let fused: Vec<Complex64> = fs
        .iter()
        .zip(&ft)
        .enumerate()
        .map(|(i, (s, t))| {
            let du = (i / w) as isize - (h / 2) as isize;
            let dv = (i % w) as isize - (w / 2) as isize;
            if beta > 0.0 && du.abs() <= hh && dv.abs() <= hw {
                let amp = (1.0 - alpha) * s.norm() + alpha * t.norm();
                let phase = if s.norm() == 0.0 { 0.0 } else { s.arg() };
                Complex64::from_polar(amp, phase)
            } else {
                *s
            }
        })
        .collect();
    naive_idft(&fused, h, w).iter().map(|z| z.re).collect()
}

/// Deterministic pseudo-random values in `[0, 1)` (64-bit LCG), independent
/// of the crate's generators.
pub fn lcg_plane(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Plain-text raster: a header line `h w c`, then one value per line
/// printed with 17 significant digits.
pub fn write_raster(path: &std::path::Path, h: usize, w: usize, c: usize, values: &[f64]) {
    let mut s = format!("{h} {w} {c}\n");
    for v in values {
        s.push_str(&format!("{v:.16e}\n"));
    }
    std::fs::write(path, s).unwrap();
}

pub fn read_raster(path: &std::path::Path) -> (usize, usize, usize, Vec<f64>) {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let dims: Vec<usize> = lines.next().unwrap().split(' ').map(|t| t.parse().unwrap()).collect();
    let values = lines.map(|l| l.parse().unwrap()).collect();
    (dims[0], dims[1], dims[2], values)
}

pub fn golden_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// True when goldens should be rewritten instead of compared.
pub fn blessing() -> bool {
    std::env::var_os("AFDA_BLESS").is_some()
}
