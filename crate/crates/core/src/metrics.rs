//! Overlap and fidelity measures.

use crate::error::{Error, Result};
use crate::image::{Image, Mask};
use crate::math;

/// Dice overlap `2|P∩G| / (|P| + |G|)` for one class label. Two empty sets
/// score 1.
pub fn dice(pred: &Mask, gt: &Mask, class_id: u8) -> Result<f64> {
    pred.grid().ensure_same_dims(gt.grid())?;
    let (mut p, mut g, mut both) = (0usize, 0usize, 0usize);
    for (&a, &b) in pred.as_slice().iter().zip(gt.as_slice()) {
        let in_p = a == class_id;
        let in_g = b == class_id;
        p += in_p as usize;
        g += in_g as usize;
        both += (in_p && in_g) as usize;
    }
    if p + g == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (p + g) as f64)
}

/// Peak signal-to-noise ratio for unit-range images, `10·log10(1/MSE)`.
/// Identical images give `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            found: b.dims(),
        });
    }
    if a.channel_count() != b.channel_count() {
        return Err(Error::ChannelMismatch {
            expected: a.channel_count(),
            found: b.channel_count(),
        });
    }
    let mse = mse(a, b);
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * math::log10(mse))
}

pub(crate) fn mse(a: &Image, b: &Image) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for (x, y) in a.channels().iter().zip(b.channels()) {
        for (p, q) in x.as_slice().iter().zip(y.as_slice()) {
            total += (p - q) * (p - q);
            n += 1;
        }
    }
    total / n as f64
}

/// Mean and population standard deviation; `None` for an empty slice.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, math::sqrt(var)))
}
