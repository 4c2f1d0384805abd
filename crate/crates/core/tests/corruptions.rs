mod common;

use afda_core::corruptions::{corrupt, pixelate, CorruptionKind, CorruptionSpec, PIXELATE};
use afda_core::fixtures::domain_image;
use afda_core::metrics::psnr;
use afda_core::rng::{stream_rng, Stream};
use afda_core::Image;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corrupted(img: &Image, spec: CorruptionSpec, idx: u64) -> Image {
    let mut rng = stream_rng(11, Stream::Corruption, &[idx, spec.kind() as u64, spec.severity() as u64]);
    corrupt(img, spec, &mut rng).unwrap()
}

#[test]
fn monotone_kinds_lose_quality_with_severity() {
    let images: Vec<Image> = (0..10).map(|i| domain_image(64, 64, 3, i, (i % 3) as u32)).collect();
    for kind in CorruptionKind::MONOTONE {
        let means: Vec<f64> = (1..=5)
            .map(|s| {
                let spec = CorruptionSpec::new(kind, s).unwrap();
                images
                    .iter()
                    .enumerate()
                    .map(|(i, img)| psnr(img, &corrupted(img, spec, i as u64)).unwrap())
                    .sum::<f64>()
                    / images.len() as f64
            })
            .collect();
        assert!(means.windows(2).all(|p| p[1] < p[0]), "{kind}: {means:?}");
    }
}

#[test]
fn outputs_in_range_and_reproducible() {
    let img = domain_image(30, 26, 3, 3, 1);
    for spec in CorruptionSpec::grid() {
        let a = corrupted(&img, spec, 0);
        assert_eq!(a, corrupted(&img, spec, 0), "{spec}");
        assert!(a.channels().iter().all(|c| c.as_slice().iter().all(|v| (0.0..=1.0).contains(v))));
    }
}

#[test]
fn stochastic_kinds_depend_on_seed() {
    let img = domain_image(30, 26, 3, 3, 1);
    for kind in CorruptionKind::ALL {
        let spec = CorruptionSpec::new(kind, 3).unwrap();
        let a = corrupt(&img, spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = corrupt(&img, spec, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a != b, kind.is_stochastic(), "{kind}");
    }
}

/// Area-average resample written out per axis.
fn box_resample(src: &[f64], h: usize, w: usize, nh: usize, nw: usize) -> Vec<f64> {
    let axis = |n: usize, m: usize, i: usize| -> Vec<(usize, f64)> {
        let (lo, hi) = (i as f64 * n as f64 / m as f64, (i + 1) as f64 * n as f64 / m as f64);
        (0..n)
            .filter_map(|s| {
                let o = hi.min(s as f64 + 1.0) - lo.max(s as f64);
                (o > 0.0).then_some((s, o))
            })
            .collect()
    };
    let mut out = Vec::with_capacity(nh * nw);
    for r in 0..nh {
        let rows = axis(h, nh, r);
        for c in 0..nw {
            let cols = axis(w, nw, c);
            let (mut acc, mut norm) = (0.0, 0.0);
            for &(y, wy) in &rows {
                for &(x, wx) in &cols {
                    acc += src[y * w + x] * wy * wx;
                    norm += wy * wx;
                }
            }
            out.push(acc / norm);
        }
    }
    out
}

#[test]
fn pixelate_matches_box_oracle() {
    let img = domain_image(384, 384, 3, 1, 1);
    let factor = PIXELATE[4];
    let small = (384.0 * factor) as usize;
    assert_eq!(small, 96);
    let out = pixelate(&img, factor);
    for (o, ch) in out.channels().iter().zip(img.channels()) {
        let down = box_resample(ch.as_slice(), 384, 384, small, small);
        let up = box_resample(&down, small, small, 384, 384);
        assert!(common::max_abs(o.as_slice(), &up) < 1e-12);
    }
    let via_spec = corrupt(&img, CorruptionSpec::new(CorruptionKind::Pixelate, 5).unwrap(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(via_spec, out);
}

#[test]
fn psnr_examples() {
    let zeros = Image::from_fn(4, 4, 3, |_, _, _| 0.0).unwrap();
    let ones = Image::from_fn(4, 4, 3, |_, _, _| 1.0).unwrap();
    assert_eq!(psnr(&zeros, &zeros).unwrap(), f64::INFINITY);
    assert_eq!(psnr(&zeros, &ones).unwrap(), 0.0);
    let a = domain_image(8, 8, 3, 1, 0);
    let b = domain_image(8, 8, 3, 2, 0);
    let mse: f64 = a
        .to_interleaved()
        .iter()
        .zip(b.to_interleaved())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / (8 * 8 * 3) as f64;
    assert!((psnr(&a, &b).unwrap() - 10.0 * (1.0 / mse).log10()).abs() < 1e-9);
    let small = Image::from_fn(4, 5, 3, |_, _, _| 0.0).unwrap();
    assert!(psnr(&zeros, &small).is_err());
}
