//! Release acceptance checks. Prints one `PASS` or `FAIL` line per
//! criterion and exits nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod oracle;

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use afda::config::Settings;
use afda::evaluate::evaluate_masks;
use afda::generate::generate_epoch;
use afda::suite::{corruption_suite, SuiteOptions};
use afda::{io, with_workers};
use afda_core::augmix::{
    chained_augmix, chained_augmix_with, sample_mix_coefficients, AugPolicy, MixCoefficients,
};
use afda_core::corruptions::{corrupt_with_assets, CorruptionKind, CorruptionSpec};
use afda_core::curriculum::{schedule_beta, CurriculumConfig, SchedulerKind};
use afda_core::fixtures::{blob_mask, domain_image, textured_image};
use afda_core::fusion::{fda_transform, fda_transform_unclamped, FusionParams};
use afda_core::metrics::{dice, psnr};
use afda_core::pipeline::{curri_afda_sample, RunConfig};
use afda_core::rng;
use afda_core::spectral::{decompose, forward_dft, inverse_dft_unclamped};
use afda_core::{Grid, Image, ImageChannel, Mask};
use common::{tree, write_config, write_corpus};
use oracle::{lcg_plane, naive_dft};
use tempfile::tempdir;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("{what} took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn plane(h: usize, w: usize, seed: u64) -> ImageChannel {
    ImageChannel::from_vec(h, w, lcg_plane(h * w, seed)).unwrap()
}

fn seeded_image(h: usize, w: usize, seed: u64) -> Image {
    Image::from_channels((0..3).map(|c| plane(h, w, seed * 3 + c)).collect()).unwrap()
}

fn dft_oracle() -> Check {
    let start = Instant::now();
    let sides = [3, 4, 7, 8, 15, 16];
    let mut worst = 0.0f64;
    for &h in &sides {
        for &w in &sides {
            let ch = plane(h, w, (h * 31 + w) as u64);
            let fast = forward_dft(&ch).map_err(|e| e.to_string())?;
            let slow = naive_dft(ch.as_slice(), h, w);
            for (a, b) in fast.grid().as_slice().iter().zip(&slow) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    ensure(worst < 1e-5, || format!("max abs error vs naive DFT {worst:e}"))?;
    let mut round = 0.0f64;
    for seed in 0..100 {
        let ch = plane(64, 64, 10_000 + seed);
        let back = inverse_dft_unclamped(&forward_dft(&ch).unwrap());
        for (a, b) in back.real.as_slice().iter().zip(ch.as_slice()) {
            round = round.max((a - b).abs());
        }
    }
    ensure(round < 1e-4, || format!("round-trip error {round:e}"))?;
    within(start.elapsed(), 30.0, "suite")?;
    Ok(format!(
        "36 sizes max err {worst:.1e}, 100 round trips max err {round:.1e}, {:.2} s",
        start.elapsed().as_secs_f64()
    ))
}

fn fusion_identity() -> Check {
    let mut ident = 0.0f64;
    for seed in 0..50u64 {
        let (h, w) = (24 + (seed % 5) as usize, 20 + (seed % 7) as usize);
        let src = seeded_image(h, w, seed);
        let tgt = seeded_image(h, w, 500 + seed);
        for (alpha, beta) in [(0.0, 0.3), (0.0, 1.0), (1.0, 0.0), (0.5, 0.0)] {
            let out = fda_transform(&src, &tgt, FusionParams::new(alpha, beta).unwrap()).unwrap();
            ident = ident.max(out.max_abs_diff(&src).unwrap());
        }
    }
    ensure(ident < 1e-4, || format!("identity error {ident:e}"))?;

    // naive-DFT oracle for the spectra of outputs, sources and targets
    let mut amp_rel = 0.0f64;
    let mut phase_err = 0.0f64;
    for &(h, w, seed) in &[(16, 16, 1u64), (15, 17, 2), (12, 9, 3), (8, 13, 4)] {
        let src = seeded_image(h, w, seed);
        let tgt = seeded_image(h, w, 900 + seed);
        let swapped = fda_transform_unclamped(&src, &tgt, FusionParams::new(1.0, 1.0).unwrap()).unwrap();
        for (plane, t) in swapped.iter().zip(tgt.channels()) {
            let got = naive_dft(plane.as_slice(), h, w);
            let want = naive_dft(t.as_slice(), h, w);
            for (g, t) in got.iter().zip(&want) {
                let denom = t.norm().max(1e-9);
                amp_rel = amp_rel.max((g.norm() - t.norm()).abs() / denom);
            }
        }
        for &(alpha, beta) in &[(1.0, 1.0), (1.0, 0.2), (0.6, 0.4)] {
            let fused = fda_transform_unclamped(&src, &tgt, FusionParams::new(alpha, beta).unwrap()).unwrap();
            for (plane, s) in fused.iter().zip(src.channels()) {
                let got = naive_dft(plane.as_slice(), h, w);
                let want = naive_dft(s.as_slice(), h, w);
                for (g, s) in got.iter().zip(&want) {
                    if g.norm() > 1e-6 && s.norm() > 1e-6 {
                        phase_err = phase_err.max((g / s).arg().abs());
                    }
                }
            }
        }
    }
    ensure(amp_rel < 1e-3, || format!("full swap relative amplitude error {amp_rel:e}"))?;
    ensure(phase_err < 1e-3, || format!("phase moved by {phase_err:e} rad"))?;
    Ok(format!(
        "identity {ident:.1e} over 50 images, full swap rel {amp_rel:.1e}, phase {phase_err:.1e} rad"
    ))
}

fn linear_schedule_values() -> Check {
    let cfg = CurriculumConfig::new(SchedulerKind::Linear, 0.006, 0.5, 100).unwrap();
    let mut r = rng::schedule_rng(0, 0);
    let at = |e: u32, r: &mut rng::SampleRng| schedule_beta(&cfg, cfg.epoch(e).unwrap(), r);
    let b25 = at(25, &mut r);
    ensure((b25 - 0.003).abs() <= 1e-12, || format!("e=25 gives {b25}"))?;
    let b0 = at(0, &mut r);
    ensure(b0 == 0.0, || format!("e=0 gives {b0}"))?;
    for e in 50..100 {
        let b = at(e, &mut r);
        ensure((b - 0.006).abs() <= 1e-12, || format!("e={e} gives {b}"))?;
    }
    Ok(format!("e=25 -> {b25}, e in 50..100 -> 0.006"))
}

fn amplitude_l1(a: &Image, b: &Image) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for (x, y) in a.channels().iter().zip(b.channels()) {
        let (ax, _) = decompose(&forward_dft(x).unwrap());
        let (ay, _) = decompose(&forward_dft(y).unwrap());
        for (p, q) in ax.as_slice().iter().zip(ay.as_slice()) {
            total += (p - q).abs();
        }
        n += ax.as_slice().len();
    }
    total / n as f64
}

fn curriculum_drift() -> Check {
    let cur = CurriculumConfig::new(SchedulerKind::Linear, 0.006, 0.5, 100).unwrap();
    let cfg = RunConfig::new(cur, 1.0, None, 17).unwrap();
    let pairs: Vec<(Image, Image)> = (0..20u64)
        .map(|i| (domain_image(384, 384, 3, i, 1), domain_image(384, 384, 3, 100 + i, 2)))
        .collect();
    let mut dists = Vec::new();
    for e in [0u32, 25, 50] {
        let state = cur.epoch(e).unwrap();
        let mean = pairs
            .iter()
            .enumerate()
            .map(|(i, (s, t))| {
                let out = curri_afda_sample(s, None, t, &cfg, state, i as u64).unwrap();
                amplitude_l1(&out.image, t)
            })
            .sum::<f64>()
            / pairs.len() as f64;
        dists.push(mean);
    }
    ensure(dists[0] > dists[1] && dists[1] > dists[2], || format!("distances {dists:?}"))?;
    Ok(format!(
        "mean amplitude L1 at epochs 0/25/50: {:.4} > {:.4} > {:.4}",
        dists[0], dists[1], dists[2]
    ))
}

fn augmix_contracts() -> Check {
    let start = Instant::now();
    let img = textured_image(48, 40, 3, 11);
    let mask = blob_mask(48, 40, 4, 11);
    let policy = AugPolicy::default();
    let mut warped_plans = 0;
    for seed in 0..50 {
        let c = MixCoefficients::new(1.0, vec![0.2, 0.3, 0.5]).unwrap();
        let out = chained_augmix_with(&img, Some(&mask), &policy, c, &mut rng::sample_rng(seed, 0, 0)).unwrap();
        warped_plans += out.plan.geometric.is_some() as usize;
        ensure(out.image == img, || format!("m=1 changed the image (seed {seed})"))?;
        ensure(out.mask.as_ref() == Some(&mask), || format!("m=1 changed the mask (seed {seed})"))?;
    }
    let photometric = AugPolicy::default().photometric_only();
    for seed in 0..50 {
        let out = chained_augmix(&img, Some(&mask), &photometric, &mut rng::sample_rng(seed, 1, 0)).unwrap();
        ensure(out.mask.as_ref().map(Mask::as_slice) == Some(mask.as_slice()), || {
            format!("photometric chains changed the mask (seed {seed})")
        })?;
    }
    let n = 100_000;
    let k = policy.num_chains;
    let mut r = rng::from_key(2024);
    let (mut m_sum, mut w_sum) = (0.0, vec![0.0; k]);
    for _ in 0..n {
        let c = sample_mix_coefficients(&mut r, k, &policy).unwrap();
        m_sum += c.m();
        for (s, w) in w_sum.iter_mut().zip(c.w()) {
            *s += w;
        }
    }
    let m_mean = m_sum / n as f64;
    ensure((0.49..=0.51).contains(&m_mean), || format!("mean m {m_mean}"))?;
    let w_means: Vec<f64> = w_sum.iter().map(|s| s / n as f64).collect();
    for &wm in &w_means {
        ensure((wm - 1.0 / k as f64).abs() <= 0.01, || format!("mean w {w_means:?}"))?;
    }
    within(start.elapsed(), 60.0, "suite")?;
    Ok(format!(
        "m=1 identity on 50 seeds ({warped_plans} with a geometric op), mask kept on 50, mean m {m_mean:.4}, mean w {:?}, {:.2} s",
        w_means.iter().map(|w| (w * 1e4).round() / 1e4).collect::<Vec<_>>(),
        start.elapsed().as_secs_f64()
    ))
}

fn corruption_grid() -> Check {
    let dir = tempdir().unwrap();
    let input = dir.path().join("in");
    let images: Vec<Image> = (0..2).map(|i| domain_image(96, 96, 3, 40 + i, 1)).collect();
    for (i, img) in images.iter().enumerate() {
        io::write_image(&input.join(format!("f{i}.png")), img).unwrap();
    }
    let decoded: Vec<Image> = (0..2).map(|i| io::read_image(&input.join(format!("f{i}.png"))).unwrap()).collect();
    let opts = SuiteOptions::default();

    // range before quantization
    for img in &decoded {
        for spec in CorruptionSpec::grid() {
            let out = corrupt_with_assets(img, spec, &mut rng::from_key(7), &opts.assets).unwrap();
            let ok = out.channels().iter().all(|c| c.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
            ensure(ok, || format!("{spec} leaves [0, 1]"))?;
        }
    }

    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let sa = corruption_suite(&input, &a, 99, &opts).map_err(|e| e.to_string())?;
    corruption_suite(&input, &b, 99, &opts).map_err(|e| e.to_string())?;
    ensure(sa.written == 150 && sa.failed == 0, || format!("{} written, {} failed", sa.written, sa.failed))?;
    let (ta, tb) = (tree(&a), tree(&b));
    ensure(ta.len() == 151, || format!("{} files", ta.len()))?;
    ensure(ta == tb, || "rerun differs".into())?;

    for kind in CorruptionKind::MONOTONE {
        let mut prev = f64::INFINITY;
        for sev in 1..=5u8 {
            let name = |i: usize| format!("{}/{sev}/f{i}.png", kind.name());
            let mean = (0..2)
                .map(|i| psnr(&decoded[i], &io::read_image(&a.join(name(i))).unwrap()).unwrap())
                .sum::<f64>()
                / 2.0;
            ensure(mean < prev, || format!("{kind}: PSNR {mean:.3} at severity {sev} after {prev:.3}"))?;
            prev = mean;
        }
    }
    Ok("150 outputs in [0, 1], rerun byte-identical, PSNR falls for all 8 monotone kinds".into())
}

fn end_to_end_determinism() -> Check {
    let dir = tempdir().unwrap();
    let data = dir.path().join("data");
    write_corpus(&data, 10, 10, 48, 40);
    let extra = "preset = \"retina\"\n[curriculum]\nbeta_opt = 0.1\nepochs = 5\n";
    let mut trees = Vec::new();
    for workers in ["1", "8"] {
        let cfg = dir.path().join(format!("w{workers}.toml"));
        let out = dir.path().join(format!("out{workers}"));
        write_config(&cfg, &data, &out, extra);
        let status = Command::new(env!("CARGO_BIN_EXE_afda"))
            .args(["run", "--config", cfg.to_str().unwrap(), "--seed", "31", "--workers", workers])
            .output()
            .unwrap();
        ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        trees.push(tree(&out));
    }
    ensure(trees[0] == trees[1], || "trees differ".into())?;
    let images = trees[0].keys().filter(|p| p.to_string_lossy().contains("/images/")).count();
    ensure(images == 50, || format!("{images} images"))?;
    Ok(format!("{} files identical for 1 and 8 workers", trees[0].len()))
}

fn dice_examples() -> Check {
    let grid = |f: &dyn Fn(usize, usize) -> bool| Mask::new(Grid::from_fn(20, 20, |r, c| f(r, c) as u8));
    let same = grid(&|r, _| r < 5);
    let d1 = dice(&same, &same, 1).unwrap();
    let d0 = dice(&grid(&|r, _| r < 5), &grid(&|r, _| r >= 10), 1).unwrap();
    // |P| = |G| = 100, |P ∩ G| = 50
    let p = grid(&|r, _| r < 5);
    let g = grid(&|r, c| (r < 5 && c < 10) || (r >= 10 && r < 15 && c < 10));
    let dh = dice(&p, &g, 1).unwrap();
    ensure((d1 - 1.0).abs() <= 1e-12 && d0.abs() <= 1e-12 && (dh - 0.5).abs() <= 1e-12, || {
        format!("examples gave {d1}, {d0}, {dh}")
    })?;

    let dir = tempdir().unwrap();
    let (pred, gt) = (dir.path().join("pred"), dir.path().join("gt"));
    // dice 1, 0.5 (100/100/50) and 0.4 (|P| = 60, |G| = 40, overlap 20)
    let cases = [
        (grid(&|r, _| r < 5), grid(&|r, _| r < 5)),
        (p, g),
        (grid(&|r, _| r < 3), grid(&|r, _| r < 1 || r == 10)),
    ];
    for (i, (pm, gm)) in cases.iter().enumerate() {
        io::write_mask(&pred.join(format!("{i}.png")), pm).unwrap();
        io::write_mask(&gt.join(format!("{i}.png")), gm).unwrap();
    }
    let report = evaluate_masks(&pred, &gt, &[1]).map_err(|e| e.to_string())?;
    let (mean, std) = report.overall;
    let (hand_mean, hand_std) = (19.0 / 30.0, (31.0f64 / 450.0).sqrt());
    ensure((mean - hand_mean).abs() <= 1e-12 && (std - hand_std).abs() <= 1e-12, || {
        format!("report mean/std {mean}/{std}, hand {hand_mean}/{hand_std}")
    })?;
    Ok(format!("1, 0, 0.5 exact; report {mean:.6} +- {std:.6}"))
}

fn throughput() -> Check {
    let dir = tempdir().unwrap();
    let data = dir.path().join("data");
    write_corpus(&data, 100, 10, 384, 384);
    let cfg_path = dir.path().join("run.toml");
    write_config(&cfg_path, &data, &dir.path().join("out"), "preset = \"retina\"\n");
    let settings = Settings::load(&cfg_path, Some(1)).unwrap();
    let manifest = settings.manifest().unwrap();
    let epoch = 60; // past the curriculum stage: full extent
    let start = Instant::now();
    let summary = with_workers(8, || generate_epoch(&manifest, &settings.run, &settings.output_root, epoch))
        .unwrap()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(summary.written == 100, || format!("{} written", summary.written))?;
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    within(elapsed, 10.0, "epoch")?;
    Ok(format!(
        "100 samples at 384x384 in {:.2} s with 8 workers on {cores} core(s)",
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("dft_oracle", dft_oracle),
        ("fusion_identity", fusion_identity),
        ("linear_schedule_exact", linear_schedule_values),
        ("curriculum_drift", curriculum_drift),
        ("augmix_contracts", augmix_contracts),
        ("corruption_grid", corruption_grid),
        ("end_to_end_determinism", end_to_end_determinism),
        ("dice", dice_examples),
        ("throughput", throughput),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
