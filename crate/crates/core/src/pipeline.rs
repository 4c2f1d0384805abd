//! The composed per-sample transform: schedule `β_c` for the epoch, fuse
//! the source with its paired target, then run chained augmentation mixing
//! on the fused image and its mask.
//!
//! Exactly one output is produced per source/target pair and epoch. All
//! randomness comes from the `(seed, epoch, sample_index)` lineage in
//! [`crate::rng`].

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::augmix::{self, AugOp, AugPolicy, MixCoefficients, MixPlan};
use crate::curriculum::{self, CurriculumConfig, EpochState};
use crate::error::{Error, Result};
use crate::fusion::{self, FusionParams};
use crate::image::{Image, Mask};
use crate::rng::{self, SampleRng, Stream};

/// How each source record finds a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Independent uniform draw per source, reseeded every epoch.
    #[default]
    UniformRandom,
}

/// Inputs of a generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub curriculum: CurriculumConfig,
    pub alpha: f64,
    /// `None` disables chained augmentation mixing.
    pub aug: Option<AugPolicy>,
    pub seed: u64,
    pub pairing: Pairing,
}

impl RunConfig {
    pub fn new(curriculum: CurriculumConfig, alpha: f64, aug: Option<AugPolicy>, seed: u64) -> Result<Self> {
        let cfg = RunConfig {
            curriculum,
            alpha,
            aug,
            seed,
            pairing: Pairing::UniformRandom,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", format!("{} is outside [0, 1]", self.alpha)));
        }
        if let Some(p) = &self.aug {
            p.validate()?;
        }
        Ok(())
    }

    /// `β_c` every sample of `epoch` is fused with.
    pub fn beta_for(&self, state: EpochState) -> f64 {
        curriculum::scheduled_beta(&self.curriculum, state, self.seed)
    }
}

/// Test and integration hook replacing the sampled mixing randomness.
#[derive(Debug, Clone, Default)]
pub enum Injection {
    #[default]
    None,
    /// Fixed `(m, w)`; chain ops still come from the sample stream.
    Coefficients(MixCoefficients),
    /// Entire plan fixed.
    Plan(MixPlan),
}

/// Per-sample provenance written next to each generated image.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub epoch: u32,
    pub sample_index: u64,
    pub beta_c: f64,
    pub alpha: f64,
    /// Mixing weight with the fused image; `None` when augmentation is off.
    pub m: Option<f64>,
    pub w: Vec<f64>,
    pub geometric: Option<AugOp>,
    pub chains: Vec<Vec<AugOp>>,
    /// Key of the sample's random stream.
    pub stream_seed: u64,
}

#[derive(Debug, Clone)]
pub struct SampleOutput {
    pub image: Image,
    pub mask: Option<Mask>,
    pub meta: SampleMeta,
}

/// One sample of one epoch, drawing from the lineage stream.
pub fn curri_afda_sample(
    source: &Image,
    mask: Option<&Mask>,
    target: &Image,
    cfg: &RunConfig,
    state: EpochState,
    sample_index: u64,
) -> Result<SampleOutput> {
    let mut rng = rng::sample_rng(cfg.seed, state.epoch() as u64, sample_index);
    curri_afda_sample_with(source, mask, target, cfg, state, sample_index, &mut rng, Injection::None)
}

/// Full form with an explicit generator and injection hook.
#[allow(clippy::too_many_arguments)]
pub fn curri_afda_sample_with(
    source: &Image,
    mask: Option<&Mask>,
    target: &Image,
    cfg: &RunConfig,
    state: EpochState,
    sample_index: u64,
    rng: &mut SampleRng,
    injection: Injection,
) -> Result<SampleOutput> {
    let ctx = |e: Error| Error::InSample {
        epoch: state.epoch(),
        index: sample_index,
        source: Box::new(e),
    };
    let beta_c = cfg.beta_for(state);
    let params = FusionParams::new(cfg.alpha, beta_c).map_err(ctx)?;
    let fused = fusion::fda_transform(source, target, params).map_err(ctx)?;

    let stream_seed = rng::derive_seed(
        cfg.seed,
        Stream::Sample,
        &[state.epoch() as u64, sample_index],
    );
    let mut meta = SampleMeta {
        epoch: state.epoch(),
        sample_index,
        beta_c,
        alpha: cfg.alpha,
        m: None,
        w: Vec::new(),
        geometric: None,
        chains: Vec::new(),
        stream_seed,
    };

    let Some(policy) = &cfg.aug else {
        if let Some(m) = mask {
            if m.dims() != fused.dims() {
                return Err(ctx(Error::DimensionMismatch {
                    expected: fused.dims(),
                    found: m.dims(),
                }));
            }
        }
        return Ok(SampleOutput {
            image: fused,
            mask: mask.cloned(),
            meta,
        });
    };

    let plan = match injection {
        Injection::Plan(p) => p,
        Injection::Coefficients(c) => {
            let mut p = augmix::sample_mix_plan(rng, policy, fused.dims()).map_err(ctx)?;
            p.coefficients = c;
            p
        }
        Injection::None => augmix::sample_mix_plan(rng, policy, fused.dims()).map_err(ctx)?,
    };
    let (image, mask) = augmix::apply_mix_plan(&fused, mask, &plan).map_err(ctx)?;
    drop(fused);
    meta.m = Some(plan.coefficients.m());
    meta.w = plan.coefficients.w().to_vec();
    meta.geometric = plan.geometric;
    meta.chains = plan.chains;
    Ok(SampleOutput { image, mask, meta })
}

/// Target index for each of `n_sources` samples in `epoch`.
pub fn pair_targets(n_sources: usize, n_targets: usize, seed: u64, epoch: u32) -> Result<Vec<usize>> {
    if n_targets == 0 {
        return Err(Error::invalid("pairing", "no target records"));
    }
    let mut r = rng::stream_rng(seed, Stream::Pairing, &[epoch as u64]);
    Ok((0..n_sources).map(|_| r.random_range(0..n_targets)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curriculum::SchedulerKind;
    use crate::fixtures;

    fn config(aug: Option<AugPolicy>) -> RunConfig {
        let cur = CurriculumConfig::new(SchedulerKind::Linear, 0.05, 0.5, 10).unwrap();
        RunConfig::new(cur, 1.0, aug, 42).unwrap()
    }

    #[test]
    fn epoch_zero_with_m_one_returns_source() {
        let cfg = config(Some(AugPolicy::default()));
        let src = fixtures::textured_image(16, 16, 3, 1);
        let tgt = fixtures::textured_image(16, 16, 3, 2);
        let mask = fixtures::blob_mask(16, 16, 3, 1);
        let state = cfg.curriculum.epoch(0).unwrap();
        let mut rng = rng::sample_rng(cfg.seed, 0, 0);
        let out = curri_afda_sample_with(
            &src,
            Some(&mask),
            &tgt,
            &cfg,
            state,
            0,
            &mut rng,
            Injection::Plan(MixPlan::identity()),
        )
        .unwrap();
        assert_eq!(out.image, src);
        assert_eq!(out.mask.unwrap(), mask);
        assert_eq!(out.meta.beta_c, 0.0);
    }

    #[test]
    fn late_epochs_use_beta_opt() {
        let cfg = config(None);
        let src = fixtures::textured_image(16, 16, 3, 1);
        let tgt = fixtures::textured_image(16, 16, 3, 2);
        for e in 5..10 {
            let out = curri_afda_sample(&src, None, &tgt, &cfg, cfg.curriculum.epoch(e).unwrap(), 3).unwrap();
            assert_eq!(out.meta.beta_c, 0.05);
            assert_eq!(out.meta.m, None);
        }
    }

    #[test]
    fn sample_is_deterministic() {
        let cfg = config(Some(AugPolicy::default()));
        let src = fixtures::textured_image(20, 18, 3, 4);
        let tgt = fixtures::textured_image(20, 18, 3, 5);
        let mask = fixtures::blob_mask(20, 18, 2, 4);
        let st = cfg.curriculum.epoch(7).unwrap();
        let a = curri_afda_sample(&src, Some(&mask), &tgt, &cfg, st, 11).unwrap();
        let b = curri_afda_sample(&src, Some(&mask), &tgt, &cfg, st, 11).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.mask, b.mask);
        assert_eq!(a.meta, b.meta);
        let c = curri_afda_sample(&src, Some(&mask), &tgt, &cfg, st, 12).unwrap();
        assert_ne!(a.meta.stream_seed, c.meta.stream_seed);
    }

    #[test]
    fn errors_carry_sample_context() {
        let cfg = config(None);
        let src = fixtures::textured_image(8, 8, 3, 1);
        let gray = fixtures::textured_image(8, 8, 1, 2);
        let err = curri_afda_sample(&src, None, &gray, &cfg, cfg.curriculum.epoch(6).unwrap(), 4).unwrap_err();
        assert!(matches!(err, Error::InSample { epoch: 6, index: 4, .. }));
    }

    #[test]
    fn pairing_is_seeded_per_epoch() {
        let a = pair_targets(50, 7, 1, 0).unwrap();
        assert_eq!(a, pair_targets(50, 7, 1, 0).unwrap());
        assert_ne!(a, pair_targets(50, 7, 1, 1).unwrap());
        assert!(a.iter().all(|&i| i < 7));
        assert!(pair_targets(3, 0, 1, 0).is_err());
    }

    #[test]
    fn alpha_is_validated() {
        let cur = CurriculumConfig::new(SchedulerKind::Linear, 0.05, 0.5, 10).unwrap();
        assert!(RunConfig::new(cur, 1.5, None, 0).is_err());
    }
}
