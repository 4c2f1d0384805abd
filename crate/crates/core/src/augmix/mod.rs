//! Chained augmentation mixing.
//!
//! `k` chains of up to `max_ops_per_chain` randomly drawn operations are
//! applied to copies of the image, combined with Dirichlet weights `w`, and
//! blended with the image by a Beta-drawn weight `m`:
//!
//! ```text
//! x_aug = m·x + (1 - m)·Σ w_i·H_i(x)
//! ```
//!
//! Segmentation masks force one restriction: a sample carries at most one
//! geometric transform. The first geometric op drawn for any chain becomes
//! the shared transform and any later geometric draw is replaced by a
//! photometric one. Where the shared transform goes is a [`GeometryMode`]:
//! by default it warps the image and the mask once before mixing, so every
//! mixed term and the mask stay pixel-aligned.

mod ops;

pub use ops::{
    AugOp, AugOpKind, MAX_LEVEL, MAX_POSTERIZE_DROP_BITS, MAX_ROTATE_DEGREES, MAX_SHEAR,
    MAX_TRANSLATE_FRACTION, MIN_STRENGTH, SOLARIZE_LEVELS,
};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use crate::error::{Error, Result};
use crate::image::{Grid, Image, ImageChannel, Mask};

/// Placement of a sample's shared geometric transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeometryMode {
    /// Warp only as the first step of every chain (and the mask); the `m`
    /// term keeps the unwarped image. With `m = 1` the chains carry no
    /// weight, so image and mask are both returned unwarped.
    #[default]
    ChainPrefix,
    /// Warp the image before mixing: `G(x)` feeds both the `m` term and
    /// every chain, and the mask is warped the same way.
    Aligned,
}

/// Mixing policy. Defaults: 3 chains, up to 3 ops each, level 3,
/// Beta(1, 1) and Dirichlet(1, ..., 1), all nine operations.
#[derive(Debug, Clone, PartialEq)]
pub struct AugPolicy {
    pub num_chains: usize,
    pub max_ops_per_chain: usize,
    pub magnitude_level: u32,
    pub beta_params: (f64, f64),
    pub dirichlet_param: f64,
    pub ops: Vec<AugOpKind>,
    pub geometry: GeometryMode,
}

impl Default for AugPolicy {
    fn default() -> Self {
        AugPolicy {
            num_chains: 3,
            max_ops_per_chain: 3,
            magnitude_level: 3,
            beta_params: (1.0, 1.0),
            dirichlet_param: 1.0,
            ops: AugOpKind::ALL.to_vec(),
            geometry: GeometryMode::ChainPrefix,
        }
    }
}

impl AugPolicy {
    /// Level 3, the convolutional-backbone profile.
    pub fn cnn() -> Self {
        Self::default()
    }

    /// Level 2, the transformer-backbone profile.
    pub fn transformer() -> Self {
        AugPolicy {
            magnitude_level: 2,
            ..Self::default()
        }
    }

    /// Restricts the op set to the photometric subset.
    pub fn photometric_only(mut self) -> Self {
        self.ops.retain(|k| !k.is_geometric());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_chains == 0 {
            return Err(Error::invalid("aug policy", "num_chains must be at least 1"));
        }
        if self.max_ops_per_chain == 0 {
            return Err(Error::invalid(
                "aug policy",
                "max_ops_per_chain must be at least 1",
            ));
        }
        if self.magnitude_level == 0 {
            return Err(Error::invalid(
                "aug policy",
                "magnitude_level must be at least 1",
            ));
        }
        let (a, b) = self.beta_params;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::invalid(
                "aug policy",
                format!("beta parameters ({a}, {b}) must be positive"),
            ));
        }
        if !(self.dirichlet_param > 0.0 && self.dirichlet_param.is_finite()) {
            return Err(Error::invalid(
                "aug policy",
                format!("dirichlet parameter {} must be positive", self.dirichlet_param),
            ));
        }
        if self.ops.is_empty() {
            return Err(Error::invalid("aug policy", "op set is empty"));
        }
        Ok(())
    }
}

/// Blend weight with the original `m` and chain weights `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixCoefficients {
    m: f64,
    w: Vec<f64>,
}

impl MixCoefficients {
    /// Checks `0 ≤ m ≤ 1`, `w ≥ 0` and `Σw = 1` to within `1e-9`.
    pub fn new(m: f64, w: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::invalid("mix coefficients", format!("m = {m} is outside [0, 1]")));
        }
        if w.is_empty() || w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid(
                "mix coefficients",
                "chain weights must be non-negative and non-empty",
            ));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "mix coefficients",
                format!("chain weights sum to {sum}"),
            ));
        }
        Ok(MixCoefficients { m, w })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }
}

/// Draws `m ~ Beta(a, b)` and `w ~ Dirichlet(α, ..., α)` of length `k`.
pub fn sample_mix_coefficients<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    policy: &AugPolicy,
) -> Result<MixCoefficients> {
    if k == 0 {
        return Err(Error::invalid("mix coefficients", "chain count must be at least 1"));
    }
    let (a, b) = policy.beta_params;
    let m = Beta::new(a, b)
        .map_err(|e| Error::invalid("beta parameters", format!("{e}")))?
        .sample(rng);
    let w = if k == 1 {
        vec![1.0]
    } else {
        let gamma = Gamma::new(policy.dirichlet_param, 1.0)
            .map_err(|e| Error::invalid("dirichlet parameter", format!("{e}")))?;
        let mut draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            for d in &mut draws {
                *d /= total;
            }
        } else {
            draws.iter_mut().for_each(|d| *d = 1.0 / k as f64);
        }
        draws
    };
    MixCoefficients::new(m, w)
}

/// Everything random about one augmented sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MixPlan {
    pub coefficients: MixCoefficients,
    /// Shared geometric transform.
    pub geometric: Option<AugOp>,
    pub mode: GeometryMode,
    /// Photometric ops per chain, in application order.
    pub chains: Vec<Vec<AugOp>>,
}

impl MixPlan {
    /// Plan that reduces to the identity: `m = 1`, no geometry, empty chains.
    pub fn identity() -> Self {
        MixPlan {
            coefficients: MixCoefficients {
                m: 1.0,
                w: vec![1.0],
            },
            geometric: None,
            mode: GeometryMode::ChainPrefix,
            chains: vec![Vec::new()],
        }
    }
}

/// Samples coefficients and chain ops for an image of `dims`.
pub fn sample_mix_plan<R: Rng + ?Sized>(
    rng: &mut R,
    policy: &AugPolicy,
    dims: (usize, usize),
) -> Result<MixPlan> {
    policy.validate()?;
    let coefficients = sample_mix_coefficients(rng, policy.num_chains, policy)?;
    let photometric: Vec<AugOpKind> = policy
        .ops
        .iter()
        .copied()
        .filter(|k| !k.is_geometric())
        .collect();
    let mut geometric = None;
    let mut chains = Vec::with_capacity(policy.num_chains);
    for _ in 0..policy.num_chains {
        let depth = rng.random_range(1..=policy.max_ops_per_chain);
        let mut chain = Vec::with_capacity(depth);
        for _ in 0..depth {
            let kind = policy.ops[rng.random_range(0..policy.ops.len())];
            if !kind.is_geometric() {
                chain.push(kind.sample(policy.magnitude_level, rng, dims));
            } else if geometric.is_none() {
                geometric = Some(kind.sample(policy.magnitude_level, rng, dims));
            } else if !photometric.is_empty() {
                let swap = photometric[rng.random_range(0..photometric.len())];
                chain.push(swap.sample(policy.magnitude_level, rng, dims));
            }
        }
        chains.push(chain);
    }
    Ok(MixPlan {
        coefficients,
        geometric,
        mode: policy.geometry,
        chains,
    })
}

/// Augmented image, its mask and the plan that produced them.
#[derive(Debug, Clone)]
pub struct Augmented {
    pub image: Image,
    pub mask: Option<Mask>,
    pub plan: MixPlan,
}

/// Applies one operation; see [`AugOp::apply`].
pub fn apply_aug_op(image: &Image, mask: Option<&Mask>, op: &AugOp) -> Result<(Image, Option<Mask>)> {
    op.apply(image, mask)
}

/// Samples `kind` at `level` and applies it.
pub fn apply_aug_kind<R: Rng + ?Sized>(
    image: &Image,
    mask: Option<&Mask>,
    kind: AugOpKind,
    level: u32,
    rng: &mut R,
) -> Result<(Image, Option<Mask>, AugOp)> {
    let op = kind.sample(level, rng, image.dims());
    let (img, m) = op.apply(image, mask)?;
    Ok((img, m, op))
}

/// Executes a plan. With `m = 1` the output is the input bit for bit
/// (warped by the shared transform in [`GeometryMode::Aligned`]).
pub fn apply_mix_plan(image: &Image, mask: Option<&Mask>, plan: &MixPlan) -> Result<(Image, Option<Mask>)> {
    if let Some(m) = mask {
        if m.dims() != image.dims() {
            return Err(Error::DimensionMismatch {
                expected: image.dims(),
                found: m.dims(),
            });
        }
    }
    let coeffs = &plan.coefficients;
    if coeffs.w.len() != plan.chains.len() {
        return Err(Error::invalid(
            "mix plan",
            format!(
                "{} chain weights for {} chains",
                coeffs.w.len(),
                plan.chains.len()
            ),
        ));
    }

    let warped = match &plan.geometric {
        Some(g) => Some(g.apply(image, mask)?),
        None => None,
    };
    let (geo_image, mask_out) = match warped {
        Some((img, m)) => (Some(img), m),
        None => (None, mask.cloned()),
    };
    let chain_input = geo_image.as_ref().unwrap_or(image);
    let base = match plan.mode {
        GeometryMode::Aligned => chain_input,
        GeometryMode::ChainPrefix => image,
    };

    if coeffs.m == 1.0 {
        return Ok(match plan.mode {
            GeometryMode::Aligned => (base.clone(), mask_out),
            GeometryMode::ChainPrefix => (image.clone(), mask.cloned()),
        });
    }

    let (h, w) = base.dims();
    let mut acc: Vec<Grid<f64>> = base
        .channels()
        .iter()
        .map(|c| c.grid().map(|v| coeffs.m * v))
        .collect();
    let chain_scale = 1.0 - coeffs.m;
    for (chain, &weight) in plan.chains.iter().zip(&coeffs.w) {
        let scale = chain_scale * weight;
        if scale == 0.0 {
            continue;
        }
        let out = run_chain(chain_input, chain);
        accumulate(&mut acc, out.borrow(), scale);
    }
    let channels = acc
        .into_iter()
        .map(ImageChannel::from_clamped)
        .collect::<Vec<_>>();
    debug_assert!(channels.iter().all(|c| c.dims() == (h, w)));
    Ok((Image::from_channels(channels)?, mask_out))
}

enum ChainOutput<'a> {
    Borrowed(&'a Image),
    Owned(Image),
}

impl Borrow<Image> for ChainOutput<'_> {
    fn borrow(&self) -> &Image {
        match self {
            ChainOutput::Borrowed(i) => i,
            ChainOutput::Owned(i) => i,
        }
    }
}

fn run_chain<'a>(base: &'a Image, chain: &[AugOp]) -> ChainOutput<'a> {
    let mut current = ChainOutput::Borrowed(base);
    for op in chain {
        let next = op.apply_image(current.borrow());
        current = ChainOutput::Owned(next);
    }
    current
}

fn accumulate(acc: &mut [Grid<f64>], image: &Image, scale: f64) {
    for (a, ch) in acc.iter_mut().zip(image.channels()) {
        for (x, v) in a.as_mut_slice().iter_mut().zip(ch.as_slice()) {
            *x += scale * v;
        }
    }
}

/// Samples a plan from `rng` and applies it.
pub fn chained_augmix<R: Rng + ?Sized>(
    image: &Image,
    mask: Option<&Mask>,
    policy: &AugPolicy,
    rng: &mut R,
) -> Result<Augmented> {
    let plan = sample_mix_plan(rng, policy, image.dims())?;
    let (image, mask) = apply_mix_plan(image, mask, &plan)?;
    Ok(Augmented { image, mask, plan })
}

/// Like [`chained_augmix`] but with injected coefficients; the chain ops
/// are still drawn from `rng`.
pub fn chained_augmix_with<R: Rng + ?Sized>(
    image: &Image,
    mask: Option<&Mask>,
    policy: &AugPolicy,
    coefficients: MixCoefficients,
    rng: &mut R,
) -> Result<Augmented> {
    if coefficients.w.len() != policy.num_chains {
        return Err(Error::invalid(
            "mix coefficients",
            format!(
                "{} weights for {} chains",
                coefficients.w.len(),
                policy.num_chains
            ),
        ));
    }
    let mut plan = sample_mix_plan(rng, policy, image.dims())?;
    plan.coefficients = coefficients;
    let (image, mask) = apply_mix_plan(image, mask, &plan)?;
    Ok(Augmented { image, mask, plan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(h: usize, w: usize) -> (Image, Mask) {
        let img = Image::from_fn(h, w, 3, |r, c, ch| {
            (((r * 3 + c * 5 + ch * 7) % 17) as f64 / 16.0).clamp(0.0, 1.0)
        })
        .unwrap();
        let mask = Mask::new(Grid::from_fn(h, w, |r, c| {
            if r > h / 3 && r < 2 * h / 3 && c > w / 4 && c < 3 * w / 4 {
                1
            } else if r + c < 5 {
                2
            } else {
                0
            }
        }));
        (img, mask)
    }

    #[test]
    fn single_chain_weight_is_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = sample_mix_coefficients(&mut rng, 1, &AugPolicy::default()).unwrap();
        assert_eq!(c.w(), &[1.0]);
    }

    #[test]
    fn coefficients_are_deterministic_and_on_simplex() {
        let p = AugPolicy::default();
        let a = sample_mix_coefficients(&mut ChaCha8Rng::seed_from_u64(5), 3, &p).unwrap();
        let b = sample_mix_coefficients(&mut ChaCha8Rng::seed_from_u64(5), 3, &p).unwrap();
        assert_eq!(a, b);
        assert!((a.w().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(sample_mix_coefficients(&mut ChaCha8Rng::seed_from_u64(5), 0, &p).is_err());
    }

    #[test]
    fn coefficient_validation() {
        assert!(MixCoefficients::new(1.2, vec![1.0]).is_err());
        assert!(MixCoefficients::new(0.5, vec![0.5, 0.6]).is_err());
        assert!(MixCoefficients::new(0.5, vec![-0.5, 1.5]).is_err());
        assert!(MixCoefficients::new(0.5, vec![]).is_err());
    }

    #[test]
    fn injected_m_one_without_geometry_is_identity() {
        let (img, mask) = fixture(24, 20);
        let policy = AugPolicy::default().photometric_only();
        let c = MixCoefficients::new(1.0, vec![0.2, 0.3, 0.5]).unwrap();
        let out = chained_augmix_with(&img, Some(&mask), &policy, c, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(out.image, img);
        assert_eq!(out.mask.unwrap(), mask);
    }

    #[test]
    fn identity_plan_and_identity_chains() {
        let (img, mask) = fixture(12, 12);
        let (out, m) = apply_mix_plan(&img, Some(&mask), &MixPlan::identity()).unwrap();
        assert_eq!(out, img);
        assert_eq!(m.unwrap(), mask);
        // chains that do nothing: output equals input for any m
        let plan = MixPlan {
            coefficients: MixCoefficients::new(0.3, vec![0.5, 0.5]).unwrap(),
            geometric: None,
            mode: GeometryMode::Aligned,
            chains: vec![vec![], vec![AugOp::Solarize { threshold: 1.0 }]],
        };
        let (out, _) = apply_mix_plan(&img, None, &plan).unwrap();
        assert!(out.max_abs_diff(&img).unwrap() < 1e-12);
    }

    #[test]
    fn at_most_one_geometric_op_per_plan() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let policy = AugPolicy::default();
        let mut saw_geometric = false;
        for _ in 0..300 {
            let plan = sample_mix_plan(&mut rng, &policy, (32, 32)).unwrap();
            saw_geometric |= plan.geometric.is_some();
            assert!(plan.geometric.map_or(true, |g| g.is_geometric()));
            for chain in &plan.chains {
                assert!(chain.len() <= policy.max_ops_per_chain);
                assert!(chain.iter().all(|op| !op.is_geometric()));
            }
        }
        assert!(saw_geometric);
    }

    #[test]
    fn labels_never_grow_and_range_holds() {
        let (img, mask) = fixture(32, 32);
        let policy = AugPolicy {
            magnitude_level: 10,
            ..AugPolicy::default()
        };
        let before = mask.labels();
        for seed in 0..40 {
            let out = chained_augmix(&img, Some(&mask), &policy, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let after = out.mask.unwrap().labels();
            assert!(after.iter().all(|l| *l == 0 || before.contains(l)));
            for ch in out.image.channels() {
                assert!(ch.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn policy_validation() {
        assert!(AugPolicy { num_chains: 0, ..AugPolicy::default() }.validate().is_err());
        assert!(AugPolicy { max_ops_per_chain: 0, ..AugPolicy::default() }.validate().is_err());
        assert!(AugPolicy { magnitude_level: 0, ..AugPolicy::default() }.validate().is_err());
        assert!(AugPolicy { beta_params: (0.0, 1.0), ..AugPolicy::default() }.validate().is_err());
        assert!(AugPolicy { ops: vec![], ..AugPolicy::default() }.validate().is_err());
        assert_eq!(AugPolicy::transformer().magnitude_level, 2);
        assert_eq!(AugPolicy::cnn().magnitude_level, 3);
    }

    #[test]
    fn geometry_modes_differ_only_in_base_term() {
        let (img, mask) = fixture(20, 20);
        let shift = AugOp::TranslateX { pixels: 3.0 };
        let plan = |mode, m| MixPlan {
            coefficients: MixCoefficients::new(m, vec![1.0]).unwrap(),
            geometric: Some(shift),
            mode,
            chains: vec![vec![]],
        };
        let (warped, warped_mask) = shift.apply(&img, Some(&mask)).unwrap();
        let (a, am) = apply_mix_plan(&img, Some(&mask), &plan(GeometryMode::Aligned, 1.0)).unwrap();
        assert_eq!(a, warped);
        assert_eq!(am, warped_mask);
        let (p, pm) = apply_mix_plan(&img, Some(&mask), &plan(GeometryMode::ChainPrefix, 1.0)).unwrap();
        assert_eq!(p, img);
        assert_eq!(pm.unwrap(), mask);
        let (p0, pm0) = apply_mix_plan(&img, Some(&mask), &plan(GeometryMode::ChainPrefix, 0.0)).unwrap();
        assert!(p0.max_abs_diff(&warped).unwrap() < 1e-12);
        assert_eq!(pm0, warped_mask);
    }

    #[test]
    fn mask_dims_must_match() {
        let (img, _) = fixture(8, 8);
        let mask = Mask::new(Grid::filled(8, 9, 0));
        assert!(apply_mix_plan(&img, Some(&mask), &MixPlan::identity()).is_err());
    }
}
