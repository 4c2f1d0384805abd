//! Epoch-indexed schedules for the fusion scale `β_c`.
//!
//! With progress `t = e / (E·r_e)` capped at 1:
//!
//! | kind               | `β_c`                                   |
//! |--------------------|-----------------------------------------|
//! | `linear`           | `t·β_opt`                               |
//! | `exponential`      | `β_opt·(exp(γt) - 1)/(exp(γ) - 1)`      |
//! | `anti_linear`      | `β_opt - linear`                        |
//! | `anti_exponential` | `β_opt - exponential`                   |
//! | `random`           | uniform draw in `[0, β_opt]`            |
//!
//! Every value is clamped to `[0, β_opt]`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::rng;

pub const DEFAULT_EXP_CURVATURE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchedulerKind {
    Linear,
    Exponential,
    AntiLinear,
    AntiExponential,
    Random,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 5] = [
        SchedulerKind::Linear,
        SchedulerKind::Exponential,
        SchedulerKind::AntiLinear,
        SchedulerKind::AntiExponential,
        SchedulerKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::Linear => "linear",
            SchedulerKind::Exponential => "exponential",
            SchedulerKind::AntiLinear => "anti_linear",
            SchedulerKind::AntiExponential => "anti_exponential",
            SchedulerKind::Random => "random",
        }
    }

    pub fn is_deterministic(self) -> bool {
        self != SchedulerKind::Random
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| if c == '-' { '_' } else { c.to_ascii_lowercase() })
            .collect();
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or(Error::UnknownOp(norm))
    }
}

/// Validated schedule parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurriculumConfig {
    beta_opt: f64,
    epoch_ratio: f64,
    total_epochs: u32,
    kind: SchedulerKind,
    exp_curvature: f64,
}

impl CurriculumConfig {
    pub fn new(
        kind: SchedulerKind,
        beta_opt: f64,
        epoch_ratio: f64,
        total_epochs: u32,
    ) -> Result<Self> {
        Self::with_curvature(kind, beta_opt, epoch_ratio, total_epochs, DEFAULT_EXP_CURVATURE)
    }

    pub fn with_curvature(
        kind: SchedulerKind,
        beta_opt: f64,
        epoch_ratio: f64,
        total_epochs: u32,
        exp_curvature: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta_opt) {
            return Err(Error::invalid("beta_opt", format!("{beta_opt} is outside [0, 1]")));
        }
        if !(epoch_ratio > 0.0 && epoch_ratio <= 1.0) {
            return Err(Error::invalid(
                "epoch_ratio",
                format!("{epoch_ratio} is outside (0, 1]"),
            ));
        }
        if total_epochs == 0 {
            return Err(Error::invalid("total_epochs", "must be at least 1"));
        }
        if !(exp_curvature.is_finite() && exp_curvature > 0.0) {
            return Err(Error::invalid(
                "exp_curvature",
                format!("{exp_curvature} must be a positive finite number"),
            ));
        }
        Ok(CurriculumConfig {
            beta_opt,
            epoch_ratio,
            total_epochs,
            kind,
            exp_curvature,
        })
    }

    pub fn beta_opt(&self) -> f64 {
        self.beta_opt
    }
    pub fn epoch_ratio(&self) -> f64 {
        self.epoch_ratio
    }
    pub fn total_epochs(&self) -> u32 {
        self.total_epochs
    }
    pub fn kind(&self) -> SchedulerKind {
        self.kind
    }
    pub fn exp_curvature(&self) -> f64 {
        self.exp_curvature
    }

    /// `E·r_e`, the length of the curriculum stage in epochs.
    pub fn curriculum_length(&self) -> f64 {
        self.total_epochs as f64 * self.epoch_ratio
    }

    pub fn epoch(&self, epoch: u32) -> Result<EpochState> {
        EpochState::new(epoch, self.total_epochs)
    }
}

/// Current epoch, `0 ≤ e < E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochState {
    epoch: u32,
}

impl EpochState {
    pub fn new(epoch: u32, total_epochs: u32) -> Result<Self> {
        if epoch >= total_epochs {
            return Err(Error::invalid(
                "epoch",
                format!("{epoch} is not below total epochs {total_epochs}"),
            ));
        }
        Ok(EpochState { epoch })
    }

    #[inline]
    pub fn epoch(&self) -> u32 {
        self.epoch
    }
}

fn forward_fraction(cfg: &CurriculumConfig, epoch: u32, exponential: bool) -> f64 {
    let e = epoch as f64;
    let length = cfg.curriculum_length();
    if e > length {
        return 1.0;
    }
    let t = e / length;
    if exponential {
        if t >= 1.0 {
            1.0
        } else {
            math::expm1(cfg.exp_curvature * t) / math::expm1(cfg.exp_curvature)
        }
    } else {
        t
    }
}

/// `β_c` for one epoch. `rng` is consulted only by the random kind.
pub fn schedule_beta<R: Rng + ?Sized>(cfg: &CurriculumConfig, state: EpochState, rng: &mut R) -> f64 {
    let opt = cfg.beta_opt;
    let e = state.epoch;
    let beta = match cfg.kind {
        SchedulerKind::Linear => forward_fraction(cfg, e, false) * opt,
        SchedulerKind::Exponential => forward_fraction(cfg, e, true) * opt,
        SchedulerKind::AntiLinear => opt - forward_fraction(cfg, e, false) * opt,
        SchedulerKind::AntiExponential => opt - forward_fraction(cfg, e, true) * opt,
        SchedulerKind::Random => {
            if opt > 0.0 {
                rng.random_range(0.0..=opt)
            } else {
                0.0
            }
        }
    };
    beta.clamp(0.0, opt)
}

/// `β_c` for one epoch with the random kind drawn from the epoch stream of
/// `seed`, so every sample of an epoch shares the value.
pub fn scheduled_beta(cfg: &CurriculumConfig, state: EpochState, seed: u64) -> f64 {
    let mut r = rng::schedule_rng(seed, state.epoch as u64);
    schedule_beta(cfg, state, &mut r)
}

/// `(e, β_c)` for every epoch `0..E`.
pub fn schedule_table(cfg: &CurriculumConfig, seed: u64) -> Vec<(u32, f64)> {
    (0..cfg.total_epochs)
        .map(|e| (e, scheduled_beta(cfg, EpochState { epoch: e }, seed)))
        .collect()
}
