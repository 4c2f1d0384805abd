//! Curriculum-scheduled Fourier amplitude fusion for domain-adaptive
//! segmentation data pipelines.
//!
//! The crate is `no_std` (with `alloc`) and holds every numeric stage of the
//! per-sample transform:
//!
//! * [`spectral`]: 2-D DFT of arbitrary size, amplitude/phase split.
//! * [`fusion`]: low-frequency amplitude fusion between a source and a target
//!   image, phase of the source kept.
//! * [`curriculum`]: epoch-indexed schedules for the fusion extent.
//! * [`augmix`]: chained augmentation mixing with mask-consistent geometry.
//! * [`corruptions`]: the 15-kind, 5-severity corruption benchmark.
//! * [`metrics`]: Dice overlap, PSNR and summary statistics.
//! * [`pipeline`]: the composed per-sample transform and RNG lineage.
//!
//! IO, file formats and the command line live in the `afda` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
mod math;

pub mod augmix;
pub mod buffers;
pub mod corruptions;
pub mod curriculum;
pub mod fft;
pub mod fixtures;
pub mod fusion;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use image::{Grid, Image, ImageChannel, Mask};
