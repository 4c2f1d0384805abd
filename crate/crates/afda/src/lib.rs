//! File formats, dataset manifests, epoch generation and reports around
//! [`afda_core`].
//!
//! | module       | contents                                              |
//! |--------------|-------------------------------------------------------|
//! | [`io`]       | 8-bit PNG decode/encode for images and label masks    |
//! | [`codec`]    | JPEG round trip through a real encoder                |
//! | [`config`]   | TOML run configuration and published presets          |
//! | [`dataset`]  | source/target record lists (directory scan or JSONL)  |
//! | [`generate`] | per-epoch materialization with a JSONL manifest       |
//! | [`suite`]    | the corruption grid over a directory of images        |
//! | [`evaluate`] | per-class Dice report as CSV                          |
//! | [`sweep`]    | epoch-ratio comparison tables                         |

pub mod codec;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod generate;
pub mod io;
pub mod suite;
pub mod sweep;

pub use error::{Error, ErrorRecord, Result};

/// Environment variable read for the worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "AFDA_WORKERS";

/// Runs `f` on a dedicated pool of `workers` threads (`0` = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}
