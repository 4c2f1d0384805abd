//! Per-epoch materialization.
//!
//! Epoch `e` of a run writes
//!
//! ```text
//! output_root/epoch_e/images/NNNNN_<name>.png
//! output_root/epoch_e/masks/NNNNN_<name>.png      (when the source has a mask)
//! output_root/epoch_e/manifest.jsonl              (one row per source record)
//! ```
//!
//! Samples are processed in parallel on the current rayon pool. Every
//! sample draws from its own `(seed, epoch, index)` stream and owns its
//! output paths, and rows are written in index order, so the tree is
//! byte-identical for any worker count.

use std::fs;
use std::path::{Path, PathBuf};

use afda_core::augmix::AugOp;
use afda_core::curriculum::EpochState;
use afda_core::pipeline::{self, RunConfig, SampleMeta};
use afda_core::rng::{derive_seed, Stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetManifest, Record};
use crate::error::{Error, ErrorRecord, Result};
use crate::io;

pub const MANIFEST_NAME: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpRecord {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl From<&AugOp> for OpRecord {
    fn from(op: &AugOp) -> Self {
        OpRecord {
            op: op.kind().name().to_string(),
            value: op.parameter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpsRecord {
    pub geometric: Option<OpRecord>,
    pub chains: Vec<Vec<OpRecord>>,
}

/// One line of an epoch manifest. Output fields are absent when the
/// sample failed; `error` is present only then.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub index: u64,
    pub src: String,
    pub tgt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    pub beta_c: f64,
    /// Key of the sample's random stream.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_mask: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ops: Option<OpsRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochSummary {
    pub epoch: u32,
    pub beta_c: f64,
    pub written: usize,
    pub failed: usize,
    pub manifest: PathBuf,
}

pub fn epoch_dir(output_root: &Path, epoch: u32) -> PathBuf {
    output_root.join(format!("epoch_{epoch}"))
}

fn display(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

fn output_name(index: usize, record: &Record) -> String {
    let stem = record.image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{index:05}_{stem}.png")
}

fn process(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    state: EpochState,
    dir: &Path,
    index: usize,
    source: &Record,
    target: &Record,
) -> Result<(SampleMeta, String, Option<String>)> {
    let (image, mask) = manifest.load_source(source)?;
    let tgt = manifest.load_target(target)?;
    let out = pipeline::curri_afda_sample(&image, mask.as_ref(), &tgt, cfg, state, index as u64)?;
    drop((image, mask, tgt));
    let name = output_name(index, source);
    let image_rel = format!("images/{name}");
    io::write_image(&dir.join(&image_rel), &out.image)?;
    let mask_rel = match &out.mask {
        Some(m) => {
            let rel = format!("masks/{name}");
            io::write_mask(&dir.join(&rel), m)?;
            Some(rel)
        }
        None => None,
    };
    Ok((out.meta, image_rel, mask_rel))
}

/// Generates epoch `epoch` under `output_root/epoch_<epoch>/`.
///
/// Per-sample failures (unreadable files, shape mismatches) are recorded
/// in the manifest and the remaining samples still run.
pub fn generate_epoch(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    output_root: &Path,
    epoch: u32,
) -> Result<EpochSummary> {
    let state = cfg.curriculum.epoch(epoch)?;
    let sources = manifest.sources();
    let targets = manifest.targets();
    if sources.is_empty() || targets.is_empty() {
        return Err(Error::format(manifest.root(), "need at least one source and one target record"));
    }
    let pairs = pipeline::pair_targets(sources.len(), targets.len(), cfg.seed, epoch)?;
    let beta_c = cfg.beta_for(state);
    let dir = epoch_dir(output_root, epoch);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let rows: Vec<SampleRow> = (0..sources.len())
        .into_par_iter()
        .map(|i| {
            let (src, tgt) = (sources[i], targets[pairs[i]]);
            let mut row = SampleRow {
                index: i as u64,
                src: display(&src.image),
                tgt: display(&tgt.image),
                mask: src.mask.as_deref().map(display),
                beta_c,
                seed: derive_seed(cfg.seed, Stream::Sample, &[epoch as u64, i as u64]),
                output: None,
                output_mask: None,
                alpha: None,
                m: None,
                w: None,
                ops: None,
                error: None,
            };
            match process(manifest, cfg, state, &dir, i, src, tgt) {
                Ok((meta, image, mask)) => {
                    row.output = Some(image);
                    row.output_mask = mask;
                    row.alpha = Some(meta.alpha);
                    row.m = meta.m;
                    row.w = Some(meta.w);
                    row.ops = Some(OpsRecord {
                        geometric: meta.geometric.as_ref().map(OpRecord::from),
                        chains: meta.chains.iter().map(|c| c.iter().map(OpRecord::from).collect()).collect(),
                    });
                }
                Err(e) => row.error = Some(ErrorRecord::from(&e)),
            }
            row
        })
        .collect();

    let path = dir.join(MANIFEST_NAME);
    write_rows(&path, &rows)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(EpochSummary {
        epoch,
        beta_c,
        written: rows.len() - failed,
        failed,
        manifest: path,
    })
}

/// Every epoch of the curriculum in order.
pub fn run(manifest: &DatasetManifest, cfg: &RunConfig, output_root: &Path) -> Result<Vec<EpochSummary>> {
    (0..cfg.curriculum.total_epochs())
        .map(|e| generate_epoch(manifest, cfg, output_root, e))
        .collect()
}

pub(crate) fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r).expect("rows serialize");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_rows(path: &Path) -> Result<Vec<SampleRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| Error::format(path, format!("line {}: {e}", n + 1))))
        .collect()
}
