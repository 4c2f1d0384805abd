//! The corruption grid over a directory of images.
//!
//! Outputs go to `out_dir/<kind>/<severity>/<name>.png` and every
//! `(file, kind, severity)` gets one row in `out_dir/manifest.jsonl`.
//! Each row's seed is derived from the run seed, the file name and the
//! spec, so adding files or filtering kinds leaves other outputs unchanged.

use std::path::{Path, PathBuf};

use afda_core::corruptions::{corrupt_with_assets, CorruptionAssets, CorruptionKind, CorruptionSpec};
use afda_core::rng::{derive_seed, Stream};
use afda_core::Image;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::EncoderJpeg;
use crate::dataset::list_pngs;
use crate::error::{Error, ErrorRecord, Result};
use crate::generate::{write_rows, MANIFEST_NAME};
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionRow {
    pub source: String,
    pub kind: String,
    pub severity: u8,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub images: usize,
    pub written: usize,
    pub failed: usize,
    pub manifest: PathBuf,
}

pub struct SuiteOptions {
    pub kinds: Vec<CorruptionKind>,
    pub severities: Vec<u8>,
    pub assets: CorruptionAssets,
}

impl Default for SuiteOptions {
    /// Full grid, procedural textures, JPEG through the real codec.
    fn default() -> Self {
        SuiteOptions {
            kinds: CorruptionKind::ALL.to_vec(),
            severities: vec![1, 2, 3, 4, 5],
            assets: CorruptionAssets {
                frost: Vec::new(),
                jpeg: Some(Box::new(EncoderJpeg)),
            },
        }
    }
}

impl SuiteOptions {
    fn specs(&self) -> Result<Vec<CorruptionSpec>> {
        let mut out = Vec::new();
        for &k in &self.kinds {
            for &s in &self.severities {
                out.push(CorruptionSpec::new(k, s)?);
            }
        }
        Ok(out)
    }
}

/// Frost textures from `dir/frost/*.png` and `dir/frost*.png`.
pub fn load_assets(dir: &Path) -> Result<Vec<Image>> {
    let mut paths = Vec::new();
    let nested = dir.join("frost");
    if nested.is_dir() {
        paths.extend(list_pngs(&nested)?.into_iter().map(|n| nested.join(n)));
    }
    paths.extend(
        list_pngs(dir)?
            .into_iter()
            .filter(|n| n.to_ascii_lowercase().starts_with("frost"))
            .map(|n| dir.join(n)),
    );
    if paths.is_empty() {
        return Err(Error::format(dir, "no frost textures found"));
    }
    paths.iter().map(|p| io::read_image(p)).collect()
}

/// FNV-1a, stable across platforms and releases.
fn name_key(name: &str) -> u64 {
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub fn spec_seed(seed: u64, file_name: &str, spec: CorruptionSpec) -> u64 {
    let kind = CorruptionKind::ALL.iter().position(|&k| k == spec.kind()).unwrap_or(0) as u64;
    derive_seed(seed, Stream::Corruption, &[name_key(file_name), kind, spec.severity() as u64])
}

pub fn corruption_suite(dataset_dir: &Path, out_dir: &Path, seed: u64, opts: &SuiteOptions) -> Result<SuiteSummary> {
    let specs = opts.specs()?;
    let names = list_pngs(dataset_dir)?;
    let rows: Vec<Vec<CorruptionRow>> = names
        .par_iter()
        .map(|name| {
            let loaded = io::read_image(&dataset_dir.join(name));
            specs
                .par_iter()
                .map(|&spec| {
                    let s = spec_seed(seed, name, spec);
                    let mut row = CorruptionRow {
                        source: name.clone(),
                        kind: spec.kind().name().to_string(),
                        severity: spec.severity(),
                        seed: s,
                        path: None,
                        error: None,
                    };
                    let result = loaded.as_ref().map_err(clone_err).and_then(|img| {
                        let mut rng = afda_core::rng::from_key(s);
                        let out = corrupt_with_assets(img, spec, &mut rng, &opts.assets)?;
                        let rel = format!("{}/{}/{}", spec.kind().name(), spec.severity(), name);
                        io::write_image(&out_dir.join(&rel), &out)?;
                        Ok(rel)
                    });
                    match result {
                        Ok(rel) => row.path = Some(rel),
                        Err(e) => row.error = Some(ErrorRecord::from(&e)),
                    }
                    row
                })
                .collect()
        })
        .collect();
    let rows: Vec<CorruptionRow> = rows.into_iter().flatten().collect();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let manifest = out_dir.join(MANIFEST_NAME);
    write_rows(&manifest, &rows)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(SuiteSummary {
        images: names.len(),
        written: rows.len() - failed,
        failed,
        manifest,
    })
}

/// Decode failures are shared by all specs of a file.
fn clone_err(e: &Error) -> Error {
    match e {
        Error::Image { path, source } => Error::format(path, source.to_string()),
        Error::Io { path, source } => Error::format(path, source.to_string()),
        other => Error::Invalid(other.to_string()),
    }
}
