//! Run configuration file (TOML).
//!
//! ```toml
//! preset = "retina"           # optional: retina, retina-transformer, nuclei, nuclei-transformer
//! output_root = "out"         # relative paths resolve against this file's directory
//!
//! [dataset]
//! root = "data"               # scanned layout, or
//! # manifest = "records.jsonl"
//! # height = 384              # optional target size for every source record
//! # width = 384
//!
//! [curriculum]
//! kind = "linear"             # linear, exponential, anti_linear, anti_exponential, random
//! beta_opt = 0.006
//! epoch_ratio = 0.5
//! epochs = 100
//! gamma = 5.0                 # exponential curvature
//!
//! [fusion]
//! alpha = 1.0
//!
//! [augmix]
//! enabled = true
//! level = 3
//! chains = 3
//! max_ops = 3
//! beta = [1.0, 1.0]
//! dirichlet = 1.0
//! ops = ["rotate", "equalize"] # default: all nine
//! geometry = "chain_prefix"    # or aligned
//! ```
//!
//! Keys left out fall back to the preset, then to the defaults shown.
//! `seed` may be given here; the command line value wins.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use afda_core::augmix::{AugOpKind, AugPolicy, GeometryMode};
use afda_core::curriculum::{CurriculumConfig, SchedulerKind, DEFAULT_EXP_CURVATURE};
use afda_core::pipeline::RunConfig;
use serde::Deserialize;

use crate::dataset::DatasetManifest;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Retina,
    RetinaTransformer,
    Nuclei,
    NucleiTransformer,
}

impl Preset {
    /// `(β_opt, α, magnitude level)`
    pub fn values(self) -> (f64, f64, u32) {
        match self {
            Preset::Retina => (0.006, 1.0, 3),
            Preset::RetinaTransformer => (0.006, 0.5, 2),
            Preset::Nuclei => (1.0, 0.7, 3),
            Preset::NucleiTransformer => (1.0, 0.7, 2),
        }
    }
}

pub const DEFAULT_EPOCHS: u32 = 100;
pub const DEFAULT_EPOCH_RATIO: f64 = 0.5;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub output_root: Option<PathBuf>,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub curriculum: CurriculumSection,
    #[serde(default)]
    pub fusion: FusionSection,
    #[serde(default)]
    pub augmix: AugmixSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub root: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub height: Option<usize>,
    pub width: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumSection {
    pub kind: Option<String>,
    pub beta_opt: Option<f64>,
    pub epoch_ratio: Option<f64>,
    pub epochs: Option<u32>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionSection {
    pub alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmixSection {
    pub enabled: Option<bool>,
    pub level: Option<u32>,
    pub chains: Option<usize>,
    pub max_ops: Option<usize>,
    pub beta: Option<[f64; 2]>,
    pub dirichlet: Option<f64>,
    pub ops: Option<Vec<String>>,
    pub geometry: Option<String>,
}

/// Where records come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Directory(PathBuf),
    Manifest(PathBuf),
}

/// A fully resolved configuration.
#[derive(Debug, Clone)]
pub struct Settings {
    pub run: RunConfig,
    pub output_root: PathBuf,
    pub dataset: DatasetSource,
    pub size: Option<(usize, usize)>,
}

impl Settings {
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, seed).map_err(|e| match e {
            Error::Invalid(m) => Error::format(path, m),
            other => other,
        })
    }

    /// Parses TOML text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path, seed: Option<u64>) -> Result<Self> {
        let file: RunFile = toml::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
        file.resolve(base, seed)
    }

    pub fn manifest(&self) -> Result<DatasetManifest> {
        let m = match &self.dataset {
            DatasetSource::Directory(root) => DatasetManifest::scan(root)?,
            DatasetSource::Manifest(path) => DatasetManifest::from_jsonl(path)?,
        };
        Ok(match self.size {
            Some((h, w)) => m.with_size(h, w),
            None => m,
        })
    }
}

fn parse_name<T: FromStr<Err = afda_core::Error>>(s: &str) -> Result<T> {
    T::from_str(s).map_err(|e| Error::Invalid(e.to_string()))
}

impl RunFile {
    pub fn resolve(self, base: &Path, seed: Option<u64>) -> Result<Settings> {
        let (beta_p, alpha_p, level_p) = match self.preset.map(Preset::values) {
            Some((b, a, l)) => (Some(b), Some(a), Some(l)),
            None => (None, None, None),
        };
        let c = &self.curriculum;
        let kind = c.kind.as_deref().map(parse_name::<SchedulerKind>).transpose()?.unwrap_or(SchedulerKind::Linear);
        let beta_opt = c
            .beta_opt
            .or(beta_p)
            .ok_or_else(|| Error::Invalid("curriculum.beta_opt is required without a preset".into()))?;
        let curriculum = CurriculumConfig::with_curvature(
            kind,
            beta_opt,
            c.epoch_ratio.unwrap_or(DEFAULT_EPOCH_RATIO),
            c.epochs.unwrap_or(DEFAULT_EPOCHS),
            c.gamma.unwrap_or(DEFAULT_EXP_CURVATURE),
        )?;
        let alpha = self.fusion.alpha.or(alpha_p).unwrap_or(1.0);

        let a = &self.augmix;
        let aug = if a.enabled.unwrap_or(true) {
            let mut p = AugPolicy::default();
            if let Some(l) = a.level.or(level_p) {
                p.magnitude_level = l;
            }
            if let Some(n) = a.chains {
                p.num_chains = n;
            }
            if let Some(n) = a.max_ops {
                p.max_ops_per_chain = n;
            }
            if let Some([x, y]) = a.beta {
                p.beta_params = (x, y);
            }
            if let Some(d) = a.dirichlet {
                p.dirichlet_param = d;
            }
            if let Some(ops) = &a.ops {
                p.ops = ops.iter().map(|s| parse_name::<AugOpKind>(s)).collect::<Result<_>>()?;
            }
            if let Some(g) = &a.geometry {
                p.geometry = parse_geometry(g)?;
            }
            Some(p)
        } else {
            None
        };

        let seed = seed
            .or(self.seed)
            .ok_or_else(|| Error::Invalid("a seed is required".into()))?;
        let run = RunConfig::new(curriculum, alpha, aug, seed)?;

        let d = self.dataset;
        let dataset = match (d.root, d.manifest) {
            (Some(r), None) => DatasetSource::Directory(base.join(r)),
            (None, Some(m)) => DatasetSource::Manifest(base.join(m)),
            _ => return Err(Error::Invalid("exactly one of dataset.root and dataset.manifest must be set".into())),
        };
        let size = match (d.height, d.width) {
            (Some(h), Some(w)) if h > 0 && w > 0 => Some((h, w)),
            (None, None) => None,
            _ => return Err(Error::Invalid("dataset.height and dataset.width must both be positive".into())),
        };
        Ok(Settings {
            run,
            output_root: base.join(self.output_root.unwrap_or_else(|| "afda-out".into())),
            dataset,
            size,
        })
    }
}

pub fn parse_geometry(s: &str) -> Result<GeometryMode> {
    match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
        "aligned" => Ok(GeometryMode::Aligned),
        "chain_prefix" => Ok(GeometryMode::ChainPrefix),
        other => Err(Error::Invalid(format!("unknown geometry mode `{other}`"))),
    }
}
