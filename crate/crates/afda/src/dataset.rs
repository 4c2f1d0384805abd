//! Source/target record lists.
//!
//! A directory is scanned as
//!
//! ```text
//! root/source/images/*.png   labelled domain (or root/source/*.png)
//! root/source/masks/*.png    optional, matched by file name
//! root/target/images/*.png   unlabelled domain (or root/target/*.png)
//! ```
//!
//! The same records can be listed in a JSONL file, one object per line:
//! `{"image": "a.png", "mask": "a_mask.png", "domain": "source"}`, with
//! paths relative to the file's directory.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use afda_core::{Image, Mask};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Source,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    root: PathBuf,
    records: Vec<Record>,
    size: Option<(usize, usize)>,
}

/// Sorted `*.png` file names directly inside `dir`.
pub fn list_pngs(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let is_png = Path::new(&name)
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && entry.path().is_file() {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

fn images_dir(root: &Path, domain: &str) -> PathBuf {
    let nested = root.join(domain).join("images");
    if nested.is_dir() {
        nested
    } else {
        root.join(domain)
    }
}

impl DatasetManifest {
    pub fn new(root: impl Into<PathBuf>, records: Vec<Record>) -> Self {
        DatasetManifest {
            root: root.into(),
            records,
            size: None,
        }
    }

    pub fn scan(root: &Path) -> Result<Self> {
        let mut records = Vec::new();
        let src_dir = images_dir(root, "source");
        let mask_dir = root.join("source").join("masks");
        for name in list_pngs(&src_dir)? {
            let mask = mask_dir.join(&name);
            records.push(Record {
                image: rel(root, &src_dir.join(&name)),
                mask: mask.is_file().then(|| rel(root, &mask)),
                domain: Domain::Source,
            });
        }
        let tgt_dir = images_dir(root, "target");
        for name in list_pngs(&tgt_dir)? {
            records.push(Record {
                image: rel(root, &tgt_dir.join(&name)),
                mask: None,
                domain: Domain::Target,
            });
        }
        Ok(Self::new(root, records))
    }

    pub fn from_jsonl(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut records = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(&line)
                .map_err(|e| Error::format(path, format!("line {}: {e}", n + 1)))?;
            records.push(rec);
        }
        Ok(Self::new(path.parent().unwrap_or(Path::new(".")), records))
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for r in &self.records {
            serde_json::to_writer(&mut out, r).expect("records serialize");
            out.push(b'\n');
        }
        fs::File::create(path)
            .and_then(|mut f| f.write_all(&out))
            .map_err(|e| Error::io(path, e))
    }

    /// Every source image (and mask) is resampled to `height × width`.
    pub fn with_size(mut self, height: usize, width: usize) -> Self {
        self.size = Some((height, width));
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn size(&self) -> Option<(usize, usize)> {
        self.size
    }

    pub fn sources(&self) -> Vec<&Record> {
        self.records.iter().filter(|r| r.domain == Domain::Source).collect()
    }

    pub fn targets(&self) -> Vec<&Record> {
        self.records.iter().filter(|r| r.domain == Domain::Target).collect()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.root.join(p)
    }

    /// Structural checks plus a header decode of every referenced file.
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::format(&self.root, m));
        if self.sources().is_empty() {
            return invalid("no source records".into());
        }
        if self.targets().is_empty() {
            return invalid("no target records".into());
        }
        for r in &self.records {
            if r.domain == Domain::Target && r.mask.is_some() {
                return invalid(format!("target record {} has a mask", r.image.display()));
            }
            for p in std::iter::once(&r.image).chain(&r.mask) {
                let full = self.resolve(p);
                image::image_dimensions(&full).map_err(|source| Error::Image { path: full, source })?;
            }
        }
        Ok(())
    }

    /// Decodes a source record, resized to the manifest size if one is set.
    pub fn load_source(&self, r: &Record) -> Result<(Image, Option<Mask>)> {
        let mut image = io::read_image(&self.resolve(&r.image))?;
        let mut mask = r.mask.as_ref().map(|m| io::read_mask(&self.resolve(m))).transpose()?;
        if let Some((h, w)) = self.size {
            if image.dims() != (h, w) {
                image = image.resize_bilinear(h, w)?;
            }
            if let Some(m) = &mut mask {
                if m.dims() != (h, w) {
                    *m = m.resize_nearest(h, w)?;
                }
            }
        }
        if let Some(m) = &mask {
            if m.dims() != image.dims() {
                return Err(afda_core::Error::DimensionMismatch {
                    expected: image.dims(),
                    found: m.dims(),
                }
                .into());
            }
        }
        Ok((image, mask))
    }

    pub fn load_target(&self, r: &Record) -> Result<Image> {
        io::read_image(&self.resolve(&r.image))
    }
}

fn rel(root: &Path, p: &Path) -> PathBuf {
    p.strip_prefix(root).map(Path::to_path_buf).unwrap_or_else(|_| p.to_path_buf())
}
