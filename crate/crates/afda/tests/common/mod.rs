//! Fixture corpora on disk and tree comparison.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use afda::io;
use afda_core::fixtures::{blob_mask, domain_image};

/// Writes `root/source/{images,masks}` and `root/target/images` with
/// seeded fixture rasters.
pub fn write_corpus(root: &Path, sources: usize, targets: usize, h: usize, w: usize) {
    for i in 0..sources {
        let name = format!("s{i:03}.png");
        io::write_image(&root.join("source/images").join(&name), &domain_image(h, w, 3, i as u64, 1)).unwrap();
        io::write_mask(&root.join("source/masks").join(&name), &blob_mask(h, w, 3, i as u64)).unwrap();
    }
    for i in 0..targets {
        let name = format!("t{i:03}.png");
        io::write_image(&root.join("target/images").join(&name), &domain_image(h, w, 3, 1000 + i as u64, 2)).unwrap();
    }
}

/// Config pointing at a scanned corpus.
pub fn write_config(path: &Path, dataset: &Path, out: &Path, extra: &str) {
    let text = format!(
        "output_root = {:?}\n{extra}\n[dataset]\nroot = {:?}\n",
        out.to_str().unwrap(),
        dataset.to_str().unwrap()
    );
    fs::write(path, text).unwrap();
}

/// Relative path to file contents for every file below `root`.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                out.insert(p.strip_prefix(base).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
