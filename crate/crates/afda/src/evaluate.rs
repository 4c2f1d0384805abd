//! Per-class Dice over directories of predicted and reference masks.
//!
//! Files pair up by name. The CSV has one row per reference file, then a
//! `MEAN` and a `STD` row (population deviation over evaluated files):
//!
//! ```text
//! file,class_1,class_2,mean,status
//! a.png,1,0.5,0.75,ok
//! b.png,,,,missing prediction
//! MEAN,1,0.5,0.75,
//! STD,0,0,0,
//! ```
//!
//! The `mean` column is the per-file average over the requested classes.

use std::io::Write;
use std::path::Path;

use afda_core::metrics::{dice, mean_std};
use serde::Serialize;

use crate::dataset::list_pngs;
use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiceRow {
    pub file: String,
    /// One value per requested class; empty when skipped.
    pub scores: Vec<f64>,
    pub mean: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiceReport {
    pub classes: Vec<u8>,
    pub rows: Vec<DiceRow>,
    /// `(mean, std)` per class, in `classes` order.
    pub per_class: Vec<(f64, f64)>,
    /// `(mean, std)` of the per-file means.
    pub overall: (f64, f64),
    pub evaluated: usize,
    pub skipped: usize,
}

pub fn evaluate_masks(pred_dir: &Path, gt_dir: &Path, classes: &[u8]) -> Result<DiceReport> {
    if classes.is_empty() {
        return Err(Error::Invalid("at least one class is required".into()));
    }
    let mut rows = Vec::new();
    for name in list_pngs(gt_dir)? {
        let pred_path = pred_dir.join(&name);
        let skip = |status: String| DiceRow {
            file: name.clone(),
            scores: Vec::new(),
            mean: None,
            status,
        };
        if !pred_path.is_file() {
            rows.push(skip("missing prediction".into()));
            continue;
        }
        let scored = io::read_mask(&gt_dir.join(&name)).and_then(|gt| {
            let pred = io::read_mask(&pred_path)?;
            classes
                .iter()
                .map(|&c| dice(&pred, &gt, c).map_err(Error::from))
                .collect::<Result<Vec<f64>>>()
        });
        match scored {
            Ok(scores) => {
                let mean = scores.iter().sum::<f64>() / scores.len() as f64;
                rows.push(DiceRow {
                    file: name.clone(),
                    scores,
                    mean: Some(mean),
                    status: "ok".into(),
                });
            }
            Err(e) => rows.push(skip(e.to_string())),
        }
    }
    for name in list_pngs(pred_dir)? {
        if !gt_dir.join(&name).is_file() {
            rows.push(DiceRow {
                file: name,
                scores: Vec::new(),
                mean: None,
                status: "missing reference".into(),
            });
        }
    }
    Ok(DiceReport::from_rows(classes.to_vec(), rows))
}

impl DiceReport {
    pub fn from_rows(classes: Vec<u8>, rows: Vec<DiceRow>) -> Self {
        let ok: Vec<&DiceRow> = rows.iter().filter(|r| r.mean.is_some()).collect();
        let stats = |v: Vec<f64>| mean_std(&v).unwrap_or((f64::NAN, f64::NAN));
        let per_class = (0..classes.len())
            .map(|k| stats(ok.iter().map(|r| r.scores[k]).collect()))
            .collect();
        let overall = stats(ok.iter().filter_map(|r| r.mean).collect());
        let evaluated = ok.len();
        DiceReport {
            skipped: rows.len() - evaluated,
            classes,
            rows,
            per_class,
            overall,
            evaluated,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["file".to_string()];
        header.extend(self.classes.iter().map(|c| format!("class_{c}")));
        header.extend(["mean".into(), "status".into()]);
        w.write_record(&header).map_err(csv_err)?;
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![r.file.clone()];
            if r.scores.is_empty() {
                rec.extend(self.classes.iter().map(|_| String::new()));
            } else {
                rec.extend(r.scores.iter().map(|s| s.to_string()));
            }
            rec.extend([num(r.mean), r.status.clone()]);
            w.write_record(&rec).map_err(csv_err)?;
        }
        for (label, pick) in [("MEAN", 0), ("STD", 1)] {
            let get = |p: (f64, f64)| if pick == 0 { p.0 } else { p.1 };
            let mut rec = vec![label.to_string()];
            rec.extend(self.per_class.iter().map(|&p| get(p).to_string()));
            rec.extend([get(self.overall).to_string(), String::new()]);
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        Ok(())
    }
}
