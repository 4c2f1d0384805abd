//! Scheduler comparison across epoch ratios.
//!
//! One row per scheduler kind, one column per epoch ratio, then the mean
//! and population deviation across ratios. Cells are either externally
//! measured scores (`scheduler,epoch_ratio,score` CSV, e.g. validation
//! Dice from a training run) or, without scores, the curriculum exposure
//! `mean_e β_c(e) / β_opt` of each schedule.

use std::io::{Read, Write};

use afda_core::curriculum::{schedule_table, CurriculumConfig, SchedulerKind};
use afda_core::metrics::mean_std;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EPOCH_RATIOS: [f64; 8] = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub kinds: Vec<SchedulerKind>,
    pub epoch_ratios: Vec<f64>,
    pub beta_opt: f64,
    pub epochs: u32,
    pub gamma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScoreRow {
    pub scheduler: String,
    pub epoch_ratio: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kind: SchedulerKind,
    pub cells: Vec<Option<f64>>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub epoch_ratios: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

/// Long-form `(kind, epoch_ratio, epoch, beta_c)` rows for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleRow {
    pub scheduler: &'static str,
    pub epoch_ratio: f64,
    pub epoch: u32,
    pub beta_c: f64,
}

impl SweepOptions {
    fn config(&self, kind: SchedulerKind, r: f64) -> Result<CurriculumConfig> {
        Ok(CurriculumConfig::with_curvature(kind, self.beta_opt, r, self.epochs, self.gamma)?)
    }

    pub fn schedules(&self) -> Result<Vec<ScheduleRow>> {
        let mut out = Vec::new();
        for &kind in &self.kinds {
            for &r in &self.epoch_ratios {
                for (epoch, beta_c) in schedule_table(&self.config(kind, r)?, self.seed) {
                    out.push(ScheduleRow {
                        scheduler: kind.name(),
                        epoch_ratio: r,
                        epoch,
                        beta_c,
                    });
                }
            }
        }
        Ok(out)
    }
}

pub fn read_scores<R: Read>(input: R) -> Result<Vec<ScoreRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Invalid(format!("scores csv: {e}")))
}

pub fn sweep_table(opts: &SweepOptions, scores: Option<&[ScoreRow]>) -> Result<SweepTable> {
    let mut rows = Vec::new();
    for &kind in &opts.kinds {
        let mut cells = Vec::new();
        for &r in &opts.epoch_ratios {
            let cell = match scores {
                Some(s) => s
                    .iter()
                    .find(|row| {
                        row.scheduler.parse::<SchedulerKind>().ok() == Some(kind) && (row.epoch_ratio - r).abs() < 1e-9
                    })
                    .map(|row| row.score),
                None => {
                    let table = schedule_table(&opts.config(kind, r)?, opts.seed);
                    let total: f64 = table.iter().map(|&(_, b)| b).sum();
                    (opts.beta_opt > 0.0).then(|| total / table.len() as f64 / opts.beta_opt)
                }
            };
            cells.push(cell);
        }
        let present: Vec<f64> = cells.iter().flatten().copied().collect();
        let stats = mean_std(&present);
        rows.push(SweepRow {
            kind,
            cells,
            mean: stats.map(|s| s.0),
            std: stats.map(|s| s.1),
        });
    }
    Ok(SweepTable {
        epoch_ratios: opts.epoch_ratios.clone(),
        rows,
    })
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["scheduler".to_string()];
        header.extend(self.epoch_ratios.iter().map(|r| r.to_string()));
        header.extend(["mean".into(), "std".into()]);
        w.write_record(&header).map_err(csv_err)?;
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            let mut rec = vec![row.kind.name().to_string()];
            rec.extend(row.cells.iter().map(|&c| num(c)));
            rec.extend([num(row.mean), num(row.std)]);
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        Ok(())
    }
}
