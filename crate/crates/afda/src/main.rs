//! `afda` command line.
//!
//! Every command prints one JSON summary line on stdout. Failures print a
//! JSON error record on stderr and exit nonzero: 1 for errors, 2 for
//! invalid arguments, 3 when a batch finished but recorded per-file
//! failures in its manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use afda::config::{parse_geometry, Settings};
use afda::error::{Error, ErrorRecord, Result};
use afda::suite::{corruption_suite, load_assets, SuiteOptions};
use afda::sweep::{read_scores, sweep_table, SweepOptions, DEFAULT_EPOCH_RATIOS};
use afda::{evaluate, generate, io, with_workers, WORKERS_ENV};
use afda_core::augmix::{chained_augmix, AugPolicy};
use afda_core::corruptions::{CorruptionKind, SimulatedJpeg};
use afda_core::curriculum::{schedule_table, CurriculumConfig, SchedulerKind, DEFAULT_EXP_CURVATURE};
use afda_core::fusion::{fda_transform, FusionParams};
use afda_core::rng;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "afda", version, about = "Curriculum-scheduled Fourier amplitude fusion data pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Workers {
    /// Worker threads; 0 uses one per core.
    #[arg(long, env = WORKERS_ENV, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse the low-frequency amplitude of TGT into SRC.
    Fuse {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        tgt: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the per-epoch fusion extent as CSV (`epoch,beta_c`).
    Schedule {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        beta_opt: f64,
        #[arg(long)]
        epochs: u32,
        #[arg(long)]
        epoch_ratio: f64,
        #[arg(long, default_value_t = DEFAULT_EXP_CURVATURE)]
        gamma: f64,
        /// Required for the random kind.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chained augmentation mixing of one image and its mask.
    Augment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        level: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        out_mask: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        chains: usize,
        #[arg(long, default_value_t = 3)]
        max_ops: usize,
        /// `chain_prefix` or `aligned`.
        #[arg(long, default_value = "chain_prefix")]
        geometry: String,
        #[arg(long)]
        photometric_only: bool,
    },
    /// Corrupt every PNG in a directory at every requested kind and severity.
    Corrupt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        severities: Vec<u8>,
        /// Directory with frost textures.
        #[arg(long)]
        assets: Option<PathBuf>,
        /// Bit-exact built-in JPEG stages instead of the encoder round trip.
        #[arg(long)]
        simulated_jpeg: bool,
        #[command(flatten)]
        workers: Workers,
    },
    /// Generate one epoch.
    Epoch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        epoch: u32,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        workers: Workers,
    },
    /// Generate every epoch.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        workers: Workers,
    },
    /// Per-class Dice between predicted and reference mask directories.
    Dice {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<u8>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scheduler-by-epoch-ratio comparison table.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPOCH_RATIOS)]
        epoch_ratios: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values = ["linear", "exponential"])]
        kinds: Vec<String>,
        #[arg(long, default_value_t = 1.0)]
        beta_opt: f64,
        #[arg(long, default_value_t = 100)]
        epochs: u32,
        #[arg(long, default_value_t = DEFAULT_EXP_CURVATURE)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `scheduler,epoch_ratio,score` CSV of measured results.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Also write the long-form schedules here.
        #[arg(long)]
        schedules: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Summary JSON and whether per-file failures were recorded.
type Outcome = (serde_json::Value, bool);

fn parse_list<T: std::str::FromStr<Err = afda_core::Error>>(items: &[String]) -> Result<Vec<T>> {
    items
        .iter()
        .map(|s| s.parse::<T>().map_err(|e| Error::Invalid(e.to_string())))
        .collect()
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::Fuse {
            src,
            tgt,
            alpha,
            beta,
            out,
        } => {
            let params = FusionParams::new(alpha, beta)?;
            let fused = fda_transform(&io::read_image(&src)?, &io::read_image(&tgt)?, params)?;
            io::write_image(&out, &fused)?;
            Ok((json!({"command": "fuse", "out": out, "height": fused.height(), "width": fused.width()}), false))
        }
        Command::Schedule {
            kind,
            beta_opt,
            epochs,
            epoch_ratio,
            gamma,
            seed,
            out,
        } => {
            let kind: SchedulerKind = kind.parse()?;
            let seed = match (kind, seed) {
                (SchedulerKind::Random, None) => {
                    return Err(Error::Invalid("--seed is required for the random kind".into()))
                }
                (_, s) => s.unwrap_or(0),
            };
            let cfg = CurriculumConfig::with_curvature(kind, beta_opt, epoch_ratio, epochs, gamma)?;
            let mut w = csv::Writer::from_writer(create(&out)?);
            let csv_err = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
            w.write_record(["epoch", "beta_c"]).map_err(csv_err)?;
            for (e, b) in schedule_table(&cfg, seed) {
                w.write_record([e.to_string(), b.to_string()]).map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
            Ok((json!({"command": "schedule", "out": out, "rows": epochs}), false))
        }
        Command::Augment {
            input,
            mask,
            level,
            seed,
            out,
            out_mask,
            chains,
            max_ops,
            geometry,
            photometric_only,
        } => {
            let mut policy = AugPolicy {
                num_chains: chains,
                max_ops_per_chain: max_ops,
                magnitude_level: level,
                geometry: parse_geometry(&geometry)?,
                ..AugPolicy::default()
            };
            if photometric_only {
                policy = policy.photometric_only();
            }
            let image = io::read_image(&input)?;
            let mask = mask.as_deref().map(io::read_mask).transpose()?;
            let mut r = rng::sample_rng(seed, 0, 0);
            let result = chained_augmix(&image, mask.as_ref(), &policy, &mut r)?;
            io::write_image(&out, &result.image)?;
            match (&out_mask, &result.mask) {
                (Some(p), Some(m)) => io::write_mask(p, m)?,
                (Some(_), None) => return Err(Error::Invalid("--out-mask needs --mask".into())),
                _ => {}
            }
            let ops: Vec<String> = result.plan.geometric.iter().chain(result.plan.chains.iter().flatten()).map(|op| op.kind().name().to_string()).collect();
            Ok((
                json!({"command": "augment", "out": out, "m": result.plan.coefficients.m(), "w": result.plan.coefficients.w(), "ops": ops}),
                false,
            ))
        }
        Command::Corrupt {
            input,
            out,
            seed,
            kinds,
            severities,
            assets,
            simulated_jpeg,
            workers,
        } => {
            let mut opts = SuiteOptions::default();
            if !kinds.is_empty() {
                opts.kinds = parse_list::<CorruptionKind>(&kinds)?;
            }
            if !severities.is_empty() {
                opts.severities = severities;
            }
            if let Some(dir) = &assets {
                opts.assets.frost = load_assets(dir)?;
            }
            if simulated_jpeg {
                opts.assets.jpeg = Some(Box::new(SimulatedJpeg));
            }
            let summary = with_workers(workers.workers, || corruption_suite(&input, &out, seed, &opts))??;
            let failed = summary.failed > 0;
            Ok((json!({"command": "corrupt", "summary": summary}), failed))
        }
        Command::Epoch {
            config,
            epoch,
            seed,
            workers,
        } => {
            let settings = Settings::load(&config, Some(seed))?;
            let manifest = settings.manifest()?;
            manifest.validate()?;
            let summary = with_workers(workers.workers, || {
                generate::generate_epoch(&manifest, &settings.run, &settings.output_root, epoch)
            })??;
            let failed = summary.failed > 0;
            Ok((json!({"command": "epoch", "summary": summary}), failed))
        }
        Command::Run { config, seed, workers } => {
            let settings = Settings::load(&config, Some(seed))?;
            let manifest = settings.manifest()?;
            manifest.validate()?;
            let epochs = with_workers(workers.workers, || generate::run(&manifest, &settings.run, &settings.output_root))??;
            let failed = epochs.iter().any(|e| e.failed > 0);
            Ok((json!({"command": "run", "output_root": settings.output_root, "epochs": epochs}), failed))
        }
        Command::Dice { pred, gt, classes, out } => {
            let report = evaluate::evaluate_masks(&pred, &gt, &classes)?;
            match &out {
                Some(p) => report.write_csv(create(p)?)?,
                None => report.write_csv(std::io::stdout().lock())?,
            }
            let summary = json!({
                "command": "dice",
                "evaluated": report.evaluated,
                "skipped": report.skipped,
                "mean": report.overall.0,
                "std": report.overall.1,
            });
            // with the CSV on stdout, the summary goes to stderr
            if out.is_none() {
                eprintln!("{summary}");
                return Ok((serde_json::Value::Null, report.skipped > 0));
            }
            Ok((summary, report.skipped > 0))
        }
        Command::Sweep {
            epoch_ratios,
            kinds,
            beta_opt,
            epochs,
            gamma,
            seed,
            scores,
            schedules,
            out,
        } => {
            let opts = SweepOptions {
                kinds: parse_list(&kinds)?,
                epoch_ratios,
                beta_opt,
                epochs,
                gamma,
                seed,
            };
            let scores = match &scores {
                Some(p) => Some(read_scores(fs::File::open(p).map_err(|e| Error::Io {
                    path: p.clone(),
                    source: e,
                })?)?),
                None => None,
            };
            let table = sweep_table(&opts, scores.as_deref())?;
            table.write_csv(create(&out)?)?;
            if let Some(p) = &schedules {
                let mut w = csv::Writer::from_writer(create(p)?);
                for row in opts.schedules()? {
                    w.serialize(row).map_err(|e| Error::Invalid(format!("csv: {e}")))?;
                }
                w.flush().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
            }
            let metric = if scores.is_some() { "score" } else { "exposure" };
            Ok((json!({"command": "sweep", "out": out, "metric": metric, "rows": table.rows.len()}), false))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let record = ErrorRecord {
                error: "usage".into(),
                message: e.to_string().trim().to_string(),
                path: None,
            };
            eprintln!("{}", serde_json::to_string(&record).expect("record serializes"));
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok((summary, partial)) => {
            if !summary.is_null() {
                let mut out = std::io::stdout().lock();
                let _ = writeln!(out, "{summary}");
            }
            if partial {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&ErrorRecord::from(&e)).expect("record serializes"));
            ExitCode::FAILURE
        }
    }
}
