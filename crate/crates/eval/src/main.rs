use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use hiou_core::matching::MatchConfig;
use hiou_core::pipeline::ResizePolicy;
use hiou_core::synth::{match_success_rate, PerturbKind};
use hiou_core::{Connectivity, Strategy};
use hiou_eval::manifest::{load_trials, perturb_dataset, PerturbRun};
use hiou_eval::report::round6;
use hiou_eval::{dataset_stats, emit_report, evaluate_dataset, DatasetSpec, EvalError, Format};

#[derive(Parser)]
#[command(name = "eval", version, about = "Target-level evaluation of small-target segmentation masks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate predictions against GT masks paired by file stem.
    Run {
        #[arg(long)]
        pred_dir: PathBuf,
        #[arg(long)]
        gt_dir: PathBuf,
        /// Intensity images for the attribute statistics block.
        #[arg(long)]
        img_dir: Option<PathBuf>,
        #[arg(long, default_value = "dataset")]
        name: String,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 8)]
        connectivity: u32,
        /// Comma-separated subset of opdc,distance.
        #[arg(long, default_value = "opdc,distance")]
        matcher: String,
        #[arg(long, default_value = "forbid")]
        resize: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
        /// Worker threads; 0 uses every available core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Write seeded perturbations of every GT mask plus a trial manifest.
    Perturb {
        #[arg(long)]
        gt_dir: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        magnitude: f64,
        /// Pastes for copy_paste, bridges for connect.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 8)]
        connectivity: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Success rate of a matcher on the trials of a manifest.
    Matchrate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "opdc")]
        matcher: String,
    },
    /// Dataset attribute statistics.
    Stats {
        #[arg(long)]
        img_dir: PathBuf,
        #[arg(long)]
        gt_dir: PathBuf,
        #[arg(long, default_value_t = 8)]
        connectivity: u32,
    },
}

fn connectivity(n: u32) -> Result<Connectivity, EvalError> {
    Connectivity::from_neighbors(n).ok_or_else(|| EvalError::Config(format!("connectivity must be 4 or 8, got {n}")))
}

fn matchers(list: &str) -> Result<Vec<Strategy>, EvalError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let s = match name {
            "distance_only" => Strategy::DistanceOnly,
            _ => Strategy::from_name(name).ok_or_else(|| EvalError::Config(format!("unknown matcher {name:?}")))?,
        };
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(EvalError::Config("no matcher selected".into()));
    }
    Ok(out)
}

fn write_output(out: Option<&PathBuf>, bytes: &[u8]) -> Result<(), EvalError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|source| EvalError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout().write_all(bytes).map_err(|source| EvalError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn pretty(value: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

fn run(cli: Cli) -> Result<(), EvalError> {
    match cli.command {
        Command::Run {
            pred_dir,
            gt_dir,
            img_dir,
            name,
            threshold,
            connectivity: conn,
            matcher,
            resize,
            out,
            format,
            workers,
        } => {
            let format = Format::from_name(&format).ok_or_else(|| EvalError::Config(format!("unknown format {format:?}")))?;
            let resize = ResizePolicy::from_name(&resize).ok_or_else(|| EvalError::Config(format!("unknown resize policy {resize:?}")))?;
            let spec = DatasetSpec {
                name,
                pred_dir,
                gt_dir,
                img_dir,
                threshold,
                connectivity: connectivity(conn)?,
                matchers: matchers(&matcher)?,
                resize,
                workers,
            };
            let report = evaluate_dataset(&spec)?;
            write_output(out.as_ref(), &emit_report(&report, format)?)
        }
        Command::Perturb {
            gt_dir,
            kind,
            seed,
            magnitude,
            count,
            connectivity: conn,
            out,
        } => {
            let kind = PerturbKind::from_name(&kind).ok_or_else(|| EvalError::Config(format!("unknown kind {kind:?}")))?;
            let run = PerturbRun {
                kind,
                seed,
                magnitude,
                count,
                connectivity: connectivity(conn)?,
            };
            let manifest = perturb_dataset(&gt_dir, &out, &run)?;
            let summary = json!({
                "trials": manifest["trials"].as_array().map_or(0, Vec::len),
                "skipped": manifest["skipped"].as_array().map_or(0, Vec::len),
                "out": out.display().to_string(),
            });
            write_output(None, &pretty(&summary))
        }
        Command::Matchrate { manifest, matcher } => {
            let strategies = matchers(&matcher)?;
            let trials = load_trials(&manifest)?;
            let mut rates = serde_json::Map::new();
            for s in strategies {
                let rate = match_success_rate(&trials, &MatchConfig::with_strategy(s))?;
                rates.insert(s.name().into(), json!(rate));
            }
            write_output(None, &pretty(&json!({ "trials": trials.len(), "success_rate": rates })))
        }
        Command::Stats {
            img_dir,
            gt_dir,
            connectivity: conn,
        } => {
            let s = dataset_stats(&img_dir, &gt_dir, connectivity(conn)?)?;
            let value = json!({
                "brightness_mean": round6(s.brightness_mean),
                "brightness_std": round6(s.brightness_std),
                "rms_contrast": round6(s.rms_contrast),
                "laplacian_noise": round6(s.laplacian_noise),
                "avg_target_count": round6(s.avg_target_count),
                "avg_target_size": round6(s.avg_target_size),
                "target_background_contrast": round6(s.target_background_contrast),
                "fg_bg_area_ratio": round6(s.fg_bg_area_ratio),
            });
            write_output(None, &pretty(&value))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
