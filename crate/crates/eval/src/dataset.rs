//! Directory datasets: stem pairing, parallel evaluation, attribute statistics.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hiou_core::matching::MatchConfig;
use hiou_core::pipeline::{aggregate, evaluate_pair, EvalConfig, MatcherSummary, ResizePolicy};
use hiou_core::stats::{aggregate_attributes, image_attributes, AttributeStats};
use hiou_core::{Connectivity, SampleEvaluation, Strategy};
use rayon::prelude::*;

use crate::error::{EvalError, Result};
use crate::io;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    pub pred_dir: PathBuf,
    pub gt_dir: PathBuf,
    pub img_dir: Option<PathBuf>,
    pub threshold: f64,
    pub connectivity: Connectivity,
    pub matchers: Vec<Strategy>,
    pub resize: ResizePolicy,
    /// Worker threads; 0 picks the available parallelism.
    pub workers: usize,
}

impl DatasetSpec {
    pub fn new(pred_dir: impl Into<PathBuf>, gt_dir: impl Into<PathBuf>) -> Self {
        let defaults = EvalConfig::default();
        Self {
            name: String::from("dataset"),
            pred_dir: pred_dir.into(),
            gt_dir: gt_dir.into(),
            img_dir: None,
            threshold: defaults.threshold,
            connectivity: defaults.connectivity,
            matchers: defaults.matchers.iter().map(|m| m.strategy).collect(),
            resize: defaults.resize,
            workers: 0,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            threshold: self.threshold,
            connectivity: self.connectivity,
            matchers: self.matchers.iter().map(|&s| MatchConfig::with_strategy(s)).collect(),
            resize: self.resize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePaths {
    pub id: String,
    pub pred: PathBuf,
    pub gt: PathBuf,
}

/// Supported image files of a directory keyed by extension-stripped file name.
pub fn files_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(EvalError::io(dir))? {
        let path = entry.map_err(EvalError::io(dir))?.path();
        if !path.is_file() || !io::is_supported(&path) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if stem.starts_with('.') {
            continue;
        }
        if out.insert(stem.to_owned(), path.clone()).is_some() {
            return Err(EvalError::DuplicateStem {
                dir: dir.to_path_buf(),
                stem: stem.to_owned(),
            });
        }
    }
    Ok(out)
}

/// Pairs prediction and GT files by identical stem, sorted by stem.
pub fn pair_samples(pred_dir: &Path, gt_dir: &Path) -> Result<Vec<SamplePaths>> {
    let preds = files_by_stem(pred_dir)?;
    let gts = files_by_stem(gt_dir)?;
    let pred_only: Vec<String> = preds.keys().filter(|k| !gts.contains_key(*k)).cloned().collect();
    let gt_only: Vec<String> = gts.keys().filter(|k| !preds.contains_key(*k)).cloned().collect();
    if !pred_only.is_empty() || !gt_only.is_empty() {
        return Err(EvalError::Orphans { pred_only, gt_only });
    }
    if preds.is_empty() {
        return Err(EvalError::NoPairs);
    }
    Ok(preds
        .into_iter()
        .map(|(id, pred)| {
            let gt = gts[&id].clone();
            SamplePaths { id, pred, gt }
        })
        .collect())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EvalError::Config(e.to_string()))
}

pub fn evaluate_sample(paths: &SamplePaths, cfg: &EvalConfig) -> Result<SampleEvaluation> {
    let pred = io::read_scores(&paths.pred)?;
    let gt = io::read_mask(&paths.gt)?;
    evaluate_pair(&paths.id, &pred, &gt, cfg).map_err(|source| match source {
        hiou_core::Error::InvalidConfig(_) => EvalError::Core(source),
        _ => EvalError::Sample {
            id: paths.id.clone(),
            source,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetReport {
    pub spec: DatasetSpec,
    pub summaries: Vec<MatcherSummary>,
    /// Sorted by sample id.
    pub samples: Vec<SampleEvaluation>,
    pub stats: Option<AttributeStats>,
}

/// Evaluates every paired sample in parallel, then folds them in stem order.
pub fn evaluate_dataset(spec: &DatasetSpec) -> Result<DatasetReport> {
    let cfg = spec.eval_config();
    cfg.validate()?;
    let pairs = pair_samples(&spec.pred_dir, &spec.gt_dir)?;
    let samples = pool(spec.workers)?.install(|| {
        pairs
            .par_iter()
            .map(|p| evaluate_sample(p, &cfg))
            .collect::<Result<Vec<_>>>()
    })?;
    let summaries = aggregate(&samples)?;
    let stats = match &spec.img_dir {
        Some(dir) => Some(dataset_stats(dir, &spec.gt_dir, spec.connectivity)?),
        None => None,
    };
    Ok(DatasetReport {
        spec: spec.clone(),
        summaries,
        samples,
        stats,
    })
}

/// Attribute statistics over intensity images paired by stem with GT masks.
pub fn dataset_stats(img_dir: &Path, gt_dir: &Path, connectivity: Connectivity) -> Result<AttributeStats> {
    let images = files_by_stem(img_dir)?;
    let gts = files_by_stem(gt_dir)?;
    if gts.is_empty() {
        return Err(EvalError::NoPairs);
    }
    let missing: Vec<String> = gts.keys().filter(|k| !images.contains_key(*k)).cloned().collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingImages(missing));
    }
    let per_image = gts
        .iter()
        .map(|(stem, gt_path)| {
            let img = io::read_gray(&images[stem])?;
            let gt = io::read_mask(gt_path)?;
            image_attributes(&img, &gt, connectivity).map_err(|source| EvalError::Sample {
                id: stem.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate_attributes(&per_image)?)
}
