//! Perturbation runs over a GT directory and their trial manifests.
//!
//! `perturb_dataset` writes one PNG per GT mask plus `manifest.json`, which
//! records the generator, every seed, and the expected GT-to-prediction
//! correspondences. `load_trials` turns a manifest back into match trials.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use hiou_core::rng::{derive_seed, GENERATOR_NAME};
use hiou_core::synth::{copy_paste, perturb, ExpectedPair, MatchTrial, PerturbKind, PerturbSpec};
use hiou_core::Connectivity;

use crate::dataset::files_by_stem;
use crate::error::{EvalError, Result};
use crate::io;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Label stamped on deform manifests.
pub const DEFORM_NOTE: &str = "deformation stand-in: seeded per-axis shift plus boundary pixel toggling";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbRun {
    pub kind: PerturbKind,
    pub seed: u64,
    pub magnitude: f64,
    pub count: usize,
    pub connectivity: Connectivity,
}

/// Perturbs every GT mask (sorted by stem) with per-file derived seeds.
///
/// Masks the perturbation cannot apply to (no targets, or fewer than two for
/// connect) are listed under `skipped`.
pub fn perturb_dataset(gt_dir: &Path, out_dir: &Path, run: &PerturbRun) -> Result<Value> {
    if !run.magnitude.is_finite() || run.magnitude < 0.0 {
        return Err(EvalError::Config("magnitude must be a finite nonnegative number".into()));
    }
    let gts = files_by_stem(gt_dir)?;
    if gts.is_empty() {
        return Err(EvalError::NoPairs);
    }
    fs::create_dir_all(out_dir).map_err(EvalError::io(out_dir))?;
    let mut trials = Vec::new();
    let mut skipped = Vec::new();
    for (index, (stem, gt_path)) in gts.iter().enumerate() {
        let gt = io::read_mask(gt_path)?;
        let spec = PerturbSpec {
            kind: run.kind,
            seed: derive_seed(run.seed, index as u64),
            magnitude: run.magnitude,
            count: run.count,
            connectivity: run.connectivity,
        };
        let file = format!("{stem}.png");
        let outcome = if run.kind == PerturbKind::CopyPaste {
            copy_paste(&gt, &spec).map(|m| (m, None))
        } else {
            perturb(&gt, &spec).map(|t| (t.perturbed_pred, Some(t.expected_pairs)))
        };
        match outcome {
            Ok((mask, expected)) => {
                io::write_mask_png(&out_dir.join(&file), &mask)?;
                let mut trial = json!({
                    "id": stem,
                    "gt": gt_path.display().to_string(),
                    "output": file,
                    "seed": spec.seed,
                });
                if let Some(expected) = expected {
                    trial["expected"] = expected
                        .iter()
                        .map(|e| json!({ "gt": e.gt_id, "pred": e.pred_ids }))
                        .collect();
                }
                trials.push(trial);
            }
            Err(e @ hiou_core::Error::NotEnoughTargets { .. }) => {
                skipped.push(json!({ "id": stem, "reason": e.to_string() }));
            }
            Err(source) => {
                return Err(EvalError::Sample {
                    id: stem.clone(),
                    source,
                })
            }
        }
    }
    let mut manifest = json!({
        "version": hiou_core::VERSION,
        "generator": GENERATOR_NAME,
        "kind": run.kind.name(),
        "seed": run.seed,
        "magnitude": run.magnitude,
        "count": run.count,
        "connectivity": run.connectivity.neighbors(),
        "trials": trials,
        "skipped": skipped,
    });
    if run.kind == PerturbKind::Deform {
        manifest["note"] = json!(DEFORM_NOTE);
    }
    let path = out_dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("json values serialize");
    text.push('\n');
    fs::write(&path, text).map_err(EvalError::io(&path))?;
    Ok(manifest)
}

fn malformed(reason: impl Into<String>) -> EvalError {
    EvalError::Malformed {
        what: "manifest",
        reason: reason.into(),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| malformed(format!("missing field {key:?}")))
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Reads a manifest and its masks back into match trials.
///
/// Relative prediction paths resolve against the manifest directory; GT paths
/// are used as recorded.
pub fn load_trials(manifest_path: &Path) -> Result<Vec<MatchTrial>> {
    let text = fs::read_to_string(manifest_path).map_err(EvalError::io(manifest_path))?;
    let manifest: Value = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let kind = field(&manifest, "kind")?
        .as_str()
        .and_then(PerturbKind::from_name)
        .ok_or_else(|| malformed("unknown kind"))?;
    let magnitude = field(&manifest, "magnitude")?.as_f64().ok_or_else(|| malformed("bad magnitude"))?;
    let count = field(&manifest, "count")?.as_u64().ok_or_else(|| malformed("bad count"))? as usize;
    let connectivity = field(&manifest, "connectivity")?
        .as_u64()
        .and_then(|n| Connectivity::from_neighbors(n as u32))
        .ok_or_else(|| malformed("bad connectivity"))?;
    let rows = field(&manifest, "trials")?.as_array().ok_or_else(|| malformed("trials is not an array"))?;

    let mut trials = Vec::with_capacity(rows.len());
    for row in rows {
        let Some(expected) = row.get("expected").and_then(Value::as_array) else {
            continue;
        };
        let seed = field(row, "seed")?.as_u64().ok_or_else(|| malformed("bad seed"))?;
        let gt_path = field(row, "gt")?.as_str().ok_or_else(|| malformed("bad gt path"))?;
        let out = field(row, "output")?.as_str().ok_or_else(|| malformed("bad output path"))?;
        let expected_pairs = expected
            .iter()
            .map(|e| {
                let gt_id = field(e, "gt")?.as_u64().ok_or_else(|| malformed("bad gt id"))? as usize;
                let pred_ids = field(e, "pred")?
                    .as_array()
                    .ok_or_else(|| malformed("bad pred ids"))?
                    .iter()
                    .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| malformed("bad pred id")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ExpectedPair { gt_id, pred_ids })
            })
            .collect::<Result<Vec<_>>>()?;
        trials.push(MatchTrial {
            spec: PerturbSpec {
                kind,
                seed,
                magnitude,
                count,
                connectivity,
            },
            gt_mask: io::read_mask(Path::new(gt_path))?,
            perturbed_pred: io::read_mask(&resolve(base, out))?,
            expected_pairs,
        });
    }
    if trials.is_empty() {
        return Err(malformed("no match trials (copy_paste manifests carry none)"));
    }
    Ok(trials)
}
