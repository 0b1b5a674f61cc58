//! Report serialization.
//!
//! The json report has sorted keys and a fixed float formatting, so equal
//! inputs give equal bytes. Headline values are rounded to 6 significant
//! digits; the `raw` block repeats them at full precision. Each sample row
//! keeps the integer counts every aggregate is folded from, so
//! [`recompute_from_json`] reproduces the `raw` block exactly.

use serde_json::{json, Map, Value};

use hiou_core::decompose::{LocCounts, LocErrors, PairSegError, SegErrors};
use hiou_core::matching::{MatchedPair, Phase};
use hiou_core::metrics::{MetricReport, PixelConfusion, TargetTallies};
use hiou_core::pipeline::{aggregate, MatcherEvaluation, MatcherSummary};
use hiou_core::stats::AttributeStats;
use hiou_core::{SampleEvaluation, Strategy};

use crate::dataset::DatasetReport;
use crate::error::{EvalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl Format {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            "markdown" | "md" => Some(Format::Markdown),
            _ => None,
        }
    }
}

/// Rounds to 6 significant digits.
pub fn round6(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.5e}").parse().expect("formatted float parses")
}

fn metrics_json(m: &MetricReport, round: fn(f64) -> f64) -> Value {
    json!({
        "iou_pix": round(m.iou_pix),
        "niou_pix": round(m.niou_pix),
        "pre_pix": round(m.pre_pix),
        "rec_pix": round(m.rec_pix),
        "f1_pix": round(m.f1_pix),
        "pd": round(m.pd),
        "fa": round(m.fa),
        "fa_e6": round(m.fa_scaled),
        "f1_tgt": round(m.f1_tgt),
        "iou_loc": round(m.iou_loc),
        "iou_seg": round(m.iou_seg),
        "hiou": round(m.hiou),
        "aiou": round(m.aiou),
    })
}

fn errors_json(loc: &LocErrors, seg: &SegErrors, round: fn(f64) -> f64) -> Value {
    json!({
        "loc": {
            "s2m": round(loc.e_s2m),
            "m2s": round(loc.e_m2s),
            "itf": round(loc.e_itf),
            "pcp": round(loc.e_pcp),
        },
        "seg": {
            "mrg": round(seg.e_mrg),
            "itf": round(seg.e_itf),
            "pcp": round(seg.e_pcp),
        },
    })
}

fn stats_json(s: &AttributeStats, round: fn(f64) -> f64) -> Value {
    json!({
        "brightness_mean": round(s.brightness_mean),
        "brightness_std": round(s.brightness_std),
        "rms_contrast": round(s.rms_contrast),
        "laplacian_noise": round(s.laplacian_noise),
        "avg_target_count": round(s.avg_target_count),
        "avg_target_size": round(s.avg_target_size),
        "target_background_contrast": round(s.target_background_contrast),
        "fg_bg_area_ratio": round(s.fg_bg_area_ratio),
    })
}

fn summaries_json(summaries: &[MatcherSummary], round: fn(f64) -> f64) -> (Value, Value) {
    let mut metrics = Map::new();
    let mut errors = Map::new();
    for s in summaries {
        metrics.insert(s.strategy.name().into(), metrics_json(&s.metrics, round));
        errors.insert(s.strategy.name().into(), errors_json(&s.loc, &s.seg, round));
    }
    (Value::Object(metrics), Value::Object(errors))
}

fn sample_json(s: &SampleEvaluation) -> Value {
    let mut matchers = Map::new();
    for m in &s.matchers {
        let pairs: Vec<Value> = m
            .pairs
            .iter()
            .zip(&m.seg.per_pair)
            .map(|(p, e)| {
                json!({
                    "gt": p.gt_id,
                    "pred": p.pred_id,
                    "intersection": p.intersection,
                    "union": p.union,
                    "distance": p.distance,
                    "phase": p.phase.name(),
                    "mrg": e.mrg_px,
                    "itf": e.itf_px,
                    "pcp": e.pcp_px,
                })
            })
            .collect();
        matchers.insert(
            m.strategy.name().into(),
            json!({
                "tp_tgt": m.tallies.tp_tgt,
                "fp_tgt": m.tallies.fp_tgt,
                "fn_tgt": m.tallies.fn_tgt,
                "fp_area": m.tallies.fp_area,
                "loc": {
                    "s2m": m.loc.counts.s2m,
                    "m2s": m.loc.counts.m2s,
                    "itf": m.loc.counts.itf,
                    "pcp": m.loc.counts.pcp,
                },
                "pairs": pairs,
            }),
        );
    }
    json!({
        "id": s.id,
        "height": s.shape.0,
        "width": s.shape.1,
        "confusion": {
            "tp": s.confusion.tp,
            "fp": s.confusion.fp,
            "tn": s.confusion.tn,
            "fn": s.confusion.fn_,
        },
        "matchers": matchers,
    })
}

pub fn config_json(report: &DatasetReport) -> Value {
    let spec = &report.spec;
    json!({
        "name": spec.name,
        "pred_dir": spec.pred_dir.display().to_string(),
        "gt_dir": spec.gt_dir.display().to_string(),
        "img_dir": spec.img_dir.as_ref().map(|d| d.display().to_string()),
        "threshold": spec.threshold,
        "connectivity": spec.connectivity.neighbors(),
        "matchers": spec.matchers.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "resize": spec.resize.name(),
        "version": hiou_core::VERSION,
    })
}

pub fn to_json_value(report: &DatasetReport) -> Value {
    let (metrics, errors) = summaries_json(&report.summaries, round6);
    let (raw_metrics, raw_errors) = summaries_json(&report.summaries, |v| v);
    let mut raw = Map::new();
    raw.insert("metrics".into(), raw_metrics);
    raw.insert("errors".into(), raw_errors);
    let mut top = Map::new();
    top.insert("version".into(), json!(hiou_core::VERSION));
    top.insert("config".into(), config_json(report));
    top.insert("metrics".into(), metrics);
    top.insert("errors".into(), errors);
    top.insert("samples".into(), report.samples.iter().map(sample_json).collect());
    if let Some(stats) = &report.stats {
        top.insert("stats".into(), stats_json(stats, round6));
        raw.insert("stats".into(), stats_json(stats, |v| v));
    }
    top.insert("raw".into(), Value::Object(raw));
    Value::Object(top)
}

pub fn to_json(report: &DatasetReport) -> String {
    let mut s = serde_json::to_string_pretty(&to_json_value(report)).expect("json values serialize");
    s.push('\n');
    s
}

fn malformed(reason: impl Into<String>) -> EvalError {
    EvalError::Malformed {
        what: "report",
        reason: reason.into(),
    }
}

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| malformed(format!("missing field {key:?}")))
}

fn get_u64(v: &Value, key: &str) -> Result<u64> {
    get(v, key)?
        .as_u64()
        .ok_or_else(|| malformed(format!("field {key:?} is not an unsigned integer")))
}

fn get_f64(v: &Value, key: &str) -> Result<f64> {
    get(v, key)?
        .as_f64()
        .ok_or_else(|| malformed(format!("field {key:?} is not a number")))
}

fn get_str<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    get(v, key)?
        .as_str()
        .ok_or_else(|| malformed(format!("field {key:?} is not a string")))
}

fn phase_from_name(name: &str) -> Result<Phase> {
    [Phase::Overlap, Phase::Compensation, Phase::Distance]
        .into_iter()
        .find(|p| p.name() == name)
        .ok_or_else(|| malformed(format!("unknown phase {name:?}")))
}

fn matcher_from_json(strategy: Strategy, m: &Value, image_area: u64) -> Result<MatcherEvaluation> {
    let rows = get(m, "pairs")?
        .as_array()
        .ok_or_else(|| malformed("pairs is not an array"))?;
    let mut pairs = Vec::with_capacity(rows.len());
    let mut per_pair = Vec::with_capacity(rows.len());
    for row in rows {
        let (gt_id, pred_id) = (get_u64(row, "gt")? as usize, get_u64(row, "pred")? as usize);
        let (intersection, union) = (get_u64(row, "intersection")?, get_u64(row, "union")?);
        if union == 0 {
            return Err(malformed("pair with empty union"));
        }
        pairs.push(MatchedPair {
            gt_id,
            pred_id,
            intersection: intersection as usize,
            union: union as usize,
            iou: intersection as f64 / union as f64,
            distance: get_f64(row, "distance")?,
            phase: phase_from_name(get_str(row, "phase")?)?,
        });
        per_pair.push(PairSegError::from_counts(
            gt_id,
            pred_id,
            union,
            get_u64(row, "mrg")?,
            get_u64(row, "itf")?,
            get_u64(row, "pcp")?,
        ));
    }
    let tallies = TargetTallies {
        tp_tgt: get_u64(m, "tp_tgt")?,
        fp_tgt: get_u64(m, "fp_tgt")?,
        fn_tgt: get_u64(m, "fn_tgt")?,
        fp_area: get_u64(m, "fp_area")?,
        image_area,
        pair_ious: pairs.iter().map(|p| p.intersection as f64 / p.union as f64).collect(),
    };
    if tallies.tp_tgt != pairs.len() as u64 {
        return Err(malformed("tp_tgt disagrees with the pair list"));
    }
    let loc_row = get(m, "loc")?;
    let counts = LocCounts {
        s2m: get_u64(loc_row, "s2m")?,
        m2s: get_u64(loc_row, "m2s")?,
        itf: get_u64(loc_row, "itf")?,
        pcp: get_u64(loc_row, "pcp")?,
    };
    Ok(MatcherEvaluation {
        strategy,
        loc: LocErrors::from_counts(counts, tallies.target_count()),
        seg: SegErrors::from_pairs(per_pair, tallies.fn_tgt, tallies.fp_tgt),
        pairs,
        tallies,
    })
}

/// Rebuilds per-sample evaluations from a parsed json report.
pub fn samples_from_json(report: &Value) -> Result<Vec<SampleEvaluation>> {
    let strategies = get(get(report, "config")?, "matchers")?
        .as_array()
        .ok_or_else(|| malformed("config.matchers is not an array"))?
        .iter()
        .map(|v| {
            v.as_str()
                .and_then(Strategy::from_name)
                .ok_or_else(|| malformed(format!("unknown matcher {v}")))
        })
        .collect::<Result<Vec<_>>>()?;
    get(report, "samples")?
        .as_array()
        .ok_or_else(|| malformed("samples is not an array"))?
        .iter()
        .map(|row| {
            let (h, w) = (get_u64(row, "height")?, get_u64(row, "width")?);
            let c = get(row, "confusion")?;
            let matchers = get(row, "matchers")?;
            Ok(SampleEvaluation {
                id: get_str(row, "id")?.to_owned(),
                shape: (h as usize, w as usize),
                confusion: PixelConfusion {
                    tp: get_u64(c, "tp")?,
                    fp: get_u64(c, "fp")?,
                    tn: get_u64(c, "tn")?,
                    fn_: get_u64(c, "fn")?,
                },
                matchers: strategies
                    .iter()
                    .map(|&s| matcher_from_json(s, get(matchers, s.name())?, h * w))
                    .collect::<Result<Vec<_>>>()?,
            })
        })
        .collect()
}

/// Re-aggregates the sample table and renders it like the `raw` block.
pub fn recompute_from_json(report: &Value) -> Result<Value> {
    let samples = samples_from_json(report)?;
    let summaries = aggregate(&samples)?;
    let (metrics, errors) = summaries_json(&summaries, |v| v);
    Ok(json!({ "metrics": metrics, "errors": errors }))
}

fn csv_error(e: csv::Error) -> EvalError {
    EvalError::Malformed {
        what: "csv output",
        reason: e.to_string(),
    }
}

/// One row per sample plus an `AGGREGATE` row.
pub fn to_csv(report: &DatasetReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["id", "height", "width", "tp", "fp", "tn", "fn", "iou_pix"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let per_matcher = ["tp_tgt", "fp_tgt", "fn_tgt", "fp_area", "pd", "fa_e6", "f1_tgt", "iou_loc", "iou_seg", "hiou"];
    for s in &report.summaries {
        for col in per_matcher {
            header.push(format!("{}_{col}", s.strategy.name()));
        }
    }
    w.write_record(&header).map_err(csv_error)?;

    let row = |id: &str, shape: String, width: String, conf: &PixelConfusion, metrics: &[MatcherSummary], tallies: &[TargetTallies]| {
        let mut r = vec![
            id.to_owned(),
            shape,
            width,
            conf.tp.to_string(),
            conf.fp.to_string(),
            conf.tn.to_string(),
            conf.fn_.to_string(),
            round6(metrics[0].metrics.iou_pix).to_string(),
        ];
        for (m, t) in metrics.iter().zip(tallies) {
            r.extend([
                t.tp_tgt.to_string(),
                t.fp_tgt.to_string(),
                t.fn_tgt.to_string(),
                t.fp_area.to_string(),
            ]);
            r.extend(
                [m.metrics.pd, m.metrics.fa_scaled, m.metrics.f1_tgt, m.metrics.iou_loc, m.metrics.iou_seg, m.metrics.hiou]
                    .map(|v| round6(v).to_string()),
            );
        }
        r
    };

    let mut total = PixelConfusion::default();
    let mut totals: Vec<TargetTallies> = vec![TargetTallies::default(); report.summaries.len()];
    for s in &report.samples {
        let summary = aggregate(std::slice::from_ref(s))?;
        let tallies: Vec<TargetTallies> = s.matchers.iter().map(|m| m.tallies.clone()).collect();
        w.write_record(row(&s.id, s.shape.0.to_string(), s.shape.1.to_string(), &s.confusion, &summary, &tallies))
            .map_err(csv_error)?;
        total = total + s.confusion;
        for (acc, t) in totals.iter_mut().zip(&tallies) {
            acc.tp_tgt += t.tp_tgt;
            acc.fp_tgt += t.fp_tgt;
            acc.fn_tgt += t.fn_tgt;
            acc.fp_area += t.fp_area;
        }
    }
    w.write_record(row("AGGREGATE", String::new(), String::new(), &total, &report.summaries, &totals))
        .map_err(csv_error)?;
    let bytes = w.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn cell(v: f64) -> String {
    format!("{}", round6(v))
}

/// Metric and error tables; the distance-only matcher is the legacy row, OPDC the `+OPDC` row.
pub fn to_markdown(report: &DatasetReport) -> String {
    let label = |s: Strategy| match s {
        Strategy::Opdc => format!("{} +OPDC", report.spec.name),
        Strategy::DistanceOnly => report.spec.name.clone(),
    };
    let mut order: Vec<&MatcherSummary> = report.summaries.iter().collect();
    order.sort_by_key(|s| s.strategy != Strategy::DistanceOnly);

    let mut out = String::new();
    out.push_str("| Method | IoU_pix | nIoU_pix | F1_pix | Pd | Fa (1e-6) | F1_tgt | IoU_loc | IoU_seg | hIoU |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for s in &order {
        let m = &s.metrics;
        let cells = [m.iou_pix, m.niou_pix, m.f1_pix, m.pd, m.fa_scaled, m.f1_tgt, m.iou_loc, m.iou_seg, m.hiou].map(cell);
        out.push_str(&format!("| {} | {} |\n", label(s.strategy), cells.join(" | ")));
    }
    out.push('\n');
    out.push_str("| Method | loc S2M | loc M2S | loc ITF | loc PCP | seg MRG | seg ITF | seg PCP |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for s in &order {
        let cells = [s.loc.e_s2m, s.loc.e_m2s, s.loc.e_itf, s.loc.e_pcp, s.seg.e_mrg, s.seg.e_itf, s.seg.e_pcp].map(cell);
        out.push_str(&format!("| {} | {} |\n", label(s.strategy), cells.join(" | ")));
    }
    out
}

pub fn emit_report(report: &DatasetReport, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Json => to_json(report).into_bytes(),
        Format::Csv => to_csv(report)?.into_bytes(),
        Format::Markdown => to_markdown(report).into_bytes(),
    })
}
