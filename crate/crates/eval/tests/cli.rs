use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hiou_core::{BinaryMask, GrayImage};
use hiou_eval::io::{write_gray_png, write_mask_png};
use serde_json::Value;

fn eval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eval")).args(args).output().unwrap()
}

fn block(h: usize, w: usize, rects: &[(usize, usize, usize, usize)]) -> BinaryMask {
    let px = rects
        .iter()
        .flat_map(|&(r0, c0, rh, cw)| (r0..r0 + rh).flat_map(move |r| (c0..c0 + cw).map(move |c| (r, c))));
    BinaryMask::from_pixels(h, w, px).unwrap()
}

fn dataset(root: &Path, samples: &[(&str, BinaryMask, BinaryMask)]) -> (String, String) {
    let (pred, gt) = (root.join("pred"), root.join("gt"));
    fs::create_dir_all(&pred).unwrap();
    fs::create_dir_all(&gt).unwrap();
    for (name, g, p) in samples {
        write_mask_png(&gt.join(format!("{name}.png")), g).unwrap();
        write_mask_png(&pred.join(format!("{name}.png")), p).unwrap();
    }
    (pred.display().to_string(), gt.display().to_string())
}

fn json_out(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn perfect_sample_report() {
    let tmp = tempfile::tempdir().unwrap();
    let g = block(16, 16, &[(2, 2, 3, 3), (9, 9, 2, 4)]);
    let (pred, gt) = dataset(tmp.path(), &[("a", g.clone(), g)]);
    let report = json_out(&eval(&["run", "--pred-dir", &pred, "--gt-dir", &gt]));
    for matcher in ["opdc", "distance"] {
        let m = &report["metrics"][matcher];
        for key in ["iou_pix", "niou_pix", "pre_pix", "rec_pix", "f1_pix", "pd", "f1_tgt", "iou_loc", "iou_seg", "hiou", "aiou"] {
            assert_eq!(m[key], 1.0, "{matcher}.{key}");
        }
        assert_eq!(m["fa"], 0.0);
        assert_eq!(m["fa_e6"], 0.0);
        let e = &report["errors"][matcher];
        for (group, keys) in [("loc", &["s2m", "m2s", "itf", "pcp"][..]), ("seg", &["mrg", "itf", "pcp"][..])] {
            for key in keys {
                assert_eq!(e[group][key], 0.0);
            }
        }
    }
    assert_eq!(report["version"], hiou_core::VERSION);
    assert_eq!(report["samples"].as_array().unwrap().len(), 1);
    assert!(report.get("stats").is_none());
}

#[test]
fn csv_and_markdown() {
    let tmp = tempfile::tempdir().unwrap();
    let g = block(12, 12, &[(1, 1, 3, 3)]);
    let p = block(12, 12, &[(1, 2, 3, 3), (8, 8, 2, 2)]);
    let (pred, gt) = dataset(tmp.path(), &[("a", g.clone(), p), ("b", g.clone(), g.clone()), ("c", g, BinaryMask::empty(12, 12).unwrap())]);
    let csv = eval(&["run", "--pred-dir", &pred, "--gt-dir", &gt, "--format", "csv"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 3 + 1);
    assert_eq!(&records[3][0], "AGGREGATE");
    assert_eq!(&records[3][3], "15");
    assert_eq!(&rows.headers().unwrap()[8], "opdc_tp_tgt");

    let md = eval(&["run", "--pred-dir", &pred, "--gt-dir", &gt, "--format", "markdown", "--name", "Net"]);
    let text = String::from_utf8(md.stdout).unwrap();
    assert!(text.contains("| Net |"));
    assert!(text.contains("| Net +OPDC |"));
}

#[test]
fn duplicated_dataset_keeps_values() {
    let tmp = tempfile::tempdir().unwrap();
    let g1 = block(16, 16, &[(1, 1, 4, 4), (9, 9, 3, 3)]);
    let p1 = block(16, 16, &[(2, 2, 4, 4), (12, 1, 2, 2)]);
    let g2 = block(10, 10, &[(0, 0, 2, 5)]);
    let p2 = block(10, 10, &[(0, 1, 2, 3)]);
    let (pa, ga) = dataset(&tmp.path().join("once"), &[("a", g1.clone(), p1.clone()), ("b", g2.clone(), p2.clone())]);
    let (pb, gb) = dataset(
        &tmp.path().join("twice"),
        &[("a", g1.clone(), p1.clone()), ("b", g2.clone(), p2.clone()), ("c", g1, p1), ("d", g2, p2)],
    );
    let once = json_out(&eval(&["run", "--pred-dir", &pa, "--gt-dir", &ga]));
    let twice = json_out(&eval(&["run", "--pred-dir", &pb, "--gt-dir", &gb]));
    assert_eq!(once["metrics"], twice["metrics"]);
    assert_eq!(once["errors"], twice["errors"]);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let g = block(8, 8, &[(1, 1, 2, 2)]);
    let (pred, gt) = dataset(tmp.path(), &[("a", g.clone(), g.clone())]);

    assert_eq!(eval(&["--help"]).status.code(), Some(0));
    assert_eq!(eval(&["--version"]).status.code(), Some(0));
    assert_eq!(eval(&["run", "--bogus"]).status.code(), Some(1));
    assert_eq!(eval(&["run", "--pred-dir", &pred, "--gt-dir", &gt, "--threshold", "2"]).status.code(), Some(1));
    assert_eq!(eval(&["run", "--pred-dir", &pred, "--gt-dir", &gt, "--matcher", "iou"]).status.code(), Some(1));
    assert_eq!(eval(&["run", "--pred-dir", &pred, "--gt-dir", &gt, "--connectivity", "6"]).status.code(), Some(1));

    write_mask_png(&tmp.path().join("gt").join("orphan.png"), &g).unwrap();
    let out = eval(&["run", "--pred-dir", &pred, "--gt-dir", &gt]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("orphan"));
    fs::remove_file(tmp.path().join("gt").join("orphan.png")).unwrap();

    write_mask_png(&tmp.path().join("pred").join("a.png"), &block(4, 4, &[(0, 0, 1, 1)])).unwrap();
    assert_eq!(eval(&["run", "--pred-dir", &pred, "--gt-dir", &gt]).status.code(), Some(2));
    let resized = json_out(&eval(&["run", "--pred-dir", &pred, "--gt-dir", &gt, "--resize", "nearest"]));
    assert_eq!(resized["config"]["resize"], "nearest");

    let empty = tmp.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    let e = empty.display().to_string();
    assert_eq!(eval(&["run", "--pred-dir", &e, "--gt-dir", &e]).status.code(), Some(2));
}

#[test]
fn perturb_then_matchrate() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    fs::create_dir_all(&gt).unwrap();
    write_mask_png(&gt.join("a.png"), &block(32, 32, &[(2, 2, 6, 6), (20, 20, 5, 7)])).unwrap();
    write_mask_png(&gt.join("b.png"), &block(32, 32, &[(10, 10, 8, 8)])).unwrap();
    let gt_s = gt.display().to_string();

    let out = tmp.path().join("occ");
    let o = out.display().to_string();
    let summary = json_out(&eval(&["perturb", "--gt-dir", &gt_s, "--kind", "occlude", "--seed", "5", "--magnitude", "0.5", "--out", &o]));
    assert_eq!(summary["trials"], 2);
    let manifest = out.join("manifest.json");
    let first = fs::read(&manifest).unwrap();
    json_out(&eval(&["perturb", "--gt-dir", &gt_s, "--kind", "occlude", "--seed", "5", "--magnitude", "0.5", "--out", &o]));
    assert_eq!(fs::read(&manifest).unwrap(), first);
    let m: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(m["generator"], "splitmix64");

    let rate = json_out(&eval(&["matchrate", "--manifest", &manifest.display().to_string(), "--matcher", "opdc,distance"]));
    assert_eq!(rate["trials"], 2);
    assert_eq!(rate["success_rate"]["opdc"], 1.0);

    let conn = tmp.path().join("conn");
    let c = conn.display().to_string();
    let summary = json_out(&eval(&["perturb", "--gt-dir", &gt_s, "--kind", "connect", "--seed", "1", "--out", &c]));
    assert_eq!((summary["trials"].as_u64(), summary["skipped"].as_u64()), (Some(1), Some(1)));

    let def = tmp.path().join("def");
    let d = def.display().to_string();
    json_out(&eval(&["perturb", "--gt-dir", &gt_s, "--kind", "deform", "--seed", "1", "--magnitude", "2", "--out", &d]));
    let m: Value = serde_json::from_slice(&fs::read(def.join("manifest.json")).unwrap()).unwrap();
    assert!(m["note"].as_str().unwrap().contains("stand-in"));

    assert_eq!(eval(&["perturb", "--gt-dir", &gt_s, "--kind", "blur", "--seed", "1", "--out", &d]).status.code(), Some(1));
}

#[test]
fn stats_command() {
    let tmp = tempfile::tempdir().unwrap();
    let (img, gt) = (tmp.path().join("img"), tmp.path().join("gt"));
    fs::create_dir_all(&img).unwrap();
    fs::create_dir_all(&gt).unwrap();
    let mut data = vec![0u8; 100 * 100];
    for c in 40..50 {
        data[50 * 100 + c] = 255;
    }
    write_gray_png(&img.join("a.png"), &GrayImage::new(100, 100, data).unwrap()).unwrap();
    write_mask_png(&gt.join("a.png"), &block(100, 100, &[(50, 40, 1, 10)])).unwrap();
    let (i, g) = (img.display().to_string(), gt.display().to_string());
    let stats = json_out(&eval(&["stats", "--img-dir", &i, "--gt-dir", &g]));
    assert_eq!(stats["avg_target_count"], 1.0);
    assert_eq!(stats["avg_target_size"], 10.0);

    let pred = gt.display().to_string();
    let report = json_out(&eval(&["run", "--pred-dir", &pred, "--gt-dir", &g, "--img-dir", &i]));
    assert_eq!(report["stats"]["avg_target_size"], 10.0);
    assert_eq!(report["raw"]["stats"]["fg_bg_area_ratio"], 10.0 / 9990.0);

    write_mask_png(&gt.join("b.png"), &block(100, 100, &[(0, 0, 1, 1)])).unwrap();
    assert_eq!(eval(&["stats", "--img-dir", &i, "--gt-dir", &g]).status.code(), Some(2));
}
