mod common;

use std::fs;
use std::path::Path;

use gsdkit::cli::run_with;
use gsdkit::container::{read_tensor, write_tensor};
use gsdkit::raster::save_label_map;
use gsdkit::{LabelMap, Tensor};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gsdkit").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("not JSON ({e}): {s}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn square_instances(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("inst.png");
    let mut ids = vec![0u32; 64];
    for y in 2..6 {
        for x in 2..6 {
            ids[y * 8 + x] = 1;
        }
    }
    save_label_map(&path, &LabelMap::new(8, 8, ids, None).unwrap()).unwrap();
    path
}

#[test]
fn gsd_compute_writes_container_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let inst = square_instances(dir.path());
    let out = dir.path().join("d.gsdt");
    let (code, stdout, stderr) = run(&["gsd", "compute", "--instances", p(&inst), "--out", p(&out), "--threads", "1"]);
    assert_eq!(code, 0, "{stderr}");
    let report = json(&stdout);
    let order: Vec<usize> = ["tool", "version", "command", "config", "values", "warnings", "timings_ms"]
        .iter()
        .map(|k| stdout.find(&format!("\n  \"{k}\"")).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]), "{stdout}");
    assert_eq!(report["values"]["shape"], serde_json::json!([1, 72, 8, 8]));
    assert_eq!(read_tensor(&out).unwrap().shape(), &[1, 72, 8, 8]);
}

#[test]
fn gsd_compute_rejects_bad_config_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let inst = square_instances(dir.path());
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n_rho": 0}"#).unwrap();
    let out = dir.path().join("d.gsdt");
    let (code, _, stderr) = run(&["gsd", "compute", "--instances", p(&inst), "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code, 2);
    assert!(stderr.contains("error"));
}

#[test]
fn missing_input_is_io_error() {
    let (code, _, _) = run(&["contour", "--instances", "/nonexistent/x.png"]);
    assert_eq!(code, 1);
}

#[test]
fn report_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = square_instances(dir.path());
    let report = dir.path().join("r.json");
    let (code, stdout, _) = run(&["contour", "--instances", p(&inst), "--report", p(&report)]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v = json(&fs::read_to_string(&report).unwrap());
    let pts = v["values"]["contours"][0][0]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 12);
    assert_eq!(pts[0], serde_json::json!([2, 2]));
}

#[test]
fn embed_writes_one_container_per_scale() {
    let dir = tempfile::tempdir().unwrap();
    let inst = square_instances(dir.path());
    let labels = dir.path().join("labels.png");
    save_label_map(&labels, &LabelMap::new(8, 8, vec![0; 32].into_iter().chain(vec![2; 32]).collect(), None).unwrap()).unwrap();
    let gsd = dir.path().join("d.gsdt");
    assert_eq!(run(&["gsd", "compute", "--instances", p(&inst), "--out", p(&gsd)]).0, 0);
    let prefix = dir.path().join("emb");
    let (code, _, stderr) = run(&[
        "embed", "--labels", p(&labels), "--gsd", p(&gsd), "--scales", "8,4,2", "--out-prefix", p(&prefix), "--num-classes", "3",
    ]);
    assert_eq!(code, 0, "{stderr}");
    for s in [8, 4, 2] {
        let t = read_tensor(&dir.path().join(format!("emb_{s}x{s}.gsdt"))).unwrap();
        assert_eq!(t.shape(), &[1, 75, s, s]);
    }
}

#[test]
fn fid_of_identical_sets_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = common::rng(3);
    let values: Vec<f64> = (0..60).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
    let f = dir.path().join("f.gsdt");
    write_tensor(&f, &Tensor::from_f64(vec![20, 3], values).unwrap()).unwrap();
    let (code, stdout, _) = run(&["fid", "--real", p(&f), "--fake", p(&f)]);
    assert_eq!(code, 0);
    assert!(json(&stdout)["values"]["fid"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn seg_metrics_pairs_files_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let (pd, td) = (dir.path().join("pred"), dir.path().join("truth"));
    fs::create_dir_all(&pd).unwrap();
    fs::create_dir_all(&td).unwrap();
    let mut rng = common::rng(5);
    let mut pairs = Vec::new();
    for name in ["a.png", "b.png"] {
        let pr = common::random_labels(&mut rng, 6, 6, 3);
        let tr = common::random_labels(&mut rng, 6, 6, 3);
        save_label_map(&pd.join(name), &pr).unwrap();
        save_label_map(&td.join(name), &tr).unwrap();
        pairs.push((pr, tr));
    }
    let (code, stdout, stderr) = run(&["seg-metrics", "--pred", p(&pd), "--truth", p(&td), "--num-classes", "3"]);
    assert_eq!(code, 0, "{stderr}");
    let v = json(&stdout);
    let (miou, acc, fw) = common::brute_seg(&pairs, 3, None);
    assert_eq!(v["values"]["miou"].as_f64().unwrap(), miou);
    assert_eq!(v["values"]["accuracy"].as_f64().unwrap(), acc);
    assert_eq!(v["values"]["fwiou"].as_f64().unwrap(), fw);
}

#[test]
fn diversity_reads_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let labels: Vec<u32> = (0..16).map(|i| u32::from(i % 4 >= 2)).collect();
    let d: Vec<f32> = labels.iter().map(|&l| if l == 0 { 0.2 } else { 0.4 }).collect();
    save_label_map(&dir.path().join("l.png"), &LabelMap::new(4, 4, labels, None).unwrap()).unwrap();
    write_tensor(&dir.path().join("d.gsdt"), &Tensor::from_f32(vec![4, 4], d).unwrap()).unwrap();
    let manifest = dir.path().join("pairs.json");
    fs::write(&manifest, r#"{"pairs": [{"distance": "d.gsdt", "labels": "l.png"}]}"#).unwrap();
    let (code, stdout, stderr) = run(&["diversity", "--pairs", p(&manifest)]);
    assert_eq!(code, 0, "{stderr}");
    let v = json(&stdout);
    assert!((v["values"]["mcsd"].as_f64().unwrap() - 0.3).abs() < 1e-7);
    assert!((v["values"]["mocd"].as_f64().unwrap() - 0.3).abs() < 1e-7);
}

#[test]
fn loss_prints_a_bare_number() {
    let dir = tempfile::tempdir().unwrap();
    let real = dir.path().join("r.gsdt");
    let fake = dir.path().join("f.gsdt");
    write_tensor(&real, &Tensor::from_f64(vec![2], vec![2.0, 0.5]).unwrap()).unwrap();
    write_tensor(&fake, &Tensor::from_f64(vec![2], vec![-2.0, 0.0]).unwrap()).unwrap();
    let (code, stdout, _) = run(&["loss", "--op", "adv_d", "--inputs", p(&real), p(&fake)]);
    assert_eq!(code, 0);
    // real: (0 + 0.5) / 2, fake: (0 + 1) / 2
    assert_eq!(stdout.trim().parse::<f64>().unwrap(), 0.75);

    let (code, stdout, _) = run(&["loss", "--op", "ref_total", "--values", "1,2,3", "--epoch", "79"]);
    assert_eq!((code, stdout.trim()), (0, "1.0"));
    let (_, stdout, _) = run(&["loss", "--op", "ref_total", "--values", "1,2,3", "--epoch", "80"]);
    assert_eq!(stdout.trim(), "6.0");
    let (_, stdout, _) = run(&["loss", "--op", "total", "--values", "1,1,1,1", "--weights", r#"{"lambda_fm": 2}"#]);
    assert_eq!(stdout.trim(), "14.0");
}

#[test]
fn loss_ref_ce_uses_mask_raster() {
    let dir = tempfile::tempdir().unwrap();
    let logits = dir.path().join("z.gsdt");
    write_tensor(&logits, &Tensor::from_f64(vec![1, 2, 1, 2], vec![0.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
    let mask = dir.path().join("m.png");
    save_label_map(&mask, &LabelMap::new(1, 2, vec![0, 1], None).unwrap()).unwrap();
    let (code, stdout, stderr) = run(&["loss", "--op", "ref_ce", "--inputs", p(&logits), p(&mask)]);
    assert_eq!(code, 0, "{stderr}");
    assert!((stdout.trim().parse::<f64>().unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn selftest_passes_and_detects_injected_fault() {
    let (code, stdout, _) = run(&["selftest"]);
    assert_eq!(code, 0);
    assert_eq!(json(&stdout)["values"]["failed"], 0);
    let (code, stdout, _) = run(&["selftest", "--inject-fault", "radial_edges"]);
    assert_eq!(code, 1);
    assert!(json(&stdout)["values"]["failed"].as_u64().unwrap() >= 1);
    assert_eq!(run(&["selftest", "--inject-fault", "nope"]).0, 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["gsd"]).0, 2);
    assert_eq!(run(&["loss", "--op", "bogus"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}
