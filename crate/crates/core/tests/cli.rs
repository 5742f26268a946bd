use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mvksc::cli::RunRecord;
use mvksc::data;

fn mvksc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvksc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, kind: &str) -> std::path::PathBuf {
    let out = dir.join(kind);
    let o = mvksc(&["synth", "--kind", kind, "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("manifest.txt")
}

#[test]
fn fit_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), "subspaces");
    let out = dir.path().join("run");
    let o = mvksc(&["fit", "--manifest", p(&manifest), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["labels.csv", "consensus.csv", "embedding.csv", "trace.csv", "metrics.txt", "run.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }

    let labels = data::read_labels(out.join("labels.csv")).unwrap();
    assert_eq!(labels.len(), 90);
    let consensus = data::read_matrix_csv(out.join("consensus.csv")).unwrap();
    assert_eq!(consensus.shape(), (90, 90));
    let embedding = data::read_matrix_csv(out.join("embedding.csv")).unwrap();
    assert_eq!(embedding.shape(), (90, 3));
    let (header, trace) = data::read_table_csv(out.join("trace.csv")).unwrap();
    assert_eq!(header, ["iter", "objective", "residual_ca", "residual_sum1"]);

    let record = RunRecord::read(out.join("run.json")).unwrap();
    assert_eq!(record.trace.len(), trace.nrows());
    assert_eq!(record.summary.iterations, trace.nrows());
    let ds = data::load_dataset(&manifest).unwrap();
    assert_eq!(record.dataset.fingerprint, ds.fingerprint());
    let json = serde_json::to_string(&record).unwrap();
    let back: RunRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, record);
}

#[test]
fn flag_overrides_reach_the_run_record() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), "rings");
    let cfg = dir.path().join("solver.cfg");
    fs::write(&cfg, "# rings need raw radii\nnormalize = none\nlambda = 2\n").unwrap();
    let out = dir.path().join("run");
    let o = mvksc(&[
        "fit", "--manifest", p(&manifest), "--config", p(&cfg), "--out", p(&out),
        "--kernel", "poly:1:2", "--gamma", "0.5", "--theta", "0.02", "--iters", "7",
        "--tol", "0", "--mode", "fro", "--no-enrich", "--seed", "4", "--rho-cap", "none",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = RunRecord::read(out.join("run.json")).unwrap();
    assert_eq!(r.config.lambda, 2.0);
    assert_eq!(r.config.gamma, 0.5);
    assert_eq!(r.config.theta, 0.02);
    assert_eq!(r.config.max_iters, 7);
    assert_eq!(r.config.seed, 4);
    assert_eq!(r.config.k, 2);
    assert_eq!(r.config.rho_cap, None);
    assert!(!r.config.enriched);
    assert_eq!(r.config.kernels[0].to_string(), "poly:1:2");
    assert_eq!(r.normalize, data::NormalizeMode::None);
    assert_eq!(r.trace.len(), 7);
}

#[test]
fn negative_lambda_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), "subspaces");
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "lambda = -1\n").unwrap();
    let o = mvksc(&["fit", "--manifest", p(&manifest), "--config", p(&cfg), "--out", p(&dir.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.trim().lines().count(), 1);
    assert!(stderr.contains("lambda"));
}

#[test]
fn unknown_config_key_and_missing_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), "subspaces");
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "lamda = 1\n").unwrap();
    let out = dir.path().join("x");
    let o = mvksc(&["fit", "--manifest", p(&manifest), "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = mvksc(&["fit", "--manifest", "does/not/exist.txt", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let o = mvksc(&["fit", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_outputs_and_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let rings = synth(dir.path(), "rings");
    assert_eq!(data::load_dataset(&rings).unwrap().n_samples(), 100);

    let sub = synth(dir.path(), "subspaces");
    let mut labels = data::load_dataset(&sub).unwrap().labels.unwrap();
    labels.sort_unstable();
    labels.dedup();
    assert_eq!(labels, [0, 1, 2]);

    let target = dir.path().join("subspaces");
    let o = mvksc(&["synth", "--kind", "subspaces", "--out", p(&target)]);
    assert_eq!(o.status.code(), Some(2));
    let o = mvksc(&["synth", "--kind", "subspaces", "--out", p(&target), "--force", "--k", "4", "--dims", "8,9,10"]);
    assert!(o.status.success());
    let ds = data::load_dataset(&sub).unwrap();
    assert_eq!(ds.n_views(), 3);
    assert_eq!(ds.n_classes(), Some(4));
}

#[test]
fn heatmap_format() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    fs::write(&csv, "0,0,0\n0,0,0\n0,0,0\n").unwrap();
    let img = dir.path().join("m.pgm");
    assert!(mvksc(&["heatmap", p(&csv), p(&img)]).status.success());
    let bytes = fs::read(&img).unwrap();
    assert!(bytes.starts_with(b"P5\n3 3\n255\n"));
    assert!(bytes[bytes.len() - 9..].iter().all(|&b| b == 255));

    fs::write(&csv, "1,2\n3,4\n5,6\n").unwrap();
    assert_eq!(mvksc(&["heatmap", p(&csv), p(&img)]).status.code(), Some(3));
}

#[test]
fn eval_prints_scores() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, "0\n0\n1\n1\n").unwrap();
    fs::write(&b, "0\n1\n0\n1\n").unwrap();
    let o = mvksc(&["eval", p(&a), p(&a)]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "acc=1.0000 nmi=1.0000");
    let o = mvksc(&["eval", p(&a), p(&b)]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "acc=0.5000 nmi=0.0000");
    fs::write(&b, "0\n1\n").unwrap();
    assert_eq!(mvksc(&["eval", p(&a), p(&b)]).status.code(), Some(3));
}
