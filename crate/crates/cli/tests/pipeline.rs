use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cellgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellgraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cellgraph(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

/// `sha256` lines of every bundle header, in specimen order.
fn bundle_checksums(dir: &Path) -> Vec<String> {
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    subdirs
        .iter()
        .flat_map(|d| {
            std::fs::read_to_string(d.join("header.txt"))
                .unwrap()
                .lines()
                .filter(|l| l.contains("_sha256="))
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .collect()
}

fn report_value(dir: &Path, key: &str) -> f64 {
    let text = std::fs::read_to_string(dir.join("report.kv")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from report"))
        .parse()
        .unwrap()
}

#[test]
fn full_chain_on_shell_organs() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    ok(&["synth", "--out", &p(t, "data"), "--count", "10", "--seed", "3", "--layers", "40,20,8"]);
    ok(&["ingest", "--data-dir", &p(t, "data"), "--out", &p(t, "ingest")]);
    assert!(t.join("ingest/ingest_report.txt").exists());
    ok(&["graph", "--data-dir", &p(t, "data"), "--out", &p(t, "graphs"), "--k-samples", "100"]);

    let features = |out: &str| {
        ok(&[
            "features",
            "--reproducible",
            "--graph-dir",
            &p(t, "graphs"),
            "--out",
            &p(t, out),
            "--frame",
            "trivial",
            "--features",
            "all",
        ])
    };
    features("bundles");
    features("bundles_again");
    let first = bundle_checksums(&t.join("bundles"));
    assert_eq!(first.len(), 10 * 4);
    assert_eq!(first, bundle_checksums(&t.join("bundles_again")));

    ok(&[
        "split",
        "--reproducible",
        "--bundle-dir",
        &p(t, "bundles"),
        "--out",
        &p(t, "split"),
        "--seed",
        "1",
        "--k-folds",
        "5",
    ]);
    ok(&[
        "train",
        "--bundle-dir",
        &p(t, "bundles"),
        "--split-file",
        &p(t, "split"),
        "--fold",
        "0",
        "--out",
        &p(t, "run"),
        "--seed",
        "0",
        "--epochs",
        "60",
        "--hidden",
        "32",
    ]);
    assert!(t.join("run/model/model.txt").exists());
    assert!(t.join("run/history.txt").exists());
    assert!(t.join("run/config.resolved.txt").exists());

    let msg = ok(&[
        "eval",
        "--bundle-dir",
        &p(t, "bundles"),
        "--predictions-dir",
        &p(t, "run/predictions"),
        "--split-file",
        &p(t, "split"),
        "--fold",
        "0",
        "--out",
        &p(t, "eval"),
    ]);
    assert!(msg.contains("top1"), "{msg}");
    let top1 = report_value(&t.join("eval"), "top1_mean");
    assert!((0.0..=1.0).contains(&top1));

    // Ground truth scored against itself
    let perfect = t.join("perfect");
    for entry in std::fs::read_dir(t.join("bundles")).unwrap() {
        let d = entry.unwrap().path();
        if !d.is_dir() {
            continue;
        }
        let id = d.file_name().unwrap();
        std::fs::create_dir_all(perfect.join(id)).unwrap();
        std::fs::copy(d.join("labels.u8"), perfect.join(id).join("labels.u8")).unwrap();
    }
    ok(&[
        "eval",
        "--bundle-dir",
        &p(t, "bundles"),
        "--predictions-dir",
        &p(t, "perfect"),
        "--out",
        &p(t, "eval_perfect"),
    ]);
    assert_eq!(report_value(&t.join("eval_perfect"), "top1_mean"), 1.0);
    assert_eq!(report_value(&t.join("eval_perfect"), "class_avg_mean"), 1.0);
}

fn single_error_line(out: &Output) -> String {
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: kind="), "{err}");
    err
}

#[test]
fn errors_are_single_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let err = single_error_line(&cellgraph(&["graph", "--data-dir", &p(t, "nope"), "--out", &p(t, "g")]));
    assert!(err.contains("kind=missing-input"), "{err}");

    let err = single_error_line(&cellgraph(&["synth", "--reproducible", "--out", &p(t, "s")]));
    assert!(err.contains("kind=config") && err.contains("--seed"), "{err}");

    let err = single_error_line(&cellgraph(&["synth", "--out", &p(t, "s"), "--count", "many"]));
    assert!(err.contains("kind=config"), "{err}");

    let err = single_error_line(&cellgraph(&["frobnicate"]));
    assert!(err.contains("kind=usage"), "{err}");
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let cfg = t.join("run.cfg");
    std::fs::write(&cfg, format!("out={}\nseed=5\ncount=2\nlayers=12,5\nradius=10\n", p(t, "data"))).unwrap();
    ok(&["synth", "--config", &cfg.to_string_lossy(), "--reproducible", "--count", "1"]);
    let resolved = std::fs::read_to_string(t.join("data/config.resolved.txt")).unwrap();
    assert!(resolved.contains("count=1"), "{resolved}");
    assert!(resolved.contains("seed=5"), "{resolved}");
    assert!(t.join("data/shell000/volume.hdr").exists());
    assert!(!t.join("data/shell001").exists());

    std::fs::write(&cfg, "colour=blue\n").unwrap();
    let err = single_error_line(&cellgraph(&["synth", "--config", &cfg.to_string_lossy()]));
    assert!(err.contains("unknown config key colour"), "{err}");
}
