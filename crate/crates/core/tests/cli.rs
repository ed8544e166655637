//! End-to-end runs of the `olga` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_olga");

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference_scores.csv")
}

fn olga(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

/// Every file under `dir`, keyed by relative path.
fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(
                    path.strip_prefix(dir).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    files
}

fn small_cv(method: &str) -> Vec<String> {
    let mut args = vec![
        "cv",
        "--dataset",
        "synth:blobs:30:30",
        "--method",
        method,
        "--seed",
        "3",
        "--jobs",
        "2",
    ];
    let sets = [
        "k=2",
        "radius=0.3",
        "learning_rate=0.01",
        "patience=10",
        "embedding_dim=2",
        "nu=0.1",
        "max_epochs=40",
        "snapshot_every=10",
    ];
    for s in &sets {
        args.push("--set");
        args.push(s);
    }
    args.into_iter().map(String::from).collect()
}

#[test]
fn build_graph_writes_the_symmetrized_edges() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("three.csv");
    std::fs::write(&data, "x,y,label\n1,0,1\n0.9,0.1,1\n0,1,0\n").unwrap();
    let out = dir.path().join("out");
    let run = olga(&out, &["build-graph", "--dataset", data.to_str().unwrap(), "--k", "1"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "nodes=3 edges=2 k=1");
    assert_eq!(
        std::fs::read_to_string(out.join("edges.csv")).unwrap(),
        "src,dst\n0,1\n1,2\n"
    );
}

#[test]
fn volume_table_covers_every_radius_and_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let run = olga(dir.path(), &["volume", "--radii", "0.3,0.5", "--n-max", "20", "--svg"]);
    assert!(run.status.success());
    let table = std::fs::read_to_string(dir.path().join("volume.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("n,r,volume"));
    assert_eq!(lines.count(), 40);
    assert!(dir.path().join("volume.svg").exists());
}

#[test]
fn rank_reports_olga_first() {
    let dir = tempfile::tempdir().unwrap();
    let run = olga(dir.path(), &["rank", fixture().to_str().unwrap()]);
    assert!(run.status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("ranks.json")).unwrap()).unwrap();
    let methods = json["methods"].as_array().unwrap();
    let ranks = json["avg_ranks"].as_array().unwrap();
    let best = (0..methods.len())
        .min_by(|&a, &b| ranks[a].as_f64().unwrap().total_cmp(&ranks[b].as_f64().unwrap()))
        .unwrap();
    assert_eq!(methods[best], "OLGA");
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("three.csv");
    std::fs::write(&data, "x,y,label\n1,0,1\n0.9,0.1,1\n0,1,0\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["frobnicate"],
        vec!["build-graph", "--dataset", data.to_str().unwrap(), "--k", "3"],
        vec!["build-graph", "--dataset", "missing.csv", "--k", "1"],
        vec!["volume", "--radii", "1.5"],
        vec!["rank", "--set", "colour=red"],
    ];
    for args in cases {
        let run = olga(dir.path(), &args);
        assert_eq!(run.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn cv_writes_one_directory_per_fold() {
    for method in ["olga", "ocgnn-gcn"] {
        let dir = tempfile::tempdir().unwrap();
        let run = olga(
            dir.path(),
            &small_cv(method).iter().map(String::as_str).collect::<Vec<_>>(),
        );
        assert!(
            run.status.success(),
            "{method}: {}",
            String::from_utf8_lossy(&run.stderr)
        );
        let report: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(report["folds"].as_array().unwrap().len(), 10);
        for fold in 0..10 {
            let fold_dir = dir.path().join(format!("fold-{fold:02}"));
            for file in ["model.ckpt", "trace.csv", "snapshots.csv"] {
                assert!(fold_dir.join(file).exists(), "{method} fold {fold} {file}");
            }
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let data = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<String>> = vec![
        vec![
            "build-graph".into(),
            "--dataset".into(),
            "synth:ring:40:40".into(),
            "--k".into(),
            "3".into(),
        ],
        vec!["volume".into(), "--svg".into()],
        vec!["rank".into(), fixture().display().to_string()],
        small_cv("olga"),
        small_cv("ocgnn-gcn"),
    ];
    for args in runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = data.path().join("a");
        let b = data.path().join("b");
        assert!(olga(&a, &args).status.success(), "{args:?}");
        assert!(olga(&b, &args).status.success(), "{args:?}");
        let (ta, tb) = (tree(&a), tree(&b));
        assert!(!ta.is_empty());
        assert_eq!(ta, tb, "{args:?}");
        std::fs::remove_dir_all(&a).unwrap();
        std::fs::remove_dir_all(&b).unwrap();
    }
}

#[test]
fn trained_snapshots_render_as_svg() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train");
    let sets = [
        "k=2",
        "radius=0.3",
        "learning_rate=0.01",
        "patience=10",
        "max_epochs=30",
        "snapshot_every=10",
        "embedding_dim=2",
    ];
    let mut args = vec!["train", "--dataset", "synth:blobs:20:20"];
    for s in &sets {
        args.extend(["--set", s]);
    }
    assert!(olga(&train, &args).status.success());
    let export = dir.path().join("export");
    let run = olga(&export, &["export-embeddings", train.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let svgs = std::fs::read_dir(export.join("embeddings")).unwrap().count();
    assert!(svgs >= 1);
}
