use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

const SMOKE: &str = r#"
output_dir = "out"
repetitions = 2
strategies = ["MM"]

[[datasets]]
name = "toy"
[datasets.synth]
seed = 3

[[classifiers]]
kind = "gnb"
"#;

fn multiconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiconf"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn smoke_run_writes_one_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, SMOKE).unwrap();
    let start = Instant::now();
    ok(&multiconf(&["run", cfg.to_str().unwrap()]));
    assert!(start.elapsed().as_secs_f64() < 10.0);
    let tables: Vec<_> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with("_table.csv"))
        .collect();
    assert_eq!(tables.len(), 1);
    let text = fs::read_to_string(tables[0].path()).unwrap();
    assert!(text.starts_with("metric,gnb\naccuracy,"));
}

#[test]
fn rerun_into_fresh_dir_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, SMOKE).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&multiconf(&[
        "run",
        cfg.to_str().unwrap(),
        "--output-dir",
        a.to_str().unwrap(),
    ]));
    ok(&multiconf(&[
        "run",
        cfg.to_str().unwrap(),
        "--output-dir",
        b.to_str().unwrap(),
    ]));
    let (la, lb) = (listing(&a), listing(&b));
    assert!(la.len() > 5);
    assert_eq!(la, lb);

    let again = multiconf(&["run", cfg.to_str().unwrap(), "--output-dir", a.to_str().unwrap()]);
    ok(&again);
    assert!(String::from_utf8_lossy(&again.stdout).contains("0 cells computed, 1 reused"));
    assert_eq!(listing(&a), la);
}

#[test]
fn missing_dataset_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "output_dir = \"out\"\n[[datasets]]\nname = \"gone\"\npath = \"nope.csv\"\n[[classifiers]]\nkind = \"gnb\"\n",
    )
    .unwrap();
    let out = multiconf(&["run", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
}

#[test]
fn bad_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, SMOKE).unwrap();
    let out = multiconf(&["run", cfg.to_str().unwrap(), "--epsilon", "1.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
}

#[test]
fn synth_then_ingest_then_run_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    let clean = dir.path().join("clean.csv");
    ok(&multiconf(&[
        "synth",
        "--users",
        "4",
        "--per-class",
        "20",
        "--shift",
        "1.0",
        "--seed",
        "9",
        "--out",
        raw.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&raw).unwrap();
    assert!(text.starts_with("user,class,"));
    assert_eq!(text.lines().count(), 1 + 4 * 4 * 20);

    ok(&multiconf(&[
        "ingest",
        raw.to_str().unwrap(),
        "--out",
        clean.to_str().unwrap(),
        "--min-per-user-class",
        "20",
    ]));
    assert_eq!(fs::read_to_string(&clean).unwrap(), text);

    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "output_dir = \"out\"\nrepetitions = 2\nstrategies = [\"UIM\", \"UCM\"]\n[[datasets]]\nname = \"file\"\npath = \"clean.csv\"\nformat = \"preprocessed\"\n[[classifiers]]\nkind = \"knn\"\nk = 3\n",
    )
    .unwrap();
    ok(&multiconf(&["run", cfg.to_str().unwrap(), "--no-viz"]));
    assert!(dir.path().join("out/file_UIM_table.csv").exists());
    assert!(dir.path().join("out/file_knn_UCM_reps.csv").exists());
    assert!(!dir.path().join("out/file_knn_UCM_cooc.svg").exists());

    let h = multiconf(&["hypotheses", dir.path().join("out").to_str().unwrap()]);
    ok(&h);
    assert!(String::from_utf8_lossy(&h.stdout).contains("\"UCM\""));
}

#[test]
fn ingest_drops_thin_users() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    let mut text = String::from("user,class,f\n");
    for i in 0..10 {
        text.push_str(&format!("a,x,{i}\na,y,{i}\n"));
    }
    text.push_str("b,x,1\nb,y,2\n");
    fs::write(&raw, text).unwrap();
    let out = dir.path().join("out.csv");
    ok(&multiconf(&[
        "ingest",
        raw.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    let kept = fs::read_to_string(&out).unwrap();
    assert_eq!(kept.lines().count(), 21);
    assert!(!kept.contains("\nb,"));
}

#[test]
fn viz_renders_requested_charts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, SMOKE).unwrap();
    ok(&multiconf(&["run", cfg.to_str().unwrap(), "--no-viz"]));
    let records = dir.path().join("out/records/toy_gnb_MM_rep0.csv");
    assert!(records.exists());
    let charts = dir.path().join("charts");
    let out = multiconf(&[
        "viz",
        records.to_str().unwrap(),
        "--chart",
        "coocgraph,multiset",
        "--out",
        charts.to_str().unwrap(),
    ]);
    ok(&out);
    let names: Vec<String> = listing(&charts).into_iter().map(|(n, _)| n).collect();
    assert!(names.iter().any(|n| n.ends_with("_coocgraph.dot")));
    assert!(names.iter().any(|n| n.ends_with("_multiset.csv")));
    assert!(!names.iter().any(|n| n.contains("_zdcm")));
}
