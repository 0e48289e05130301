use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TABLE2: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../table2.cfg");

fn stereotrust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stereotrust"))
        .args(args)
        .env_remove("STEREOTRUST_SEED")
        .output()
        .expect("binary runs")
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn run_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = stereotrust(&[
            "run",
            "--config",
            TABLE2,
            "--seed",
            "42",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa.len(), 3);
    assert_eq!(fa, fb);
    let csv = String::from_utf8(fa.iter().find(|(n, _)| n == "table2.csv").unwrap().1.clone()).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(
        header.contains("config_sha256=") && header.contains("seed=42"),
        "{header}"
    );
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_stereotrust"))
        .args(["generate", "--config", TABLE2, "--out", dir.path().to_str().unwrap()])
        .env("STEREOTRUST_SEED", "9")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("world_seed9.jsonl").exists());
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.cfg");
    let out = stereotrust(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n_agents = 50\nbogus = 1\n").unwrap();
    let out = stereotrust(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_ingest_line_exits_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ratings.jsonl");
    let good = r#"{"rater":"ann","author":"bob","review":"r1","category":"books","label_or_value":"Helpful","seq":0}"#;
    fs::write(&input, format!("{good}\n{good}\n{{\"rater\": 3\n")).unwrap();
    let before = fs::read(&input).unwrap();
    let out = stereotrust(&[
        "ingest",
        input.to_str().unwrap(),
        "--out",
        dir.path().join("world.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
    assert_eq!(fs::read(&input).unwrap(), before);
}

#[test]
fn ingest_writes_loadable_dump() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ratings.jsonl");
    let lines: Vec<String> = (0..4)
        .map(|i| {
            format!(
                r#"{{"rater":"r{i}","author":"bob","review":"rev","category":"books","label_or_value":"Most Helpful","seq":{i}}}"#
            )
        })
        .collect();
    fs::write(&input, lines.join("\n") + "\n").unwrap();
    let world = dir.path().join("world.jsonl");
    let out = stereotrust(&[
        "ingest",
        input.to_str().unwrap(),
        "--out",
        world.to_str().unwrap(),
        "--min-ratings",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let loaded = stereotrust::world::World::load(fs::read(&world).unwrap().as_slice()).unwrap();
    assert_eq!(loaded.ratings.len(), 4);
    assert_eq!(loaded.ground_truth().get(0).or(loaded.ground_truth().get(1)), Some(1.0));
}
