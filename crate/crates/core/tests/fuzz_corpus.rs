//! The checked-in fuzz seeds must stay valid inputs, otherwise the fuzzers
//! start from rejected bytes.

use std::fs;
use std::path::PathBuf;

use stereotrust::config;
use stereotrust::sson::{StereotypeRequest, StereotypeResponse};
use stereotrust::world::{IngestConfig, World};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let bytes = fs::read(&path).unwrap();
            (path, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn ingest_seeds() {
    let cfg = IngestConfig {
        min_ratings: 1,
        ..IngestConfig::default()
    };
    for (path, bytes) in seeds("ingest_jsonl") {
        World::ingest(bytes.as_slice(), &cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn world_seeds_round_trip() {
    for (path, bytes) in seeds("world_load") {
        let world = World::load(bytes.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut again = Vec::new();
        world.dump(&mut again).unwrap();
        assert_eq!(again, bytes, "{}", path.display());
    }
}

#[test]
fn config_seeds() {
    for (path, bytes) in seeds("config_parse") {
        let text = String::from_utf8(bytes).unwrap();
        config::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn sson_seeds() {
    for (path, bytes) in seeds("sson_request") {
        let req = StereotypeRequest::decode(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(StereotypeRequest::decode(&req.encode()).unwrap(), req);
    }
    for (path, bytes) in seeds("sson_response") {
        let resp = StereotypeResponse::decode(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(StereotypeResponse::decode(&resp.encode()).unwrap(), resp);
    }
}
