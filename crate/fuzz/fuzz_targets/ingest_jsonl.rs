#![no_main]

use libfuzzer_sys::fuzz_target;
use stereotrust::world::{IngestConfig, World};

fuzz_target!(|data: &[u8]| {
    let config = IngestConfig {
        min_ratings: 1,
        ..IngestConfig::default()
    };
    if let Ok(world) = World::ingest(data, &config) {
        let mut dump = Vec::new();
        world.dump(&mut dump).expect("ingested world dumps");
        World::load(dump.as_slice()).expect("dump of an ingested world loads");
    }
});
