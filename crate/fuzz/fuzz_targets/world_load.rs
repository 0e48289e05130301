#![no_main]

use libfuzzer_sys::fuzz_target;
use stereotrust::world::World;

fuzz_target!(|data: &[u8]| {
    if let Ok(world) = World::load(data) {
        let _ = world.ground_truth();
        let _ = world.index();
    }
});
