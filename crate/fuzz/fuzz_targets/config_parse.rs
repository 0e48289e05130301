#![no_main]

use libfuzzer_sys::fuzz_target;
use stereotrust::config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = config::parse(text) {
        let again = config::parse(&config::render(&cfg)).expect("rendered config parses");
        assert_eq!(config::render(&again), config::render(&cfg));
    }
});
