#![no_main]

use libfuzzer_sys::fuzz_target;
use stereotrust::sson::StereotypeResponse;

fuzz_target!(|data: &[u8]| {
    if let Ok(response) = StereotypeResponse::decode(data) {
        assert_eq!(StereotypeResponse::decode(&response.encode()).unwrap(), response);
    }
});
