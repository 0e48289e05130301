#![no_main]

use libfuzzer_sys::fuzz_target;
use stereotrust::sson::StereotypeRequest;

fuzz_target!(|data: &[u8]| {
    if let Ok(request) = StereotypeRequest::decode(data) {
        assert_eq!(StereotypeRequest::decode(&request.encode()).unwrap(), request);
    }
});
