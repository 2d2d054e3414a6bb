#![no_main]

use libfuzzer_sys::fuzz_target;
use qcnn_bench::formats::{parse_results_csv, strip_timing};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if parse_results_csv(text).is_ok() {
            strip_timing(text).expect("accepted CSV strips");
        }
    }
});
