#![no_main]

use libfuzzer_sys::fuzz_target;
use qcnn_bench::formats::{dataset_to_string, parse_dataset};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ds) = parse_dataset(text) {
            // anything accepted must survive a write/read cycle unchanged
            let written = dataset_to_string(&ds);
            let again = parse_dataset(&written).expect("re-parse of written dataset");
            assert_eq!(again, ds);
            assert_eq!(dataset_to_string(&again), written);
        }
    }
});
