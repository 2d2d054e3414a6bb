#![no_main]

use libfuzzer_sys::fuzz_target;
use qcnn_bench::formats::parse_model;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(model) = parse_model(text) {
            let again = parse_model(&model.to_json()).expect("re-parse of written model");
            assert_eq!(again, model);
            let _ = model.compression_spec();
        }
    }
});
