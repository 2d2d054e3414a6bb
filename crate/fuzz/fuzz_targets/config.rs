#![no_main]

use libfuzzer_sys::fuzz_target;
use qcnn_bench::BenchConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = BenchConfig::from_toml(text) {
            let again = BenchConfig::from_toml(&cfg.to_toml()).expect("re-parse of written config");
            assert_eq!(again, cfg);
            assert_eq!(again.hash(), cfg.hash());
            for spec in cfg.models() {
                let _ = cfg.task_for(&spec);
            }
        }
    }
});
