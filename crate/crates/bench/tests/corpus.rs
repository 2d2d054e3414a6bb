use std::fs;
use std::path::PathBuf;

use qcnn_bench::formats::{dataset_to_string, parse_dataset, parse_model, parse_results_csv, strip_timing};
use qcnn_bench::BenchConfig;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn dataset_seeds_round_trip() {
    for (path, text) in seeds("dataset") {
        let ds = parse_dataset(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(dataset_to_string(&ds), text, "{}", path.display());
    }
}

#[test]
fn model_seeds_round_trip() {
    for (path, text) in seeds("model") {
        let m = parse_model(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(parse_model(&m.to_json()).unwrap(), m);
    }
}

#[test]
fn config_seeds_round_trip() {
    for (path, text) in seeds("config") {
        let cfg = BenchConfig::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = BenchConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }
}

#[test]
fn results_seeds_strip() {
    for (path, text) in seeds("results_csv") {
        let (_, rows) = parse_results_csv(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(!rows.is_empty());
        strip_timing(&text).unwrap();
    }
}
