// File-driven run: a JSON config in, JSON/CSV/SVG reports and a manifest
// out. This is what `fairclust compare --config ...` does.

use std::path::PathBuf;

use fairclust::experiment::{run_compare, ExperimentConfig};

pub fn run_example() -> Vec<PathBuf> {
    let dir = std::env::temp_dir().join(format!("fairclust-example-{}", std::process::id()));
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "instance": {"generator": "thm1", "params": {"r": 1.0}},
        "notions": [
            {"notion": "agnostic"},
            {"notion": "cm", "lower": 0.5, "upper": 0.5},
            {"notion": "sf"},
            {"notion": "wc"}
        ],
        "model": {"preset": "theorem1", "r": 1.0},
        "output_dir": dir,
    }))
    .unwrap();
    let (out, _) = run_compare(&config).unwrap();
    for f in &out.files {
        println!("{}", f.display());
    }
    println!("config hash {}", out.manifest.config_hash);
    out.files
}

#[allow(dead_code)]
fn main() {
    run_example();
}
