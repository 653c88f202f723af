//! Programmatic use of the runner: resolve a preset, override it with
//! `key=value` pairs and write CSVs plus a manifest.

use nhdtc::runner::{preset, execute, ExperimentConfig};

fn main() -> nhdtc::Result<()> {
    let out = std::env::temp_dir().join("nhdtc-fig1-example");
    let mut cfg = preset("fig1")?;
    cfg.apply_overrides(&["L=6", "eps=0:0.3:0.1", "n_periods=50"])?;
    cfg.output = out.clone();
    assert_eq!(ExperimentConfig::from_text(&cfg.to_text())?, cfg);
    let manifest = execute(&cfg)?;
    print!("{}", manifest.to_text());
    println!("files in {}", out.display());
    Ok(())
}
