//! End to end through files: synthesize a dataset, then drive the CLI commands from its manifest.
//!
//! Usage: `cargo run --example manifest_run [OUT_DIR]`

use std::path::PathBuf;

use mtmeta::cli::{cmd_correlate, cmd_detect, cmd_distribution, RunManifest};
use mtmeta::synth::{synthesize, ClassMix, SynthConfig, SynthMetric};

fn main() -> mtmeta::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mtmeta-demo"));
    let mix = ClassMix {
        p_zero: 0.4,
        p_minor: 0.3,
        p_major: 0.3,
    };
    let cfg = SynthConfig::new(8, 200, mix, 42)
        .with_metric(SynthMetric::new("lexical", 6.0))
        .with_metric(SynthMetric::new("learned", 2.0));
    let ds = synthesize(&cfg)?;
    ds.write_files(&dir)?;

    let mut run = RunManifest::new("en-de", vec!["mqm.tsv".into()]);
    run.metrics = Some("metrics.toml".into());
    run.analysis_preset = Some(mtmeta::cli::Preset::HqComparison);
    run.seed = 42;
    std::fs::write(dir.join("manifest.toml"), run.to_toml()).map_err(|e| mtmeta::Error::io(&dir, e))?;

    let run = RunManifest::from_path(&dir.join("manifest.toml"))?;
    let mut written = Vec::new();
    for cmd in [cmd_distribution, cmd_correlate, cmd_detect] {
        written.extend(cmd(&run)?.written);
    }
    for p in &written {
        println!("{}", p.display());
    }
    println!();
    print!(
        "{}",
        std::fs::read_to_string(run.output_path().join("correlations.md")).unwrap_or_default()
    );
    Ok(())
}
