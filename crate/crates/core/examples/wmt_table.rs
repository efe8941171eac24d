//! Correlation and detection tables for a real run manifest (e.g. WMT23 EN-DE).
//!
//! Usage: `cargo run --release --example wmt_table -- path/to/en-de.toml`

use std::path::PathBuf;

use mtmeta::cli::{correlation_rows, detection_reports, display_language_pair, RunManifest};
use mtmeta::detect::reports_to_markdown;
use mtmeta::mqm::{distribution, QualityClass};
use mtmeta::stats::to_markdown;

fn main() -> mtmeta::Result<()> {
    let Some(path) = std::env::args().nth(1).map(PathBuf::from) else {
        eprintln!("usage: wmt_table MANIFEST.toml");
        std::process::exit(2);
    };
    let run = RunManifest::from_path(&path)?;
    let corpus = run.load_corpus()?;
    let d = distribution(&corpus)?;
    println!(
        "{}: N = {}, zero MQM {:.1}%, minor only {:.1}%, major {:.1}%\n",
        display_language_pair(corpus.language_pair()),
        d.n,
        d.pct_zero,
        d.pct_hq_minor,
        d.pct_nonhq
    );
    println!("{}", to_markdown(&correlation_rows(&run, &corpus)?));

    let n_zero = corpus
        .records()
        .iter()
        .filter(|r| r.quality_class == QualityClass::HqZero)
        .count();
    for reports in detection_reports(&run, &corpus)? {
        println!("{}", reports_to_markdown(corpus.language_pair(), n_zero, &reports));
    }
    Ok(())
}
