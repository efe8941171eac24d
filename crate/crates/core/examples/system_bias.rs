//! A metric that over-rates one system: its valid scores pile up on translations with errors.

use mtmeta::detect::{bias_report, NormalizationSpec};
use mtmeta::synth::{generate_synthetic_corpus, ClassMix, SynthConfig, SynthMetric};

fn main() -> mtmeta::Result<()> {
    let mix = ClassMix {
        p_zero: 0.3,
        p_minor: 0.4,
        p_major: 0.3,
    };
    let cfg = SynthConfig::new(6, 300, mix, 9).with_metric(SynthMetric::new("judge", 0.3).with_bias("sys04", 4.0));
    let corpus = generate_synthetic_corpus(&cfg)?;
    let spec = NormalizationSpec::for_metric(corpus.metric("judge").expect("registered"));

    println!(
        "{:<6} {:>8} {:>11} {:>9}",
        "system", "HQ-Zero", "non-HQ-Zero", "abs diff"
    );
    for row in bias_report(&corpus, "judge", &spec)? {
        println!(
            "{:<6} {:>8} {:>11} {:>9}",
            row.system, row.valid_on_hqzero, row.valid_on_nonhqzero, row.abs_diff
        );
    }
    Ok(())
}
