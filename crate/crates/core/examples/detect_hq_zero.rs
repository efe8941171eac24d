//! How well does "normalized score >= 0.99" pick out zero-error translations?

use mtmeta::corpus::ScoreRange;
use mtmeta::detect::{detection_report, hqzero_histogram, percent, NormalizationSpec};
use mtmeta::synth::{generate_synthetic_corpus, ClassMix, SynthConfig, SynthMetric};

fn main() -> mtmeta::Result<()> {
    let mix = ClassMix {
        p_zero: 0.5,
        p_minor: 0.2,
        p_major: 0.3,
    };
    let cfg = SynthConfig::new(8, 250, mix, 5)
        .with_metric(SynthMetric::new("errors", 0.8))
        .with_metric(SynthMetric::new("neural", 1.5).with_range(ScoreRange::new(0.0, 1.0)?));
    let corpus = generate_synthetic_corpus(&cfg)?;

    for table in corpus.metrics() {
        let spec = NormalizationSpec::for_metric(table);
        let r = detection_report(&corpus, &table.metric_name, &spec)?;
        println!(
            "{:<7} P {:>3} R {:>3} F1 {:>3}   (tp {} fp {} fn {} tn {})",
            r.metric_name,
            percent(r.precision),
            percent(r.recall),
            percent(r.f1),
            r.tp,
            r.fp,
            r.fn_,
            r.tn
        );
        let bins = hqzero_histogram(&corpus, &table.metric_name, &spec, 5)?;
        let counts: Vec<String> = bins
            .iter()
            .map(|b| format!("[{:.1},{:.1}) {}", b.lo, b.hi, b.count))
            .collect();
        println!("        HQ-Zero histogram: {}", counts.join("  "));
    }
    Ok(())
}
