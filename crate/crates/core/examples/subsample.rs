//! Size-matched comparison: subsample whole sources down to K and report mean ± std.

use mtmeta::stats::{correlate, hq_source_set, AnalysisSpec, CorrType, Grouping, Subsample, Subset};
use mtmeta::synth::{generate_synthetic_corpus, ClassMix, SynthConfig, SynthMetric};

fn main() -> mtmeta::Result<()> {
    let mix = ClassMix {
        p_zero: 0.5,
        p_minor: 0.4,
        p_major: 0.1,
    };
    let cfg = SynthConfig::new(12, 400, mix, 21).with_metric(SynthMetric::new("m", 3.0));
    let corpus = generate_synthetic_corpus(&cfg)?;
    let k = hq_source_set(&corpus).len();

    let specs = [
        AnalysisSpec::new(Grouping::NoGrouping, Subset::All, CorrType::Spearman),
        AnalysisSpec::new(Grouping::NoGrouping, Subset::All, CorrType::Spearman).subsampled(Subsample::new(k, 1)),
        AnalysisSpec::new(Grouping::GroupBySrc, Subset::All, CorrType::Spearman).subsampled(Subsample::new(k, 1)),
        AnalysisSpec::new(Grouping::GroupBySrc, Subset::Hq, CorrType::Spearman),
    ];
    println!("subsample target K = {k} of {} sources", corpus.m_sources());
    for spec in &specs {
        let r = correlate(&corpus, "m", spec)?;
        match r.std {
            Some(sd) => println!("{:<22} {:.3} ± {:.3}", spec.label(), r.value, sd),
            None => println!("{:<22} {:.3}", spec.label(), r.value),
        }
    }
    Ok(())
}
