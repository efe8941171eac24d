//! Flat vs per-source Spearman correlation, on all translations and on HQ ones.

use mtmeta::stats::{corr_group_by_src, corr_no_grouping, hq_source_set, CorrType, Subset};
use mtmeta::synth::{generate_synthetic_corpus, ClassMix, SynthConfig, SynthMetric};

fn main() -> mtmeta::Result<()> {
    let mix = ClassMix {
        p_zero: 0.45,
        p_minor: 0.35,
        p_major: 0.2,
    };
    let cfg = SynthConfig::new(10, 300, mix, 3)
        .with_metric(SynthMetric::new("sharp", 1.0))
        .with_metric(SynthMetric::new("blurry", 5.0));
    let corpus = generate_synthetic_corpus(&cfg)?;
    println!(
        "K = {} all-HQ sources out of {}",
        hq_source_set(&corpus).len(),
        corpus.m_sources()
    );

    for metric in ["sharp", "blurry"] {
        for subset in [Subset::All, Subset::Hq] {
            let flat = corr_no_grouping(&corpus, metric, subset, CorrType::Spearman)?;
            let grouped = corr_group_by_src(&corpus, metric, subset, CorrType::Spearman)?;
            println!(
                "{metric:>6} {:<3}  no-grouping {:.3} (n={})  group-by-src {:.3} ({} groups, {} excluded)",
                subset.as_str(),
                flat.value,
                flat.n_items,
                grouped.value,
                grouped.n_groups_used,
                grouped.n_groups_excluded
            );
        }
    }
    Ok(())
}
