//! Share of zero-error, minor-only and major-error translations in a corpus.

use mtmeta::mqm::distribution;
use mtmeta::synth::{generate_synthetic_corpus, ClassMix, SynthConfig};

fn main() -> mtmeta::Result<()> {
    let mix = ClassMix {
        p_zero: 0.25,
        p_minor: 0.27,
        p_major: 0.48,
    };
    let corpus = generate_synthetic_corpus(&SynthConfig::new(12, 460, mix, 7))?;
    let d = distribution(&corpus)?;
    println!(
        "N = {} ({} systems x {} sources)",
        d.n,
        corpus.n_systems(),
        corpus.m_sources()
    );
    println!("zero MQM     {:5.1}%", d.pct_zero);
    println!("minor only   {:5.1}%", d.pct_hq_minor);
    println!("major error  {:5.1}%", d.pct_nonhq);
    Ok(())
}
