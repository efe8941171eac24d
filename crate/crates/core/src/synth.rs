//! Synthetic corpora with known gold structure and planted metric behaviour.
//!
//! Gold scores are integers (0, [-4, -1] or [-20, -5] by class), so ties are
//! everywhere, as in real MQM data. Each metric model adds Gaussian noise in
//! gold space, optionally shifts one system, and maps the result affinely into
//! the metric's declared range.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    build_corpus, write_mqm_tsv, ErrorAnnotation, EvalCorpus, JoinOptions, LayoutKind, MetricEntry, MetricManifest,
    MetricScoreTable, ScoreFile, ScoreRange, SegmentKey, Severity,
};
use crate::error::{Error, Result};
use crate::mqm::QualityClass;
use crate::stats::{CorrType, Subset};

/// Lower end of the gold-score space that metric models map from.
const GOLD_SPACE_MIN: f64 = -25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMix {
    pub p_zero: f64,
    pub p_minor: f64,
    pub p_major: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthMetric {
    pub name: String,
    pub noise_sd: f64,
    #[serde(default)]
    pub bias_system: Option<String>,
    #[serde(default)]
    pub bias_magnitude: f64,
    #[serde(default = "default_range")]
    pub range: ScoreRange,
    #[serde(default)]
    pub reference_based: bool,
}

fn default_range() -> ScoreRange {
    ScoreRange::new(GOLD_SPACE_MIN, 0.0).expect("valid range")
}

impl SynthMetric {
    pub fn new(name: impl Into<String>, noise_sd: f64) -> Self {
        SynthMetric {
            name: name.into(),
            noise_sd,
            bias_system: None,
            bias_magnitude: 0.0,
            range: default_range(),
            reference_based: false,
        }
    }

    pub fn with_bias(mut self, system: impl Into<String>, magnitude: f64) -> Self {
        self.bias_system = Some(system.into());
        self.bias_magnitude = magnitude;
        self
    }

    pub fn with_range(mut self, range: ScoreRange) -> Self {
        self.range = range;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    #[serde(default = "default_lp")]
    pub language_pair: String,
    pub n_systems: usize,
    pub m_sources: usize,
    pub class_mix: ClassMix,
    #[serde(default, rename = "metric")]
    pub metric_models: Vec<SynthMetric>,
    #[serde(default)]
    pub seed: u64,
}

fn default_lp() -> String {
    "en-de".to_string()
}

impl SynthConfig {
    pub fn new(n_systems: usize, m_sources: usize, class_mix: ClassMix, seed: u64) -> Self {
        SynthConfig {
            language_pair: default_lp(),
            n_systems,
            m_sources,
            class_mix,
            metric_models: Vec::new(),
            seed,
        }
    }

    pub fn with_metric(mut self, m: SynthMetric) -> Self {
        self.metric_models.push(m);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_systems == 0 || self.m_sources == 0 {
            return Err(Error::Config("n_systems and m_sources must be >= 1".into()));
        }
        let ClassMix {
            p_zero,
            p_minor,
            p_major,
        } = self.class_mix;
        if [p_zero, p_minor, p_major].iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("class probabilities must lie in [0, 1]".into()));
        }
        if (p_zero + p_minor + p_major - 1.0).abs() > 1e-9 {
            return Err(Error::Config("class probabilities must sum to 1".into()));
        }
        let mut names = BTreeSet::new();
        for m in &self.metric_models {
            if !(m.noise_sd.is_finite() && m.noise_sd >= 0.0) || !m.bias_magnitude.is_finite() {
                return Err(Error::Config(format!("metric {}: invalid noise or bias", m.name)));
            }
            if !names.insert(m.name.as_str()) {
                return Err(Error::Config(format!("metric {} defined twice", m.name)));
            }
        }
        Ok(())
    }

    pub fn system_name(k: usize) -> String {
        format!("sys{k:02}")
    }

    fn doc_name(s: usize) -> String {
        format!("d{s:05}")
    }
}

/// Everything a synthetic run produces.
#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub annotations: Vec<ErrorAnnotation>,
    pub gold: BTreeMap<SegmentKey, f64>,
    pub tables: Vec<MetricScoreTable>,
    pub corpus: EvalCorpus,
}

/// Severities whose default-weight penalty equals `-gold` (gold a nonpositive integer).
fn severities_for(gold: i64) -> Vec<Severity> {
    let penalty = (-gold) as usize;
    if penalty == 0 {
        return vec![Severity::NoError];
    }
    let mut out = vec![Severity::Major; penalty / 5];
    out.extend(std::iter::repeat_n(Severity::Minor, penalty % 5));
    out
}

pub fn synthesize(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lp = cfg.language_pair.as_str();

    let mut gold = BTreeMap::new();
    let mut annotations = Vec::new();
    let mut keys = Vec::with_capacity(cfg.n_systems * cfg.m_sources);
    for s in 0..cfg.m_sources {
        let doc = SynthConfig::doc_name(s);
        for k in 0..cfg.n_systems {
            let system = SynthConfig::system_name(k);
            let u: f64 = rng.random();
            let g: i64 = if u < cfg.class_mix.p_zero {
                0
            } else if u < cfg.class_mix.p_zero + cfg.class_mix.p_minor {
                rng.random_range(-4..=-1)
            } else {
                rng.random_range(-20..=-5)
            };
            let key = SegmentKey::new(lp, format!("{doc}:1"), system.as_str());
            for sev in severities_for(g) {
                let category = if sev == Severity::NoError {
                    "No-error"
                } else {
                    "Accuracy/Mistranslation"
                };
                annotations.push(ErrorAnnotation {
                    system: system.clone(),
                    doc: doc.clone(),
                    doc_id: "1".into(),
                    seg_id: 1,
                    rater: "rater1".into(),
                    source_text: format!("source sentence {s}"),
                    target_text: format!("translation of {s} by {system}"),
                    category: category.into(),
                    severity: sev,
                });
            }
            gold.insert(key.clone(), g as f64);
            keys.push(key);
        }
    }

    let mut tables = Vec::with_capacity(cfg.metric_models.len());
    for m in &cfg.metric_models {
        let noise = Normal::new(0.0, m.noise_sd).map_err(|e| Error::Config(format!("{}: {e}", m.name)))?;
        let mut table = MetricScoreTable::new(m.name.clone(), m.reference_based, m.range);
        for key in &keys {
            let mut v = gold[key];
            if m.noise_sd > 0.0 {
                v += noise.sample(&mut rng);
            }
            if m.bias_system.as_deref() == Some(key.system.as_str()) {
                v += m.bias_magnitude;
            }
            let mapped = m.range.min() + (v - GOLD_SPACE_MIN) / -GOLD_SPACE_MIN * m.range.width();
            table.insert(key.clone(), mapped.clamp(m.range.min(), m.range.max()))?;
        }
        tables.push(table);
    }

    let corpus = build_corpus(&annotations, &gold, tables.clone(), JoinOptions::default())?;
    Ok(SynthDataset {
        annotations,
        gold,
        tables,
        corpus,
    })
}

pub fn generate_synthetic_corpus(cfg: &SynthConfig) -> Result<EvalCorpus> {
    Ok(synthesize(cfg)?.corpus)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl SynthDataset {
    /// Write `mqm.tsv`, keyed score files under `scores/`, and `metrics.toml` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<MetricManifest> {
        let scores_dir = dir.join("scores");
        fs::create_dir_all(&scores_dir).map_err(|e| Error::io(&scores_dir, e))?;

        let mqm_path = dir.join("mqm.tsv");
        let mut buf = Vec::new();
        write_mqm_tsv(&mut buf, &self.annotations)?;
        fs::write(&mqm_path, buf).map_err(|e| Error::io(&mqm_path, e))?;

        let mut manifest = MetricManifest::default();
        for t in &self.tables {
            let rel = PathBuf::from("scores").join(format!("{}.tsv", file_stem(&t.metric_name)));
            let path = dir.join(&rel);
            fs::write(&path, t.to_keyed_tsv()).map_err(|e| Error::io(&path, e))?;
            manifest.metrics.push(MetricEntry {
                name: t.metric_name.clone(),
                reference_based: t.is_reference_based,
                range: Some(t.declared_range),
                layout: LayoutKind::TsvKeyed,
                files: vec![ScoreFile::Path(rel)],
                segments: None,
            });
        }
        let mpath = dir.join("metrics.toml");
        fs::write(&mpath, manifest.to_toml()).map_err(|e| Error::io(&mpath, e))?;
        Ok(manifest)
    }

    pub fn class_counts(&self) -> BTreeMap<QualityClass, usize> {
        let mut out = BTreeMap::new();
        for r in self.corpus.records() {
            *out.entry(r.quality_class).or_insert(0) += 1;
        }
        out
    }
}

/// Result of [`oracle_grouped_corr`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub value: f64,
    pub excluded: BTreeSet<String>,
}

/// Naive re-implementation of the Group-by-Src correlation for cross-checking.
///
/// Quadratic rank counting, a direct per-group loop and a direct mean; shares
/// no code with [`crate::stats`]. Meant for small corpora only.
pub fn oracle_grouped_corr(
    corpus: &EvalCorpus,
    metric_name: &str,
    subset: Subset,
    corr_type: CorrType,
) -> Result<OracleOutcome> {
    if corpus.len() > 10_000 {
        return Err(Error::InvalidInput("oracle is limited to 10,000 records".into()));
    }
    let column = corpus.metric_column(metric_name)?;
    let mut groups: BTreeMap<&str, Vec<(f64, f64, QualityClass)>> = BTreeMap::new();
    for (rec, &m) in corpus.records().iter().zip(column) {
        groups
            .entry(rec.key.source_id.as_str())
            .or_default()
            .push((rec.gold_mqm, m, rec.quality_class));
    }

    let mut total = 0.0;
    let mut used = 0usize;
    let mut excluded = BTreeSet::new();
    for (source, items) in groups {
        if subset == Subset::Hq && items.iter().any(|(_, _, c)| *c == QualityClass::NonHq) {
            continue;
        }
        let gold: Vec<f64> = items.iter().map(|t| t.0).collect();
        let pred: Vec<f64> = items.iter().map(|t| t.1).collect();
        let flat = |v: &[f64]| v.iter().all(|x| *x == v[0]);
        if items.len() < 2 || flat(&gold) || flat(&pred) {
            excluded.insert(source.to_string());
            continue;
        }
        let r = match corr_type {
            CorrType::Pearson => naive_pearson(&gold, &pred),
            CorrType::Spearman => naive_pearson(&naive_ranks(&gold), &naive_ranks(&pred)),
        };
        total += r;
        used += 1;
    }
    if used == 0 {
        return Err(Error::UndefinedCorrelation {
            reason: "oracle: every group degenerate".into(),
            n_groups_excluded: excluded.len(),
        });
    }
    Ok(OracleOutcome {
        value: total / used as f64,
        excluded,
    })
}

fn naive_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let below = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let (mx, my) = (mean(x), mean(y));
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..x.len() {
        cov += (x[i] - mx) * (y[i] - my) / (n - 1.0);
        vx += (x[i] - mx).powi(2) / (n - 1.0);
        vy += (y[i] - my).powi(2) / (n - 1.0);
    }
    (cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0)
}
