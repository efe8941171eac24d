//! Gold MQM scoring and quality classes.
//!
//! A rater's segment score is the negated sum of severity penalties
//! (minor 1, major 5 by default). Segments with no penalized errors score 0.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{ErrorAnnotation, EvalCorpus, SegmentKey, Severity, SourceIdScheme};
use crate::error::{Error, Result};

/// Score at or below which a translation has a major error.
pub const MAJOR_ERROR_BOUNDARY: f64 = -5.0;

/// Penalty per severity. Penalties are nonnegative and applied negated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeverityWeights {
    pub minor: f64,
    pub major: f64,
    pub neutral: f64,
    /// Maximum total penalty per rater, if any.
    pub cap: Option<f64>,
}

impl Default for SeverityWeights {
    fn default() -> Self {
        SeverityWeights {
            minor: 1.0,
            major: 5.0,
            neutral: 0.0,
            cap: None,
        }
    }
}

impl SeverityWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.minor, self.major, self.neutral].into_iter().chain(self.cap);
        for w in all {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Config(format!("severity weight {w} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn penalty(&self, severity: Severity) -> f64 {
        match severity {
            Severity::Major => self.major,
            Severity::Minor => self.minor,
            Severity::Neutral => self.neutral,
            Severity::NoError => 0.0,
        }
    }
}

/// Score one rater's judgments of one translation from the severities they marked.
///
/// Penalties are accumulated per severity count, so the result does not depend on order.
pub fn score_severities<I: IntoIterator<Item = Severity>>(severities: I, weights: &SeverityWeights) -> f64 {
    let (mut major, mut minor, mut neutral) = (0u64, 0u64, 0u64);
    for s in severities {
        match s {
            Severity::Major => major += 1,
            Severity::Minor => minor += 1,
            Severity::Neutral => neutral += 1,
            Severity::NoError => {}
        }
    }
    let penalty = major as f64 * weights.major + minor as f64 * weights.minor + neutral as f64 * weights.neutral;
    let score = if penalty == 0.0 { 0.0 } else { -penalty };
    match weights.cap {
        Some(cap) => score.max(-cap),
        None => score,
    }
}

/// Score one (translation, rater) error list. An empty list scores 0.
pub fn score_rater(errors: &[ErrorAnnotation], weights: &SeverityWeights) -> f64 {
    score_severities(errors.iter().map(|e| e.severity), weights)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Mean,
    Min,
    Max,
}

/// Combine per-rater scores into one gold score.
pub fn gold_segment_score(per_rater: &[f64], aggregation: Aggregation) -> Result<f64> {
    if per_rater.is_empty() {
        return Err(Error::InvalidInput("no rater scores to aggregate".into()));
    }
    Ok(match aggregation {
        Aggregation::Mean => per_rater.iter().sum::<f64>() / per_rater.len() as f64,
        Aggregation::Min => per_rater.iter().copied().fold(f64::INFINITY, f64::min),
        Aggregation::Max => per_rater.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QualityClass {
    /// Gold score exactly 0.
    #[serde(rename = "HQZero")]
    HqZero,
    /// Minor errors only.
    #[serde(rename = "HQMinor")]
    HqMinor,
    /// At least one major error.
    #[serde(rename = "NonHQ")]
    NonHq,
}

impl QualityClass {
    pub fn is_hq(self) -> bool {
        self != QualityClass::NonHq
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QualityClass::HqZero => "HQZero",
            QualityClass::HqMinor => "HQMinor",
            QualityClass::NonHq => "NonHQ",
        }
    }
}

impl fmt::Display for QualityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a score of exactly -5 counts as high quality.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HqBoundary {
    /// HQ means score > -5.
    #[default]
    Exclusive,
    /// HQ means score >= -5.
    Inclusive,
}

pub fn classify(score: f64) -> Result<QualityClass> {
    classify_with(score, HqBoundary::Exclusive)
}

pub fn classify_with(score: f64, boundary: HqBoundary) -> Result<QualityClass> {
    if !score.is_finite() || score > 0.0 {
        return Err(Error::InvalidInput(format!(
            "MQM score {score} must be finite and <= 0"
        )));
    }
    let hq = match boundary {
        HqBoundary::Exclusive => score > MAJOR_ERROR_BOUNDARY,
        HqBoundary::Inclusive => score >= MAJOR_ERROR_BOUNDARY,
    };
    Ok(if score == 0.0 {
        QualityClass::HqZero
    } else if hq {
        QualityClass::HqMinor
    } else {
        QualityClass::NonHq
    })
}

/// Gold score of one translation with the rater scores it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MqmGold {
    pub key: SegmentKey,
    pub score: f64,
    pub rater_scores: Vec<f64>,
    pub n_raters: usize,
}

/// Options for turning annotations into gold scores.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GoldOptions {
    pub weights: SeverityWeights,
    pub aggregation: Aggregation,
    pub source_id: SourceIdScheme,
}

/// Score every translation that has at least one annotation row.
///
/// Rows are grouped by (translation, rater); each rater is scored and the
/// rater scores are aggregated. Raters appear in sorted order in `rater_scores`.
pub fn gold_scores(
    annotations: &[ErrorAnnotation],
    language_pair: &str,
    options: &GoldOptions,
) -> Result<BTreeMap<SegmentKey, MqmGold>> {
    options.weights.validate()?;
    let mut by_key: BTreeMap<SegmentKey, BTreeMap<&str, Vec<Severity>>> = BTreeMap::new();
    for a in annotations {
        let key = SegmentKey::new(language_pair, a.source_id(options.source_id), a.system.as_str());
        by_key
            .entry(key)
            .or_default()
            .entry(a.rater.as_str())
            .or_default()
            .push(a.severity);
    }
    by_key
        .into_iter()
        .map(|(key, raters)| {
            let rater_scores: Vec<f64> = raters
                .into_values()
                .map(|sev| score_severities(sev, &options.weights))
                .collect();
            let score = gold_segment_score(&rater_scores, options.aggregation)?;
            let gold = MqmGold {
                key: key.clone(),
                score,
                n_raters: rater_scores.len(),
                rater_scores,
            };
            Ok((key, gold))
        })
        .collect()
}

/// Flatten [`gold_scores`] output to the map [`build_corpus`](crate::corpus::build_corpus) takes.
pub fn gold_map(gold: &BTreeMap<SegmentKey, MqmGold>) -> BTreeMap<SegmentKey, f64> {
    gold.iter().map(|(k, g)| (k.clone(), g.score)).collect()
}

/// Share of records in each quality class, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distribution {
    pub n: usize,
    pub pct_zero: f64,
    pub pct_hq_minor: f64,
    pub pct_nonhq: f64,
}

pub fn distribution_of<I: IntoIterator<Item = QualityClass>>(classes: I) -> Result<Distribution> {
    let (mut zero, mut minor, mut non) = (0usize, 0usize, 0usize);
    for c in classes {
        match c {
            QualityClass::HqZero => zero += 1,
            QualityClass::HqMinor => minor += 1,
            QualityClass::NonHq => non += 1,
        }
    }
    let n = zero + minor + non;
    if n == 0 {
        return Err(Error::InvalidInput("distribution of an empty corpus".into()));
    }
    let pct = |k: usize| 100.0 * k as f64 / n as f64;
    Ok(Distribution {
        n,
        pct_zero: pct(zero),
        pct_hq_minor: pct(minor),
        pct_nonhq: pct(non),
    })
}

pub fn distribution(corpus: &EvalCorpus) -> Result<Distribution> {
    distribution_of(corpus.records().iter().map(|r| r.quality_class))
}

/// Write `system<TAB>source_id<TAB>gold_mqm<TAB>class` for every record.
pub fn write_gold_tsv<W: Write>(mut w: W, corpus: &EvalCorpus) -> Result<()> {
    for r in corpus.records() {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            r.key.system, r.key.source_id, r.gold_mqm, r.quality_class
        )
        .map_err(|e| Error::io("<gold writer>", e))?;
    }
    Ok(())
}
