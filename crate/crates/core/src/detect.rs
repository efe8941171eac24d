//! Detection of error-free (HQ-Zero) translations from metric scores.
//!
//! A score is *valid* when its min-max normalization over the metric's
//! declared range reaches the threshold (0.99 by default). Valid scores are
//! the metric's prediction that a translation has no errors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{EvalCorpus, MetricScoreTable, ScoreRange};
use crate::error::{Error, Result};
use crate::mqm::QualityClass;

pub const DEFAULT_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub declared_range: ScoreRange,
    pub clamp: bool,
    pub threshold: f64,
}

impl NormalizationSpec {
    pub fn new(declared_range: ScoreRange) -> Self {
        NormalizationSpec {
            declared_range,
            clamp: true,
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn for_metric(table: &MetricScoreTable) -> Self {
        Self::new(table.declared_range)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Config(format!("threshold {} outside (0, 1]", self.threshold)));
        }
        Ok(())
    }
}

/// `(score - min) / (max - min)`, clamped to `[0, 1]` when `clamp` is set.
pub fn normalize(score: f64, spec: &NormalizationSpec) -> Result<f64> {
    if !score.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite score {score}")));
    }
    let r = spec.declared_range;
    // Endpoints map exactly: min -> 0 and max -> 1.
    let v = if score == r.max() {
        1.0
    } else {
        (score - r.min()) / r.width()
    };
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else if spec.clamp {
        Ok(v.clamp(0.0, 1.0))
    } else {
        Err(Error::OutOfRange {
            score,
            min: r.min(),
            max: r.max(),
        })
    }
}

pub fn is_valid(score: f64, spec: &NormalizationSpec) -> Result<bool> {
    Ok(normalize(score, spec)? >= spec.threshold)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemTally {
    pub valid_on_hqzero: usize,
    pub valid_on_nonhqzero: usize,
    pub abs_diff: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub metric_name: String,
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    /// Absent when nothing was predicted valid.
    pub precision: Option<f64>,
    /// Absent when the corpus has no HQ-Zero record.
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub per_system: BTreeMap<String, SystemTally>,
    /// Scores that fell outside the declared range and were clamped.
    pub n_clamped: usize,
}

impl DetectionReport {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn f1_score(precision: Option<f64>, recall: Option<f64>) -> Option<f64> {
    let (p, r) = (precision?, recall?);
    Some(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
}

/// Predicted-valid flags aligned with the corpus records.
fn predictions(corpus: &EvalCorpus, metric_name: &str, spec: &NormalizationSpec) -> Result<(Vec<bool>, usize)> {
    spec.validate()?;
    let column = corpus.metric_column(metric_name)?;
    let r = spec.declared_range;
    let mut clamped = 0;
    let flags = column
        .iter()
        .map(|&s| {
            if s < r.min() || s > r.max() {
                clamped += 1;
            }
            is_valid(s, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    if clamped > 0 {
        log::warn!(
            "{metric_name}: {clamped} scores outside [{}, {}] were clamped",
            r.min(),
            r.max()
        );
    }
    Ok((flags, clamped))
}

/// Confusion counts and P/R/F1 with HQ-Zero as the positive class.
pub fn detection_report(corpus: &EvalCorpus, metric_name: &str, spec: &NormalizationSpec) -> Result<DetectionReport> {
    let (valid, n_clamped) = predictions(corpus, metric_name, spec)?;
    let mut per_system: BTreeMap<String, SystemTally> = corpus
        .systems()
        .iter()
        .map(|s| (s.clone(), SystemTally::default()))
        .collect();
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (rec, &v) in corpus.records().iter().zip(&valid) {
        let positive = rec.quality_class == QualityClass::HqZero;
        let tally = per_system.get_mut(&rec.key.system).expect("system registered");
        match (positive, v) {
            (true, true) => {
                tp += 1;
                tally.valid_on_hqzero += 1;
            }
            (false, true) => {
                fp += 1;
                tally.valid_on_nonhqzero += 1;
            }
            (true, false) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    for t in per_system.values_mut() {
        t.abs_diff = t.valid_on_hqzero.abs_diff(t.valid_on_nonhqzero);
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Ok(DetectionReport {
        metric_name: metric_name.to_string(),
        threshold: spec.threshold,
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        f1: f1_score(precision, recall),
        per_system,
        n_clamped,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BiasRow {
    pub system: String,
    pub valid_on_hqzero: usize,
    pub valid_on_nonhqzero: usize,
    pub abs_diff: usize,
}

/// Per-system valid-score tallies, largest `abs_diff` first (ties by system name).
pub fn bias_report(corpus: &EvalCorpus, metric_name: &str, spec: &NormalizationSpec) -> Result<Vec<BiasRow>> {
    Ok(bias_rows(&detection_report(corpus, metric_name, spec)?))
}

pub fn bias_rows(report: &DetectionReport) -> Vec<BiasRow> {
    let mut rows: Vec<BiasRow> = report
        .per_system
        .iter()
        .map(|(system, t)| BiasRow {
            system: system.clone(),
            valid_on_hqzero: t.valid_on_hqzero,
            valid_on_nonhqzero: t.valid_on_nonhqzero,
            abs_diff: t.abs_diff,
        })
        .collect();
    rows.sort_by(|a, b| b.abs_diff.cmp(&a.abs_diff).then_with(|| a.system.cmp(&b.system)));
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Normalized-score histogram over `[0, 1]` for HQ-Zero records; the last bin is closed.
pub fn hqzero_histogram(
    corpus: &EvalCorpus,
    metric_name: &str,
    spec: &NormalizationSpec,
    bins: usize,
) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let column = corpus.metric_column(metric_name)?;
    let mut counts = vec![0usize; bins];
    for (rec, &s) in corpus.records().iter().zip(column) {
        if rec.quality_class != QualityClass::HqZero {
            continue;
        }
        let v = normalize(s, spec)?;
        let b = ((v * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: i as f64 / bins as f64,
            hi: (i + 1) as f64 / bins as f64,
            count,
        })
        .collect())
}

/// Integer percent, rounding half away from zero.
pub fn percent(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{}", (v * 100.0).round() as i64),
        None => "n/a".to_string(),
    }
}

pub fn reports_to_json(reports: &[DetectionReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// `| Metric | P | R | F1 |` with rounded percentages, headed by the language pair and HQ-Zero count.
pub fn reports_to_markdown(language_pair: &str, n_hqzero: usize, reports: &[DetectionReport]) -> String {
    let mut out = format!(
        "### {} ({n_hqzero})\n\n| Metric | P | R | F1 |\n|---|---:|---:|---:|\n",
        language_pair.to_uppercase()
    );
    for r in reports {
        out.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            r.metric_name,
            percent(r.precision),
            percent(r.recall),
            percent(r.f1)
        ));
    }
    out
}

/// Flat CSV of the confusion counts and full-precision rates.
pub fn reports_to_csv(reports: &[DetectionReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record([
        "metric",
        "threshold",
        "tp",
        "fp",
        "fn",
        "tn",
        "precision",
        "recall",
        "f1",
        "n_clamped",
    ])
    .map_err(err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in reports {
        w.write_record([
            r.metric_name.clone(),
            r.threshold.to_string(),
            r.tp.to_string(),
            r.fp.to_string(),
            r.fn_.to_string(),
            r.tn.to_string(),
            opt(r.precision),
            opt(r.recall),
            opt(r.f1),
            r.n_clamped.to_string(),
        ])
        .map_err(err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?).expect("utf-8"))
}

pub fn bias_to_csv(rows: &[BiasRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(["system", "valid_hqzero", "valid_nonhqzero", "abs_diff"])
        .map_err(err)?;
    for r in rows {
        w.write_record([
            r.system.clone(),
            r.valid_on_hqzero.to_string(),
            r.valid_on_nonhqzero.to_string(),
            r.abs_diff.to_string(),
        ])
        .map_err(err)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?).expect("utf-8"))
}

pub fn histogram_to_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for b in bins {
        out.push_str(&format!("{},{},{}\n", b.lo, b.hi, b.count));
    }
    out
}
