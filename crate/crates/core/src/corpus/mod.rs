//! Ingestion of MQM annotations and metric scores, and the aligned corpus they join into.

mod annotation;
mod manifest;
mod scores;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use annotation::{
    parse_mqm_str, parse_mqm_tsv, write_mqm_tsv, ColumnMap, ErrorAnnotation, HeaderMode, MqmFormat, MqmParse, Severity,
    SeverityRemap, SourceIdScheme, UnknownSeverity, MQM_HEADER,
};
pub use manifest::{LayoutKind, MetricEntry, MetricManifest, ScoreFile};
pub use scores::{parse_score_table, MetricScoreTable, ScoreLayout, ScoreRange};

use crate::error::{Error, Result};
use crate::mqm::{classify_with, HqBoundary, QualityClass};

/// Identifies one translation: a system's output for one source segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentKey {
    pub language_pair: String,
    pub source_id: String,
    pub system: String,
}

impl SegmentKey {
    pub fn new(language_pair: impl Into<String>, source_id: impl Into<String>, system: impl Into<String>) -> Self {
        SegmentKey {
            language_pair: language_pair.into(),
            source_id: source_id.into(),
            system: system.into(),
        }
    }
}

impl fmt::Display for SegmentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.language_pair, self.source_id, self.system)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub key: SegmentKey,
    pub translation: String,
    pub gold_mqm: f64,
    pub quality_class: QualityClass,
}

/// Options for [`build_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinOptions {
    /// Reject incomplete joins instead of dropping records.
    pub strict: bool,
    /// Scheme used to key annotations when looking up translation text.
    pub source_id: SourceIdScheme,
    pub hq_boundary: HqBoundary,
}

impl Default for JoinOptions {
    fn default() -> Self {
        JoinOptions {
            strict: true,
            source_id: SourceIdScheme::DocSeg,
            hq_boundary: HqBoundary::default(),
        }
    }
}

/// Immutable, aligned table of translations with gold MQM scores and metric scores.
///
/// Records are ordered by [`SegmentKey`], so all translations of one source are contiguous.
#[derive(Debug, Clone)]
pub struct EvalCorpus {
    language_pair: String,
    systems: Vec<String>,
    sources: Vec<String>,
    records: Vec<Record>,
    groups: Vec<Range<usize>>,
    metrics: Vec<MetricScoreTable>,
    columns: Vec<Vec<f64>>,
    dropped_in_join: usize,
}

impl EvalCorpus {
    pub fn language_pair(&self) -> &str {
        &self.language_pair
    }

    /// Number of distinct systems (N).
    pub fn n_systems(&self) -> usize {
        self.systems.len()
    }

    /// Number of distinct source segments (M).
    pub fn m_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.records.len() == self.systems.len() * self.sources.len()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    /// Source ids in sorted order; index `i` matches `source_groups()[i]`.
    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    /// Record index range for each source.
    pub fn source_groups(&self) -> &[Range<usize>] {
        &self.groups
    }

    pub fn metrics(&self) -> &[MetricScoreTable] {
        &self.metrics
    }

    pub fn metric(&self, name: &str) -> Option<&MetricScoreTable> {
        self.metrics.iter().find(|m| m.metric_name == name)
    }

    /// Metric scores aligned with [`records`](Self::records).
    pub fn metric_column(&self, name: &str) -> Result<&[f64]> {
        self.metrics
            .iter()
            .position(|m| m.metric_name == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::Config(format!("metric {name:?} is not registered")))
    }

    pub fn gold_column(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.gold_mqm).collect()
    }

    /// Records dropped by a lenient join because some metric lacked a score.
    pub fn dropped_in_join(&self) -> usize {
        self.dropped_in_join
    }

    /// Canonical TSV dump: one row per record, metrics in registration order.
    ///
    /// Tabs, newlines and backslashes in translation text are escaped.
    pub fn write_canonical_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<corpus writer>", e);
        let mut header = vec![
            "language_pair",
            "source_id",
            "system",
            "gold_mqm",
            "quality_class",
            "translation",
        ];
        header.extend(self.metrics.iter().map(|m| m.metric_name.as_str()));
        writeln!(w, "{}", header.join("\t")).map_err(io)?;
        for (i, r) in self.records.iter().enumerate() {
            write!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.key.language_pair,
                r.key.source_id,
                r.key.system,
                r.gold_mqm,
                r.quality_class,
                escape(&r.translation)
            )
            .map_err(io)?;
            for col in &self.columns {
                write!(w, "\t{}", col[i]).map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        Ok(())
    }

    pub fn to_canonical_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.write_canonical_tsv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("corpus text is UTF-8")
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn summarize_keys<'a>(keys: impl Iterator<Item = &'a SegmentKey>) -> String {
    let keys: Vec<_> = keys.collect();
    let shown: Vec<String> = keys.iter().take(10).map(|k| k.to_string()).collect();
    if keys.len() > shown.len() {
        format!("{} and {} more", shown.join(", "), keys.len() - shown.len())
    } else {
        shown.join(", ")
    }
}

/// Join gold scores and metric tables into an [`EvalCorpus`].
///
/// `annotations` only supply translation text; the record set is the key set of `gold`.
pub fn build_corpus(
    annotations: &[ErrorAnnotation],
    gold: &BTreeMap<SegmentKey, f64>,
    tables: Vec<MetricScoreTable>,
    options: JoinOptions,
) -> Result<EvalCorpus> {
    let language_pair = match gold.keys().next() {
        Some(k) => k.language_pair.clone(),
        None => return Err(Error::Join("no gold scores to join".into())),
    };
    let all_keys = gold.keys().chain(tables.iter().flat_map(|t| t.scores.keys()));
    if let Some(k) = all_keys.into_iter().find(|k| k.language_pair != language_pair) {
        return Err(Error::Join(format!(
            "inconsistent language pair: {} vs {language_pair}",
            k.language_pair
        )));
    }
    let mut names = BTreeSet::new();
    for t in &tables {
        if !names.insert(t.metric_name.as_str()) {
            return Err(Error::Join(format!("metric {} registered twice", t.metric_name)));
        }
    }

    let keys: Vec<&SegmentKey> = if options.strict {
        for t in &tables {
            let missing: Vec<_> = gold.keys().filter(|k| !t.scores.contains_key(*k)).collect();
            if !missing.is_empty() {
                return Err(Error::Join(format!(
                    "metric {} is missing scores for {}",
                    t.metric_name,
                    summarize_keys(missing.into_iter())
                )));
            }
            let unknown: Vec<_> = t.scores.keys().filter(|k| !gold.contains_key(*k)).collect();
            if !unknown.is_empty() {
                return Err(Error::Join(format!(
                    "metric {} has scores for segments without gold: {}",
                    t.metric_name,
                    summarize_keys(unknown.into_iter())
                )));
            }
        }
        gold.keys().collect()
    } else {
        let kept: Vec<_> = gold
            .keys()
            .filter(|k| tables.iter().all(|t| t.scores.contains_key(*k)))
            .collect();
        let dropped = gold.len() - kept.len();
        if dropped > 0 {
            log::warn!("lenient join dropped {dropped} records lacking a metric score");
        }
        kept
    };
    if keys.is_empty() {
        return Err(Error::Join("join produced no records".into()));
    }

    let mut text: HashMap<SegmentKey, &str> = HashMap::new();
    for a in annotations {
        let k = SegmentKey::new(
            language_pair.as_str(),
            a.source_id(options.source_id),
            a.system.as_str(),
        );
        text.entry(k).or_insert(a.target_text.as_str());
    }

    let mut records = Vec::with_capacity(keys.len());
    for k in &keys {
        let score = gold[*k];
        let quality_class = classify_with(score, options.hq_boundary)
            .map_err(|_| Error::Join(format!("gold score {score} for {k} is positive")))?;
        records.push(Record {
            key: (*k).clone(),
            translation: text.get(*k).copied().unwrap_or_default().to_string(),
            gold_mqm: score,
            quality_class,
        });
    }

    let systems: Vec<String> = records
        .iter()
        .map(|r| r.key.system.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut sources = Vec::new();
    let mut groups: Vec<Range<usize>> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if sources.last() != Some(&r.key.source_id) {
            sources.push(r.key.source_id.clone());
            groups.push(i..i + 1);
        } else {
            groups.last_mut().expect("group opened above").end = i + 1;
        }
    }

    if options.strict && records.len() != systems.len() * sources.len() {
        return Err(Error::Join(format!(
            "incomplete grid: {} records for {} systems x {} sources",
            records.len(),
            systems.len(),
            sources.len()
        )));
    }

    let mut metrics = Vec::with_capacity(tables.len());
    let mut columns = Vec::with_capacity(tables.len());
    for mut t in tables {
        let column: Vec<f64> = records.iter().map(|r| t.scores[&r.key]).collect();
        if !options.strict {
            t.scores.retain(|k, _| keys.binary_search(&k).is_ok());
        }
        metrics.push(t);
        columns.push(column);
    }

    Ok(EvalCorpus {
        language_pair,
        systems,
        sources,
        dropped_in_join: gold.len() - records.len(),
        records,
        groups,
        metrics,
        columns,
    })
}
