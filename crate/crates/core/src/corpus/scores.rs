//! Precomputed metric score tables.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::SegmentKey;
use crate::error::{Error, Result};

/// Nominal output range of a metric, `min < max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct ScoreRange {
    min: f64,
    max: f64,
}

impl ScoreRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Config(format!("invalid score range [{min}, {max}]")));
        }
        Ok(ScoreRange { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

impl TryFrom<[f64; 2]> for ScoreRange {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        ScoreRange::new(v[0], v[1])
    }
}

impl From<ScoreRange> for [f64; 2] {
    fn from(r: ScoreRange) -> Self {
        [r.min, r.max]
    }
}

/// Per-segment scores of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricScoreTable {
    pub metric_name: String,
    pub is_reference_based: bool,
    pub declared_range: ScoreRange,
    pub scores: BTreeMap<SegmentKey, f64>,
}

impl MetricScoreTable {
    pub fn new(metric_name: impl Into<String>, is_reference_based: bool, declared_range: ScoreRange) -> Self {
        MetricScoreTable {
            metric_name: metric_name.into(),
            is_reference_based,
            declared_range,
            scores: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: SegmentKey, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::InvalidInput(format!(
                "{}: non-finite score for {key}",
                self.metric_name
            )));
        }
        if self.scores.insert(key.clone(), score).is_some() {
            return Err(Error::InvalidInput(format!(
                "{}: duplicate score for {key}",
                self.metric_name
            )));
        }
        Ok(())
    }

    /// Fold another table of the same metric into this one.
    pub fn merge(&mut self, other: MetricScoreTable) -> Result<()> {
        if other.metric_name != self.metric_name {
            return Err(Error::Config(format!(
                "cannot merge {} into {}",
                other.metric_name, self.metric_name
            )));
        }
        for (k, v) in other.scores {
            self.insert(k, v)?;
        }
        Ok(())
    }

    /// Write as `system<TAB>source_id<TAB>score`.
    pub fn to_keyed_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.scores {
            out.push_str(&format!("{}\t{}\t{}\n", k.system, k.source_id, v));
        }
        out
    }
}

/// Physical layout of a score file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoreLayout {
    /// `system<TAB>source_id<TAB>score`, optional header.
    TsvKeyed,
    /// One score per line for a single system, in segment-manifest order.
    OneScorePerLine { system: String, segments: Vec<String> },
    /// `system<TAB>score` lines; each system's lines follow segment-manifest order.
    SystemScoreLines { segments: Vec<String> },
}

fn parse_score(source_name: &str, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(source_name, line, format!("score {field:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(
            source_name,
            line,
            format!("score {field:?} is not finite"),
        ));
    }
    Ok(v)
}

/// Parse one score file into a table for `table`'s metric.
pub fn parse_score_table<R: BufRead>(
    reader: R,
    source_name: &str,
    language_pair: &str,
    mut table: MetricScoreTable,
    layout: &ScoreLayout,
) -> Result<MetricScoreTable> {
    let key = |source_id: &str, system: &str| SegmentKey::new(language_pair, source_id, system);
    let insert = |table: &mut MetricScoreTable, lineno: usize, k: SegmentKey, v: f64| {
        if table.scores.contains_key(&k) {
            return Err(Error::parse(source_name, lineno, format!("duplicate key {k}")));
        }
        table.scores.insert(k, v);
        Ok(())
    };

    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(source_name, idx + 1, e.to_string()))?;
        let line = line.strip_suffix('\r').map(str::to_string).unwrap_or(line);
        lines.push((idx + 1, line));
    }

    match layout {
        ScoreLayout::TsvKeyed => {
            for (i, (lineno, line)) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 3 {
                    return Err(Error::parse(
                        source_name,
                        *lineno,
                        format!("expected 3 columns, found {}", fields.len()),
                    ));
                }
                if i == 0 && fields[2].trim().eq_ignore_ascii_case("score") {
                    continue;
                }
                let v = parse_score(source_name, *lineno, fields[2])?;
                insert(&mut table, *lineno, key(fields[1], fields[0]), v)?;
            }
        }
        ScoreLayout::OneScorePerLine { system, segments } => {
            // Trailing blank lines are tolerated; anything else must align.
            while lines.last().is_some_and(|(_, l)| l.trim().is_empty()) {
                lines.pop();
            }
            if lines.len() != segments.len() {
                return Err(Error::Join(format!(
                    "{source_name}: {} scores for {} segments",
                    lines.len(),
                    segments.len()
                )));
            }
            for ((lineno, line), seg) in lines.iter().zip(segments) {
                let v = parse_score(source_name, *lineno, line)?;
                insert(&mut table, *lineno, key(seg, system), v)?;
            }
        }
        ScoreLayout::SystemScoreLines { segments } => {
            let mut per_system: BTreeMap<String, usize> = BTreeMap::new();
            for (lineno, line) in &lines {
                if line.trim().is_empty() {
                    continue;
                }
                let (system, score) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::parse(source_name, *lineno, "expected system<TAB>score"))?;
                let pos = per_system.entry(system.to_string()).or_insert(0);
                let seg = segments.get(*pos).ok_or_else(|| {
                    Error::Join(format!(
                        "{source_name}:{lineno}: system {system} has more than {} scores",
                        segments.len()
                    ))
                })?;
                *pos += 1;
                let v = parse_score(source_name, *lineno, score)?;
                insert(&mut table, *lineno, key(seg, system), v)?;
            }
            if let Some((sys, n)) = per_system.iter().find(|(_, n)| **n != segments.len()) {
                return Err(Error::Join(format!(
                    "{source_name}: system {sys} has {n} scores for {} segments",
                    segments.len()
                )));
            }
        }
    }
    Ok(table)
}
