//! Tabular export of correlation results.

use std::collections::BTreeMap;

use serde::Serialize;

use super::analysis::{correlate, AnalysisSpec, CorrelationResult};
use crate::corpus::EvalCorpus;
use crate::error::{Error, Result};

/// A correlation that could not be computed, with how many groups were dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Undefined {
    pub reason: String,
    pub n_groups_excluded: usize,
}

/// One (metric, spec) cell: a value or an `n/a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRow {
    pub metric_name: String,
    pub spec: AnalysisSpec,
    pub outcome: std::result::Result<CorrelationResult, Undefined>,
}

impl AnalysisRow {
    pub fn is_defined(&self) -> bool {
        self.outcome.is_ok()
    }
}

/// Run one analysis; undefined correlations become `n/a` rows, other errors propagate.
pub fn run_analysis(corpus: &EvalCorpus, metric_name: &str, spec: &AnalysisSpec) -> Result<AnalysisRow> {
    let outcome = match correlate(corpus, metric_name, spec) {
        Ok(r) => Ok(r),
        Err(Error::UndefinedCorrelation {
            reason,
            n_groups_excluded,
        }) => Err(Undefined {
            reason,
            n_groups_excluded,
        }),
        Err(e) => return Err(e),
    };
    Ok(AnalysisRow {
        metric_name: metric_name.to_string(),
        spec: *spec,
        outcome,
    })
}

pub const CSV_HEADER: [&str; 11] = [
    "metric",
    "grouping",
    "subset",
    "corr_type",
    "value",
    "std",
    "n_items",
    "n_groups_used",
    "n_groups_excluded",
    "target_sources",
    "repeats",
];

/// CSV with full-precision values; undefined cells read `n/a`.
pub fn to_csv(rows: &[AnalysisRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(err)?;
    for row in rows {
        let s = &row.spec;
        let (target, repeats) = match s.subsample {
            Some(sub) => (sub.target_sources.to_string(), sub.repeats.to_string()),
            None => (String::new(), String::new()),
        };
        let (value, std, n_items, used, excluded) = match &row.outcome {
            Ok(r) => (
                r.value.to_string(),
                r.std.map(|v| v.to_string()).unwrap_or_default(),
                r.n_items.to_string(),
                r.n_groups_used.to_string(),
                r.n_groups_excluded.to_string(),
            ),
            Err(u) => (
                "n/a".to_string(),
                String::new(),
                String::new(),
                "0".to_string(),
                u.n_groups_excluded.to_string(),
            ),
        };
        w.write_record([
            row.metric_name.as_str(),
            s.grouping.as_str(),
            s.subset.as_str(),
            s.corr_type.as_str(),
            &value,
            &std,
            &n_items,
            &used,
            &excluded,
            &target,
            &repeats,
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_json(rows: &[AnalysisRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

fn column_label(spec: &AnalysisSpec, mixed_types: bool) -> String {
    if mixed_types {
        format!("{} ({})", spec.label(), spec.corr_type.as_str())
    } else {
        spec.label()
    }
}

/// Markdown table with one row per metric and one column per analysis, in first-seen order.
///
/// Values are shown to three decimals with `± std` for subsampled cells. A second
/// table lists every cell where groups were excluded.
pub fn to_markdown(rows: &[AnalysisRow]) -> String {
    let mixed = rows
        .iter()
        .any(|r| rows.first().is_some_and(|f| f.spec.corr_type != r.spec.corr_type));
    let mut columns: Vec<String> = Vec::new();
    let mut metrics: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), String> = BTreeMap::new();
    let mut exclusions = Vec::new();

    for row in rows {
        let label = column_label(&row.spec, mixed);
        let c = columns.iter().position(|l| *l == label).unwrap_or_else(|| {
            columns.push(label.clone());
            columns.len() - 1
        });
        let m = metrics.iter().position(|n| *n == row.metric_name).unwrap_or_else(|| {
            metrics.push(&row.metric_name);
            metrics.len() - 1
        });
        let text = match &row.outcome {
            Ok(r) => {
                if r.n_groups_excluded > 0 {
                    exclusions.push((
                        row.metric_name.as_str(),
                        label.clone(),
                        r.n_groups_used,
                        r.n_groups_excluded,
                    ));
                }
                match r.std {
                    Some(sd) => format!("{:.3} ± {:.3}", r.value, sd),
                    None => format!("{:.3}", r.value),
                }
            }
            Err(u) => {
                exclusions.push((row.metric_name.as_str(), label.clone(), 0, u.n_groups_excluded));
                "n/a".to_string()
            }
        };
        cells.insert((m, c), text);
    }

    let mut out = String::new();
    out.push_str("| Metric |");
    for c in &columns {
        out.push_str(&format!(" {c} |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(columns.len()));
    out.push('\n');
    for (m, name) in metrics.iter().enumerate() {
        out.push_str(&format!("| {name} |"));
        for c in 0..columns.len() {
            let cell = cells.get(&(m, c)).map(String::as_str).unwrap_or("");
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
    if !exclusions.is_empty() {
        out.push_str("\nExcluded groups (constant gold or metric scores):\n\n");
        out.push_str("| Metric | Analysis | Groups used | Groups excluded |\n|---|---|---:|---:|\n");
        for (metric, label, used, excluded) in exclusions {
            out.push_str(&format!("| {metric} | {label} | {used} | {excluded} |\n"));
        }
    }
    out
}
