//! MQM error annotations and the tab-separated format they ship in.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Severity of one marked error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Major,
    Minor,
    Neutral,
    NoError,
}

impl Severity {
    /// Canonical spelling used when writing TSV.
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Major => "major",
            Severity::Minor => "minor",
            Severity::Neutral => "neutral",
            Severity::NoError => "no-error",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| match c {
                '_' | ' ' => '-',
                c => c.to_ascii_lowercase(),
            })
            .collect();
        match norm.as_str() {
            "major" => Ok(Severity::Major),
            "minor" => Ok(Severity::Minor),
            "neutral" => Ok(Severity::Neutral),
            "no-error" | "noerror" => Ok(Severity::NoError),
            _ => Err(format!("unknown severity {s:?}")),
        }
    }
}

/// One rater-marked error (or a `no-error` row) for one translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorAnnotation {
    pub system: String,
    pub doc: String,
    pub doc_id: String,
    pub seg_id: u64,
    pub rater: String,
    pub source_text: String,
    /// Translation text; span markup around the errorful span is kept verbatim.
    pub target_text: String,
    pub category: String,
    pub severity: Severity,
}

impl ErrorAnnotation {
    pub fn source_id(&self, scheme: SourceIdScheme) -> String {
        match scheme {
            SourceIdScheme::DocSeg => format!("{}:{}", self.doc, self.seg_id),
            SourceIdScheme::GlobalSeg => self.seg_id.to_string(),
        }
    }
}

/// How a source identifier is derived from an annotation row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceIdScheme {
    /// `doc:seg_id`
    #[default]
    DocSeg,
    /// `seg_id` alone, for dumps where it is already a global index.
    GlobalSeg,
}

/// Zero-based column positions of each field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub system: usize,
    pub doc: usize,
    pub doc_id: Option<usize>,
    pub seg_id: usize,
    pub rater: usize,
    pub source: usize,
    pub target: usize,
    pub category: usize,
    pub severity: usize,
    /// Number of fields every row must have.
    pub width: usize,
}

impl Default for ColumnMap {
    /// WMT order: system, doc, doc_id, seg_id, rater, source, target, category, severity.
    fn default() -> Self {
        ColumnMap {
            system: 0,
            doc: 1,
            doc_id: Some(2),
            seg_id: 3,
            rater: 4,
            source: 5,
            target: 6,
            category: 7,
            severity: 8,
            width: 9,
        }
    }
}

impl ColumnMap {
    fn validate(&self) -> Result<()> {
        let required = [
            self.system,
            self.doc,
            self.seg_id,
            self.rater,
            self.source,
            self.target,
            self.category,
            self.severity,
        ];
        let max = required.iter().copied().chain(self.doc_id).max().unwrap_or(0);
        if max >= self.width {
            return Err(Error::Config(format!(
                "column index {max} does not fit a row of width {}",
                self.width
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    /// Treat the first line as a header when its severity field reads `severity`.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownSeverity {
    #[default]
    Reject,
    MapToNeutral,
}

/// Layout and policy for reading an MQM TSV file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MqmFormat {
    pub columns: ColumnMap,
    pub header: HeaderMode,
    pub unknown_severity: UnknownSeverity,
}

/// A severity string that was not recognised and was mapped to neutral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeverityRemap {
    pub line: usize,
    pub raw: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MqmParse {
    pub annotations: Vec<ErrorAnnotation>,
    /// Rows whose severity was unknown; only filled under [`UnknownSeverity::MapToNeutral`].
    pub remapped: Vec<SeverityRemap>,
}

/// Parse an MQM TSV stream. `source_name` is used in error messages.
pub fn parse_mqm_tsv<R: BufRead>(reader: R, source_name: &str, format: &MqmFormat) -> Result<MqmParse> {
    let cols = &format.columns;
    cols.validate()?;

    let mut out = MqmParse::default();
    let mut first = true;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();

        if first {
            first = false;
            let is_header = match format.header {
                HeaderMode::Present => true,
                HeaderMode::Absent => false,
                HeaderMode::Auto => fields
                    .get(cols.severity)
                    .is_some_and(|f| f.trim().eq_ignore_ascii_case("severity")),
            };
            if is_header {
                continue;
            }
        }

        if fields.len() != cols.width {
            return Err(Error::parse(
                source_name,
                lineno,
                format!("expected {} columns, found {}", cols.width, fields.len()),
            ));
        }

        let raw_sev = fields[cols.severity];
        let severity = match raw_sev.parse::<Severity>() {
            Ok(s) => s,
            Err(msg) => match format.unknown_severity {
                UnknownSeverity::Reject => return Err(Error::parse(source_name, lineno, msg)),
                UnknownSeverity::MapToNeutral => {
                    out.remapped.push(SeverityRemap {
                        line: lineno,
                        raw: raw_sev.to_string(),
                    });
                    Severity::Neutral
                }
            },
        };

        let seg_field = fields[cols.seg_id].trim();
        let seg_id = seg_field
            .parse::<u64>()
            .map_err(|_| Error::parse(source_name, lineno, format!("seg_id {seg_field:?} is not an integer")))?;

        out.annotations.push(ErrorAnnotation {
            system: fields[cols.system].to_string(),
            doc: fields[cols.doc].to_string(),
            doc_id: cols.doc_id.map(|i| fields[i].to_string()).unwrap_or_default(),
            seg_id,
            rater: fields[cols.rater].to_string(),
            source_text: fields[cols.source].to_string(),
            target_text: fields[cols.target].to_string(),
            category: fields[cols.category].to_string(),
            severity,
        });
    }
    Ok(out)
}

pub fn parse_mqm_str(text: &str, format: &MqmFormat) -> Result<MqmParse> {
    parse_mqm_tsv(text.as_bytes(), "<string>", format)
}

pub const MQM_HEADER: &str = "system\tdoc\tdoc_id\tseg_id\trater\tsource\ttarget\tcategory\tseverity";

/// Write annotations in the canonical nine-column layout with a header.
///
/// Fields containing tabs or line breaks cannot be represented and are rejected.
pub fn write_mqm_tsv<W: Write>(mut w: W, annotations: &[ErrorAnnotation]) -> Result<()> {
    let io = |e| Error::io("<mqm writer>", e);
    writeln!(w, "{MQM_HEADER}").map_err(io)?;
    for a in annotations {
        let seg = a.seg_id.to_string();
        let fields = [
            a.system.as_str(),
            &a.doc,
            &a.doc_id,
            &seg,
            &a.rater,
            &a.source_text,
            &a.target_text,
            &a.category,
            a.severity.as_str(),
        ];
        if let Some(bad) = fields.iter().find(|f| f.contains(['\t', '\n', '\r'])) {
            return Err(Error::InvalidInput(format!(
                "field {bad:?} contains a tab or line break"
            )));
        }
        writeln!(w, "{}", fields.join("\t")).map_err(io)?;
    }
    Ok(())
}
