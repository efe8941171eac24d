//! Metric manifest: which score files belong to which metric, and how to read them.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scores::{parse_score_table, MetricScoreTable, ScoreLayout, ScoreRange};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    #[default]
    TsvKeyed,
    OneScorePerLine,
    SystemScoreLines,
}

/// A score file path, optionally tagged with the system it scores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoreFile {
    Path(PathBuf),
    System { system: String, path: PathBuf },
}

impl ScoreFile {
    fn path(&self) -> &Path {
        match self {
            ScoreFile::Path(p) | ScoreFile::System { path: p, .. } => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricEntry {
    pub name: String,
    #[serde(default)]
    pub reference_based: bool,
    pub range: Option<ScoreRange>,
    #[serde(default)]
    pub layout: LayoutKind,
    pub files: Vec<ScoreFile>,
    /// Ordered source ids, one per line; required by the line-oriented layouts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricManifest {
    #[serde(default, rename = "metric")]
    pub metrics: Vec<MetricEntry>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl MetricManifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("metric manifest: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// Read every listed file. Relative paths resolve against `base_dir`.
    ///
    /// Files are parsed in parallel; the returned tables keep manifest order.
    pub fn load_tables(&self, base_dir: &Path, language_pair: &str) -> Result<Vec<MetricScoreTable>> {
        self.metrics
            .par_iter()
            .map(|m| load_entry(m, base_dir, language_pair))
            .collect()
    }
}

fn read_segments(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim_end_matches('\r').to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn load_entry(m: &MetricEntry, base_dir: &Path, language_pair: &str) -> Result<MetricScoreTable> {
    let range = m
        .range
        .ok_or_else(|| Error::Config(format!("metric {} has no declared range", m.name)))?;
    let segments = match (m.layout, &m.segments) {
        (LayoutKind::TsvKeyed, _) => Vec::new(),
        (_, Some(p)) => read_segments(&resolve(base_dir, p))?,
        (_, None) => {
            return Err(Error::Config(format!(
                "metric {} uses a line layout but lists no segments file",
                m.name
            )))
        }
    };

    let parsed: Vec<MetricScoreTable> = m
        .files
        .par_iter()
        .map(|f| {
            let layout = match (m.layout, f) {
                (LayoutKind::TsvKeyed, _) => ScoreLayout::TsvKeyed,
                (LayoutKind::SystemScoreLines, _) => ScoreLayout::SystemScoreLines {
                    segments: segments.clone(),
                },
                (LayoutKind::OneScorePerLine, ScoreFile::System { system, .. }) => ScoreLayout::OneScorePerLine {
                    system: system.clone(),
                    segments: segments.clone(),
                },
                (LayoutKind::OneScorePerLine, ScoreFile::Path(p)) => {
                    return Err(Error::Config(format!(
                        "metric {}: file {} needs a system name for one_score_per_line",
                        m.name,
                        p.display()
                    )))
                }
            };
            let path = resolve(base_dir, f.path());
            let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
            let empty = MetricScoreTable::new(m.name.clone(), m.reference_based, range);
            parse_score_table(
                BufReader::new(file),
                &path.display().to_string(),
                language_pair,
                empty,
                &layout,
            )
        })
        .collect::<Result<_>>()?;

    let mut table = MetricScoreTable::new(m.name.clone(), m.reference_based, range);
    for t in parsed {
        table.merge(t)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_file_forms() {
        let m = MetricManifest::from_toml(
            r#"
            [[metric]]
            name = "chrF"
            reference_based = true
            range = [0.0, 100.0]
            files = ["chrf.tsv"]

            [[metric]]
            name = "GEMBA-MQM"
            range = [-25.0, 0.0]
            layout = "one_score_per_line"
            segments = "segments.txt"
            files = [{ system = "GPT4-5shot", path = "gemba/GPT4.txt" }]
            "#,
        )
        .unwrap();
        assert_eq!(m.metrics.len(), 2);
        assert_eq!(m.metrics[0].layout, LayoutKind::TsvKeyed);
        assert!(matches!(m.metrics[1].files[0], ScoreFile::System { .. }));
        assert_eq!(m.metrics[1].range.unwrap().min(), -25.0);
        let again = MetricManifest::from_toml(&m.to_toml()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn inverted_range_is_config_error() {
        let err = MetricManifest::from_toml("[[metric]]\nname='x'\nrange=[1.0, 0.0]\nfiles=[]\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn missing_range_named() {
        let m = MetricManifest::from_toml("[[metric]]\nname='BLEU'\nfiles=[]\n").unwrap();
        let err = m.load_tables(Path::new("."), "en-de").unwrap_err();
        assert!(err.to_string().contains("BLEU"));
    }
}
