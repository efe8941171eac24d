//! Run manifest: one TOML file describing inputs, analyses and outputs.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_corpus, parse_mqm_tsv, EvalCorpus, JoinOptions, MetricManifest, MqmFormat};
use crate::detect::{NormalizationSpec, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::mqm::{gold_map, gold_scores, GoldOptions, HqBoundary};
use crate::stats::{hq_source_set, AnalysisSpec, CorrType, Grouping, Subsample, Subset, DEFAULT_REPEATS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Markdown]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GoldConfig {
    #[serde(flatten)]
    pub options: GoldOptions,
    pub hq_boundary: HqBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedTarget {
    /// Match the number of all-HQ sources (K).
    Hq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubsampleTarget {
    Sources(usize),
    Named(NamedTarget),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisEntry {
    pub grouping: Grouping,
    pub subset: Subset,
    #[serde(default = "spearman")]
    pub corr_type: CorrType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample: Option<SubsampleTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
    /// Restrict to these metrics; all registered metrics when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<String>>,
}

fn spearman() -> CorrType {
    CorrType::Spearman
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// No-Grouping ALL, No-Grouping ALL†, Group-by-Src ALL†, Group-by-Src HQ.
    HqComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    pub threshold: f64,
    /// Extra thresholds to report alongside `threshold`.
    pub sweep: Vec<f64>,
    pub clamp: bool,
    pub bins: usize,
    pub metrics: Option<Vec<String>>,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            threshold: DEFAULT_THRESHOLD,
            sweep: Vec::new(),
            clamp: true,
            bins: 20,
            metrics: None,
        }
    }
}

impl DetectionConfig {
    pub fn thresholds(&self) -> Vec<f64> {
        let mut t = vec![self.threshold];
        t.extend(self.sweep.iter().copied().filter(|x| *x != self.threshold));
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub language_pair: String,
    /// MQM TSV files; relative paths resolve against the manifest's directory.
    pub mqm: Vec<PathBuf>,
    #[serde(default)]
    pub mqm_format: MqmFormat,
    /// Metric manifest path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<PathBuf>,
    #[serde(default)]
    pub gold: GoldConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_preset: Option<Preset>,
    #[serde(default, rename = "analysis")]
    pub analyses: Vec<AnalysisEntry>,
    #[serde(default)]
    pub detection: DetectionConfig,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub strict: bool,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunManifest {
    pub fn new(language_pair: impl Into<String>, mqm: Vec<PathBuf>) -> Self {
        RunManifest {
            language_pair: language_pair.into(),
            mqm,
            mqm_format: MqmFormat::default(),
            metrics: None,
            gold: GoldConfig::default(),
            analysis_preset: None,
            analyses: Vec::new(),
            detection: DetectionConfig::default(),
            output_dir: default_out(),
            formats: all_formats(),
            seed: 0,
            strict: true,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut m: RunManifest = toml::from_str(text).map_err(|e| Error::Config(format!("run manifest: {e}")))?;
        m.base_dir = base_dir.to_path_buf();
        Ok(m)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Parse MQM files (concurrently), score gold, load metrics and join.
    pub fn load_corpus(&self) -> Result<EvalCorpus> {
        if self.mqm.is_empty() {
            return Err(Error::Config("manifest lists no MQM files".into()));
        }
        let parsed: Vec<_> = self
            .mqm
            .par_iter()
            .map(|p| {
                let path = self.resolve(p);
                let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
                let parse = parse_mqm_tsv(BufReader::new(file), &path.display().to_string(), &self.mqm_format)?;
                for r in &parse.remapped {
                    log::warn!(
                        "{}:{}: unknown severity {:?} mapped to neutral",
                        path.display(),
                        r.line,
                        r.raw
                    );
                }
                Ok(parse.annotations)
            })
            .collect::<Result<_>>()?;
        let annotations: Vec<_> = parsed.into_iter().flatten().collect();

        let gold = gold_scores(&annotations, &self.language_pair, &self.gold.options)?;
        let tables = match &self.metrics {
            Some(p) => {
                let path = self.resolve(p);
                let mm = MetricManifest::from_path(&path)?;
                let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
                mm.load_tables(&base, &self.language_pair)?
            }
            None => Vec::new(),
        };
        let opts = JoinOptions {
            strict: self.strict,
            source_id: self.gold.options.source_id,
            hq_boundary: self.gold.hq_boundary,
        };
        build_corpus(&annotations, &gold_map(&gold), tables, opts)
    }

    /// Expand analyses into concrete (metric, spec) pairs, checking every metric is registered.
    ///
    /// A `hq` subsample target on a corpus without all-HQ sources yields a zero target.
    pub fn resolve_analyses(&self, corpus: &EvalCorpus) -> Result<Vec<(String, AnalysisSpec)>> {
        let mut entries = self.analyses.clone();
        if let Some(Preset::HqComparison) = self.analysis_preset {
            entries.splice(0..0, hq_comparison_entries());
        }
        let k = hq_source_set(corpus).len();
        let registered: Vec<&str> = corpus.metrics().iter().map(|m| m.metric_name.as_str()).collect();

        let mut out = Vec::new();
        let mut specs = Vec::with_capacity(entries.len());
        for e in &entries {
            let target = match e.subsample {
                None => None,
                Some(SubsampleTarget::Sources(0)) => {
                    return Err(Error::Config("subsample target must be at least 1".into()));
                }
                Some(SubsampleTarget::Sources(n)) => Some(n),
                // K = 0 is kept; the cell is reported as n/a.
                Some(SubsampleTarget::Named(NamedTarget::Hq)) => Some(k),
            };
            let mut spec = AnalysisSpec::new(e.grouping, e.subset, e.corr_type);
            if let Some(t) = target {
                spec = spec.subsampled(Subsample {
                    target_sources: t,
                    repeats: e.repeats.unwrap_or(DEFAULT_REPEATS),
                    seed: self.seed,
                });
            }
            let names: Vec<String> = match &e.metrics {
                Some(list) => {
                    if let Some(bad) = list.iter().find(|n| !registered.contains(&n.as_str())) {
                        return Err(Error::Config(format!(
                            "analysis references unregistered metric {bad:?}"
                        )));
                    }
                    list.clone()
                }
                None => registered.iter().map(|s| s.to_string()).collect(),
            };
            specs.push((spec, names));
        }
        // Metric-major order so each table row is contiguous.
        for metric in &registered {
            for (spec, names) in &specs {
                if names.iter().any(|n| n == metric) {
                    out.push((metric.to_string(), *spec));
                }
            }
        }
        Ok(out)
    }

    pub fn detection_metrics(&self, corpus: &EvalCorpus) -> Result<Vec<String>> {
        let registered: Vec<String> = corpus.metrics().iter().map(|m| m.metric_name.clone()).collect();
        match &self.detection.metrics {
            Some(list) => {
                if let Some(bad) = list.iter().find(|n| !registered.contains(n)) {
                    return Err(Error::Config(format!(
                        "detection references unregistered metric {bad:?}"
                    )));
                }
                Ok(list.clone())
            }
            None => Ok(registered),
        }
    }

    pub fn normalization(&self, corpus: &EvalCorpus, metric: &str, threshold: f64) -> Result<NormalizationSpec> {
        let table = corpus
            .metric(metric)
            .ok_or_else(|| Error::Config(format!("metric {metric:?} is not registered")))?;
        let spec = NormalizationSpec::for_metric(table)
            .with_threshold(threshold)
            .with_clamp(self.detection.clamp);
        spec.validate()?;
        Ok(spec)
    }
}

fn hq_comparison_entries() -> Vec<AnalysisEntry> {
    let entry = |grouping, subset, subsample| AnalysisEntry {
        grouping,
        subset,
        corr_type: CorrType::Spearman,
        subsample,
        repeats: None,
        metrics: None,
    };
    let hq = Some(SubsampleTarget::Named(NamedTarget::Hq));
    vec![
        entry(Grouping::NoGrouping, Subset::All, None),
        entry(Grouping::NoGrouping, Subset::All, hq),
        entry(Grouping::GroupBySrc, Subset::All, hq),
        entry(Grouping::GroupBySrc, Subset::Hq, None),
    ]
}
