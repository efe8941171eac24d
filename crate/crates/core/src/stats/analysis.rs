//! Segment-level correlation in the No-Grouping and Group-by-Src configurations.

use std::collections::BTreeSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::{pearson, spearman};
use crate::corpus::EvalCorpus;
use crate::error::{Error, Result};

pub const DEFAULT_REPEATS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// One correlation over all flattened (gold, metric) pairs.
    NoGrouping,
    /// Mean of per-source correlations across each source's system outputs.
    GroupBySrc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subset {
    #[serde(rename = "ALL", alias = "all")]
    All,
    #[serde(rename = "HQ", alias = "hq")]
    Hq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrType {
    Spearman,
    Pearson,
}

impl CorrType {
    pub fn apply(self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            CorrType::Spearman => spearman(x, y),
            CorrType::Pearson => pearson(x, y),
        }
    }
}

impl Grouping {
    pub fn as_str(self) -> &'static str {
        match self {
            Grouping::NoGrouping => "no_grouping",
            Grouping::GroupBySrc => "group_by_src",
        }
    }
}

impl Subset {
    pub fn as_str(self) -> &'static str {
        match self {
            Subset::All => "ALL",
            Subset::Hq => "HQ",
        }
    }
}

impl CorrType {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrType::Spearman => "spearman",
            CorrType::Pearson => "pearson",
        }
    }
}

/// Repeated draws of whole sources without replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsample {
    pub target_sources: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Subsample {
    pub fn new(target_sources: usize, seed: u64) -> Self {
        Subsample {
            target_sources,
            repeats: DEFAULT_REPEATS,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnalysisSpec {
    pub grouping: Grouping,
    pub subset: Subset,
    pub corr_type: CorrType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample: Option<Subsample>,
}

impl AnalysisSpec {
    pub fn new(grouping: Grouping, subset: Subset, corr_type: CorrType) -> Self {
        AnalysisSpec {
            grouping,
            subset,
            corr_type,
            subsample: None,
        }
    }

    pub fn subsampled(mut self, subsample: Subsample) -> Self {
        self.subsample = Some(subsample);
        self
    }

    /// Column label such as `No-Grouping ALL†`.
    pub fn label(&self) -> String {
        let grouping = match self.grouping {
            Grouping::NoGrouping => "No-Grouping",
            Grouping::GroupBySrc => "Group-by-Src",
        };
        let dagger = if self.subsample.is_some() { "†" } else { "" };
        format!("{grouping} {}{dagger}", self.subset.as_str())
    }
}

impl fmt::Display for AnalysisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.corr_type.as_str())
    }
}

/// One correlation cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub metric_name: String,
    pub spec: AnalysisSpec,
    pub value: f64,
    /// Sample standard deviation across subsample repeats.
    pub std: Option<f64>,
    pub n_items: usize,
    pub n_groups_used: usize,
    pub n_groups_excluded: usize,
    /// Source ids of excluded groups; empty for subsampled results.
    pub excluded_groups: Vec<String>,
    /// Subsample repeats whose correlation was undefined.
    pub n_repeats_undefined: usize,
}

/// Sources whose every translation is HQ (the K all-HQ sources).
pub fn hq_source_set(corpus: &EvalCorpus) -> BTreeSet<String> {
    hq_source_indices(corpus, 0..corpus.m_sources())
        .map(|i| corpus.sources()[i].clone())
        .collect()
}

fn hq_source_indices<'a, I>(corpus: &'a EvalCorpus, sources: I) -> impl Iterator<Item = usize> + 'a
where
    I: IntoIterator<Item = usize>,
    I::IntoIter: 'a,
{
    sources.into_iter().filter(move |&s| {
        corpus.records()[corpus.source_groups()[s].clone()]
            .iter()
            .all(|r| r.quality_class.is_hq())
    })
}

/// Correlation over the given sources (indices into `corpus.sources()`).
fn evaluate(
    corpus: &EvalCorpus,
    metric: &[f64],
    sources: &[usize],
    grouping: Grouping,
    subset: Subset,
    corr_type: CorrType,
) -> Result<Evaluated> {
    let records = corpus.records();
    let groups = corpus.source_groups();
    match grouping {
        Grouping::NoGrouping => {
            let (mut gold, mut pred) = (Vec::new(), Vec::new());
            for &s in sources {
                for i in groups[s].clone() {
                    if subset == Subset::Hq && !records[i].quality_class.is_hq() {
                        continue;
                    }
                    gold.push(records[i].gold_mqm);
                    pred.push(metric[i]);
                }
            }
            let value = corr_type.apply(&gold, &pred)?;
            Ok(Evaluated {
                value,
                n_items: gold.len(),
                n_candidates: 1,
                excluded: Vec::new(),
            })
        }
        Grouping::GroupBySrc => {
            let candidates: Vec<usize> = match subset {
                Subset::All => sources.to_vec(),
                Subset::Hq => hq_source_indices(corpus, sources.iter().copied()).collect(),
            };
            let (mut sum, mut used, mut n_items) = (0.0, 0usize, 0usize);
            let mut excluded = Vec::new();
            for &s in &candidates {
                let range = groups[s].clone();
                let gold: Vec<f64> = records[range.clone()].iter().map(|r| r.gold_mqm).collect();
                match corr_type.apply(&gold, &metric[range]) {
                    Ok(v) => {
                        sum += v;
                        used += 1;
                        n_items += gold.len();
                    }
                    Err(Error::UndefinedCorrelation { .. }) => excluded.push(s),
                    Err(e) => return Err(e),
                }
            }
            if used == 0 {
                return Err(Error::UndefinedCorrelation {
                    reason: format!("no group out of {} has a defined correlation", candidates.len()),
                    n_groups_excluded: excluded.len(),
                });
            }
            Ok(Evaluated {
                value: sum / used as f64,
                n_items,
                n_candidates: candidates.len(),
                excluded,
            })
        }
    }
}

struct Evaluated {
    value: f64,
    n_items: usize,
    n_candidates: usize,
    excluded: Vec<usize>,
}

impl Evaluated {
    fn into_result(self, corpus: &EvalCorpus, metric_name: &str, spec: AnalysisSpec) -> CorrelationResult {
        CorrelationResult {
            metric_name: metric_name.to_string(),
            spec,
            value: self.value,
            std: None,
            n_items: self.n_items,
            n_groups_used: self.n_candidates - self.excluded.len(),
            n_groups_excluded: self.excluded.len(),
            excluded_groups: self.excluded.iter().map(|&s| corpus.sources()[s].clone()).collect(),
            n_repeats_undefined: 0,
        }
    }
}

fn full(
    corpus: &EvalCorpus,
    metric_name: &str,
    grouping: Grouping,
    subset: Subset,
    corr_type: CorrType,
) -> Result<CorrelationResult> {
    let metric = corpus.metric_column(metric_name)?;
    let all: Vec<usize> = (0..corpus.m_sources()).collect();
    let spec = AnalysisSpec::new(grouping, subset, corr_type);
    Ok(evaluate(corpus, metric, &all, grouping, subset, corr_type)?.into_result(corpus, metric_name, spec))
}

/// Correlation over all N×M translations (HQ: records with no major error).
pub fn corr_no_grouping(
    corpus: &EvalCorpus,
    metric_name: &str,
    subset: Subset,
    corr_type: CorrType,
) -> Result<CorrelationResult> {
    full(corpus, metric_name, Grouping::NoGrouping, subset, corr_type)
}

/// Mean per-source correlation (HQ: only sources whose translations are all HQ).
///
/// Groups with a constant gold or metric vector are excluded and counted.
pub fn corr_group_by_src(
    corpus: &EvalCorpus,
    metric_name: &str,
    subset: Subset,
    corr_type: CorrType,
) -> Result<CorrelationResult> {
    full(corpus, metric_name, Grouping::GroupBySrc, subset, corr_type)
}

/// The sources drawn for one subsample repeat, sorted.
pub fn subsample_sources(m_sources: usize, target: usize, seed: u64, repeat: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(repeat as u64));
    let mut idx = rand::seq::index::sample(&mut rng, m_sources, target).into_vec();
    idx.sort_unstable();
    idx
}

/// Mean and sample standard deviation of the correlation over repeated source subsamples.
pub fn subsample_corr(corpus: &EvalCorpus, metric_name: &str, spec: &AnalysisSpec) -> Result<CorrelationResult> {
    let sub = spec
        .subsample
        .ok_or_else(|| Error::Config("subsample_corr needs a subsample setting".into()))?;
    let m = corpus.m_sources();
    if sub.repeats == 0 {
        return Err(Error::Config("subsample repeats must be >= 1".into()));
    }
    if sub.target_sources == 0 || sub.target_sources > m {
        return Err(Error::Config(format!(
            "subsample target {} outside 1..={m}",
            sub.target_sources
        )));
    }
    let metric = corpus.metric_column(metric_name)?;

    // Each repeat owns its RNG stream, so parallel and sequential runs agree.
    let outcomes: Vec<Result<Evaluated>> = (0..sub.repeats)
        .into_par_iter()
        .map(|r| {
            let sources = subsample_sources(m, sub.target_sources, sub.seed, r);
            evaluate(corpus, metric, &sources, spec.grouping, spec.subset, spec.corr_type)
        })
        .collect();

    let mut stats = Welford::default();
    let (mut items, mut candidates, mut used) = (0usize, 0usize, 0usize);
    let mut undefined = 0usize;
    let mut excluded_when_undefined = 0usize;
    for o in outcomes {
        match o {
            Ok(e) => {
                stats.push(e.value);
                items += e.n_items;
                candidates += e.n_candidates;
                used += e.n_candidates - e.excluded.len();
            }
            Err(Error::UndefinedCorrelation { n_groups_excluded, .. }) => {
                undefined += 1;
                excluded_when_undefined += n_groups_excluded;
            }
            Err(e) => return Err(e),
        }
    }
    if stats.n == 0 {
        return Err(Error::UndefinedCorrelation {
            reason: format!("all {} subsample repeats undefined", sub.repeats),
            n_groups_excluded: excluded_when_undefined / sub.repeats,
        });
    }
    let k = stats.n as f64;
    let avg = |total: usize| (total as f64 / k).round() as usize;
    let (n_candidates, n_used) = (avg(candidates), avg(used));
    Ok(CorrelationResult {
        metric_name: metric_name.to_string(),
        spec: *spec,
        value: stats.mean,
        std: stats.sample_std(),
        n_items: avg(items),
        n_groups_used: n_used,
        n_groups_excluded: n_candidates.saturating_sub(n_used),
        excluded_groups: Vec::new(),
        n_repeats_undefined: undefined,
    })
}

/// Dispatch on `spec`: subsampled when it carries a subsample setting.
pub fn correlate(corpus: &EvalCorpus, metric_name: &str, spec: &AnalysisSpec) -> Result<CorrelationResult> {
    match (spec.subsample, spec.grouping) {
        (Some(_), _) => subsample_corr(corpus, metric_name, spec),
        (None, Grouping::NoGrouping) => corr_no_grouping(corpus, metric_name, spec.subset, spec.corr_type),
        (None, Grouping::GroupBySrc) => corr_group_by_src(corpus, metric_name, spec.subset, spec.corr_type),
    }
}

/// Running mean and variance; a run of identical values yields exactly that value and zero spread.
#[derive(Debug, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn sample_std(&self) -> Option<f64> {
        (self.n >= 2).then(|| (self.m2 / (self.n - 1) as f64).max(0.0).sqrt())
    }
}
