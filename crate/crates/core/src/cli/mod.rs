//! Command-line front end. Every command reads one run manifest and writes
//! its tables into the manifest's output directory.

mod manifest;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use manifest::{
    AnalysisEntry, DetectionConfig, Format, GoldConfig, NamedTarget, Preset, RunManifest, SubsampleTarget,
};

use crate::corpus::EvalCorpus;
use crate::detect::{
    bias_rows, bias_to_csv, detection_report, histogram_to_csv, hqzero_histogram, reports_to_csv, reports_to_json,
    reports_to_markdown, DetectionReport,
};
use crate::error::{Error, Result};
use crate::mqm::{distribution, write_gold_tsv, Distribution, QualityClass};
use crate::stats::{run_analysis, to_csv, to_json, to_markdown, AnalysisRow, Undefined};
use crate::synth::{synthesize, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "mtmeta", version, about = "Stress-test MT metrics against MQM annotations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gold MQM class distribution (zero / minor-only / major).
    Distribution(RunArgs),
    /// Segment-level correlations for every configured analysis.
    Correlate(RunArgs),
    /// HQ-Zero detection precision, recall and F1 per metric.
    Detect(RunArgs),
    /// Per-system valid-score tallies per metric.
    Bias(RunArgs),
    /// Generate a synthetic dataset; `--manifest` names the generator config.
    Synth(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    #[arg(long)]
    pub lenient: bool,
}

impl RunArgs {
    /// Load the manifest and apply flag overrides.
    pub fn manifest(&self) -> Result<RunManifest> {
        let mut m = RunManifest::from_path(&self.manifest)?;
        self.apply(&mut m);
        Ok(m)
    }

    fn apply(&self, m: &mut RunManifest) {
        if let Some(seed) = self.seed {
            m.seed = seed;
        }
        if let Some(out) = &self.out {
            // Flags are relative to the working directory, not the manifest.
            m.output_dir = std::path::absolute(out).unwrap_or_else(|_| out.clone());
        }
        if let Some(f) = &self.format {
            m.formats = f.clone();
        }
        if self.strict {
            m.strict = true;
        }
        if self.lenient {
            m.strict = false;
        }
    }
}

/// Exit status for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } => 3,
        Error::Join(_) => 4,
        Error::Config(_) => 5,
        Error::UndefinedCorrelation { .. } | Error::OutOfRange { .. } | Error::InvalidInput(_) => 6,
        Error::Io { .. } => 1,
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Summary {
    pub written: Vec<PathBuf>,
    /// Correlation cells reported as `n/a`.
    pub n_undefined: usize,
}

struct Output {
    dir: PathBuf,
    summary: Summary,
}

impl Output {
    fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir).map_err(|e| Error::Config(format!("output directory {}: {e}", dir.display())))?;
        Ok(Output {
            dir,
            summary: Summary::default(),
        })
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.summary.written.push(path);
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<Summary> {
    match &cli.command {
        Command::Distribution(a) => cmd_distribution(&a.manifest()?),
        Command::Correlate(a) => cmd_correlate(&a.manifest()?),
        Command::Detect(a) => cmd_detect(&a.manifest()?),
        Command::Bias(a) => cmd_bias(&a.manifest()?),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// `en-de` -> `En-De`
pub fn display_language_pair(lp: &str) -> String {
    lp.split('-')
        .map(|part| {
            let mut c = part.chars();
            match c.next() {
                Some(f) => f.to_uppercase().chain(c.flat_map(char::to_lowercase)).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<String>>()
        .join("-")
}

#[derive(Serialize)]
struct DistributionRow<'a> {
    language_pair: &'a str,
    #[serde(flatten)]
    dist: Distribution,
}

pub fn cmd_distribution(m: &RunManifest) -> Result<Summary> {
    let corpus = m.load_corpus()?;
    let dist = distribution(&corpus)?;
    let mut out = Output::new(m.output_path())?;
    let lp = corpus.language_pair();
    if m.wants(Format::Csv) {
        out.write(
            "distribution.csv",
            format!(
                "language_pair,n,pct_zero,pct_hq_minor,pct_nonhq\n{lp},{},{},{},{}\n",
                dist.n, dist.pct_zero, dist.pct_hq_minor, dist.pct_nonhq
            ),
        )?;
        let mut gold = Vec::new();
        write_gold_tsv(&mut gold, &corpus)?;
        out.write("gold.tsv", gold)?;
    }
    if m.wants(Format::Json) {
        let row = DistributionRow {
            language_pair: lp,
            dist,
        };
        out.write(
            "distribution.json",
            serde_json::to_string_pretty(&[row]).expect("serializes"),
        )?;
    }
    if m.wants(Format::Markdown) {
        out.write(
            "distribution.md",
            format!(
                "| LP | N | % zero-MQM | % minor only | % major |\n|---|---:|---:|---:|---:|\n| {} | {} | {:.1}% | {:.1}% | {:.1}% |\n",
                display_language_pair(lp),
                dist.n,
                dist.pct_zero,
                dist.pct_hq_minor,
                dist.pct_nonhq
            ),
        )?;
    }
    Ok(out.summary)
}

/// Every configured (metric, analysis) cell, in manifest order.
pub fn correlation_rows(m: &RunManifest, corpus: &EvalCorpus) -> Result<Vec<AnalysisRow>> {
    let jobs = m.resolve_analyses(corpus)?;
    jobs.par_iter()
        .map(|(metric, spec)| match spec.subsample {
            Some(sub) if sub.target_sources == 0 => Ok(AnalysisRow {
                metric_name: metric.clone(),
                spec: *spec,
                outcome: Err(Undefined {
                    reason: "no all-HQ source to size the subsample".into(),
                    n_groups_excluded: 0,
                }),
            }),
            _ => run_analysis(corpus, metric, spec),
        })
        .collect()
}

pub fn cmd_correlate(m: &RunManifest) -> Result<Summary> {
    let corpus = m.load_corpus()?;
    let rows = correlation_rows(m, &corpus)?;
    let mut out = Output::new(m.output_path())?;
    if m.wants(Format::Csv) {
        out.write("correlations.csv", to_csv(&rows)?)?;
    }
    if m.wants(Format::Json) {
        out.write("correlations.json", to_json(&rows))?;
    }
    if m.wants(Format::Markdown) {
        out.write("correlations.md", to_markdown(&rows))?;
    }
    out.summary.n_undefined = rows.iter().filter(|r| !r.is_defined()).count();
    Ok(out.summary)
}

/// Detection reports for each configured threshold (outer) and metric (inner).
pub fn detection_reports(m: &RunManifest, corpus: &EvalCorpus) -> Result<Vec<Vec<DetectionReport>>> {
    let metrics = m.detection_metrics(corpus)?;
    m.detection
        .thresholds()
        .into_iter()
        .map(|t| {
            metrics
                .par_iter()
                .map(|name| detection_report(corpus, name, &m.normalization(corpus, name, t)?))
                .collect()
        })
        .collect()
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

pub fn cmd_detect(m: &RunManifest) -> Result<Summary> {
    let corpus = m.load_corpus()?;
    let per_threshold = detection_reports(m, &corpus)?;
    let flat: Vec<DetectionReport> = per_threshold.iter().flatten().cloned().collect();
    let n_hqzero = corpus
        .records()
        .iter()
        .filter(|r| r.quality_class == QualityClass::HqZero)
        .count();
    let mut out = Output::new(m.output_path())?;
    if m.wants(Format::Csv) {
        out.write("detection.csv", reports_to_csv(&flat)?)?;
        for name in m.detection_metrics(&corpus)? {
            let spec = m.normalization(&corpus, &name, m.detection.threshold)?;
            let bins = hqzero_histogram(&corpus, &name, &spec, m.detection.bins)?;
            out.write(&format!("histogram_{}.csv", file_stem(&name)), histogram_to_csv(&bins))?;
        }
    }
    if m.wants(Format::Json) {
        out.write("detection.json", reports_to_json(&flat))?;
    }
    if m.wants(Format::Markdown) {
        let mut md = String::new();
        for reports in &per_threshold {
            if let Some(first) = reports.first() {
                md.push_str(&format!("Threshold {}\n\n", first.threshold));
            }
            md.push_str(&reports_to_markdown(corpus.language_pair(), n_hqzero, reports));
            md.push('\n');
        }
        out.write("detection.md", md)?;
    }
    Ok(out.summary)
}

pub fn cmd_bias(m: &RunManifest) -> Result<Summary> {
    let corpus = m.load_corpus()?;
    let reports = detection_reports(m, &corpus)?.swap_remove(0);
    let mut out = Output::new(m.output_path())?;
    for r in &reports {
        let rows = bias_rows(r);
        let stem = file_stem(&r.metric_name);
        if m.wants(Format::Csv) {
            out.write(&format!("bias_{stem}.csv"), bias_to_csv(&rows)?)?;
        }
        if m.wants(Format::Json) {
            out.write(
                &format!("bias_{stem}.json"),
                serde_json::to_string_pretty(&rows).expect("serializes"),
            )?;
        }
        if m.wants(Format::Markdown) {
            let mut md = format!(
                "### {}\n\n| System | Valid on HQ-Zero | Valid on non-HQ-Zero | Abs. diff |\n|---|---:|---:|---:|\n",
                r.metric_name
            );
            for row in &rows {
                md.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    row.system, row.valid_on_hqzero, row.valid_on_nonhqzero, row.abs_diff
                ));
            }
            out.write(&format!("bias_{stem}.md"), md)?;
        }
    }
    Ok(out.summary)
}

/// Write a synthetic dataset plus a `manifest.toml` that drives the other commands over it.
pub fn cmd_synth(args: &RunArgs) -> Result<Summary> {
    let text = fs::read_to_string(&args.manifest).map_err(|e| Error::io(&args.manifest, e))?;
    let mut cfg: SynthConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", args.manifest.display())))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("synth"));
    let ds = synthesize(&cfg)?;
    let mut out = Output::new(dir.clone())?;
    ds.write_files(&dir)?;
    out.summary
        .written
        .extend([dir.join("mqm.tsv"), dir.join("metrics.toml")]);

    let mut run = RunManifest::new(cfg.language_pair.clone(), vec![PathBuf::from("mqm.tsv")]);
    run.metrics = Some(PathBuf::from("metrics.toml"));
    run.analysis_preset = Some(Preset::HqComparison);
    run.seed = cfg.seed;
    run.strict = !args.lenient;
    if let Some(f) = &args.format {
        run.formats = f.clone();
    }
    out.write("manifest.toml", run.to_toml())?;
    out.write("corpus.tsv", ds.corpus.to_canonical_tsv())?;
    let counts: String = ds.class_counts().iter().map(|(c, n)| format!("{c},{n}\n")).collect();
    out.write("class_counts.csv", format!("class,count\n{counts}"))?;
    Ok(out.summary)
}

/// Entry point shared by the binary: parse, run, report, and map errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(summary) => {
            for p in &summary.written {
                println!("{}", p.display());
            }
            if summary.n_undefined > 0 {
                log::warn!("{} correlation cells are n/a", summary.n_undefined);
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
