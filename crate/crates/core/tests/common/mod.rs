#![allow(dead_code)]

use std::collections::BTreeMap;

use mtmeta::corpus::{build_corpus, EvalCorpus, JoinOptions, MetricScoreTable, ScoreRange, SegmentKey};

pub const LP: &str = "en-de";

/// Corpus from `(source, system, gold, metric)` rows with one metric named `m`.
pub fn corpus_from(rows: &[(&str, &str, f64, f64)], range: (f64, f64)) -> EvalCorpus {
    let mut gold = BTreeMap::new();
    let mut table = MetricScoreTable::new("m", true, ScoreRange::new(range.0, range.1).unwrap());
    for &(src, sys, g, m) in rows {
        let key = SegmentKey::new(LP, src, sys);
        gold.insert(key.clone(), g);
        table.insert(key, m).unwrap();
    }
    build_corpus(&[], &gold, vec![table], JoinOptions::default()).unwrap()
}

/// `n` ranks by counting: rank_i = #{x_j < x_i} + (#{x_j == x_i} + 1) / 2.
pub fn counting_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&a| {
            let less = x.iter().filter(|&&b| b < a).count() as f64;
            let equal = x.iter().filter(|&&b| b == a).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Textbook Pearson from raw sums; `None` when either variance vanishes.
pub fn sums_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let cov = n * sxy - sx * sy;
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if x.iter().all(|v| *v == x[0]) || y.iter().all(|v| *v == y[0]) {
        return None;
    }
    Some(cov / (vx.sqrt() * vy.sqrt()))
}
