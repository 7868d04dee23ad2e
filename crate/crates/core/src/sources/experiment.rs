//! Consistency experiments: sample many trajectories from a source and
//! track how the order estimates behave along a grid of lengths.
//!
//! Each trial draws one sequence of the largest requested length; shorter
//! lengths use its prefixes, so a trial follows a single trajectory
//! `X_1^n` as `n` grows. Trials run in parallel and are collected in trial
//! order, so the report does not depend on the number of threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{derive_seed, SourceModel, SourceSummary, GENERATOR};
use crate::codes::{Backend, CodeLength, PpmMixture};
use crate::orders::{mgz_order_indexed, report_for};
use crate::FrequencyIndex;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub lengths: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(serialize_with = "backend_names")]
    pub backends: Vec<Backend>,
    /// Also compute the Krichevsky-Trofimov order.
    pub kt: bool,
    /// Also compute the Merhav-Gutman-Ziv order with this threshold.
    pub mgz_lambda: Option<f64>,
}

fn backend_names<S: serde::Serializer>(b: &[Backend], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(b.iter().map(|b| b.name().to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub backend: String,
    pub order: usize,
    /// `H(x)` in bits.
    pub h_bits: f64,
    /// `h_M(x)` at the estimated order.
    pub h_at_order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    pub seed: u64,
    pub max_repetition: usize,
    pub kt: Option<usize>,
    pub mgz: Option<usize>,
    pub estimates: Vec<EstimateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub backend: String,
    pub hit_rate: f64,
    pub mean_m: f64,
    pub mean_k: Option<f64>,
    pub mean_h_at_m: f64,
    pub h_p: f64,
    /// estimate -> number of trials
    pub distribution: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub generator: &'static str,
    pub source: SourceSummary,
    pub config: ExperimentConfig,
    pub rows: Vec<SummaryRow>,
    pub trials: Vec<TrialRecord>,
}

impl ConsistencyReport {
    /// Summary CSV: `n,backend,hit_rate,mean_M,mean_K,h_at_M,h_P`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("n,backend,hit_rate,mean_M,mean_K,h_at_M,h_P\n");
        for r in &self.rows {
            let k = r.mean_k.map(|k| k.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n, r.backend, r.hit_rate, r.mean_m, k, r.mean_h_at_m, r.h_p
            ));
        }
        out
    }

    /// Trial records at length `n`.
    pub fn trials_at(&self, n: usize) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(move |t| t.n == n)
    }
}

fn run_trial(src: &SourceModel, cfg: &ExperimentConfig, trial: usize) -> Vec<TrialRecord> {
    let seed = derive_seed(cfg.seed, trial as u64);
    let longest = cfg.lengths.iter().copied().max().unwrap_or(0);
    let x = src.sample(longest, seed);
    cfg.lengths
        .iter()
        .map(|&n| {
            let prefix = x.with_symbols(x.symbols()[..n].to_vec());
            let idx = FrequencyIndex::build(&prefix);
            let needs_ppm = cfg.kt || cfg.backends.iter().any(|b| matches!(b, Backend::Ppm { .. }));
            let exact = cfg.backends.iter().any(|b| matches!(b, Backend::Ppm { exact: true }));
            let analysis = needs_ppm.then(|| PpmMixture { exact }.analyze(&idx));
            let estimates = cfg
                .backends
                .iter()
                .map(|b| {
                    let h_bits = match (b, &analysis) {
                        (Backend::Ppm { .. }, Some(a)) => a.entropy_bits(),
                        _ => b.pointwise_entropy_indexed(&idx),
                    };
                    let report = report_for(&idx, b.name(), h_bits);
                    let h_at_order = report.profile.h.get(report.order).copied().unwrap_or(0.0);
                    EstimateRecord { backend: b.name().to_string(), order: report.order, h_bits, h_at_order }
                })
                .collect();
            TrialRecord {
                trial,
                n,
                seed,
                max_repetition: idx.max_repetition(),
                kt: cfg.kt.then(|| analysis.as_ref().expect("computed").kt_order()),
                mgz: cfg.mgz_lambda.map(|l| mgz_order_indexed(&idx, l).expect("lambda validated")),
                estimates,
            }
        })
        .collect()
}

/// Runs `trials` trajectories of `src` and summarizes the order estimates
/// per length and backend. The target order is the source's effective
/// Markov order.
pub fn consistency_experiment(src: &SourceModel, cfg: &ExperimentConfig) -> crate::Result<ConsistencyReport> {
    if let Some(l) = cfg.mgz_lambda {
        if l.is_nan() || l <= 0.0 {
            return Err(crate::Error::InvalidLambda(l));
        }
    }
    let trials: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(src, cfg, t))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let summary = src.describe();
    let target = summary.effective_order;
    let mut rows = Vec::new();
    for &n in &cfg.lengths {
        for (bi, b) in cfg.backends.iter().enumerate() {
            let at_n: Vec<&TrialRecord> = trials.iter().filter(|t| t.n == n).collect();
            let count = at_n.len().max(1) as f64;
            let mut distribution = BTreeMap::new();
            let (mut hits, mut sum_m, mut sum_h) = (0usize, 0.0, 0.0);
            for t in &at_n {
                let e = &t.estimates[bi];
                *distribution.entry(e.order).or_insert(0) += 1;
                hits += usize::from(e.order == target);
                sum_m += e.order as f64;
                sum_h += e.h_at_order;
            }
            let mean_k = cfg.kt.then(|| at_n.iter().map(|t| t.kt.unwrap_or(0) as f64).sum::<f64>() / count);
            rows.push(SummaryRow {
                n,
                backend: b.name().to_string(),
                hit_rate: hits as f64 / count,
                mean_m: sum_m / count,
                mean_k,
                mean_h_at_m: sum_h / count,
                h_p: summary.entropy_rate,
                distribution,
            });
        }
    }
    Ok(ConsistencyReport { generator: GENERATOR, source: summary, config: cfg.clone(), rows, trials })
}
