use serde::{Deserialize, Serialize};

use super::{default_mix, ExperimentConfig, PairContext, TAU_FLOOR};
use crate::embedding::{embedded_distance, Variant};
use crate::error::{Error, Result};
use crate::measures::{MeasureKind, ProbabilityMeasure, Topology};
use crate::transport::emd_cost;

const QUERY_STREAM: u64 = 1 << 61;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnConfig {
    pub n: usize,
    pub dataset_size: usize,
    pub query_count: usize,
    pub seed: u64,
    /// Kinds for individual measures; a Dirac-pair entry contributes one Dirac.
    pub mix: Vec<(MeasureKind, f64)>,
    pub topology: Topology,
    pub variant: Variant,
}

impl NnConfig {
    pub fn new(n: usize, dataset_size: usize, query_count: usize, seed: u64) -> Self {
        Self {
            n,
            dataset_size,
            query_count,
            seed,
            mix: default_mix(),
            topology: Topology::Torus,
            variant: Variant::Ab,
        }
    }

    fn context(&self) -> Result<PairContext> {
        if self.dataset_size < 2 {
            return Err(Error::Config(format!(
                "dataset needs at least 2 measures, got {}",
                self.dataset_size
            )));
        }
        if self.query_count == 0 {
            return Err(Error::Config("query count must be at least 1".into()));
        }
        let mut cfg = ExperimentConfig::new(self.n, 1, self.seed);
        cfg.mix = self.mix.clone();
        cfg.topology = self.topology;
        cfg.variant = self.variant;
        PairContext::new(&cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnReport {
    pub n: usize,
    pub variant: Variant,
    pub dataset_size: usize,
    pub query_count: usize,
    pub seed: u64,
    /// Fraction of queries whose embedded nearest neighbour is the exact one.
    pub recall_at_1: f64,
    /// Mean 1-based position of the exact nearest neighbour in the embedded
    /// ranking.
    pub mean_rank_of_true_nn: f64,
    /// Queries for which every dataset item is at the same exact distance.
    pub degenerate_queries: usize,
    /// True when no query had a well-defined nearest neighbour.
    pub degenerate: bool,
}

/// Index of the smallest value; the lowest index wins ties.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// 1-based position of `target` when sorting by `(value, index)`.
fn rank_of(values: &[f64], target: usize) -> usize {
    let t = values[target];
    1 + values
        .iter()
        .enumerate()
        .filter(|&(i, &v)| v < t || (v == t && i < target))
        .count()
}

pub fn run_nn_experiment(cfg: &NnConfig) -> Result<NnReport> {
    let ctx = cfg.context()?;
    let draw = |stream: u64| -> Result<ProbabilityMeasure> {
        let mut rng = ctx.rng(stream);
        let kind = ctx.pick_kind(&mut rng);
        ctx.draw(&mut rng, kind)
    };
    let dataset = (0..cfg.dataset_size as u64)
        .map(draw)
        .collect::<Result<Vec<_>>>()?;
    let queries = (0..cfg.query_count as u64)
        .map(|i| draw(QUERY_STREAM + i))
        .collect::<Result<Vec<_>>>()?;
    let mut report = run_nn_on(&dataset, &queries, cfg.topology, cfg.variant)?;
    report.seed = cfg.seed;
    Ok(report)
}

/// Exhaustive nearest-neighbour comparison on caller-supplied measures.
pub fn run_nn_on(
    dataset: &[ProbabilityMeasure],
    queries: &[ProbabilityMeasure],
    topology: Topology,
    variant: Variant,
) -> Result<NnReport> {
    if dataset.len() < 2 {
        return Err(Error::Config("dataset needs at least 2 measures".into()));
    }
    if queries.is_empty() {
        return Err(Error::Config("no queries".into()));
    }
    let n = dataset[0].n();
    let mut cfg = ExperimentConfig::new(n, 1, 0);
    cfg.topology = topology;
    cfg.variant = variant;
    let ctx = PairContext::new(&cfg)?;
    if dataset
        .iter()
        .chain(queries)
        .any(|m| m.domain() != ctx.domain)
    {
        return Err(Error::DomainMismatch);
    }

    let embedded = dataset
        .iter()
        .map(|m| ctx.embed(m))
        .collect::<Result<Vec<_>>>()?;
    let mut hits = 0usize;
    let mut rank_total = 0usize;
    let mut degenerate = 0usize;
    for q in queries {
        let eq = ctx.embed(q)?;
        let tau = dataset
            .iter()
            .map(|m| emd_cost(q, m, &ctx.metric))
            .collect::<Result<Vec<_>>>()?;
        let emb = embedded
            .iter()
            .map(|e| embedded_distance(&eq, e))
            .collect::<Result<Vec<_>>>()?;
        let lo = tau.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tau.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= TAU_FLOOR {
            degenerate += 1;
            hits += 1;
            rank_total += 1;
            continue;
        }
        let truth = argmin(&tau);
        if argmin(&emb) == truth {
            hits += 1;
        }
        rank_total += rank_of(&emb, truth);
    }
    let q = queries.len() as f64;
    Ok(NnReport {
        n,
        variant,
        dataset_size: dataset.len(),
        query_count: queries.len(),
        seed: 0,
        recall_at_1: hits as f64 / q,
        mean_rank_of_true_nn: rank_total as f64 / q,
        degenerate_queries: degenerate,
        degenerate: degenerate == queries.len(),
    })
}
