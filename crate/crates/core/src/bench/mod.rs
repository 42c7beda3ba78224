//! Experiments comparing the embedded `L1` distance with exact transport.
//!
//! Every random draw comes from a ChaCha8 stream selected by `(seed, index)`,
//! so reports are pure functions of their configuration and do not depend on
//! evaluation order.

mod nn;

pub use nn::{run_nn_experiment, run_nn_on, NnConfig, NnReport};

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{embed_with, embedded_distance, grid_to_torus_probability, Variant};
use crate::error::{Error, Result};
use crate::measures::{sample_with, Domain, MeasureKind, ProbabilityMeasure, RandomDraw, Topology};
use crate::transport::{emd_cost, GroundMetric};

/// Pairs whose exact distance is at most this are left out of every ratio.
pub const TAU_FLOOR: f64 = 1e-12;
/// Relative slack before a held-out pair counts as violating `τ ≤ κ·d`.
pub const HELD_OUT_SLACK: f64 = 0.01;
const MIX_TOL: f64 = 1e-9;
const CALIBRATION_STREAM: u64 = 1 << 62;

pub const CSV_HEADER: &str = "n,variant,pairs,seed,kappa,max_expansion,max_contraction,distortion,wall_ms";

pub fn default_mix() -> Vec<(MeasureKind, f64)> {
    vec![
        (MeasureKind::DiracPair, 0.4),
        (MeasureKind::SparseK(8), 0.4),
        (MeasureKind::DenseDirichlet, 0.2),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub pair_count: usize,
    pub seed: u64,
    /// Generator kinds with weights summing to one.
    pub mix: Vec<(MeasureKind, f64)>,
    /// `Grid` measures are mapped into the torus of side `2n` before embedding.
    pub topology: Topology,
    pub variant: Variant,
    pub calibration_samples: usize,
    /// When false `wall_ms` is reported as 0 so output is byte-reproducible.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(n: usize, pair_count: usize, seed: u64) -> Self {
        Self {
            n,
            pair_count,
            seed,
            mix: default_mix(),
            topology: Topology::Torus,
            variant: Variant::Ab,
            calibration_samples: 200,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if self.pair_count == 0 {
            return Err(Error::Config("pair count must be at least 1".into()));
        }
        if self.calibration_samples == 0 {
            return Err(Error::Config("calibration needs at least one sample".into()));
        }
        if self.mix.is_empty() {
            return Err(Error::Config("generator mix is empty".into()));
        }
        let mut total = 0.0;
        for &(kind, w) in &self.mix {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Config(format!("weight {w} for {kind:?} is not a non-negative number")));
            }
            if let MeasureKind::SparseK(k) = kind {
                if k == 0 || k > self.n * self.n {
                    return Err(Error::Config(format!("sparse support {k} does not fit n = {}", self.n)));
                }
            }
            total += w;
        }
        if (total - 1.0).abs() > MIX_TOL {
            return Err(Error::Config(format!("mix weights sum to {total}, not 1")));
        }
        Ok(())
    }

    fn domain(&self) -> Result<Domain> {
        Domain::new(self.n, self.topology)
    }
}

/// Everything needed to evaluate pairs under one configuration.
struct PairContext {
    domain: Domain,
    metric: GroundMetric,
    variant: Variant,
    mix: Vec<(MeasureKind, f64)>,
    seed: u64,
}

/// Exact and embedded distance of one generated pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub tau: f64,
    pub embedded: f64,
}

impl PairContext {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let domain = cfg.domain()?;
        Ok(Self {
            domain,
            metric: GroundMetric::new(domain),
            variant: cfg.variant,
            mix: cfg.mix.clone(),
            seed: cfg.seed,
        })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn pick_kind(&self, rng: &mut ChaCha8Rng) -> MeasureKind {
        let x: f64 = rng.gen();
        let mut acc = 0.0;
        for &(kind, w) in &self.mix {
            acc += w;
            if x < acc {
                return kind;
            }
        }
        self.mix.iter().rev().find(|m| m.1 > 0.0).map_or(self.mix[0].0, |m| m.0)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, kind: MeasureKind) -> Result<ProbabilityMeasure> {
        match sample_with(rng, self.domain, kind)? {
            RandomDraw::Single(m) => Ok(m),
            RandomDraw::Pair(m, _) => Ok(m),
        }
    }

    fn pair(&self, stream: u64) -> Result<(ProbabilityMeasure, ProbabilityMeasure)> {
        let mut rng = self.rng(stream);
        let kind = self.pick_kind(&mut rng);
        match sample_with(&mut rng, self.domain, kind)? {
            RandomDraw::Pair(a, b) => Ok((a, b)),
            RandomDraw::Single(a) => Ok((a, self.draw(&mut rng, kind)?)),
        }
    }

    fn embed(&self, mu: &ProbabilityMeasure) -> Result<crate::embedding::EmbeddedVector> {
        match self.domain.topology() {
            Topology::Torus => embed_with(mu, self.variant),
            Topology::Grid => embed_with(&grid_to_torus_probability(mu)?, self.variant),
        }
    }

    fn evaluate(&self, stream: u64) -> Result<PairSample> {
        let (a, b) = self.pair(stream)?;
        let tau = emd_cost(&a, &b, &self.metric)?;
        let embedded = embedded_distance(&self.embed(&a)?, &self.embed(&b)?)?;
        Ok(PairSample { tau, embedded })
    }
}

fn calibration_ratio(samples: impl IntoIterator<Item = PairSample>) -> Option<f64> {
    samples
        .into_iter()
        .filter(|s| s.tau > TAU_FLOOR)
        .map(|s| s.tau / s.embedded)
        .reduce(f64::max)
}

fn calibrate_context(ctx: &PairContext, samples: usize) -> Result<f64> {
    let ratios = (0..samples as u64)
        .map(|i| ctx.evaluate(CALIBRATION_STREAM + i))
        .collect::<Result<Vec<_>>>()?;
    calibration_ratio(ratios).ok_or_else(|| {
        Error::Degenerate(format!("all {samples} calibration pairs coincide"))
    })
}

/// `κ_n = max τ / d_emb` over `samples` seeded pairs drawn from the default
/// mix on the torus with the `(A, B)` embedding.
pub fn calibrate(n: usize, seed: u64, samples: usize) -> Result<f64> {
    let mut cfg = ExperimentConfig::new(n, 1, seed);
    cfg.calibration_samples = samples;
    calibrate_with(&cfg)
}

/// Calibration constant for an arbitrary configuration. The sample for
/// `k` draws is a prefix of the sample for any larger count.
pub fn calibrate_with(cfg: &ExperimentConfig) -> Result<f64> {
    let ctx = PairContext::new(cfg)?;
    calibrate_context(&ctx, cfg.calibration_samples)
}

/// The evaluation pairs of `cfg`, in index order.
pub fn sample_pairs(cfg: &ExperimentConfig) -> Result<Vec<PairSample>> {
    let ctx = PairContext::new(cfg)?;
    (0..cfg.pair_count as u64).map(|i| ctx.evaluate(i)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub n: usize,
    pub variant: Variant,
    pub topology: Topology,
    pub kappa: f64,
    /// `max d_emb / τ`.
    pub max_expansion: f64,
    /// `max τ / d_emb`.
    pub max_contraction: f64,
    pub distortion: f64,
    pub pair_count: usize,
    /// Pairs left out because `τ ≤ TAU_FLOOR`.
    pub excluded_pairs: usize,
    /// Evaluation pairs with `τ > (1 + HELD_OUT_SLACK)·κ·d_emb`.
    pub held_out_violations: usize,
    pub seed: u64,
    pub wall_ms: u64,
}

impl DistortionReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.variant,
            self.pair_count,
            self.seed,
            self.kappa,
            self.max_expansion,
            self.max_contraction,
            self.distortion,
            self.wall_ms
        )
    }
}

pub fn run_distortion_experiment(cfg: &ExperimentConfig) -> Result<DistortionReport> {
    let start = Instant::now();
    let ctx = PairContext::new(cfg)?;
    let kappa = calibrate_context(&ctx, cfg.calibration_samples)?;

    let mut max_expansion = 0.0_f64;
    let mut max_contraction = 0.0_f64;
    let mut excluded = 0;
    let mut violations = 0;
    for i in 0..cfg.pair_count as u64 {
        let s = ctx.evaluate(i)?;
        if s.tau <= TAU_FLOOR {
            excluded += 1;
            continue;
        }
        if s.embedded <= 0.0 {
            return Err(Error::Degenerate(format!(
                "pair {i} has τ = {} but embeds to a single point",
                s.tau
            )));
        }
        max_expansion = max_expansion.max(s.embedded / s.tau);
        max_contraction = max_contraction.max(s.tau / s.embedded);
        if s.tau > (1.0 + HELD_OUT_SLACK) * kappa * s.embedded {
            violations += 1;
        }
    }
    if excluded == cfg.pair_count {
        return Err(Error::Degenerate("every evaluation pair has τ = 0".into()));
    }
    let wall_ms = if cfg.record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    Ok(DistortionReport {
        n: cfg.n,
        variant: cfg.variant,
        topology: cfg.topology,
        kappa,
        max_expansion,
        max_contraction,
        distortion: max_expansion * max_contraction,
        pair_count: cfg.pair_count,
        excluded_pairs: excluded,
        held_out_violations: violations,
        seed: cfg.seed,
        wall_ms,
    })
}

/// One report per side length, each with the template's seed and settings.
pub fn run_scaling_sweep(ns: &[usize], template: &ExperimentConfig) -> Result<Vec<DistortionReport>> {
    if ns.is_empty() {
        return Err(Error::Config("sweep needs at least one side length".into()));
    }
    ns.iter()
        .map(|&n| {
            let mut cfg = template.clone();
            cfg.n = n;
            run_distortion_experiment(&cfg)
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(reports: &[DistortionReport], out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(n: usize, pairs: usize, seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(n, pairs, seed);
        cfg.calibration_samples = 20;
        cfg
    }

    #[test]
    fn single_dirac_pair_has_unit_distortion() {
        let mut cfg = quick(8, 1, 3);
        cfg.mix = vec![(MeasureKind::DiracPair, 1.0)];
        let r = run_distortion_experiment(&cfg).unwrap();
        assert!((r.distortion - 1.0).abs() <= 1e-12);
        assert_eq!(r.excluded_pairs, 0);
    }

    #[test]
    fn both_variants_report_distortion_at_least_one() {
        for variant in [Variant::Ab, Variant::S] {
            let mut cfg = quick(8, 30, 9);
            cfg.variant = variant;
            let r = run_distortion_experiment(&cfg).unwrap();
            assert_eq!(r.variant, variant);
            assert!(r.distortion >= 1.0 - 1e-9);
            assert!(r.kappa.is_finite() && r.kappa > 0.0);
        }
    }

    #[test]
    fn grid_topology_runs_through_the_doubled_torus() {
        let mut cfg = quick(6, 10, 2);
        cfg.topology = Topology::Grid;
        let r = run_distortion_experiment(&cfg).unwrap();
        assert!(r.distortion >= 1.0 - 1e-9);
    }

    #[test]
    fn calibration_is_deterministic_and_monotone() {
        let k50 = calibrate(8, 42, 50).unwrap();
        assert_eq!(k50, calibrate(8, 42, 50).unwrap());
        let k100 = calibrate(8, 42, 100).unwrap();
        assert!(k100 >= k50);
        let mut cfg = quick(8, 1, 42);
        cfg.mix = vec![(MeasureKind::DiracPair, 1.0)];
        let k = calibrate_with(&cfg).unwrap();
        assert!(k.is_finite() && k > 0.0);
    }

    #[test]
    fn calibration_set_satisfies_the_lower_bound() {
        let cfg = quick(8, 1, 5);
        let kappa = calibrate_with(&cfg).unwrap();
        let ctx = PairContext::new(&cfg).unwrap();
        for i in 0..cfg.calibration_samples as u64 {
            let s = ctx.evaluate(CALIBRATION_STREAM + i).unwrap();
            if s.tau > TAU_FLOOR {
                assert!(s.tau / (kappa * s.embedded) <= 1.0 + 1e-6);
            }
        }
    }

    #[test]
    fn degenerate_calibration() {
        let mut cfg = quick(4, 1, 1);
        cfg.mix = vec![(MeasureKind::SparseK(16), 1.0)];
        assert!(matches!(calibrate_with(&cfg), Err(Error::Degenerate(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = quick(8, 0, 1);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.pair_count = 5;
        cfg.mix = vec![(MeasureKind::DiracPair, 0.5)];
        assert!(cfg.validate().is_err());
        cfg.mix = vec![(MeasureKind::DiracPair, 1.5), (MeasureKind::DenseDirichlet, -0.5)];
        assert!(cfg.validate().is_err());
        cfg.mix = vec![(MeasureKind::SparseK(65), 1.0)];
        assert!(cfg.validate().is_err());
        cfg.mix = default_mix();
        assert!(cfg.validate().is_ok());
        cfg.n = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_csv_is_reproducible() {
        let cfg = quick(4, 5, 8);
        let render = || {
            let reports = run_scaling_sweep(&[4, 6], &cfg).unwrap();
            let mut buf = Vec::new();
            write_sweep_csv(&reports, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("4,ab,5,8,"));
        assert!(lines[1].ends_with(",0"));
        assert_eq!(run_scaling_sweep(&[8], &cfg).unwrap().len(), 1);
        assert!(run_scaling_sweep(&[], &cfg).is_err());
    }

    #[test]
    fn pair_streams_do_not_depend_on_count() {
        let short = sample_pairs(&quick(8, 5, 4)).unwrap();
        let long = sample_pairs(&quick(8, 12, 4)).unwrap();
        assert_eq!(short[..], long[..5]);
    }
}
