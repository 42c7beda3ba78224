use ndarray::Array2;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::{Domain, ProbabilityMeasure, SignedMeasure};
use crate::error::{Error, Result};

/// Benchmark input families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    /// Uniform measure on `k` distinct random cells.
    SparseK(usize),
    /// Flat Dirichlet draw over every cell; strictly positive.
    DenseDirichlet,
    /// Two Diracs at distinct random cells.
    DiracPair,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RandomDraw {
    Single(ProbabilityMeasure),
    Pair(ProbabilityMeasure, ProbabilityMeasure),
}

impl RandomDraw {
    pub fn single(self) -> Option<ProbabilityMeasure> {
        match self {
            RandomDraw::Single(m) => Some(m),
            RandomDraw::Pair(..) => None,
        }
    }
}

/// Deterministic draw from `kind`, a pure function of its arguments.
pub fn random_measure(seed: u64, domain: Domain, kind: MeasureKind) -> Result<RandomDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(&mut rng, domain, kind)
}

pub(crate) fn sample_with<R: Rng + ?Sized>(
    rng: &mut R,
    domain: Domain,
    kind: MeasureKind,
) -> Result<RandomDraw> {
    let cells = domain.cells();
    match kind {
        MeasureKind::SparseK(k) => {
            if k == 0 || k > cells {
                return Err(Error::Config(format!(
                    "support size {k} must lie in 1..={cells}"
                )));
            }
            let points: Vec<_> = index::sample(rng, cells, k)
                .into_iter()
                .map(|i| domain.point(i))
                .collect();
            ProbabilityMeasure::uniform_on_set(domain, &points).map(RandomDraw::Single)
        }
        MeasureKind::DenseDirichlet => {
            let draws: Vec<f64> = (0..cells)
                .map(|_| {
                    let x: f64 = rng.sample(Exp1);
                    x.max(f64::MIN_POSITIVE)
                })
                .collect();
            let total: f64 = draws.iter().sum();
            let mass = Array2::from_shape_vec((domain.n(), domain.n()), draws)
                .expect("cells == n*n")
                .mapv(|x| x / total);
            let measure = SignedMeasure::from_dense(domain, mass)?;
            ProbabilityMeasure::new(measure).map(RandomDraw::Single)
        }
        MeasureKind::DiracPair => {
            if cells < 2 {
                return Err(Error::Config("a Dirac pair needs at least two cells".into()));
            }
            let picks = index::sample(rng, cells, 2);
            let p = ProbabilityMeasure::dirac(domain, domain.point(picks.index(0)))?;
            let q = ProbabilityMeasure::dirac(domain, domain.point(picks.index(1)))?;
            Ok(RandomDraw::Pair(p, q))
        }
    }
}
