//! Signed and probability measures on the discrete square {0,…,n−1}², viewed
//! either as a planar grid or as the torus ℤ_n².
//!
//! Measures are stored densely as an n×n table indexed `[[a, b]]`; sparse
//! supports are extracted on demand by the transport solvers.

mod io;
mod random;

pub use io::{read_measure, write_dense, write_sparse, MeasureFormat};
pub use random::{random_measure, MeasureKind, RandomDraw};
pub(crate) use random::sample_with;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell coordinates `(a, b)`, each in `0..n`.
pub type Point = (usize, usize);

/// Absolute tolerance for membership in the zero-mass subspace.
pub const ZERO_MASS_TOL: f64 = 1e-12;
/// Looser tolerance accepted by operations that rebalance before use.
pub const REBALANCE_TOL: f64 = 1e-9;
/// Absolute tolerance on the total mass of a probability measure.
pub const PROBABILITY_TOL: f64 = 1e-12;
/// Negative entries above this are treated as representational noise.
pub const NEGATIVE_CLAMP: f64 = -1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Grid,
    Torus,
}

impl Topology {
    pub fn as_str(self) -> &'static str {
        match self {
            Topology::Grid => "grid",
            Topology::Torus => "torus",
        }
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Topology::Grid),
            "torus" => Ok(Topology::Torus),
            other => Err(Error::Config(format!("unknown topology '{other}'"))),
        }
    }
}

/// Side length and topology of the underlying point set. `n` counts cells
/// per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain {
    n: usize,
    topology: Topology,
}

impl Domain {
    pub fn new(n: usize, topology: Topology) -> Result<Self> {
        if n == 0 {
            return Err(Error::SideTooSmall { n, min: 1 });
        }
        Ok(Self { n, topology })
    }

    pub fn grid(n: usize) -> Result<Self> {
        Self::new(n, Topology::Grid)
    }

    pub fn torus(n: usize) -> Result<Self> {
        Self::new(n, Topology::Torus)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn cells(&self) -> usize {
        self.n * self.n
    }

    pub fn contains(&self, p: Point) -> bool {
        p.0 < self.n && p.1 < self.n
    }

    pub fn check_point(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfRange { point: p, n: self.n })
        }
    }

    pub fn require(&self, topology: Topology) -> Result<()> {
        if self.topology == topology {
            Ok(())
        } else {
            Err(Error::WrongTopology {
                expected: topology,
                found: self.topology,
            })
        }
    }

    /// Row-major cell index.
    pub fn index(&self, p: Point) -> usize {
        p.0 * self.n + p.1
    }

    pub fn point(&self, index: usize) -> Point {
        (index / self.n, index % self.n)
    }
}

/// A finite real-valued mass table on a [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    domain: Domain,
    mass: Array2<f64>,
}

impl SignedMeasure {
    pub fn zeros(domain: Domain) -> Self {
        Self {
            domain,
            mass: Array2::zeros((domain.n, domain.n)),
        }
    }

    /// Wraps a dense n×n table after checking its shape and finiteness.
    pub fn from_dense(domain: Domain, values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows != domain.n || cols != domain.n {
            return Err(Error::ShapeMismatch {
                expected: domain.n,
                rows,
                cols,
            });
        }
        if let Some(((a, b), &value)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { a, b, value });
        }
        Ok(Self {
            domain,
            mass: values,
        })
    }

    /// Builds a measure from nested rows, mostly for tests and examples.
    pub fn from_rows(domain: Domain, rows: &[Vec<f64>]) -> Result<Self> {
        let n = domain.n;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch {
                expected: n,
                rows: rows.len(),
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((n, n), flat).expect("shape checked above");
        Self::from_dense(domain, values)
    }

    /// Sum of point masses `Σ weight·δ_p`; repeated points accumulate.
    pub fn from_atoms(domain: Domain, atoms: &[(Point, f64)]) -> Result<Self> {
        let mut mass = Array2::zeros((domain.n, domain.n));
        for &(p, w) in atoms {
            domain.check_point(p)?;
            mass[[p.0, p.1]] += w;
        }
        Self::from_dense(domain, mass)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.mass
    }

    pub fn into_values(self) -> Array2<f64> {
        self.mass
    }

    pub fn get(&self, p: Point) -> f64 {
        self.mass[[p.0, p.1]]
    }

    /// Total mass, summed row-major in a fixed order.
    pub fn total_mass(&self) -> f64 {
        let mut total = 0.0;
        for &v in self.mass.iter() {
            total += v;
        }
        total
    }

    pub fn is_zero_mass(&self, tol: f64) -> bool {
        self.total_mass().abs() <= tol
    }

    /// Largest absolute entry.
    pub fn linf_norm(&self) -> f64 {
        self.mass.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Sum of absolute entries.
    pub fn l1_norm(&self) -> f64 {
        self.mass.iter().map(|v| v.abs()).sum()
    }

    /// Cells with non-zero mass, row-major.
    pub fn support(&self) -> Vec<(Point, f64)> {
        self.mass
            .indexed_iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|(p, &v)| (p, v))
            .collect()
    }

    /// Splits into nonnegative, disjointly supported parts with
    /// `pos − neg == self` entrywise.
    pub fn jordan_decompose(&self) -> (SignedMeasure, SignedMeasure) {
        let pos = self.mass.mapv(|v| if v > 0.0 { v } else { 0.0 });
        let neg = self.mass.mapv(|v| if v < 0.0 { -v } else { 0.0 });
        (
            SignedMeasure {
                domain: self.domain,
                mass: pos,
            },
            SignedMeasure {
                domain: self.domain,
                mass: neg,
            },
        )
    }

    pub fn scaled(&self, c: f64) -> SignedMeasure {
        SignedMeasure {
            domain: self.domain,
            mass: &self.mass * c,
        }
    }

    pub fn add(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        self.same_domain(other)?;
        Ok(SignedMeasure {
            domain: self.domain,
            mass: &self.mass + &other.mass,
        })
    }

    pub fn sub(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        self.same_domain(other)?;
        Ok(SignedMeasure {
            domain: self.domain,
            mass: &self.mass - &other.mass,
        })
    }

    /// Same masses, reinterpreted on the other topology of the same side.
    pub fn with_topology(&self, topology: Topology) -> SignedMeasure {
        SignedMeasure {
            domain: Domain {
                n: self.domain.n,
                topology,
            },
            mass: self.mass.clone(),
        }
    }

    fn same_domain(&self, other: &SignedMeasure) -> Result<()> {
        if self.domain == other.domain {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }
}

/// A nonnegative measure of total mass one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMeasure(SignedMeasure);

impl ProbabilityMeasure {
    /// Validates a signed measure as a probability measure. Entries in
    /// `[NEGATIVE_CLAMP, 0)` are clamped to zero; anything more negative is
    /// rejected.
    pub fn new(measure: SignedMeasure) -> Result<Self> {
        let mut measure = measure;
        for ((a, b), v) in measure.mass.indexed_iter_mut() {
            if *v < 0.0 {
                if *v >= NEGATIVE_CLAMP {
                    *v = 0.0;
                } else {
                    return Err(Error::NotProbability(format!(
                        "negative mass {v:e} at ({a}, {b})"
                    )));
                }
            }
        }
        let total = measure.total_mass();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::NotProbability(format!("total mass {total}")));
        }
        Ok(Self(measure))
    }

    pub fn dirac(domain: Domain, p: Point) -> Result<Self> {
        domain.check_point(p)?;
        let mut m = SignedMeasure::zeros(domain);
        m.mass[[p.0, p.1]] = 1.0;
        Ok(Self(m))
    }

    pub fn uniform(domain: Domain) -> Self {
        let w = 1.0 / domain.cells() as f64;
        Self(SignedMeasure {
            domain,
            mass: Array2::from_elem((domain.n, domain.n), w),
        })
    }

    /// Mass `1/k` on each of `k` distinct points.
    pub fn uniform_on_set(domain: Domain, points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let mut m = SignedMeasure::zeros(domain);
        let w = 1.0 / points.len() as f64;
        for &p in points {
            domain.check_point(p)?;
            let cell = &mut m.mass[[p.0, p.1]];
            if *cell != 0.0 {
                return Err(Error::DuplicatePoint(p));
            }
            *cell = w;
        }
        Ok(Self(m))
    }

    pub fn domain(&self) -> Domain {
        self.0.domain
    }

    pub fn n(&self) -> usize {
        self.0.domain.n
    }

    pub fn as_signed(&self) -> &SignedMeasure {
        &self.0
    }

    pub fn into_signed(self) -> SignedMeasure {
        self.0
    }

    pub fn get(&self, p: Point) -> f64 {
        self.0.get(p)
    }

    /// `self − other`, a member of the zero-mass subspace.
    pub fn difference(&self, other: &ProbabilityMeasure) -> Result<SignedMeasure> {
        self.0.sub(&other.0)
    }

    /// `self − U` with `U` the uniform measure.
    pub fn center(&self) -> SignedMeasure {
        let w = 1.0 / self.domain().cells() as f64;
        SignedMeasure {
            domain: self.0.domain,
            mass: self.0.mass.mapv(|v| v - w),
        }
    }

    pub(crate) fn from_signed_unchecked(measure: SignedMeasure) -> Self {
        Self(measure)
    }
}
