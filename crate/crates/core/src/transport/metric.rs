use crate::error::Result;
use crate::measures::{Domain, Point, Topology};

/// Euclidean ground distance on the grid, or its geodesic analogue on the
/// torus (per-axis arc length `min(|Δ|, n − |Δ|)`, then ℓ₂).
///
/// Distances depend only on the per-axis offsets, so they are tabulated once.
#[derive(Debug, Clone)]
pub struct GroundMetric {
    domain: Domain,
    table: Vec<f64>,
}

impl GroundMetric {
    pub fn new(domain: Domain) -> Self {
        let n = domain.n();
        let mut table = Vec::with_capacity(n * n);
        for da in 0..n {
            for db in 0..n {
                table.push((da as f64).hypot(db as f64));
            }
        }
        Self { domain, table }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    fn offset(&self, x: usize, y: usize) -> usize {
        let d = x.abs_diff(y);
        match self.domain.topology() {
            Topology::Grid => d,
            Topology::Torus => d.min(self.domain.n() - d),
        }
    }

    /// Distance without range checks; callers guarantee both points are in
    /// the domain.
    #[inline]
    pub fn dist(&self, p: Point, q: Point) -> f64 {
        let da = self.offset(p.0, q.0);
        let db = self.offset(p.1, q.1);
        self.table[da * self.domain.n() + db]
    }

    pub fn distance(&self, p: Point, q: Point) -> Result<f64> {
        self.domain.check_point(p)?;
        self.domain.check_point(q)?;
        Ok(self.dist(p, q))
    }

    /// Largest distance realised on the domain.
    pub fn diameter(&self) -> f64 {
        let n = self.domain.n();
        let far = match self.domain.topology() {
            Topology::Grid => n - 1,
            Topology::Torus => n / 2,
        };
        self.table[far * n + far]
    }
}
