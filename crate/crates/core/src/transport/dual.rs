//! Kantorovich dual certificates.
//!
//! The dual program maximises `Σ σ(p) f(p)` over potentials with `f(0,0) = 0`
//! and `|f(p) − f(q)| ≤ d(p,q)` on every 4-neighbour edge and every pair of
//! support cells. It is solved as the equivalent transshipment LP on that
//! constraint graph by the generic tableau simplex, which shares no code with
//! the primal network simplex.

use std::collections::{BTreeSet, VecDeque};

use ndarray::Array2;

use super::simplex::{self, StandardLp};
use super::{balanced_parts, GroundMetric};
use crate::error::{Error, Result};
use crate::measures::{Domain, Point, SignedMeasure, Topology};

/// Largest side length accepted by [`dual_potential`].
pub const DUAL_MAX_SIDE: usize = 32;
/// Slack allowed on each checked Lipschitz constraint.
pub const LIPSCHITZ_TOL: f64 = 1e-9;
const MAX_TABLEAU_ENTRIES: usize = 40_000_000;

/// A potential `f` on the cells, pinned to zero at the base point `(0,0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPotential {
    domain: Domain,
    values: Array2<f64>,
}

impl DualPotential {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, p: Point) -> f64 {
        self.values[[p.0, p.1]]
    }

    /// `Σ f·σ`.
    pub fn pairing(&self, sigma: &SignedMeasure) -> f64 {
        self.values
            .iter()
            .zip(sigma.values().iter())
            .map(|(f, s)| f * s)
            .sum()
    }

    /// Largest excess `|f(p) − f(q)| − d(p,q)` over all pairs drawn from
    /// `points` (zero when every pair is 1-Lipschitz).
    pub fn lipschitz_excess(&self, metric: &GroundMetric, points: &[Point]) -> f64 {
        let mut worst = 0.0_f64;
        for (i, &p) in points.iter().enumerate() {
            for &q in &points[i + 1..] {
                let gap = (self.get(p) - self.get(q)).abs() - metric.dist(p, q);
                worst = worst.max(gap);
            }
        }
        worst
    }

    /// Largest excess over the 4-neighbour edges.
    pub fn neighbor_excess(&self, metric: &GroundMetric) -> f64 {
        neighbor_edges(self.domain)
            .into_iter()
            .map(|(p, q)| (self.get(p) - self.get(q)).abs() - metric.dist(p, q))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    /// `Σ f·σ` for the returned potential, with σ's negative part rebalanced
    /// exactly as the primal solver does.
    pub value: f64,
    pub potential: DualPotential,
    /// Optimal objective of the transshipment LP the potential was read from.
    pub flow_cost: f64,
}

fn neighbor_edges(domain: Domain) -> Vec<(Point, Point)> {
    let n = domain.n();
    let wrap = domain.topology() == Topology::Torus;
    let mut edges = BTreeSet::new();
    let mut push = |p: Point, q: Point| {
        if p != q {
            edges.insert(if p < q { (p, q) } else { (q, p) });
        }
    };
    for a in 0..n {
        for b in 0..n {
            if b + 1 < n {
                push((a, b), (a, b + 1));
            } else if wrap {
                push((a, b), (a, 0));
            }
            if a + 1 < n {
                push((a, b), (a + 1, b));
            } else if wrap {
                push((a, b), (0, b));
            }
        }
    }
    edges.into_iter().collect()
}

/// Solves the dual program for a zero-mass `σ` and returns an optimal
/// potential, checked against every constraint it was solved under.
pub fn dual_potential(sigma: &SignedMeasure, metric: &GroundMetric) -> Result<DualSolution> {
    let domain = sigma.domain();
    if domain != metric.domain() {
        return Err(Error::DomainMismatch);
    }
    if domain.n() > DUAL_MAX_SIDE {
        return Err(Error::SizeGuard(format!(
            "dual LP limited to side {DUAL_MAX_SIDE}, got {}",
            domain.n()
        )));
    }
    let parts = balanced_parts(sigma)?;
    let mut balanced = SignedMeasure::zeros(domain).into_values();
    for &(p, v) in &parts.sources {
        balanced[[p.0, p.1]] = v;
    }
    for &(p, v) in &parts.sinks {
        balanced[[p.0, p.1]] = -v;
    }
    let support: Vec<Point> = parts
        .sources
        .iter()
        .chain(&parts.sinks)
        .map(|a| a.0)
        .collect();

    if support.is_empty() {
        return Ok(DualSolution {
            value: 0.0,
            potential: DualPotential {
                domain,
                values: Array2::zeros((domain.n(), domain.n())),
            },
            flow_cost: 0.0,
        });
    }

    let neighbors = neighbor_edges(domain);
    let mut edges: BTreeSet<(Point, Point)> = neighbors.iter().copied().collect();
    for (i, &p) in support.iter().enumerate() {
        for &q in &support[i + 1..] {
            edges.insert(if p < q { (p, q) } else { (q, p) });
        }
    }
    let edges: Vec<(Point, Point)> = edges.into_iter().collect();

    // Transshipment LP: one arc per direction, one row per non-base cell.
    let cells = domain.cells();
    let rows = cells - 1;
    let cols = 2 * edges.len();
    if rows * (rows + cols + 1) > MAX_TABLEAU_ENTRIES {
        return Err(Error::SizeGuard(format!(
            "dual LP with {rows} rows and {cols} columns is too large"
        )));
    }
    let row_of = |p: Point| domain.index(p).checked_sub(1);
    let mut a = vec![0.0; rows * cols];
    let mut c = Vec::with_capacity(cols);
    let mut arcs = Vec::with_capacity(cols);
    for &(p, q) in &edges {
        let d = metric.dist(p, q);
        for (tail, head) in [(p, q), (q, p)] {
            let col = arcs.len();
            if let Some(r) = row_of(tail) {
                a[r * cols + col] = 1.0;
            }
            if let Some(r) = row_of(head) {
                a[r * cols + col] = -1.0;
            }
            arcs.push((tail, head, d));
            c.push(d);
        }
    }
    let b: Vec<f64> = (1..cells)
        .map(|i| {
            let p = domain.point(i);
            balanced[[p.0, p.1]]
        })
        .collect();

    let lp = StandardLp {
        rows,
        cols,
        a,
        b,
        c,
    };
    let solution = simplex::solve(&lp)?;

    let values = tree_potential(domain, &arcs, &solution.basis).unwrap_or_else(|| {
        let mut f = Array2::zeros((domain.n(), domain.n()));
        for (i, y) in solution.duals.iter().enumerate() {
            let p = domain.point(i + 1);
            f[[p.0, p.1]] = *y;
        }
        f
    });
    let potential = DualPotential { domain, values };

    let excess = edges
        .iter()
        .map(|&(p, q)| (potential.get(p) - potential.get(q)).abs() - metric.dist(p, q))
        .fold(0.0, f64::max);
    if excess > LIPSCHITZ_TOL {
        return Err(Error::Solver(format!(
            "dual potential violates a Lipschitz constraint by {excess:e}"
        )));
    }

    let value = potential
        .values
        .iter()
        .zip(balanced.iter())
        .map(|(f, s)| f * s)
        .sum();
    Ok(DualSolution {
        value,
        potential,
        flow_cost: solution.objective,
    })
}

/// Rebuilds the potential from the tight (basic) arcs of the final basis by
/// walking the spanning tree out of the base point. Returns `None` when the
/// basis does not span every cell.
fn tree_potential(
    domain: Domain,
    arcs: &[(Point, Point, f64)],
    basis: &[usize],
) -> Option<Array2<f64>> {
    let cells = domain.cells();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cells];
    for &col in basis {
        let &(tail, head, d) = arcs.get(col)?;
        let (t, h) = (domain.index(tail), domain.index(head));
        // Tight arc: f(tail) − f(head) = d.
        adj[t].push((h, -d));
        adj[h].push((t, d));
    }
    let mut f = vec![f64::NAN; cells];
    f[0] = 0.0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &(v, step) in &adj[u] {
            if f[v].is_nan() {
                f[v] = f[u] + step;
                queue.push_back(v);
            }
        }
    }
    if f.iter().any(|v| v.is_nan()) {
        return None;
    }
    Array2::from_shape_vec((domain.n(), domain.n()), f).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{random_measure, MeasureKind, ProbabilityMeasure};
    use crate::transport::emd_norm;

    #[test]
    fn zero_measure() {
        let d = Domain::grid(5).unwrap();
        let sol = dual_potential(&SignedMeasure::zeros(d), &GroundMetric::new(d)).unwrap();
        assert_eq!(sol.value, 0.0);
        assert!(sol.potential.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_dipole() {
        let d = Domain::grid(6).unwrap();
        let metric = GroundMetric::new(d);
        let sigma = SignedMeasure::from_atoms(d, &[((2, 4), 1.0), ((2, 3), -1.0)]).unwrap();
        let sol = dual_potential(&sigma, &metric).unwrap();
        assert!((sol.value - 1.0).abs() <= 1e-9);
        assert_eq!(sol.potential.get((0, 0)), 0.0);
        assert!(sol.potential.neighbor_excess(&metric) <= LIPSCHITZ_TOL);
    }

    #[test]
    fn sparse_instance_matches_primal() {
        let d = Domain::grid(8).unwrap();
        let metric = GroundMetric::new(d);
        let mu = random_measure(5, d, MeasureKind::SparseK(6)).unwrap().single().unwrap();
        let nu = random_measure(6, d, MeasureKind::SparseK(4)).unwrap().single().unwrap();
        let sigma = mu.difference(&nu).unwrap();
        let primal = emd_norm(&sigma, &metric).unwrap();
        let sol = dual_potential(&sigma, &metric).unwrap();
        assert!((sol.value - primal).abs() <= 1e-7 * (1.0 + primal));
        assert!((sol.flow_cost - primal).abs() <= 1e-7 * (1.0 + primal));
        let support: Vec<Point> = sigma.support().into_iter().map(|a| a.0).collect();
        assert!(sol.potential.lipschitz_excess(&metric, &support) <= LIPSCHITZ_TOL);
        assert!((sol.potential.pairing(&sigma) - sol.value).abs() <= 1e-12);
    }

    #[test]
    fn torus_instance_matches_primal() {
        let d = Domain::torus(6).unwrap();
        let metric = GroundMetric::new(d);
        let mu = ProbabilityMeasure::uniform_on_set(d, &[(0, 0), (5, 5), (3, 1)]).unwrap();
        let nu = ProbabilityMeasure::uniform_on_set(d, &[(0, 5), (2, 2), (4, 4)]).unwrap();
        let sigma = mu.difference(&nu).unwrap();
        let primal = emd_norm(&sigma, &metric).unwrap();
        let sol = dual_potential(&sigma, &metric).unwrap();
        assert!((sol.value - primal).abs() <= 1e-7 * (1.0 + primal));
    }

    #[test]
    fn guards() {
        let big = Domain::grid(33).unwrap();
        assert!(matches!(
            dual_potential(&SignedMeasure::zeros(big), &GroundMetric::new(big)),
            Err(Error::SizeGuard(_))
        ));
        let d = Domain::grid(4).unwrap();
        let bad = SignedMeasure::from_atoms(d, &[((1, 1), 0.5)]).unwrap();
        assert!(matches!(
            dual_potential(&bad, &GroundMetric::new(d)),
            Err(Error::NonZeroMass { .. })
        ));
    }

    #[test]
    fn torus_neighbors_wrap_without_duplicates() {
        assert_eq!(neighbor_edges(Domain::torus(4).unwrap()).len(), 32);
        assert_eq!(neighbor_edges(Domain::grid(4).unwrap()).len(), 24);
        assert_eq!(neighbor_edges(Domain::torus(2).unwrap()).len(), 4);
        assert!(neighbor_edges(Domain::torus(1).unwrap()).is_empty());
    }
}
