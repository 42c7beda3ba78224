use serde::{Deserialize, Serialize};

use super::GroundMetric;
use crate::measures::{Point, SignedMeasure};

/// Per-cell marginal tolerance for a plan to count as feasible.
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub source: Point,
    pub target: Point,
    pub mass: f64,
}

/// A sparse coupling together with its transport cost.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransportPlan {
    pub entries: Vec<PlanEntry>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.mass).sum()
    }

    /// Writes one `<ax> <ay> <bx> <by> <mass>` line per entry followed by
    /// `cost <value>`.
    pub fn write_text<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        for e in &self.entries {
            writeln!(
                out,
                "{} {} {} {} {}",
                e.source.0, e.source.1, e.target.0, e.target.1, e.mass
            )?;
        }
        writeln!(out, "cost {}", self.cost)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub feasible: bool,
    pub max_marginal_violation: f64,
    pub cost_recomputed: f64,
}

/// Recomputes both marginals and the cost of `plan` without consulting the
/// solver that produced it.
pub fn verify_plan(
    plan: &TransportPlan,
    source: &SignedMeasure,
    target: &SignedMeasure,
    metric: &GroundMetric,
) -> PlanReport {
    let domain = metric.domain();
    let infeasible = PlanReport {
        feasible: false,
        max_marginal_violation: f64::INFINITY,
        cost_recomputed: f64::NAN,
    };
    if source.n() != domain.n() || target.n() != domain.n() {
        return infeasible;
    }
    let mut rows = SignedMeasure::zeros(domain).into_values();
    let mut cols = rows.clone();
    let mut cost = 0.0;
    let mut signs_ok = true;
    for e in &plan.entries {
        if !domain.contains(e.source) || !domain.contains(e.target) || !e.mass.is_finite() {
            return infeasible;
        }
        signs_ok &= e.mass >= 0.0;
        rows[[e.source.0, e.source.1]] += e.mass;
        cols[[e.target.0, e.target.1]] += e.mass;
        cost += e.mass * metric.dist(e.source, e.target);
    }
    let row_gap = (&rows - source.values())
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let col_gap = (&cols - target.values())
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let violation = row_gap.max(col_gap);
    PlanReport {
        feasible: signs_ok && violation <= MARGINAL_TOL,
        max_marginal_violation: violation,
        cost_recomputed: cost,
    }
}
