//! Exact transportation cost (Earthmover / Wasserstein-1) between measures,
//! minimum-weight matchings, and Kantorovich dual certificates.

mod dual;
mod matching;
mod metric;
mod network_simplex;
mod plan;
mod simplex;

pub use dual::{dual_potential, DualPotential, DualSolution, DUAL_MAX_SIDE, LIPSCHITZ_TOL};
pub use matching::{brute_force_matching, min_weight_matching, Matching, BRUTE_FORCE_MAX};
pub use metric::GroundMetric;
pub use network_simplex::solve_transport;
pub use plan::{verify_plan, PlanEntry, PlanReport, TransportPlan, MARGINAL_TOL};

use crate::error::{Error, Result};
use crate::measures::{Point, ProbabilityMeasure, SignedMeasure, REBALANCE_TOL};

/// Largest relative gap between the positive and negative parts that
/// rebalancing will absorb.
pub const MAX_IMBALANCE: f64 = 1e-6;

/// Atoms of the positive part and of the negative part, the latter rescaled
/// so both sides carry bit-for-bit comparable totals.
pub(crate) struct BalancedParts {
    pub sources: Vec<(Point, f64)>,
    pub sinks: Vec<(Point, f64)>,
}

pub(crate) fn balanced_parts(sigma: &SignedMeasure) -> Result<BalancedParts> {
    let total = sigma.total_mass();
    if total.abs() > REBALANCE_TOL {
        return Err(Error::NonZeroMass { total });
    }
    let mut sources = Vec::new();
    let mut sinks = Vec::new();
    for (p, v) in sigma.support() {
        if v > 0.0 {
            sources.push((p, v));
        } else {
            sinks.push((p, -v));
        }
    }
    let pos: f64 = sources.iter().map(|a| a.1).sum();
    let neg: f64 = sinks.iter().map(|a| a.1).sum();
    if pos == 0.0 && neg == 0.0 {
        return Ok(BalancedParts { sources, sinks });
    }
    let gap = (pos - neg).abs() / pos.max(neg);
    if gap > MAX_IMBALANCE {
        return Err(Error::Unbalanced { gap });
    }
    let ratio = pos / neg;
    for s in &mut sinks {
        s.1 *= ratio;
    }
    Ok(BalancedParts { sources, sinks })
}

fn check_domain(sigma: &SignedMeasure, metric: &GroundMetric) -> Result<()> {
    if sigma.domain() == metric.domain() {
        Ok(())
    } else {
        Err(Error::DomainMismatch)
    }
}

/// Optimal plan moving `σ⁺` onto `σ⁻` for a zero-mass `σ`.
pub fn transport_signed(sigma: &SignedMeasure, metric: &GroundMetric) -> Result<TransportPlan> {
    check_domain(sigma, metric)?;
    let parts = balanced_parts(sigma)?;
    let (src, dst) = (&parts.sources, &parts.sinks);
    let supply: Vec<f64> = src.iter().map(|a| a.1).collect();
    let demand: Vec<f64> = dst.iter().map(|a| a.1).collect();
    let mut costs = Vec::with_capacity(src.len() * dst.len());
    for &(p, _) in src {
        for &(q, _) in dst {
            costs.push(metric.dist(p, q));
        }
    }
    let flows = solve_transport(&supply, &demand, &costs)?;
    let mut cost = 0.0;
    let entries = flows
        .into_iter()
        .map(|(i, j, mass)| {
            cost += mass * costs[i * dst.len() + j];
            PlanEntry {
                source: src[i].0,
                target: dst[j].0,
                mass,
            }
        })
        .collect();
    Ok(TransportPlan { entries, cost })
}

/// Transportation-cost norm `‖σ‖_τ = τ(σ⁺, σ⁻)` of a zero-mass measure.
pub fn emd_norm(sigma: &SignedMeasure, metric: &GroundMetric) -> Result<f64> {
    transport_signed(sigma, metric).map(|p| p.cost)
}

/// Exact transportation cost between two probability measures, with an
/// optimal coupling. Mass shared by both measures stays in place; the rest
/// is routed by solving for `μ − ν`.
pub fn emd(
    mu: &ProbabilityMeasure,
    nu: &ProbabilityMeasure,
    metric: &GroundMetric,
) -> Result<TransportPlan> {
    if mu.domain() != nu.domain() {
        return Err(Error::DomainMismatch);
    }
    let diff = mu.difference(nu)?;
    let mut plan = transport_signed(&diff, metric)?;
    for ((p, &a), &b) in mu
        .as_signed()
        .values()
        .indexed_iter()
        .zip(nu.as_signed().values().iter())
    {
        let shared = a.min(b);
        if shared > 0.0 {
            plan.entries.push(PlanEntry {
                source: p,
                target: p,
                mass: shared,
            });
        }
    }
    plan.entries
        .sort_by(|x, y| (x.source, x.target).cmp(&(y.source, y.target)));
    Ok(plan)
}

/// `τ(μ, ν)` without the plan.
pub fn emd_cost(
    mu: &ProbabilityMeasure,
    nu: &ProbabilityMeasure,
    metric: &GroundMetric,
) -> Result<f64> {
    if mu.domain() != nu.domain() {
        return Err(Error::DomainMismatch);
    }
    emd_norm(&mu.difference(nu)?, metric)
}
