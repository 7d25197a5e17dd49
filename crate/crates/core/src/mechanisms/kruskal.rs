use std::time::Instant;

use super::{empty_result, exponential_log_sizes, tree_eps_prime, MechanismResult, OpsCounter};
use crate::error::Result;
use crate::graph::{SpanningTree, WeightedGraph};
use crate::ppsacr::{CycleRemoval, LogWeightSampler, RemovalRule};
use crate::privacy::PrivacyBudget;
use crate::randomness::RngStream;
use crate::scalar::Real;

/// Private Kruskal: `n − 1` rounds, each sampling a live edge with
/// probability proportional to `exp(−ε′ w_e / (2Δ∞))`, then removing every
/// edge that would now close a cycle.
///
/// `ops.edge_checks[e]` counts how often edge `e` was examined by the cycle
/// removal scans.
pub fn private_kruskal<F: Real>(
    g: &WeightedGraph<F>,
    budget: &PrivacyBudget<F>,
    rng: &mut RngStream,
) -> Result<MechanismResult<F>> {
    let start = Instant::now();
    let Some(eps_prime) = tree_eps_prime(g, budget)? else {
        return Ok(empty_result());
    };
    let mut sampler = LogWeightSampler::new(exponential_log_sizes(g, eps_prime, budget.delta_inf()), true)?;
    let mut rule = CycleRemoval::new(g);
    let mut selected = Vec::with_capacity(g.n() - 1);
    let mut dropped = Vec::new();
    let mut tree_ops = 0u64;
    while selected.len() + 1 < g.n() {
        let e = sampler.sample(rng)?;
        sampler.remove(e)?;
        tree_ops += 2;
        selected.push(e);
        dropped.clear();
        rule.removals(&selected, &mut dropped);
        for &x in &dropped {
            if sampler.is_live(x) {
                sampler.remove(x)?;
                tree_ops += 1;
            }
        }
    }
    Ok(MechanismResult {
        tree: SpanningTree::from_sorted_unchecked(selected),
        noisy_weights: None,
        wall_time: start.elapsed(),
        ops: OpsCounter {
            edge_checks: rule.into_checks(),
            tree_ops,
        },
    })
}
