use std::time::Instant;

use super::{empty_result, exponential_log_sizes, tree_eps_prime, MechanismResult, OpsCounter};
use crate::error::Result;
use crate::graph::{SpanningTree, WeightedGraph};
use crate::ppsacr::LogWeightSampler;
use crate::privacy::PrivacyBudget;
use crate::randomness::RngStream;
use crate::scalar::Real;

/// Private Prim-Jarník from vertex 1. Each round draws one cut edge with the
/// exponential mechanism (probability ∝ `exp(−ε′ w_e / (2Δ∞))`).
///
/// Live leaves of the sampler are exactly the edges crossing the current cut:
/// when a vertex joins, its edges into the tree are removed and its edges out
/// of the tree are activated.
pub fn pamst<F: Real>(
    g: &WeightedGraph<F>,
    budget: &PrivacyBudget<F>,
    rng: &mut RngStream,
) -> Result<MechanismResult<F>> {
    let start = Instant::now();
    let Some(eps_prime) = tree_eps_prime(g, budget)? else {
        return Ok(empty_result());
    };
    let mut sampler = LogWeightSampler::new(exponential_log_sizes(g, eps_prime, budget.delta_inf()), false)?;
    let mut in_tree = vec![false; g.n()];
    let mut tree = Vec::with_capacity(g.n() - 1);
    let mut tree_ops = 0u64;

    let join = |v: usize, in_tree: &mut Vec<bool>, sampler: &mut LogWeightSampler<F>| -> Result<u64> {
        in_tree[v - 1] = true;
        let mut ops = 0;
        for &e in g.incident(v) {
            let (a, b) = g.endpoints(e);
            let other = if a == v { b } else { a };
            if in_tree[other - 1] {
                if sampler.is_live(e) {
                    sampler.remove(e)?;
                    ops += 1;
                }
            } else {
                sampler.activate(e)?;
                ops += 1;
            }
        }
        Ok(ops)
    };

    tree_ops += join(1, &mut in_tree, &mut sampler)?;
    while tree.len() + 1 < g.n() {
        let e = sampler.sample(rng)?;
        tree_ops += 1;
        let (a, b) = g.endpoints(e);
        let fresh = if in_tree[a - 1] { b } else { a };
        tree.push(e);
        // removes e itself, since both ends are now in the tree
        tree_ops += join(fresh, &mut in_tree, &mut sampler)?;
    }
    Ok(MechanismResult {
        tree: SpanningTree::from_sorted_unchecked(tree),
        noisy_weights: None,
        wall_time: start.elapsed(),
        ops: OpsCounter {
            edge_checks: Vec::new(),
            tree_ops,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, kruskal_mst};
    use crate::oracle::{stats::chi_square_counts, tally};

    #[test]
    fn path_is_always_returned() {
        let g = build_graph(5, &[(3, 4), (1, 2), (4, 5), (2, 3)], &[1.0f64, 9.0, 2.0, 4.0]).unwrap();
        let budget = PrivacyBudget::from_rho(0.01, 1e-6, 1.0).unwrap();
        let mut r = RngStream::new(1, 0);
        for _ in 0..200 {
            assert_eq!(pamst(&g, &budget, &mut r).unwrap().tree.edge_ids(), &[0, 1, 2, 3]);
        }
    }

    #[test]
    fn huge_eps_recovers_mst() {
        let w = [0.9f64, 0.1, 0.5, 0.7, 0.3, 0.2];
        let g = build_graph(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)], &w).unwrap();
        let mst = kruskal_mst(&g, g.weights()).unwrap();
        let budget = PrivacyBudget::from_eps_prime(1e6, 3, 1e-6, 1.0).unwrap();
        let mut r = RngStream::new(2, 0);
        let hits = (0..2000).filter(|_| pamst(&g, &budget, &mut r).unwrap().tree == mst).count();
        assert!(hits as f64 / 2000.0 >= 0.999);
    }

    #[test]
    fn triangle_matches_closed_form() {
        // from vertex 1 the cut is {e0, e2}; after e0 it is {e1, e2}, after
        // e2 it is {e0, e1}
        let w = [0.0f64, 1.0, 2.0];
        let g = build_graph(3, &[(1, 2), (2, 3), (1, 3)], &w).unwrap();
        let budget = PrivacyBudget::from_eps_prime(1.0, 2, 1e-6, 1.0).unwrap();
        let s: Vec<f64> = w.iter().map(|x| (-x / 2.0).exp()).collect();
        let p01 = s[0] / (s[0] + s[2]) * s[1] / (s[1] + s[2]);
        let p12 = s[2] / (s[0] + s[2]) * s[1] / (s[0] + s[1]);
        let probs = [p01, 1.0 - p01 - p12, p12];
        let mut r = RngStream::new(3, 0);
        let trees = tally((0..100_000).map(|_| pamst(&g, &budget, &mut r).unwrap().tree));
        let counts: Vec<u64> = [vec![0, 1], vec![0, 2], vec![1, 2]]
            .into_iter()
            .map(|ids| trees.get(&SpanningTree::from_sorted_unchecked(ids)).copied().unwrap_or(0))
            .collect();
        assert_eq!(counts.iter().sum::<u64>(), 100_000);
        let res = chi_square_counts(&counts, &probs, 0.001).unwrap();
        assert!(res.pass, "{res:?}");
    }

    // exact Prim distribution by walking every cut-edge choice sequence
    fn exact_prim(g: &WeightedGraph<f64>, eps_prime: f64) -> std::collections::BTreeMap<Vec<usize>, f64> {
        fn walk(
            g: &WeightedGraph<f64>,
            s: &[f64],
            seen: &mut Vec<bool>,
            picked: &mut Vec<usize>,
            prob: f64,
            out: &mut std::collections::BTreeMap<Vec<usize>, f64>,
        ) {
            if picked.len() + 1 == g.n() {
                let mut key = picked.clone();
                key.sort_unstable();
                *out.entry(key).or_insert(0.0) += prob;
                return;
            }
            let cut: Vec<usize> = (0..g.m())
                .filter(|&e| {
                    let (a, b) = g.endpoints(e);
                    seen[a - 1] != seen[b - 1]
                })
                .collect();
            let total: f64 = cut.iter().map(|&e| s[e]).sum();
            for e in cut {
                let (a, b) = g.endpoints(e);
                let v = if seen[a - 1] { b } else { a };
                seen[v - 1] = true;
                picked.push(e);
                walk(g, s, seen, picked, prob * s[e] / total, out);
                picked.pop();
                seen[v - 1] = false;
            }
        }
        let s: Vec<f64> = g.weights().iter().map(|w| (-eps_prime * w / 2.0).exp()).collect();
        let mut seen = vec![false; g.n()];
        seen[0] = true;
        let mut out = std::collections::BTreeMap::new();
        walk(g, &s, &mut seen, &mut Vec::new(), 1.0, &mut out);
        out
    }

    #[test]
    fn k4_matches_exact_prim_walk() {
        let w = [0.3f64, 1.7, 0.9, 2.4, 0.1, 1.2];
        let g = build_graph(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)], &w).unwrap();
        let budget = PrivacyBudget::from_eps_prime(1.0, 3, 1e-6, 1.0).unwrap();
        let exact = exact_prim(&g, 1.0);
        assert_eq!(exact.len(), 16);
        let mut r = RngStream::new(4, 0);
        let trees = tally((0..200_000).map(|_| pamst(&g, &budget, &mut r).unwrap().tree));
        let (counts, probs): (Vec<u64>, Vec<f64>) = exact
            .iter()
            .map(|(ids, &p)| (trees.get(&SpanningTree::from_sorted_unchecked(ids.clone())).copied().unwrap_or(0), p))
            .unzip();
        assert_eq!(counts.iter().sum::<u64>(), 200_000);
        let res = chi_square_counts(&counts, &probs, 0.001).unwrap();
        assert!(res.pass, "{res:?}");
    }
}
