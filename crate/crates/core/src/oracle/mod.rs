//! Exhaustive ground truth for small instances.
//!
//! Everything here is deliberately naive: spanning trees by backtracking over
//! edge subsets, connectivity by label relabelling, and the selection
//! distribution by walking every sequence and multiplying the per-step
//! conditional probabilities. None of it shares code with the samplers it is
//! used to check.

pub mod stats;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{SpanningTree, WeightedGraph};
use crate::scalar::{CompensatedSum, Real};

pub const MAX_ENUM_VERTICES: usize = 10;
pub const MAX_EXACT_ITEMS: usize = 8;
pub const MAX_EXACT_PICKS: usize = 6;

/// Exact probabilities over a finite set of outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution<O: Ord> {
    probs: BTreeMap<O, f64>,
}

impl<O: Ord + Clone> ExactDistribution<O> {
    fn from_sums(sums: BTreeMap<O, CompensatedSum>) -> Self {
        Self {
            probs: sums.into_iter().map(|(o, s)| (o, s.value())).collect(),
        }
    }

    pub fn probability(&self, outcome: &O) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn get(&self, outcome: &O) -> Option<f64> {
        self.probs.get(outcome).copied()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&O, &f64)> {
        self.probs.iter()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().copied().collect::<CompensatedSum>().value()
    }

    /// Pushes the distribution forward through `key`.
    pub fn marginalize<K: Ord + Clone>(&self, key: impl Fn(&O) -> K) -> ExactDistribution<K> {
        let mut sums: BTreeMap<K, CompensatedSum> = BTreeMap::new();
        for (o, &p) in &self.probs {
            sums.entry(key(o)).or_default().add(p);
        }
        ExactDistribution::from_sums(sums)
    }

    /// The most probable outcome (first in order among ties).
    pub fn mode(&self) -> Option<(&O, f64)> {
        self.probs
            .iter()
            .fold(None, |best: Option<(&O, f64)>, (o, &p)| match best {
                Some((_, q)) if q >= p => best,
                _ => Some((o, p)),
            })
    }
}

/// Counts occurrences of each outcome.
pub fn tally<O: Ord, I: IntoIterator<Item = O>>(outcomes: I) -> BTreeMap<O, u64> {
    let mut counts = BTreeMap::new();
    for o in outcomes {
        *counts.entry(o).or_insert(0) += 1;
    }
    counts
}

fn guard(what: &'static str, got: usize, limit: usize) -> Result<()> {
    if got > limit {
        Err(Error::GuardExceeded { what, got, limit })
    } else {
        Ok(())
    }
}

/// Component labels of a 0-based vertex set; merging relabels every vertex.
#[derive(Clone)]
struct Labels(Vec<usize>);

impl Labels {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn join(&mut self, a: usize, b: usize) -> bool {
        let (la, lb) = (self.0[a], self.0[b]);
        if la == lb {
            return false;
        }
        for l in &mut self.0 {
            if *l == lb {
                *l = la;
            }
        }
        true
    }
}

/// Every spanning tree, as sorted edge-id lists in lexicographic order.
pub fn enumerate_spanning_trees<F: Real>(g: &WeightedGraph<F>) -> Result<Vec<SpanningTree>> {
    guard("vertices", g.n(), MAX_ENUM_VERTICES)?;
    let need = g.n() - 1;
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(need);
    extend_forest(g, 0, &Labels::new(g.n()), &mut chosen, need, &mut out);
    Ok(out)
}

fn extend_forest<F: Real>(
    g: &WeightedGraph<F>,
    next: usize,
    labels: &Labels,
    chosen: &mut Vec<usize>,
    need: usize,
    out: &mut Vec<SpanningTree>,
) {
    if chosen.len() == need {
        out.push(SpanningTree::from_sorted_unchecked(chosen.clone()));
        return;
    }
    if g.m() - next < need - chosen.len() {
        return;
    }
    let (u, v) = g.endpoints(next);
    let mut with = labels.clone();
    if with.join(u - 1, v - 1) {
        chosen.push(next);
        extend_forest(g, next + 1, &with, chosen, need, out);
        chosen.pop();
    }
    extend_forest(g, next + 1, labels, chosen, need, out);
}

/// Edges of `t` ordered by (weight, index).
fn sorted_keys<F: Real>(g: &WeightedGraph<F>, t: &SpanningTree) -> Vec<(F, usize)> {
    let mut keys: Vec<(F, usize)> = t.edge_ids().iter().map(|&e| (g.weight(e), e)).collect();
    keys.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    keys
}

fn compare_keys<F: Real>(a: &[(F, usize)], b: &[(F, usize)]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then(x.1.cmp(&y.1)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Minimum-weight spanning tree by exhaustive search. Totals within a relative
/// 1e-12 count as equal; among those the tree whose (weight, index)-sorted
/// edge list is lexicographically smallest wins, matching Kruskal's scan.
pub fn brute_force_mst<F: Real>(g: &WeightedGraph<F>) -> Result<SpanningTree> {
    let scored: Vec<(f64, SpanningTree)> = enumerate_spanning_trees(g)?
        .into_iter()
        .map(|t| (t.edge_ids().iter().map(|&e| g.weight(e).as_f64()).sum(), t))
        .collect();
    let best = scored.iter().map(|(w, _)| *w).fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * best.abs().max(1.0);
    scored
        .into_iter()
        .filter(|(w, _)| *w <= best + tol)
        .map(|(_, t)| (sorted_keys(g, &t), t))
        .min_by(|a, b| compare_keys(&a.0, &b.0))
        .map(|(_, t)| t)
        .ok_or(Error::Disconnected { components: g.component_count() })
}

/// Exact distribution of the selection sequences of the iterative sampler on
/// sizes `s`, selecting up to `k` items, where `rule(prefix)` names the items
/// removed after the pick that completed `prefix`.
pub fn exact_ppsacr_distribution<R: Fn(&[usize]) -> Vec<usize>>(
    s: &[f64],
    k: usize,
    rule: R,
) -> Result<ExactDistribution<Vec<usize>>> {
    guard("items", s.len(), MAX_EXACT_ITEMS)?;
    guard("picks", k, MAX_EXACT_PICKS)?;
    if let Some(index) = s.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::NonPositiveWeight { index, value: s[index] });
    }
    let mut sums = BTreeMap::new();
    let mut prefix = Vec::with_capacity(k);
    walk(s, k, &rule, &vec![true; s.len()], &mut prefix, 1.0, &mut sums);
    Ok(ExactDistribution::from_sums(sums))
}

fn walk<R: Fn(&[usize]) -> Vec<usize>>(
    s: &[f64],
    k: usize,
    rule: &R,
    live: &[bool],
    prefix: &mut Vec<usize>,
    prob: f64,
    sums: &mut BTreeMap<Vec<usize>, CompensatedSum>,
) {
    let candidates: Vec<usize> = (0..s.len()).filter(|&j| live[j]).collect();
    if prefix.len() == k || candidates.is_empty() {
        sums.entry(prefix.clone()).or_default().add(prob);
        return;
    }
    let mass = candidates.iter().map(|&j| s[j]).collect::<CompensatedSum>().value();
    for &j in &candidates {
        prefix.push(j);
        let mut next = live.to_vec();
        next[j] = false;
        for x in rule(prefix) {
            if let Some(flag) = next.get_mut(x) {
                *flag = false;
            }
        }
        walk(s, k, rule, &next, prefix, prob * (s[j] / mass), sums);
        prefix.pop();
    }
}

/// Removal rule for spanning trees computed from scratch on every prefix:
/// every unselected edge whose endpoints the prefix already connects.
pub fn closes_cycle_rule<F: Real>(g: &WeightedGraph<F>) -> impl Fn(&[usize]) -> Vec<usize> + '_ {
    move |prefix: &[usize]| {
        let mut labels = Labels::new(g.n());
        for &e in prefix {
            let (u, v) = g.endpoints(e);
            labels.join(u - 1, v - 1);
        }
        (0..g.m())
            .filter(|e| !prefix.contains(e))
            .filter(|&e| {
                let (u, v) = g.endpoints(e);
                labels.0[u - 1] == labels.0[v - 1]
            })
            .collect()
    }
}

/// Exact output distribution of the private spanning-tree sampler, as sorted
/// edge-id lists: sizes `exp(−ε′ (w_e − w_min) / (2Δ∞))`, `n − 1` picks, cycle
/// removal. Subtracting `w_min` rescales every size by the same factor.
pub fn exact_private_mst_distribution<F: Real>(
    g: &WeightedGraph<F>,
    eps_prime: f64,
    delta_inf: f64,
) -> Result<ExactDistribution<Vec<usize>>> {
    if !(eps_prime > 0.0) {
        return Err(Error::domain("eps_prime", eps_prime, "> 0"));
    }
    if !(delta_inf > 0.0 && delta_inf.is_finite()) {
        return Err(Error::domain("delta_inf", delta_inf, "finite and > 0"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected { components: g.component_count() });
    }
    guard("edges", g.m(), MAX_EXACT_ITEMS)?;
    let w_min = g.weights().iter().map(|w| w.as_f64()).fold(f64::INFINITY, f64::min);
    let s: Vec<f64> = g
        .weights()
        .iter()
        .map(|w| (-eps_prime * (w.as_f64() - w_min) / (2.0 * delta_inf)).exp())
        .collect();
    if let Some(index) = s.iter().position(|&x| x <= 0.0) {
        return Err(Error::NonPositiveWeight { index, value: s[index] });
    }
    let seqs = exact_ppsacr_distribution(&s, g.n() - 1, closes_cycle_rule(g))?;
    Ok(seqs.marginalize(|seq| {
        let mut t = seq.clone();
        t.sort_unstable();
        t
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn complete(n: usize, w: impl Fn(usize) -> f64) -> WeightedGraph<f64> {
        let mut edges = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                edges.push((u, v));
            }
        }
        let weights = (0..edges.len()).map(w).collect();
        WeightedGraph::new(n, edges, weights).unwrap()
    }

    #[test]
    fn cayley_counts() {
        for n in 1..=6 {
            let trees = enumerate_spanning_trees(&complete(n, |_| 0.0)).unwrap();
            assert_eq!(trees.len(), n.pow(n.saturating_sub(2) as u32).max(1), "n = {n}");
        }
        let path = build_graph(4, &[(1, 2), (2, 3), (3, 4)], &[1.0f64; 3]).unwrap();
        assert_eq!(enumerate_spanning_trees(&path).unwrap().len(), 1);
        assert!(matches!(
            enumerate_spanning_trees(&complete(11, |_| 0.0)),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn brute_force_small_cases() {
        let tri = build_graph(3, &[(1, 2), (2, 3), (1, 3)], &[1.0f64, 2.0, 3.0]).unwrap();
        assert_eq!(brute_force_mst(&tri).unwrap().edge_ids(), &[0, 1]);
        let flat = complete(4, |_| 5.0);
        assert_eq!(brute_force_mst(&flat).unwrap().edge_ids(), &[0, 1, 2]);
    }

    #[test]
    fn two_items_one_pick() {
        let d = exact_ppsacr_distribution(&[1.0, 1.0], 1, |_: &[usize]| Vec::new()).unwrap();
        assert_eq!(d.probability(&vec![0]), 0.5);
        assert_eq!(d.probability(&vec![1]), 0.5);
    }

    #[test]
    fn hand_products() {
        let d = exact_ppsacr_distribution(&[1.0, 2.0, 3.0], 2, |_: &[usize]| Vec::new()).unwrap();
        assert!((d.probability(&vec![2, 1]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.probability(&vec![1, 2]) - 0.25).abs() < 1e-15);
        assert!((d.probability(&vec![0, 1]) - 1.0 / 15.0).abs() < 1e-15);
        assert_eq!(d.len(), 6);
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let nine = [1.0; 9];
        assert!(exact_ppsacr_distribution(&nine, 2, |_: &[usize]| Vec::new()).is_err());
        assert!(exact_ppsacr_distribution(&[1.0; 8], 7, |_: &[usize]| Vec::new()).is_err());
        assert!(exact_ppsacr_distribution(&[1.0, 0.0], 1, |_: &[usize]| Vec::new()).is_err());
    }

    #[test]
    fn triangle_equal_weights_uniform() {
        let tri = complete(3, |_| 0.0);
        let d = exact_private_mst_distribution(&tri, 1.0, 1.0).unwrap();
        assert_eq!(d.len(), 3);
        for (_, &p) in d.iter() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_closed_form() {
        // sizes a = e^{-1/2}, b = e^{-1}, c = e^{-3/2}; tree {x, y} has
        // probability s_x s_y (1/(S − s_x) + 1/(S − s_y)) / S
        let tri = complete(3, |i| (i + 1) as f64);
        let d = exact_private_mst_distribution(&tri, 1.0, 1.0).unwrap();
        let s = [(-0.5f64).exp(), (-1.0f64).exp(), (-1.5f64).exp()];
        let total: f64 = s.iter().sum();
        let pair = |x: usize, y: usize| s[x] * s[y] * (1.0 / (total - s[x]) + 1.0 / (total - s[y])) / total;
        assert!((d.probability(&vec![0, 1]) - pair(0, 1)).abs() < 1e-14);
        assert!((d.probability(&vec![0, 2]) - pair(0, 2)).abs() < 1e-14);
        assert!((d.probability(&vec![1, 2]) - pair(1, 2)).abs() < 1e-14);
    }

    #[test]
    fn k4_equal_weights() {
        // a uniformly random edge order gives stars 1/15 and paths 11/180;
        // checked against all 720 orders by hand enumeration
        let g = complete(4, |_| 2.0);
        let d = exact_private_mst_distribution(&g, 1.0, 1.0).unwrap();
        assert_eq!(d.len(), 16);
        for (t, &p) in d.iter() {
            let mut degree = [0; 4];
            for &e in t {
                let (u, v) = g.endpoints(e);
                degree[u - 1] += 1;
                degree[v - 1] += 1;
            }
            let expect = if degree.contains(&3) { 1.0 / 15.0 } else { 11.0 / 180.0 };
            assert!((p - expect).abs() < 1e-14, "{t:?}: {p}");
        }
        let skew = exact_private_mst_distribution(&complete(4, |i| i as f64), 0.7, 1.0).unwrap();
        assert!((skew.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_eps_tends_to_equal_weights() {
        let g = complete(4, |i| (i * i) as f64);
        let flat = exact_private_mst_distribution(&complete(4, |_| 0.0), 1.0, 1.0).unwrap();
        let d = exact_private_mst_distribution(&g, 1e-9, 1.0).unwrap();
        for (t, &p) in d.iter() {
            assert!((p - flat.probability(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn concentrates_on_mst_as_eps_grows() {
        let g = complete(4, |i| [3.0, 1.0, 4.0, 1.5, 5.0, 9.0][i]);
        let mst = brute_force_mst(&g).unwrap().edge_ids().to_vec();
        let mut last = 0.0;
        for eps in [1.0, 4.0, 16.0, 64.0] {
            let p = exact_private_mst_distribution(&g, eps, 1.0).unwrap().probability(&mst);
            assert!(p > last, "eps = {eps}: {p} <= {last}");
            last = p;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn marginal_independent_of_sequence_order() {
        // reversing item indices permutes the enumeration; the tree marginal
        // must map across exactly
        let w = [0.5, 1.0, 2.0, 0.2, 1.3, 0.8];
        let g = complete(4, |i| w[i]);
        let d = exact_private_mst_distribution(&g, 1.0, 1.0).unwrap();
        let rev_edges: Vec<_> = g.edges().iter().rev().copied().collect();
        let rev_w: Vec<f64> = w.iter().rev().copied().collect();
        let rg = WeightedGraph::new(4, rev_edges, rev_w).unwrap();
        let rd = exact_private_mst_distribution(&rg, 1.0, 1.0).unwrap();
        for (t, &p) in d.iter() {
            let mut mapped: Vec<usize> = t.iter().map(|&e| 5 - e).collect();
            mapped.sort_unstable();
            assert!((rd.probability(&mapped) - p).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_picks_largest() {
        let d = exact_ppsacr_distribution(&[1.0, 3.0], 1, |_: &[usize]| Vec::new()).unwrap();
        assert_eq!(d.mode().unwrap().0, &vec![1]);
    }
}
