//! Probability-proportional-to-size sampling with adaptive candidate removal.
//!
//! Both engines take a size `s(j) > 0` per item, a selection budget `k` and a
//! [`RemovalRule`] that, after every pick, names further candidates to drop.
//! [`ppsacr_run`] samples each step from the live candidates in proportion to
//! `s`; [`one_shot_ppsacr`] draws one score `Exp(1) / s(j)` per item up front
//! and repeatedly takes the smallest live score. The two produce the same
//! distribution over selection sequences.
//!
//! The `_log` variants take `ln s(j)` so that sizes like `exp(-ε′ w / 2)` never
//! have to be materialised.

mod matroid;
mod tree;

pub use matroid::{
    greedy_max_weight_basis, matroid_private_max_weight_basis, matroid_rank, GraphicMatroid,
    IndependenceOracle, MatroidSelection, PartitionMatroid, UniformMatroid,
};
pub(crate) use tree::LogWeightSampler;
pub use tree::SamplingTree;

use crate::error::{Error, Result};
use crate::graph::{DisjointSets, WeightedGraph};
use crate::randomness::RngStream;
use crate::scalar::Real;

/// The candidate-removal function `f` of the sampling model.
///
/// Called once after every pick with the full ordered prefix of selected
/// items (the newest is last); pushes items to drop onto `out`. Items that are
/// already gone may be reported again and are ignored.
pub trait RemovalRule {
    fn removals(&mut self, selected: &[usize], out: &mut Vec<usize>);
}

/// `f ≡ ∅`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoRemoval;

impl RemovalRule for NoRemoval {
    fn removals(&mut self, _selected: &[usize], _out: &mut Vec<usize>) {}
}

/// Adapts a pure function of the prefix into a [`RemovalRule`].
pub struct FnRule<R>(pub R);

impl<R: FnMut(&[usize]) -> Vec<usize>> RemovalRule for FnRule<R> {
    fn removals(&mut self, selected: &[usize], out: &mut Vec<usize>) {
        out.extend((self.0)(selected));
    }
}

impl<R: RemovalRule + ?Sized> RemovalRule for &mut R {
    fn removals(&mut self, selected: &[usize], out: &mut Vec<usize>) {
        (**self).removals(selected, out)
    }
}

/// Graphic-matroid rule: after edge `(u, v)` joins the forest, drop every
/// edge between the components of `u` and `v`.
///
/// Only the smaller of the two components is scanned; each scan of an edge
/// at least doubles the component of the scanned endpoint, so no edge is
/// examined more than `2 log2 n` times. The per-edge examination counts are
/// kept in [`CycleRemoval::checks`].
pub struct CycleRemoval<'g, F> {
    graph: &'g WeightedGraph<F>,
    components: DisjointSets,
    checks: Vec<u32>,
    seen: usize,
}

impl<'g, F: Real> CycleRemoval<'g, F> {
    pub fn new(graph: &'g WeightedGraph<F>) -> Self {
        Self {
            graph,
            components: DisjointSets::new(graph.n()),
            checks: vec![0; graph.m()],
            seen: 0,
        }
    }

    pub fn checks(&self) -> &[u32] {
        &self.checks
    }

    pub fn into_checks(self) -> Vec<u32> {
        self.checks
    }
}

impl<F: Real> RemovalRule for CycleRemoval<'_, F> {
    fn removals(&mut self, selected: &[usize], out: &mut Vec<usize>) {
        let g = self.graph;
        for &picked in &selected[self.seen..] {
            let (u, v) = g.endpoints(picked);
            let ru = self.components.find0(u - 1);
            let rv = self.components.find0(v - 1);
            if ru == rv {
                continue;
            }
            let (small, big) = if self.components.members0(ru).len()
                <= self.components.members0(rv).len()
            {
                (ru, rv)
            } else {
                (rv, ru)
            };
            for &x in self.components.members0(small) {
                for &e in g.incident(x + 1) {
                    self.checks[e] += 1;
                    let (a, b) = g.endpoints(e);
                    let other = if a == x + 1 { b } else { a };
                    if e != picked && self.components.root_of(other - 1) == big {
                        out.push(e);
                    }
                }
            }
            self.components.merge0(ru, rv);
        }
        self.seen = selected.len();
    }
}

fn log_sizes<F: Real>(s: &[F]) -> Result<Vec<F>> {
    s.iter()
        .enumerate()
        .map(|(index, &x)| {
            if x > F::zero() && x.is_finite() {
                Ok(x.ln())
            } else {
                Err(Error::NonPositiveWeight {
                    index,
                    value: x.as_f64(),
                })
            }
        })
        .collect()
}

/// Iterative proportional sampling: pick `j ∈ C` with probability
/// `s(j) / Σ_C s`, append it, drop `{j} ∪ f(prefix)` from `C`; stop after `k`
/// picks or when `C` is empty.
pub fn ppsacr_run<F: Real, R: RemovalRule>(
    s: &[F],
    k: usize,
    rule: R,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    ppsacr_run_log(&log_sizes(s)?, k, rule, rng)
}

/// [`ppsacr_run`] on log-sizes.
pub fn ppsacr_run_log<F: Real, R: RemovalRule>(
    log_s: &[F],
    k: usize,
    mut rule: R,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    if log_s.is_empty() || k == 0 {
        return Ok(Vec::new());
    }
    let mut sampler = LogWeightSampler::new(log_s.to_vec(), true)?;
    let mut selected = Vec::with_capacity(k);
    let mut dropped = Vec::new();
    while selected.len() < k && sampler.live_count() > 0 {
        let j = sampler.sample(rng)?;
        selected.push(j);
        sampler.remove(j)?;
        dropped.clear();
        rule.removals(&selected, &mut dropped);
        for &x in &dropped {
            if x < log_s.len() && sampler.is_live(x) {
                sampler.remove(x)?;
            }
        }
    }
    Ok(selected)
}

/// Exponential-race form: score `Exp(1) / s(j)` per item, drawn in index
/// order, then repeated argmin over live candidates (ties to the lower index).
pub fn one_shot_ppsacr<F: Real, R: RemovalRule>(
    s: &[F],
    k: usize,
    rule: R,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    one_shot_ppsacr_log(&log_sizes(s)?, k, rule, rng)
}

/// [`one_shot_ppsacr`] on log-sizes; scores are compared as
/// `ln Exp(1) − ln s(j)`.
pub fn one_shot_ppsacr_log<F: Real, R: RemovalRule>(
    log_s: &[F],
    k: usize,
    rule: R,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    let scores = race_scores(log_s, rng);
    Ok(select_by_scores(&scores, k, rule))
}

/// `ln Exp(1) − ln s(j)` for every item, one draw per item in index order.
pub fn race_scores<F: Real>(log_s: &[F], rng: &mut RngStream) -> Vec<F> {
    log_s
        .iter()
        .map(|&l| rng.ln_exponential::<F>() - l)
        .collect()
}

/// Repeated argmin of `scores` over live candidates, applying `rule` after
/// every pick.
pub fn select_by_scores<F: Real, R: RemovalRule>(scores: &[F], k: usize, mut rule: R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| crate::graph::edge_order(scores, a, b));
    let mut gone = vec![false; scores.len()];
    let mut selected = Vec::with_capacity(k.min(scores.len()));
    let mut dropped = Vec::new();
    for j in order {
        if selected.len() >= k {
            break;
        }
        if gone[j] {
            continue;
        }
        gone[j] = true;
        selected.push(j);
        dropped.clear();
        rule.removals(&selected, &mut dropped);
        for &x in &dropped {
            if let Some(flag) = gone.get_mut(x) {
                *flag = true;
            }
        }
    }
    selected
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::oracle::{exact_ppsacr_distribution, stats::chi_square_gof, tally};
    use std::collections::BTreeMap;

    const N: usize = 200_000;

    fn run_many(
        n: usize,
        seed: u64,
        mut f: impl FnMut(&mut RngStream) -> Vec<usize>,
    ) -> BTreeMap<Vec<usize>, u64> {
        let mut r = RngStream::new(seed, 0);
        tally((0..n).map(|_| f(&mut r)))
    }

    #[test]
    fn two_items_symmetric() {
        let counts = run_many(100_000, 1, |r| ppsacr_run(&[1.0f64, 1.0], 1, NoRemoval, r).unwrap());
        let a = counts[&vec![0]] as f64 / 100_000.0;
        assert!((a - 0.5).abs() < 0.01);
    }

    #[test]
    fn single_item_always_selected() {
        let mut r = RngStream::new(2, 0);
        for _ in 0..100 {
            assert_eq!(one_shot_ppsacr(&[3.0f64], 1, NoRemoval, &mut r).unwrap(), vec![0]);
            assert_eq!(ppsacr_run(&[3.0f64], 4, NoRemoval, &mut r).unwrap(), vec![0]);
        }
    }

    #[test]
    fn returns_short_sequence_when_candidates_run_out() {
        let mut r = RngStream::new(3, 0);
        let all = FnRule(|_: &[usize]| vec![0, 1, 2]);
        assert_eq!(ppsacr_run(&[1.0f64, 2.0, 3.0], 3, all, &mut r).unwrap().len(), 1);
        let all = FnRule(|_: &[usize]| vec![0, 1, 2]);
        assert_eq!(one_shot_ppsacr(&[1.0f64, 2.0, 3.0], 3, all, &mut r).unwrap().len(), 1);
        assert!(ppsacr_run::<f64, _>(&[], 2, NoRemoval, &mut r).unwrap().is_empty());
        assert!(ppsacr_run(&[1.0f64, 0.0], 2, NoRemoval, &mut r).is_err());
    }

    #[test]
    fn both_engines_match_exact_sequence_distribution() {
        let s = [1.0f64, 2.0, 3.0];
        let exact = exact_ppsacr_distribution(&s, 2, |_: &[usize]| Vec::new()).unwrap();
        // (3/6)·(2/3) for the sequence (c, b)
        assert!((exact.probability(&vec![2, 1]) - 1.0 / 3.0).abs() < 1e-15);

        let iterative = run_many(N, 4, |r| ppsacr_run(&s, 2, NoRemoval, r).unwrap());
        let race = run_many(N, 5, |r| one_shot_ppsacr(&s, 2, NoRemoval, r).unwrap());
        for counts in [&iterative, &race] {
            let res = chi_square_gof(counts, &exact, 0.001).unwrap();
            assert!(res.pass, "{res:?}");
        }
    }

    #[test]
    fn race_argmin_matches_log_transformed_noise() {
        // with s(e) = exp(-ε′ w / 2), argmin of Exp(1)/s equals argmin of
        // w + (2/ε′) ln Exp(1) on the same draws
        let w = [0.3f64, 1.7, -0.4, 2.2, 0.9];
        let eps = 0.8f64;
        let log_s: Vec<f64> = w.iter().map(|x| -eps * x / 2.0).collect();
        for seed in 0..2000 {
            let scores = race_scores(&log_s, &mut RngStream::new(seed, 0));
            let mut r = RngStream::new(seed, 0);
            let noisy: Vec<f64> = w
                .iter()
                .map(|x| x + 2.0 / eps * r.ln_exponential::<f64>())
                .collect();
            let argmin = |v: &[f64]| (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
            assert_eq!(argmin(&scores), argmin(&noisy));
        }
    }

    #[test]
    fn cycle_rule_on_triangle() {
        let g = build_graph(3, &[(1, 2), (2, 3), (1, 3)], &[0.0f64; 3]).unwrap();
        let mut rule = CycleRemoval::new(&g);
        let mut out = Vec::new();
        rule.removals(&[0], &mut out);
        assert!(out.is_empty());
        rule.removals(&[0, 1], &mut out);
        assert_eq!(out, vec![2]);
        assert!(rule.checks().iter().all(|&c| c <= 2));
    }

    #[test]
    fn cycle_rule_yields_spanning_trees() {
        let mut edges = Vec::new();
        for u in 1..=6 {
            for v in u + 1..=6 {
                edges.push((u, v));
            }
        }
        let w: Vec<f64> = (0..edges.len()).map(|i| (i % 5) as f64).collect();
        let g = build_graph(6, &edges, &w).unwrap();
        let mut r = RngStream::new(6, 0);
        for _ in 0..200 {
            let picked = ppsacr_run(&vec![1.0f64; g.m()], 5, CycleRemoval::new(&g), &mut r).unwrap();
            assert!(crate::graph::is_spanning_tree(&g, &picked));
            let picked = one_shot_ppsacr(&vec![1.0f64; g.m()], 10, CycleRemoval::new(&g), &mut r).unwrap();
            assert!(crate::graph::is_spanning_tree(&g, &picked));
        }
    }
}
