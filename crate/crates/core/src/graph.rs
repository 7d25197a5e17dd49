//! Graph representation, disjoint sets and exact minimum spanning trees.
//!
//! Vertex labels are 1-based (`1..=n`) at every public boundary. Edge ids are
//! positions in the edge list, `0..m`; the edge-list file format numbers them
//! implicitly by line order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Public topology plus a private weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<F> {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<F>,
    delta_inf: F,
    incidence: Vec<Vec<usize>>,
}

impl<F: Real> WeightedGraph<F> {
    /// Validates and builds a connected graph with `delta_inf = 1`.
    pub fn new(n: usize, edges: Vec<(usize, usize)>, weights: Vec<F>) -> Result<Self> {
        let g = Self::new_unchecked_connectivity(n, edges, weights)?;
        let components = g.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(g)
    }

    /// Same validation as [`WeightedGraph::new`] except connectivity.
    pub(crate) fn new_unchecked_connectivity(
        n: usize,
        edges: Vec<(usize, usize)>,
        weights: Vec<F>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if weights.len() != edges.len() {
            return Err(Error::LengthMismatch {
                what: "weights",
                got: weights.len(),
                expected: edges.len(),
            });
        }
        let mut incidence = vec![Vec::new(); n];
        for (edge, &(u, v)) in edges.iter().enumerate() {
            for vertex in [u, v] {
                if vertex == 0 || vertex > n {
                    return Err(Error::VertexOutOfRange { vertex, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { edge, vertex: u });
            }
            incidence[u - 1].push(edge);
            incidence[v - 1].push(edge);
        }
        if let Some(edge) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFiniteWeight { edge });
        }
        Ok(Self {
            n,
            edges,
            weights,
            delta_inf: F::one(),
            incidence,
        })
    }

    /// Attaches the ℓ∞ sensitivity of the weight vector.
    pub fn with_delta_inf(mut self, delta_inf: F) -> Result<Self> {
        if !(delta_inf > F::zero()) || !delta_inf.is_finite() {
            return Err(Error::domain("delta_inf", delta_inf.as_f64(), "> 0"));
        }
        self.delta_inf = delta_inf;
        Ok(self)
    }

    /// Same topology and sensitivity, different weights.
    pub fn with_weights(&self, weights: Vec<F>) -> Result<Self> {
        check_weights(self, &weights)?;
        Ok(Self {
            weights,
            ..self.clone()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// 1-based endpoints of edge `e`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn weight(&self, e: usize) -> F {
        self.weights[e]
    }

    pub fn delta_inf(&self) -> F {
        self.delta_inf
    }

    /// Edge ids incident to the 1-based vertex `v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v - 1]
    }

    pub fn min_weight(&self) -> Option<F> {
        self.weights.iter().copied().reduce(F::min)
    }

    pub fn component_count(&self) -> usize {
        let mut ds = DisjointSets::new(self.n);
        for &(u, v) in &self.edges {
            ds.merge0(u - 1, v - 1);
        }
        ds.component_count()
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }
}

fn check_weights<F: Real>(g: &WeightedGraph<F>, weights: &[F]) -> Result<()> {
    if weights.len() != g.m() {
        return Err(Error::LengthMismatch {
            what: "weights",
            got: weights.len(),
            expected: g.m(),
        });
    }
    if let Some(edge) = weights.iter().position(|w| w.is_nan()) {
        return Err(Error::NonFiniteWeight { edge });
    }
    Ok(())
}

/// Validated constructor; see [`WeightedGraph::new`].
pub fn build_graph<F: Real>(
    n: usize,
    edges: &[(usize, usize)],
    weights: &[F],
) -> Result<WeightedGraph<F>> {
    WeightedGraph::new(n, edges.to_vec(), weights.to_vec())
}

/// A set of `n - 1` edge ids, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanningTree {
    edge_ids: Vec<usize>,
}

impl SpanningTree {
    /// Checks that `edge_ids` spans `g` without cycles.
    pub fn new<F: Real>(g: &WeightedGraph<F>, mut edge_ids: Vec<usize>) -> Result<Self> {
        if let Some(&edge) = edge_ids.iter().find(|&&e| e >= g.m()) {
            return Err(Error::EdgeOutOfRange { edge, m: g.m() });
        }
        if !is_spanning_tree(g, &edge_ids) {
            return Err(Error::Disconnected {
                components: components_of(g, &edge_ids),
            });
        }
        edge_ids.sort_unstable();
        Ok(Self { edge_ids })
    }

    pub(crate) fn from_sorted_unchecked(mut edge_ids: Vec<usize>) -> Self {
        edge_ids.sort_unstable();
        Self { edge_ids }
    }

    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_ids
    }

    pub fn len(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_ids.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edge_ids.binary_search(&e).is_ok()
    }
}

fn components_of<F: Real>(g: &WeightedGraph<F>, edge_ids: &[usize]) -> usize {
    let mut ds = DisjointSets::new(g.n());
    for &e in edge_ids.iter().filter(|&&e| e < g.m()) {
        let (u, v) = g.endpoints(e);
        ds.merge0(u - 1, v - 1);
    }
    ds.component_count()
}

/// True iff `edge_ids` has `n - 1` distinct valid ids forming an acyclic
/// connected subgraph.
pub fn is_spanning_tree<F: Real>(g: &WeightedGraph<F>, edge_ids: &[usize]) -> bool {
    if edge_ids.len() + 1 != g.n() {
        return false;
    }
    let mut ds = DisjointSets::new(g.n());
    for &e in edge_ids {
        if e >= g.m() {
            return false;
        }
        let (u, v) = g.endpoints(e);
        // Repeated ids also land here.
        if !ds.merge0(u - 1, v - 1) {
            return false;
        }
    }
    true
}

/// Sum of the true weights of `t`.
pub fn tree_weight<F: Real>(g: &WeightedGraph<F>, t: &SpanningTree) -> Result<F> {
    weight_under(g.weights(), t)
}

/// Sum of `weights` over the edges of `t`.
pub fn weight_under<F: Real>(weights: &[F], t: &SpanningTree) -> Result<F> {
    t.edge_ids().iter().try_fold(F::zero(), |acc, &e| {
        weights
            .get(e)
            .map(|&w| acc + w)
            .ok_or(Error::EdgeOutOfRange {
                edge: e,
                m: weights.len(),
            })
    })
}

/// Union-find over vertices `1..=n` with per-component member lists.
///
/// Merging appends the smaller member list to the larger one, so every
/// vertex moves at most `log2 n` times.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    members: Vec<Vec<usize>>,
    components: usize,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            members: (0..n).map(|v| vec![v]).collect(),
            components: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    fn check(&self, v: usize) -> Result<usize> {
        if v == 0 || v > self.len() {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.len(),
            });
        }
        Ok(v - 1)
    }

    /// Representative label of the component containing `v`.
    pub fn find(&mut self, v: usize) -> Result<usize> {
        let v = self.check(v)?;
        Ok(self.find0(v) + 1)
    }

    pub fn same(&mut self, u: usize, v: usize) -> Result<bool> {
        Ok(self.find(u)? == self.find(v)?)
    }

    /// Merges the components of `u` and `v`; `false` if they were already one.
    pub fn merge(&mut self, u: usize, v: usize) -> Result<bool> {
        let (u, v) = (self.check(u)?, self.check(v)?);
        Ok(self.merge0(u, v))
    }

    /// Labels of every vertex in `v`'s component.
    pub fn members(&mut self, v: usize) -> Result<Vec<usize>> {
        let v = self.check(v)?;
        let root = self.find0(v);
        Ok(self.members[root].iter().map(|&x| x + 1).collect())
    }

    pub fn component_size(&mut self, v: usize) -> Result<usize> {
        let v = self.check(v)?;
        let root = self.find0(v);
        Ok(self.members[root].len())
    }

    pub(crate) fn find0(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Root of `v` without path compression, for use behind a shared borrow.
    pub(crate) fn root_of(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    /// 0-based member list of the component rooted at `root`.
    pub(crate) fn members0(&self, root: usize) -> &[usize] {
        &self.members[root]
    }

    pub(crate) fn merge0(&mut self, u: usize, v: usize) -> bool {
        let (mut a, mut b) = (self.find0(u), self.find0(v));
        if a == b {
            return false;
        }
        if self.members[a].len() < self.members[b].len() {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        let moved = std::mem::take(&mut self.members[b]);
        self.members[a].extend(moved);
        self.components -= 1;
        true
    }
}

/// Any exact MST routine that can run on a substitute weight vector.
pub trait MstAlgorithm<F: Real> {
    fn spanning_tree(&self, g: &WeightedGraph<F>, weights: &[F]) -> Result<SpanningTree>;
}

impl<F: Real, A: Fn(&WeightedGraph<F>, &[F]) -> Result<SpanningTree>> MstAlgorithm<F> for A {
    fn spanning_tree(&self, g: &WeightedGraph<F>, weights: &[F]) -> Result<SpanningTree> {
        self(g, weights)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Kruskal;

#[derive(Debug, Clone, Copy, Default)]
pub struct PrimJarnik;

impl<F: Real> MstAlgorithm<F> for Kruskal {
    fn spanning_tree(&self, g: &WeightedGraph<F>, weights: &[F]) -> Result<SpanningTree> {
        kruskal_mst(g, weights)
    }
}

impl<F: Real> MstAlgorithm<F> for PrimJarnik {
    fn spanning_tree(&self, g: &WeightedGraph<F>, weights: &[F]) -> Result<SpanningTree> {
        prim_mst(g, weights)
    }
}

/// Edge order used by every exact MST routine: weight, then lowest id.
pub(crate) fn edge_order<F: Real>(weights: &[F], a: usize, b: usize) -> Ordering {
    weights[a]
        .partial_cmp(&weights[b])
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

/// Kruskal's algorithm on `weights` (which may differ from `g.weights()`).
/// Ties go to the lowest edge id.
pub fn kruskal_mst<F: Real>(g: &WeightedGraph<F>, weights: &[F]) -> Result<SpanningTree> {
    check_weights(g, weights)?;
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_unstable_by(|&a, &b| edge_order(weights, a, b));
    kruskal_in_order(g, order)
}

/// Greedy forest construction over a precomputed edge order.
pub(crate) fn kruskal_in_order<F: Real>(
    g: &WeightedGraph<F>,
    order: impl IntoIterator<Item = usize>,
) -> Result<SpanningTree> {
    let mut ds = DisjointSets::new(g.n());
    let mut tree = Vec::with_capacity(g.n().saturating_sub(1));
    for e in order {
        if tree.len() + 1 == g.n() {
            break;
        }
        let (u, v) = g.endpoints(e);
        if ds.merge0(u - 1, v - 1) {
            tree.push(e);
        }
    }
    if tree.len() + 1 != g.n() {
        return Err(Error::Disconnected {
            components: ds.component_count(),
        });
    }
    Ok(SpanningTree::from_sorted_unchecked(tree))
}

#[derive(PartialEq)]
struct HeapEntry<F> {
    weight: F,
    edge: usize,
}

impl<F: Real> Eq for HeapEntry<F> {}

impl<F: Real> Ord for HeapEntry<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .weight
            .partial_cmp(&self.weight)
            .unwrap_or(Ordering::Equal)
            .then(other.edge.cmp(&self.edge))
    }
}

impl<F: Real> PartialOrd for HeapEntry<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Prim-Jarník growth from vertex 1 with a lazy binary heap.
pub fn prim_mst<F: Real>(g: &WeightedGraph<F>, weights: &[F]) -> Result<SpanningTree> {
    check_weights(g, weights)?;
    let mut in_tree = vec![false; g.n()];
    let mut heap = BinaryHeap::new();
    let mut tree = Vec::with_capacity(g.n().saturating_sub(1));
    let add_vertex = |v: usize, in_tree: &mut Vec<bool>, heap: &mut BinaryHeap<_>| {
        in_tree[v - 1] = true;
        for &e in g.incident(v) {
            let (a, b) = g.endpoints(e);
            let other = if a == v { b } else { a };
            if !in_tree[other - 1] {
                heap.push(HeapEntry {
                    weight: weights[e],
                    edge: e,
                });
            }
        }
    };
    add_vertex(1, &mut in_tree, &mut heap);
    while let Some(HeapEntry { edge, .. }) = heap.pop() {
        let (a, b) = g.endpoints(edge);
        let fresh = match (in_tree[a - 1], in_tree[b - 1]) {
            (true, false) => b,
            (false, true) => a,
            _ => continue,
        };
        tree.push(edge);
        add_vertex(fresh, &mut in_tree, &mut heap);
    }
    if tree.len() + 1 != g.n() {
        return Err(Error::Disconnected {
            components: components_of(g, &tree),
        });
    }
    Ok(SpanningTree::from_sorted_unchecked(tree))
}
