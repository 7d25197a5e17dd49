use crate::error::{Error, Result};
use crate::randomness::RngStream;
use crate::scalar::Real;

/// Complete binary tree over `m` weighted leaves; every internal node stores
/// the sum of its two children. Sampling walks root to leaf, removal and
/// activation rewrite one leaf-to-root path.
///
/// Heap layout: node `j` has children `2j + 1` and `2j + 2`, the `m` leaves
/// occupy nodes `m - 1 ..= 2m - 2`, so every internal node has two children.
#[derive(Debug, Clone)]
pub struct SamplingTree<F> {
    sums: Vec<F>,
    base: Vec<F>,
    live: Vec<bool>,
    live_count: usize,
}

impl<F: Real> SamplingTree<F> {
    /// Tree with every leaf live. Weights must be finite and positive.
    pub fn build(weights: &[F]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyTree);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !(w > F::zero()) || !w.is_finite() {
                return Err(Error::NonPositiveWeight {
                    index,
                    value: w.as_f64(),
                });
            }
        }
        Ok(Self::with_liveness(weights.to_vec(), true))
    }

    /// Leaves may hold zero (underflowed) weights; all start `live` or all dead.
    pub(crate) fn with_liveness(base: Vec<F>, live: bool) -> Self {
        let m = base.len();
        let mut tree = Self {
            sums: vec![F::zero(); 2 * m - 1],
            live: vec![live; m],
            live_count: if live { m } else { 0 },
            base,
        };
        tree.rebuild();
        tree
    }

    fn leaf_node(&self, i: usize) -> usize {
        self.base.len() - 1 + i
    }

    /// Recomputes every internal sum from the leaves, O(m).
    pub(crate) fn rebuild(&mut self) {
        let m = self.base.len();
        for i in 0..m {
            let node = m - 1 + i;
            self.sums[node] = if self.live[i] { self.base[i] } else { F::zero() };
        }
        for node in (0..m - 1).rev() {
            self.sums[node] = self.sums[2 * node + 1] + self.sums[2 * node + 2];
        }
    }

    fn update_path(&mut self, mut node: usize) {
        while node > 0 {
            node = (node - 1) / 2;
            self.sums[node] = self.sums[2 * node + 1] + self.sums[2 * node + 2];
        }
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn total(&self) -> F {
        self.sums[0]
    }

    pub fn live_count(&self) -> usize {
        self.live_count
    }

    pub fn is_live(&self, i: usize) -> bool {
        self.live.get(i).copied().unwrap_or(false)
    }

    /// Current contribution of leaf `i` (zero once removed).
    pub fn weight(&self, i: usize) -> F {
        self.sums[self.leaf_node(i)]
    }

    /// Draws a live leaf with probability proportional to its weight.
    ///
    /// At each internal node the walk goes left with probability
    /// `left / (left + right)`.
    pub fn sample(&self, rng: &mut RngStream) -> Result<usize> {
        if self.live_count == 0 || !(self.total() > F::zero()) {
            return Err(Error::EmptyTree);
        }
        let first_leaf = self.base.len() - 1;
        let mut node = 0;
        while node < first_leaf {
            let left = self.sums[2 * node + 1];
            let right = self.sums[2 * node + 2];
            node = if !(left > F::zero()) {
                2 * node + 2
            } else if !(right > F::zero()) {
                2 * node + 1
            } else if F::of(rng.uniform_open()) * (left + right) < left {
                2 * node + 1
            } else {
                2 * node + 2
            };
        }
        Ok(node - first_leaf)
    }

    /// Zeroes leaf `i` and repairs its path to the root.
    pub fn remove(&mut self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::EdgeOutOfRange {
                edge: i,
                m: self.len(),
            });
        }
        if !self.live[i] {
            return Err(Error::DoubleRemoval { leaf: i });
        }
        self.live[i] = false;
        self.live_count -= 1;
        let node = self.leaf_node(i);
        self.sums[node] = F::zero();
        self.update_path(node);
        Ok(())
    }

    /// Makes a dead leaf live again with its original weight.
    pub fn activate(&mut self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::EdgeOutOfRange {
                edge: i,
                m: self.len(),
            });
        }
        if self.live[i] {
            return Ok(());
        }
        self.live[i] = true;
        self.live_count += 1;
        let node = self.leaf_node(i);
        self.sums[node] = self.base[i];
        self.update_path(node);
        Ok(())
    }

    /// Replaces the stored weight of leaf `i` without touching sums; callers
    /// follow up with [`SamplingTree::rebuild`].
    pub(crate) fn set_base(&mut self, i: usize, w: F) {
        self.base[i] = w;
    }

    /// True when every internal sum equals the sum of its children within
    /// `rel_tol` (relative to the larger of the two).
    pub fn sums_consistent(&self, rel_tol: f64) -> bool {
        let m = self.base.len();
        for i in 0..m {
            let expect = if self.live[i] { self.base[i] } else { F::zero() };
            if self.sums[m - 1 + i] != expect {
                return false;
            }
        }
        (0..m - 1).all(|node| {
            let s = self.sums[node].as_f64();
            let c = self.sums[2 * node + 1].as_f64() + self.sums[2 * node + 2].as_f64();
            (s - c).abs() <= rel_tol * s.abs().max(c.abs())
        })
    }
}

/// Sampling tree over log-weights `ℓ_j`, storing `exp(ℓ_j − shift)`.
///
/// The shift is the largest log-weight at build time. If every live leaf
/// later underflows to zero the live leaves are re-shifted against their own
/// maximum, which leaves the sampling distribution unchanged.
#[derive(Debug, Clone)]
pub(crate) struct LogWeightSampler<F> {
    tree: SamplingTree<F>,
    log_w: Vec<F>,
    shift: F,
    pub(crate) rescales: usize,
}

impl<F: Real> LogWeightSampler<F> {
    pub(crate) fn new(log_w: Vec<F>, live: bool) -> Result<Self> {
        if log_w.is_empty() {
            return Err(Error::EmptyTree);
        }
        if let Some(index) = log_w.iter().position(|l| l.is_nan() || *l == F::infinity()) {
            return Err(Error::NonPositiveWeight {
                index,
                value: log_w[index].as_f64(),
            });
        }
        let shift = log_w.iter().copied().fold(F::neg_infinity(), F::max);
        if shift == F::neg_infinity() {
            return Err(Error::EmptyTree);
        }
        let base = log_w.iter().map(|&l| (l - shift).exp()).collect();
        Ok(Self {
            tree: SamplingTree::with_liveness(base, live),
            log_w,
            shift,
            rescales: 0,
        })
    }

    pub(crate) fn live_count(&self) -> usize {
        self.tree.live_count()
    }

    pub(crate) fn is_live(&self, i: usize) -> bool {
        self.tree.is_live(i)
    }

    fn reshift(&mut self, shift: F) {
        self.shift = shift;
        for i in 0..self.log_w.len() {
            self.tree.set_base(i, (self.log_w[i] - shift).exp());
        }
        self.tree.rebuild();
        self.rescales += 1;
    }

    pub(crate) fn sample(&mut self, rng: &mut RngStream) -> Result<usize> {
        if self.tree.live_count() > 0 && !(self.tree.total() > F::zero()) {
            let live_max = (0..self.log_w.len())
                .filter(|&i| self.tree.is_live(i))
                .map(|i| self.log_w[i])
                .fold(F::neg_infinity(), F::max);
            if live_max == F::neg_infinity() {
                return Err(Error::EmptyTree);
            }
            self.reshift(live_max);
        }
        self.tree.sample(rng)
    }

    pub(crate) fn remove(&mut self, i: usize) -> Result<()> {
        self.tree.remove(i)
    }

    pub(crate) fn activate(&mut self, i: usize) -> Result<()> {
        if self.log_w[i] > self.shift {
            self.reshift(self.log_w[i]);
        }
        self.tree.activate(i)
    }
}
