use crate::error::{Error, Result};
use crate::graph::{DisjointSets, WeightedGraph};
use crate::privacy::PrivacyBudget;
use crate::randomness::RngStream;
use crate::scalar::Real;

/// Membership test for the independent sets of a matroid on `0..ground_size()`.
pub trait IndependenceOracle {
    fn ground_size(&self) -> usize;
    fn is_independent(&self, set: &[usize]) -> bool;
}

/// Forests of a graph.
pub struct GraphicMatroid<'g, F> {
    graph: &'g WeightedGraph<F>,
}

impl<'g, F: Real> GraphicMatroid<'g, F> {
    pub fn new(graph: &'g WeightedGraph<F>) -> Self {
        Self { graph }
    }
}

impl<F: Real> IndependenceOracle for GraphicMatroid<'_, F> {
    fn ground_size(&self) -> usize {
        self.graph.m()
    }

    fn is_independent(&self, set: &[usize]) -> bool {
        let mut ds = DisjointSets::new(self.graph.n());
        set.iter().all(|&e| {
            e < self.graph.m() && {
                let (u, v) = self.graph.endpoints(e);
                ds.merge0(u - 1, v - 1)
            }
        })
    }
}

/// Every set of at most `rank` elements.
#[derive(Debug, Clone, Copy)]
pub struct UniformMatroid {
    pub ground: usize,
    pub rank: usize,
}

impl IndependenceOracle for UniformMatroid {
    fn ground_size(&self) -> usize {
        self.ground
    }

    fn is_independent(&self, set: &[usize]) -> bool {
        set.len() <= self.rank && distinct_in_range(set, self.ground)
    }
}

/// At most `capacity[b]` elements from block `b`.
#[derive(Debug, Clone)]
pub struct PartitionMatroid {
    pub block_of: Vec<usize>,
    pub capacity: Vec<usize>,
}

impl IndependenceOracle for PartitionMatroid {
    fn ground_size(&self) -> usize {
        self.block_of.len()
    }

    fn is_independent(&self, set: &[usize]) -> bool {
        if !distinct_in_range(set, self.block_of.len()) {
            return false;
        }
        let mut used = vec![0usize; self.capacity.len()];
        set.iter().all(|&x| {
            let b = self.block_of[x];
            used[b] += 1;
            used[b] <= self.capacity[b]
        })
    }
}

fn distinct_in_range(set: &[usize], ground: usize) -> bool {
    let mut seen = vec![false; ground];
    set.iter()
        .all(|&x| x < ground && !std::mem::replace(&mut seen[x], true))
}

/// Size of a maximal independent set found greedily in index order.
pub fn matroid_rank<O: IndependenceOracle + ?Sized>(oracle: &O) -> Result<usize> {
    if !oracle.is_independent(&[]) {
        return Err(Error::OracleInconsistent("empty set is dependent"));
    }
    let mut basis = Vec::new();
    for x in 0..oracle.ground_size() {
        basis.push(x);
        if !oracle.is_independent(&basis) {
            basis.pop();
        }
    }
    Ok(basis.len())
}

/// Greedy maximum-weight basis: scan by weight descending (ties to the lower
/// index), keep each element that preserves independence.
pub fn greedy_max_weight_basis<F: Real, O: IndependenceOracle + ?Sized>(
    oracle: &O,
    weights: &[F],
) -> Result<Vec<usize>> {
    if weights.len() != oracle.ground_size() {
        return Err(Error::LengthMismatch {
            what: "weights",
            got: weights.len(),
            expected: oracle.ground_size(),
        });
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        weights[b]
            .partial_cmp(&weights[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut basis = Vec::new();
    for x in order {
        basis.push(x);
        if !oracle.is_independent(&basis) {
            basis.pop();
        }
    }
    Ok(basis)
}

#[derive(Debug, Clone)]
pub struct MatroidSelection<F> {
    /// Selected elements in the order the greedy scan accepted them.
    pub basis: Vec<usize>,
    pub rank: usize,
    pub eps_prime: F,
    /// Perturbed weights; diagnostic only, not a private release.
    pub noisy_weights: Vec<F>,
}

/// Private maximum-weight basis by input perturbation.
///
/// Each weight becomes `w − Δ∞·(2/ε′)·ln Exp(1)` (one draw per element in
/// index order), with ε′ split over `rank` rounds, and the greedy algorithm
/// runs on the perturbed weights.
pub fn matroid_private_max_weight_basis<F: Real, O: IndependenceOracle + ?Sized>(
    oracle: &O,
    weights: &[F],
    budget: &PrivacyBudget<F>,
    rng: &mut RngStream,
) -> Result<MatroidSelection<F>> {
    let rank = matroid_rank(oracle)?;
    if rank == 0 {
        return Ok(MatroidSelection {
            basis: Vec::new(),
            rank,
            eps_prime: F::infinity(),
            noisy_weights: weights.to_vec(),
        });
    }
    let eps_prime = budget.eps_prime_for(rank)?;
    let scale = budget.delta_inf() * (F::one() + F::one()) / eps_prime;
    let noisy: Vec<F> = weights
        .iter()
        .map(|&w| w - scale * rng.ln_exponential::<F>())
        .collect();
    let basis = greedy_max_weight_basis(oracle, &noisy)?;
    spot_check(oracle, &basis, rank)?;
    Ok(MatroidSelection {
        basis,
        rank,
        eps_prime,
        noisy_weights: noisy,
    })
}

fn spot_check<O: IndependenceOracle + ?Sized>(oracle: &O, basis: &[usize], rank: usize) -> Result<()> {
    if basis.len() != rank {
        return Err(Error::OracleInconsistent("bases of different sizes"));
    }
    if !oracle.is_independent(basis) {
        return Err(Error::OracleInconsistent("greedy basis reported dependent"));
    }
    if basis.iter().any(|&x| !oracle.is_independent(&[x])) {
        return Err(Error::OracleInconsistent("subset of an independent set is dependent"));
    }
    if !oracle.is_independent(&basis[..basis.len() - 1]) {
        return Err(Error::OracleInconsistent("subset of an independent set is dependent"));
    }
    Ok(())
}
