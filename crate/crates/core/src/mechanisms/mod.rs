//! Private spanning-tree mechanisms.
//!
//! | id                | method                                                   |
//! |-------------------|----------------------------------------------------------|
//! | `perturb`         | Gumbel-type noise on every weight, then any exact MST    |
//! | `kruskal`         | n − 1 exponential-mechanism picks with cycle removal     |
//! | `onepass`         | one race score per edge, then Kruskal order on scores    |
//! | `pamst`           | Prim-Jarník growth, exponential mechanism per cut        |
//! | `sealfon-laplace` | privatise the whole weight vector (Laplace, pure DP)     |
//! | `sealfon-gauss`   | privatise the whole weight vector (Gaussian, zCDP)       |
//!
//! The first four spend `ε′ = √(2ρ / (n − 1))` per round and release only the
//! tree. Every mechanism reads Δ∞ from the budget and draws all randomness
//! from the stream it is given.

mod kruskal;
mod pamst;
mod perturbation;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

pub use kruskal::private_kruskal;
pub use pamst::pamst;
pub use perturbation::{
    one_pass_private_kruskal, perturb_exponential_noise, private_mst_input_perturbation,
    sealfon_input_privatization, SealfonMode,
};

use crate::error::{Error, Result};
use crate::graph::{kruskal_mst, weight_under, Kruskal, SpanningTree, WeightedGraph};
use crate::privacy::PrivacyBudget;
use crate::randomness::RngStream;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanismId {
    Perturb,
    Kruskal,
    OnePass,
    Pamst,
    SealfonLaplace,
    SealfonGauss,
}

impl MechanismId {
    pub const ALL: [MechanismId; 6] = [
        MechanismId::Perturb,
        MechanismId::Kruskal,
        MechanismId::OnePass,
        MechanismId::Pamst,
        MechanismId::SealfonLaplace,
        MechanismId::SealfonGauss,
    ];

    /// Stable command-line name.
    pub fn name(self) -> &'static str {
        match self {
            MechanismId::Perturb => "perturb",
            MechanismId::Kruskal => "kruskal",
            MechanismId::OnePass => "onepass",
            MechanismId::Pamst => "pamst",
            MechanismId::SealfonLaplace => "sealfon-laplace",
            MechanismId::SealfonGauss => "sealfon-gauss",
        }
    }

    /// Whether the noisy weight vector is itself a private release.
    pub fn releases_noisy_weights(self) -> bool {
        matches!(self, MechanismId::SealfonLaplace | MechanismId::SealfonGauss)
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MechanismId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownMechanism(s.to_string()))
    }
}

/// Whether a noisy weight vector may be published.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Release {
    /// Diagnostic only, not a private release: the noise is calibrated to
    /// protect the tree, not the vector.
    Diagnostic,
    /// The vector itself satisfies the privacy guarantee.
    Private,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyWeights<F> {
    pub values: Vec<F>,
    pub release: Release,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpsCounter {
    /// Per-edge count of cycle checks (empty when not instrumented).
    pub edge_checks: Vec<u32>,
    /// Sampling-tree samples, removals and activations.
    pub tree_ops: u64,
}

impl OpsCounter {
    pub fn max_edge_checks(&self) -> u32 {
        self.edge_checks.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct MechanismResult<F> {
    pub tree: SpanningTree,
    pub noisy_weights: Option<NoisyWeights<F>>,
    pub wall_time: Duration,
    pub ops: OpsCounter,
}

impl<F: Real> MechanismResult<F> {
    /// When noisy weights are present, checks that the tree is minimum under
    /// them (up to a relative 1e-9).
    pub fn is_mst_of_noisy_weights(&self, g: &WeightedGraph<F>) -> Result<bool> {
        let Some(noisy) = &self.noisy_weights else {
            return Ok(true);
        };
        let best = weight_under(&noisy.values, &kruskal_mst(g, &noisy.values)?)?.as_f64();
        let ours = weight_under(&noisy.values, &self.tree)?.as_f64();
        Ok(ours <= best + 1e-9 * best.abs().max(1.0))
    }
}

/// Runs mechanism `id` with the per-round ε′ for `n − 1` rounds.
pub fn run_mechanism<F: Real>(
    id: MechanismId,
    g: &WeightedGraph<F>,
    budget: &PrivacyBudget<F>,
    rng: &mut RngStream,
) -> Result<MechanismResult<F>> {
    match id {
        MechanismId::Perturb => private_mst_input_perturbation(g, budget, &Kruskal, rng),
        MechanismId::Kruskal => private_kruskal(g, budget, rng),
        MechanismId::OnePass => one_pass_private_kruskal(g, budget, rng),
        MechanismId::Pamst => pamst(g, budget, rng),
        MechanismId::SealfonLaplace => sealfon_input_privatization(g, budget, SealfonMode::LaplacePure, rng),
        MechanismId::SealfonGauss => sealfon_input_privatization(g, budget, SealfonMode::GaussianZcdp, rng),
    }
}

fn require_connected<F: Real>(g: &WeightedGraph<F>) -> Result<()> {
    if g.is_connected() {
        Ok(())
    } else {
        Err(Error::Disconnected {
            components: g.component_count(),
        })
    }
}

/// ε′ for a spanning tree of `g`; `None` for a single vertex.
fn tree_eps_prime<F: Real>(g: &WeightedGraph<F>, budget: &PrivacyBudget<F>) -> Result<Option<F>> {
    require_connected(g)?;
    if g.n() == 1 {
        return Ok(None);
    }
    budget.eps_prime_for(g.n() - 1).map(Some)
}

/// `−ε′ (w_e − w_min) / (2Δ∞)`: log-sizes of the exponential mechanism,
/// shifted so the largest is 0.
fn exponential_log_sizes<F: Real>(g: &WeightedGraph<F>, eps_prime: F, delta_inf: F) -> Vec<F> {
    let w_min = g.min_weight().unwrap_or_else(F::zero);
    let rate = eps_prime / (F::of(2.0) * delta_inf);
    g.weights().iter().map(|&w| -(rate * (w - w_min))).collect()
}

fn empty_result<F>() -> MechanismResult<F> {
    MechanismResult {
        tree: SpanningTree::from_sorted_unchecked(Vec::new()),
        noisy_weights: None,
        wall_time: Duration::ZERO,
        ops: OpsCounter::default(),
    }
}
