use std::time::Instant;

use super::{empty_result, require_connected, tree_eps_prime, MechanismResult, NoisyWeights, OpsCounter, Release};
use crate::error::{Error, Result};
use crate::graph::{kruskal_in_order, kruskal_mst, MstAlgorithm, WeightedGraph};
use crate::ppsacr::race_scores;
use crate::privacy::{gaussian_sigma_for_input_privatization, laplace_scale_for_input_privatization, PrivacyBudget};
use crate::randomness::RngStream;
use crate::scalar::Real;

/// `w̃_e = w_e + Δ∞·(2/ε′)·ln Exp(1)`, one draw per edge in id order.
pub fn perturb_exponential_noise<F: Real>(
    g: &WeightedGraph<F>,
    eps_prime: F,
    delta_inf: F,
    rng: &mut RngStream,
) -> Result<Vec<F>> {
    if !(eps_prime > F::zero()) {
        return Err(Error::domain("eps_prime", eps_prime.as_f64(), "> 0"));
    }
    if !(delta_inf > F::zero() && delta_inf.is_finite()) {
        return Err(Error::domain("delta_inf", delta_inf.as_f64(), "finite and > 0"));
    }
    let scale = delta_inf * F::of(2.0) / eps_prime;
    Ok(g.weights()
        .iter()
        .map(|&w| w + scale * rng.ln_exponential::<F>())
        .collect())
}

/// Perturbs every weight once and hands the result to `mst_algo`. Only the
/// tree is a private release.
pub fn private_mst_input_perturbation<F: Real, A: MstAlgorithm<F> + ?Sized>(
    g: &WeightedGraph<F>,
    budget: &PrivacyBudget<F>,
    mst_algo: &A,
    rng: &mut RngStream,
) -> Result<MechanismResult<F>> {
    let start = Instant::now();
    let Some(eps_prime) = tree_eps_prime(g, budget)? else {
        return Ok(empty_result());
    };
    let noisy = perturb_exponential_noise(g, eps_prime, budget.delta_inf(), rng)?;
    let tree = mst_algo.spanning_tree(g, &noisy)?;
    Ok(MechanismResult {
        tree,
        noisy_weights: Some(NoisyWeights {
            values: noisy,
            release: Release::Diagnostic,
        }),
        wall_time: start.elapsed(),
        ops: OpsCounter::default(),
    })
}

/// Race scores `ln Exp(1) + ε′ w_e / (2Δ∞)` (same draws, same order as
/// [`perturb_exponential_noise`]), then Kruskal's scan in score order.
pub fn one_pass_private_kruskal<F: Real>(
    g: &WeightedGraph<F>,
    budget: &PrivacyBudget<F>,
    rng: &mut RngStream,
) -> Result<MechanismResult<F>> {
    let start = Instant::now();
    let Some(eps_prime) = tree_eps_prime(g, budget)? else {
        return Ok(empty_result());
    };
    let log_s = super::exponential_log_sizes(g, eps_prime, budget.delta_inf());
    let scores = race_scores(&log_s, rng);
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_unstable_by(|&a, &b| crate::graph::edge_order(&scores, a, b));
    let tree = kruskal_in_order(g, order)?;
    Ok(MechanismResult {
        tree,
        noisy_weights: None,
        wall_time: start.elapsed(),
        ops: OpsCounter::default(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SealfonMode {
    /// `Lap(m·Δ∞/ε)` per weight: ε-DP for the whole vector.
    LaplacePure,
    /// `N(0, σ²)` with `σ = √m·Δ∞/√(2ρ)`: ρ-zCDP for the whole vector.
    GaussianZcdp,
}

/// Privatises the full weight vector, then takes its exact MST.
pub fn sealfon_input_privatization<F: Real>(
    g: &WeightedGraph<F>,
    budget: &PrivacyBudget<F>,
    mode: SealfonMode,
    rng: &mut RngStream,
) -> Result<MechanismResult<F>> {
    let start = Instant::now();
    require_connected(g)?;
    if g.m() == 0 {
        return Ok(empty_result());
    }
    let noisy: Vec<F> = match mode {
        SealfonMode::LaplacePure => {
            let b = laplace_scale_for_input_privatization(budget.epsilon(), g.m(), budget.delta_inf())?;
            g.weights()
                .iter()
                .map(|&w| rng.laplace(b).map(|z| w + z))
                .collect::<Result<_>>()?
        }
        SealfonMode::GaussianZcdp => {
            let sigma = gaussian_sigma_for_input_privatization(budget.rho(), g.m(), budget.delta_inf())?;
            g.weights()
                .iter()
                .map(|&w| rng.gaussian(sigma).map(|z| w + z))
                .collect::<Result<_>>()?
        }
    };
    let tree = kruskal_mst(g, &noisy)?;
    Ok(MechanismResult {
        tree,
        noisy_weights: Some(NoisyWeights {
            values: noisy,
            release: Release::Private,
        }),
        wall_time: start.elapsed(),
        ops: OpsCounter::default(),
    })
}
