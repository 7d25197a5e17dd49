//! zCDP accounting for the private MST mechanisms.
//!
//! An (ε, δ) target is converted to a zCDP budget ρ, split evenly across the
//! selection rounds (ε′ = √(2ρ / rounds), each round being ε′²/2-zCDP), and
//! converted back with ε = ρ + 2√(ρ ln(1/δ)). Logs are natural.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_delta<F: Real>(delta: F) -> Result<()> {
    if delta > F::zero() && delta < F::one() {
        Ok(())
    } else {
        Err(Error::domain("delta", delta.as_f64(), "in (0, 1)"))
    }
}

fn check_positive<F: Real>(name: &'static str, value: F) -> Result<()> {
    if value > F::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, value.as_f64(), "> 0"))
    }
}

/// ρ = (√(ε + ln(1/δ)) − √(ln(1/δ)))².
pub fn rho_from_eps_delta<F: Real>(eps: F, delta: F) -> Result<F> {
    check_positive("eps", eps)?;
    check_delta(delta)?;
    let l = -delta.ln();
    // (√(ε+l) − √l)² = ε² / (√(ε+l) + √l)², which avoids cancellation for small ε
    let denom = (eps + l).sqrt() + l.sqrt();
    Ok((eps / denom).powi(2))
}

/// ε = ρ + 2√(ρ ln(1/δ)).
pub fn eps_from_rho_delta<F: Real>(rho: F, delta: F) -> Result<F> {
    if !(rho >= F::zero()) || !rho.is_finite() {
        return Err(Error::domain("rho", rho.as_f64(), ">= 0"));
    }
    check_delta(delta)?;
    let two = F::one() + F::one();
    Ok(rho + two * (rho * -delta.ln()).sqrt())
}

/// ε′ = √(2ρ / rounds).
pub fn per_round_epsilon<F: Real>(rho: F, rounds: usize) -> Result<F> {
    check_positive("rho", rho)?;
    if rounds == 0 {
        return Err(Error::domain("rounds", 0.0, ">= 1"));
    }
    let two = F::one() + F::one();
    Ok((two * rho / F::of_usize(rounds)).sqrt())
}

/// Gaussian noise scale that makes releasing all `m` weights ρ-zCDP.
///
/// Under ℓ∞ neighbouring the ℓ2 sensitivity of the weight vector is
/// √m·Δ∞, and the Gaussian mechanism is (Δ₂² / 2σ²)-zCDP.
pub fn gaussian_sigma_for_input_privatization<F: Real>(rho: F, m: usize, delta_inf: F) -> Result<F> {
    check_positive("rho", rho)?;
    check_positive("delta_inf", delta_inf)?;
    if m == 0 {
        return Err(Error::domain("m", 0.0, ">= 1"));
    }
    let two = F::one() + F::one();
    Ok(F::of_usize(m).sqrt() * delta_inf / (two * rho).sqrt())
}

/// Laplace scale that makes releasing all `m` weights pure ε-DP (ℓ1 sensitivity m·Δ∞).
pub fn laplace_scale_for_input_privatization<F: Real>(eps: F, m: usize, delta_inf: F) -> Result<F> {
    check_positive("eps", eps)?;
    check_positive("delta_inf", delta_inf)?;
    if m == 0 {
        return Err(Error::domain("m", 0.0, ">= 1"));
    }
    Ok(F::of_usize(m) * delta_inf / eps)
}

/// The (ε, δ, Δ∞) record threaded through every mechanism, with derived ρ
/// and, once bound to a round count, the per-round ε′.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget<F> {
    epsilon: F,
    delta: F,
    delta_inf: F,
    rho: F,
    rounds: Option<usize>,
    eps_round: Option<F>,
}

impl<F: Real> PrivacyBudget<F> {
    pub fn new(epsilon: F, delta: F, delta_inf: F) -> Result<Self> {
        check_positive("delta_inf", delta_inf)?;
        let rho = rho_from_eps_delta(epsilon, delta)?;
        Ok(Self {
            epsilon,
            delta,
            delta_inf,
            rho,
            rounds: None,
            eps_round: None,
        })
    }

    /// Budget specified directly in zCDP; ε is derived for reporting.
    pub fn from_rho(rho: F, delta: F, delta_inf: F) -> Result<Self> {
        check_positive("rho", rho)?;
        check_positive("delta_inf", delta_inf)?;
        let epsilon = eps_from_rho_delta(rho, delta)?;
        Ok(Self {
            epsilon,
            delta,
            delta_inf,
            rho,
            rounds: None,
            eps_round: None,
        })
    }

    /// Budget whose per-round ε′ over `rounds` rounds is exactly `eps_prime`.
    pub fn from_eps_prime(eps_prime: F, rounds: usize, delta: F, delta_inf: F) -> Result<Self> {
        check_positive("eps_prime", eps_prime)?;
        if rounds == 0 {
            return Err(Error::domain("rounds", 0.0, ">= 1"));
        }
        let half = F::of(0.5);
        let rho = F::of_usize(rounds) * half * eps_prime * eps_prime;
        let mut budget = Self::from_rho(rho, delta, delta_inf)?;
        budget.rounds = Some(rounds);
        budget.eps_round = Some(eps_prime);
        Ok(budget)
    }

    /// Binds the budget to `rounds` selections (n − 1 for a spanning tree).
    pub fn bind(mut self, rounds: usize) -> Result<Self> {
        if self.rounds == Some(rounds) && self.eps_round.is_some() {
            return Ok(self);
        }
        self.eps_round = Some(per_round_epsilon(self.rho, rounds)?);
        self.rounds = Some(rounds);
        Ok(self)
    }

    pub fn with_delta_inf(mut self, delta_inf: F) -> Result<Self> {
        check_positive("delta_inf", delta_inf)?;
        self.delta_inf = delta_inf;
        Ok(self)
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn delta_inf(&self) -> F {
        self.delta_inf
    }

    pub fn rho(&self) -> F {
        self.rho
    }

    pub fn rounds(&self) -> Option<usize> {
        self.rounds
    }

    pub fn eps_round(&self) -> Result<F> {
        self.eps_round.ok_or(Error::UnboundBudget)
    }

    /// ε′ for `rounds` rounds, reusing the bound value when it matches.
    pub fn eps_prime_for(&self, rounds: usize) -> Result<F> {
        match (self.rounds, self.eps_round) {
            (Some(r), Some(e)) if r == rounds => Ok(e),
            _ => per_round_epsilon(self.rho, rounds),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rho_examples() {
        // closed form at ε = 1, δ = e^{-1}: (√2 − 1)²
        let rho = rho_from_eps_delta(1.0f64, (-1.0f64).exp()).unwrap();
        assert_relative_eq!(rho, (2f64.sqrt() - 1.0).powi(2), epsilon = 1e-15);
        assert_relative_eq!(rho, 0.171_572_875_253_809_9, epsilon = 1e-12);

        let rho = rho_from_eps_delta(1.0f64, 1e-6).unwrap();
        let l = 1e6f64.ln();
        assert_relative_eq!(rho, ((1.0 + l).sqrt() - l.sqrt()).powi(2), epsilon = 1e-14);
        assert!((rho - 0.017_469).abs() < 5e-7, "{rho}");

        let tiny = rho_from_eps_delta(1e-12f64, 0.5).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-20);
    }

    #[test]
    fn eps_examples() {
        assert_eq!(eps_from_rho_delta(0.0f64, 0.5).unwrap(), 0.0);
        let eps = eps_from_rho_delta((2f64.sqrt() - 1.0).powi(2), (-1.0f64).exp()).unwrap();
        assert!((eps - 1.0).abs() < 1e-9);
        let eps = eps_from_rho_delta(0.171_573f64, (-1.0f64).exp()).unwrap();
        assert!((eps - 1.0).abs() < 1e-5);
    }

    #[test]
    fn round_trip_grid() {
        for eps in [0.1f64, 1.0, 5.0] {
            for delta in [1e-2f64, 1e-6, 1e-10] {
                let rho = rho_from_eps_delta(eps, delta).unwrap();
                let back = eps_from_rho_delta(rho, delta).unwrap();
                assert!((back - eps).abs() <= 1e-9, "{eps} {delta} {back}");
            }
        }
    }

    #[test]
    fn per_round_examples() {
        assert_eq!(per_round_epsilon(0.5f64, 1).unwrap(), 1.0);
        assert_relative_eq!(per_round_epsilon(0.5f64, 2).unwrap(), 0.5f64.sqrt());
        assert!(per_round_epsilon(0.5f64, 0).is_err());
        assert!(per_round_epsilon(0.0f64, 3).is_err());
    }

    #[test]
    fn gaussian_sigma_examples() {
        assert_relative_eq!(gaussian_sigma_for_input_privatization(0.5f64, 4, 1.0).unwrap(), 2.0);
        assert_relative_eq!(gaussian_sigma_for_input_privatization(0.5f64, 1, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            gaussian_sigma_for_input_privatization(1.0f64, 100, 0.1).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(gaussian_sigma_for_input_privatization(1.0f64, 0, 0.1).is_err());
        assert_relative_eq!(laplace_scale_for_input_privatization(0.5f64, 10, 0.1).unwrap(), 2.0);
    }

    #[test]
    fn domain_errors() {
        assert!(rho_from_eps_delta(0.0f64, 0.1).is_err());
        assert!(rho_from_eps_delta(1.0f64, 1.0).is_err());
        assert!(rho_from_eps_delta(1.0f64, 0.0).is_err());
        assert!(eps_from_rho_delta(-1.0f64, 0.1).is_err());
        assert!(PrivacyBudget::new(1.0f64, 0.1, 0.0).is_err());
    }

    #[test]
    fn budget_binding() {
        let b = PrivacyBudget::new(1.0f64, 1e-6, 0.1).unwrap();
        assert!(matches!(b.eps_round(), Err(Error::UnboundBudget)));
        let b = b.bind(9).unwrap();
        assert_relative_eq!(b.eps_round().unwrap(), (2.0 * b.rho() / 9.0).sqrt());
        assert_eq!(b.eps_prime_for(9).unwrap(), b.eps_round().unwrap());

        let e = PrivacyBudget::from_eps_prime(1.0f64, 2, 1e-6, 1.0).unwrap();
        assert_eq!(e.eps_round().unwrap(), 1.0);
        assert_eq!(e.rho(), 1.0);
        assert_relative_eq!(e.eps_prime_for(2).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn budget_is_conserved(rho in 1e-6f64..100.0, rounds in 1usize..10_000) {
            let e = per_round_epsilon(rho, rounds).unwrap();
            let total = rounds as f64 * e * e / 2.0;
            prop_assert!((total - rho).abs() <= 1e-12 * rho.max(1.0));
        }

        #[test]
        fn rho_increases_in_eps(a in 1e-3f64..50.0, b in 1e-3f64..50.0, d in 1e-12f64..0.5) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(rho_from_eps_delta(lo, d).unwrap() < rho_from_eps_delta(hi, d).unwrap());
        }

        #[test]
        fn eps_prime_decreases_in_rounds(rho in 1e-3f64..10.0, r in 1usize..1000) {
            prop_assert!(per_round_epsilon(rho, r + 1).unwrap() < per_round_epsilon(rho, r).unwrap());
        }

        #[test]
        fn round_trip(eps in 1e-3f64..20.0, d in 1e-12f64..0.5) {
            let rho = rho_from_eps_delta(eps, d).unwrap();
            prop_assert!((eps_from_rho_delta(rho, d).unwrap() - eps).abs() <= 1e-9);
        }
    }
}
