//! Seeded samplers.
//!
//! [`RngStream`] is a ChaCha12 generator keyed by a 64-bit master seed and
//! positioned on one of its 2^64 independent streams, so the same
//! `(seed, stream)` pair replays the same sequence on every platform and a
//! harness can hand trial `i` the stream `i` without coordination.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Fresh stream `stream` under the same master seed.
    pub fn derive(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on the open interval (0, 1): `(k + 1/2) / 2^53` for a 53-bit `k`.
    pub fn uniform_open(&mut self) -> f64 {
        let k = self.rng.next_u64() >> 11;
        (k as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform_open() < p
    }

    /// Exp(λ) via `-ln(U) / λ`.
    pub fn exponential<F: Real>(&mut self, lambda: F) -> Result<F> {
        if !(lambda > F::zero()) || !lambda.is_finite() {
            return Err(Error::domain("lambda", lambda.as_f64(), "> 0"));
        }
        Ok(F::of(-self.uniform_open().ln()) / lambda)
    }

    /// `ln(Exp(1))`, the negative of a standard Gumbel draw.
    pub fn ln_exponential<F: Real>(&mut self) -> F {
        F::of((-self.uniform_open().ln()).ln())
    }

    /// Gumbel with location 0 and scale `b`.
    pub fn gumbel<F: Real>(&mut self, b: F) -> Result<F> {
        check_scale("b", b)?;
        Ok(-b * self.ln_exponential::<F>())
    }

    /// Laplace with location 0 and scale `b`, by inverse CDF.
    pub fn laplace<F: Real>(&mut self, b: F) -> Result<F> {
        check_scale("b", b)?;
        let centred = self.uniform_open() - 0.5;
        let magnitude = -(1.0 - 2.0 * centred.abs()).ln();
        Ok(b * F::of(magnitude.copysign(centred)))
    }

    pub fn gaussian<F: Real>(&mut self, sigma: F) -> Result<F> {
        check_scale("sigma", sigma)?;
        let z: f64 = StandardNormal.sample(self);
        Ok(sigma * F::of(z))
    }

    /// Beta(α, β) as `X / (X + Y)` with `X ~ Gamma(α)`, `Y ~ Gamma(β)`.
    pub fn beta<F: Real>(&mut self, alpha: F, beta: F) -> Result<F> {
        check_scale("alpha", alpha)?;
        check_scale("beta", beta)?;
        let x = Gamma::new(alpha.as_f64(), 1.0)
            .map_err(|_| Error::domain("alpha", alpha.as_f64(), "> 0"))?
            .sample(self);
        let y = Gamma::new(beta.as_f64(), 1.0)
            .map_err(|_| Error::domain("beta", beta.as_f64(), "> 0"))?
            .sample(self);
        if x + y == 0.0 {
            // both gammas underflowed; only reachable for tiny shapes
            return Ok(F::of(if self.bernoulli(0.5) { 0.0 } else { 1.0 }));
        }
        Ok(F::of(x / (x + y)))
    }

    /// Binomial(s, p) as `s` Bernoulli draws.
    pub fn binomial<F: Real>(&mut self, s: usize, p: F) -> Result<usize> {
        let p = p.as_f64();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain("p", p, "in [0, 1]"));
        }
        Ok((0..s).filter(|_| self.bernoulli(p)).count())
    }
}

fn check_scale<F: Real>(name: &'static str, value: F) -> Result<()> {
    if value > F::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, value.as_f64(), "> 0"))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// SplitMix64 finaliser; mixes a tag into a seed to name sub-experiments.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::stats::{ks_test, mean};

    const N: usize = 1_000_000;

    fn draws(n: usize, seed: u64, mut f: impl FnMut(&mut RngStream) -> f64) -> Vec<f64> {
        let mut r = RngStream::new(seed, 0);
        (0..n).map(|_| f(&mut r)).collect()
    }

    #[test]
    fn same_seed_same_stream_is_bit_identical() {
        let a = draws(1000, 7, |r| r.uniform_open());
        let b = draws(1000, 7, |r| r.uniform_open());
        assert_eq!(a, b);
        let mut c = RngStream::new(7, 1);
        assert_ne!(a[0], c.uniform_open());
        let d = RngStream::new(7, 0).derive(1);
        assert_eq!(d.stream(), 1);
        assert_eq!(d.seed(), 7);
    }

    #[test]
    fn uniform_never_hits_endpoints() {
        let mut r = RngStream::new(1, 1);
        for _ in 0..100_000 {
            let u = r.uniform_open();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn exponential_mean_and_survival() {
        let x = draws(N, 11, |r| r.exponential(2.0f64).unwrap());
        assert!((mean(&x) - 0.5).abs() < 0.01);
        let y = draws(N, 12, |r| r.exponential(1.0f64).unwrap());
        let tail = y.iter().filter(|&&v| v >= 2f64.ln()).count() as f64 / N as f64;
        assert!((tail - 0.5).abs() < 0.01);
    }

    #[test]
    fn exponential_rejects_bad_rate() {
        let mut r = RngStream::new(0, 0);
        assert!(r.exponential(0.0f64).is_err());
        assert!(r.exponential(-1.0f64).is_err());
        assert!(r.exponential(f64::NAN).is_err());
    }

    #[test]
    fn scaled_exponential_is_exponential() {
        let x = draws(100_000, 13, |r| r.exponential(1.0f64).unwrap() / 4.0);
        let res = ks_test(&x, |v| 1.0 - (-4.0 * v).exp(), 0.01);
        assert!(res.pass, "{res:?}");
    }

    #[test]
    fn ln_exponential_tail_and_median() {
        let z = draws(N, 14, |r| r.ln_exponential::<f64>());
        let beta: f64 = 0.1;
        let threshold = (1.0 / beta).ln().ln();
        let tail = z.iter().filter(|&&v| v > threshold).count() as f64 / N as f64;
        assert!((tail - 0.1).abs() < 0.01);

        let mut sorted = z.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[N / 2];
        // exp(-e^{-z}) = 1/2 at z = -ln ln 2, and the sample is the negation
        assert!((median - 2f64.ln().ln()).abs() < 0.01, "{median}");
    }

    #[test]
    fn negated_ln_exponential_is_gumbel() {
        let g = draws(100_000, 15, |r| -r.ln_exponential::<f64>());
        let res = ks_test(&g, |z| (-(-z).exp()).exp(), 0.01);
        assert!(res.pass, "{res:?}");
    }

    #[test]
    fn laplace_tail() {
        let x = draws(N, 16, |r| r.laplace(1.0f64).unwrap());
        let tail = x.iter().filter(|v| v.abs() > 10f64.ln()).count() as f64 / N as f64;
        assert!((tail - 0.1).abs() < 0.01);
        assert!(RngStream::new(0, 0).laplace(0.0f64).is_err());
    }

    #[test]
    fn gaussian_variance() {
        let x = draws(N, 17, |r| r.gaussian(1.0f64).unwrap());
        let m = mean(&x);
        let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (N - 1) as f64;
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn gumbel_mean_is_euler_gamma() {
        // oracle: trapezoid integration of z f(z) over [-10, 40]
        let h = 1e-4;
        let density = |z: f64| (-(z + (-z).exp())).exp();
        let mut integral = 0.0;
        let mut z: f64 = -10.0;
        while z < 40.0 {
            integral += 0.5 * h * (z * density(z) + (z + h) * density(z + h));
            z += h;
        }
        assert!((integral - 0.577_215_664_9).abs() < 1e-6);

        let x = draws(N, 18, |r| r.gumbel(1.0f64).unwrap());
        assert!((mean(&x) - integral).abs() < 0.01);
    }

    #[test]
    fn beta_one_one_is_uniform() {
        let x = draws(100_000, 19, |r| r.beta(1.0f64, 1.0).unwrap());
        let res = ks_test(&x, |v| v.clamp(0.0, 1.0), 0.01);
        assert!(res.pass, "{res:?}");
    }

    #[test]
    fn symmetric_beta_has_mean_half() {
        // n = e^2 gives α = β = ½ ln n = 1
        let a = 0.5 * 2.0f64;
        let x = draws(N, 20, |r| r.beta(a, a).unwrap());
        assert!((mean(&x) - 0.5).abs() < 0.01);
        assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(RngStream::new(0, 0).beta(0.0f64, 1.0).is_err());
    }

    #[test]
    fn binomial_edge_cases() {
        let mut r = RngStream::new(21, 0);
        for s in [0, 1, 10] {
            assert_eq!(r.binomial(s, 0.0f64).unwrap(), 0);
            assert_eq!(r.binomial(s, 1.0f64).unwrap(), s);
        }
        assert!(r.binomial(3, 1.5f64).is_err());
        assert!(r.binomial(3, -0.1f64).is_err());
    }

    #[test]
    fn f32_samplers() {
        let mut r = RngStream::new(22, 0);
        let x: f32 = r.exponential(1.0f32).unwrap();
        assert!(x > 0.0);
        let z: f32 = r.ln_exponential();
        assert!(z.is_finite());
    }

    #[test]
    fn mix_seed_separates_tags() {
        assert_ne!(mix_seed(1, 0), mix_seed(1, 1));
        assert_eq!(mix_seed(5, 9), mix_seed(5, 9));
    }
}
