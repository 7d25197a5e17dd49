//! Instance generators and the edge-list file format.
//!
//! File format (UTF-8, LF): lines starting with `#` and blank lines are
//! ignored; the first remaining line is `n m delta_inf`, followed by exactly
//! `m` lines `u v w` with 1-based vertices. Edge ids follow line order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::randomness::RngStream;
use crate::scalar::Real;

pub const ER_MAX_ATTEMPTS: usize = 1000;

fn complete_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 1..=n {
        for v in u + 1..=n {
            edges.push((u, v));
        }
    }
    edges
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::EmptyGraph)
    } else {
        Ok(())
    }
}

/// G(n, p) with weights uniform on `[wmin, wmax]`, redrawn until connected.
///
/// Candidate pairs are visited in lexicographic order; a weight is drawn only
/// for included pairs.
pub fn erdos_renyi_instance<F: Real>(
    n: usize,
    p: f64,
    wmin: F,
    wmax: F,
    rng: &mut RngStream,
) -> Result<WeightedGraph<F>> {
    check_n(n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("p", p, "in [0, 1]"));
    }
    if !(wmin.is_finite() && wmax.is_finite() && wmin <= wmax) {
        return Err(Error::domain("wmax", wmax.as_f64(), "finite and >= wmin"));
    }
    let span = wmax - wmin;
    for _ in 0..ER_MAX_ATTEMPTS {
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                if rng.bernoulli(p) {
                    edges.push((u, v));
                    weights.push(wmin + span * F::of(rng.uniform_open()));
                }
            }
        }
        let g = WeightedGraph::new_unchecked_connectivity(n, edges, weights)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ConnectivityUnreachable {
        n,
        p,
        attempts: ER_MAX_ATTEMPTS,
    })
}

fn check_flip(flip_p: f64) -> Result<()> {
    if flip_p > 0.0 && flip_p < 0.5 {
        Ok(())
    } else {
        Err(Error::domain("flip_p", flip_p, "in (0, 1/2)"))
    }
}

/// Mutual information in bits between two points `k` hops apart on a chain
/// of uniform bits where each hop flips with probability `flip_p`:
/// `½(p₁ log₂ p₁ + p₂ log₂ p₂)` with `p₁,₂ = 1 ± (1 − 2p)^k`.
pub fn mi_weight(flip_p: f64, k: usize) -> Result<f64> {
    check_flip(flip_p)?;
    if k == 0 {
        return Err(Error::domain("k", 0.0, ">= 1"));
    }
    let c = (1.0 - 2.0 * flip_p).powi(k as i32);
    Ok(0.5 * plus_minus_entropy(c) / std::f64::consts::LN_2)
}

/// `(1 + c) ln(1 + c) + (1 − c) ln(1 − c)` for `0 ≤ c < 1`. For small `c` the
/// two terms cancel to `O(c²)`, so the series `Σ c^{2j} / (j(2j − 1))` is
/// used instead.
fn plus_minus_entropy(c: f64) -> f64 {
    if c >= 0.5 {
        return (1.0 + c) * c.ln_1p() + (1.0 - c) * (-c).ln_1p();
    }
    let c2 = c * c;
    let mut power = c2;
    let mut sum = 0.0;
    for j in 1..200 {
        let jf = j as f64;
        let term = power / (jf * (2.0 * jf - 1.0));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        power *= c2;
    }
    sum
}

/// Probability that `k` independent flips with probability `flip_p` contain
/// an even number of flips: `½ + ½(1 − 2p)^k`.
pub fn parity_even_prob(k: usize, flip_p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&flip_p) {
        return Err(Error::domain("flip_p", flip_p, "in [0, 1]"));
    }
    Ok(0.5 + 0.5 * (1.0 - 2.0 * flip_p).powi(k as i32))
}

/// `log₂(d) / d`, the sensitivity of empirical mutual information over `d` records.
pub fn mi_sensitivity(dataset_size: usize) -> Result<f64> {
    if dataset_size < 2 {
        return Err(Error::domain("dataset_size", dataset_size as f64, ">= 2"));
    }
    let d = dataset_size as f64;
    Ok(d.log2() / d)
}

/// Complete graph with `w_ij = −mi_weight(flip_p, |i − j|)`, so the minimum
/// spanning tree is the maximum mutual-information tree. Δ∞ is
/// [`mi_sensitivity`]`(dataset_size)`.
pub fn mutual_info_chain_instance<F: Real>(
    n: usize,
    flip_p: f64,
    dataset_size: usize,
) -> Result<WeightedGraph<F>> {
    check_n(n)?;
    check_flip(flip_p)?;
    let delta_inf = mi_sensitivity(dataset_size)?;
    let by_hop = (1..n).map(|k| mi_weight(flip_p, k)).collect::<Result<Vec<f64>>>()?;
    let edges = complete_pairs(n);
    let weights = edges.iter().map(|&(u, v)| F::of(-by_hop[v - u - 1])).collect();
    WeightedGraph::new(n, edges, weights)?.with_delta_inf(F::of(delta_inf))
}

/// Complete graph whose weights are Beta-Binomial: `P_e ~ Beta(β, β)`, then
/// `w_e ~ Binomial(s, P_e)`, one edge at a time in lexicographic order.
pub fn hard_instance<F: Real>(n: usize, beta: f64, s: usize, rng: &mut RngStream) -> Result<WeightedGraph<F>> {
    check_n(n)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain("beta", beta, "> 0"));
    }
    if s == 0 {
        return Err(Error::domain("s", 0.0, ">= 1"));
    }
    let edges = complete_pairs(n);
    let weights = edges
        .iter()
        .map(|_| {
            let p: f64 = rng.beta(beta, beta)?;
            Ok(F::of_usize(rng.binomial(s, p)?))
        })
        .collect::<Result<Vec<F>>>()?;
    WeightedGraph::new(n, edges, weights)
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceModel {
    ErdosRenyi { n: usize, p: f64, wmin: f64, wmax: f64 },
    MiChain { n: usize, flip_p: f64, dataset_size: usize },
    Hard { n: usize, beta: f64, s: usize },
}

/// A generator model together with the seed that fixes its output.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub model: InstanceModel,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        match self.model {
            InstanceModel::ErdosRenyi { n, p, wmin, wmax } => {
                check_n(n)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::domain("p", p, "in [0, 1]"));
                }
                if !(wmin.is_finite() && wmax.is_finite() && wmin <= wmax) {
                    return Err(Error::domain("wmax", wmax, "finite and >= wmin"));
                }
            }
            InstanceModel::MiChain { n, flip_p, dataset_size } => {
                check_n(n)?;
                check_flip(flip_p)?;
                mi_sensitivity(dataset_size)?;
            }
            InstanceModel::Hard { n, beta, s } => {
                check_n(n)?;
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::domain("beta", beta, "> 0"));
                }
                if s == 0 {
                    return Err(Error::domain("s", 0.0, ">= 1"));
                }
            }
        }
        Ok(())
    }

    pub fn generate<F: Real>(&self) -> Result<WeightedGraph<F>> {
        self.validate()?;
        let mut rng = RngStream::new(self.seed, 0);
        match self.model {
            InstanceModel::ErdosRenyi { n, p, wmin, wmax } => {
                erdos_renyi_instance(n, p, F::of(wmin), F::of(wmax), &mut rng)
            }
            InstanceModel::MiChain { n, flip_p, dataset_size } => {
                mutual_info_chain_instance(n, flip_p, dataset_size)
            }
            InstanceModel::Hard { n, beta, s } => hard_instance(n, beta, s, &mut rng),
        }
    }
}

/// Renders `g` in the edge-list format. Numbers use Rust's shortest
/// round-trip decimal form, so reading the text back is bit-exact.
pub fn format_instance<F: Real>(g: &WeightedGraph<F>) -> String {
    let mut out = String::new();
    out.push_str("# n m delta_inf\n");
    let _ = writeln!(out, "{} {} {}", g.n(), g.m(), g.delta_inf());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let _ = writeln!(out, "{u} {v} {}", g.weight(e));
    }
    out
}

pub fn write_instance<F: Real>(g: &WeightedGraph<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_instance(g)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_instance<F: Real>(path: impl AsRef<Path>) -> Result<WeightedGraph<F>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text, path)
}

/// Parses the edge-list format; `origin` only labels error messages.
pub fn parse_instance<F: Real>(text: &str, origin: impl AsRef<Path>) -> Result<WeightedGraph<F>> {
    let origin: PathBuf = origin.as_ref().to_path_buf();
    let err = |line: usize, message: String| Error::Parse {
        path: origin.clone(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or_else(|| err(1, "missing header `n m delta_inf`".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(err(header_line, format!("header must be `n m delta_inf`, got `{header}`")));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| err(header_line, format!("bad vertex count `{}`", fields[0])))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| err(header_line, format!("bad edge count `{}`", fields[1])))?;
    let delta_inf: F = fields[2]
        .parse()
        .map_err(|_| err(header_line, format!("bad delta_inf `{}`", fields[2])))?;
    if n == 0 {
        return Err(err(header_line, "vertex count must be at least 1".into()));
    }
    if !(delta_inf > F::zero() && delta_inf.is_finite()) {
        return Err(err(header_line, format!("delta_inf must be positive, got `{}`", fields[2])));
    }

    let mut edges = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mut last_line = header_line;
    for (line, content) in lines {
        last_line = line;
        if edges.len() == m {
            return Err(err(line, format!("more than the {m} edges declared in the header")));
        }
        let parts: Vec<&str> = content.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(err(line, format!("edge line must be `u v w`, got `{content}`")));
        }
        let vertex = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| err(line, format!("bad vertex `{s}`")))?;
            if v == 0 || v > n {
                return Err(err(line, format!("vertex {v} outside 1..={n}")));
            }
            Ok(v)
        };
        let (u, v) = (vertex(parts[0])?, vertex(parts[1])?);
        if u == v {
            return Err(err(line, format!("self-loop on vertex {u}")));
        }
        let w: F = parts[2]
            .parse()
            .map_err(|_| err(line, format!("bad weight `{}`", parts[2])))?;
        if !w.is_finite() {
            return Err(err(line, format!("weight `{}` is not finite", parts[2])));
        }
        edges.push((u, v));
        weights.push(w);
    }
    if edges.len() != m {
        return Err(err(last_line, format!("header declares {m} edges, found {}", edges.len())));
    }
    WeightedGraph::new(n, edges, weights)?.with_delta_inf(delta_inf)
}
