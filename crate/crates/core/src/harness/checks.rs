//! The acceptance criteria as runnable checks.
//!
//! Each check returns a pass/fail verdict with a one-line detail string. The
//! `acceptance` test target and `dpmst selftest` both call [`run_check`].

use std::fmt;
use std::time::{Duration, Instant};

use rand_distr::{Beta, Binomial, Distribution};

use super::{
    density_sweep, equivalence_on_graph, equivalence_suite, mutant_private_kruskal, run_trials, EquivFamily,
    RunOptions, SweepParams, TreeSampler, SWEEP_MECHANISMS,
};
use crate::error::Result;
use crate::graph::{build_graph, kruskal_mst, WeightedGraph};
use crate::instances::{erdos_renyi_instance, hard_instance, mi_weight, mutual_info_chain_instance, parity_even_prob};
use crate::mechanisms::{private_kruskal, private_mst_input_perturbation, MechanismId};
use crate::oracle::brute_force_mst;
use crate::oracle::stats::{ks_test, mean};
use crate::ppsacr::{matroid_private_max_weight_basis, GraphicMatroid};
use crate::privacy::{eps_from_rho_delta, per_round_epsilon, rho_from_eps_delta, PrivacyBudget};
use crate::randomness::{mix_seed, RngStream};

pub const CHECK_SEED: u64 = 0x5EED_D9A5;

pub const CHECK_IDS: std::ops::RangeInclusive<u8> = 1..=10;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AC{:<2} {} {} [{:.1}s] {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "equivalence of input perturbation, private Kruskal and one-pass",
        2 => "Kruskal agrees with brute force",
        3 => "accounting identities",
        4 => "exponential distribution facts",
        5 => "utility scaling n^1.5 log n",
        6 => "density sweep at desk scale",
        7 => "mutual-information instance",
        8 => "cycle-check instrumentation and running time",
        9 => "matroid specialisation reproduces input perturbation",
        10 => "hard-instance generator",
        _ => "unknown check",
    }
}

/// Runs check `id`; an error inside a check counts as a failure.
pub fn run_check(id: u8) -> CheckOutcome {
    let start = Instant::now();
    let verdict = match id {
        1 => ac1_equivalence(),
        2 => ac2_kruskal_oracle(),
        3 => ac3_accounting(),
        4 => ac4_distribution_facts(),
        5 => ac5_utility_scaling(),
        6 => ac6_density_sweep(),
        7 => ac7_mutual_information(),
        8 => ac8_instrumentation(),
        9 => ac9_matroid(),
        10 => ac10_hard_instance(),
        _ => Ok((false, format!("no check numbered {id}"))),
    };
    let (pass, detail) = verdict.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome {
        id,
        title: title(id),
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

type Verdict = Result<(bool, String)>;

fn triangle(w: [f64; 3]) -> WeightedGraph<f64> {
    build_graph(3, &[(1, 2), (2, 3), (1, 3)], &w).expect("triangle is valid")
}

fn ac1_equivalence() -> Verdict {
    const N: usize = 200_000;
    const ALPHA: f64 = 0.001;
    let k3 = equivalence_suite(EquivFamily::K3, 1.0, N, ALPHA, mix_seed(CHECK_SEED, 11))?;
    let k4 = equivalence_suite(EquivFamily::K4, 1.0, N, ALPHA, mix_seed(CHECK_SEED, 12))?;
    let mutant: [(&str, TreeSampler); 1] = [("mutant", mutant_private_kruskal)];
    let bad = equivalence_on_graph(&triangle([0.0, 2.0, 4.0]), "k3 w=[0,2,4]", 1.0, N, ALPHA, mix_seed(CHECK_SEED, 13), &mutant)?;
    let mutant_rejected = !bad.outcomes[0].result.pass;
    let fmt = |rep: &super::EquivalenceReport| {
        rep.outcomes
            .iter()
            .map(|o| format!("{}={:.1}{}", o.label, o.result.statistic, if o.result.pass { "" } else { "!" }))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let detail = format!(
        "k3 chi2 [{}] crit {:.1}; k4 chi2 [{}] crit {:.1}; mutant chi2 {:.0} ({})",
        fmt(&k3),
        k3.outcomes[0].result.critical,
        fmt(&k4),
        k4.outcomes[0].result.critical,
        bad.outcomes[0].result.statistic,
        if mutant_rejected { "rejected" } else { "NOT rejected" }
    );
    Ok((k3.all_pass() && k4.all_pass() && mutant_rejected, detail))
}

fn ac2_kruskal_oracle() -> Verdict {
    let mut r = RngStream::new(CHECK_SEED, 2);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = 2 + (r.uniform_open() * 5.0) as usize;
        let p = 0.3 + 0.7 * r.uniform_open();
        let g: WeightedGraph<f64> = erdos_renyi_instance(n, p, 0.0, 1.0, &mut r)?;
        let mut w = g.weights().to_vec();
        w.sort_by(f64::total_cmp);
        if w.windows(2).any(|x| x[0] == x[1]) {
            continue;
        }
        if kruskal_mst(&g, g.weights())? != brute_force_mst(&g)? {
            mismatches += 1;
        }
    }
    Ok((mismatches == 0, format!("{mismatches} mismatches over 1000 graphs")))
}

fn ac3_accounting() -> Verdict {
    let mut worst: f64 = 0.0;
    for eps in [0.1f64, 1.0, 10.0] {
        for delta in [1e-3, 1e-6, 1e-9] {
            let back = eps_from_rho_delta(rho_from_eps_delta(eps, delta)?, delta)?;
            worst = worst.max((back - eps).abs());
        }
    }
    let mut worst_rel: f64 = 0.0;
    for rho in [0.01, 0.25, 1.0, 4.0, 100.0] {
        for rounds in [1usize, 2, 10, 255, 999, 100_000] {
            let e = per_round_epsilon(rho, rounds)?;
            let back = rounds as f64 * e * e / 2.0;
            worst_rel = worst_rel.max((back - rho).abs() / rho);
            let bound = PrivacyBudget::from_rho(rho, 1e-6, 1.0)?.bind(rounds)?;
            let e2 = bound.eps_round()?;
            worst_rel = worst_rel.max((rounds as f64 * e2 * e2 / 2.0 - rho).abs() / rho);
        }
    }
    let pass = worst <= 1e-9 && worst_rel <= 1e-12;
    Ok((pass, format!("max round-trip |Δε| {worst:.2e} (≤1e-9); max rel |rounds·ε′²/2 − ρ| {worst_rel:.2e} (≤1e-12)")))
}

fn ac4_distribution_facts() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    let mut r = RngStream::new(CHECK_SEED, 41);
    let n = 100_000;
    let mut wins = 0usize;
    for _ in 0..n {
        let a: f64 = r.exponential(1.0)?;
        let b: f64 = r.exponential(3.0)?;
        wins += (a < b) as usize;
    }
    let freq = wins as f64 / n as f64;
    pass &= (freq - 0.25).abs() <= 0.015;
    notes.push(format!("min freq {freq:.4}"));

    let mut r = RngStream::new(CHECK_SEED, 42);
    let xs: Vec<f64> = (0..1_000_000).map(|_| r.exponential(1.0)).collect::<Result<_>>()?;
    let survive = |t: f64| xs.iter().filter(|&&x| x >= t).count() as f64;
    let mut worst: f64 = 0.0;
    for x in [0.5, 1.0, 2.0] {
        for y in [0.5, 1.0, 2.0] {
            let cond = survive(x + y) / survive(x);
            worst = worst.max((cond - (-y as f64).exp()).abs());
        }
    }
    pass &= worst <= 0.015;
    notes.push(format!("memoryless max dev {worst:.4}"));

    let mut r = RngStream::new(CHECK_SEED, 43);
    let scaled: Vec<f64> = (0..100_000).map(|_| r.exponential(1.0).map(|x: f64| x / 4.0)).collect::<Result<_>>()?;
    let ks = ks_test(&scaled, |x| 1.0 - (-4.0 * x).exp(), 0.01);
    pass &= ks.pass;
    notes.push(format!("scaling KS p {:.3}", ks.p_value));

    let mut r = RngStream::new(CHECK_SEED, 44);
    let gumbel: Vec<f64> = (0..100_000).map(|_| -r.ln_exponential::<f64>()).collect();
    let ks = ks_test(&gumbel, |z| (-(-z).exp()).exp(), 0.01);
    pass &= ks.pass;
    notes.push(format!("gumbel KS p {:.3}", ks.p_value));

    let mut r = RngStream::new(CHECK_SEED, 45);
    for m in [10usize, 100, 1000] {
        let maxes: Vec<f64> = (0..2000)
            .map(|_| (0..m).map(|_| r.ln_exponential::<f64>().abs()).fold(0.0, f64::max))
            .collect();
        let avg = mean(&maxes);
        let bound = (2.0 * std::f64::consts::E * m as f64).ln();
        pass &= avg <= bound;
        notes.push(format!("E max|lnExp| m={m}: {avg:.2} ≤ {bound:.2}"));
    }
    Ok((pass, notes.join("; ")))
}

fn complete_uniform(n: usize, seed: u64) -> Result<WeightedGraph<f64>> {
    erdos_renyi_instance(n, 1.0, 0.0, 100.0, &mut RngStream::new(seed, 0))?.with_delta_inf(0.1)
}

fn ac5_utility_scaling() -> Verdict {
    let budget = PrivacyBudget::from_rho(1.0, super::DEFAULT_DELTA, 0.1)?;
    let mut errs = Vec::new();
    for n in [64usize, 256] {
        let g = complete_uniform(n, mix_seed(CHECK_SEED, 50 + n as u64))?;
        let rep = run_trials(&g, MechanismId::Perturb, &budget, 50, mix_seed(CHECK_SEED, 51 + n as u64))?;
        errs.push(rep.aggregates.mean);
    }
    let ratio = errs[1] / errs[0];
    let predicted = 8.0 * 256f64.ln() / 64f64.ln();
    let pass = ratio >= predicted / 2.0 && ratio <= predicted * 2.0;
    Ok((
        pass,
        format!(
            "mean error n=64 {:.2}, n=256 {:.2}; ratio {ratio:.2} in [{:.2}, {:.2}]",
            errs[0],
            errs[1],
            predicted / 2.0,
            predicted * 2.0
        ),
    ))
}

fn ac6_density_sweep() -> Verdict {
    let densities = [0.1, 0.3, 0.5, 0.8, 1.0];
    let params = SweepParams::scaled(256, 50, mix_seed(CHECK_SEED, 6));
    let table = density_sweep(&densities, &params, RunOptions::default())?;
    let [perturb, pamst, sealfon] = SWEEP_MECHANISMS.map(|m| table.series(m));

    let sealfon_ratio: Vec<f64> = sealfon.iter().map(|p| p.ratio.median).collect();
    let a = sealfon_ratio.windows(2).all(|w| w[1] > w[0]);

    let b = perturb.iter().zip(&pamst).all(|(x, y)| {
        let (xa, ya) = (&x.report.aggregates, &y.report.aggregates);
        xa.q1 <= ya.q3 && ya.q1 <= xa.q3
    });

    let last = densities.len() - 1;
    let perturb_err = perturb[last].report.aggregates.median;
    let sealfon_err = sealfon[last].report.aggregates.median;
    let c = sealfon_err >= 2.0 * perturb_err;

    let iqr = |s: &[&super::SweepPoint]| {
        s.iter()
            .map(|p| format!("[{:.0},{:.0}]", p.report.aggregates.q1, p.report.aggregates.q3))
            .collect::<Vec<_>>()
            .join("")
    };
    let detail = format!(
        "(a) sealfon-gauss median ratio {} {}; (b) error IQR perturb {} pamst {} {}; (c) p=1 median error perturb {:.1} vs sealfon-gauss {:.1} {}",
        sealfon_ratio.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join("<"),
        if a { "ok" } else { "NOT increasing" },
        iqr(&perturb),
        iqr(&pamst),
        if b { "overlap" } else { "DISJOINT somewhere" },
        perturb_err,
        sealfon_err,
        if c { "ok" } else { "below 2x" },
    );
    Ok((a && b && c, detail))
}

fn ac7_mutual_information() -> Verdict {
    let mut pass = true;
    let values: Vec<f64> = (1..=3).map(|k| mi_weight(0.05, k)).collect::<Result<_>>()?;
    for (v, e) in values.iter().zip([0.7136, 0.5471, 0.4277]) {
        pass &= (v - e).abs() <= 5e-4;
    }
    let mut parity_worst: f64 = 0.0;
    for p in [0.0, 0.01, 0.05, 0.25, 0.5, 0.7, 1.0] {
        for k in 0..=10usize {
            let brute: f64 = (0..=k)
                .step_by(2)
                .map(|i| binom(k, i) * f64::powi(p, i as i32) * f64::powi(1.0 - p, (k - i) as i32))
                .sum();
            parity_worst = parity_worst.max((parity_even_prob(k, p)? - brute).abs());
        }
    }
    pass &= parity_worst <= 1e-12;
    let mut bad_chains = Vec::new();
    for n in 2..=50 {
        let g: WeightedGraph<f64> = mutual_info_chain_instance(n, 0.05, 10_000)?;
        let t = kruskal_mst(&g, g.weights())?;
        if !t.edge_ids().iter().all(|&e| {
            let (u, v) = g.endpoints(e);
            v == u + 1
        }) {
            bad_chains.push(n);
        }
    }
    pass &= bad_chains.is_empty();
    Ok((
        pass,
        format!(
            "mi(0.05,1..3) = {:.4}, {:.4}, {:.4}; parity max dev {parity_worst:.1e}; chain MST mismatches for n in {bad_chains:?}",
            values[0], values[1], values[2]
        ),
    ))
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn ac8_instrumentation() -> Verdict {
    let n = 512usize;
    let limit = 2 * (n as f64).log2().ceil() as u32 + 2;
    let budget = PrivacyBudget::from_rho(1.0, super::DEFAULT_DELTA, 1.0)?;
    let g = erdos_renyi_instance(n, 0.5, 0.0, 100.0, &mut RngStream::new(CHECK_SEED, 80))?;
    let mut worst = 0;
    let mut r = RngStream::new(CHECK_SEED, 81);
    for _ in 0..5 {
        worst = worst.max(private_kruskal(&g, &budget, &mut r)?.ops.max_edge_checks());
    }
    let checks_ok = worst <= limit;

    let all_pairs = (n * (n - 1) / 2) as f64;
    let mut times = Vec::new();
    let mut sizes = Vec::new();
    for (k, target) in [10_000usize, 40_000].into_iter().enumerate() {
        let g = erdos_renyi_instance(n, target as f64 / all_pairs, 0.0, 100.0, &mut RngStream::new(CHECK_SEED, 82 + k as u64))?;
        sizes.push(g.m());
        let mut r = RngStream::new(CHECK_SEED, 90 + k as u64);
        private_kruskal(&g, &budget, &mut r)?;
        let mut samples: Vec<f64> = (0..9)
            .map(|_| {
                let start = Instant::now();
                private_kruskal(&g, &budget, &mut r).map(|_| start.elapsed().as_secs_f64())
            })
            .collect::<Result<_>>()?;
        samples.sort_by(f64::total_cmp);
        times.push(samples[samples.len() / 2]);
    }
    let ratio = times[1] / times[0];
    let time_ok = ratio < 6.0;
    Ok((
        checks_ok && time_ok,
        format!(
            "max checks per edge {worst} ≤ {limit}; median time m={} {:.2}ms, m={} {:.2}ms, ratio {ratio:.2} < 6",
            sizes[0],
            times[0] * 1e3,
            sizes[1],
            times[1] * 1e3
        ),
    ))
}

fn ac9_matroid() -> Verdict {
    let mut r = RngStream::new(CHECK_SEED, 9);
    let mut mismatches = 0;
    let mut runs = 0;
    for graph in 0..20u64 {
        let n = 5 + (r.uniform_open() * 26.0) as usize;
        let g: WeightedGraph<f64> = erdos_renyi_instance(n, 0.4, 0.0, 100.0, &mut r)?;
        let budget = PrivacyBudget::from_rho(0.5, super::DEFAULT_DELTA, 1.0)?;
        let negated: Vec<f64> = g.weights().iter().map(|w| -w).collect();
        let matroid = GraphicMatroid::new(&g);
        for seed in 0..50u64 {
            let stream_seed = mix_seed(CHECK_SEED, graph);
            let alg1 = private_mst_input_perturbation(&g, &budget, &crate::graph::Kruskal, &mut RngStream::new(stream_seed, seed))?;
            let sel = matroid_private_max_weight_basis(&matroid, &negated, &budget, &mut RngStream::new(stream_seed, seed))?;
            let mut basis = sel.basis;
            basis.sort_unstable();
            runs += 1;
            if basis != alg1.tree.edge_ids() {
                mismatches += 1;
            }
        }
    }
    Ok((mismatches == 0, format!("{mismatches} mismatches in {runs} shared-noise runs on 20 graphs")))
}

fn ac10_hard_instance() -> Verdict {
    let (n, s) = (100usize, 10usize);
    let beta = 0.5 * (n as f64).ln();
    let g: WeightedGraph<f64> = hard_instance(n, beta, s, &mut RngStream::new(CHECK_SEED, 100))?;
    let w = g.weights();
    let m = w.len() as f64;
    let in_range = w.iter().all(|&x| (0.0..=s as f64).contains(&x));

    let sf = s as f64;
    let var = sf * 0.25 * (2.0 * beta + sf) / (2.0 * beta + 1.0);
    let avg = mean(w);
    let mean_ok = (avg - sf / 2.0).abs() <= 3.0 * (var / m).sqrt();

    // independent two-stage sampler built from rand_distr
    let threshold = 0.75 * sf;
    let frac = w.iter().filter(|&&x| x >= threshold).count() as f64 / m;
    let mut r = RngStream::new(CHECK_SEED, 101);
    let beta_dist = Beta::new(beta, beta).expect("valid shape");
    let mc_n = 1_000_000usize;
    let hits = (0..mc_n)
        .filter(|_| {
            let p = beta_dist.sample(&mut r);
            let k = Binomial::new(s as u64, p).expect("p in [0,1]").sample(&mut r);
            k as f64 >= threshold
        })
        .count();
    let q = hits as f64 / mc_n as f64;
    let sigma = (q * (1.0 - q) * (1.0 / m + 1.0 / mc_n as f64)).sqrt();
    let tail_ok = frac > 0.0 && (frac - q).abs() <= 3.0 * sigma;
    Ok((
        in_range && mean_ok && tail_ok,
        format!(
            "weights in [0,{s}]: {in_range}; mean {avg:.3} vs {:.1} ± {:.3}; P(w ≥ 7.5) instance {frac:.4} vs Monte-Carlo {q:.4} ± {:.4}",
            sf / 2.0,
            3.0 * (var / m).sqrt(),
            3.0 * sigma
        ),
    ))
}
