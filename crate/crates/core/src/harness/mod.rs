//! Trial runner, density sweep and distribution-equivalence suite.
//!
//! Trial `i` of a run with master seed `S` draws from `RngStream::new(S, i)`,
//! so records do not depend on how trials are scheduled across threads.

pub mod checks;
mod emit;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

pub use emit::{emit_csv, emit_sweep_csv, write_report_csv, write_sweep_csv, REPORT_HEADER};

use crate::error::{Error, Result};
use crate::graph::{build_graph, kruskal_mst, tree_weight, weight_under, SpanningTree, WeightedGraph};
use crate::instances::erdos_renyi_instance;
use crate::mechanisms::{
    one_pass_private_kruskal, private_kruskal, private_mst_input_perturbation, run_mechanism, MechanismId,
};
use crate::oracle::stats::{chi_square_gof, mean_ci95, median, quantile_sorted, std_dev, ChiSquareResult};
use crate::oracle::{exact_private_mst_distribution, tally};
use crate::ppsacr::{ppsacr_run_log, CycleRemoval};
use crate::privacy::PrivacyBudget;
use crate::randomness::{mix_seed, RngStream};

type Graph = WeightedGraph<f64>;
type Budget = PrivacyBudget<f64>;

/// δ used when a budget is given only through ε′ or ρ.
pub const DEFAULT_DELTA: f64 = 1e-6;

/// Run parameters repeated on every CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mechanism: MechanismId,
    pub n: usize,
    pub m: usize,
    /// Edge density `m / C(n, 2)`, or the generator's `p` in a sweep.
    pub p: f64,
    pub eps: f64,
    pub delta: f64,
    pub rho: f64,
    pub eps_prime: f64,
    pub delta_inf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub true_weight: f64,
    pub private_weight: f64,
    pub error: f64,
    pub runtime_ns: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub ci95: (f64, f64),
    pub q1: f64,
    pub q3: f64,
}

impl Aggregates {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            mean: crate::oracle::stats::mean(values),
            median: median(values),
            std: std_dev(values),
            ci95: mean_ci95(values),
            q1: quantile_sorted(&sorted, 0.25),
            q3: quantile_sorted(&sorted, 0.75),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: RunConfig,
    pub records: Vec<TrialRecord>,
    /// Aggregates of the per-trial `error` column.
    pub aggregates: Aggregates,
}

impl RunReport {
    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error).collect()
    }

    /// `private_weight / true_weight` per trial.
    pub fn ratios(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.private_weight / r.true_weight).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub parallel: bool,
    /// Record wall time per trial; when false `runtime_ns` is 0 so output is
    /// byte-reproducible.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            parallel: true,
            timing: true,
        }
    }
}

fn density(n: usize, m: usize) -> f64 {
    if n < 2 {
        1.0
    } else {
        m as f64 / (n * (n - 1) / 2) as f64
    }
}

/// Runs `trials` independent invocations of `mechanism` on `g`.
pub fn run_trials(g: &Graph, mechanism: MechanismId, budget: &Budget, trials: usize, master_seed: u64) -> Result<RunReport> {
    run_trials_with(g, mechanism, budget, trials, master_seed, RunOptions::default())
}

pub fn run_trials_serial(
    g: &Graph,
    mechanism: MechanismId,
    budget: &Budget,
    trials: usize,
    master_seed: u64,
) -> Result<RunReport> {
    let opts = RunOptions {
        parallel: false,
        ..RunOptions::default()
    };
    run_trials_with(g, mechanism, budget, trials, master_seed, opts)
}

pub fn run_trials_with(
    g: &Graph,
    mechanism: MechanismId,
    budget: &Budget,
    trials: usize,
    master_seed: u64,
    opts: RunOptions,
) -> Result<RunReport> {
    if trials == 0 {
        return Err(Error::domain("trials", 0.0, ">= 1"));
    }
    let optimum = kruskal_mst(g, g.weights())?;
    let true_weight = tree_weight(g, &optimum)?;
    let tolerance = 1e-9 * true_weight.abs().max(1.0);
    let one = |i: usize| -> Result<TrialRecord> {
        let mut rng = RngStream::new(master_seed, i as u64);
        let start = Instant::now();
        let res = run_mechanism(mechanism, g, budget, &mut rng)?;
        let runtime_ns = if opts.timing { start.elapsed().as_nanos() as u64 } else { 0 };
        if let Some(noisy) = &res.noisy_weights {
            // the returned tree is optimal for the noisy weights, in particular
            // no worse than the true optimum
            let ours = weight_under(&noisy.values, &res.tree)?;
            let theirs = weight_under(&noisy.values, &optimum)?;
            if ours > theirs + 1e-9 * theirs.abs().max(1.0) {
                return Err(Error::OracleInconsistent("noisy weight of the output exceeds that of the true MST"));
            }
        }
        let private_weight = tree_weight(g, &res.tree)?;
        let error = private_weight - true_weight;
        if error < -tolerance {
            return Err(Error::OracleInconsistent("private tree lighter than the minimum spanning tree"));
        }
        Ok(TrialRecord {
            trial: i as u64,
            seed: master_seed,
            true_weight,
            private_weight,
            error,
            runtime_ns,
        })
    };
    let records: Vec<TrialRecord> = if opts.parallel {
        (0..trials).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..trials).map(one).collect::<Result<_>>()?
    };
    let eps_prime = if g.n() > 1 { budget.eps_prime_for(g.n() - 1)? } else { f64::INFINITY };
    let config = RunConfig {
        mechanism,
        n: g.n(),
        m: g.m(),
        p: density(g.n(), g.m()),
        eps: budget.epsilon(),
        delta: budget.delta(),
        rho: budget.rho(),
        eps_prime,
        delta_inf: budget.delta_inf(),
    };
    let aggregates = Aggregates::of(&records.iter().map(|r| r.error).collect::<Vec<_>>());
    Ok(RunReport {
        config,
        records,
        aggregates,
    })
}

/// Mechanisms compared in the density sweep.
pub const SWEEP_MECHANISMS: [MechanismId; 3] = [MechanismId::Perturb, MechanismId::Pamst, MechanismId::SealfonGauss];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub report: RunReport,
    /// Aggregates of `private / true` weight.
    pub ratio: Aggregates,
}

impl SweepPoint {
    pub fn mechanism(&self) -> MechanismId {
        self.report.config.mechanism
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    /// Ordered by density, then by [`SWEEP_MECHANISMS`] order.
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn point(&self, p: f64, mechanism: MechanismId) -> Option<&SweepPoint> {
        self.points.iter().find(|x| x.p == p && x.mechanism() == mechanism)
    }

    pub fn series(&self, mechanism: MechanismId) -> Vec<&SweepPoint> {
        self.points.iter().filter(|x| x.mechanism() == mechanism).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub n: usize,
    pub rho: f64,
    pub delta: f64,
    pub delta_inf: f64,
    pub wmin: f64,
    pub wmax: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SweepParams {
    /// Density-sweep defaults at size `n`: U(0, 100) weights, ρ = 1, Δ∞ = 0.1.
    pub fn scaled(n: usize, trials: usize, seed: u64) -> Self {
        Self {
            n,
            rho: 1.0,
            delta: DEFAULT_DELTA,
            delta_inf: 0.1,
            wmin: 0.0,
            wmax: 100.0,
            trials,
            seed,
        }
    }
}

/// For each density, one G(n, p) instance shared by all sweep mechanisms.
pub fn density_sweep(densities: &[f64], params: &SweepParams, opts: RunOptions) -> Result<SweepTable> {
    let budget = PrivacyBudget::from_rho(params.rho, params.delta, params.delta_inf)?;
    let mut points = Vec::with_capacity(densities.len() * SWEEP_MECHANISMS.len());
    for (j, &p) in densities.iter().enumerate() {
        let mut gen_rng = RngStream::new(mix_seed(params.seed, j as u64), 0);
        let g = erdos_renyi_instance(params.n, p, params.wmin, params.wmax, &mut gen_rng)?
            .with_delta_inf(params.delta_inf)?;
        for (k, &mech) in SWEEP_MECHANISMS.iter().enumerate() {
            let trial_seed = mix_seed(params.seed, ((j as u64) << 8) | (k as u64 + 1));
            let mut report = run_trials_with(&g, mech, &budget, params.trials, trial_seed, opts)?;
            report.config.p = p;
            let ratio = Aggregates::of(&report.ratios());
            points.push(SweepPoint { p, report, ratio });
        }
    }
    Ok(SweepTable { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivFamily {
    /// Triangle with weights 1, 2, 3.
    K3,
    /// K4 with all weights equal.
    K4,
}

impl EquivFamily {
    pub fn graph(self) -> Graph {
        match self {
            EquivFamily::K3 => build_graph(3, &[(1, 2), (2, 3), (1, 3)], &[1.0, 2.0, 3.0]),
            EquivFamily::K4 => build_graph(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)], &[1.0; 6]),
        }
        .expect("fixed family graphs are valid")
    }
}

impl fmt::Display for EquivFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquivFamily::K3 => "k3",
            EquivFamily::K4 => "k4",
        })
    }
}

impl FromStr for EquivFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k3" => Ok(EquivFamily::K3),
            "k4" => Ok(EquivFamily::K4),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

/// A tree sampler under test.
pub type TreeSampler = fn(&Graph, &Budget, &mut RngStream) -> Result<SpanningTree>;

fn alg1(g: &Graph, b: &Budget, r: &mut RngStream) -> Result<SpanningTree> {
    Ok(private_mst_input_perturbation(g, b, &crate::graph::Kruskal, r)?.tree)
}

fn alg2(g: &Graph, b: &Budget, r: &mut RngStream) -> Result<SpanningTree> {
    Ok(private_kruskal(g, b, r)?.tree)
}

fn alg3(g: &Graph, b: &Budget, r: &mut RngStream) -> Result<SpanningTree> {
    Ok(one_pass_private_kruskal(g, b, r)?.tree)
}

/// The three samplers that must share one output distribution.
pub const EQUIVALENT_SAMPLERS: [(MechanismId, TreeSampler); 3] = [
    (MechanismId::Perturb, alg1),
    (MechanismId::Kruskal, alg2),
    (MechanismId::OnePass, alg3),
];

/// A deliberately wrong private Kruskal that samples ∝ `exp(−ε′ w / Δ∞)`,
/// twice the correct exponent. The equivalence suite must reject it.
pub fn mutant_private_kruskal(g: &Graph, budget: &Budget, rng: &mut RngStream) -> Result<SpanningTree> {
    let eps_prime = budget.eps_prime_for(g.n() - 1)?;
    let w_min = g.min_weight().unwrap_or(0.0);
    let log_s: Vec<f64> = g
        .weights()
        .iter()
        .map(|&w| -eps_prime * (w - w_min) / budget.delta_inf())
        .collect();
    let picked = ppsacr_run_log(&log_s, g.n() - 1, CycleRemoval::new(g), rng)?;
    SpanningTree::new(g, picked)
}

/// Tallies the sorted edge sets of `trials` runs of `sampler`, trial `i`
/// using stream `(seed, i)`.
pub fn tally_trees(
    g: &Graph,
    budget: &Budget,
    trials: usize,
    seed: u64,
    sampler: TreeSampler,
) -> Result<BTreeMap<Vec<usize>, u64>> {
    let trees: Vec<Vec<usize>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| sampler(g, budget, &mut RngStream::new(seed, i)).map(|t| t.edge_ids().to_vec()))
        .collect::<Result<_>>()?;
    Ok(tally(trees))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceOutcome {
    pub label: String,
    pub result: ChiSquareResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub graph: String,
    pub eps_prime: f64,
    pub trials: usize,
    pub alpha: f64,
    pub outcomes: Vec<EquivalenceOutcome>,
}

impl EquivalenceReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.result.pass)
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} eps_prime={} trials={} alpha={}",
            self.graph, self.eps_prime, self.trials, self.alpha
        )?;
        for o in &self.outcomes {
            writeln!(
                f,
                "  {:<10} {}  chi2={:.3} dof={} critical={:.3} p={:.4}",
                o.label,
                if o.result.pass { "PASS" } else { "FAIL" },
                o.result.statistic,
                o.result.dof,
                o.result.critical,
                o.result.p_value
            )?;
        }
        Ok(())
    }
}

/// Chi-squares each sampler's tree tally on `g` against the exact
/// distribution. Δ∞ is taken from `g`.
pub fn equivalence_on_graph(
    g: &Graph,
    label: &str,
    eps_prime: f64,
    trials: usize,
    alpha: f64,
    seed: u64,
    samplers: &[(&str, TreeSampler)],
) -> Result<EquivalenceReport> {
    let exact = exact_private_mst_distribution(g, eps_prime, g.delta_inf())?;
    let budget = PrivacyBudget::from_eps_prime(eps_prime, g.n() - 1, DEFAULT_DELTA, g.delta_inf())?;
    let outcomes = samplers
        .iter()
        .enumerate()
        .map(|(k, &(name, sampler))| {
            let counts = tally_trees(g, &budget, trials, mix_seed(seed, k as u64), sampler)?;
            Ok(EquivalenceOutcome {
                label: name.to_string(),
                result: chi_square_gof(&counts, &exact, alpha)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EquivalenceReport {
        graph: label.to_string(),
        eps_prime,
        trials,
        alpha,
        outcomes,
    })
}

/// Runs the input-perturbation, private-Kruskal and one-pass samplers on a
/// fixed family graph.
pub fn equivalence_suite(family: EquivFamily, eps_prime: f64, trials: usize, alpha: f64, seed: u64) -> Result<EquivalenceReport> {
    let samplers: Vec<(&str, TreeSampler)> = EQUIVALENT_SAMPLERS.iter().map(|&(id, s)| (id.name(), s)).collect();
    equivalence_on_graph(&family.graph(), &family.to_string(), eps_prime, trials, alpha, seed, &samplers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k5() -> Graph {
        let mut edges = Vec::new();
        for u in 1..=5 {
            for v in u + 1..=5 {
                edges.push((u, v));
            }
        }
        let w: Vec<f64> = (0..10).map(|i| ((i * 13) % 7) as f64 * 10.0).collect();
        build_graph(5, &edges, &w).unwrap()
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let g = k5();
        let budget = PrivacyBudget::from_rho(1.0, 1e-6, 1.0).unwrap();
        for id in MechanismId::ALL {
            let opts = RunOptions { parallel: true, timing: false };
            let a = run_trials_with(&g, id, &budget, 64, 7, opts).unwrap();
            let b = run_trials_with(&g, id, &budget, 64, 7, RunOptions { parallel: false, timing: false }).unwrap();
            assert_eq!(a, b, "{id}");
            let single = run_trials_with(&g, id, &budget, 1, 3, opts).unwrap();
            assert_eq!(single, run_trials_with(&g, id, &budget, 1, 3, opts).unwrap());
        }
    }

    #[test]
    fn aggregates_are_recomputable() {
        let g = k5();
        let budget = PrivacyBudget::from_rho(0.5, 1e-6, 1.0).unwrap();
        let rep = run_trials(&g, MechanismId::Kruskal, &budget, 40, 1).unwrap();
        let errs = rep.errors();
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        assert!((rep.aggregates.mean - mean).abs() < 1e-12);
        assert_eq!(rep.aggregates, Aggregates::of(&errs));
        assert!(rep.records.iter().all(|r| r.error >= -1e-9));
        assert!(run_trials(&g, MechanismId::Kruskal, &budget, 0, 1).is_err());
    }

    #[test]
    fn huge_eps_has_no_error() {
        let g = k5();
        let budget = PrivacyBudget::from_eps_prime(1e9, 4, 1e-6, 1.0).unwrap();
        for id in [MechanismId::Perturb, MechanismId::Kruskal, MechanismId::OnePass, MechanismId::Pamst] {
            let rep = run_trials(&g, id, &budget, 50, 2).unwrap();
            assert!(rep.aggregates.mean < 1e-6, "{id}");
        }
    }

    #[test]
    fn sweep_shape() {
        let params = SweepParams::scaled(12, 5, 9);
        let table = density_sweep(&[0.5, 1.0], &params, RunOptions::default()).unwrap();
        assert_eq!(table.points.len(), 6);
        assert_eq!(table.series(MechanismId::Pamst).len(), 2);
        assert!(table.point(1.0, MechanismId::SealfonGauss).is_some());
    }

    #[test]
    fn families_parse() {
        assert_eq!("K3".parse::<EquivFamily>().unwrap(), EquivFamily::K3);
        assert!(matches!("k5".parse::<EquivFamily>(), Err(Error::UnknownFamily(_))));
        assert_eq!(EquivFamily::K4.graph().m(), 6);
    }

    #[test]
    fn small_equivalence_run() {
        let rep = equivalence_suite(EquivFamily::K3, 1.0, 20_000, 0.001, 5).unwrap();
        assert_eq!(rep.outcomes.len(), 3);
        assert!(rep.all_pass(), "{rep}");
    }
}
