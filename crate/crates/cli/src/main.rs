use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dpmst::harness::checks::{run_check, CHECK_IDS};
use dpmst::harness::{
    density_sweep, emit_csv, emit_sweep_csv, equivalence_suite, run_trials_with, EquivFamily, RunOptions,
    SweepParams, DEFAULT_DELTA, SWEEP_MECHANISMS,
};
use dpmst::instances::{read_instance, write_instance, InstanceModel, InstanceSpec};
use dpmst::privacy::PrivacyBudget;
use dpmst::{Error, Graph, MechanismId};

const EXIT_USAGE: u8 = 1;
const EXIT_STATISTICAL: u8 = 2;
const EXIT_IO: u8 = 3;

/// Differentially private minimum spanning trees under edge-weight privacy.
#[derive(Debug, Parser)]
#[command(name = "dpmst", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    Er,
    MiChain,
    Hard,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a graph instance and write it as an edge list.
    Gen {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: usize,
        /// Edge probability (er).
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        wmin: f64,
        #[arg(long, default_value_t = 100.0)]
        wmax: f64,
        /// Per-edge flip probability (mi-chain).
        #[arg(long, default_value_t = 0.05)]
        flip_p: f64,
        /// Dataset size d; sets Δ∞ = log2(d)/d (mi-chain).
        #[arg(long, default_value_t = 10_000)]
        dataset_size: usize,
        /// Beta shape; defaults to ln(n)/2 (hard).
        #[arg(long)]
        beta: Option<f64>,
        /// Binomial trials per edge (hard).
        #[arg(long, default_value_t = 10)]
        s: usize,
        /// Sensitivity stored with er and hard instances.
        #[arg(long, default_value_t = 1.0)]
        delta_inf: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one mechanism repeatedly on an instance file and write per-trial CSV.
    Run {
        #[arg(long)]
        graph: PathBuf,
        /// perturb, kruskal, onepass, pamst, sealfon-laplace or sealfon-gauss.
        #[arg(long)]
        mech: MechanismId,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 50, conflicts_with = "ten_run")]
        trials: usize,
        /// Ten trials instead of the default fifty.
        #[arg(long)]
        ten_run: bool,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write runtime_ns = 0 so the CSV is byte-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Error of perturb, pamst and sealfon-gauss on G(n, p) across densities.
    SweepDensity {
        #[arg(long)]
        n: usize,
        /// Comma-separated edge probabilities.
        #[arg(long, value_delimiter = ',', required = true)]
        densities: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        delta_inf: f64,
        #[arg(long, default_value_t = 50, conflicts_with = "ten_run")]
        trials: usize,
        #[arg(long)]
        ten_run: bool,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_timing: bool,
    },
    /// Chi-square perturb, kruskal and onepass against the exact tree distribution.
    CheckEquiv {
        #[arg(long)]
        family: EquivFamily,
        #[arg(long)]
        eps_prime: f64,
        #[arg(long, default_value_t = 200_000)]
        trials: usize,
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the acceptance checks.
    Selftest {
        /// Comma-separated check numbers; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

enum Failure {
    Usage(String),
    Statistical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Csv(_) | Error::Parse { .. } => Failure::Io(e.to_string()),
            Error::OracleInconsistent(_) => Failure::Statistical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn options(no_timing: bool) -> RunOptions {
    RunOptions {
        timing: !no_timing,
        ..RunOptions::default()
    }
}

fn trial_count(trials: usize, ten_run: bool) -> usize {
    if ten_run {
        10
    } else {
        trials
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen {
            model,
            n,
            p,
            wmin,
            wmax,
            flip_p,
            dataset_size,
            beta,
            s,
            delta_inf,
            seed,
            out,
        } => {
            let model = match model {
                Model::Er => InstanceModel::ErdosRenyi { n, p, wmin, wmax },
                Model::MiChain => InstanceModel::MiChain {
                    n,
                    flip_p,
                    dataset_size,
                },
                Model::Hard => InstanceModel::Hard {
                    n,
                    beta: beta.unwrap_or(0.5 * (n as f64).ln()),
                    s,
                },
            };
            let mi = matches!(model, InstanceModel::MiChain { .. });
            let mut g: Graph = InstanceSpec { model, seed }.generate()?;
            if !mi {
                g = g.with_delta_inf(delta_inf)?;
            }
            write_instance(&g, &out)?;
            println!("wrote {} (n={}, m={}, delta_inf={})", out.display(), g.n(), g.m(), g.delta_inf());
        }
        Command::Run {
            graph,
            mech,
            eps,
            delta,
            trials,
            ten_run,
            seed,
            out,
            no_timing,
        } => {
            let g: Graph = read_instance(&graph)?;
            let budget = PrivacyBudget::new(eps, delta, g.delta_inf())?;
            let report = run_trials_with(&g, mech, &budget, trial_count(trials, ten_run), seed, options(no_timing))?;
            emit_csv(&report, &out)?;
            let a = &report.aggregates;
            println!(
                "{mech}: n={} m={} trials={} error mean={:.6} median={:.6} iqr=[{:.6}, {:.6}] ci95=[{:.6}, {:.6}]",
                g.n(),
                g.m(),
                report.records.len(),
                a.mean,
                a.median,
                a.q1,
                a.q3,
                a.ci95.0,
                a.ci95.1
            );
        }
        Command::SweepDensity {
            n,
            densities,
            rho,
            delta,
            delta_inf,
            trials,
            ten_run,
            seed,
            out,
            no_timing,
        } => {
            let params = SweepParams {
                rho,
                delta,
                delta_inf,
                ..SweepParams::scaled(n, trial_count(trials, ten_run), seed)
            };
            let table = density_sweep(&densities, &params, options(no_timing))?;
            emit_sweep_csv(&table, &out)?;
            println!("{:>6} {}", "p", SWEEP_MECHANISMS.map(|m| format!("{:>14}", m.name())).join(""));
            for &p in &densities {
                let cells: Vec<String> = SWEEP_MECHANISMS
                    .iter()
                    .map(|&m| table.point(p, m).map_or(String::new(), |x| format!("{:>14.4}", x.ratio.median)))
                    .collect();
                println!("{p:>6} {}", cells.join(""));
            }
            println!("median private/true weight ratio; per-trial rows in {}", out.display());
        }
        Command::CheckEquiv {
            family,
            eps_prime,
            trials,
            alpha,
            seed,
        } => {
            let report = equivalence_suite(family, eps_prime, trials, alpha, seed)?;
            print!("{report}");
            if !report.all_pass() {
                return Err(Failure::Statistical("at least one sampler failed the chi-square test".into()));
            }
        }
        Command::Selftest { only } => {
            if let Some(bad) = only.iter().find(|id| !CHECK_IDS.contains(id)) {
                return Err(Failure::Usage(format!("no check numbered {bad}")));
            }
            let mut failed = Vec::new();
            for id in CHECK_IDS.filter(|id| only.is_empty() || only.contains(id)) {
                let outcome = run_check(id);
                println!("{outcome}");
                if !outcome.pass {
                    failed.push(id);
                }
            }
            if !failed.is_empty() {
                return Err(Failure::Statistical(format!("failed checks: {failed:?}")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Statistical(msg)) => {
            eprintln!("failure: {msg}");
            ExitCode::from(EXIT_STATISTICAL)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
