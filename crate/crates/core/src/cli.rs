//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 request too large for exact search,
//! 64 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{self, table1, table2};
use crate::market_model::{self, MarketModel, PaceConfig, Patience};
use crate::optimizer;
use crate::policy::CyclicPolicy;
use crate::simulator::{simulate, SimConfig};
use crate::weakly_coupled::{build_coupled_fn, build_coupled_fn_strategic, PurchaseRule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "cyclic-pricing", version, about = "Optimal cyclic pricing under Markov-modulated valuations")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CYCLIC_PRICING_JOBS")]
    pub jobs: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal M-simple cyclic sigma-policy of a model.
    Optimize(OptimizeArgs),
    /// Monte Carlo estimate of a committed policy's revenue.
    Simulate(SimulateArgs),
    /// Rebuild one of the worked examples, tables or findings.
    Reproduce(ReproduceArgs),
    /// Block revenue table f(w, w') as CSV.
    DumpF(DumpArgs),
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub sigma: usize,
    /// Maximize discounted revenue with rate R over pre-cyclic policies instead.
    #[arg(long, value_name = "R")]
    pub discounted: Option<f64>,
    /// Longest prefix + cycle (in blocks) for the discounted search.
    #[arg(long, default_value_t = 4)]
    pub length_bound: usize,
    /// Truncation level for unbounded-patience models.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Patient,
    #[value(name = "strategic-3")]
    Strategic3,
    #[value(name = "strategic-4")]
    Strategic4,
}

impl From<RuleArg> for PurchaseRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Patient => PurchaseRule::Patient,
            RuleArg::Strategic3 => PurchaseRule::MyopicForecast,
            RuleArg::Strategic4 => PurchaseRule::ExpectedMax,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// JSON `{"phases": [[price, duration], ..]}`.
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long, value_enum, default_value = "patient")]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 100_000)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub replications: usize,
    /// Defaults to max(10 cycle lengths, 10 tau), capped at half the horizon.
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[command(subcommand)]
    pub what: Reproduction,
}

#[derive(Debug, Subcommand)]
pub enum Reproduction {
    /// Random instances, M = 1 (CSV).
    Table1 {
        #[arg(long, default_value_t = 500)]
        draws: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Unbounded patience, varying truncation level (CSV).
    Table2 {
        #[arg(long, default_value_t = table2::TABLE2_NU)]
        nu: f64,
    },
    /// Increasing optimal cycle of length K - 1 (JSON).
    Example2 {
        #[arg(long = "K", short = 'K', default_value_t = 5)]
        k: usize,
    },
    /// Cost of ignoring valuation changes (JSON).
    Finding5,
    /// Three-price optimum with M = 3 (JSON).
    Finding6,
    /// Two-price reset analysis of a K = 2 unbounded model (JSON).
    TwoPrice {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        t_max: usize,
    },
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub sigma: usize,
    #[arg(long, value_enum, default_value = "patient")]
    pub rule: RuleArg,
}

fn read_model(path: &Path) -> Result<MarketModel> {
    let s = fs::read_to_string(path)?;
    let m = MarketModel::from_json(&s)?;
    market_model::validate(&m).into_result()?;
    Ok(m)
}

fn bounded(model: MarketModel, epsilon: Option<f64>) -> Result<MarketModel> {
    match (model.tau, epsilon) {
        (Patience::Bounded(_), _) => Ok(model),
        (Patience::Unbounded, Some(eps)) => Ok(market_model::truncate_to_bp(&model, eps)?.0),
        (Patience::Unbounded, None) => Err(Error::validation("unbounded patience: pass --epsilon to truncate")),
    }
}

fn json<T: Serialize>(x: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(x)?;
    s.push(b'\n');
    Ok(s)
}

#[derive(Serialize)]
struct Discounted {
    rate: f64,
    prefix: Vec<Vec<usize>>,
    cycle: Vec<Vec<usize>>,
    value: f64,
}

fn policy_label(p: &CyclicPolicy) -> String {
    let parts: Vec<String> = p.phases.iter().map(|(k, t)| format!("{k}:{t}")).collect();
    format!("({})", parts.join(" "))
}

fn execute(cmd: &Command) -> Result<Vec<u8>> {
    match cmd {
        Command::Optimize(a) => {
            let m = bounded(read_model(&a.model)?, a.epsilon)?;
            let pace = PaceConfig::for_model(&m, a.sigma)?;
            match a.discounted {
                None => json(&optimizer::optimize(&m, &pace)?),
                Some(r) => {
                    let f = build_coupled_fn(&m, &pace)?;
                    let p = optimizer::discounted_optimize(&f, r, a.length_bound)?;
                    let prices = |ws: &[usize]| ws.iter().map(|&w| f.block(w).prices).collect();
                    json(&Discounted {
                        rate: r,
                        prefix: prices(&p.w0),
                        cycle: prices(&p.w1),
                        value: p.value,
                    })
                }
            }
        }
        Command::Simulate(a) => {
            let m = read_model(&a.model)?;
            let policy: CyclicPolicy = serde_json::from_str(&fs::read_to_string(&a.policy)?)?;
            policy.check(m.k())?;
            let mut cfg = SimConfig::new(&m, &policy, a.horizon, a.replications, a.seed).with_rule(a.rule.into());
            if let Some(b) = a.burn_in {
                cfg.burn_in = b;
            }
            let e = simulate(&m, &policy, &cfg)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let rec = [
                policy_label(&policy),
                format!("{:.10}", e.mean),
                format!("{:.10}", e.std_error),
                e.horizon.to_string(),
                e.replications.to_string(),
                a.seed.to_string(),
            ];
            w.write_record(["policy", "mean", "std_error", "horizon", "replications", "seed"])
                .and_then(|_| w.write_record(&rec))
                .map_err(table1::csv_err)?;
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        Command::Reproduce(r) => match &r.what {
            Reproduction::Table1 { draws, seed } => {
                let rows = table1::table1_grid()
                    .into_iter()
                    .map(|c| table1::table1_run(c, 4, *draws, *seed))
                    .collect::<Result<Vec<_>>>()?;
                let mut out = Vec::new();
                table1::write_csv(&rows, &mut out)?;
                Ok(out)
            }
            Reproduction::Table2 { nu } => {
                let rows = table2::table2_run(&table2::TABLE2_EPSILONS, &table2::table2_model(), Some(*nu))?;
                let mut out = Vec::new();
                table2::write_csv(&rows, &mut out)?;
                Ok(out)
            }
            Reproduction::Example2 { k } => {
                let inst = experiments::example2_build(*k)?;
                #[derive(Serialize)]
                struct Report {
                    instance: experiments::Example2Instance,
                    claim: Option<experiments::Example2Claim>,
                }
                let claim = if (5..=6).contains(k) {
                    Some(experiments::example2_verify_claim(*k)?)
                } else {
                    None
                };
                json(&Report { instance: inst, claim })
            }
            Reproduction::Finding5 => json(&experiments::finding5_run()?),
            Reproduction::Finding6 => json(&experiments::finding6_run()?),
            Reproduction::TwoPrice { model, t_max } => {
                let m = read_model(model)?;
                let ts: Vec<usize> = (0..=8).collect();
                json(&experiments::two_price_analyze(&m, *t_max, &ts)?)
            }
        },
        Command::DumpF(a) => {
            let m = read_model(&a.model)?;
            let pace = PaceConfig::for_model(&m, a.sigma)?;
            let f = match PurchaseRule::from(a.rule) {
                PurchaseRule::Patient => build_coupled_fn(&m, &pace)?,
                rule => build_coupled_fn_strategic(&m, &pace, rule)?,
            };
            let mut out = Vec::new();
            f.write_csv(&mut out)?;
            Ok(out)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_INVALID,
    }
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let res = pool.install(|| execute(&cli.command)).and_then(|bytes| match &cli.out {
        Some(p) => Ok(fs::write(p, bytes)?),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(&bytes)?;
            Ok(o.flush()?)
        }
    });
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
