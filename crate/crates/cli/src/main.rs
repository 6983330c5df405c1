mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use broadbid::baselines::generate::{self as gen, parse_edge_list};
use broadbid::baselines::{
    brute_force_query, max_margin_greedy, max_rate_greedy, OracleError, Rate,
};
use broadbid::experiment::{run_simulation, ExactMethod, ExperimentError};
use broadbid::keyword_solver::{
    round_bid, rounding_experiment, solve_keyword_exact, solve_relaxation, ExactOptions,
    KeywordError,
};
use broadbid::model::{bid_from_winning_set, interpret_bid, Instance, Language, Money};
use broadbid::query_solver::{
    plan_two_campaigns, solve_budgeted_lagrangian, solve_budgeted_lp, solve_query_lp,
    solve_query_mincut, OptimalBidResult, SolveError,
};
use broadbid::{rng, DependencyGraph};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use report::{query_rows, to_csv, won_flag, InstanceSummary, MethodRow, RunReport, VERSIONS};

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\nsolver ",
    env!("CARGO_PKG_VERSION"),
    "\ninstance format 1\nreport format 1"
);

#[derive(Parser)]
#[command(name = "broadbid", version, long_version = LONG_VERSION)]
#[command(about = "Profit-maximizing broad-match bids for sponsored search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance with one method and write a report.
    Solve(SolveArgs),
    /// Write a generated instance document.
    Generate(GenerateArgs),
    /// Run an experiment harness.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCommand,
    },
    /// Budgeted LP, two-campaign plan and its simulated value.
    Plan(PlanArgs),
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Exact plus broad versus broad-only on keyword-pair instances.
    Sim(SimArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Mincut,
    Lp,
    Budgeted,
    Lagrangian,
    KeywordLpRound,
    KeywordExact,
    GreedyMargin,
    GreedyRate,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum RateArg {
    ProfitOverCost,
    ValueOverCost,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    method: SolveMethod,
    /// Overrides the instance budget (budgeted and lagrangian).
    #[arg(long)]
    budget: Option<Money>,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "profit-over-cost")]
    rate: RateArg,
    /// Only broad bids for keyword-exact and keyword-lp-round.
    #[arg(long)]
    broad_only: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    GreedyTrap,
    IntegralityGap,
    IndependentSet,
    MaxCoverage,
    Simulation,
    RandomQuery,
    RandomBudgeted,
    RandomKeyword,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Keywords in greedy-trap.
    #[arg(long)]
    n: Option<usize>,
    /// Left queries in integrality-gap, chosen sets in max-coverage.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 3)]
    n_chain: usize,
    #[arg(long, default_value = "100000")]
    c: Money,
    #[arg(long, default_value = "1000")]
    c_prime: Money,
    #[arg(long, default_value = "100000")]
    m: Money,
    /// Edge list for independent-set: one `u v` pair per line.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Max-coverage sets as element indices, e.g. `0,1;1,2`.
    #[arg(long)]
    sets: Option<String>,
    /// Max-coverage element weights, e.g. `1,2,0.5`.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    keywords: Option<usize>,
    /// Query count for random-query and random-budgeted.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the generated budget.
    #[arg(long)]
    budget: Option<Money>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExactArg {
    Brute,
    Bb,
    #[value(alias = "closed-form")]
    Bounds,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 12)]
    keywords: usize,
    #[arg(long, default_value_t = 15)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "bb")]
    exact_method: ExactArg,
    /// Fall back to LP bounds when the keyword count is too large to solve exactly.
    #[arg(long)]
    bounds_ok: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    budget: Option<Money>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn solver(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: error.into(),
    }
}

fn size_limit(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 4,
        error: error.into(),
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::MissingBudget => usage(e),
            _ => solver(e),
        }
    }
}

impl From<KeywordError> for Failure {
    fn from(e: KeywordError) -> Self {
        match e {
            KeywordError::NodeLimit(_) => size_limit(e),
            KeywordError::InvalidEpsilon(_) => usage(e),
            _ => solver(e),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } | OracleError::NodeLimit(_) => size_limit(e),
            OracleError::MissingBudget => usage(e),
            OracleError::Solve(e) => e.into(),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::SizeLimit { .. } => size_limit(e),
            ExperimentError::Generate(_) => usage(e),
            ExperimentError::Keyword(e) => e.into(),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn load(path: &Path) -> Outcome<Instance> {
    Instance::load(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Outcome<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(solver)?;
    text.push('\n');
    Ok(text)
}

fn bid_report(
    inst: &Instance,
    method: &str,
    r: &OptimalBidResult,
    took: std::time::Duration,
) -> RunReport {
    let w = &r.winning_set;
    RunReport {
        versions: VERSIONS,
        instance: InstanceSummary::of(inst),
        rows: vec![MethodRow::new(
            method,
            w.utility.to_f64(),
            w.value_part.to_f64(),
            w.cost_part.to_f64(),
            w.cost_part.to_f64(),
            took,
        )],
        details: None,
        queries: query_rows(inst, &r.bid, |q| won_flag(w.contains(q))),
    }
}

fn cmd_solve(args: SolveArgs) -> Outcome<()> {
    let inst = load(&args.instance)?;
    let start = Instant::now();
    let name = args
        .method
        .to_possible_value()
        .expect("named variant")
        .get_name()
        .to_string();
    let report = match args.method {
        SolveMethod::Mincut => {
            bid_report(&inst, &name, &solve_query_mincut(&inst)?, start.elapsed())
        }
        SolveMethod::Lp => bid_report(&inst, &name, &solve_query_lp(&inst)?, start.elapsed()),
        SolveMethod::Oracle => {
            bid_report(&inst, &name, &brute_force_query(&inst)?, start.elapsed())
        }
        SolveMethod::GreedyMargin => {
            bid_report(&inst, &name, &max_margin_greedy(&inst)?, start.elapsed())
        }
        SolveMethod::GreedyRate => {
            let rate = match args.rate {
                RateArg::ProfitOverCost => Rate::ProfitOverCost,
                RateArg::ValueOverCost => Rate::ValueOverCost,
            };
            bid_report(
                &inst,
                &name,
                &max_rate_greedy(&inst, rate)?,
                start.elapsed(),
            )
        }
        SolveMethod::KeywordExact => {
            let options = ExactOptions {
                allow_exact: !args.broad_only,
                ..ExactOptions::default()
            };
            let sol = solve_keyword_exact(&inst, options)?;
            let mut report = bid_report(&inst, &name, &sol.result, start.elapsed());
            report.details = Some(serde_json::json!({
                "strategy": sol.strategy,
                "nodes": sol.nodes,
                "allow_exact": !args.broad_only,
            }));
            report
        }
        SolveMethod::KeywordLpRound => solve_rounding(&inst, &args, &name, start)?,
        SolveMethod::Budgeted => {
            let sol = solve_budgeted_lp(&inst, args.budget)?;
            let took = start.elapsed();
            let support: std::collections::BTreeSet<usize> =
                (0..inst.len()).filter(|&q| sol.x[q] > 0.0).collect();
            let dg = DependencyGraph::derive(&inst);
            let bid =
                bid_from_winning_set(&inst, &dg, &support, Language::Query).map_err(solver)?;
            let cost: f64 = (0..inst.len())
                .map(|q| sol.x[q] * inst.query(q).cost_total().to_f64())
                .sum();
            RunReport {
                versions: VERSIONS,
                instance: InstanceSummary::of(&inst),
                rows: vec![MethodRow::new(
                    &name,
                    sol.lp_value,
                    sol.lp_value,
                    cost,
                    sol.spend,
                    took,
                )],
                details: Some(serde_json::json!({
                    "budget": sol.budget.to_string(),
                    "lp_value": sol.lp_value,
                    "spend": sol.spend,
                    "shared_fraction": sol.shared_fraction,
                    "fractional": inst.ids(&sol.fractional()),
                })),
                queries: query_rows(&inst, &bid, |q| sol.x[q].to_string()),
            }
        }
        SolveMethod::Lagrangian => {
            let est = solve_budgeted_lagrangian(&inst, args.budget)?;
            let took = start.elapsed();
            let won = broadbid::WinningSet::evaluate(&inst, est.lower_set.clone());
            let dg = DependencyGraph::derive(&inst);
            let bid = bid_from_winning_set(&inst, &dg, &est.lower_set, Language::Query)
                .map_err(solver)?;
            RunReport {
                versions: VERSIONS,
                instance: InstanceSummary::of(&inst),
                rows: vec![MethodRow::new(
                    &name,
                    est.value,
                    est.value,
                    won.cost_part.to_f64(),
                    won.cost_part.to_f64(),
                    took,
                )],
                details: Some(serde_json::json!({
                    "envelope_value": est.value,
                    "multiplier": est.multiplier,
                    "cuts": est.cuts,
                    "lower_set": inst.ids(&est.lower_set),
                    "upper_set": est.upper_set.as_ref().map(|s| inst.ids(s)),
                })),
                queries: query_rows(&inst, &bid, |q| won_flag(won.contains(q))),
            }
        }
    };
    let text = match args.output.format {
        Format::Json => json(&report)?,
        Format::Csv => to_csv(&report.queries).map_err(solver)?,
    };
    emit(args.output.out.as_deref(), &text)
}

/// Rounds the relaxation `trials` times and reports the best drawn bid
/// alongside the empirical mean and the guaranteed bound.
fn solve_rounding(
    inst: &Instance,
    args: &SolveArgs,
    name: &str,
    start: Instant,
) -> Outcome<RunReport> {
    let frac = if args.broad_only {
        let layout = broadbid::keyword_solver::build_ilp_approx(inst, false);
        broadbid::keyword_solver::relaxation::solve_layout(inst, &layout)?
    } else {
        solve_relaxation(inst)?
    };
    let exp = rounding_experiment(inst, &frac, args.epsilon, args.trials.max(1), args.seed)?;
    let best = exp.rows.iter().fold(
        &exp.rows[0],
        |b, r| if r.utility > b.utility { r } else { b },
    );
    let bid = round_bid(inst, &frac, args.epsilon, &mut rng::seeded(best.seed))?;
    let won = interpret_bid(inst, &bid);
    let took = start.elapsed();
    Ok(RunReport {
        versions: VERSIONS,
        instance: InstanceSummary::of(inst),
        rows: vec![MethodRow::new(
            name,
            won.utility.to_f64(),
            won.value_part.to_f64(),
            won.cost_part.to_f64(),
            won.cost_part.to_f64(),
            took,
        )],
        details: Some(serde_json::json!({
            "seed": args.seed,
            "best_trial": best.trial,
            "summary": exp.summary,
            "win_rates": inst.queries().iter().zip(&exp.win_rates)
                .map(|(q, r)| (q.id.clone(), *r))
                .collect::<std::collections::BTreeMap<_, _>>(),
        })),
        queries: query_rows(inst, &bid, |q| won_flag(won.contains(q))),
    })
}

fn list<T: std::str::FromStr>(text: &str, what: &str) -> Outcome<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|e| usage(anyhow!("bad {what} entry `{t}`: {e}")))
        })
        .collect()
}

fn required<T>(value: Option<T>, flag: &str) -> Outcome<T> {
    value.ok_or_else(|| usage(anyhow!("this family needs --{flag}")))
}

fn cmd_generate(args: GenerateArgs) -> Outcome<()> {
    let invalid = |e: gen::GenerateError| usage(e);
    let inst = match args.family {
        Family::GreedyTrap => gen::greedy_trap(required(args.n, "n")?).map_err(invalid)?,
        Family::IntegralityGap => gen::integrality_gap(
            required(args.k, "k")?,
            args.n_chain,
            args.c,
            args.c_prime,
            args.m,
        )
        .map_err(invalid)?,
        Family::IndependentSet => {
            let path = required(args.graph, "graph")?;
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(usage)?;
            let (nodes, edges) = parse_edge_list(&text).map_err(invalid)?;
            gen::independent_set(&nodes, &edges).map_err(invalid)?
        }
        Family::MaxCoverage => {
            let sets = required(args.sets, "sets")?
                .split(';')
                .map(|s| list::<usize>(s, "set"))
                .collect::<Outcome<Vec<_>>>()?;
            let weights = list::<Money>(&required(args.weights, "weights")?, "weight")?;
            gen::max_coverage(&sets, &weights, required(args.k, "k")?).map_err(invalid)?
        }
        Family::Simulation => {
            gen::simulation(required(args.keywords, "keywords")?, args.seed).map_err(invalid)?
        }
        Family::RandomQuery => {
            gen::random_query(&mut rng::seeded(args.seed), required(args.size, "size")?)
                .map_err(usage)?
        }
        Family::RandomBudgeted => {
            gen::random_budgeted(&mut rng::seeded(args.seed), required(args.size, "size")?)
                .map_err(usage)?
        }
        Family::RandomKeyword => gen::random_keyword(
            &mut rng::seeded(args.seed),
            required(args.keywords, "keywords")?,
        )
        .map_err(usage)?,
    };
    let inst = match args.budget {
        Some(b) if b < Money::ZERO => return Err(usage(anyhow!("budget {b} is negative"))),
        Some(b) => inst.with_budget(Some(b)),
        None => inst,
    };
    inst.save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))
        .map_err(usage)
}

fn cmd_sim(args: SimArgs) -> Outcome<()> {
    let method = match args.exact_method {
        ExactArg::Brute => ExactMethod::Brute,
        ExactArg::Bb => ExactMethod::Bb,
        ExactArg::Bounds => ExactMethod::Bounds,
    };
    let start = Instant::now();
    let report = run_simulation(args.keywords, args.runs, args.seed, method, args.bounds_ok)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let text = match args.output.format {
        Format::Json => json(&serde_json::json!({
            "versions": VERSIONS,
            "experiment": report,
            "wall_time_ms": wall_time_ms,
        }))?,
        Format::Csv => to_csv(&report.rows).map_err(solver)?,
    };
    emit(args.output.out.as_deref(), &text)
}

/// Realized and predicted values must agree to this relative tolerance.
const PLAN_TOL: f64 = 1e-6;

fn cmd_plan(args: PlanArgs) -> Outcome<()> {
    let inst = load(&args.instance)?;
    let sol = solve_budgeted_lp(&inst, args.budget)?;
    let plan = plan_two_campaigns(&inst, &sol)?;
    let report = plan.report(&inst, &sol);
    let gap = (report.realized_value - report.lp_value).abs();
    if gap > PLAN_TOL * report.lp_value.abs().max(1.0) {
        return Err(solver(anyhow!(
            "simulated plan value {} differs from the LP value {}",
            report.realized_value,
            report.lp_value
        )));
    }
    emit(
        args.out.as_deref(),
        &json(&serde_json::json!({ "versions": VERSIONS, "plan": report }))?,
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Experiment {
            which: ExperimentCommand::Sim(args),
        } => cmd_sim(args),
        Command::Plan(args) => cmd_plan(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
