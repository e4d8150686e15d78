//! `credal`: decisions under credal sets from the command line.
//!
//! Exit codes: 0 success, 1 acceptance FAIL, 2 usage or validation error,
//! 3 numerical failure.

mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use credal_core::bayes::{bayes_predict, ContingencyCounts, HierarchicalPrior, PredictiveModel};
use credal_core::experiments::reproduce::{reproduce, Example, Overrides};
use credal_core::experiments::{
    run_scenario, sequential_simulation, LossKind, PriorSelector, Scenario, StrategyId, TrueJointSpec,
};
use credal_core::Error;

use output::{rule_label, sig6, Document, Provenance};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "credal", version, about = "Decisions under sets of probability measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Re-run a worked example (2.2, 3.1, 3.2 or 4.1) and check its values.
    Reproduce {
        example: String,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Run a TOML scenario file and emit the full report.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        output: Format,
        /// Overrides the file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Global minimax decision rule over the marginal-fixed credal set.
    Minimax(LossArgs),
    /// Minimax action at each observation, against the conditional credal set.
    LocalMinimax {
        #[command(flatten)]
        loss: LossArgs,
        /// Only this observation.
        #[arg(long)]
        x: Option<usize>,
    },
    /// Lower/upper probability of an event before and after observing X.
    Dilation {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        mx: usize,
        /// Event on Y, e.g. `Y=1` or `Y=0,1`.
        #[arg(long, default_value = "Y=1")]
        event: String,
    },
    /// Bayesian predictive probability and action.
    BayesPredict {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        mx: usize,
        /// Observed pair `x,y`; repeatable.
        #[arg(long = "observe", value_name = "X,Y")]
        observations: Vec<String>,
        /// Observation to predict at.
        #[arg(long)]
        k: usize,
        /// `uniform`, `jeffreys` or `ess:S`.
        #[arg(long, default_value = "uniform")]
        prior: String,
        /// Mix the prior evenly with the independence model.
        #[arg(long)]
        hierarchical: bool,
        /// Asymmetric loss cost; 0/1 loss when absent.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Probability that the Bayesian mispredicts after n samples.
    Beta {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.4)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        mx: usize,
        #[arg(long, value_enum, default_value_t = JointArg::Independent)]
        joint: JointArg,
        #[arg(long, default_value = "uniform")]
        prior: String,
        /// Largest exact enumeration before falling back to Monte Carlo.
        #[arg(long, default_value_t = 10_000_000)]
        cap: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play strategies against i.i.d. draws from a true joint.
    Simulate {
        #[command(flatten)]
        loss: LossArgs,
        #[arg(long, value_enum, default_value_t = JointArg::Independent)]
        joint: JointArg,
        #[arg(long, default_value_t = 1000)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma list of ignore, global-minimax, local-minimax, bayes[:PRIOR], hierarchical[:PRIOR].
        #[arg(long, default_value = "ignore,bayes")]
        strategies: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum JointArg {
    Independent,
    Correlated,
}

impl JointArg {
    fn spec(self) -> TrueJointSpec {
        match self {
            Self::Independent => TrueJointSpec::Independent { px: None },
            Self::Correlated => TrueJointSpec::FullyCorrelated,
        }
    }
}

#[derive(clap::Args)]
struct LossArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 2)]
    mx: usize,
    /// zero-one, asymmetric, example-4.1-L (observation-scaled) or example-4.1-Lprime (mismatch-weighted).
    #[arg(long, default_value = "zero-one")]
    loss: String,
    /// Cost of predicting 1 when the truth is 0, for the asymmetric loss.
    #[arg(long)]
    alpha: Option<f64>,
}

impl LossArgs {
    fn kind(&self) -> anyhow::Result<LossKind> {
        Ok(match self.loss.as_str() {
            "zero-one" => LossKind::ZeroOne,
            "asymmetric" => LossKind::Asymmetric {
                alpha: self.alpha.ok_or_else(|| anyhow!("--loss asymmetric needs --alpha"))?,
            },
            "observation-scaled" | "example-4.1-L" => LossKind::ObservationScaled,
            "mismatch-weighted" | "example-4.1-Lprime" => LossKind::MismatchWeighted,
            other => bail!("unknown loss `{other}`"),
        })
    }

    fn scenario(&self, name: &str) -> anyhow::Result<Scenario> {
        Ok(Scenario { mx: self.mx, ..Scenario::base(name, self.p, self.kind()?) })
    }
}

fn parse_prior(s: &str) -> anyhow::Result<PriorSelector> {
    match s {
        "uniform" => Ok(PriorSelector::Uniform),
        "jeffreys" => Ok(PriorSelector::Jeffreys),
        _ => match s.strip_prefix("ess:") {
            Some(v) => Ok(PriorSelector::Ess { s: v.parse().with_context(|| format!("bad ess size `{v}`"))? }),
            None => bail!("unknown prior `{s}` (uniform, jeffreys or ess:S)"),
        },
    }
}

fn parse_strategy(s: &str) -> anyhow::Result<StrategyId> {
    let (name, prior) = match s.split_once(':') {
        Some((n, p)) => (n, parse_prior(p)?),
        None => (s, PriorSelector::Uniform),
    };
    Ok(match name {
        "ignore" => StrategyId::Ignore,
        "global-minimax" => StrategyId::GlobalMinimax,
        "local-minimax" => StrategyId::LocalMinimax,
        "bayes" => StrategyId::Bayes(prior),
        "hierarchical" => StrategyId::Hierarchical(prior),
        _ => bail!("unknown strategy `{s}`"),
    })
}

fn parse_event(s: &str) -> anyhow::Result<Vec<usize>> {
    let body = s.strip_prefix("Y=").unwrap_or(s);
    body.split(',')
        .map(|v| v.trim().parse::<usize>().with_context(|| format!("bad event `{s}`")))
        .collect()
}

fn parse_pair(s: &str) -> anyhow::Result<(usize, usize)> {
    let (x, y) = s.split_once(',').ok_or_else(|| anyhow!("observation `{s}` is not `x,y`"))?;
    Ok((x.trim().parse()?, y.trim().parse()?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    version: u32,
    scenario: Scenario,
}

enum Outcome {
    Ok,
    Fail,
}

fn cmd_reproduce(example: &str, overrides: Overrides) -> anyhow::Result<Outcome> {
    let example: Example = example.parse()?;
    let r = reproduce(example, overrides)?;
    println!("example {}", r.example);
    for row in &r.rows {
        println!("  {row}");
    }
    let pass = r.all_pass();
    println!("{}", if pass { "ALL PASS" } else { "FAIL" });
    Ok(if pass { Outcome::Ok } else { Outcome::Fail })
}

fn cmd_run(file: &PathBuf, format: Format, seed: Option<u64>, out: Option<&PathBuf>) -> anyhow::Result<Outcome> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let parsed: ScenarioFile = toml::from_str(&text).map_err(|e| anyhow!("{}: {e}", file.display()))?;
    if parsed.version != SCHEMA_VERSION {
        bail!("{}: unsupported version {} (expected {SCHEMA_VERSION})", file.display(), parsed.version);
    }
    let mut scenario = parsed.scenario;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let report = run_scenario(&scenario)?;
    let doc = Document {
        scenario: &scenario,
        results: &report,
        provenance: Provenance {
            seed: scenario.seed,
            version: env!("CARGO_PKG_VERSION").into(),
        },
    };
    let text = match format {
        Format::Json => output::to_json(&doc)?,
        Format::Csv => output::to_csv(&doc)?,
    };
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(Outcome::Ok)
}

fn cmd_minimax(args: &LossArgs) -> anyhow::Result<Outcome> {
    let r = run_scenario(&args.scenario("minimax")?)?;
    println!("value {:.4}, rule: {}", r.global.value, rule_label(&r.global.decomposition));
    Ok(Outcome::Ok)
}

fn cmd_local_minimax(args: &LossArgs, only: Option<usize>) -> anyhow::Result<Outcome> {
    let r = run_scenario(&args.scenario("local-minimax")?)?;
    if let Some(x) = only {
        if x >= r.mx {
            bail!("--x {x} outside 0..{}", r.mx);
        }
    }
    for (x, local) in r.local.iter().enumerate() {
        if only.is_some_and(|o| o != x) {
            continue;
        }
        match local {
            Some(l) => {
                let mix: Vec<String> = l.mixture.iter().map(|w| format!("{w:.4}")).collect();
                println!(
                    "x={x}: mixture ({}), value {:.4}, global row {:.4}{}",
                    mix.join(", "),
                    l.value,
                    l.global_row_value,
                    if l.agrees { "" } else { ", DISAGREES" }
                );
            }
            None => println!("x={x}: zero mass under every element"),
        }
    }
    println!("time consistent: {}", r.time_consistent);
    Ok(Outcome::Ok)
}

fn cmd_dilation(p: f64, mx: usize, event: &str) -> anyhow::Result<Outcome> {
    let scenario = Scenario { mx, event: parse_event(event)?, ..Scenario::base("dilation", p, LossKind::ZeroOne) };
    let d = run_scenario(&scenario)?.dilation;
    let mut parts = vec![format!("prior [{:.3},{:.3}]", d.prior.lower, d.prior.upper)];
    parts.extend(d.per_x.iter().enumerate().map(|(x, i)| format!("x={x} [{:.3},{:.3}]", i.lower, i.upper)));
    parts.push(if d.dilated { "DILATED" } else { "not dilated" }.into());
    println!("{}", parts.join(", "));
    Ok(Outcome::Ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bayes_predict(
    p: f64,
    mx: usize,
    observations: &[String],
    k: usize,
    prior: &str,
    hierarchical: bool,
    alpha: Option<f64>,
) -> anyhow::Result<Outcome> {
    let pairs = observations.iter().map(|s| parse_pair(s)).collect::<anyhow::Result<Vec<_>>>()?;
    let selector = parse_prior(prior)?;
    let loss = match alpha {
        Some(alpha) => LossKind::Asymmetric { alpha },
        None => LossKind::ZeroOne,
    };
    let scenario = Scenario {
        mx,
        prior: selector.clone(),
        observations: pairs.iter().map(|&(x, y)| [x, y]).collect(),
        query_x: Some(k),
        ..Scenario::base("bayes-predict", p, loss.clone())
    };
    let report = run_scenario(&scenario)?;
    let counts = ContingencyCounts::from_pairs(mx, &pairs)?;
    let full = selector.build(p, mx)?;
    let model: Box<dyn PredictiveModel> = if hierarchical {
        Box::new(HierarchicalPrior::new(full, vec![1.0; mx], 0.5)?)
    } else {
        Box::new(full)
    };
    let probability = model.predictive(&counts, k)?;
    let action = bayes_predict(model.as_ref(), &counts, k, &loss.build(2)?)?;
    println!("Pr(Y=1 | x={k}, data) = {}", sig6(probability));
    if let Some(pred) = report.predictive.filter(|_| !hierarchical) {
        println!("odds = {}", sig6(pred.odds));
        if let Some(oracle) = pred.oracle {
            println!("quadrature = {}", sig6(oracle));
        }
    }
    println!("action = {action}");
    Ok(Outcome::Ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_beta(
    n: u64,
    alpha: f64,
    p: f64,
    mx: usize,
    joint: JointArg,
    prior: &str,
    cap: u64,
    seed: u64,
) -> anyhow::Result<Outcome> {
    let scenario = Scenario {
        mx,
        n,
        prior: parse_prior(prior)?,
        true_joint: Some(joint.spec()),
        enumeration_cap: cap,
        seed,
        ..Scenario::base("beta", p, LossKind::Asymmetric { alpha })
    };
    let r = run_scenario(&scenario)?;
    let b = r.beta.ok_or_else(|| anyhow!("no misprediction probability in report"))?;
    println!("beta = {}", sig6(b.beta.value));
    match b.beta.std_error {
        Some(se) => println!("method monte-carlo, {} samples, std error {}", b.beta.terms, sig6(se)),
        None => println!("method exact, {} count tables", b.beta.terms),
    }
    if let Some(gap) = b.gap {
        println!("loss gap = {}", sig6(gap));
    }
    if let Some(rel) = b.relative_gap {
        println!("relative gap = {}%", sig6(100.0 * rel));
    }
    Ok(Outcome::Ok)
}

fn cmd_simulate(args: &LossArgs, joint: JointArg, rounds: usize, seed: u64, strategies: &str) -> anyhow::Result<Outcome> {
    let strategies = strategies.split(',').map(|s| parse_strategy(s.trim())).collect::<anyhow::Result<Vec<_>>>()?;
    let scenario = args.scenario("simulate")?;
    scenario.validate()?;
    let true_joint = joint.spec().build(args.p, args.mx)?;
    let runs = sequential_simulation(&true_joint, &strategies, rounds, seed, &scenario.loss.build(2)?)?;
    println!("{:<24} {:>10} {:>12} {:>12}", "strategy", "rounds", "mean loss", "total loss");
    for t in &runs {
        println!(
            "{:<24} {:>10} {:>12} {:>12}",
            t.strategy.label(),
            rounds,
            sig6(t.mean_loss()),
            sig6(t.cumulative.last().copied().unwrap_or(0.0))
        );
    }
    println!("seed {seed}");
    Ok(Outcome::Ok)
}

fn dispatch(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Reproduce { example, p, alpha, n } => cmd_reproduce(&example, Overrides { p, alpha, n }),
        Command::Run { file, output, seed, out } => cmd_run(&file, output, seed, out.as_ref()),
        Command::Minimax(args) => cmd_minimax(&args),
        Command::LocalMinimax { loss, x } => cmd_local_minimax(&loss, x),
        Command::Dilation { p, mx, event } => cmd_dilation(p, mx, &event),
        Command::BayesPredict { p, mx, observations, k, prior, hierarchical, alpha } => {
            cmd_bayes_predict(p, mx, &observations, k, &prior, hierarchical, alpha)
        }
        Command::Beta { n, alpha, p, mx, joint, prior, cap, seed } => cmd_beta(n, alpha, p, mx, joint, &prior, cap, seed),
        Command::Simulate { loss, joint, rounds, seed, strategies } => cmd_simulate(&loss, joint, rounds, seed, &strategies),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.downcast_ref::<Error>().is_some_and(Error::is_numerical);
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}
