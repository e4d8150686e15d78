//! Scenario runs, strategy comparisons and simulations.
//!
//! A [`Scenario`] binds a Y-marginal, an observation space, a loss, a prior
//! family and (optionally) a true joint; [`run_scenario`] produces a
//! [`ScenarioReport`] holding every number derived from it. Randomness comes
//! from one ChaCha8 stream per call, seeded from the scenario.

pub mod reproduce;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::{
    beta_probability, bayes_loss_gap, bayes_predict, enumerate_count_tables, integration_oracle,
    predictive_odds, predictive_probability, ContingencyCounts, DirichletProductPrior, EnumerationOptions,
    Estimate, HierarchicalPrior, Method, PredictiveModel,
};
use crate::credal::{detect_dilation, CredalSet, DilationReport};
use crate::decision::{
    action_mixture_loss, expected_loss, ignore_rule, optimal_action, reliability_gap, DecisionRule, LossSpec,
};
use crate::error::{Error, Result};
use crate::minimax::{
    best_deterministic_rule, global_minimax_rule, local_minimax_action, time_inconsistency_report,
};
use crate::probspace::{sample_index, sample_pair, FiniteDistribution, JointDistribution};

/// Deterministic-rule oracle runs only when there are at most this many rules.
pub const DETERMINISTIC_ORACLE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum PriorSelector {
    #[default]
    Uniform,
    Jeffreys,
    Ess {
        s: f64,
    },
}

impl PriorSelector {
    pub fn build(&self, p: f64, m: usize) -> Result<DirichletProductPrior> {
        match self {
            Self::Uniform => DirichletProductPrior::uniform(p, m),
            Self::Jeffreys => DirichletProductPrior::jeffreys(p, m),
            Self::Ess { s } => DirichletProductPrior::ess(p, m, *s),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Uniform => "uniform".into(),
            Self::Jeffreys => "jeffreys".into(),
            Self::Ess { s } => format!("ess({s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyId {
    /// Always the prior-optimal action.
    Ignore,
    GlobalMinimax,
    /// Re-solves the conditional game at each observation, never learns.
    LocalMinimax,
    Bayes(PriorSelector),
    /// Even mixture of the full model (this prior) and the independence model.
    Hierarchical(PriorSelector),
}

impl StrategyId {
    pub fn label(&self) -> String {
        match self {
            Self::Ignore => "ignore".into(),
            Self::GlobalMinimax => "global-minimax".into(),
            Self::LocalMinimax => "local-minimax".into(),
            Self::Bayes(p) => format!("bayes({})", p.label()),
            Self::Hierarchical(p) => format!("hierarchical({})", p.label()),
        }
    }

    pub fn learns(&self) -> bool {
        matches!(self, Self::Bayes(_) | Self::Hierarchical(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum LossKind {
    ZeroOne,
    Asymmetric {
        alpha: f64,
    },
    #[serde(alias = "example-4.1-L")]
    ObservationScaled,
    #[serde(alias = "example-4.1-Lprime")]
    MismatchWeighted,
    Table {
        table: Vec<Vec<f64>>,
    },
    DependentTable {
        table: Vec<Vec<Vec<f64>>>,
    },
}

impl LossKind {
    pub fn build(&self, my: usize) -> Result<LossSpec> {
        match self {
            Self::ZeroOne => Ok(LossSpec::zero_one(my)),
            Self::Asymmetric { alpha } => LossSpec::asymmetric(*alpha),
            Self::ObservationScaled => Ok(LossSpec::observation_scaled()),
            Self::MismatchWeighted => Ok(LossSpec::mismatch_weighted()),
            Self::Table { table } => LossSpec::independent(table.clone()),
            Self::DependentTable { table } => LossSpec::dependent(table.clone()),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Self::Asymmetric { alpha } => Some(*alpha),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum TrueJointSpec {
    /// `X` independent of `Y`; `px` defaults to uniform.
    Independent {
        #[serde(default)]
        px: Option<Vec<f64>>,
    },
    /// `X = Y` (uses X values 0 and 1).
    FullyCorrelated,
    Explicit {
        table: Vec<Vec<f64>>,
    },
}

impl TrueJointSpec {
    pub fn build(&self, p: f64, mx: usize) -> Result<JointDistribution> {
        let py = FiniteDistribution::bernoulli(p)?;
        match self {
            Self::Independent { px } => {
                let px = match px {
                    Some(w) => FiniteDistribution::new(w.clone())?,
                    None => FiniteDistribution::uniform(mx)?,
                };
                if px.len() != mx {
                    return Err(Error::DimensionMismatch(format!("px has {} entries, mx = {mx}", px.len())));
                }
                Ok(JointDistribution::independent(&px, &py))
            }
            Self::FullyCorrelated => {
                if mx < 2 {
                    return Err(Error::InvalidParameter("a correlated joint needs mx >= 2".into()));
                }
                let mut rows = vec![vec![0.0, 0.0]; mx];
                rows[0][0] = 1.0 - p;
                rows[1][1] = p;
                JointDistribution::new(rows)
            }
            Self::Explicit { table } => JointDistribution::new(table.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CredalFamily {
    /// Every joint with the given Y-marginal.
    #[default]
    MarginalFixed,
}

fn default_mx() -> usize {
    2
}

fn default_event() -> Vec<usize> {
    vec![1]
}

fn default_cap() -> u64 {
    10_000_000
}

fn default_mc_samples() -> u64 {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Number of observation values; `Y` is binary.
    #[serde(default = "default_mx")]
    pub mx: usize,
    /// `Pr(Y = 1)`.
    pub p: f64,
    pub loss: LossKind,
    #[serde(default)]
    pub credal: CredalFamily,
    #[serde(default)]
    pub prior: PriorSelector,
    #[serde(default)]
    pub true_joint: Option<TrueJointSpec>,
    /// Sample size for the Bayesian analyses.
    #[serde(default)]
    pub n: u64,
    /// Observed `(x, y)` pairs for a one-off predictive query.
    #[serde(default)]
    pub observations: Vec<[usize; 2]>,
    #[serde(default)]
    pub query_x: Option<usize>,
    #[serde(default = "default_event")]
    pub event: Vec<usize>,
    #[serde(default)]
    pub strategies: Vec<StrategyId>,
    #[serde(default)]
    pub n_list: Vec<u64>,
    #[serde(default)]
    pub simulation_rounds: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u64,
}

impl Scenario {
    /// A scenario with every optional analysis switched off.
    pub fn base(name: &str, p: f64, loss: LossKind) -> Self {
        Self {
            name: name.into(),
            mx: 2,
            p,
            loss,
            credal: CredalFamily::MarginalFixed,
            prior: PriorSelector::Uniform,
            true_joint: None,
            n: 0,
            observations: Vec::new(),
            query_x: None,
            event: default_event(),
            strategies: Vec::new(),
            n_list: Vec::new(),
            simulation_rounds: 0,
            seed: 0,
            enumeration_cap: default_cap(),
            mc_samples: default_mc_samples(),
        }
    }

    /// Built-in scenarios for the worked examples.
    pub fn named(name: &str) -> Result<Self> {
        let s = match name {
            "example-2.2" => Self::base(name, 0.3, LossKind::ZeroOne),
            "example-3.1" => Self {
                observations: vec![[1, 1]],
                query_x: Some(1),
                ..Self::base(name, 0.5, LossKind::ZeroOne)
            },
            "example-3.2-beta" => Self {
                true_joint: Some(TrueJointSpec::Independent { px: None }),
                n: 4,
                strategies: vec![StrategyId::Ignore, StrategyId::Bayes(PriorSelector::Uniform)],
                ..Self::base(name, 0.5, LossKind::Asymmetric { alpha: 1.4 })
            },
            "example-3.2-correlated" => Self {
                true_joint: Some(TrueJointSpec::FullyCorrelated),
                n: 4,
                strategies: vec![StrategyId::Ignore, StrategyId::Bayes(PriorSelector::Uniform)],
                ..Self::base(name, 0.5, LossKind::Asymmetric { alpha: 1.4 })
            },
            "example-3.2-consistency" => Self {
                true_joint: Some(TrueJointSpec::Independent { px: None }),
                n: 4,
                n_list: vec![0, 4, 16, 64],
                ..Self::base(name, 0.5, LossKind::Asymmetric { alpha: 1.4 })
            },
            "example-4.1-L" => Self::base(name, 0.2, LossKind::ObservationScaled),
            "example-4.1-Lprime" => Self::base(name, 0.5, LossKind::MismatchWeighted),
            _ => return Err(Error::InvalidParameter(format!("unknown scenario `{name}`"))),
        };
        Ok(s)
    }

    pub const NAMED: [&'static str; 7] = [
        "example-2.2",
        "example-3.1",
        "example-3.2-beta",
        "example-3.2-correlated",
        "example-3.2-consistency",
        "example-4.1-L",
        "example-4.1-Lprime",
    ];

    pub fn enumeration_options(&self) -> EnumerationOptions {
        EnumerationOptions {
            cap: self.enumeration_cap as u128,
            mc_samples: self.mc_samples as usize,
            seed: self.seed,
            allow_monte_carlo: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mx == 0 {
            return Err(Error::InvalidParameter("mx must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::DegenerateMarginal { p: self.p });
        }
        let loss = self.loss.build(2)?;
        loss.check_space(self.mx, 2)?;
        if let Some(&y) = self.event.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidParameter(format!("event index {y} outside Y = {{0, 1}}")));
        }
        if let Some(k) = self.query_x {
            if k >= self.mx {
                return Err(Error::InvalidParameter(format!("query_x = {k} outside mx = {}", self.mx)));
            }
        }
        if let Some(o) = self.observations.iter().find(|o| o[0] >= self.mx || o[1] > 1) {
            return Err(Error::InvalidParameter(format!("observation {o:?} outside the space")));
        }
        if let PriorSelector::Ess { s } = self.prior {
            if s.is_nan() || s <= 0.0 {
                return Err(Error::InvalidParameter(format!("ess s = {s} must be positive")));
            }
        }
        if (!self.strategies.is_empty() || !self.n_list.is_empty() || self.simulation_rounds > 0)
            && self.true_joint.is_none()
        {
            return Err(Error::InvalidParameter(
                "strategies, n_list and simulation_rounds need a true_joint".into(),
            ));
        }
        if let Some(t) = &self.true_joint {
            let joint = t.build(self.p, self.mx)?;
            if joint.dims() != (self.mx, 2) {
                return Err(Error::DimensionMismatch(format!(
                    "true joint is {:?}, scenario is ({}, 2)",
                    joint.dims(),
                    self.mx
                )));
            }
        }
        Ok(())
    }
}

/// A strategy frozen into a rule, or a learning strategy with its model.
enum Player {
    Fixed(DecisionRule),
    Learner(Box<dyn PredictiveModel>),
}

/// The marginal-fixed credal set around the true joint's Y-marginal.
fn credal_for(true_joint: &JointDistribution) -> Result<CredalSet> {
    CredalSet::marginal_fixed(&true_joint.marginal_y(), true_joint.mx())
}

fn local_rule(credal: &CredalSet, loss: &LossSpec) -> Result<DecisionRule> {
    DecisionRule::new(
        (0..credal.mx())
            .map(|x| local_minimax_action(credal, x, loss).map(|l| l.mixture))
            .collect::<Result<_>>()?,
    )
}

fn player_for(strategy: &StrategyId, true_joint: &JointDistribution, loss: &LossSpec) -> Result<Player> {
    let py = true_joint.marginal_y();
    let p = py.prob(1);
    let mx = true_joint.mx();
    Ok(match strategy {
        StrategyId::Ignore => Player::Fixed(ignore_rule(&py, loss, mx)?),
        StrategyId::GlobalMinimax => Player::Fixed(global_minimax_rule(&credal_for(true_joint)?, loss)?.rule),
        StrategyId::LocalMinimax => Player::Fixed(local_rule(&credal_for(true_joint)?, loss)?),
        StrategyId::Bayes(sel) => Player::Learner(Box::new(sel.build(p, mx)?)),
        StrategyId::Hierarchical(sel) => {
            let full = sel.build(p, mx)?;
            Player::Learner(Box::new(HierarchicalPrior::new(full, vec![1.0; mx], 0.5)?))
        }
    })
}

/// Loss of playing `a` after observing `k`, averaged over the true `Y`, weighted by `Pr(X = k)`.
fn joint_action_loss(joint: &JointDistribution, loss: &LossSpec, k: usize, a: usize) -> f64 {
    let mut pure = vec![0.0; loss.num_actions()];
    pure[a] = 1.0;
    action_mixture_loss(joint.row(k), &pure, loss.slice(k))
}

/// Expected loss at round `n + 1` of a strategy that has seen `n` i.i.d.
/// pairs from `true_joint`. Non-learning strategies ignore the sample.
pub fn strategy_expected_loss(
    true_joint: &JointDistribution,
    strategy: &StrategyId,
    n: u64,
    loss: &LossSpec,
    options: &EnumerationOptions,
) -> Result<Estimate> {
    loss.check_space(true_joint.mx(), true_joint.my())?;
    match player_for(strategy, true_joint, loss)? {
        Player::Fixed(rule) => Ok(Estimate {
            value: expected_loss(true_joint, &rule, loss)?,
            std_error: None,
            method: Method::Exact,
            terms: 1,
        }),
        Player::Learner(model) => {
            let observed: Vec<usize> = (0..true_joint.mx()).filter(|&k| true_joint.x_mass(k) > 0.0).collect();
            let mut total = 0.0;
            let exact = enumerate_count_tables(true_joint, n, options.cap, |counts, w| {
                for &k in &observed {
                    let a = bayes_predict(model.as_ref(), counts, k, loss)?;
                    total += w * joint_action_loss(true_joint, loss, k, a);
                }
                Ok(())
            });
            match exact {
                Ok(terms) => Ok(Estimate {
                    value: total,
                    std_error: None,
                    method: Method::Exact,
                    terms,
                }),
                Err(Error::EnumerationTooLarge { .. }) if options.allow_monte_carlo => {
                    strategy_expected_loss_monte_carlo(true_joint, strategy, n, loss, options.mc_samples, options.seed)
                }
                Err(e) => Err(e),
            }
        }
    }
}

/// Monte Carlo estimate of [`strategy_expected_loss`]. Each draw takes the
/// `n` sample pairs first, then `(X_{n+1}, Y_{n+1})`.
pub fn strategy_expected_loss_monte_carlo(
    true_joint: &JointDistribution,
    strategy: &StrategyId,
    n: u64,
    loss: &LossSpec,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    loss.check_space(true_joint.mx(), true_joint.my())?;
    let player = player_for(strategy, true_joint, loss)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let value = match &player {
            Player::Fixed(rule) => {
                let (x, y) = sample_pair(true_joint, &mut rng);
                action_mixture_loss(&unit(true_joint.my(), y), rule.row(x).weights(), loss.slice(x))
            }
            Player::Learner(model) => {
                let mut counts = ContingencyCounts::empty(true_joint.mx());
                for _ in 0..n {
                    let (x, y) = sample_pair(true_joint, &mut rng);
                    counts.add(x, y)?;
                }
                let (x, y) = sample_pair(true_joint, &mut rng);
                let a = bayes_predict(model.as_ref(), &counts, x, loss)?;
                loss.get(x, y, a)
            }
        };
        sum += value;
        sum_sq += value * value;
    }
    let count = samples.max(1) as f64;
    let mean = sum / count;
    let var = (sum_sq / count - mean * mean).max(0.0);
    Ok(Estimate {
        value: mean,
        std_error: Some((var / count).sqrt()),
        method: Method::MonteCarlo,
        terms: samples as u128,
    })
}

fn unit(len: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[at] = 1.0;
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: u64,
    pub beta: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCurve {
    pub points: Vec<CurvePoint>,
    /// Share of consecutive pairs (in listed order) where beta did not increase.
    pub non_increasing_fraction: f64,
    /// Last beta minus first beta.
    pub net_change: f64,
}

/// Misprediction probability as a function of sample size.
pub fn consistency_curve(
    true_joint: &JointDistribution,
    model: &dyn PredictiveModel,
    loss: &LossSpec,
    n_list: &[u64],
    options: &EnumerationOptions,
) -> Result<ConsistencyCurve> {
    let points = n_list
        .iter()
        .map(|&n| {
            beta_probability(true_joint, n, loss, model, options).map(|beta| CurvePoint { n, beta })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = points.len().saturating_sub(1);
    let non_increasing = points.windows(2).filter(|w| w[1].beta.value <= w[0].beta.value).count();
    let non_increasing_fraction = if pairs == 0 { 1.0 } else { non_increasing as f64 / pairs as f64 };
    let net_change = match (points.first(), points.last()) {
        (Some(a), Some(b)) => b.beta.value - a.beta.value,
        _ => 0.0,
    };
    Ok(ConsistencyCurve {
        points,
        non_increasing_fraction,
        net_change,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub strategy: StrategyId,
    /// Cumulative loss after each round.
    pub cumulative: Vec<f64>,
}

impl Trajectory {
    pub fn mean_loss(&self) -> f64 {
        self.cumulative.last().map_or(0.0, |t| t / self.cumulative.len() as f64)
    }

    /// Mean per-round loss over rounds `from..to` (0-based, half open).
    pub fn window_mean(&self, from: usize, to: usize) -> f64 {
        let to = to.min(self.cumulative.len());
        if from >= to {
            return 0.0;
        }
        let before = if from == 0 { 0.0 } else { self.cumulative[from - 1] };
        (self.cumulative[to - 1] - before) / (to - from) as f64
    }
}

/// Plays every strategy on the same i.i.d. stream of pairs. A randomized
/// rule is charged its mixture loss `sum_a delta(x)(a) L(x, y, a)`; learning
/// strategies see each pair after acting on it.
pub fn sequential_simulation(
    true_joint: &JointDistribution,
    strategies: &[StrategyId],
    rounds: usize,
    seed: u64,
    loss: &LossSpec,
) -> Result<Vec<Trajectory>> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("simulation needs at least one round".into()));
    }
    loss.check_space(true_joint.mx(), true_joint.my())?;
    let players = strategies
        .iter()
        .map(|s| player_for(s, true_joint, loss))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = ContingencyCounts::empty(true_joint.mx());
    let mut totals = vec![0.0; players.len()];
    let mut trajectories: Vec<Vec<f64>> = vec![Vec::with_capacity(rounds); players.len()];
    let my = true_joint.my();
    for _ in 0..rounds {
        let c = sample_index(true_joint.flat(), &mut rng);
        let (x, y) = (c / my, c % my);
        for ((player, total), traj) in players.iter().zip(&mut totals).zip(&mut trajectories) {
            let l = match player {
                Player::Fixed(rule) => action_mixture_loss(&unit(my, y), rule.row(x).weights(), loss.slice(x)),
                Player::Learner(model) => loss.get(x, y, bayes_predict(model.as_ref(), &counts, x, loss)?),
            };
            *total += l;
            traj.push(*total);
        }
        if my == 2 {
            counts.add(x, y)?;
        }
    }
    Ok(strategies
        .iter()
        .cloned()
        .zip(trajectories)
        .map(|(strategy, cumulative)| Trajectory { strategy, cumulative })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorOptimal {
    pub action: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicOracle {
    pub actions: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSection {
    pub value: f64,
    pub lower_bound: f64,
    /// `rule[x][a]`.
    pub rule: Vec<Vec<f64>>,
    pub worst_case_vertices: Vec<usize>,
    /// The rule as `(weight, action per observation)` parts.
    pub decomposition: Vec<(f64, Vec<usize>)>,
    pub deterministic_oracle: Option<DeterministicOracle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSection {
    pub x: usize,
    pub mixture: Vec<f64>,
    pub value: f64,
    pub global_row_value: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSection {
    pub k: usize,
    pub counts: Vec<[u64; 2]>,
    pub odds: f64,
    pub probability: f64,
    pub empty_counts_probability: f64,
    /// Quadrature value, when `mx = 2`.
    pub oracle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSection {
    pub n: u64,
    pub beta: Estimate,
    /// `beta (alpha - 1) / 2`, for the asymmetric loss.
    pub gap: Option<f64>,
    /// `gap` over the ignoring agent's expected loss.
    pub relative_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyLoss {
    pub strategy: String,
    pub n: u64,
    pub loss: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub strategy: String,
    pub rounds: u64,
    pub mean_loss: f64,
    pub total_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub p: f64,
    pub mx: usize,
    pub prior_optimal: Option<PriorOptimal>,
    pub global: GlobalSection,
    /// `None` where the observation has zero mass under every vertex.
    pub local: Vec<Option<LocalSection>>,
    pub time_consistent: bool,
    pub dilation: DilationReport,
    pub reliability_gap: Option<f64>,
    pub predictive: Option<PredictiveSection>,
    pub beta: Option<BetaSection>,
    pub strategies: Vec<StrategyLoss>,
    pub consistency: Option<ConsistencyCurve>,
    pub simulation: Vec<SimulationSummary>,
}

/// Runs every analysis the scenario asks for. Deterministic for a fixed scenario.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioReport> {
    run_inner(scenario).map_err(|e| Error::Scenario {
        scenario: scenario.name.clone(),
        source: Box::new(e),
    })
}

fn run_inner(s: &Scenario) -> Result<ScenarioReport> {
    s.validate()?;
    let py = FiniteDistribution::bernoulli(s.p)?;
    let loss = s.loss.build(2)?;
    let credal = match s.credal {
        CredalFamily::MarginalFixed => CredalSet::marginal_fixed(&py, s.mx)?,
    };
    let options = s.enumeration_options();

    let prior_optimal = if loss.is_observation_dependent() {
        None
    } else {
        let (action, value) = optimal_action(&py, &loss)?;
        Some(PriorOptimal { action, value })
    };

    let report = time_inconsistency_report(&credal, &loss)?;
    let deterministic_oracle = if loss.num_actions().checked_pow(s.mx as u32).is_some_and(|c| c <= DETERMINISTIC_ORACLE_LIMIT) {
        let (actions, value) = best_deterministic_rule(&credal, &loss)?;
        Some(DeterministicOracle { actions, value })
    } else {
        None
    };
    let global = GlobalSection {
        value: report.global.value,
        lower_bound: report.global.lower_bound,
        rule: report.global.rule.rows().iter().map(|r| r.weights().to_vec()).collect(),
        worst_case_vertices: report.global.worst_case_vertices.clone(),
        decomposition: report.global.rule.decompose(1e-9),
        deterministic_oracle,
    };
    let local = report
        .per_x
        .iter()
        .enumerate()
        .map(|(x, c)| {
            c.as_ref().map(|c| LocalSection {
                x,
                mixture: c.local.mixture.weights().to_vec(),
                value: c.local.value,
                global_row_value: c.global_row_value,
                agrees: c.agrees,
            })
        })
        .collect();

    let dilation = detect_dilation(&credal, &s.event)?;
    let reliability_gap = match prior_optimal {
        Some(_) => Some(reliability_gap(&credal, &py, &loss)?),
        None => None,
    };

    let prior = s.prior.build(s.p, s.mx)?;
    let predictive = match s.query_x {
        Some(k) => {
            let pairs: Vec<(usize, usize)> = s.observations.iter().map(|o| (o[0], o[1])).collect();
            let counts = ContingencyCounts::from_pairs(s.mx, &pairs)?;
            Some(PredictiveSection {
                k,
                counts: counts.cells().to_vec(),
                odds: predictive_odds(&prior, &counts, k)?,
                probability: predictive_probability(&prior, &counts, k)?,
                empty_counts_probability: predictive_probability(&prior, &ContingencyCounts::empty(s.mx), k)?,
                oracle: if s.mx == 2 { Some(integration_oracle(&prior, &counts, k)?) } else { None },
            })
        }
        None => None,
    };

    let true_joint = s.true_joint.as_ref().map(|t| t.build(s.p, s.mx)).transpose()?;

    let beta = match &true_joint {
        Some(joint) if loss.num_actions() == 2 => {
            let beta = beta_probability(joint, s.n, &loss, &prior, &options)?;
            let gap = s.loss.alpha().map(|alpha| bayes_loss_gap(beta.value, alpha));
            let ignore_value = prior_optimal.as_ref().map(|o| o.value);
            let relative_gap = match (gap, ignore_value) {
                (Some(g), Some(v)) if v > 0.0 => Some(g / v),
                _ => None,
            };
            Some(BetaSection {
                n: s.n,
                beta,
                gap,
                relative_gap,
            })
        }
        _ => None,
    };

    let mut strategies = Vec::new();
    let mut consistency = None;
    let mut simulation = Vec::new();
    if let Some(joint) = &true_joint {
        for strategy in &s.strategies {
            strategies.push(StrategyLoss {
                strategy: strategy.label(),
                n: s.n,
                loss: strategy_expected_loss(joint, strategy, s.n, &loss, &options)?,
            });
        }
        if !s.n_list.is_empty() {
            consistency = Some(consistency_curve(joint, &prior, &loss, &s.n_list, &options)?);
        }
        if s.simulation_rounds > 0 && !s.strategies.is_empty() {
            let runs = sequential_simulation(joint, &s.strategies, s.simulation_rounds as usize, s.seed, &loss)?;
            simulation = runs
                .iter()
                .map(|t| SimulationSummary {
                    strategy: t.strategy.label(),
                    rounds: s.simulation_rounds,
                    mean_loss: t.mean_loss(),
                    total_loss: t.cumulative.last().copied().unwrap_or(0.0),
                })
                .collect();
        }
    }

    Ok(ScenarioReport {
        name: s.name.clone(),
        p: s.p,
        mx: s.mx,
        prior_optimal,
        global,
        local,
        time_consistent: report.consistent,
        dilation,
        reliability_gap,
        predictive,
        beta,
        strategies,
        consistency,
        simulation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn independent_half() -> JointDistribution {
        JointDistribution::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap()
    }

    fn correlated_half() -> JointDistribution {
        JointDistribution::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap()
    }

    #[test]
    fn named_scenarios_validate() {
        for name in Scenario::NAMED {
            Scenario::named(name).unwrap().validate().unwrap();
        }
        assert!(Scenario::named("example-9.9").is_err());
    }

    #[test]
    fn example_2_2_report() {
        let r = run_scenario(&Scenario::named("example-2.2").unwrap()).unwrap();
        assert!((r.global.value - 0.3).abs() < 1e-9);
        for l in r.local.iter().flatten() {
            assert!((l.value - 0.5).abs() < 1e-9);
        }
        assert!(r.dilation.dilated);
        assert!(!r.time_consistent);
        assert!(r.reliability_gap.unwrap() <= 1e-12);
    }

    #[test]
    fn example_4_1_prime_report() {
        let r = run_scenario(&Scenario::named("example-4.1-Lprime").unwrap()).unwrap();
        assert!((r.global.value - 2.0 / 3.0).abs() < 1e-9);
        assert!((r.global.rule[0][0] - 1.0 / 3.0).abs() < 1e-6);
        assert!((r.global.rule[1][1] - 1.0 / 3.0).abs() < 1e-6);
        assert!(r.time_consistent);
        assert!(r.prior_optimal.is_none());
    }

    #[test]
    fn ignore_strategy_loss() {
        let la = LossSpec::asymmetric(1.4).unwrap();
        let opts = EnumerationOptions::default();
        for n in [0, 3, 10] {
            let e = strategy_expected_loss(&independent_half(), &StrategyId::Ignore, n, &la, &opts).unwrap();
            assert!((e.value - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn correlated_bayes_beats_ignore() {
        let la = LossSpec::asymmetric(1.4).unwrap();
        let opts = EnumerationOptions::default();
        let bayes = StrategyId::Bayes(PriorSelector::Uniform);
        let b = strategy_expected_loss(&correlated_half(), &bayes, 4, &la, &opts).unwrap();
        let i = strategy_expected_loss(&correlated_half(), &StrategyId::Ignore, 4, &la, &opts).unwrap();
        assert_eq!(b.value, 0.0);
        assert_eq!(i.value, 0.5);
    }

    #[test]
    fn bayes_loss_matches_beta_gap_for_independent_joint() {
        let la = LossSpec::asymmetric(1.4).unwrap();
        let opts = EnumerationOptions::default();
        let u = DirichletProductPrior::uniform(0.5, 2).unwrap();
        let bayes = StrategyId::Bayes(PriorSelector::Uniform);
        for n in [1, 4, 7] {
            let beta = beta_probability(&independent_half(), n, &la, &u, &opts).unwrap().value;
            let b = strategy_expected_loss(&independent_half(), &bayes, n, &la, &opts).unwrap();
            assert!((b.value - (0.5 + bayes_loss_gap(beta, 1.4))).abs() < 1e-12);
        }
    }

    #[test]
    fn minimax_strategies_on_true_joint() {
        let l = LossSpec::zero_one(2);
        let joint = JointDistribution::new(vec![vec![0.5, 0.1], vec![0.2, 0.2]]).unwrap();
        let opts = EnumerationOptions::default();
        let g = strategy_expected_loss(&joint, &StrategyId::GlobalMinimax, 0, &l, &opts).unwrap();
        assert!((g.value - 0.3).abs() < 1e-9);
        let lm = strategy_expected_loss(&joint, &StrategyId::LocalMinimax, 0, &l, &opts).unwrap();
        assert!((lm.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_agrees_with_enumeration() {
        let la = LossSpec::asymmetric(1.4).unwrap();
        let opts = EnumerationOptions::default();
        let joint = JointDistribution::new(vec![vec![0.3, 0.1], vec![0.2, 0.4]]).unwrap();
        for s in [StrategyId::Bayes(PriorSelector::Jeffreys), StrategyId::Hierarchical(PriorSelector::Uniform), StrategyId::Ignore] {
            let exact = strategy_expected_loss(&joint, &s, 5, &la, &opts).unwrap();
            let mc = strategy_expected_loss_monte_carlo(&joint, &s, 5, &la, 50_000, 3).unwrap();
            let se = mc.std_error.unwrap().max(1e-12);
            assert!((exact.value - mc.value).abs() < 4.0 * se, "{s:?}: {} vs {}", exact.value, mc.value);
        }
    }

    #[test]
    fn simulation_is_seeded() {
        let l = LossSpec::zero_one(2);
        let strategies = [StrategyId::Ignore, StrategyId::Bayes(PriorSelector::Uniform)];
        let a = sequential_simulation(&independent_half(), &strategies, 200, 11, &l).unwrap();
        let b = sequential_simulation(&independent_half(), &strategies, 200, 11, &l).unwrap();
        assert_eq!(a, b);
        let c = sequential_simulation(&independent_half(), &strategies, 200, 12, &l).unwrap();
        assert_ne!(a, c);
        assert!(sequential_simulation(&independent_half(), &strategies, 0, 1, &l).is_err());
    }

    #[test]
    fn point_mass_joint_has_no_noise() {
        let joint = JointDistribution::new(vec![vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let l = LossSpec::zero_one(2);
        // ignore plays the Y-marginal's optimum; every round costs the same
        let runs = sequential_simulation(&joint, &[StrategyId::Ignore], 50, 5, &l).unwrap();
        for (t, c) in runs[0].cumulative.iter().enumerate() {
            assert_eq!(*c, 0.0 * (t as f64 + 1.0));
        }
    }

    #[test]
    fn consistency_curve_points() {
        let la = LossSpec::asymmetric(1.4).unwrap();
        let u = DirichletProductPrior::uniform(0.5, 2).unwrap();
        let curve = consistency_curve(&independent_half(), &u, &la, &[0, 4, 16], &EnumerationOptions::default()).unwrap();
        assert_eq!(curve.points[0].beta.value, 0.0);
        assert_eq!(curve.points.len(), 3);
        let corr = consistency_curve(&correlated_half(), &u, &la, &[4, 8, 16], &EnumerationOptions::default()).unwrap();
        assert!(corr.points.iter().all(|p| p.beta.value == 0.0));
        assert_eq!(corr.non_increasing_fraction, 1.0);
    }

    #[test]
    fn scenario_errors_carry_context() {
        let mut s = Scenario::named("example-2.2").unwrap();
        s.p = 1.0;
        let e = run_scenario(&s).unwrap_err();
        assert!(e.to_string().contains("example-2.2"));
        let mut s = Scenario::named("example-2.2").unwrap();
        s.strategies = vec![StrategyId::Ignore];
        assert!(run_scenario(&s).is_err());
    }

    #[test]
    fn report_is_reproducible() {
        let mut s = Scenario::named("example-3.2-beta").unwrap();
        s.simulation_rounds = 300;
        s.seed = 9;
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a, b);
    }
}
