//! Bayesian prediction of a binary `Y` from an observed `X` when the
//! Y-marginal `p` is known and the conditionals of `X` given `Y` carry
//! Dirichlet priors.
//!
//! Counts are an `M x 2` table, `n[j][k]` = number of sample pairs with
//! `X = j, Y = k`. The predictive distribution is the ratio of prior-averaged
//! probabilities of the data extended by the next pair (not the prior
//! average of the conditional probability, which never learns).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::decision::{action_losses, LossSpec};
use crate::error::{Error, Result};
use crate::probspace::{check_open_unit, sample_index, FiniteDistribution, JointDistribution};

/// Product of two Dirichlet priors: `a` on `Pr(X = . | Y = 1)`, `b` on
/// `Pr(X = . | Y = 0)`, with the Y-marginal fixed at `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletProductPrior {
    p: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

fn check_concentrations(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} is empty")));
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidParameter(format!("{name} entries must be positive and finite")));
    }
    Ok(())
}

impl DirichletProductPrior {
    pub fn new(p: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        check_open_unit(p)?;
        check_concentrations("a", &a)?;
        check_concentrations("b", &b)?;
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!("a has {} entries, b has {}", a.len(), b.len())));
        }
        Ok(Self { p, a, b })
    }

    fn symmetric(p: f64, m: usize, c: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("M must be at least 1".into()));
        }
        Self::new(p, vec![c; m], vec![c; m])
    }

    /// Uniform on both simplices: all parameters 1.
    pub fn uniform(p: f64, m: usize) -> Result<Self> {
        Self::symmetric(p, m, 1.0)
    }

    /// Jeffreys prior: all parameters 1/2.
    pub fn jeffreys(p: f64, m: usize) -> Result<Self> {
        Self::symmetric(p, m, 0.5)
    }

    /// Equivalent-sample-size prior: each simplex gets total pseudo-count `s`,
    /// spread evenly (`s / M` per cell).
    pub fn ess(p: f64, m: usize, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter(format!("equivalent sample size {s} must be positive")));
        }
        Self::symmetric(p, m, s / m.max(1) as f64)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Log probability of the sample (in a fixed order) averaged over the prior.
    fn log_marginal(&self, counts: &ContingencyCounts) -> f64 {
        log_p_part(self.p, counts.n_y(1), counts.n_y(0))
            + log_dirichlet_multinomial(&self.a, &counts.column(1))
            + log_dirichlet_multinomial(&self.b, &counts.column(0))
    }
}

/// Sample counts over `X x {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyCounts {
    cells: Vec<[u64; 2]>,
}

impl ContingencyCounts {
    pub fn new(cells: Vec<[u64; 2]>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidParameter("counts need at least one X value".into()));
        }
        Ok(Self { cells })
    }

    pub fn empty(m: usize) -> Self {
        Self { cells: vec![[0, 0]; m.max(1)] }
    }

    /// Tally a sequence of `(x, y)` pairs.
    pub fn from_pairs(m: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut c = Self::empty(m);
        for &(x, y) in pairs {
            c.add(x, y)?;
        }
        Ok(c)
    }

    pub fn add(&mut self, x: usize, y: usize) -> Result<()> {
        if x >= self.cells.len() || y > 1 {
            return Err(Error::DimensionMismatch(format!("pair ({x}, {y}) outside the table")));
        }
        self.cells[x][y] += 1;
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.cells.len()
    }

    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.cells[x][y]
    }

    pub fn cells(&self) -> &[[u64; 2]] {
        &self.cells
    }

    pub fn n(&self) -> u64 {
        self.cells.iter().map(|c| c[0] + c[1]).sum()
    }

    pub fn n_y(&self, y: usize) -> u64 {
        self.cells.iter().map(|c| c[y]).sum()
    }

    pub fn n_x(&self, x: usize) -> u64 {
        self.cells[x][0] + self.cells[x][1]
    }

    fn column(&self, y: usize) -> Vec<u64> {
        self.cells.iter().map(|c| c[y]).collect()
    }

    fn row_sums(&self) -> Vec<u64> {
        self.cells.iter().map(|c| c[0] + c[1]).collect()
    }

    fn with(&self, x: usize, y: usize) -> Self {
        let mut c = self.clone();
        c.cells[x][y] += 1;
        c
    }
}

fn log_p_part(p: f64, n1: u64, n0: u64) -> f64 {
    let term = |w: f64, n: u64| if n == 0 { 0.0 } else { n as f64 * w.ln() };
    term(p, n1) + term(1.0 - p, n0)
}

/// Log probability of one ordered sequence with the given category counts,
/// averaged over a Dirichlet(`conc`) prior.
fn log_dirichlet_multinomial(conc: &[f64], counts: &[u64]) -> f64 {
    let total: f64 = conc.iter().sum();
    let n: u64 = counts.iter().sum();
    let mut acc = ln_gamma(total) - ln_gamma(total + n as f64);
    for (&a, &c) in conc.iter().zip(counts) {
        if c > 0 {
            acc += ln_gamma(a + c as f64) - ln_gamma(a);
        }
    }
    acc
}

fn check_query(m: usize, counts: &ContingencyCounts, k: usize) -> Result<()> {
    if counts.m() != m {
        return Err(Error::DimensionMismatch(format!("counts cover {} X values, prior covers {m}", counts.m())));
    }
    if k >= m {
        return Err(Error::DimensionMismatch(format!("observation {k} outside {m} values")));
    }
    Ok(())
}

/// Posterior odds `Pr(Y = 1 | X = k, D) / Pr(Y = 0 | X = k, D)`:
///
/// `p/(1-p) * (n_{k1} + a_k)/(n_{k0} + b_k) * (n_0 + sum b)/(n_1 + sum a)`.
pub fn predictive_odds(prior: &DirichletProductPrior, counts: &ContingencyCounts, k: usize) -> Result<f64> {
    check_query(prior.m(), counts, k)?;
    let (num, den) = odds_factors(prior, counts, k);
    Ok(prior.p / (1.0 - prior.p) * (num / den))
}

/// The correction factor applied to the prior odds, as `(numerator, denominator)`.
fn odds_factors(prior: &DirichletProductPrior, counts: &ContingencyCounts, k: usize) -> (f64, f64) {
    let sum_a: f64 = prior.a.iter().sum();
    let sum_b: f64 = prior.b.iter().sum();
    let num = (counts.get(k, 1) as f64 + prior.a[k]) * (counts.n_y(0) as f64 + sum_b);
    let den = (counts.get(k, 0) as f64 + prior.b[k]) * (counts.n_y(1) as f64 + sum_a);
    (num, den)
}

/// The same odds for the all-ones prior, written out directly:
/// `p/(1-p) * (n_{k1} + 1)/(n_{k0} + 1) * (n_0 + M)/(n_1 + M)`.
pub fn uniform_predictive_odds(p: f64, counts: &ContingencyCounts, k: usize) -> Result<f64> {
    check_open_unit(p)?;
    let m = counts.m();
    check_query(m, counts, k)?;
    let mf = m as f64;
    Ok(p / (1.0 - p)
        * ((counts.get(k, 1) as f64 + 1.0) / (counts.get(k, 0) as f64 + 1.0))
        * ((counts.n_y(0) as f64 + mf) / (counts.n_y(1) as f64 + mf)))
}

/// `Pr(Y_{n+1} = 1 | X_{n+1} = k, D)`.
pub fn predictive_probability(prior: &DirichletProductPrior, counts: &ContingencyCounts, k: usize) -> Result<f64> {
    check_query(prior.m(), counts, k)?;
    let (num, den) = odds_factors(prior, counts, k);
    if num == den {
        return Ok(prior.p);
    }
    let yes = prior.p * num;
    let no = (1.0 - prior.p) * den;
    Ok(yes / (yes + no))
}

/// Quadrature check of [`predictive_probability`] for `M = 2`.
///
/// Integrates the likelihood of the extended sample against the prior on
/// the unit square of `(Pr(X=1|Y=1), Pr(X=1|Y=0))` with a tensorized
/// midpoint rule. Each axis is first mapped through `u = (1 - cos(pi s))/2`,
/// which turns the Dirichlet weight `u^{a-1}(1-u)^{b-1}` into the smooth
/// `pi u^{a-1/2}(1-u)^{b-1/2}` for parameters down to 1/2.
pub fn integration_oracle(prior: &DirichletProductPrior, counts: &ContingencyCounts, k: usize) -> Result<f64> {
    integration_oracle_with(prior, counts, k, 400)
}

pub fn integration_oracle_with(
    prior: &DirichletProductPrior,
    counts: &ContingencyCounts,
    k: usize,
    nodes: usize,
) -> Result<f64> {
    if prior.m() != 2 {
        return Err(Error::OracleOutOfDomain { m: prior.m() });
    }
    check_query(2, counts, k)?;
    let grid: Vec<f64> = (0..nodes)
        .map(|i| {
            let s = (i as f64 + 0.5) / nodes as f64;
            0.5 * (1.0 - (std::f64::consts::PI * s).cos())
        })
        .collect();
    let h = std::f64::consts::PI / nodes as f64;
    // weight for one axis: u^{e1 + c1 - 1/2} (1-u)^{e0 + c0 - 1/2}
    let axis = |u: f64, e1: f64, c1: f64, e0: f64, c0: f64| -> f64 {
        u.powf(e1 + c1 - 0.5) * (1.0 - u).powf(e0 + c0 - 0.5) * h
    };
    let joint = |j: usize| -> f64 {
        let ext = counts.with(k, j);
        let p_part = log_p_part(prior.p, ext.n_y(1), ext.n_y(0)).exp();
        let mut total = 0.0;
        for &alpha in &grid {
            // alpha = Pr(X = 1 | Y = 1)
            let wa = axis(alpha, ext.get(1, 1) as f64, prior.a[1], ext.get(0, 1) as f64, prior.a[0]);
            for &beta in &grid {
                let wb = axis(beta, ext.get(1, 0) as f64, prior.b[1], ext.get(0, 0) as f64, prior.b[0]);
                total += wa * wb;
            }
        }
        p_part * total
    };
    let yes = joint(1);
    let no = joint(0);
    Ok(yes / (yes + no))
}

/// Anything that yields a predictive probability for binary `Y`.
pub trait PredictiveModel {
    /// The known Y-marginal `Pr(Y = 1)`.
    fn p(&self) -> f64;
    /// Number of values of `X`.
    fn m(&self) -> usize;
    fn predictive(&self, counts: &ContingencyCounts, k: usize) -> Result<f64>;
}

impl PredictiveModel for DirichletProductPrior {
    fn p(&self) -> f64 {
        self.p
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    fn predictive(&self, counts: &ContingencyCounts, k: usize) -> Result<f64> {
        predictive_probability(self, counts, k)
    }
}

/// Two-model prior: with probability `independence_weight` the data come
/// from a model where `X` and `Y` are independent (`X` with a Dirichlet
/// prior of its own), otherwise from the full Dirichlet-product model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalPrior {
    full_model: DirichletProductPrior,
    independence_model: Vec<f64>,
    independence_weight: f64,
}

impl HierarchicalPrior {
    pub fn new(full_model: DirichletProductPrior, independence_model: Vec<f64>, independence_weight: f64) -> Result<Self> {
        check_concentrations("independence model", &independence_model)?;
        if independence_model.len() != full_model.m() {
            return Err(Error::DimensionMismatch("sub-priors cover different X spaces".into()));
        }
        if !(0.0..=1.0).contains(&independence_weight) {
            return Err(Error::InvalidParameter(format!("mixture weight {independence_weight} not in [0, 1]")));
        }
        Ok(Self {
            full_model,
            independence_model,
            independence_weight,
        })
    }

    /// Uniform sub-priors with equal weight on each model.
    pub fn even(p: f64, m: usize) -> Result<Self> {
        Self::new(DirichletProductPrior::uniform(p, m)?, vec![1.0; m], 0.5)
    }

    pub fn full_model(&self) -> &DirichletProductPrior {
        &self.full_model
    }

    pub fn independence_weight(&self) -> f64 {
        self.independence_weight
    }

    fn log_marginal_independent(&self, counts: &ContingencyCounts) -> f64 {
        log_p_part(self.full_model.p, counts.n_y(1), counts.n_y(0))
            + log_dirichlet_multinomial(&self.independence_model, &counts.row_sums())
    }

    /// `(log prior weight + log marginal)` for (full, independent).
    fn log_joint(&self, counts: &ContingencyCounts) -> (f64, f64) {
        let lw = |w: f64| if w == 0.0 { f64::NEG_INFINITY } else { w.ln() };
        (
            lw(1.0 - self.independence_weight) + self.full_model.log_marginal(counts),
            lw(self.independence_weight) + self.log_marginal_independent(counts),
        )
    }

    /// Posterior probability of the full (dependent) model given the sample.
    pub fn posterior_full_weight(&self, counts: &ContingencyCounts) -> Result<f64> {
        check_query(self.m(), counts, 0)?;
        let (f, i) = self.log_joint(counts);
        Ok(1.0 / (1.0 + (i - f).exp()))
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl PredictiveModel for HierarchicalPrior {
    fn p(&self) -> f64 {
        self.full_model.p
    }

    fn m(&self) -> usize {
        self.full_model.m()
    }

    /// Ratio of the model-averaged probabilities of `(D, X=k, Y=1)` and `(D, X=k)`.
    fn predictive(&self, counts: &ContingencyCounts, k: usize) -> Result<f64> {
        check_query(self.m(), counts, k)?;
        let (f1, i1) = self.log_joint(&counts.with(k, 1));
        let (f0, i0) = self.log_joint(&counts.with(k, 0));
        let yes = log_sum_exp(f1, i1);
        let all = log_sum_exp(yes, log_sum_exp(f0, i0));
        Ok((yes - all).exp())
    }
}

/// Relative slack for deciding that the two actions tie.
const TIE_TOLERANCE: f64 = 1e-12;

/// Action with the smaller posterior expected loss; ties go to action 0.
pub fn bayes_predict(
    model: &dyn PredictiveModel,
    counts: &ContingencyCounts,
    k: usize,
    loss: &LossSpec,
) -> Result<usize> {
    if loss.num_outcomes() != 2 || loss.num_actions() != 2 {
        return Err(Error::InvalidLoss("Bayesian prediction needs a 2x2 loss".into()));
    }
    if let Some(n) = loss.num_observations() {
        if n != model.m() {
            return Err(Error::DimensionMismatch(format!("loss covers {n} observations, model {}", model.m())));
        }
    }
    let q = model.predictive(counts, k)?;
    let table = loss.slice(k);
    let losses = action_losses(&FiniteDistribution::bernoulli(q)?, table);
    let slack = TIE_TOLERANCE * losses[0].abs().max(1.0);
    Ok(usize::from(losses[1] < losses[0] - slack))
}

/// Loss of the asymmetric-loss Bayesian over the loss of the ignoring agent
/// in the symmetric (`p = 1/2`, independent `X`) setting: `beta (alpha - 1) / 2`.
pub fn bayes_loss_gap(beta: f64, alpha: f64) -> f64 {
    beta * (alpha - 1.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    /// Largest number of count tables enumerated exactly.
    pub cap: u128,
    /// Draws used when the cap is exceeded.
    pub mc_samples: usize,
    pub seed: u64,
    pub allow_monte_carlo: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            cap: 10_000_000,
            mc_samples: 100_000,
            seed: 0,
            allow_monte_carlo: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// `None` for exact enumeration.
    pub std_error: Option<f64>,
    pub method: Method,
    /// Count tables enumerated, or Monte Carlo draws.
    pub terms: u128,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of count tables of size `n` over `cells` cells.
pub fn count_tables(n: u64, cells: usize) -> u128 {
    if cells == 0 {
        return u128::from(n == 0);
    }
    binomial(n as u128 + cells as u128 - 1, cells as u128 - 1)
}

/// Visits every count table reachable in `n` i.i.d. draws from `joint`
/// (`Y` binary) with its multinomial probability. Cells with zero
/// probability are never charged. Visit order is fixed.
pub fn enumerate_count_tables<F>(joint: &JointDistribution, n: u64, cap: u128, mut visit: F) -> Result<u128>
where
    F: FnMut(&ContingencyCounts, f64) -> Result<()>,
{
    if joint.my() != 2 {
        return Err(Error::DimensionMismatch("count tables need binary Y".into()));
    }
    let support: Vec<usize> = (0..joint.flat().len()).filter(|&c| joint.flat()[c] > 0.0).collect();
    let total = count_tables(n, support.len());
    if total > cap {
        return Err(Error::EnumerationTooLarge { terms: total, cap });
    }
    if support.is_empty() {
        return Err(Error::InvalidDistribution("joint has no support".into()));
    }
    let log_probs: Vec<f64> = support.iter().map(|&c| joint.flat()[c].ln()).collect();
    let log_fact: Vec<f64> = (0..=n).map(|i| ln_gamma(i as f64 + 1.0)).collect();
    let mut parts = vec![0u64; support.len()];
    *parts.last_mut().expect("nonempty support") = n;
    let mut counts = ContingencyCounts::empty(joint.mx());
    loop {
        let mut lw = log_fact[n as usize];
        for ((&c, &lp), &k) in support.iter().zip(&log_probs).zip(&parts) {
            counts.cells[c / 2][c % 2] = k;
            if k > 0 {
                lw += k as f64 * lp - log_fact[k as usize];
            }
        }
        visit(&counts, lw.exp())?;
        if !next_composition(&mut parts) {
            break;
        }
    }
    Ok(total)
}

/// Advances to the next composition in lexicographic order, starting from
/// `(0, .., 0, n)`. Returns false after `(n, 0, .., 0)`.
fn next_composition(parts: &mut [u64]) -> bool {
    let s = parts.len();
    if s < 2 {
        return false;
    }
    let tail = parts[s - 1];
    if tail > 0 {
        parts[s - 2] += 1;
        parts[s - 1] = tail - 1;
        return true;
    }
    for i in (1..s - 1).rev() {
        if parts[i] > 0 {
            let v = parts[i];
            parts[i] = 0;
            parts[i - 1] += 1;
            parts[s - 1] = v - 1;
            return true;
        }
    }
    false
}

/// Actions minimizing expected loss under `Pr(Y | X = k)` for the true joint.
pub(crate) fn optimal_actions_at(joint: &JointDistribution, loss: &LossSpec, k: usize) -> Result<Vec<bool>> {
    let cond = joint.condition_on_x(k)?;
    let losses = action_losses(&cond, loss.slice(k));
    let best = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = TIE_TOLERANCE * best.abs().max(1.0);
    Ok(losses.iter().map(|&v| v <= best + slack).collect())
}

fn check_bayes_setup(joint: &JointDistribution, model: &dyn PredictiveModel, loss: &LossSpec) -> Result<()> {
    if joint.my() != 2 {
        return Err(Error::DimensionMismatch("Bayesian analysis needs binary Y".into()));
    }
    if model.m() != joint.mx() {
        return Err(Error::DimensionMismatch(format!(
            "model covers {} X values, joint has {}",
            model.m(),
            joint.mx()
        )));
    }
    loss.check_space(joint.mx(), 2)?;
    if loss.num_actions() != 2 {
        return Err(Error::InvalidLoss("Bayesian prediction needs a 2x2 loss".into()));
    }
    Ok(())
}

/// Probability that the Bayesian, after `n` i.i.d. pairs from `true_joint`
/// and a fresh `X_{n+1}` from its X-marginal, picks an action that is not
/// optimal for the true conditional `Pr(Y | X = X_{n+1})`.
///
/// Exact by enumeration over count tables (multinomial weights); above
/// `options.cap` tables, a seeded Monte Carlo estimate if allowed.
pub fn beta_probability(
    true_joint: &JointDistribution,
    n: u64,
    loss: &LossSpec,
    model: &dyn PredictiveModel,
    options: &EnumerationOptions,
) -> Result<Estimate> {
    check_bayes_setup(true_joint, model, loss)?;
    let px = true_joint.marginal_x();
    let observed: Vec<usize> = (0..true_joint.mx()).filter(|&k| px.prob(k) > 0.0).collect();
    let optimal: Vec<Vec<bool>> = (0..true_joint.mx())
        .map(|k| if px.prob(k) > 0.0 { optimal_actions_at(true_joint, loss, k) } else { Ok(vec![]) })
        .collect::<Result<_>>()?;

    let exact = {
        let mut beta = 0.0;
        enumerate_count_tables(true_joint, n, options.cap, |counts, w| {
            for &k in &observed {
                let a = bayes_predict(model, counts, k, loss)?;
                if !optimal[k][a] {
                    beta += w * px.prob(k);
                }
            }
            Ok(())
        })
        .map(|terms| Estimate {
            value: beta,
            std_error: None,
            method: Method::Exact,
            terms,
        })
    };
    match exact {
        Err(Error::EnumerationTooLarge { .. }) if options.allow_monte_carlo => {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            let mut hits = 0u64;
            for _ in 0..options.mc_samples {
                let mut counts = ContingencyCounts::empty(true_joint.mx());
                for _ in 0..n {
                    let c = sample_index(true_joint.flat(), &mut rng);
                    counts.cells[c / 2][c % 2] += 1;
                }
                let k = sample_index(px.weights(), &mut rng);
                let a = bayes_predict(model, &counts, k, loss)?;
                if !optimal[k][a] {
                    hits += 1;
                }
            }
            let samples = options.mc_samples.max(1) as f64;
            let mean = hits as f64 / samples;
            Ok(Estimate {
                value: mean,
                std_error: Some((mean * (1.0 - mean) / samples).sqrt()),
                method: Method::MonteCarlo,
                terms: options.mc_samples as u128,
            })
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(cells: &[[u64; 2]]) -> ContingencyCounts {
        ContingencyCounts::new(cells.to_vec()).unwrap()
    }

    #[test]
    fn constructors() {
        let u = DirichletProductPrior::uniform(0.3, 2).unwrap();
        assert_eq!((u.a(), u.b()), (&[1.0, 1.0][..], &[1.0, 1.0][..]));
        let j = DirichletProductPrior::jeffreys(0.3, 2).unwrap();
        assert_eq!(j.a(), &[0.5, 0.5]);
        let e = DirichletProductPrior::ess(0.3, 4, 2.0).unwrap();
        assert_eq!(e.b(), &[0.5; 4]);
        assert!(DirichletProductPrior::uniform(0.0, 2).is_err());
        assert!(DirichletProductPrior::uniform(0.3, 0).is_err());
        assert!(DirichletProductPrior::ess(0.3, 2, 0.0).is_err());
        assert!(DirichletProductPrior::new(0.3, vec![1.0, -1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn no_data_gives_prior_marginal() {
        for p in [0.1, 0.3, 0.5, 0.77] {
            let u = DirichletProductPrior::uniform(p, 2).unwrap();
            let c = ContingencyCounts::empty(2);
            for k in 0..2 {
                assert!((predictive_odds(&u, &c, k).unwrap() - p / (1.0 - p)).abs() < 1e-15);
                assert_eq!(predictive_probability(&u, &c, k).unwrap(), p);
            }
        }
    }

    #[test]
    fn single_observation() {
        for p in [0.2, 0.5, 0.8] {
            let u = DirichletProductPrior::uniform(p, 2).unwrap();
            let c = counts(&[[0, 0], [0, 1]]);
            let odds = predictive_odds(&u, &c, 1).unwrap();
            assert!((odds - p / (1.0 - p) * 2.0 * (2.0 / 3.0)).abs() < 1e-14);
            let q = predictive_probability(&u, &c, 1).unwrap();
            assert!((q - 4.0 * p / (p + 3.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn fully_correlated_counts() {
        let p = 0.4;
        let u = DirichletProductPrior::uniform(p, 2).unwrap();
        let (n1, n0) = (3u64, 5u64);
        let c = counts(&[[n0, 0], [0, n1]]);
        let expected = p / (1.0 - p) * (n1 as f64 + 1.0) * (n0 as f64 + 2.0) / (n1 as f64 + 2.0);
        assert!((predictive_odds(&u, &c, 1).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn oracle_examples() {
        let u = DirichletProductPrior::uniform(0.5, 2).unwrap();
        let one = counts(&[[0, 0], [0, 1]]);
        assert!((integration_oracle(&u, &one, 1).unwrap() - 4.0 / 7.0).abs() < 1e-3);
        let empty = ContingencyCounts::empty(2);
        assert!((integration_oracle(&u, &empty, 0).unwrap() - 0.5).abs() < 1e-6);

        let j = DirichletProductPrior::jeffreys(0.3, 2).unwrap();
        let c = counts(&[[1, 0], [0, 2]]);
        let closed = predictive_probability(&j, &c, 1).unwrap();
        assert!((integration_oracle(&j, &c, 1).unwrap() - closed).abs() < 1e-3);

        let m3 = DirichletProductPrior::uniform(0.5, 3).unwrap();
        assert_eq!(
            integration_oracle(&m3, &ContingencyCounts::empty(3), 0),
            Err(Error::OracleOutOfDomain { m: 3 })
        );
    }

    #[test]
    fn bayes_predict_examples() {
        let u = DirichletProductPrior::uniform(0.5, 2).unwrap();
        let la = LossSpec::asymmetric(1.4).unwrap();
        let c = counts(&[[0, 0], [0, 4]]);
        assert!((predictive_odds(&u, &c, 1).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(bayes_predict(&u, &c, 1, &la).unwrap(), 1);

        for prior in [u.clone(), DirichletProductPrior::jeffreys(0.5, 2).unwrap()] {
            assert_eq!(bayes_predict(&prior, &ContingencyCounts::empty(2), 1, &la).unwrap(), 0);
        }
        let l01 = LossSpec::zero_one(2);
        assert_eq!(bayes_predict(&u, &ContingencyCounts::empty(2), 0, &l01).unwrap(), 0);
        assert!(bayes_predict(&u, &c, 1, &LossSpec::zero_one(3)).is_err());
    }

    #[test]
    fn hierarchical_examples() {
        let hp = HierarchicalPrior::even(0.5, 2).unwrap();
        let e = ContingencyCounts::empty(2);
        assert!((hp.predictive(&e, 0).unwrap() - 0.5).abs() < 1e-12);

        let diag = counts(&[[10, 0], [0, 10]]);
        assert!(hp.posterior_full_weight(&diag).unwrap() > 0.9);
        assert!(hp.predictive(&diag, 1).unwrap() > 0.9);

        let flat = counts(&[[5, 5], [5, 5]]);
        let u = DirichletProductPrior::uniform(0.5, 2).unwrap();
        // perfectly balanced: both sit exactly at 1/2
        let plain = (predictive_probability(&u, &flat, 1).unwrap() - 0.5).abs();
        let hier = (hp.predictive(&flat, 1).unwrap() - 0.5).abs();
        assert!(plain < 1e-12 && hier < 1e-12);

        // mild sampling noise: the independence model pulls toward 1/2
        let noisy = counts(&[[5, 4], [5, 6]]);
        let plain = predictive_probability(&u, &noisy, 1).unwrap();
        let hier = hp.predictive(&noisy, 1).unwrap();
        assert!((plain - 7.0 / 13.0).abs() < 1e-12);
        assert!((hier - 0.5135996476204665).abs() < 1e-12);
        assert!((hier - 0.5).abs() < (plain - 0.5).abs());

        assert!(HierarchicalPrior::new(u.clone(), vec![1.0], 0.5).is_err());
        assert!(HierarchicalPrior::new(u, vec![1.0, 1.0], 1.5).is_err());
    }

    #[test]
    fn hierarchical_weight_extremes() {
        let u = DirichletProductPrior::uniform(0.3, 2).unwrap();
        let c = counts(&[[2, 1], [0, 3]]);
        let full_only = HierarchicalPrior::new(u.clone(), vec![1.0, 1.0], 0.0).unwrap();
        let q = predictive_probability(&u, &c, 1).unwrap();
        assert!((full_only.predictive(&c, 1).unwrap() - q).abs() < 1e-12);
        let ind_only = HierarchicalPrior::new(u, vec![1.0, 1.0], 1.0).unwrap();
        assert!((ind_only.predictive(&c, 1).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn loss_gap() {
        assert!((bayes_loss_gap(0.35, 1.4) - 0.07).abs() < 1e-15);
        assert_eq!(bayes_loss_gap(0.0, 1.4), 0.0);
    }

    #[test]
    fn table_count() {
        assert_eq!(count_tables(4, 4), 35);
        assert_eq!(count_tables(0, 4), 1);
        assert_eq!(count_tables(64, 4), 47_905);
    }

    #[test]
    fn enumeration_weights_sum_to_one() {
        let j = JointDistribution::new(vec![vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        let mut total = 0.0;
        let terms = enumerate_count_tables(&j, 6, 1_000, |_, w| {
            total += w;
            Ok(())
        })
        .unwrap();
        assert_eq!(terms, count_tables(6, 4));
        assert!((total - 1.0).abs() < 1e-12);
        assert!(matches!(
            enumerate_count_tables(&j, 6, 10, |_, _| Ok(())),
            Err(Error::EnumerationTooLarge { terms: 84, cap: 10 })
        ));
    }

    #[test]
    fn beta_small_cases() {
        let u = DirichletProductPrior::uniform(0.5, 2).unwrap();
        let la = LossSpec::asymmetric(1.4).unwrap();
        let ind = JointDistribution::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let opts = EnumerationOptions::default();
        let b0 = beta_probability(&ind, 0, &la, &u, &opts).unwrap();
        assert_eq!(b0.value, 0.0);
        assert_eq!(b0.method, Method::Exact);

        let corr = JointDistribution::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(beta_probability(&corr, 4, &la, &u, &opts).unwrap().value, 0.0);
    }

    #[test]
    fn beta_monte_carlo_fallback() {
        let u = DirichletProductPrior::uniform(0.5, 2).unwrap();
        let la = LossSpec::asymmetric(1.4).unwrap();
        let ind = JointDistribution::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let exact = beta_probability(&ind, 4, &la, &u, &EnumerationOptions::default()).unwrap();
        let opts = EnumerationOptions {
            cap: 10,
            mc_samples: 40_000,
            seed: 7,
            allow_monte_carlo: true,
        };
        let mc = beta_probability(&ind, 4, &la, &u, &opts).unwrap();
        assert_eq!(mc.method, Method::MonteCarlo);
        let se = mc.std_error.unwrap();
        assert!((mc.value - exact.value).abs() < 4.0 * se);
        assert_eq!(mc, beta_probability(&ind, 4, &la, &u, &opts).unwrap());

        let strict = EnumerationOptions {
            allow_monte_carlo: false,
            ..opts
        };
        assert!(matches!(
            beta_probability(&ind, 4, &la, &u, &strict),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }
}
