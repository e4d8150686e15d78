//! Losses, randomized decision rules and expected loss.

use serde::{Deserialize, Serialize};

use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::probspace::{FiniteDistribution, JointDistribution};

/// Loss table. Entries may be `+inf`; `NaN` and `-inf` are rejected.
///
/// Observation-independent entries are indexed `[true y][action]`.
/// Observation-dependent entries are indexed `[observed x][true y][action]`,
/// so fixing `x` gives an ordinary `[y][a]` slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "table")]
pub enum LossSpec {
    ObservationIndependent(Vec<Vec<f64>>),
    ObservationDependent(Vec<Vec<Vec<f64>>>),
}

fn check_matrix(m: &[Vec<f64>]) -> Result<(usize, usize)> {
    let my = m.len();
    let na = m.first().map_or(0, Vec::len);
    if my == 0 || na == 0 {
        return Err(Error::InvalidLoss("empty loss table".into()));
    }
    if m.iter().any(|r| r.len() != na) {
        return Err(Error::InvalidLoss("ragged loss table".into()));
    }
    if m.iter().flatten().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(Error::InvalidLoss("NaN or -inf entry".into()));
    }
    Ok((my, na))
}

impl LossSpec {
    pub fn independent(table: Vec<Vec<f64>>) -> Result<Self> {
        check_matrix(&table)?;
        Ok(Self::ObservationIndependent(table))
    }

    pub fn dependent(table: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let first = table
            .first()
            .ok_or_else(|| Error::InvalidLoss("empty loss table".into()))?;
        let dims = check_matrix(first)?;
        for slice in &table {
            if check_matrix(slice)? != dims {
                return Err(Error::InvalidLoss("slices differ in shape".into()));
            }
        }
        Ok(Self::ObservationDependent(table))
    }

    /// Re-check the invariants, for values that bypassed the constructors.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::ObservationIndependent(t) => check_matrix(t).map(|_| ()),
            Self::ObservationDependent(t) => Self::dependent(t.clone()).map(|_| ()),
        }
    }

    /// `|i - j|` loss on `n` values.
    pub fn zero_one(n: usize) -> Self {
        Self::ObservationIndependent(
            (0..n)
                .map(|y| (0..n).map(|a| if a == y { 0.0 } else { 1.0 }).collect())
                .collect(),
        )
    }

    /// Asymmetric misclassification loss: missing a true 1 costs 1,
    /// predicting 1 when the truth is 0 costs `alpha`.
    pub fn asymmetric(alpha: f64) -> Result<Self> {
        Self::independent(vec![vec![0.0, alpha], vec![1.0, 0.0]])
    }

    /// `(x + 1) |a - y|`: misprediction costs double after observing 1.
    pub fn observation_scaled() -> Self {
        Self::ObservationDependent(
            (0..2i32)
                .map(|x| {
                    (0..2i32)
                        .map(|y| {
                            (0..2i32)
                                .map(|a| ((x + 1) * (a - y).abs()) as f64)
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        )
    }

    /// `(|x - y| + 1) |a - y|`: misprediction costs double when the
    /// observation disagrees with the truth.
    pub fn mismatch_weighted() -> Self {
        Self::ObservationDependent(
            (0..2i32)
                .map(|x| {
                    (0..2i32)
                        .map(|y| {
                            (0..2i32)
                                .map(|a| (((x - y).abs() + 1) * (a - y).abs()) as f64)
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn is_observation_dependent(&self) -> bool {
        matches!(self, Self::ObservationDependent(_))
    }

    pub fn num_outcomes(&self) -> usize {
        self.slice(0).len()
    }

    pub fn num_actions(&self) -> usize {
        self.slice(0)[0].len()
    }

    /// Number of observations the table is defined for, if it depends on them.
    pub fn num_observations(&self) -> Option<usize> {
        match self {
            Self::ObservationIndependent(_) => None,
            Self::ObservationDependent(t) => Some(t.len()),
        }
    }

    /// The `[y][a]` table in force after observing `x`.
    pub fn slice(&self, x: usize) -> &[Vec<f64>] {
        match self {
            Self::ObservationIndependent(t) => t,
            Self::ObservationDependent(t) => &t[x],
        }
    }

    pub fn get(&self, x: usize, y: usize, a: usize) -> f64 {
        self.slice(x)[y][a]
    }

    pub fn scaled(&self, c: f64) -> Self {
        let scale = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.iter().map(|r| r.iter().map(|v| v * c).collect()).collect()
        };
        match self {
            Self::ObservationIndependent(t) => Self::ObservationIndependent(scale(t)),
            Self::ObservationDependent(t) => Self::ObservationDependent(t.iter().map(scale).collect()),
        }
    }

    pub(crate) fn check_space(&self, mx: usize, my: usize) -> Result<()> {
        if self.num_outcomes() != my {
            return Err(Error::DimensionMismatch(format!(
                "loss covers {} outcomes, space has {my}",
                self.num_outcomes()
            )));
        }
        if let Some(n) = self.num_observations() {
            if n != mx {
                return Err(Error::DimensionMismatch(format!(
                    "loss covers {n} observations, space has {mx}"
                )));
            }
        }
        Ok(())
    }
}

/// `weight * loss` with `0 * inf = 0`.
pub(crate) fn weighted(weight: f64, loss: f64) -> f64 {
    if weight == 0.0 {
        0.0
    } else {
        weight * loss
    }
}

/// Expected loss of a mixture over actions under a distribution over outcomes.
pub(crate) fn action_mixture_loss(
    dist_y: &[f64],
    mixture: &[f64],
    table: &[Vec<f64>],
) -> f64 {
    dist_y
        .iter()
        .zip(table)
        .map(|(&py, row)| {
            let inner: f64 = mixture
                .iter()
                .zip(row)
                .map(|(&pa, &l)| weighted(pa, l))
                .sum();
            weighted(py, inner)
        })
        .sum()
}

/// A randomized rule: one distribution over actions per observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    rows: Vec<FiniteDistribution>,
}

impl DecisionRule {
    pub fn new(rows: Vec<FiniteDistribution>) -> Result<Self> {
        let na = rows.first().ok_or(Error::EmptyList)?.len();
        if rows.iter().any(|r| r.len() != na) {
            return Err(Error::DimensionMismatch("rows differ in action count".into()));
        }
        Ok(Self { rows })
    }

    /// Always plays `action`.
    pub fn constant(mx: usize, num_actions: usize, action: usize) -> Result<Self> {
        let row = FiniteDistribution::point_mass(num_actions, action)?;
        Self::new(vec![row; mx])
    }

    /// Plays `actions[x]` after observing `x`.
    pub fn deterministic(actions: &[usize], num_actions: usize) -> Result<Self> {
        Self::new(
            actions
                .iter()
                .map(|&a| FiniteDistribution::point_mass(num_actions, a))
                .collect::<Result<_>>()?,
        )
    }

    /// Row-wise convex combination of rules.
    pub fn mixture(parts: &[(f64, &DecisionRule)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or(Error::EmptyList)?;
        let (mx, na) = (first.num_observations(), first.num_actions());
        let mut acc = vec![vec![0.0; na]; mx];
        for (w, rule) in parts {
            if rule.num_observations() != mx || rule.num_actions() != na {
                return Err(Error::DimensionMismatch("mixture components differ".into()));
            }
            for (row, r) in acc.iter_mut().zip(&rule.rows) {
                for (v, p) in row.iter_mut().zip(r.weights()) {
                    *v += w * p;
                }
            }
        }
        Self::new(
            acc.into_iter()
                .map(FiniteDistribution::new)
                .collect::<Result<_>>()?,
        )
    }

    pub fn num_observations(&self) -> usize {
        self.rows.len()
    }

    pub fn num_actions(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &FiniteDistribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[FiniteDistribution] {
        &self.rows
    }

    /// The action played at each observation, if every row is a point mass.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| r.weights().iter().position(|&w| w == 1.0))
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows.len() != other.rows.len() {
            return f64::INFINITY;
        }
        self.rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Writes the rule as a mixture of deterministic rules: repeatedly take the
    /// heaviest remaining action at every observation. Weights below `tol` are
    /// dropped; parts come back sorted by action vector.
    pub fn decompose(&self, tol: f64) -> Vec<(f64, Vec<usize>)> {
        let mut rest: Vec<Vec<f64>> = self.rows.iter().map(|r| r.weights().to_vec()).collect();
        let mut parts = Vec::new();
        while !rest.is_empty() {
            let actions: Vec<usize> = rest
                .iter()
                .map(|r| (0..r.len()).fold(0, |best, a| if r[a] > r[best] { a } else { best }))
                .collect();
            let w = rest.iter().zip(&actions).map(|(r, &a)| r[a]).fold(f64::INFINITY, f64::min);
            if w.is_nan() || w <= tol {
                break;
            }
            for (r, &a) in rest.iter_mut().zip(&actions) {
                r[a] -= w;
            }
            parts.push((w, actions));
        }
        parts.sort_by(|a, b| a.1.cmp(&b.1));
        parts
    }
}

/// Every deterministic rule over `mx` observations and `num_actions` actions,
/// in lexicographic order of the action vector (observation 0 most significant).
pub fn deterministic_rules(mx: usize, num_actions: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = num_actions.checked_pow(mx as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut code| {
        let mut actions = vec![0; mx];
        for slot in actions.iter_mut().rev() {
            *slot = code % num_actions;
            code /= num_actions;
        }
        actions
    })
}

pub(crate) fn check_rule(joint: &JointDistribution, rule: &DecisionRule, loss: &LossSpec) -> Result<()> {
    let (mx, my) = joint.dims();
    loss.check_space(mx, my)?;
    if rule.num_observations() != mx {
        return Err(Error::DimensionMismatch(format!(
            "rule has {} rows, space has {mx} observations",
            rule.num_observations()
        )));
    }
    if rule.num_actions() != loss.num_actions() {
        return Err(Error::DimensionMismatch(format!(
            "rule mixes {} actions, loss has {}",
            rule.num_actions(),
            loss.num_actions()
        )));
    }
    Ok(())
}

/// `sum_{x,y} Pr(x,y) sum_a rule(x)(a) loss(x,y,a)`.
pub fn expected_loss(joint: &JointDistribution, rule: &DecisionRule, loss: &LossSpec) -> Result<f64> {
    check_rule(joint, rule, loss)?;
    Ok((0..joint.mx())
        .map(|x| action_mixture_loss(joint.row(x), rule.row(x).weights(), loss.slice(x)))
        .sum())
}

/// Expected loss of every pure action under a distribution over outcomes.
pub fn action_losses(prior_y: &FiniteDistribution, table: &[Vec<f64>]) -> Vec<f64> {
    let na = table[0].len();
    (0..na)
        .map(|a| {
            prior_y
                .weights()
                .iter()
                .zip(table)
                .map(|(&p, row)| weighted(p, row[a]))
                .sum()
        })
        .collect()
}

/// Bayes action for a known distribution over `Y`; lowest index wins ties.
pub fn optimal_action(prior_y: &FiniteDistribution, loss: &LossSpec) -> Result<(usize, f64)> {
    let LossSpec::ObservationIndependent(table) = loss else {
        return Err(Error::ObservationDependentLoss);
    };
    if table.len() != prior_y.len() {
        return Err(Error::DimensionMismatch(format!(
            "prior has {} outcomes, loss has {}",
            prior_y.len(),
            table.len()
        )));
    }
    let losses = action_losses(prior_y, table);
    let mut best = 0;
    for (a, &v) in losses.iter().enumerate().skip(1) {
        if v < losses[best] {
            best = a;
        }
    }
    Ok((best, losses[best]))
}

/// The rule that ignores the observation and always plays the prior-optimal action.
pub fn ignore_rule(prior_y: &FiniteDistribution, loss: &LossSpec, mx: usize) -> Result<DecisionRule> {
    let (a, _) = optimal_action(prior_y, loss)?;
    DecisionRule::constant(mx, loss.num_actions(), a)
}

/// Largest difference, over the vertices of `credal`, between the true
/// expected loss of the prior-optimal action and the loss the agent expects
/// from the prior alone. Zero whenever every vertex has Y-marginal `prior_y`.
pub fn reliability_gap(credal: &CredalSet, prior_y: &FiniteDistribution, loss: &LossSpec) -> Result<f64> {
    const MARGINAL_TOLERANCE: f64 = 1e-9;
    let (action, prior_value) = optimal_action(prior_y, loss)?;
    let rule = DecisionRule::constant(credal.mx(), loss.num_actions(), action)?;
    let mut gap: f64 = 0.0;
    for (i, v) in credal.vertices().iter().enumerate() {
        let deviation = v.marginal_y().max_abs_diff(prior_y);
        if deviation > MARGINAL_TOLERANCE {
            return Err(Error::MarginalMismatch { vertex: i, deviation });
        }
        let value = expected_loss(v, &rule, loss)?;
        let diff = if value == prior_value { 0.0 } else { (value - prior_value).abs() };
        gap = gap.max(diff);
    }
    Ok(gap)
}
