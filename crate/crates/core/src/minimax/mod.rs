//! Worst-case expected loss, global and local minimax, and the
//! comparison between the two.
//!
//! Expected loss `E_Pr[L_delta]` is linear in `Pr`, so its supremum over the
//! convex hull of a credal set is attained at a vertex. Every maximization
//! here therefore runs over the vertex list only.

pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::credal::{conditional_credal, CredalSet};
use crate::decision::{action_mixture_loss, check_rule, expected_loss, weighted, DecisionRule, LossSpec};
use crate::error::{Error, Result};
use crate::probspace::FiniteDistribution;
use simplex::{LinearProgram, Relation};

/// Certification slack, relative to the largest finite payoff magnitude.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;

/// Vertices within this distance of the worst case are reported as attaining it.
const ATTAIN_TOLERANCE: f64 = 1e-9;

/// Zero-sum game: the row player minimizes, the column player maximizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixGame {
    payoff: Vec<Vec<f64>>,
}

impl MatrixGame {
    pub fn new(payoff: Vec<Vec<f64>>) -> Result<Self> {
        let cols = payoff.first().map_or(0, Vec::len);
        if payoff.is_empty() || cols == 0 {
            return Err(Error::InvalidParameter("empty payoff matrix".into()));
        }
        if payoff.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged payoff matrix".into()));
        }
        if payoff.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("payoff entries must be finite".into()));
        }
        Ok(Self { payoff })
    }

    pub fn rows(&self) -> usize {
        self.payoff.len()
    }

    pub fn cols(&self) -> usize {
        self.payoff[0].len()
    }

    pub fn payoff(&self) -> &[Vec<f64>] {
        &self.payoff
    }

    /// Expected payoff of a row mixture against each column.
    pub fn row_payoffs(&self, row_mix: &[f64]) -> Vec<f64> {
        (0..self.cols())
            .map(|j| row_mix.iter().zip(&self.payoff).map(|(p, r)| p * r[j]).sum())
            .collect()
    }

    /// Expected payoff of each row against a column mixture.
    pub fn col_payoffs(&self, col_mix: &[f64]) -> Vec<f64> {
        self.payoff
            .iter()
            .map(|r| r.iter().zip(col_mix).map(|(a, q)| a * q).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    pub row_strategy: FiniteDistribution,
    pub col_strategy: FiniteDistribution,
    /// Worst case of `row_strategy`; certified to be within tolerance of
    /// what `col_strategy` guarantees.
    pub value: f64,
    pub lower_bound: f64,
}

fn clean_mixture(raw: &[f64]) -> Result<FiniteDistribution> {
    let clipped: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::NumericalFailure("solver returned an empty mixture".into()));
    }
    FiniteDistribution::new(clipped.iter().map(|v| v / total).collect())
        .map_err(|e| Error::NumericalFailure(e.to_string()))
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Tiny distinct objective weights used on the retry after a failed certificate.
fn perturbation(n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|i| scale * 1e-10 * (1.0 + i as f64 / n.max(1) as f64)).collect()
}

fn solve_game_once(game: &MatrixGame, perturb: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let (m, n) = (game.rows(), game.cols());
    let a = game.payoff();
    let scale = a.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));

    // row player: variables x_0..x_{m-1}, t+ , t-
    let mut obj = vec![0.0; m + 2];
    obj[m] = 1.0;
    obj[m + 1] = -1.0;
    if perturb {
        for (o, e) in obj.iter_mut().zip(perturbation(m, scale)) {
            *o += e;
        }
    }
    let mut lp = LinearProgram::minimize(obj);
    for j in 0..n {
        let mut row: Vec<f64> = a.iter().map(|r| r[j]).collect();
        row.extend([-1.0, 1.0]);
        lp.add_row(row, Relation::Le, 0.0);
    }
    let mut sum = vec![1.0; m];
    sum.extend([0.0, 0.0]);
    lp.add_row(sum, Relation::Eq, 1.0);
    let rows = lp.solve()?.x[..m].to_vec();

    // column player: variables y_0..y_{n-1}, s+, s-; maximize s
    let mut obj = vec![0.0; n + 2];
    obj[n] = -1.0;
    obj[n + 1] = 1.0;
    if perturb {
        for (o, e) in obj.iter_mut().zip(perturbation(n, scale)) {
            *o += e;
        }
    }
    let mut lp = LinearProgram::minimize(obj);
    for r in a {
        let mut row: Vec<f64> = r.iter().map(|v| -v).collect();
        row.extend([1.0, -1.0]);
        lp.add_row(row, Relation::Le, 0.0);
    }
    let mut sum = vec![1.0; n];
    sum.extend([0.0, 0.0]);
    lp.add_row(sum, Relation::Eq, 1.0);
    let cols = lp.solve()?.x[..n].to_vec();
    Ok((rows, cols))
}

/// Minimax mixed strategies of a zero-sum game, certified by checking that
/// the row strategy's worst case and the column strategy's guarantee agree
/// within `tolerance`.
pub fn solve_matrix_game(game: &MatrixGame, tolerance: f64) -> Result<GameSolution> {
    let scale = game.payoff().iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));
    let mut last_gap = f64::NAN;
    let mut last_err = None;
    for perturb in [false, true] {
        let (rows, cols) = match solve_game_once(game, perturb) {
            Ok(r) => r,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let row_strategy = clean_mixture(&rows)?;
        let col_strategy = clean_mixture(&cols)?;
        let value = max_of(&game.row_payoffs(row_strategy.weights()));
        let lower_bound = min_of(&game.col_payoffs(col_strategy.weights()));
        last_gap = value - lower_bound;
        if last_gap <= tolerance * scale {
            return Ok(GameSolution {
                row_strategy,
                col_strategy,
                value,
                lower_bound,
            });
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::NumericalFailure(format!("game certificate failed: upper - lower = {last_gap:e}"))
    }))
}

/// `max` over vertices of the expected loss of `rule`, with the first
/// vertex attaining it.
pub fn worst_case_expected_loss(credal: &CredalSet, rule: &DecisionRule, loss: &LossSpec) -> Result<(f64, usize)> {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, v) in credal.vertices().iter().enumerate() {
        let value = expected_loss(v, rule, loss)?;
        if value > best.0 {
            best = (value, i);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxSolution {
    pub rule: DecisionRule,
    pub value: f64,
    /// Vertices whose expected loss under `rule` is within 1e-9 of `value`.
    pub worst_case_vertices: Vec<usize>,
    /// Guarantee certified by the adversary's mixture over vertices.
    pub lower_bound: f64,
    /// Least favourable mixture over the vertices.
    pub vertex_weights: Vec<f64>,
}

/// `C[v][x][a] = sum_y Pr_v(x, y) loss(x, y, a)`.
fn conditional_costs(credal: &CredalSet, loss: &LossSpec) -> Vec<Vec<Vec<f64>>> {
    let na = loss.num_actions();
    credal
        .vertices()
        .iter()
        .map(|v| {
            (0..v.mx())
                .map(|x| {
                    (0..na)
                        .map(|a| {
                            v.row(x)
                                .iter()
                                .enumerate()
                                .map(|(y, &p)| weighted(p, loss.get(x, y, a)))
                                .sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

struct RuleLp {
    /// `(x, a)` pairs that can carry probability (finite cost at every vertex).
    vars: Vec<(usize, usize)>,
}

fn solve_global_once(
    costs: &[Vec<Vec<f64>>],
    layout: &RuleLp,
    mx: usize,
    perturb: bool,
    scale: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nv = costs.len();
    let k = layout.vars.len();

    // primal: delta(x,a) for allowed pairs, t+, t-
    let mut obj = vec![0.0; k + 2];
    obj[k] = 1.0;
    obj[k + 1] = -1.0;
    if perturb {
        for (o, e) in obj.iter_mut().zip(perturbation(k, scale)) {
            *o += e;
        }
    }
    let mut lp = LinearProgram::minimize(obj);
    for c in costs {
        let mut row: Vec<f64> = layout.vars.iter().map(|&(x, a)| c[x][a]).collect();
        row.extend([-1.0, 1.0]);
        lp.add_row(row, Relation::Le, 0.0);
    }
    for x in 0..mx {
        let mut row: Vec<f64> = layout.vars.iter().map(|&(vx, _)| if vx == x { 1.0 } else { 0.0 }).collect();
        row.extend([0.0, 0.0]);
        lp.add_row(row, Relation::Eq, 1.0);
    }
    let delta = lp.solve()?.x[..k].to_vec();

    // dual: lambda_v, then u_x = u+_x - u-_x; maximize sum u_x
    let width = nv + 2 * mx;
    let mut obj = vec![0.0; width];
    for x in 0..mx {
        obj[nv + 2 * x] = -1.0;
        obj[nv + 2 * x + 1] = 1.0;
    }
    if perturb {
        for (o, e) in obj.iter_mut().zip(perturbation(nv, scale)) {
            *o += e;
        }
    }
    let mut lp = LinearProgram::minimize(obj);
    for &(x, a) in &layout.vars {
        let mut row: Vec<f64> = costs.iter().map(|c| -c[x][a]).collect();
        row.resize(width, 0.0);
        row[nv + 2 * x] = 1.0;
        row[nv + 2 * x + 1] = -1.0;
        lp.add_row(row, Relation::Le, 0.0);
    }
    let mut sum = vec![1.0; nv];
    sum.resize(width, 0.0);
    lp.add_row(sum, Relation::Eq, 1.0);
    let lambda = lp.solve()?.x[..nv].to_vec();
    Ok((delta, lambda))
}

/// Rule minimizing the worst-case expected loss over the credal set, chosen
/// before the observation is seen.
///
/// Solved as a linear program over `delta(x)(a)` and the bound `t`, with one
/// constraint `E_v[L_delta] <= t` per vertex. The dual program (adversary's
/// mixture over vertices) is solved separately and must certify the value.
pub fn global_minimax_rule(credal: &CredalSet, loss: &LossSpec) -> Result<MinimaxSolution> {
    let (mx, my) = credal.dims();
    loss.check_space(mx, my)?;
    let na = loss.num_actions();
    let costs = conditional_costs(credal, loss);

    let vars: Vec<(usize, usize)> = (0..mx)
        .flat_map(|x| (0..na).map(move |a| (x, a)))
        .filter(|&(x, a)| costs.iter().all(|c| c[x][a].is_finite()))
        .collect();
    if (0..mx).any(|x| !vars.iter().any(|&(vx, _)| vx == x)) {
        let rule = DecisionRule::constant(mx, na, 0)?;
        return Ok(MinimaxSolution {
            rule,
            value: f64::INFINITY,
            worst_case_vertices: (0..credal.len()).collect(),
            lower_bound: f64::INFINITY,
            vertex_weights: vec![1.0 / credal.len() as f64; credal.len()],
        });
    }
    let layout = RuleLp { vars };
    let scale = costs
        .iter()
        .flatten()
        .flatten()
        .filter(|v| v.is_finite())
        .fold(1.0f64, |s, v| s.max(v.abs()));

    let mut last_gap = f64::NAN;
    let mut last_err = None;
    for perturb in [false, true] {
        let (delta, lambda) = match solve_global_once(&costs, &layout, mx, perturb, scale) {
            Ok(r) => r,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let mut rows = vec![vec![0.0; na]; mx];
        for (&(x, a), &v) in layout.vars.iter().zip(&delta) {
            rows[x][a] = v;
        }
        let rule = DecisionRule::new(rows.iter().map(|r| clean_mixture(r)).collect::<Result<_>>()?)?;
        let per_vertex: Vec<f64> = credal
            .vertices()
            .iter()
            .map(|v| expected_loss(v, &rule, loss))
            .collect::<Result<_>>()?;
        let value = max_of(&per_vertex);

        let weights = clean_mixture(&lambda)?;
        let lower_bound: f64 = (0..mx)
            .map(|x| {
                layout
                    .vars
                    .iter()
                    .filter(|&&(vx, _)| vx == x)
                    .map(|&(_, a)| {
                        costs
                            .iter()
                            .zip(weights.weights())
                            .map(|(c, w)| w * c[x][a])
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        last_gap = value - lower_bound;
        if last_gap <= CERTIFICATE_TOLERANCE * scale {
            let worst_case_vertices = per_vertex
                .iter()
                .enumerate()
                .filter(|(_, &v)| v >= value - ATTAIN_TOLERANCE * scale)
                .map(|(i, _)| i)
                .collect();
            return Ok(MinimaxSolution {
                rule,
                value,
                worst_case_vertices,
                lower_bound,
                vertex_weights: weights.weights().to_vec(),
            });
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::NumericalFailure(format!("minimax certificate failed: upper - lower = {last_gap:e}"))
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSolution {
    pub observation: usize,
    pub mixture: FiniteDistribution,
    pub value: f64,
    /// Conditional distributions the adversary chooses from.
    pub conditionals: Vec<FiniteDistribution>,
}

/// Worst-case loss of an action mixture against a list of distributions over `Y`.
pub fn mixture_worst_case(conditionals: &[FiniteDistribution], mixture: &[f64], table: &[Vec<f64>]) -> f64 {
    conditionals
        .iter()
        .map(|c| action_mixture_loss(c.weights(), mixture, table))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Minimax action mixture after observing `x`, against the conditional credal set.
pub fn local_minimax_action(credal: &CredalSet, x: usize, loss: &LossSpec) -> Result<LocalSolution> {
    let (mx, my) = credal.dims();
    loss.check_space(mx, my)?;
    if x >= mx {
        return Err(Error::DimensionMismatch(format!("observation {x} outside {mx} values")));
    }
    let conditionals = conditional_credal(credal, x)?;
    let table = loss.slice(x);
    let na = loss.num_actions();
    let payoff: Vec<Vec<f64>> = (0..na)
        .map(|a| {
            let pure = FiniteDistribution::point_mass(na, a).expect("action in range");
            conditionals
                .iter()
                .map(|c| action_mixture_loss(c.weights(), pure.weights(), table))
                .collect()
        })
        .collect();
    let finite_actions: Vec<usize> = (0..na).filter(|&a| payoff[a].iter().all(|v| v.is_finite())).collect();
    if finite_actions.is_empty() {
        return Ok(LocalSolution {
            observation: x,
            mixture: FiniteDistribution::uniform(na)?,
            value: f64::INFINITY,
            conditionals,
        });
    }
    let game = MatrixGame::new(finite_actions.iter().map(|&a| payoff[a].clone()).collect())?;
    let solution = solve_matrix_game(&game, CERTIFICATE_TOLERANCE)?;
    let mut mixture = vec![0.0; na];
    for (&a, &w) in finite_actions.iter().zip(solution.row_strategy.weights()) {
        mixture[a] = w;
    }
    Ok(LocalSolution {
        observation: x,
        mixture: FiniteDistribution::new(mixture)?,
        value: solution.value,
        conditionals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalComparison {
    pub local: LocalSolution,
    /// Worst case of the global rule's row at this observation, against the
    /// conditional credal set.
    pub global_row_value: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeInconsistencyReport {
    pub global: MinimaxSolution,
    /// `None` where every vertex gives the observation zero mass.
    pub per_x: Vec<Option<LocalComparison>>,
    pub consistent: bool,
}

/// Agreement tolerance between the global row's local worst case and the local value.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;

/// Compares the plan made before observing with the decision made after.
/// The two agree at `x` when the global rule's row is itself a local minimax
/// mixture there, i.e. achieves the local minimax value.
pub fn time_inconsistency_report(credal: &CredalSet, loss: &LossSpec) -> Result<TimeInconsistencyReport> {
    let global = global_minimax_rule(credal, loss)?;
    let mut per_x = Vec::with_capacity(credal.mx());
    for x in 0..credal.mx() {
        let local = match local_minimax_action(credal, x, loss) {
            Ok(l) => l,
            Err(Error::EverywhereZeroMass { .. }) => {
                per_x.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let global_row_value = mixture_worst_case(&local.conditionals, global.rule.row(x).weights(), loss.slice(x));
        let agrees = global_row_value <= local.value + CONSISTENCY_TOLERANCE
            || (global_row_value.is_infinite() && local.value.is_infinite());
        per_x.push(Some(LocalComparison {
            local,
            global_row_value,
            agrees,
        }));
    }
    let consistent = per_x.iter().flatten().all(|c| c.agrees);
    Ok(TimeInconsistencyReport { global, per_x, consistent })
}

/// Best deterministic rule by exhaustive search; an oracle for the LP.
pub fn best_deterministic_rule(credal: &CredalSet, loss: &LossSpec) -> Result<(Vec<usize>, f64)> {
    let na = loss.num_actions();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for actions in crate::decision::deterministic_rules(credal.mx(), na) {
        let rule = DecisionRule::deterministic(&actions, na)?;
        check_rule(&credal.vertices()[0], &rule, loss)?;
        let (v, _) = worst_case_expected_loss(credal, &rule, loss)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((actions, v));
        }
    }
    best.ok_or(Error::EmptyList)
}
