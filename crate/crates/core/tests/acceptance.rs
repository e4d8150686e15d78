//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line
//! each, and exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use credal_core::bayes::{
    beta_probability, integration_oracle, predictive_odds, predictive_probability, uniform_predictive_odds,
    ContingencyCounts, DirichletProductPrior, EnumerationOptions, Estimate, HierarchicalPrior, PredictiveModel,
};
use credal_core::credal::detect_dilation;
use credal_core::decision::{action_losses, expected_loss, reliability_gap, DecisionRule, LossSpec};
use credal_core::experiments::{strategy_expected_loss, PriorSelector, StrategyId};
use credal_core::minimax::{
    best_deterministic_rule, global_minimax_rule, local_minimax_action, solve_matrix_game,
    time_inconsistency_report, CERTIFICATE_TOLERANCE,
};
use credal_core::{CredalSet, FiniteDistribution, MatrixGame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

/// Collects failed sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    total: usize,
    failures: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, || format!("{label}: got {got:.10}, want {want:.10} +- {tol:e}"));
    }
}

fn bernoulli(p: f64) -> FiniteDistribution {
    FiniteDistribution::bernoulli(p).unwrap()
}

fn marginal_fixed(p: f64, mx: usize) -> CredalSet {
    CredalSet::marginal_fixed(&bernoulli(p), mx).unwrap()
}

fn criterion_1(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for i in 0..100 {
        let (mx, my, na) = (rng.gen_range(1..=3), rng.gen_range(2..=3), rng.gen_range(1..=3));
        let prior = random_prior(&mut rng, my, 0.05, 0.95);
        let loss = LossSpec::independent(random_table(&mut rng, my, na)).unwrap();
        let credal = CredalSet::marginal_fixed(&prior, mx).unwrap();
        let value = global_minimax_rule(&credal, &loss).unwrap().value;
        let best = action_losses(&prior, loss.slice(0)).into_iter().fold(f64::INFINITY, f64::min);
        c.close(&format!("instance {i} ({mx}x{my}, {na} actions)"), value, best, 1e-6);
    }
}

fn criterion_2(c: &mut Checks) {
    let loss = LossSpec::zero_one(2);
    for p in [0.1, 0.3, 0.5, 0.7] {
        let credal = marginal_fixed(p, 2);
        let report = time_inconsistency_report(&credal, &loss).unwrap();
        c.close(&format!("p={p} global value"), report.global.value, p.min(1.0 - p), 1e-9);
        for x in 0..2 {
            let local = local_minimax_action(&credal, x, &loss).unwrap();
            for a in 0..2 {
                c.close(&format!("p={p} x={x} local mixture[{a}]"), local.mixture.prob(a), 0.5, 1e-6);
            }
            c.close(&format!("p={p} x={x} local value"), local.value, 0.5, 1e-6);
        }
        let d = detect_dilation(&credal, &[1]).unwrap();
        for (x, i) in d.per_x.iter().enumerate() {
            c.check(i.lower < d.prior.lower && i.upper > d.prior.upper, || format!("p={p}: no dilation at x={x}"));
        }
        if p != 0.5 {
            c.check(!report.consistent, || format!("p={p}: reported time-consistent"));
        }
    }
}

fn criterion_3(c: &mut Checks) {
    for p in [0.2, 0.5, 0.8] {
        let prior = DirichletProductPrior::uniform(p, 2).unwrap();
        let one = ContingencyCounts::from_pairs(2, &[(1, 1)]).unwrap();
        let closed = 4.0 * p / (p + 3.0);
        let got = predictive_probability(&prior, &one, 1).unwrap();
        c.close(&format!("p={p} predictive vs 4p/(p+3)"), got, closed, 1e-12 * closed);
        c.close(&format!("p={p} predictive vs quadrature"), got, integration_oracle(&prior, &one, 1).unwrap(), 1e-3);
        for k in 0..2 {
            let empty = predictive_probability(&prior, &ContingencyCounts::empty(2), k).unwrap();
            c.check(empty == p, || format!("p={p} k={k}: empty-counts predictive {empty} != p"));
        }
    }
}

fn criterion_4(c: &mut Checks) {
    let alpha = 1.4;
    let la = LossSpec::asymmetric(alpha).unwrap();
    let opts = EnumerationOptions::default();
    let prior = DirichletProductPrior::uniform(0.5, 2).unwrap();
    let beta = beta_probability(&independent_uniform(), 4, &la, &prior, &opts).unwrap();
    c.check(beta.std_error.is_none(), || "beta not computed by exact enumeration".into());
    let b = beta.value;
    c.check((0.33..=0.37).contains(&b), || format!("beta = {b:.10} outside [0.33, 0.37]"));
    let relative = b * (alpha - 1.0) / 2.0 / 0.5;
    c.check((0.13..=0.15).contains(&relative), || {
        format!("relative gap = {:.4}% outside [13%, 15%]", 100.0 * relative)
    });

    let bayes = StrategyId::Bayes(PriorSelector::Uniform);
    let corr = fully_correlated();
    let lb = strategy_expected_loss(&corr, &bayes, 4, &la, &opts).unwrap().value;
    let li = strategy_expected_loss(&corr, &StrategyId::Ignore, 4, &la, &opts).unwrap().value;
    c.check(lb == 0.0, || format!("correlated Bayes loss {lb} != 0"));
    c.check(li == 0.5, || format!("correlated Ignore loss {li} != 0.5"));
    c.check(li - lb == 0.5, || format!("correlated gap {} != 0.5", li - lb));
}

fn is_constant(rule: &DecisionRule, action: usize, tol: f64) -> bool {
    rule.rows().iter().all(|r| (r.prob(action) - 1.0).abs() <= tol)
}

fn criterion_5(c: &mut Checks) {
    let l = LossSpec::observation_scaled();
    for p in [0.2, 0.8] {
        let credal = marginal_fixed(p, 2);
        let sol = global_minimax_rule(&credal, &l).unwrap();
        let argmax = usize::from(p > 0.5);
        c.close(&format!("L p={p} value"), sol.value, 2.0 * p.min(1.0 - p), 1e-6);
        c.check(is_constant(&sol.rule, argmax, 1e-6), || format!("L p={p}: rule is not constant {argmax}"));
        let (_, det) = best_deterministic_rule(&credal, &l).unwrap();
        c.close(&format!("L p={p} deterministic vs LP"), det, sol.value, 1e-7);
    }

    let lp = LossSpec::mismatch_weighted();
    let third = 1.0 / 3.0;
    for p in [0.4, 0.5, 0.6] {
        let credal = marginal_fixed(p, 2);
        let report = time_inconsistency_report(&credal, &lp).unwrap();
        c.close(&format!("L' p={p} value"), report.global.value, 2.0 * third, 1e-6);
        // one third on trusting the observation, two thirds on contradicting it
        for x in 0..2 {
            c.close(&format!("L' p={p} rule weight on x at x={x}"), report.global.rule.row(x).prob(x), third, 1e-6);
        }
        c.check(report.consistent, || format!("L' p={p}: reported time-inconsistent"));
    }
    let credal = marginal_fixed(0.2, 2);
    let sol = global_minimax_rule(&credal, &lp).unwrap();
    c.close("L' p=0.2 value", sol.value, 0.4, 1e-6);
    c.check(is_constant(&sol.rule, 0, 1e-6), || "L' p=0.2: rule is not constant 0".into());
    for x in 0..2 {
        let local = local_minimax_action(&credal, x, &lp).unwrap();
        c.close(&format!("L' local weight on observed {x}"), local.mixture.prob(x), third, 1e-6);
    }
    let zero_one = time_inconsistency_report(&marginal_fixed(0.3, 2), &LossSpec::zero_one(2)).unwrap();
    c.check(!zero_one.consistent, || "0/1 loss reported time-consistent".into());
}

fn criterion_6(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for i in 0..50 {
        let (mx, my, na) = (rng.gen_range(1..=3), rng.gen_range(2..=3), rng.gen_range(1..=3));
        let prior = random_prior(&mut rng, my, 0.05, 0.95);
        let loss = LossSpec::independent(random_table(&mut rng, my, na)).unwrap();
        let credal = CredalSet::marginal_fixed(&prior, mx).unwrap();
        let gap = reliability_gap(&credal, &prior, &loss).unwrap();
        c.check(gap <= 1e-12, || format!("instance {i}: gap {gap:e}"));
    }
}

fn criterion_7(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for i in 0..50 {
        let m = rng.gen_range(1..=4);
        let p = rng.gen_range(0.02..0.98);
        let counts = ContingencyCounts::new((0..m).map(|_| [rng.gen_range(0..15), rng.gen_range(0..15)]).collect()).unwrap();
        let prior = DirichletProductPrior::uniform(p, m).unwrap();
        for k in 0..m {
            let general = predictive_odds(&prior, &counts, k).unwrap();
            let special = uniform_predictive_odds(p, &counts, k).unwrap();
            c.close(&format!("instance {i} k={k} odds"), general, special, 1e-12 * special.max(1.0));
        }
    }
    for m in 1..=4 {
        let j = DirichletProductPrior::jeffreys(0.3, m).unwrap();
        c.check(j.a().iter().chain(j.b()).all(|&v| v == 0.5), || format!("jeffreys m={m} parameters not all 1/2"));
    }
    for p in [0.1, 0.5, 0.77] {
        for m in 1..=3 {
            let h = HierarchicalPrior::even(p, m).unwrap();
            for k in 0..m {
                let v = h.predictive(&ContingencyCounts::empty(m), k).unwrap();
                c.close(&format!("hierarchical p={p} m={m} k={k} empty counts"), v, p, 1e-12);
            }
        }
    }
}

fn margin(e: &Estimate) -> f64 {
    4.0 * e.std_error.unwrap_or(0.0)
}

fn criterion_8(c: &mut Checks) {
    let la = LossSpec::asymmetric(1.4).unwrap();
    let prior = DirichletProductPrior::uniform(0.5, 2).unwrap();
    let opts = EnumerationOptions::default();
    let b4 = beta_probability(&independent_uniform(), 4, &la, &prior, &opts).unwrap();
    let b64 = beta_probability(&independent_uniform(), 64, &la, &prior, &opts).unwrap();
    c.check(b64.value + margin(&b64) < 0.1, || format!("beta(64) = {:.6} not below 0.1", b64.value));
    c.check(b64.value + margin(&b64) < b4.value - margin(&b4), || {
        format!("beta(64) = {:.6} not below beta(4) = {:.6}", b64.value, b4.value)
    });
}

fn criterion_9(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for i in 0..20 {
        let game = MatrixGame::new(random_table(&mut rng, 3, 3)).unwrap();
        let lp = solve_matrix_game(&game, CERTIFICATE_TOLERANCE).unwrap();
        c.close(&format!("game {i} vs grid"), lp.value, grid_game_value(&game, 600), 1e-3);
    }
    for i in 0..10 {
        let (mx, my, na) = (rng.gen_range(1..=3), rng.gen_range(2..=3), rng.gen_range(1..=3));
        let joint = random_joint(&mut rng, mx, my);
        let loss = LossSpec::independent(random_table(&mut rng, my, na)).unwrap();
        let rule = DecisionRule::new((0..mx).map(|_| random_distribution(&mut rng, na)).collect()).unwrap();
        let exact = expected_loss(&joint, &rule, &loss).unwrap();
        let (mean, se) = monte_carlo_loss(&joint, &rule, &loss, 40_000, &mut rng);
        c.check((exact - mean).abs() <= 3.0 * se, || format!("expected loss {i}: {exact} vs {mean} +- {se}"));
    }
    let la = LossSpec::asymmetric(1.4).unwrap();
    let opts = EnumerationOptions::default();
    for joint in [independent_uniform(), fully_correlated(), random_joint(&mut rng, 2, 2)] {
        let prior = DirichletProductPrior::uniform(joint.marginal_y().prob(1), 2).unwrap();
        for n in 0..=4u32 {
            let fast = beta_probability(&joint, n as u64, &la, &prior, &opts).unwrap().value;
            let slow = raw_sequence_beta(&joint, n, &la, &prior as &dyn PredictiveModel);
            c.close(&format!("beta n={n} count tables vs sequences"), fast, slow, 1e-12);
        }
    }
}

type Criterion = (u32, &'static str, fn(&mut Checks));

const CRITERIA: [Criterion; 9] = [
    (1, "minimax equals prior-optimal action, 100 random instances", criterion_1),
    (2, "0/1 loss: dilation and local vs global minimax", criterion_2),
    (3, "predictive after one observation, 4p/(p+3)", criterion_3),
    (4, "misprediction probability and loss gap", criterion_4),
    (5, "observation-dependent losses L and L'", criterion_5),
    (6, "reliability of the ignoring agent, 50 random sets", criterion_6),
    (7, "prior-family identities", criterion_7),
    (8, "consistency trend of the misprediction probability", criterion_8),
    (9, "oracle agreements", criterion_9),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for (id, name, run) in CRITERIA {
        let mut checks = Checks::default();
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&mut checks)));
        let (pass, detail) = match outcome {
            Err(_) => (false, "panicked".to_string()),
            Ok(()) if checks.failures.is_empty() => (true, format!("{} checks", checks.total)),
            Ok(()) => (
                false,
                format!("{}/{} checks failed: {}", checks.failures.len(), checks.total, checks.failures.join("; ")),
            ),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {id}: {} - {name} ({detail})", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {}/{} criteria pass", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
