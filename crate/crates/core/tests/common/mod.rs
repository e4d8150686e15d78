//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use credal_core::bayes::{bayes_predict, ContingencyCounts, PredictiveModel};
use credal_core::decision::{DecisionRule, LossSpec};
use credal_core::{FiniteDistribution, JointDistribution, MatrixGame};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Misprediction probability by brute force over all `(2 mx)^n` ordered
/// samples. The optimal set at `k` is recomputed here from the raw joint.
pub fn raw_sequence_beta(joint: &JointDistribution, n: u32, loss: &LossSpec, model: &dyn PredictiveModel) -> f64 {
    let mx = joint.mx();
    let cells = 2 * mx;
    let flat = joint.flat();
    let px: Vec<f64> = (0..mx).map(|k| flat[2 * k] + flat[2 * k + 1]).collect();
    let optimal: Vec<[bool; 2]> = (0..mx)
        .map(|k| {
            if px[k] == 0.0 {
                return [true, true];
            }
            let (q0, q1) = (flat[2 * k] / px[k], flat[2 * k + 1] / px[k]);
            let l = |a: usize| q0 * loss.get(k, 0, a) + q1 * loss.get(k, 1, a);
            let (l0, l1) = (l(0), l(1));
            let slack = 1e-12 * l0.min(l1).abs().max(1.0);
            [l0 <= l1 + slack, l1 <= l0 + slack]
        })
        .collect();
    let mut beta = 0.0;
    let mut seq = vec![0usize; n as usize];
    loop {
        let weight: f64 = seq.iter().map(|&c| flat[c]).product();
        if weight > 0.0 {
            let pairs: Vec<(usize, usize)> = seq.iter().map(|&c| (c / 2, c % 2)).collect();
            let counts = ContingencyCounts::from_pairs(mx, &pairs).unwrap();
            for k in 0..mx {
                if px[k] > 0.0 {
                    let a = bayes_predict(model, &counts, k, loss).unwrap();
                    if !optimal[k][a] {
                        beta += weight * px[k];
                    }
                }
            }
        }
        // odometer over sequences
        let mut i = 0;
        loop {
            if i == seq.len() {
                return beta;
            }
            seq[i] += 1;
            if seq[i] < cells {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Row-player value of a 3-row game by exhaustive search over a simplex grid.
pub fn grid_game_value(game: &MatrixGame, steps: usize) -> f64 {
    assert_eq!(game.rows(), 3);
    let a = game.payoff();
    let h = 1.0 / steps as f64;
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let w = [i as f64 * h, j as f64 * h, (steps - i - j) as f64 * h];
            let worst = (0..game.cols())
                .map(|c| w[0] * a[0][c] + w[1] * a[1][c] + w[2] * a[2][c])
                .fold(f64::NEG_INFINITY, f64::max);
            best = best.min(worst);
        }
    }
    best
}

/// Mean and standard error of the realized loss of `rule` over `samples` draws.
pub fn monte_carlo_loss(
    joint: &JointDistribution,
    rule: &DecisionRule,
    loss: &LossSpec,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    let flat = joint.flat();
    let my = joint.my();
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut cell = flat.len() - 1;
        for (c, &w) in flat.iter().enumerate() {
            acc += w;
            if u < acc {
                cell = c;
                break;
            }
        }
        let (x, y) = (cell / my, cell % my);
        let v: f64 = rule.row(x).weights().iter().enumerate().map(|(a, &w)| w * loss.get(x, y, a)).sum();
        s += v;
        s2 += v * v;
    }
    let n = samples as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean).max(0.0) / n).sqrt())
}

pub fn random_distribution(rng: &mut ChaCha8Rng, len: usize) -> FiniteDistribution {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let head: f64 = w[..len - 1].iter().sum();
    w[len - 1] = 1.0 - head;
    FiniteDistribution::new(w).unwrap()
}

/// A Y-marginal with every entry in `(lo, hi)`.
pub fn random_prior(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> FiniteDistribution {
    loop {
        let d = random_distribution(rng, len);
        if d.weights().iter().all(|&w| w > lo && w < hi) {
            return d;
        }
    }
}

pub fn random_joint(rng: &mut ChaCha8Rng, mx: usize, my: usize) -> JointDistribution {
    let d = random_distribution(rng, mx * my);
    JointDistribution::from_flat(mx, my, d.weights().to_vec()).unwrap()
}

pub fn random_table(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.gen::<f64>()).collect()).collect()
}

pub fn independent_uniform() -> JointDistribution {
    JointDistribution::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap()
}

pub fn fully_correlated() -> JointDistribution {
    JointDistribution::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap()
}
