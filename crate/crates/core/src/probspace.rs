//! Finite probability spaces.
//!
//! Outcomes are 0-based indices. A [`JointDistribution`] is stored row-major
//! with the observation `x` as the row and the predicted quantity `y` as the
//! column, so `table[x][y] = Pr(X = x, Y = y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs must sum to one within this tolerance; nothing is renormalized.
pub const SUM_TOLERANCE: f64 = 1e-12;

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidDistribution("no outcomes".into()));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::InvalidDistribution(format!(
            "weight {i} is {w}; weights must be finite and nonnegative"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// A probability distribution over `{0, .., len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FiniteDistribution {
    weights: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Self { weights })
    }

    pub fn point_mass(len: usize, at: usize) -> Result<Self> {
        if at >= len {
            return Err(Error::InvalidDistribution(format!(
                "point mass at {at} outside {len} outcomes"
            )));
        }
        let mut weights = vec![0.0; len];
        weights[at] = 1.0;
        Ok(Self { weights })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        Ok(Self {
            weights: vec![1.0 / len as f64; len],
        })
    }

    /// Two-point distribution `(1 - p, p)`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!("p = {p} not in [0, 1]")));
        }
        Ok(Self {
            weights: vec![1.0 - p, p],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability of an event given as a set of outcome indices.
    /// Duplicate indices are counted once.
    pub fn event_probability(&self, event: &[usize]) -> f64 {
        let mut seen = vec![false; self.len()];
        let mut total = 0.0;
        for &i in event {
            if i < self.len() && !seen[i] {
                seen[i] = true;
                total += self.weights[i];
            }
        }
        total
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for FiniteDistribution {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<FiniteDistribution> for Vec<f64> {
    fn from(d: FiniteDistribution) -> Self {
        d.weights
    }
}

/// A probability table over `X x Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct JointDistribution {
    mx: usize,
    my: usize,
    table: Vec<f64>,
}

impl JointDistribution {
    /// Build from rows indexed by `x`, each row indexed by `y`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let mx = rows.len();
        let my = rows.first().map_or(0, Vec::len);
        if mx == 0 || my == 0 {
            return Err(Error::InvalidDistribution("empty table".into()));
        }
        if rows.iter().any(|r| r.len() != my) {
            return Err(Error::InvalidDistribution("ragged table".into()));
        }
        Self::from_flat(mx, my, rows.into_iter().flatten().collect())
    }

    pub fn from_flat(mx: usize, my: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != mx * my || mx == 0 || my == 0 {
            return Err(Error::InvalidDistribution(format!(
                "table of {} entries does not match {mx}x{my}",
                table.len()
            )));
        }
        check_weights(&table)?;
        Ok(Self { mx, my, table })
    }

    /// Product of an X-marginal and a Y-marginal.
    pub fn independent(px: &FiniteDistribution, py: &FiniteDistribution) -> Self {
        let table = px
            .weights()
            .iter()
            .flat_map(|&a| py.weights().iter().map(move |&b| a * b))
            .collect();
        Self {
            mx: px.len(),
            my: py.len(),
            table,
        }
    }

    /// Convex combination of joints over the same space.
    pub fn mixture(parts: &[(f64, &JointDistribution)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or(Error::EmptyList)?;
        let (mx, my) = first.dims();
        let mut table = vec![0.0; mx * my];
        for (w, j) in parts {
            if j.dims() != (mx, my) {
                return Err(Error::DimensionMismatch("mixture components differ".into()));
            }
            for (t, v) in table.iter_mut().zip(&j.table) {
                *t += w * v;
            }
        }
        Self::from_flat(mx, my, table)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.mx, self.my)
    }

    pub fn mx(&self) -> usize {
        self.mx
    }

    pub fn my(&self) -> usize {
        self.my
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.my + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.table[x * self.my..(x + 1) * self.my]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.table.chunks(self.my).map(<[f64]>::to_vec).collect()
    }

    pub fn flat(&self) -> &[f64] {
        &self.table
    }

    /// `Pr(X = x)`, summed exactly in row order.
    pub fn x_mass(&self, x: usize) -> f64 {
        self.row(x).iter().sum()
    }

    pub fn marginal_x(&self) -> FiniteDistribution {
        FiniteDistribution {
            weights: (0..self.mx).map(|x| self.x_mass(x)).collect(),
        }
    }

    pub fn marginal_y(&self) -> FiniteDistribution {
        FiniteDistribution {
            weights: (0..self.my)
                .map(|y| (0..self.mx).map(|x| self.get(x, y)).sum())
                .collect(),
        }
    }

    /// `Pr(Y = . | X = x)`.
    pub fn condition_on_x(&self, x: usize) -> Result<FiniteDistribution> {
        if x >= self.mx {
            return Err(Error::DimensionMismatch(format!(
                "observation {x} outside {} values",
                self.mx
            )));
        }
        let mass = self.x_mass(x);
        if mass == 0.0 {
            return Err(Error::ZeroMassEvent { x });
        }
        Ok(FiniteDistribution {
            weights: self.row(x).iter().map(|v| v / mass).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dims() != other.dims() {
            return f64::INFINITY;
        }
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<f64>>> for JointDistribution {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<JointDistribution> for Vec<Vec<f64>> {
    fn from(j: JointDistribution) -> Self {
        j.rows()
    }
}

/// Inverse-CDF draw of an index from nonnegative weights summing to one.
/// Consumes exactly one uniform from `rng`.
pub fn sample_index<R: rand::Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Draw one `(x, y)` pair from a joint.
pub fn sample_pair<R: rand::Rng + ?Sized>(joint: &JointDistribution, rng: &mut R) -> (usize, usize) {
    let c = sample_index(joint.flat(), rng);
    (c / joint.my(), c % joint.my())
}

pub(crate) fn check_open_unit(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::DegenerateMarginal { p })
    }
}

/// Joint over `X x {0, 1}` with `Pr(Y = 1) = p`, `Pr(X = j | Y = 1) = alpha[j]`
/// and `Pr(X = j | Y = 0) = beta[j]`.
pub fn make_joint(
    p: f64,
    alpha: &FiniteDistribution,
    beta: &FiniteDistribution,
) -> Result<JointDistribution> {
    check_open_unit(p)?;
    if alpha.len() != beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "alpha has {} entries, beta has {}",
            alpha.len(),
            beta.len()
        )));
    }
    let q = 1.0 - p;
    let table = alpha
        .weights()
        .iter()
        .zip(beta.weights())
        .flat_map(|(&a, &b)| [b * q, a * p])
        .collect();
    Ok(JointDistribution {
        mx: alpha.len(),
        my: 2,
        table,
    })
}
