//! Credal sets in vertex representation, lower/upper probabilities and dilation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probspace::{FiniteDistribution, JointDistribution};

/// Default cap on the number of generated vertices.
pub const DEFAULT_VERTEX_CAP: u128 = 1_000_000;

/// The convex hull of a nonempty list of joints over a common space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalSet {
    vertices: Vec<JointDistribution>,
}

impl CredalSet {
    pub fn new(vertices: Vec<JointDistribution>) -> Result<Self> {
        let dims = vertices.first().ok_or(Error::EmptyList)?.dims();
        if vertices.iter().any(|v| v.dims() != dims) {
            return Err(Error::DimensionMismatch("vertices over different spaces".into()));
        }
        Ok(Self { vertices })
    }

    pub fn singleton(joint: JointDistribution) -> Self {
        Self { vertices: vec![joint] }
    }

    /// All joints on `X x Y` whose Y-marginal is `prior_y`, with `mx` values for `X`.
    pub fn marginal_fixed(prior_y: &FiniteDistribution, mx: usize) -> Result<Self> {
        Self::marginal_fixed_with_cap(prior_y, mx, DEFAULT_VERTEX_CAP)
    }

    /// The extreme points are the joints `Pr(x, y) = Pr_Y(y) [x = f(y)]`, one
    /// per map `f: Y -> X`: the conditionals of `X` given each `y` range over
    /// a product of simplices, whose vertices are products of point masses.
    pub fn marginal_fixed_with_cap(prior_y: &FiniteDistribution, mx: usize, cap: u128) -> Result<Self> {
        if mx == 0 {
            return Err(Error::InvalidParameter("observation space is empty".into()));
        }
        if let Some(&w) = prior_y.weights().iter().find(|&&w| w == 0.0 || w == 1.0) {
            return Err(Error::DegenerateMarginal { p: w });
        }
        let my = prior_y.len();
        let count = (mx as u128)
            .checked_pow(my as u32)
            .unwrap_or(u128::MAX);
        if count > cap {
            return Err(Error::SizeOverflow { count, cap });
        }
        let mut vertices = Vec::with_capacity(count as usize);
        let mut assignment = vec![0usize; my];
        for _ in 0..count {
            let mut table = vec![0.0; mx * my];
            for (y, &x) in assignment.iter().enumerate() {
                table[x * my + y] = prior_y.prob(y);
            }
            vertices.push(JointDistribution::from_flat(mx, my, table)?);
            // odometer over f, last y fastest
            for slot in assignment.iter_mut().rev() {
                *slot += 1;
                if *slot < mx {
                    break;
                }
                *slot = 0;
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[JointDistribution] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.vertices[0].dims()
    }

    pub fn mx(&self) -> usize {
        self.dims().0
    }

    pub fn my(&self) -> usize {
        self.dims().1
    }

    pub fn y_marginals(&self) -> Vec<FiniteDistribution> {
        self.vertices.iter().map(JointDistribution::marginal_y).collect()
    }

    /// Conditionals `Pr(. | X = x)` of the vertices that give `x` positive mass.
    pub fn conditional(&self, x: usize) -> Result<Vec<FiniteDistribution>> {
        conditional_credal(self, x)
    }
}

pub fn conditional_credal(credal: &CredalSet, x: usize) -> Result<Vec<FiniteDistribution>> {
    let mut out = Vec::new();
    for v in &credal.vertices {
        match v.condition_on_x(x) {
            Ok(c) => out.push(c),
            Err(Error::ZeroMassEvent { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::EverywhereZeroMass { x });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ProbabilityInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lower) || !(lower..=1.0).contains(&upper) {
            return Err(Error::InvalidParameter(format!(
                "[{lower}, {upper}] is not a probability interval"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Lower and upper probability of `event` over a list of distributions
/// (and therefore over their convex hull, since event probability is linear).
pub fn lower_upper(dists: &[FiniteDistribution], event: &[usize]) -> Result<ProbabilityInterval> {
    if dists.is_empty() {
        return Err(Error::EmptyList);
    }
    let (lower, upper) = dists
        .iter()
        .map(|d| d.event_probability(event).clamp(0.0, 1.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(ProbabilityInterval { lower, upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationMode {
    /// Both ends must move strictly outward at every observation.
    #[default]
    Strict,
    /// Both ends may stay put, but the interval must not shrink at either end.
    Weak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub prior: ProbabilityInterval,
    pub per_x: Vec<ProbabilityInterval>,
    pub dilated: bool,
}

/// Whether conditioning on every possible observation widens the interval
/// for `event` strictly at both ends.
pub fn detect_dilation(credal: &CredalSet, event: &[usize]) -> Result<DilationReport> {
    detect_dilation_with(credal, event, DilationMode::Strict)
}

pub fn detect_dilation_with(credal: &CredalSet, event: &[usize], mode: DilationMode) -> Result<DilationReport> {
    if let Some(&bad) = event.iter().find(|&&y| y >= credal.my()) {
        return Err(Error::DimensionMismatch(format!(
            "event index {bad} outside {} outcomes",
            credal.my()
        )));
    }
    let prior = lower_upper(&credal.y_marginals(), event)?;
    let per_x = (0..credal.mx())
        .map(|x| lower_upper(&conditional_credal(credal, x)?, event))
        .collect::<Result<Vec<_>>>()?;
    let widened = |c: &ProbabilityInterval| match mode {
        DilationMode::Strict => c.lower < prior.lower && c.upper > prior.upper,
        DilationMode::Weak => {
            c.lower <= prior.lower && c.upper >= prior.upper && c.width() > prior.width()
        }
    };
    let dilated = per_x.iter().all(widened);
    Ok(DilationReport { prior, per_x, dilated })
}
