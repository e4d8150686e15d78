//! Dense two-phase tableau simplex for small linear programs.
//!
//! Minimizes `c^T x` subject to linear rows and `x >= 0`. Bland's rule is
//! used for both the entering and the leaving variable, so the method
//! terminates without cycling on degenerate problems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub tolerance: f64,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_pivots: 100_000,
        }
    }
}

impl LinearProgram {
    /// `minimize objective . x` over `x >= 0`.
    pub fn minimize(objective: Vec<f64>) -> Self {
        Self {
            num_vars: objective.len(),
            objective,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars, "row width must match variable count");
        self.rows.push((coeffs, relation, rhs));
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn with_objective(&self, objective: Vec<f64>) -> Self {
        assert_eq!(objective.len(), self.num_vars);
        Self {
            objective,
            ..self.clone()
        }
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.solve_with(SimplexOptions::default())
    }

    pub fn solve_with(&self, options: SimplexOptions) -> Result<LpSolution> {
        Tableau::build(self, options.tolerance).run(self, options)
    }
}

struct Tableau {
    /// `m` constraint rows, each `width + 1` long (last entry is the rhs).
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
    first_artificial: usize,
    tol: f64,
}

impl Tableau {
    fn build(lp: &LinearProgram, tol: f64) -> Self {
        let n = lp.num_vars;
        // normalize to rhs >= 0
        let normalized: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|(c, r, b)| {
                if *b < 0.0 {
                    let flipped = match r {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.iter().map(|v| -v).collect(), flipped, -b)
                } else {
                    (c.clone(), *r, *b)
                }
            })
            .collect();
        let num_slack = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let num_art = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let first_artificial = n + num_slack;
        let width = first_artificial + num_art;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut slack, mut art) = (n, first_artificial);
        for (coeffs, relation, rhs) in normalized {
            let mut row = vec![0.0; width + 1];
            row[..n].copy_from_slice(&coeffs);
            row[width] = rhs;
            match relation {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Self {
            rows,
            basis,
            width,
            first_artificial,
            tol,
        }
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: &mut [f64]) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = reduced[c];
        if f != 0.0 {
            for (v, p) in reduced.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            reduced[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for `cost` given the current basis; last entry is `-z`.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.width + 1];
        z[..cost.len()].copy_from_slice(cost);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost.get(b).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (v, a) in z.iter_mut().zip(row) {
                    *v -= cb * a;
                }
            }
        }
        z
    }

    /// Runs simplex iterations over columns `< allowed`. Returns pivots used.
    fn optimize(&mut self, reduced: &mut [f64], allowed: usize, budget: usize) -> Result<usize> {
        let tol = self.tol;
        for used in 0..budget {
            let Some(enter) = (0..allowed).find(|&j| reduced[j] < -tol) else {
                return Ok(used);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[enter];
                if a > tol {
                    let ratio = row[self.width] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - tol
                                || (ratio <= br + tol && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::NumericalFailure("linear program is unbounded".into()));
            };
            self.pivot(r, enter, reduced);
        }
        Err(Error::NumericalFailure("simplex pivot limit reached".into()))
    }

    fn run(mut self, lp: &LinearProgram, options: SimplexOptions) -> Result<LpSolution> {
        let mut pivots = 0;
        if self.first_artificial < self.width {
            let mut phase1_cost = vec![0.0; self.width];
            for c in phase1_cost.iter_mut().skip(self.first_artificial) {
                *c = 1.0;
            }
            let mut reduced = self.reduced_costs(&phase1_cost);
            pivots += self.optimize(&mut reduced, self.width, options.max_pivots)?;
            let infeasibility = -reduced[self.width];
            let scale = self
                .rows
                .iter()
                .map(|r| r[self.width].abs())
                .fold(1.0, f64::max);
            if infeasibility > self.tol * scale {
                return Err(Error::NumericalFailure(format!(
                    "linear program is infeasible (phase one residual {infeasibility:e})"
                )));
            }
            self.evict_artificials(&mut reduced);
        }
        let mut reduced = self.reduced_costs(&lp.objective);
        let budget = options.max_pivots.saturating_sub(pivots);
        pivots += self.optimize(&mut reduced, self.first_artificial, budget)?;

        let mut x = vec![0.0; lp.num_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < lp.num_vars {
                x[b] = row[self.width].max(0.0);
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, objective, pivots })
    }

    /// Pivots zero-level artificials out of the basis; drops redundant rows.
    fn evict_artificials(&mut self, reduced: &mut [f64]) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial).find(|&j| self.rows[i][j].abs() > self.tol);
                match col {
                    Some(c) => self.pivot(i, c, reduced),
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}
