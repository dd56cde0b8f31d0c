//! Dense two-phase revised simplex for `min cᵀx s.t. Gx ≤ h, Ex = f`
//! over free variables.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SolveStatus;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub g: DMatrix<f64>,
    pub h: Vec<f64>,
    pub e: DMatrix<f64>,
    pub f: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            g: DMatrix::zeros(0, n),
            h: Vec::new(),
            e: DMatrix::zeros(0, n),
            f: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `rowᵀx ≤ rhs`.
    pub fn le(&mut self, row: &[f64], rhs: f64) {
        self.g = append_row(&self.g, row);
        self.h.push(rhs);
    }

    /// Adds `rowᵀx = rhs`.
    pub fn eq(&mut self, row: &[f64], rhs: f64) {
        self.e = append_row(&self.e, row);
        self.f.push(rhs);
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.g.ncols() != n || self.e.ncols() != n || self.g.nrows() != self.h.len() || self.e.nrows() != self.f.len() {
            return Err(Error::Dimension("linear program blocks disagree".into()));
        }
        Ok(())
    }
}

fn append_row(m: &DMatrix<f64>, row: &[f64]) -> DMatrix<f64> {
    assert_eq!(row.len(), m.ncols(), "constraint row has wrong length");
    let mut out = m.clone().resize_vertically(m.nrows() + 1, 0.0);
    for (j, &v) in row.iter().enumerate() {
        out[(m.nrows(), j)] = v;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-11;
const REINVERT_EVERY: usize = 50;
const DEGENERATE_STREAK: usize = 50;

struct Tableau {
    a: DMatrix<f64>,
    b: DVector<f64>,
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    xb: DVector<f64>,
    /// Columns never allowed to enter.
    barred: Vec<bool>,
    since_reinvert: usize,
    iterations: usize,
    limit: usize,
}

enum Phase {
    Optimal,
    Unbounded,
    Limit,
}

impl Tableau {
    fn reinvert(&mut self) -> Result<()> {
        let m = self.basis.len();
        let bmat = DMatrix::from_fn(m, m, |r, c| self.a[(r, self.basis[c])]);
        let lu = bmat.lu();
        self.binv = lu
            .try_inverse()
            .ok_or_else(|| Error::Internal("simplex basis became singular".into()))?;
        self.xb = lu
            .solve(&self.b)
            .ok_or_else(|| Error::Internal("simplex basis became singular".into()))?;
        self.since_reinvert = 0;
        Ok(())
    }

    fn pivot(&mut self, row: usize, col: usize, u: &DVector<f64>) {
        let piv = u[row];
        let m = self.basis.len();
        let pivot_row = self.binv.row(row) / piv;
        let x_new = self.xb[row] / piv;
        for r in 0..m {
            if r == row {
                continue;
            }
            let factor = u[r];
            if factor != 0.0 {
                let updated = self.binv.row(r) - &pivot_row * factor;
                self.binv.set_row(r, &updated);
                self.xb[r] -= factor * x_new;
            }
        }
        self.binv.set_row(row, &pivot_row);
        self.xb[row] = x_new;
        self.basis[row] = col;
        self.since_reinvert += 1;
        self.iterations += 1;
    }

    fn run(&mut self, cost: &[f64]) -> Result<Phase> {
        let m = self.basis.len();
        let ncols = self.a.ncols();
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.limit {
                return Ok(Phase::Limit);
            }
            if self.since_reinvert >= REINVERT_EVERY {
                self.reinvert()?;
            }
            let cb = DVector::from_iterator(m, self.basis.iter().map(|&j| cost[j]));
            let duals = self.binv.transpose() * cb;
            let mut in_basis = vec![false; ncols];
            for &j in &self.basis {
                in_basis[j] = true;
            }
            let bland = degenerate > DEGENERATE_STREAK;
            let mut entering = None;
            let mut best = -COST_TOL;
            for j in 0..ncols {
                if in_basis[j] || self.barred[j] {
                    continue;
                }
                let reduced = cost[j] - self.a.column(j).dot(&duals);
                if reduced < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = reduced;
                }
            }
            let Some(col) = entering else {
                return Ok(Phase::Optimal);
            };
            let u = &self.binv * self.a.column(col);
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                if u[r] > PIVOT_TOL {
                    let ratio = self.xb[r].max(0.0) / u[r];
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-14
                                || (ratio <= lratio + 1e-14
                                    && if bland { self.basis[r] < self.basis[lr] } else { u[r] > u[lr] })
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Ok(Phase::Unbounded);
            };
            degenerate = if ratio <= 1e-13 { degenerate + 1 } else { 0 };
            self.pivot(row, col, &u);
        }
    }
}

/// Solves the program with the default iteration budget.
pub fn solve_lp(prog: &LinearProgram) -> Result<LpSolution> {
    prog.validate()?;
    let n = prog.num_vars();
    let (m1, m2) = (prog.g.nrows(), prog.e.nrows());
    let m = m1 + m2;
    if m == 0 {
        let unbounded = prog.objective.iter().any(|&c| c != 0.0);
        return Ok(LpSolution {
            x: vec![0.0; n],
            objective: 0.0,
            status: if unbounded { SolveStatus::Unbounded } else { SolveStatus::Optimal },
            iterations: 0,
        });
    }
    // columns: x⁺ (n), x⁻ (n), slacks (m1), artificials (m)
    let art0 = 2 * n + m1;
    let ncols = art0 + m;
    let mut a = DMatrix::zeros(m, ncols);
    let mut b = DVector::zeros(m);
    for r in 0..m {
        let (row, rhs) = if r < m1 {
            (prog.g.row(r).into_owned(), prog.h[r])
        } else {
            (prog.e.row(r - m1).into_owned(), prog.f[r - m1])
        };
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            a[(r, j)] = sign * row[j];
            a[(r, n + j)] = -sign * row[j];
        }
        if r < m1 {
            a[(r, 2 * n + r)] = sign;
        }
        a[(r, art0 + r)] = 1.0;
        b[r] = sign * rhs;
    }
    let mut tab = Tableau {
        a,
        b: b.clone(),
        basis: (art0..ncols).collect(),
        binv: DMatrix::identity(m, m),
        xb: b,
        barred: vec![false; ncols],
        since_reinvert: 0,
        iterations: 0,
        limit: 50 * (m + ncols) + 1000,
    };
    let mut phase_one_cost = vec![0.0; ncols];
    for c in phase_one_cost.iter_mut().skip(art0) {
        *c = 1.0;
    }
    if let Phase::Limit = tab.run(&phase_one_cost)? {
        return Ok(limit_solution(n, tab.iterations));
    }
    tab.reinvert()?;
    let infeasibility: f64 = tab
        .basis
        .iter()
        .zip(tab.xb.iter())
        .filter(|(&j, _)| j >= art0)
        .map(|(_, &v)| v.abs())
        .sum();
    let scale = 1.0 + tab.b.amax();
    if infeasibility > 1e-9 * scale {
        return Ok(LpSolution {
            x: vec![0.0; n],
            objective: f64::INFINITY,
            status: SolveStatus::Infeasible,
            iterations: tab.iterations,
        });
    }
    for c in tab.barred.iter_mut().skip(art0) {
        *c = true;
    }
    // drive remaining artificials out; rows with no usable pivot are redundant
    for r in 0..m {
        if tab.basis[r] < art0 {
            continue;
        }
        let row = tab.binv.row(r).into_owned();
        let in_basis: Vec<usize> = tab.basis.clone();
        let candidate = (0..art0)
            .filter(|j| !in_basis.contains(j))
            .map(|j| (j, (&row * tab.a.column(j))[0]))
            .filter(|(_, v)| v.abs() > 1e-9)
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()));
        if let Some((j, _)) = candidate {
            let u = &tab.binv * tab.a.column(j);
            tab.pivot(r, j, &u);
        }
    }
    tab.reinvert()?;
    let mut cost = vec![0.0; ncols];
    for j in 0..n {
        cost[j] = prog.objective[j];
        cost[n + j] = -prog.objective[j];
    }
    let status = match tab.run(&cost)? {
        Phase::Optimal => SolveStatus::Optimal,
        Phase::Unbounded => SolveStatus::Unbounded,
        Phase::Limit => SolveStatus::MaxIter,
    };
    tab.reinvert()?;
    let mut full = vec![0.0; ncols];
    for (r, &j) in tab.basis.iter().enumerate() {
        full[j] = tab.xb[r];
    }
    let x: Vec<f64> = (0..n).map(|j| full[j] - full[n + j]).collect();
    let objective = x.iter().zip(&prog.objective).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        x,
        objective,
        status,
        iterations: tab.iterations,
    })
}

fn limit_solution(n: usize, iterations: usize) -> LpSolution {
    LpSolution {
        x: vec![0.0; n],
        objective: f64::NAN,
        status: SolveStatus::MaxIter,
        iterations,
    }
}
