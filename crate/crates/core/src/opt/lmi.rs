//! Log-det barrier path following for `max bᵀy s.t. F₀ + Σ yᵢFᵢ ⪰ 0`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::SolveStatus;
use crate::error::{Error, Result};
use crate::linalg::min_eigenvalue;

/// A linear objective over one LMI and an optional box.
#[derive(Debug, Clone)]
pub struct LmiProgram {
    pub f0: DMatrix<f64>,
    pub f: Vec<DMatrix<f64>>,
    pub objective: Vec<f64>,
    /// Per-variable `(lower, upper)`; infinite values are unbounded sides.
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl LmiProgram {
    pub fn new(f0: DMatrix<f64>, f: Vec<DMatrix<f64>>, objective: Vec<f64>) -> Result<Self> {
        let prog = Self {
            f0,
            f,
            objective,
            bounds: None,
        };
        prog.validate()?;
        Ok(prog)
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        self.bounds = Some(bounds);
        self.validate()?;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.f.len()
    }

    fn validate(&self) -> Result<()> {
        let p = self.f0.nrows();
        if self.f0.ncols() != p || self.f.iter().any(|fi| fi.shape() != (p, p)) {
            return Err(Error::Dimension("LMI coefficients must share one square shape".into()));
        }
        if self.objective.len() != self.f.len() {
            return Err(Error::Dimension("objective length differs from variable count".into()));
        }
        if let Some(b) = &self.bounds {
            if b.len() != self.f.len() || b.iter().any(|(lo, hi)| !(lo < hi)) {
                return Err(Error::Dimension("bounds must be one nonempty interval per variable".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = self.f0.clone();
        for (fi, &yi) in self.f.iter().zip(y) {
            if yi != 0.0 {
                m += fi * yi;
            }
        }
        m
    }

    fn bound(&self, i: usize) -> (f64, f64) {
        self.bounds
            .as_ref()
            .map_or((f64::NEG_INFINITY, f64::INFINITY), |b| b[i])
    }

    fn barrier_degree(&self) -> f64 {
        let sides: usize = (0..self.m())
            .map(|i| {
                let (lo, hi) = self.bound(i);
                usize::from(lo.is_finite()) + usize::from(hi.is_finite())
            })
            .sum();
        (self.f0.nrows() + sides) as f64
    }

    fn in_box(&self, y: &[f64]) -> bool {
        y.iter().enumerate().all(|(i, &v)| {
            let (lo, hi) = self.bound(i);
            v > lo && v < hi
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmiSettings {
    /// Target duality gap.
    pub gap_tol: f64,
    pub max_newton: usize,
    /// Barrier parameter growth per outer step.
    pub mu: f64,
    pub trace: bool,
}

impl Default for LmiSettings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-11,
            max_newton: 200,
            mu: 20.0,
            trace: false,
        }
    }
}

/// Residuals of the barrier dual certificate `Z = F⁻¹/t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmiSolution {
    pub y: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub newton_steps: usize,
    pub kkt: KktResiduals,
    pub trace: Vec<String>,
}

struct NewtonPoint {
    grad: DVector<f64>,
    hess: DMatrix<f64>,
    g: Vec<DMatrix<f64>>,
}

enum Centering {
    Centered,
    Budget,
    Escaped,
    /// No convergence within one centering allowance; roundoff dominates.
    Stalled,
}

/// Newton steps near the center allowed before declaring a stall.
const CENTERING_STEPS: usize = 30;
/// Gap at which a stalled path still counts as solved.
const STALL_GAP: f64 = 1e-8;

struct Path<'a> {
    prog: &'a LmiProgram,
    y: Vec<f64>,
    t: f64,
    steps: usize,
    settings: LmiSettings,
    trace: Vec<String>,
}

impl<'a> Path<'a> {
    fn newton_point(&self) -> Option<NewtonPoint> {
        let f = self.prog.eval(&self.y);
        let chol = Cholesky::new(f)?;
        let l = chol.l();
        let m = self.prog.m();
        let mut g = Vec::with_capacity(m);
        for fi in &self.prog.f {
            let left = l.solve_lower_triangular(fi)?;
            let gi = l.solve_lower_triangular(&left.transpose())?;
            g.push((&gi + gi.transpose()) * 0.5);
        }
        let mut grad = DVector::zeros(m);
        let mut hess = DMatrix::zeros(m, m);
        for i in 0..m {
            grad[i] = -self.t * self.prog.objective[i] - g[i].trace();
            for j in 0..=i {
                let h = g[i].dot(&g[j]);
                hess[(i, j)] = h;
                hess[(j, i)] = h;
            }
            let (lo, hi) = self.prog.bound(i);
            if hi.is_finite() {
                let s = hi - self.y[i];
                grad[i] += 1.0 / s;
                hess[(i, i)] += 1.0 / (s * s);
            }
            if lo.is_finite() {
                let s = self.y[i] - lo;
                grad[i] -= 1.0 / s;
                hess[(i, i)] += 1.0 / (s * s);
            }
        }
        Some(NewtonPoint { grad, hess, g })
    }

    fn direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
        if let Some(ch) = Cholesky::<f64, Dyn>::new(hess.clone()) {
            return -ch.solve(grad);
        }
        let scale = hess.diagonal().amax().max(1e-300);
        let reg = hess + DMatrix::identity(hess.nrows(), hess.nrows()) * (1e-12 * scale);
        match Cholesky::<f64, Dyn>::new(reg) {
            Some(ch) => -ch.solve(grad),
            None => -grad.clone() / scale,
        }
    }

    /// Barrier change along `dir` at step `alpha`, or `None` outside the
    /// domain. The log-det part uses the eigenvalues of `Σ dirᵢGᵢ`.
    fn change(&self, dir: &DVector<f64>, eig: &[f64], alpha: f64) -> Option<f64> {
        let mut delta = -self.t * alpha * dir.dot(&DVector::from_column_slice(&self.prog.objective));
        for &s in eig {
            let v = 1.0 + alpha * s;
            if v <= 0.0 {
                return None;
            }
            delta -= v.ln();
        }
        for i in 0..self.prog.m() {
            let (lo, hi) = self.prog.bound(i);
            let step = alpha * dir[i];
            if hi.is_finite() {
                let s = hi - self.y[i];
                if s - step <= 0.0 {
                    return None;
                }
                delta -= (1.0 - step / s).ln();
            }
            if lo.is_finite() {
                let s = self.y[i] - lo;
                if s + step <= 0.0 {
                    return None;
                }
                delta -= (1.0 + step / s).ln();
            }
        }
        Some(delta)
    }

    /// Newton iterations at fixed `t`; `stop` is polled after every step.
    fn center(&mut self, stop: &mut dyn FnMut(&[f64], f64) -> bool) -> Result<Centering> {
        let mut previous = f64::INFINITY;
        let mut local = 0;
        loop {
            if self.steps >= self.settings.max_newton {
                return Ok(Centering::Budget);
            }
            if local >= CENTERING_STEPS {
                return Ok(Centering::Stalled);
            }
            let Some(pt) = self.newton_point() else {
                return Err(Error::Internal("barrier iterate left the interior".into()));
            };
            let dir = Self::direction(&pt.hess, &pt.grad);
            let decrement = -pt.grad.dot(&dir);
            // below 1e-6 a stalled decrement means roundoff, not distance
            if decrement / 2.0 <= 1e-12 || (decrement < 1e-6 && decrement > 0.5 * previous) {
                return Ok(Centering::Centered);
            }
            previous = decrement;
            if decrement < 1e-3 {
                local += 1;
            }
            let mut s = DMatrix::zeros(pt.g[0].nrows(), pt.g[0].ncols());
            for (gi, &di) in pt.g.iter().zip(dir.iter()) {
                s += gi * di;
            }
            let eig: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
            let slope = pt.grad.dot(&dir);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                if let Some(delta) = self.change(&dir, &eig, alpha) {
                    if delta <= 0.25 * alpha * slope {
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            self.steps += 1;
            if !accepted {
                return Ok(Centering::Centered);
            }
            // the eigenvalue test can pass by rounding; confirm with Cholesky
            let mut next: Vec<f64> = self.y.iter().zip(dir.iter()).map(|(y, d)| y + alpha * d).collect();
            let mut tries = 0;
            while !strictly_feasible(self.prog, &next) {
                tries += 1;
                if tries > 30 {
                    return Ok(Centering::Centered);
                }
                alpha *= 0.5;
                next = self.y.iter().zip(dir.iter()).map(|(y, d)| y + alpha * d).collect();
            }
            if next == self.y {
                return Ok(Centering::Centered);
            }
            self.y = next;
            if self.settings.trace {
                self.trace.push(format!(
                    "step {} t={:.3e} decrement={:.3e} alpha={:.3e} obj={:.12e}",
                    self.steps,
                    self.t,
                    decrement,
                    alpha,
                    objective(self.prog, &self.y)
                ));
            }
            if self.y.iter().any(|v| !v.is_finite() || v.abs() > 1e12) {
                return Ok(Centering::Escaped);
            }
            if stop(&self.y, self.t) {
                return Ok(Centering::Centered);
            }
        }
    }

    /// Residuals of a dual recovered on the active face: `Z = VWVᵀ` over
    /// the near-null eigenvectors of `F(y)` plus multipliers for active
    /// box sides, fitted by least squares and clipped to the cone.
    fn kkt(&self) -> KktResiduals {
        let f = self.prog.eval(&self.y);
        let (values, vectors) = crate::linalg::sym_eigen(&f);
        let primal = (-values.first().copied().unwrap_or(0.0)).max(0.0);
        let scale = 1.0 + values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let active_tol = (self.prog.barrier_degree() / self.t).sqrt() * scale;
        let active: Vec<usize> = (0..values.len()).filter(|&k| values[k] <= active_tol).collect();
        let r = active.len();
        let v = DMatrix::from_fn(f.nrows(), r, |row, c| vectors[(row, active[c])]);
        let pairs: Vec<(usize, usize)> = (0..r).flat_map(|p| (p..r).map(move |q| (p, q))).collect();
        let m = self.prog.m();
        let mut sides: Vec<(usize, f64)> = Vec::new();
        for i in 0..m {
            let (lo, hi) = self.prog.bound(i);
            if lo.is_finite() && self.y[i] - lo <= active_tol {
                sides.push((i, 1.0));
            }
            if hi.is_finite() && hi - self.y[i] <= active_tol {
                sides.push((i, -1.0));
            }
        }
        let reduced: Vec<DMatrix<f64>> = self.prog.f.iter().map(|fi| v.transpose() * fi * &v).collect();
        let cols = pairs.len() + sides.len();
        let mut sys = DMatrix::zeros(m, cols);
        for i in 0..m {
            for (c, &(p, q)) in pairs.iter().enumerate() {
                sys[(i, c)] = if p == q { reduced[i][(p, p)] } else { 2.0 * reduced[i][(p, q)] };
            }
            for (c, &(k, sign)) in sides.iter().enumerate() {
                if k == i {
                    sys[(i, pairs.len() + c)] = sign;
                }
            }
        }
        let rhs = -DVector::from_column_slice(&self.prog.objective);
        let sol = if cols == 0 { DVector::zeros(0) } else { crate::linalg::min_norm_solve(&sys, &rhs, 1e-13) };
        let mut w = DMatrix::zeros(r, r);
        for (c, &(p, q)) in pairs.iter().enumerate() {
            w[(p, q)] = sol[c];
            w[(q, p)] = sol[c];
        }
        let w = crate::linalg::psd_sqrt(&w).pow(2);
        let mut clipped = DVector::zeros(cols);
        for (c, &(p, q)) in pairs.iter().enumerate() {
            clipped[c] = w[(p, q)];
        }
        for c in pairs.len()..cols {
            clipped[c] = sol[c].max(0.0);
        }
        let dual = (&sys * &clipped - &rhs).norm() / (1.0 + rhs.norm());
        let z = &v * &w * v.transpose();
        let mut gap = z.dot(&f).abs();
        for (c, &(k, sign)) in sides.iter().enumerate() {
            let (lo, hi) = self.prog.bound(k);
            let slack = if sign > 0.0 { self.y[k] - lo } else { hi - self.y[k] };
            gap += clipped[pairs.len() + c] * slack;
        }
        KktResiduals { primal, dual, gap }
    }
}

fn objective(prog: &LmiProgram, y: &[f64]) -> f64 {
    prog.objective.iter().zip(y).map(|(b, v)| b * v).sum()
}

fn strictly_feasible(prog: &LmiProgram, y: &[f64]) -> bool {
    prog.in_box(y) && Cholesky::new(prog.eval(y)).is_some()
}

/// Phase-one program: maximize τ with `F(y) − τI ⪰ 0`, `τ ≤ 1`.
fn phase_one(prog: &LmiProgram) -> LmiProgram {
    let p = prog.f0.nrows();
    let mut f = prog.f.clone();
    f.push(-DMatrix::identity(p, p));
    let mut objective = vec![0.0; prog.m()];
    objective.push(1.0);
    let mut bounds: Vec<(f64, f64)> = (0..prog.m()).map(|i| prog.bound(i)).collect();
    bounds.push((f64::NEG_INFINITY, 1.0));
    LmiProgram {
        f0: prog.f0.clone(),
        f,
        objective,
        bounds: Some(bounds),
    }
}

fn box_start(prog: &LmiProgram) -> Vec<f64> {
    (0..prog.m())
        .map(|i| {
            let (lo, hi) = prog.bound(i);
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo.max(0.0) + if lo >= 0.0 { 1.0 } else { 0.0 },
                (false, true) => hi.min(0.0) - if hi <= 0.0 { 1.0 } else { 0.0 },
                (false, false) => 0.0,
            }
        })
        .collect()
}

enum PhaseOne {
    Found(Vec<f64>),
    Infeasible,
    Budget(usize),
}

/// Searches for `y` with `F(y) ≻ 0`; `threshold` is the τ that counts as
/// feasible.
fn find_interior(
    prog: &LmiProgram,
    settings: LmiSettings,
    threshold: f64,
    trace: &mut Vec<String>,
) -> Result<(PhaseOne, usize)> {
    let y0 = box_start(prog);
    if prog.f0.nrows() == 0 || strictly_feasible(prog, &y0) {
        return Ok((PhaseOne::Found(y0), 0));
    }
    let aux = phase_one(prog);
    let tau0 = min_eigenvalue(&prog.eval(&y0)) - 1.0;
    let mut start = y0;
    start.push(tau0);
    let mut path = Path {
        prog: &aux,
        y: start,
        t: 1.0,
        steps: 0,
        settings,
        trace: Vec::new(),
    };
    let degree = aux.barrier_degree();
    let m = prog.m();
    let reached = move |tau: f64| if threshold < 0.0 { tau >= threshold } else { tau > threshold };
    loop {
        let mut stop = |y: &[f64], _t: f64| reached(y[m]);
        let outcome = path.center(&mut stop)?;
        let tau = path.y[m];
        if reached(tau) {
            trace.append(&mut path.trace);
            let y = path.y[..m].to_vec();
            return Ok((PhaseOne::Found(y), path.steps));
        }
        match outcome {
            Centering::Budget => {
                trace.append(&mut path.trace);
                return Ok((PhaseOne::Budget(path.steps), path.steps));
            }
            Centering::Escaped | Centering::Stalled => {
                trace.append(&mut path.trace);
                return Ok((PhaseOne::Budget(path.steps), path.steps));
            }
            Centering::Centered => {}
        }
        let bound = tau + degree / path.t;
        if bound < threshold.min(0.0) || degree / path.t < 1e-13 {
            trace.append(&mut path.trace);
            return Ok((PhaseOne::Infeasible, path.steps));
        }
        path.t *= settings.mu;
    }
}

/// Maximizes the objective over the strict interior of the LMI.
pub fn solve_lmi_max(prog: &LmiProgram, settings: LmiSettings) -> Result<LmiSolution> {
    prog.validate()?;
    let mut trace = Vec::new();
    if prog.m() == 0 {
        let feasible = min_eigenvalue(&prog.f0) >= -1e-9;
        return Ok(LmiSolution {
            y: Vec::new(),
            objective: 0.0,
            status: if feasible { SolveStatus::Optimal } else { SolveStatus::Infeasible },
            newton_steps: 0,
            kkt: KktResiduals::default(),
            trace,
        });
    }
    let (found, used) = find_interior(prog, settings, 0.0, &mut trace)?;
    let y0 = match found {
        PhaseOne::Found(y) => y,
        PhaseOne::Infeasible => {
            return Ok(LmiSolution {
                y: vec![0.0; prog.m()],
                objective: f64::NEG_INFINITY,
                status: SolveStatus::Infeasible,
                newton_steps: used,
                kkt: KktResiduals::default(),
                trace,
            })
        }
        PhaseOne::Budget(steps) => {
            return Ok(LmiSolution {
                y: vec![0.0; prog.m()],
                objective: f64::NEG_INFINITY,
                status: SolveStatus::MaxIter,
                newton_steps: steps,
                kkt: KktResiduals::default(),
                trace,
            })
        }
    };
    let mut path = Path {
        prog,
        y: y0,
        t: 1.0,
        steps: used,
        settings,
        trace: Vec::new(),
    };
    let degree = prog.barrier_degree();
    let mut last_centered: Option<(Vec<f64>, f64)> = None;
    let status = loop {
        match path.center(&mut |_, _| false)? {
            Centering::Budget => break SolveStatus::MaxIter,
            Centering::Escaped => break SolveStatus::Unbounded,
            Centering::Stalled => match last_centered.take() {
                Some((y, t)) if degree / t <= STALL_GAP * (1.0 + objective(prog, &y).abs()) => {
                    path.y = y;
                    path.t = t;
                    break SolveStatus::Optimal;
                }
                _ => break SolveStatus::MaxIter,
            },
            Centering::Centered => {}
        }
        if degree / path.t <= settings.gap_tol {
            break SolveStatus::Optimal;
        }
        last_centered = Some((path.y.clone(), path.t));
        path.t *= settings.mu;
    };
    let kkt = path.kkt();
    trace.append(&mut path.trace);
    Ok(LmiSolution {
        objective: objective(prog, &path.y),
        y: path.y,
        status,
        newton_steps: path.steps,
        kkt,
        trace,
    })
}

/// Whether some `y` in the box has `F₀ + Σ yᵢFᵢ ⪰ 0`, with slack `1e-9`.
pub fn lmi_feasible(f0: &DMatrix<f64>, f: &[DMatrix<f64>], bounds: Option<&[(f64, f64)]>) -> Result<bool> {
    const SLACK: f64 = -1e-9;
    if f.is_empty() {
        return Ok(min_eigenvalue(f0) >= SLACK);
    }
    let mut prog = LmiProgram::new(f0.clone(), f.to_vec(), vec![0.0; f.len()])?;
    if let Some(b) = bounds {
        prog = prog.with_bounds(b.to_vec())?;
    }
    let mut trace = Vec::new();
    let (found, _) = find_interior(&prog, LmiSettings::default(), SLACK, &mut trace)?;
    Ok(matches!(found, PhaseOne::Found(_)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn diagonal_lmi() {
        let prog = LmiProgram::new(diag(&[1.0, 1.0]), vec![diag(&[-1.0, 1.0])], vec![1.0]).unwrap();
        let sol = solve_lmi_max(&prog, LmiSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.y[0] - 1.0).abs() < 1e-9, "{}", sol.y[0]);
        assert!(sol.kkt.primal <= 1e-8 && sol.kkt.dual <= 1e-8 && sol.kkt.gap <= 1e-8, "{:?}", sol.kkt);
    }

    #[test]
    fn off_diagonal_lmi() {
        let f1 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let prog = LmiProgram::new(DMatrix::identity(2, 2), vec![f1], vec![1.0]).unwrap();
        let sol = solve_lmi_max(&prog, LmiSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.y[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_detected() {
        let prog = LmiProgram::new(diag(&[1.0]), vec![diag(&[1.0])], vec![1.0]).unwrap();
        let sol = solve_lmi_max(&prog, LmiSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        let prog = LmiProgram::new(diag(&[-1.0, -1.0]), vec![diag(&[1.0, -1.0])], vec![1.0]).unwrap();
        let sol = solve_lmi_max(&prog, LmiSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn phase_one_recovers_interior() {
        // y ∈ (2, 3) only
        let prog = LmiProgram::new(diag(&[-2.0, 3.0]), vec![diag(&[1.0, -1.0])], vec![1.0]).unwrap();
        let sol = solve_lmi_max(&prog, LmiSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.y[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn boxed_objective() {
        let prog = LmiProgram::new(diag(&[1.0]), vec![diag(&[1.0])], vec![1.0])
            .unwrap()
            .with_bounds(vec![(-0.5, 0.25)])
            .unwrap();
        let sol = solve_lmi_max(&prog, LmiSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.y[0] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn feasibility_checks() {
        let f = vec![DMatrix::from_row_slice(2, 2, &[0.3, 1.0, 1.0, -2.0])];
        assert!(lmi_feasible(&DMatrix::identity(2, 2), &f, Some(&[(-1e-6, 1e-6)])).unwrap());
        assert!(!lmi_feasible(&(-DMatrix::identity(2, 2)), &[], None).unwrap());
        // x = ±1 pinned against the spin disk cone: infeasible
        let b1 = diag(&[1.0, -1.0]);
        let b2 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(!lmi_feasible(&b1, std::slice::from_ref(&b2), Some(&[(-1.0, 1.0)])).unwrap());
        assert!(!lmi_feasible(&(-&b1), &[b2], Some(&[(-1.0, 1.0)])).unwrap());
    }
}
