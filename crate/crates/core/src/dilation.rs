//! One-column dilations, the extremal dilation loop and nullspace
//! purification.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreme::{
    arveson_residual, classify_with_kernel, svec_len, subspace_from_kernel, DilationSubspace,
    ExtremeReport, Flag,
};
use crate::kernel::{symmetric_kernel, NumericalKernel, ToleranceConfig};
use crate::linalg::{min_eigenvalue, min_norm_solve, numerical_nullspace, sym_eigen};
use crate::opt::{solve_lmi_max, solve_lp, LinearProgram, LmiProgram, LmiSettings, SolveStatus};
use crate::sym::{eval_linear, eval_pencil, lambda_column, ColumnTuple, SymTuple};

/// Smallest accepted dilation coefficient.
const MIN_C: f64 = 1e-10;
const POLISH_ROUNDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationMode {
    /// Keep the γ found while maximizing c.
    KeepGamma,
    /// Re-optimize γ for a random linear functional at fixed c.
    TwoStage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    MatrixOrArveson,
    ArvesonOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurifyMode {
    Full,
    /// Only the border outside the starting block may move.
    Frozen,
    Off,
}

/// Which entries of `KᵀL_A(X+Y)K` the purification LP drives to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurifyObjective {
    Diagonal,
    AllEntries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Arveson,
    MatrixNotArveson,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationOptions {
    pub target: Target,
    pub max_fails: usize,
    pub purify: PurifyMode,
    pub objective: PurifyObjective,
    pub mode: DilationMode,
    /// Step cap; `None` means `g·n₀ + 1`.
    pub max_steps: Option<usize>,
    /// Push the start point to the boundary along its ray first.
    pub to_boundary: bool,
    pub tol: ToleranceConfig,
    pub solver: LmiSettings,
}

impl Default for DilationOptions {
    fn default() -> Self {
        Self {
            target: Target::MatrixOrArveson,
            max_fails: 10,
            purify: PurifyMode::Full,
            objective: PurifyObjective::Diagonal,
            mode: DilationMode::KeepGamma,
            max_steps: None,
            to_boundary: false,
            tol: ToleranceConfig::default(),
            solver: LmiSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationStep {
    pub beta: Vec<Vec<f64>>,
    pub c: f64,
    pub gamma: Vec<f64>,
    pub retries: usize,
    pub purified: bool,
    /// First-zero magnitude of the new point before and after purification.
    pub accuracy_before: Option<f64>,
    pub accuracy_after: Option<f64>,
    /// Kernel dimension of the accepted point.
    pub kernel_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationTrace {
    pub start_level: usize,
    pub steps: Vec<DilationStep>,
    pub final_point: SymTuple,
    pub verdict: Verdict,
    /// `(n − n₀)/(g·n₀)`.
    pub mu: f64,
    /// Classification of every visited point, start point first.
    pub reports: Vec<ExtremeReport>,
    pub failure: Option<String>,
}

impl DilationTrace {
    pub fn final_level(&self) -> usize {
        self.final_point.n()
    }

    /// True when some visited point was matrix extreme but not Arveson.
    pub fn visited_matrix_not_arveson(&self) -> bool {
        self.reports.iter().any(ExtremeReport::is_matrix_not_arveson)
    }
}

/// Outcome of one accepted 1-dilation.
#[derive(Debug, Clone)]
pub struct OneDilation {
    pub point: SymTuple,
    pub c: f64,
    pub gamma: Vec<f64>,
    /// Kernel dimension gained in the Schur complement.
    pub gained: usize,
}

#[derive(Debug, Clone)]
pub struct Purification {
    pub point: SymTuple,
    /// Optimal scaled residual of the LP.
    pub eta: f64,
    pub kernel_dim: usize,
}

/// Scales `X` along its ray onto the boundary of `D_A`.
pub fn to_boundary(a: &SymTuple, x: &SymTuple) -> Result<SymTuple> {
    let lambda = eval_pencil(a, x)?.min_eigenvalue();
    if lambda < -1e-10 {
        return Err(Error::Outside(lambda));
    }
    if lambda <= 1e-10 {
        return Ok(x.clone());
    }
    // 1 − λ equals −λ_min(Λ_A(X)); computing it directly avoids cancellation
    let mut ray = x.clone();
    let mut m = eval_linear(a, &ray)?.min_eigenvalue();
    if (1.0 - lambda).abs() < 1e-9 {
        ray = x.scale(0.5);
        m = eval_linear(a, &ray)?.min_eigenvalue();
        if m > -1e-12 {
            ray = fallback_direction(a.g(), x.n());
            m = eval_linear(a, &ray)?.min_eigenvalue();
        }
    }
    if m >= 0.0 {
        return Err(Error::Unbounded(ray.mats().iter().map(|r| r[(0, 0)]).collect()));
    }
    Ok(ray.scale(-1.0 / m))
}

/// Deterministic non-zero direction used when the start point is the origin.
fn fallback_direction(g: usize, n: usize) -> SymTuple {
    let mats = (0..g)
        .map(|i| DMatrix::from_fn(n, n, |r, c| if r == c { 1.0 / (i + 1) as f64 } else { 0.0 }))
        .collect();
    SymTuple::assemble(mats)
}

/// Random convex combination of the basis, normalized to unit norm.
pub fn random_beta<R: Rng + ?Sized>(subspace: &DilationSubspace, rng: &mut R) -> Result<ColumnTuple> {
    let Some(first) = subspace.basis.first() else {
        return Err(Error::DilationFailed("dilation subspace is trivial".into()));
    };
    let (g, n) = (first.g(), first.n());
    let weights: Vec<f64> = (0..subspace.basis.len()).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    let mut flat = vec![0.0; g * n];
    for (w, b) in weights.iter().zip(&subspace.basis) {
        for (f, v) in flat.iter_mut().zip(b.flat()) {
            *f += w / total * v;
        }
    }
    let beta = ColumnTuple::from_flat(g, n, &flat);
    let norm = beta.norm();
    if norm <= 1e-300 {
        return Err(Error::DilationFailed("random combination vanished".into()));
    }
    Ok(beta.scale(1.0 / norm))
}

/// Affine family `I + Σγᵢ Aᵢ − s B` in the variables `(s, γ)`.
struct SchurPencil<'a> {
    a: &'a SymTuple,
    b: DMatrix<f64>,
}

impl SchurPencil<'_> {
    fn eval(&self, s: f64, gamma: &[f64]) -> DMatrix<f64> {
        let d = self.b.nrows();
        let mut m = DMatrix::identity(d, d) - &self.b * s;
        for (ai, &gi) in self.a.mats().iter().zip(gamma) {
            m += ai * gi;
        }
        m
    }

    fn coefficient(&self, var: usize) -> DMatrix<f64> {
        if var == 0 {
            -self.b.clone()
        } else {
            self.a.mat(var - 1).clone()
        }
    }

    /// Moves the free variables by a minimum-norm correction so that the
    /// `r` smallest eigenvectors become an exact kernel.
    fn polish(&self, s: &mut f64, gamma: &mut [f64], r: usize, free_s: bool) {
        if r == 0 {
            return;
        }
        let vars: Vec<usize> = (usize::from(!free_s)..=gamma.len()).collect();
        for _ in 0..POLISH_ROUNDS {
            let m = self.eval(*s, gamma);
            let (_, vectors) = sym_eigen(&m);
            let v = vectors.columns(0, r).into_owned();
            let pairs: Vec<(usize, usize)> = (0..r).flat_map(|p| (p..r).map(move |q| (p, q))).collect();
            let base = v.transpose() * &m * &v;
            let mut sys = DMatrix::zeros(pairs.len(), vars.len());
            let mut rhs = DVector::zeros(pairs.len());
            for (col, &var) in vars.iter().enumerate() {
                let c = v.transpose() * self.coefficient(var) * &v;
                for (row, &(p, q)) in pairs.iter().enumerate() {
                    sys[(row, col)] = c[(p, q)];
                }
            }
            for (row, &(p, q)) in pairs.iter().enumerate() {
                rhs[row] = -base[(p, q)];
            }
            let step = min_norm_solve(&sys, &rhs, 1e-12);
            for (col, &var) in vars.iter().enumerate() {
                if var == 0 {
                    *s += step[col];
                } else {
                    gamma[var - 1] += step[col];
                }
            }
        }
    }
}

/// Kernel of `L_A(Y)` at the pre-purification tolerance, or `None` for
/// interior points.
fn pre_kernel(a: &SymTuple, y: &SymTuple, tol: &ToleranceConfig) -> Result<(DMatrix<f64>, Option<NumericalKernel>)> {
    let l = eval_pencil(a, y)?.into_matrix();
    let kernel = symmetric_kernel(&l, tol.lmi_pre)?;
    Ok((l, kernel))
}

/// Pseudo-inverse of `L` off the given kernel dimension.
fn pinv_off_kernel(l: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(l);
    let size = l.nrows();
    let mut out = DMatrix::zeros(size, size);
    // eigenvalues ascend, so the kernel is the first k
    for i in k..size {
        let v = vectors.column(i);
        out += (v * v.transpose()) / values[i];
    }
    out
}

/// Maximal 1-dilation of `Y` along `β`: maximizes `c` subject to
/// `L_A([[Y, cβ], [cβᵀ, γ]]) ⪰ 0` through its Schur complement.
pub fn maximal_one_dilation<R: Rng + ?Sized>(
    a: &SymTuple,
    y: &SymTuple,
    beta: &ColumnTuple,
    opts: &DilationOptions,
    rng: &mut R,
) -> Result<OneDilation> {
    if beta.g() != a.g() || beta.n() != y.n() {
        return Err(Error::Dimension("β does not match the point".into()));
    }
    let g = a.g();
    let (l, kernel) = pre_kernel(a, y, &opts.tol)?;
    let k = kernel.as_ref().map_or(0, |kk| kk.k);
    if let Some(kk) = &kernel {
        let residual = arveson_residual(a, beta, &kk.basis)?;
        if residual > 1e-9 * (1.0 + a.norm()) * beta.norm() {
            return Err(Error::Precondition(format!(
                "β does not annihilate the kernel (residual {residual:e})"
            )));
        }
    }
    let lam = lambda_column(a, beta)?;
    let b = lam.transpose() * pinv_off_kernel(&l, k) * &lam;
    let b = (&b + b.transpose()) * 0.5;
    // s is solved in units of 1/‖B‖ so the barrier sees an O(1) problem
    let b_scale = sym_eigen(&b).0.last().copied().unwrap_or(0.0);
    if !(b_scale > 0.0) || !b_scale.is_finite() {
        return Err(Error::DilationFailed("β gives no coupling to the kernel complement".into()));
    }
    let pencil = SchurPencil { a, b: b / b_scale };
    let d = a.n();
    let mut f = vec![pencil.coefficient(0)];
    f.extend(a.mats().iter().cloned());
    let mut objective = vec![0.0; g + 1];
    objective[0] = 1.0;
    let prog = LmiProgram::new(DMatrix::identity(d, d), f, objective)?;
    let sol = solve_lmi_max(&prog, opts.solver)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::DilationFailed(format!("c-maximization ended {:?}", sol.status)));
    }
    let mut s = sol.y[0];
    let mut gamma = sol.y[1..].to_vec();
    let r = face_rank(&pencil.eval(s, &gamma), &opts.tol)?;
    if r == 0 {
        return Err(Error::DilationFailed("optimal Schur complement is nonsingular".into()));
    }
    polish_checked(&pencil, &mut s, &mut gamma, r, true, opts.tol.psd_slack);
    let mut gained = r;
    if opts.mode == DilationMode::TwoStage {
        gained = second_stage(&pencil, s, &mut gamma, r, opts, rng)?;
    }
    if !(s > 0.0) || (s / b_scale).sqrt() <= MIN_C {
        return Err(Error::DilationFailed(format!("degenerate dilation coefficient s = {s:e}")));
    }
    let c = (s / b_scale).sqrt();
    let point = y.extend(&beta.scale(c), &gamma)?;
    Ok(OneDilation {
        point,
        c,
        gamma,
        gained,
    })
}

fn face_rank(m: &DMatrix<f64>, tol: &ToleranceConfig) -> Result<usize> {
    Ok(symmetric_kernel(m, tol.lmi_pre)?.map_or(0, |kk| kk.k))
}

/// Polishes unless doing so leaves the cone.
fn polish_checked(pencil: &SchurPencil, s: &mut f64, gamma: &mut [f64], r: usize, free_s: bool, slack: f64) {
    let (mut s2, mut g2) = (*s, gamma.to_vec());
    pencil.polish(&mut s2, &mut g2, r, free_s);
    if s2.is_finite() && g2.iter().all(|v| v.is_finite()) && min_eigenvalue(&pencil.eval(s2, &g2)) >= -slack {
        *s = s2;
        gamma.copy_from_slice(&g2);
    }
}

/// Maximizes a random functional of γ over directions that keep the
/// current face, returning the new face rank.
fn second_stage<R: Rng + ?Sized>(
    pencil: &SchurPencil,
    s: f64,
    gamma: &mut [f64],
    r: usize,
    opts: &DilationOptions,
    rng: &mut R,
) -> Result<usize> {
    let g = gamma.len();
    let mut ell: Vec<f64> = (0..g).map(|_| StandardNormal.sample(rng)).collect();
    let norm = ell.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    ell.iter_mut().for_each(|v| *v /= norm);
    let m0 = pencil.eval(s, gamma);
    let (_, vectors) = sym_eigen(&m0);
    let d = m0.nrows();
    let v = vectors.columns(0, r).into_owned();
    let w = vectors.columns(r, d - r).into_owned();
    // directions δ with (ΣδᵢAᵢ)V = 0
    let mut sys = DMatrix::zeros(d * r, g);
    for i in 0..g {
        let av = pencil.a.mat(i) * &v;
        for (row, val) in av.iter().enumerate() {
            sys[(row, i)] = *val;
        }
    }
    let ns = numerical_nullspace(&sys, opts.tol.irreducible)?;
    if ns.nullity == 0 || d == r {
        return Ok(r);
    }
    let n = ns.basis;
    let f0 = w.transpose() * &m0 * &w;
    let f: Vec<DMatrix<f64>> = (0..n.ncols())
        .map(|j| {
            let mut acc = DMatrix::zeros(d, d);
            for i in 0..g {
                acc += pencil.a.mat(i) * n[(i, j)];
            }
            w.transpose() * acc * &w
        })
        .collect();
    let objective: Vec<f64> = (0..n.ncols()).map(|j| (0..g).map(|i| ell[i] * n[(i, j)]).sum()).collect();
    let prog = LmiProgram::new((&f0 + f0.transpose()) * 0.5, f, objective)?;
    let sol = solve_lmi_max(&prog, opts.solver)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::DilationFailed(format!("γ-maximization ended {:?}", sol.status)));
    }
    for i in 0..g {
        gamma[i] += (0..n.ncols()).map(|j| n[(i, j)] * sol.y[j]).sum::<f64>();
    }
    let mut s_fixed = s;
    let r2 = face_rank(&pencil.eval(s, gamma), &opts.tol)?.max(r);
    polish_checked(pencil, &mut s_fixed, gamma, r2, false, opts.tol.psd_slack);
    Ok(r2)
}

/// `K` reshaped per column: `K_a[r, x] = K[r·n + x, a]`.
fn kernel_blocks(kernel: &DMatrix<f64>, d: usize, n: usize) -> Vec<DMatrix<f64>> {
    (0..kernel.ncols())
        .map(|a| DMatrix::from_fn(d, n, |r, x| kernel[(r * n + x, a)]))
        .collect()
}

/// Nullspace purification with only entries `(p, q)`, `q ≥ first_free`,
/// allowed to move.
fn purify(
    a: &SymTuple,
    x: &SymTuple,
    first_free: usize,
    cfg: &ToleranceConfig,
    objective: PurifyObjective,
) -> Result<Purification> {
    let (g, d, n) = (a.g(), a.n(), x.n());
    let (l, kernel) = pre_kernel(a, x, cfg)?;
    let Some(kernel) = kernel else {
        return Err(Error::Precondition("purification needs a boundary point".into()));
    };
    let k = kernel.k;
    let eps = cfg.purify_eps;
    let entries: Vec<(usize, usize)> = (0..n)
        .flat_map(|p| (p..n).map(move |q| (p, q)))
        .filter(|&(_, q)| q >= first_free)
        .collect();
    if entries.is_empty() {
        return Ok(Purification {
            point: x.clone(),
            eta: 0.0,
            kernel_dim: k,
        });
    }
    let blocks = kernel_blocks(&kernel.basis, d, n);
    let e0 = kernel.basis.transpose() * &l * &kernel.basis;
    let targets: Vec<(usize, usize)> = match objective {
        PurifyObjective::Diagonal => (0..k).map(|i| (i, i)).collect(),
        PurifyObjective::AllEntries => (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect(),
    };
    let nv = g * entries.len();
    // variable layout: u (nv), τ, then L1 auxiliaries (nv) in stage two
    let mut coef_rows = Vec::with_capacity(targets.len());
    for &(ta, tb) in &targets {
        let mut row = vec![0.0; nv];
        for i in 0..g {
            let c = blocks[ta].transpose() * a.mat(i) * &blocks[tb];
            for (e, &(p, q)) in entries.iter().enumerate() {
                row[i * entries.len() + e] = if p == q { c[(p, p)] } else { c[(p, q)] + c[(q, p)] };
            }
        }
        coef_rows.push((row, e0[(ta, tb)] / eps));
    }
    let build = |extra: usize, cost: Vec<f64>| {
        let total = nv + 1 + extra;
        let mut lp = LinearProgram::new(cost);
        for (row, base) in &coef_rows {
            let mut up = vec![0.0; total];
            let mut down = vec![0.0; total];
            for j in 0..nv {
                up[j] = row[j];
                down[j] = -row[j];
            }
            up[nv] = -1.0;
            down[nv] = -1.0;
            lp.le(&up, -base);
            lp.le(&down, *base);
        }
        for j in 0..nv {
            let mut hi = vec![0.0; total];
            hi[j] = 1.0;
            lp.le(&hi, 1.0);
            hi[j] = -1.0;
            lp.le(&hi, 1.0);
        }
        lp
    };
    let mut cost = vec![0.0; nv + 1];
    cost[nv] = 1.0;
    let stage_one = solve_lp(&build(0, cost))?;
    if stage_one.status != SolveStatus::Optimal {
        return Err(Error::Internal(format!("purification LP ended {:?}", stage_one.status)));
    }
    let tau = stage_one.x[nv].max(0.0);
    // among near-optimal corrections take the smallest in ℓ₁
    let mut cost = vec![0.0; 2 * nv + 1];
    for c in cost.iter_mut().skip(nv + 1) {
        *c = 1.0;
    }
    let mut lp = build(nv, cost);
    let total = 2 * nv + 1;
    let mut cap = vec![0.0; total];
    cap[nv] = 1.0;
    lp.le(&cap, tau * (1.0 + 1e-6) + 1e-12);
    for j in 0..nv {
        let mut row = vec![0.0; total];
        row[j] = 1.0;
        row[nv + 1 + j] = -1.0;
        lp.le(&row, 0.0);
        row[j] = -1.0;
        lp.le(&row, 0.0);
    }
    let stage_two = solve_lp(&lp)?;
    let u = if stage_two.status == SolveStatus::Optimal {
        &stage_two.x[..nv]
    } else {
        &stage_one.x[..nv]
    };
    let mut mats: Vec<DMatrix<f64>> = x.mats().to_vec();
    for (i, m) in mats.iter_mut().enumerate() {
        for (e, &(p, q)) in entries.iter().enumerate() {
            let delta = eps * u[i * entries.len() + e].clamp(-1.0, 1.0);
            if delta != 0.0 {
                m[(p, q)] += delta;
                if p != q {
                    m[(q, p)] += delta;
                }
            }
        }
    }
    Ok(Purification {
        point: SymTuple::assemble(mats),
        eta: tau * eps,
        kernel_dim: k,
    })
}

/// Full nullspace purification: every entry may move by at most
/// `purify_eps`.
pub fn purify_full(
    a: &SymTuple,
    x: &SymTuple,
    cfg: &ToleranceConfig,
    objective: PurifyObjective,
) -> Result<Purification> {
    purify(a, x, 0, cfg, objective)
}

/// Purification that keeps the leading `n0 × n0` block fixed.
pub fn purify_frozen(
    a: &SymTuple,
    x: &SymTuple,
    n0: usize,
    cfg: &ToleranceConfig,
    objective: PurifyObjective,
) -> Result<Purification> {
    if n0 > x.n() {
        return Err(Error::Dimension(format!("frozen block {n0} exceeds level {}", x.n())));
    }
    purify(a, x, n0, cfg, objective)
}

fn report_at(a: &SymTuple, y: &SymTuple, cfg: &ToleranceConfig) -> Result<ExtremeReport> {
    let l = eval_pencil(a, y)?;
    let lam = l.min_eigenvalue();
    if lam < -cfg.psd_slack {
        return Err(Error::Outside(lam));
    }
    let kernel = symmetric_kernel(l.matrix(), cfg.lmi_post)?;
    classify_with_kernel(a, y, kernel.as_ref(), lam, cfg)
}

fn target_met(report: &ExtremeReport, target: Target) -> Option<Verdict> {
    if report.arveson == Flag::Yes {
        return Some(Verdict::Arveson);
    }
    if target == Target::MatrixOrArveson && report.matrix == Flag::Yes {
        return Some(Verdict::MatrixNotArveson);
    }
    None
}

/// One attempt at the next level; any `DilationFailed` or `Outside` error
/// is a failed try.
fn attempt<R: Rng + ?Sized>(
    a: &SymTuple,
    y: &SymTuple,
    n0: usize,
    current_k: usize,
    subspace: &DilationSubspace,
    opts: &DilationOptions,
    rng: &mut R,
) -> Result<(DilationStep, SymTuple, ExtremeReport)> {
    let beta = random_beta(subspace, rng)?;
    let one = maximal_one_dilation(a, y, &beta, opts, rng)?;
    let before = symmetric_kernel(eval_pencil(a, &one.point)?.matrix(), opts.tol.lmi_pre)?;
    let mut point = one.point;
    let mut purified = false;
    if before.is_some() {
        let result = match opts.purify {
            PurifyMode::Full => Some(purify_full(a, &point, &opts.tol, opts.objective)),
            PurifyMode::Frozen => Some(purify_frozen(a, &point, n0, &opts.tol, opts.objective)),
            PurifyMode::Off => None,
        };
        if let Some(result) = result {
            let p = result?;
            if eval_pencil(a, &p.point)?.min_eigenvalue() >= -opts.tol.psd_slack {
                point = p.point;
                purified = true;
            }
        }
    }
    let report = match report_at(a, &point, &opts.tol) {
        Ok(r) => r,
        Err(Error::Outside(v)) => {
            return Err(Error::DilationFailed(format!("dilated point left the cone ({v:e})")))
        }
        Err(e) => return Err(e),
    };
    if report.k <= current_k {
        return Err(Error::DilationFailed(format!(
            "kernel did not grow ({} → {})",
            current_k, report.k
        )));
    }
    let step = DilationStep {
        beta: beta.scale(one.c).as_matrices().iter().map(|m| m.iter().copied().collect()).collect(),
        c: one.c,
        gamma: one.gamma,
        retries: 0,
        purified,
        accuracy_before: before.map(|kk| kk.accuracy),
        accuracy_after: report.kernel_accuracy,
        kernel_dim: report.k,
    };
    Ok((step, point, report))
}

/// Dilates `X` until the target kind of extreme point is reached.
pub fn dilate_to_extreme<R: Rng + ?Sized>(
    a: &SymTuple,
    x: &SymTuple,
    opts: &DilationOptions,
    rng: &mut R,
) -> Result<DilationTrace> {
    opts.tol.validate()?;
    let n0 = x.n();
    let g = a.g();
    let start = if opts.to_boundary { to_boundary(a, x)? } else { x.clone() };
    let cap = opts.max_steps.unwrap_or(g * n0 + 1);
    let mut y = start;
    let mut report = report_at(a, &y, &opts.tol)?;
    let mut reports = vec![report.clone()];
    let mut steps = Vec::new();
    let finish = |y: SymTuple, steps: Vec<DilationStep>, reports, verdict, failure| {
        let mu = (y.n() - n0) as f64 / (g * n0) as f64;
        let verdict = if verdict != Verdict::Failed
            && eval_pencil(a, &y).map(|l| l.min_eigenvalue()).unwrap_or(f64::NEG_INFINITY) < -opts.tol.psd_slack
        {
            Verdict::Failed
        } else {
            verdict
        };
        DilationTrace {
            start_level: n0,
            steps,
            final_point: y,
            verdict,
            mu,
            reports,
            failure,
        }
    };
    loop {
        if let Some(v) = target_met(&report, opts.target) {
            return Ok(finish(y, steps, reports, v, None));
        }
        if steps.len() >= cap {
            let msg = format!("step cap {cap} reached");
            return Ok(finish(y, steps, reports, Verdict::Failed, Some(msg)));
        }
        let (_, kernel) = pre_kernel(a, &y, &opts.tol)?;
        let (subspace, _) = subspace_from_kernel(a, &y, kernel.as_ref(), opts.tol.ee)?;
        if subspace.dim == 0 {
            let msg = "dilation subspace is trivial but the point is not Arveson extreme".to_string();
            return Ok(finish(y, steps, reports, Verdict::Failed, Some(msg)));
        }
        let mut retries = 0;
        let mut last_error = String::new();
        let accepted = loop {
            if retries >= opts.max_fails {
                break None;
            }
            match attempt(a, &y, n0, report.k, &subspace, opts, rng) {
                Ok(found) => break Some(found),
                Err(Error::DilationFailed(msg)) | Err(Error::Precondition(msg)) => {
                    last_error = msg;
                    retries += 1;
                }
                Err(e) => return Err(e),
            }
        };
        let Some((mut step, point, next)) = accepted else {
            let msg = format!("{retries} failed tries at level {}: {last_error}", y.n());
            return Ok(finish(y, steps, reports, Verdict::Failed, Some(msg)));
        };
        step.retries = retries;
        steps.push(step);
        reports.push(next.clone());
        y = point;
        report = next;
    }
}

/// Purification variables for a level-`n` tuple with `g` coordinates.
pub fn purification_size(g: usize, n: usize) -> usize {
    g * svec_len(n) + 1
}
