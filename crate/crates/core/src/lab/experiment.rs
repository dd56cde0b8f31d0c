//! Seeded batch experiments aggregated into table rows.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{random_defining_tuple, random_interior_point};
use super::sweep::{tolerance_sweep, SweepGrid, SweepRow};
use crate::carath::{carath_expand, mu_estimate, CarathOptions};
use crate::dilation::{dilate_to_extreme, DilationOptions, Target, Verdict};
use crate::error::{Error, Result};
use crate::extreme::{rank_nullity_counts, Flag};
use crate::kernel::ToleranceConfig;
use crate::sym::SymTuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    ClassifySweep,
    CarathSweep,
    EstimateSweep,
    ToleranceSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub g: usize,
    pub d_values: Vec<usize>,
    pub n0_values: Vec<usize>,
    #[serde(default = "default_scale")]
    pub tuples_per_d: usize,
    #[serde(default = "default_scale")]
    pub points_per_tuple: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    pub mode: ExperimentMode,
    /// Used by the tolerance sweep only.
    #[serde(default)]
    pub grid: SweepGrid,
}

fn default_scale() -> usize {
    10
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.g == 0 {
            return Err(Error::Config("g must be positive".into()));
        }
        if self.d_values.is_empty() || self.n0_values.is_empty() {
            return Err(Error::Config("d_values and n0_values must be nonempty".into()));
        }
        if self.d_values.contains(&0) || self.n0_values.contains(&0) {
            return Err(Error::Config("d and n0 must be positive".into()));
        }
        if self.tuples_per_d == 0 || self.points_per_tuple == 0 {
            return Err(Error::Config("tuples_per_d and points_per_tuple must be positive".into()));
        }
        self.tolerances.validate()
    }

    pub fn trials(&self) -> usize {
        self.d_values.len() * self.n0_values.len() * self.tuples_per_d * self.points_per_tuple
    }
}

/// SplitMix64 finalizer over a running state.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for a path of indices below `seed`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)))
}

/// Outcome of one start point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub g: usize,
    pub d: usize,
    pub n0: usize,
    pub tuple: usize,
    pub point: usize,
    pub final_n: usize,
    pub k: usize,
    pub dil_dim: usize,
    pub verdict: Verdict,
    pub euclidean: Flag,
    pub matrix: Flag,
    pub arveson: Flag,
    pub steps: usize,
    /// `(n − n₀)/(g·n₀)`; absent when the trial errored.
    pub mu: Option<f64>,
    pub visited_matrix_not_arveson: bool,
    pub residual_point: Option<f64>,
    pub residual_isometry: Option<f64>,
    pub terms: Option<usize>,
    pub all_free: Option<bool>,
    pub error: Option<String>,
}

/// Count and most frequent dilation-subspace dimension for one kernel size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelBin {
    pub k: usize,
    pub count: usize,
    pub dil_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRow {
    pub g: usize,
    pub d: usize,
    pub n0: usize,
    pub n: usize,
    pub trials: usize,
    pub count_mat_not_arv: usize,
    pub count_euc: usize,
    pub count_arv: usize,
    pub arv_ct: usize,
    pub mat_ct: usize,
    pub kernel_hist: Vec<KernelBin>,
    pub count_fail: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarathRow {
    pub g: usize,
    pub d: usize,
    pub n0: usize,
    pub trials: usize,
    pub successes: usize,
    pub min_gain: Option<usize>,
    pub max_gain: Option<usize>,
    pub mean_gain: Option<f64>,
    pub mu_mean: Option<f64>,
    pub mu_std: Option<f64>,
    pub mu_est: f64,
    /// `mean μ − μ_est`.
    pub mu_error: Option<f64>,
    pub fails: usize,
    pub mat_not_arv: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum TableRows {
    Classify(Vec<ClassifyRow>),
    Carath(Vec<CarathRow>),
    Sweep(Vec<SweepRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rows: TableRows,
    pub trials: Vec<TrialRecord>,
}

struct Cell {
    d: usize,
    n0: usize,
    tuple: usize,
    point: usize,
}

/// Defining tuples shared across `n₀`, keyed by `(d, tuple index)`.
fn defining_tuples(spec: &ExperimentSpec) -> Result<BTreeMap<(usize, usize), SymTuple>> {
    let keys: Vec<(usize, usize)> = spec
        .d_values
        .iter()
        .flat_map(|&d| (0..spec.tuples_per_d).map(move |t| (d, t)))
        .collect();
    keys.into_par_iter()
        .map(|(d, t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[0, d as u64, t as u64]));
            random_defining_tuple(spec.g, d, &mut rng).map(|a| ((d, t), a))
        })
        .collect()
}

fn cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let mut out = Vec::with_capacity(spec.trials());
    for &d in &spec.d_values {
        for &n0 in &spec.n0_values {
            for tuple in 0..spec.tuples_per_d {
                for point in 0..spec.points_per_tuple {
                    out.push(Cell { d, n0, tuple, point });
                }
            }
        }
    }
    out
}

fn cell_rng(spec: &ExperimentSpec, c: &Cell) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(
        spec.seed,
        &[1, c.d as u64, c.n0 as u64, c.tuple as u64, c.point as u64],
    ))
}

fn failed_record(g: usize, c: &Cell, error: String) -> TrialRecord {
    TrialRecord {
        g,
        d: c.d,
        n0: c.n0,
        tuple: c.tuple,
        point: c.point,
        final_n: c.n0,
        k: 0,
        dil_dim: 0,
        verdict: Verdict::Failed,
        euclidean: Flag::Indeterminate,
        matrix: Flag::Indeterminate,
        arveson: Flag::Indeterminate,
        steps: 0,
        mu: None,
        visited_matrix_not_arveson: false,
        residual_point: None,
        residual_isometry: None,
        terms: None,
        all_free: None,
        error: Some(error),
    }
}

fn run_trial(spec: &ExperimentSpec, a: &SymTuple, c: &Cell) -> Result<(TrialRecord, SymTuple)> {
    let mut rng = cell_rng(spec, c);
    let x = random_interior_point(a, c.n0, &mut rng)?;
    let dilation = DilationOptions {
        tol: spec.tolerances,
        ..DilationOptions::default()
    };
    let carath_opts = CarathOptions {
        dilation: DilationOptions {
            tol: spec.tolerances,
            ..CarathOptions::default().dilation
        },
        ..CarathOptions::default()
    };
    let (trace, expansion) = match spec.mode {
        ExperimentMode::ClassifySweep | ExperimentMode::ToleranceSweep => {
            let opts = DilationOptions {
                target: Target::MatrixOrArveson,
                to_boundary: true,
                ..dilation
            };
            (dilate_to_extreme(a, &x, &opts, &mut rng)?, None)
        }
        ExperimentMode::EstimateSweep => (dilate_to_extreme(a, &x, &carath_opts.dilation, &mut rng)?, None),
        ExperimentMode::CarathSweep => {
            let e = carath_expand(a, &x, &carath_opts, &mut rng)?;
            (e.trace.clone(), Some(e))
        }
    };
    let last = trace.reports.last().expect("start point is always classified");
    let record = TrialRecord {
        g: spec.g,
        d: c.d,
        n0: c.n0,
        tuple: c.tuple,
        point: c.point,
        final_n: trace.final_level(),
        k: last.k,
        dil_dim: last.dil_dim,
        verdict: trace.verdict,
        euclidean: last.euclidean,
        matrix: last.matrix,
        arveson: last.arveson,
        steps: trace.steps.len(),
        mu: Some(trace.mu),
        visited_matrix_not_arveson: trace.visited_matrix_not_arveson(),
        residual_point: expansion.as_ref().filter(|e| e.succeeded()).map(|e| e.residual_point),
        residual_isometry: expansion.as_ref().filter(|e| e.succeeded()).map(|e| e.residual_isometry),
        terms: expansion.as_ref().map(|e| e.terms.len()),
        all_free: expansion.as_ref().map(|e| e.succeeded() && e.all_free()),
        error: trace.failure.clone(),
    };
    Ok((record, trace.final_point))
}

/// Runs every trial of the spec; individual failures are recorded, not
/// propagated.
pub fn run_trials(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    Ok(run_trials_with_points(spec)?.into_iter().map(|(t, _)| t).collect())
}

/// Trials with their defining tuple and terminal point, when one exists.
pub(crate) fn run_trials_with_points(
    spec: &ExperimentSpec,
) -> Result<Vec<(TrialRecord, Option<(SymTuple, SymTuple)>)>> {
    spec.validate()?;
    let tuples = defining_tuples(spec)?;
    Ok(cells(spec)
        .par_iter()
        .map(|c| {
            let a = &tuples[&(c.d, c.tuple)];
            match run_trial(spec, a, c) {
                Ok((t, y)) => (t, Some((a.clone(), y))),
                Err(e) => (failed_record(spec.g, c, e.to_string()), None),
            }
        })
        .collect())
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.mode == ExperimentMode::ToleranceSweep {
        let (rows, trials) = tolerance_sweep(spec)?;
        return Ok(ExperimentReport {
            spec: spec.clone(),
            rows: TableRows::Sweep(rows),
            trials,
        });
    }
    let trials = run_trials(spec)?;
    let rows = match spec.mode {
        ExperimentMode::ClassifySweep => TableRows::Classify(classify_rows(&trials)),
        _ => TableRows::Carath(carath_rows(&trials)),
    };
    Ok(ExperimentReport {
        spec: spec.clone(),
        rows,
        trials,
    })
}

/// Rows keyed by `(g, d, n₀, terminal n)`.
pub fn classify_rows(trials: &[TrialRecord]) -> Vec<ClassifyRow> {
    let mut groups: BTreeMap<(usize, usize, usize, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for t in trials {
        groups.entry((t.g, t.d, t.n0, t.final_n)).or_default().push(t);
    }
    groups
        .into_iter()
        .map(|((g, d, n0, n), ts)| {
            let counts = rank_nullity_counts(g, d, n);
            let ok: Vec<&&TrialRecord> = ts.iter().filter(|t| t.verdict != Verdict::Failed).collect();
            let mut bins: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
            for t in &ok {
                *bins.entry(t.k).or_default().entry(t.dil_dim).or_default() += 1;
            }
            let kernel_hist = bins
                .into_iter()
                .map(|(k, dims)| KernelBin {
                    k,
                    count: dims.values().sum(),
                    dil_dim: dims.iter().max_by_key(|(dim, c)| (**c, std::cmp::Reverse(**dim))).map_or(0, |(dim, _)| *dim),
                })
                .collect();
            ClassifyRow {
                g,
                d,
                n0,
                n,
                trials: ts.len(),
                count_mat_not_arv: ok.iter().filter(|t| t.verdict == Verdict::MatrixNotArveson).count(),
                count_euc: ok.iter().filter(|t| t.euclidean == Flag::Yes).count(),
                count_arv: ok.iter().filter(|t| t.verdict == Verdict::Arveson).count(),
                arv_ct: counts.arveson,
                mat_ct: counts.matrix,
                kernel_hist,
                count_fail: ts.len() - ok.len(),
            }
        })
        .collect()
}

/// Rows keyed by `(g, d, n₀)` over Arveson terminations.
pub fn carath_rows(trials: &[TrialRecord]) -> Vec<CarathRow> {
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for t in trials {
        groups.entry((t.g, t.d, t.n0)).or_default().push(t);
    }
    groups
        .into_iter()
        .map(|((g, d, n0), ts)| {
            let ok: Vec<&&TrialRecord> = ts
                .iter()
                .filter(|t| t.verdict == Verdict::Arveson && t.all_free != Some(false))
                .collect();
            let gains: Vec<usize> = ok.iter().map(|t| t.final_n - n0).collect();
            let mus: Vec<f64> = ok.iter().filter_map(|t| t.mu).collect();
            let count = mus.len() as f64;
            let mean = (!mus.is_empty()).then(|| mus.iter().sum::<f64>() / count);
            let std = mean.map(|m| {
                if mus.len() > 1 {
                    (mus.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
                } else {
                    0.0
                }
            });
            let est = mu_estimate(g, d, n0);
            CarathRow {
                g,
                d,
                n0,
                trials: ts.len(),
                successes: ok.len(),
                min_gain: gains.iter().copied().min(),
                max_gain: gains.iter().copied().max(),
                mean_gain: (!gains.is_empty()).then(|| gains.iter().sum::<usize>() as f64 / gains.len() as f64),
                mu_mean: mean,
                mu_std: std,
                mu_est: est,
                mu_error: mean.map(|m| m - est),
                fails: ts.len() - ok.len(),
                mat_not_arv: ts.iter().filter(|t| t.visited_matrix_not_arveson).count(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = derive_seed(7, &[1, 2, 3]);
        assert_eq!(a, derive_seed(7, &[1, 2, 3]));
        assert_ne!(a, derive_seed(7, &[1, 3, 2]));
        assert_ne!(a, derive_seed(8, &[1, 2, 3]));
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec {
            g: 2,
            d_values: vec![2],
            n0_values: vec![1],
            tuples_per_d: 1,
            points_per_tuple: 1,
            seed: 0,
            tolerances: ToleranceConfig::default(),
            mode: ExperimentMode::ClassifySweep,
            grid: SweepGrid::default(),
        };
        assert!(spec.validate().is_ok());
        spec.n0_values.clear();
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn spin_disk_sized_batch_terminates_at_arveson_count() {
        let spec = ExperimentSpec {
            g: 2,
            d_values: vec![2],
            n0_values: vec![3],
            tuples_per_d: 2,
            points_per_tuple: 3,
            seed: 11,
            tolerances: ToleranceConfig::default(),
            mode: ExperimentMode::ClassifySweep,
            grid: SweepGrid::default(),
        };
        let report = run_experiment(&spec).unwrap();
        let TableRows::Classify(rows) = &report.rows else { unreachable!() };
        let total: usize = rows.iter().map(|r| r.trials).sum();
        assert_eq!(total, 6);
        for r in rows.iter().filter(|r| r.count_arv > 0) {
            assert_eq!(r.n, 5);
            assert!(r.kernel_hist.iter().all(|b| b.k == 5));
        }
    }
}
