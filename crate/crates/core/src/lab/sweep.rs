//! Reclassification of a fixed point set across a tolerance grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::experiment::{run_trials_with_points, ExperimentMode, ExperimentSpec, TrialRecord};
use crate::dilation::Verdict;
use crate::error::Result;
use crate::extreme::{classify, Flag};
use crate::kernel::{ToleranceConfig, ZeroTol};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// Magnitude and gap of the post-purification kernel tolerance.
    pub lmi: Vec<f64>,
    /// Magnitude and gap of the extreme-equation tolerance.
    pub ee: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            lmi: vec![1e-9, 1e-10, 1e-11, 1e-12, 1e-13],
            ee: vec![1e-10, 1e-12, 1e-15],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lmi: f64,
    pub ee: f64,
    pub points: usize,
    pub mean_k: f64,
    pub count_mat_not_arv: usize,
    pub count_euc: usize,
    pub count_arv: usize,
    pub count_indeterminate: usize,
    pub errors: usize,
    /// Points whose `(k, euclidean, matrix, arveson)` differ from the
    /// classification under the spec's own tolerances.
    pub flips: usize,
}

type Signature = Option<(usize, Flag, Flag, Flag)>;

/// Generates terminal points with the spec's tolerances, then reclassifies
/// each under every `(lmi, ee)` pair of the grid.
pub fn tolerance_sweep(spec: &ExperimentSpec) -> Result<(Vec<SweepRow>, Vec<TrialRecord>)> {
    let generation = ExperimentSpec {
        mode: ExperimentMode::ToleranceSweep,
        ..spec.clone()
    };
    let mut trials = Vec::new();
    let mut points = Vec::new();
    for (t, pair) in run_trials_with_points(&generation)? {
        if t.verdict != Verdict::Failed {
            points.extend(pair);
        }
        trials.push(t);
    }

    let signature = |cfg: &ToleranceConfig| -> Vec<Signature> {
        points
            .par_iter()
            .map(|(a, x)| classify(a, x, cfg).ok().map(|r| (r.k, r.euclidean, r.matrix, r.arveson)))
            .collect()
    };
    let reference = signature(&spec.tolerances);
    let mut rows = Vec::new();
    for &lmi in &spec.grid.lmi {
        for &ee in &spec.grid.ee {
            let cfg = ToleranceConfig {
                lmi_post: ZeroTol::new(lmi, lmi),
                ee: ZeroTol::new(ee, ee),
                ..spec.tolerances
            };
            let sig = signature(&cfg);
            let ok: Vec<_> = sig.iter().flatten().collect();
            rows.push(SweepRow {
                lmi,
                ee,
                points: sig.len(),
                mean_k: if ok.is_empty() {
                    0.0
                } else {
                    ok.iter().map(|s| s.0 as f64).sum::<f64>() / ok.len() as f64
                },
                count_mat_not_arv: ok.iter().filter(|s| s.2 == Flag::Yes && s.3 == Flag::No).count(),
                count_euc: ok.iter().filter(|s| s.1 == Flag::Yes).count(),
                count_arv: ok.iter().filter(|s| s.3 == Flag::Yes).count(),
                count_indeterminate: ok
                    .iter()
                    .filter(|s| [s.1, s.2, s.3].contains(&Flag::Indeterminate))
                    .count(),
                errors: sig.len() - ok.len(),
                flips: sig.iter().zip(&reference).filter(|(a, b)| a != b).count(),
            });
        }
    }
    Ok((rows, trials))
}
