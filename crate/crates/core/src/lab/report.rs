//! CSV, JSON and Markdown renderings of experiment reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::experiment::{CarathRow, ClassifyRow, ExperimentReport, TableRows, TrialRecord};
use super::sweep::SweepRow;
use crate::error::Result;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn fixed(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.6}"))
}

/// `k:count;dil` entries joined by spaces.
fn histogram(row: &ClassifyRow) -> String {
    row.kernel_hist
        .iter()
        .map(|b| format!("{}:{};{}", b.k, b.count, b.dil_dim))
        .collect::<Vec<_>>()
        .join(" ")
}

fn classify_record(r: &ClassifyRow) -> Vec<String> {
    vec![
        r.g.to_string(),
        r.d.to_string(),
        r.n0.to_string(),
        r.n.to_string(),
        r.trials.to_string(),
        r.count_mat_not_arv.to_string(),
        r.count_euc.to_string(),
        r.count_arv.to_string(),
        r.arv_ct.to_string(),
        r.mat_ct.to_string(),
        histogram(r),
        r.count_fail.to_string(),
    ]
}

fn carath_record(r: &CarathRow) -> Vec<String> {
    vec![
        r.g.to_string(),
        r.d.to_string(),
        r.n0.to_string(),
        r.trials.to_string(),
        r.successes.to_string(),
        opt(r.min_gain),
        opt(r.max_gain),
        fixed(r.mean_gain),
        fixed(r.mu_mean),
        fixed(r.mu_std),
        format!("{:.6}", r.mu_est),
        fixed(r.mu_error),
        r.fails.to_string(),
        r.mat_not_arv.to_string(),
    ]
}

fn sweep_record(r: &SweepRow) -> Vec<String> {
    vec![
        format!("{:e}", r.lmi),
        format!("{:e}", r.ee),
        r.points.to_string(),
        format!("{:.6}", r.mean_k),
        r.count_mat_not_arv.to_string(),
        r.count_euc.to_string(),
        r.count_arv.to_string(),
        r.count_indeterminate.to_string(),
        r.errors.to_string(),
        r.flips.to_string(),
    ]
}

const CLASSIFY_HEADER: [&str; 12] = [
    "g", "d", "n0", "n", "trials", "mat_not_arv", "euc", "arv", "arv_ct", "mat_ct", "kernel_hist", "fail",
];
const CARATH_HEADER: [&str; 14] = [
    "g", "d", "n0", "trials", "successes", "min_gain", "max_gain", "mean_gain", "mu_mean", "mu_std", "mu_est",
    "mu_error", "fails", "mat_not_arv",
];
const SWEEP_HEADER: [&str; 10] = [
    "lmi", "ee", "points", "mean_k", "mat_not_arv", "euc", "arv", "indeterminate", "errors", "flips",
];

fn table(rows: &TableRows) -> (Vec<&'static str>, Vec<Vec<String>>) {
    match rows {
        TableRows::Classify(rs) => (CLASSIFY_HEADER.to_vec(), rs.iter().map(classify_record).collect()),
        TableRows::Carath(rs) => (CARATH_HEADER.to_vec(), rs.iter().map(carath_record).collect()),
        TableRows::Sweep(rs) => (SWEEP_HEADER.to_vec(), rs.iter().map(sweep_record).collect()),
    }
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_csv(rows: &TableRows) -> Result<String> {
    let (header, body) = table(rows);
    csv_string(&header, &body)
}

/// One line per successful trial, for external μ histograms.
pub fn mu_csv(trials: &[TrialRecord]) -> Result<String> {
    let body: Vec<Vec<String>> = trials
        .iter()
        .filter_map(|t| t.mu.map(|mu| (t, mu)))
        .map(|(t, mu)| {
            vec![
                t.g.to_string(),
                t.d.to_string(),
                t.n0.to_string(),
                t.final_n.to_string(),
                format!("{:?}", t.verdict),
                format!("{mu:.6}"),
            ]
        })
        .collect();
    csv_string(&["g", "d", "n0", "n", "verdict", "mu"], &body)
}

pub fn rows_markdown(rows: &TableRows) -> String {
    let mut out = String::new();
    let (header, body) = match rows {
        TableRows::Classify(rs) => (
            vec!["g", "d", "n₀", "n", "#Mat not Arv", "#Euc", "#Arv", "ArvCT, MatCT", "k: count;dil", "#Fail"],
            rs.iter()
                .map(|r| {
                    vec![
                        r.g.to_string(),
                        r.d.to_string(),
                        r.n0.to_string(),
                        r.n.to_string(),
                        r.count_mat_not_arv.to_string(),
                        r.count_euc.to_string(),
                        r.count_arv.to_string(),
                        format!("{},{}", r.arv_ct, r.mat_ct),
                        histogram(r),
                        r.count_fail.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        TableRows::Carath(rs) => (
            vec!["g", "d", "n₀", "min n−n₀", "max n−n₀", "mean n−n₀", "μ mean", "μ std", "μ_est", "error", "#Fail", "#Mat not Arv"],
            rs.iter()
                .map(|r| {
                    vec![
                        r.g.to_string(),
                        r.d.to_string(),
                        r.n0.to_string(),
                        opt(r.min_gain),
                        opt(r.max_gain),
                        fixed(r.mean_gain),
                        fixed(r.mu_mean),
                        fixed(r.mu_std),
                        format!("{:.3}", r.mu_est),
                        fixed(r.mu_error),
                        r.fails.to_string(),
                        r.mat_not_arv.to_string(),
                    ]
                })
                .collect(),
        ),
        TableRows::Sweep(rs) => (SWEEP_HEADER.to_vec(), rs.iter().map(sweep_record).collect()),
    };
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for r in body {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out
}

#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub markdown: PathBuf,
    pub mu: PathBuf,
}

/// Writes `rows.csv`, `rows.json`, `table.md` and `mu.csv` into `dir`.
pub fn write_report(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<ReportFiles> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let files = ReportFiles {
        csv: dir.join("rows.csv"),
        json: dir.join("rows.json"),
        markdown: dir.join("table.md"),
        mu: dir.join("mu.csv"),
    };
    std::fs::write(&files.csv, rows_csv(&report.rows)?)?;
    std::fs::write(&files.json, serde_json::to_string_pretty(report)?)?;
    std::fs::write(&files.markdown, rows_markdown(&report.rows))?;
    std::fs::write(&files.mu, mu_csv(&report.trials)?)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::experiment::KernelBin;

    #[test]
    fn classify_rows_render() {
        let rows = TableRows::Classify(vec![ClassifyRow {
            g: 2,
            d: 2,
            n0: 3,
            n: 5,
            trials: 4,
            count_mat_not_arv: 0,
            count_euc: 4,
            count_arv: 4,
            arv_ct: 5,
            mat_ct: 5,
            kernel_hist: vec![KernelBin { k: 5, count: 4, dil_dim: 0 }],
            count_fail: 0,
        }]);
        let csv = rows_csv(&rows).unwrap();
        assert_eq!(csv.lines().nth(1).unwrap(), "2,2,3,5,4,0,4,4,5,5,5:4;0,0");
        assert!(rows_markdown(&rows).contains("| 5,5 |"));
    }
}
