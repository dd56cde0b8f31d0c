//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{boundary_points, containment_nullity, noisy_fixture, random_lp, rng, spin_disk, vertex_enumeration};
use num_traits::Zero;
use spectrex_core::exact::certificate::{g3_alpha_polynomial, g3_certificate, g4_certificate};
use spectrex_core::exact::{char_poly_param, Certificate, Rational};
use spectrex_core::kernel::kernel_dim;
use spectrex_core::lab::{boundedness_check, random_defining_tuple, random_interior_point, random_tuple};
use spectrex_core::opt::{solve_lp, SolveStatus};
use spectrex_core::projective::spin_disk_det;
use spectrex_core::{
    classify, dilate_to_extreme, eval_pencil, image_pencil, lmi_kernel, projective_map_point, psd_within_slack,
    purify_full, rank_nullity_counts, run_experiment, spin_disk_map, to_boundary, verify_certificate,
    DilationOptions, ExperimentMode, ExperimentSpec, Flag, PurifyObjective, ToleranceConfig, Verdict,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent <= limit, format!("took {spent:.1?}, limit {limit:?}"))
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn exact_g3() -> Outcome {
    let start = Instant::now();
    let cert = g3_certificate().map_err(|e| e.to_string())?;
    let report = verify_certificate(&cert).map_err(|e| e.to_string())?;
    ensure(report.passed(), format!("failed claims: {:?}", report.failures().collect::<Vec<_>>()))?;
    ensure(report.kernel_dim == 2, format!("kernel dimension {}", report.kernel_dim))?;
    let Certificate::Parametric(c) = &cert else {
        return Err("not parametric".into());
    };
    // The derivative of χ at t = 0, normalized so its constant term matches.
    let p1 = char_poly_param(&c.a, &c.y).map_err(|e| e.to_string())?.p1();
    let p0 = p1.eval(&Rational::zero());
    ensure(!p0.is_zero(), "p₁(0) vanishes")?;
    let p = p1.scale(&(q(20828330523, 1) / p0));
    ensure(p == g3_alpha_polynomial(), "normalized p₁ differs from the stated polynomial")?;
    let at_eighth = p.eval(&q(1, 8));
    ensure(at_eighth == q(-208047637414661, 32768), format!("p(1/8) = {at_eighth}"))?;
    let (smin, smax) = (report.sigma_min.unwrap_or(f64::NAN), report.sigma_max.unwrap_or(f64::NAN));
    ensure((smin - 0.0318244).abs() <= 1e-4, format!("σ_min = {smin}"))?;
    ensure(smax < 5.0, format!("σ_max = {smax}"))?;
    within(Duration::from_secs(120), start)?;
    Ok(format!("p(0), p(1/8) exact; k=2; σ_min={smin:.7}, σ_max={smax:.4}; {:.2?}", start.elapsed()))
}

fn exact_g4() -> Outcome {
    let start = Instant::now();
    let cert = g4_certificate().map_err(|e| e.to_string())?;
    let Certificate::Radical(c) = &cert else {
        return Err("not radical".into());
    };
    let blocks = c.a_diagonals.first().map_or(0, Vec::len);
    let report = verify_certificate(&cert).map_err(|e| e.to_string())?;
    ensure(report.passed(), format!("failed claims: {:?}", report.failures().collect::<Vec<_>>()))?;
    ensure(blocks == 9, format!("{blocks} diagonal blocks"))?;
    let digits = report.precision_digits.unwrap_or(0);
    ensure(digits >= 50, format!("{digits} digits"))?;
    ensure(report.matrix == Some(Flag::Yes), format!("matrix flag {:?}", report.matrix))?;
    ensure(report.arveson == Some(Flag::No), format!("Arveson flag {:?}", report.arveson))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!("9 blocks PSD at {digits} digits; matrix yes, Arveson no; {:.2?}", start.elapsed()))
}

fn counts() -> Outcome {
    for ((g, d, n), (arv, mat)) in [((3, 4, 3), (3, 2)), ((2, 3, 8), (6, 5)), ((4, 7, 2), (2, 1)), ((2, 2, 5), (5, 5))] {
        let c = rank_nullity_counts(g, d, n);
        ensure(
            (c.arveson, c.matrix) == (arv, mat),
            format!("({g},{d},{n}) gave ({},{})", c.arveson, c.matrix),
        )?;
    }
    Ok("4/4 table headers".into())
}

fn mu_law() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for g in [2, 3] {
        let spec = ExperimentSpec {
            g,
            d_values: vec![g],
            n0_values: vec![2, 3],
            tuples_per_d: 5,
            points_per_tuple: 5,
            seed: 4,
            tolerances: ToleranceConfig::default(),
            mode: ExperimentMode::CarathSweep,
            grid: Default::default(),
        };
        let report = run_experiment(&spec).map_err(|e| e.to_string())?;
        for n0 in [2, 3] {
            let trials: Vec<_> = report.trials.iter().filter(|t| t.n0 == n0).collect();
            let mut fails = 0;
            for t in &trials {
                if t.verdict != Verdict::Arveson {
                    fails += 1;
                    continue;
                }
                ensure(
                    t.steps == n0 && t.final_n - n0 == n0,
                    format!("g={g} n0={n0}: {} steps to n={}", t.steps, t.final_n),
                )?;
                ensure(t.mu == Some(1.0 / g as f64), format!("g={g} n0={n0}: μ = {:?}", t.mu))?;
            }
            ensure(fails * 10 <= trials.len(), format!("g={g} n0={n0}: {fails}/{} failed", trials.len()))?;
            notes.push(format!("g={g},n0={n0}: {fails}/{} fail", trials.len()));
        }
    }
    within(Duration::from_secs(600), start)?;
    Ok(format!("μ = 1/g with steps = n0 on every success; {}", notes.join(", ")))
}

fn dilation_bounds() -> Outcome {
    let tol = ToleranceConfig::default();
    let (mut successes, mut trials) = (0, 0);
    for g in [2, 3] {
        let mut r = rng(500 + g as u64);
        for i in 0..100 {
            let d = 3 + i % 2;
            let n0 = 1 + (i / 2) % 2;
            let a = random_defining_tuple(g, d, &mut r).map_err(|e| e.to_string())?;
            let x = random_interior_point(&a, n0, &mut r).map_err(|e| e.to_string())?;
            let opts = DilationOptions { to_boundary: true, ..DilationOptions::default() };
            let trace = dilate_to_extreme(&a, &x, &opts, &mut r).map_err(|e| e.to_string())?;
            trials += 1;
            if trace.verdict == Verdict::Failed {
                continue;
            }
            successes += 1;
            ensure(trace.steps.len() <= g * n0, format!("{} steps from n0={n0} with g={g}", trace.steps.len()))?;
            let l = eval_pencil(&a, &trace.final_point).map_err(|e| e.to_string())?;
            ensure(psd_within_slack(l.matrix(), tol.psd_slack), "terminal point outside the slack")?;
        }
    }
    Ok(format!("{successes}/{trials} successful traces within g·n0 steps and PSD to 1e-11"))
}

fn purification() -> Outcome {
    let cfg = ToleranceConfig::default();
    let (mut recovered, total) = (0, 100);
    let mut worst: f64 = 0.0;
    for seed in 0..total {
        let (a, clean, noisy) = noisy_fixture(2 + seed as usize % 2, 3 + seed as usize % 2, 1000 + seed, 1e-8);
        let clean_k = kernel_dim(&a, &clean, cfg.lmi_post).map_err(|e| e.to_string())?;
        let p = purify_full(&a, &noisy, &cfg, PurifyObjective::Diagonal).map_err(|e| e.to_string())?;
        let moved = p
            .point
            .sub(&noisy)
            .map_err(|e| e.to_string())?
            .mats()
            .iter()
            .flat_map(|m| m.iter().copied())
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        worst = worst.max(moved);
        if kernel_dim(&a, &p.point, cfg.lmi_post).map_err(|e| e.to_string())? == clean_k {
            recovered += 1;
        }
    }
    ensure(worst <= 1e-7, format!("purification moved an entry by {worst:e}"))?;
    ensure(recovered * 10 >= total * 9, format!("recovered {recovered}/{total}"))?;
    Ok(format!("kernel recovered {recovered}/{total}; max move {worst:.2e}"))
}

fn caratheodory() -> Outcome {
    let spec = ExperimentSpec {
        g: 3,
        d_values: vec![4],
        n0_values: vec![2],
        tuples_per_d: 10,
        points_per_tuple: 5,
        seed: 7,
        tolerances: ToleranceConfig::default(),
        mode: ExperimentMode::CarathSweep,
        grid: Default::default(),
    };
    let report = run_experiment(&spec).map_err(|e| e.to_string())?;
    let mut successes = 0;
    let (mut worst_point, mut worst_iso): (f64, f64) = (0.0, 0.0);
    for t in &report.trials {
        if t.verdict != Verdict::Arveson || t.all_free != Some(true) {
            continue;
        }
        let (rp, ri) = (t.residual_point.unwrap_or(f64::INFINITY), t.residual_isometry.unwrap_or(f64::INFINITY));
        ensure(rp <= 1e-8 && ri <= 1e-8, format!("residuals {rp:e}, {ri:e}"))?;
        worst_point = worst_point.max(rp);
        worst_iso = worst_iso.max(ri);
        successes += 1;
    }
    let total = report.trials.len();
    ensure(successes * 10 >= total * 9, format!("{successes}/{total} expansions"))?;
    Ok(format!("{successes}/{total} free expansions; residuals ≤ {worst_point:.1e}, {worst_iso:.1e}"))
}

fn table_signal() -> Outcome {
    let spec = ExperimentSpec {
        g: 3,
        d_values: vec![4],
        n0_values: vec![2],
        tuples_per_d: 10,
        points_per_tuple: 10,
        seed: 8,
        tolerances: ToleranceConfig::default(),
        mode: ExperimentMode::ClassifySweep,
        grid: Default::default(),
    };
    let report = run_experiment(&spec).map_err(|e| e.to_string())?;
    let hits: Vec<_> = report.trials.iter().filter(|t| t.verdict == Verdict::MatrixNotArveson).collect();
    let at_signal = hits.iter().filter(|t| t.final_n == 3 && t.k == 2).count();
    ensure(at_signal >= 1, "no matrix-not-Arveson point at n=3, k=2")?;
    for t in &hits {
        let c = rank_nullity_counts(t.g, t.d, t.final_n);
        ensure(c.arveson > c.matrix, format!("hit at n={} with ArvCT={} ≤ MatCT={}", t.final_n, c.arveson, c.matrix))?;
    }
    Ok(format!("{at_signal}/{} terminal points matrix-not-Arveson at n=3, k=2", report.trials.len()))
}

fn two_by_two() -> Outcome {
    let mut terminations = 0;
    let mut r = rng(900);
    for _ in 0..100 {
        let a = random_defining_tuple(2, 2, &mut r).map_err(|e| e.to_string())?;
        let x = random_interior_point(&a, 2, &mut r).map_err(|e| e.to_string())?;
        let opts = DilationOptions { to_boundary: true, ..DilationOptions::default() };
        let trace = dilate_to_extreme(&a, &x, &opts, &mut r).map_err(|e| e.to_string())?;
        ensure(trace.verdict != Verdict::MatrixNotArveson, "matrix-not-Arveson verdict with d=2")?;
        terminations += 1;
    }
    // Three 2×2 coordinates always span a space containing I.
    let mut bounded = 0;
    for _ in 0..100 {
        let a = random_tuple(3, 2, &mut r).map_err(|e| e.to_string())?;
        if boundedness_check(&a).map_err(|e| e.to_string())? {
            bounded += 1;
        }
    }
    ensure(bounded == 0, format!("{bounded} bounded g=3, d=2 tuples"))?;
    Ok(format!("g=2: 0/{terminations} matrix-not-Arveson; g=3: no bounded tuple exists (0/100 draws)"))
}

fn spin_disk_canonical() -> Outcome {
    let cfg = ToleranceConfig::default();
    let b = spin_disk();
    let mut r = rng(1010);
    let (mut worst_form, mut worst_det): (f64, f64) = (0.0, 0.0);
    let mut flags = 0;
    for _ in 0..100 {
        let a = random_defining_tuple(2, 2, &mut r).map_err(|e| e.to_string())?;
        let map = spin_disk_map(&a).map_err(|e| e.to_string())?;
        let image = image_pencil(&map, &a).map_err(|e| e.to_string())?;
        let form = (image.inhomogeneous() - nalgebra::DMatrix::identity(2, 2)).norm()
            + image.rest().sub(&b).map_err(|e| e.to_string())?.norm();
        worst_form = worst_form.max(form);
        let closed = spin_disk_det(&a).map_err(|e| e.to_string())?;
        worst_det = worst_det.max((closed - map.det).abs() / (1.0 + closed.abs()));
        let x = random_interior_point(&a, 2, &mut r).map_err(|e| e.to_string())?;
        let p = to_boundary(&a, &x).map_err(|e| e.to_string())?;
        let before = classify(&a, &p, &cfg).map_err(|e| e.to_string())?.matrix;
        let mapped = projective_map_point(&map, &p).map_err(|e| e.to_string())?;
        let after = classify(&b, &mapped, &cfg).map_err(|e| e.to_string())?.matrix;
        ensure(before == after, format!("matrix flag {before:?} became {after:?}"))?;
        flags += 1;
    }
    ensure(worst_form <= 1e-10, format!("image pencil off by {worst_form:e}"))?;
    ensure(worst_det <= 1e-12, format!("determinant off by {worst_det:e}"))?;
    Ok(format!("form error ≤ {worst_form:.1e}, det error ≤ {worst_det:.1e}, {flags} flags preserved"))
}

fn oracles() -> Outcome {
    let cfg = ToleranceConfig::default();
    let mut compared = 0;
    'outer: for (g, d, n0, seed) in [(3, 4, 2, 1), (2, 3, 1, 2), (3, 3, 1, 3), (2, 4, 2, 4)] {
        for (a, x) in boundary_points(g, d, n0, 16, 3, seed) {
            let report = classify(&a, &x, &cfg).map_err(|e| e.to_string())?;
            let Some(kernel) = lmi_kernel(&a, &x, cfg.lmi_post).map_err(|e| e.to_string())? else {
                continue;
            };
            if report.matrix == Flag::Indeterminate {
                continue;
            }
            let (nullity, _) = containment_nullity(&a, &x, &kernel.basis);
            ensure(
                report.matrix.is_yes() == (nullity == 1),
                format!("g={g} d={d} n={}: flag {:?}, oracle nullity {nullity}", x.n(), report.matrix),
            )?;
            compared += 1;
            if compared == 50 {
                break 'outer;
            }
        }
    }
    ensure(compared == 50, format!("only {compared} comparable instances"))?;
    for seed in 0..50u64 {
        let vars = 2 + (seed as usize % 5);
        let lp = random_lp(vars, vars + 2, 7000 + seed);
        let sol = solve_lp(&lp).map_err(|e| e.to_string())?;
        ensure(sol.status == SolveStatus::Optimal, format!("LP {seed} ended {:?}", sol.status))?;
        let oracle = vertex_enumeration(&lp).ok_or("vertex enumeration found nothing")?;
        ensure((sol.objective - oracle).abs() <= 1e-8, format!("LP {seed}: {} vs {oracle}", sol.objective))?;
    }
    Ok("50/50 matrix flags match the containment oracle; 50/50 LPs match vertex enumeration".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("exact g=3 certificate", exact_g3),
        ("exact g=4 certificate", exact_g4),
        ("rank-nullity counts", counts),
        ("g=d mu law", mu_law),
        ("dilation bounds", dilation_bounds),
        ("purification efficacy", purification),
        ("caratheodory reconstruction", caratheodory),
        ("desk-scale matrix-not-Arveson signal", table_signal),
        ("d=2 coincidence", two_by_two),
        ("spin-disk canonical form", spin_disk_canonical),
        ("oracle equivalences", oracles),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
