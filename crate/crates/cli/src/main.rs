use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use spectrex_core::exact::{exact_search, verify_certificate, Certificate, SearchOptions};
use spectrex_core::io::{read_rational_tuple, read_sym_tuple, TupleDocument};
use spectrex_core::lab::{run_experiment, write_report, ExperimentMode, ExperimentSpec};
use spectrex_core::projective::{image_pencil, spin_disk_map};
use spectrex_core::{
    carath_expand, classify, dilate_to_extreme, purify_frozen, purify_full, CarathOptions, DilationOptions,
    PurifyMode, PurifyObjective, Target, ToleranceConfig,
};

#[derive(Parser)]
#[command(name = "spectrex", version, about = "Extreme points of free spectrahedra")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    /// Write JSON output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// TOML or JSON file holding a tolerance block; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    lmi_mag: Option<f64>,
    #[arg(long, global = true)]
    lmi_gap: Option<f64>,
    #[arg(long, global = true)]
    ee_mag: Option<f64>,
    #[arg(long, global = true)]
    ee_gap: Option<f64>,
    #[arg(long, global = true)]
    purify_eps: Option<f64>,
    #[arg(long, global = true)]
    psd_slack: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<ToleranceConfig> {
        let mut cfg = match &self.config {
            Some(path) => parse_config(path)?,
            None => ToleranceConfig::default(),
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.lmi_post.mag, self.lmi_mag);
        set(&mut cfg.lmi_post.gap, self.lmi_gap);
        set(&mut cfg.ee.mag, self.ee_mag);
        set(&mut cfg.ee.gap, self.ee_gap);
        set(&mut cfg.purify_eps, self.purify_eps);
        set(&mut cfg.psd_slack, self.psd_slack);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Accepts either a bare tolerance block or one nested under `tolerances`.
fn parse_config(path: &Path) -> Result<ToleranceConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).context("parsing TOML config")?
    } else {
        serde_json::from_str(&text).context("parsing JSON config")?
    };
    let block = value.get("tolerances").cloned().unwrap_or(value);
    serde_json::from_value(block).context("tolerance block")
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Arveson,
    MatrixOrArveson,
}

#[derive(Clone, Copy, ValueEnum)]
enum PurifyArg {
    Full,
    Frozen,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Euclidean, matrix and Arveson flags of a point.
    Classify {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Dilate a point until it is extreme.
    Dilate {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long)]
        point: PathBuf,
        #[arg(long, value_enum, default_value = "arveson")]
        target: TargetArg,
        #[arg(long, value_enum, default_value = "full")]
        purify: PurifyArg,
        /// Move the start point to the boundary along its ray first.
        #[arg(long)]
        to_boundary: bool,
        #[arg(long, env = "SPECTREX_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Nullspace purification of a boundary point.
    Purify {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long)]
        point: PathBuf,
        /// Keep the leading block of this size fixed.
        #[arg(long)]
        frozen: Option<usize>,
    },
    /// Free Caratheodory expansion of a point.
    Carath {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long)]
        point: PathBuf,
        #[arg(long, env = "SPECTREX_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Caratheodory statistics for an experiment spec, as CSV.
    CarathBatch {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Spin-disk canonical form of a bounded pair of 2x2 matrices.
    CanonicalG2d2 {
        #[arg(long)]
        pencil: PathBuf,
    },
    /// Random exact search for a point with two-dimensional kernel.
    ExactSearch {
        #[arg(long)]
        pencil: PathBuf,
        /// Level of the emitted point.
        #[arg(long)]
        n: usize,
        #[arg(long, env = "SPECTREX_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        budget: usize,
    },
    /// Check every claim of a certificate.
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Run an experiment spec and write rows.csv, rows.json, table.md, mu.csv.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "out-dir", default_value = "out")]
        out_dir: PathBuf,
    },
    /// Reclassify the points of a spec across a tolerance grid.
    TolSweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "out-dir", default_value = "out")]
        out_dir: PathBuf,
    },
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => print_stdout(&(text + "\n"))?,
    }
    Ok(())
}

/// Writes to stdout; a closed pipe ends output quietly.
fn print_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn read_spec(path: &Path, tol: &TolArgs) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text).context("parsing experiment spec")?;
    if let Ok(seed) = std::env::var("SPECTREX_SEED") {
        spec.seed = seed.parse().context("SPECTREX_SEED must be an unsigned integer")?;
    }
    if tol.config.is_some() || tol.lmi_mag.is_some() || tol.ee_mag.is_some() {
        spec.tolerances = tol.resolve()?;
    }
    Ok(spec)
}

fn run(cli: Cli) -> Result<bool> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Classify { pencil, point } => {
            let cfg = cli.tol.resolve()?;
            let report = classify(&read_sym_tuple(pencil)?, &read_sym_tuple(point)?, &cfg)?;
            emit(out, &report)?;
        }
        Command::Dilate {
            pencil,
            point,
            target,
            purify,
            to_boundary,
            seed,
        } => {
            let opts = DilationOptions {
                target: match target {
                    TargetArg::Arveson => Target::ArvesonOnly,
                    TargetArg::MatrixOrArveson => Target::MatrixOrArveson,
                },
                purify: match purify {
                    PurifyArg::Full => PurifyMode::Full,
                    PurifyArg::Frozen => PurifyMode::Frozen,
                    PurifyArg::Off => PurifyMode::Off,
                },
                to_boundary,
                tol: cli.tol.resolve()?,
                ..DilationOptions::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let trace = dilate_to_extreme(&read_sym_tuple(pencil)?, &read_sym_tuple(point)?, &opts, &mut rng)?;
            emit(out, &trace)?;
        }
        Command::Purify { pencil, point, frozen } => {
            let cfg = cli.tol.resolve()?;
            let (a, x) = (read_sym_tuple(pencil)?, read_sym_tuple(point)?);
            let p = match frozen {
                Some(n0) => purify_frozen(&a, &x, n0, &cfg, PurifyObjective::Diagonal)?,
                None => purify_full(&a, &x, &cfg, PurifyObjective::Diagonal)?,
            };
            emit(
                out,
                &json!({ "point": TupleDocument::from_sym_tuple(&p.point), "eta": p.eta, "kernel_dim": p.kernel_dim }),
            )?;
        }
        Command::Carath { pencil, point, seed } => {
            let mut opts = CarathOptions::default();
            opts.dilation.tol = cli.tol.resolve()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let e = carath_expand(&read_sym_tuple(pencil)?, &read_sym_tuple(point)?, &opts, &mut rng)?;
            emit(out, &e)?;
        }
        Command::CarathBatch { spec } => {
            let mut spec = read_spec(&spec, &cli.tol)?;
            spec.mode = ExperimentMode::CarathSweep;
            let report = run_experiment(&spec)?;
            let csv = spectrex_core::lab::report::rows_csv(&report.rows)?;
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => print_stdout(&csv)?,
            }
        }
        Command::CanonicalG2d2 { pencil } => {
            let a = read_sym_tuple(pencil)?;
            let map = spin_disk_map(&a)?;
            let image = image_pencil(&map, &a)?;
            emit(
                out,
                &json!({
                    "map": map,
                    "image": TupleDocument::from_hom_tuple(&image),
                }),
            )?;
        }
        Command::ExactSearch {
            pencil,
            n,
            seed,
            budget,
        } => {
            let a = read_rational_tuple(pencil)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let opts = SearchOptions {
                budget,
                ..SearchOptions::default()
            };
            let outcome = exact_search(&a, n, &mut rng, &opts)?;
            let found = outcome.certificate.is_some();
            match &outcome.certificate {
                Some(cert) => emit(out, cert)?,
                None => emit(out, &json!({ "certificate": null, "stats": outcome.stats }))?,
            }
            if !found {
                eprintln!("no certificate within a budget of {budget}");
                return Ok(false);
            }
        }
        Command::Verify { cert } => {
            let text = std::fs::read_to_string(&cert).with_context(|| format!("reading {}", cert.display()))?;
            let cert: Certificate = serde_json::from_str(&text).context("parsing certificate")?;
            let report = verify_certificate(&cert)?;
            emit(out, &report)?;
            return Ok(report.passed());
        }
        Command::Experiment { spec, out_dir } => {
            let spec = read_spec(&spec, &cli.tol)?;
            if spec.mode == ExperimentMode::ToleranceSweep {
                bail!("use tol-sweep for tolerance sweeps");
            }
            let files = write_report(&run_experiment(&spec)?, &out_dir)?;
            eprintln!("wrote {}", files.csv.display());
        }
        Command::TolSweep { spec, out_dir } => {
            let mut spec = read_spec(&spec, &cli.tol)?;
            spec.mode = ExperimentMode::ToleranceSweep;
            let files = write_report(&run_experiment(&spec)?, &out_dir)?;
            eprintln!("wrote {}", files.csv.display());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
