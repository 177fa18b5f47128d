//! Batch front-end behind the `bayescv` binary.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 failed oracle check, 1 anything else (I/O on outputs, internal errors).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::config::{Mode, RunConfig};
use crate::criteria::{evaluate, reports_to_json, write_reports_csv, EvaluateOptions};
use crate::error::{Error, Result};
use crate::experiments::{git_describe, plan_nu_prime, run_experiment, run_sweep, write_outputs, Manifest};
use crate::numeric::{derive_seed, tag};
use crate::oracle::{conjugate_checks, format_table, write_checks_csv};
use crate::posterior::build_posterior;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

/// Environment variable naming the root for relative `output_dir` values.
pub const OUT_ROOT_ENV: &str = "BAYESCV_OUT_ROOT";

/// Seed of the hermetic oracle check; `--seed` does not change it.
pub const ORACLE_SEED: u64 = 20;

#[derive(Debug, Parser)]
#[command(name = "bayescv", version, about = "Cross-validation, WAIC, DIC and free energy on tempered posteriors")]
pub struct Args {
    /// Run-plan TOML file (optional for oracle-check).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// evaluate | experiment | sweep | oracle-check; overrides the config.
    #[arg(long)]
    pub mode: Option<Mode>,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Evaluate => "evaluate",
            Mode::Experiment => "experiment",
            Mode::Sweep => "sweep",
            Mode::OracleCheck => "oracle-check",
        })
    }
}

enum Outcome {
    Done,
    OracleFailed,
}

/// Parses `argv`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&args) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::OracleFailed) => EXIT_ORACLE,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_OTHER,
    }
}

/// Configuration after command-line overrides.
pub fn resolve_config(args: &Args) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::from_path(p)?,
        None if args.mode == Some(Mode::OracleCheck) => RunConfig::default(),
        None => return Err(Error::Config(vec!["--config is required unless --mode oracle-check".into()])),
    };
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

pub fn output_dir(args: &Args, cfg: &RunConfig) -> PathBuf {
    if let Some(out) = &args.out {
        return out.clone();
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => Path::new(&root).join(&cfg.output_dir),
        _ => cfg.output_dir.clone(),
    }
}

fn run(args: &Args) -> Result<Outcome> {
    let cfg = resolve_config(args)?;
    if let Some(k) = args.workers {
        if k == 0 {
            return Err(Error::Config(vec!["--workers must be >= 1".into()]));
        }
    }
    let dir = output_dir(args, &cfg);
    fs::create_dir_all(&dir)
        .map_err(|e| Error::Config(vec![format!("output directory {} is not writable: {e}", dir.display())]))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = args.workers {
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| Error::InvalidInput(e.to_string()))?;
    pool.install(|| dispatch(&cfg, &dir))
}

fn write_config_echo(dir: &Path, cfg: &RunConfig) -> Result<serde_json::Value> {
    fs::write(dir.join("config.toml"), cfg.to_toml_string()?)?;
    cfg.to_json()
}

fn write_manifest(dir: &Path, cfg: &RunConfig, config: &serde_json::Value, seeds: Vec<u64>) -> Result<()> {
    let m = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        git_describe: git_describe(),
        master_seed: cfg.master_seed,
        replicate_seeds: seeds,
        config,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&m)?)?;
    Ok(())
}

fn dispatch(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    if cfg.mode == Mode::OracleCheck {
        let checks = conjugate_checks(ORACLE_SEED)?;
        write_checks_csv(fs::File::create(dir.join("oracle_check.csv"))?, &checks)?;
        eprint!("{}", format_table(&checks));
        let failed = checks.iter().filter(|c| !c.pass).count();
        return Ok(if failed == 0 {
            eprintln!("oracle-check: all {} checks passed", checks.len());
            Outcome::Done
        } else {
            eprintln!("oracle-check: {failed} of {} checks failed", checks.len());
            Outcome::OracleFailed
        });
    }
    let scenario = cfg.scenario()?;
    let plan = cfg.plan(&scenario)?;
    let config = write_config_echo(dir, cfg)?;
    match cfg.mode {
        Mode::Evaluate => {
            let model = scenario.model.as_ref();
            let data = plan.dataset(&scenario, 0)?;
            let ens = build_posterior(model, &data, plan.beta, &plan.backend_for(0, 0))?;
            let opts = EvaluateOptions {
                truth: (plan.test_size > 0).then_some(scenario.truth.as_ref()),
                test_size: plan.test_size.max(1),
                seed: derive_seed(plan.replicate_seed(0), &[tag("eval")]),
                cv1: plan.cv1.then(|| plan.backend_for(0, 1)),
                square_error: plan.square_error,
                neff_floor_fraction: plan.neff_floor_fraction,
            };
            let report = evaluate(model, &data, &ens, &opts)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let reports = [report];
            write_reports_csv(fs::File::create(dir.join("reports.csv"))?, &reports)?;
            fs::write(dir.join("report.json"), reports_to_json(&reports)?)?;
            write_manifest(dir, cfg, &config, vec![plan.replicate_seed(0)])?;
        }
        Mode::Experiment => {
            let mut result = run_experiment(&scenario, &plan)?;
            if cfg.plan.nu_prime_step > 0.0 {
                let est = plan_nu_prime(&scenario, &plan, cfg.plan.nu_prime_step)?;
                if let Some(inv) = result.summary.invariants.as_mut() {
                    inv.nu_prime_hat = Some(est);
                }
            }
            for (r, e) in &result.summary.failures {
                eprintln!("warning: replicate {r} failed: {e}");
            }
            write_outputs(dir, &result, &config)?;
            eprintln!(
                "experiment: {} of {} replicates succeeded; outputs in {}",
                result.summary.survivors,
                plan.replicates,
                dir.display()
            );
        }
        Mode::Sweep => {
            let (results, fit) = run_sweep(&scenario, &plan)?;
            let mut all = Vec::new();
            let mut seeds = Vec::new();
            for r in &results {
                write_outputs(&dir.join(format!("n{}", r.plan.n)), r, &config)?;
                all.extend(r.reports.iter().cloned());
                seeds.extend((0..r.plan.replicates).map(|k| r.plan.replicate_seed(k)));
            }
            write_reports_csv(fs::File::create(dir.join("reports.csv"))?, &all)?;
            let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
            w.write_record(["n", "median_abs_cv_minus_waic", "median_abs_cv_expansion", "median_abs_cv_minus_waic_leading"])?;
            for (k, n) in fit.ns.iter().enumerate() {
                w.write_record([
                    n.to_string(),
                    format!("{:?}", fit.median_abs_cv_minus_waic[k]),
                    format!("{:?}", fit.median_abs_cv_expansion[k]),
                    format!("{:?}", fit.median_abs_cv_minus_waic_leading[k]),
                ])?;
            }
            w.flush()?;
            fs::write(dir.join("fit.json"), serde_json::to_string_pretty(&fit)?)?;
            write_manifest(dir, cfg, &config, seeds)?;
            eprintln!(
                "sweep: slope of median |CV2 - WAIC| = {:.3}; outputs in {}",
                fit.slope_cv_minus_waic,
                dir.display()
            );
        }
        Mode::OracleCheck => unreachable!(),
    }
    Ok(Outcome::Done)
}
