//! Replicated-dataset experiments: per-replicate criteria, AVR/STD summaries,
//! correlation matrices, invariant estimates and rate fits.

use std::fs;
use std::path::Path;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{bayes_generalization_loss, evaluate, write_reports_csv, CriteriaReport, EvaluateOptions};
use crate::cumulants::cumulants;
use crate::error::{Error, Result};
use crate::models::{sample_truth, Dataset, Scenario};
use crate::numeric::{derive_seed, mean, median, ols_slope, pearson, rng_from_seed, sample_std, std_error, tag};
use crate::posterior::{build_posterior, Backend, PosteriorEnsemble};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n: usize,
    pub replicates: usize,
    pub beta: f64,
    pub backend: Backend,
    /// Test-set size for `BgL` and `SE`; 0 skips the truth-oracle quantities.
    pub test_size: usize,
    pub n_sweep: Option<Vec<usize>>,
    pub master_seed: u64,
    pub cv1: bool,
    pub square_error: bool,
    /// Also compute `Bg(n-1)` on each dataset minus its last sample.
    pub bg_at_n_minus_one: bool,
    pub neff_floor_fraction: f64,
}

impl ExperimentPlan {
    pub fn new(n: usize, replicates: usize, beta: f64, backend: Backend, master_seed: u64) -> Self {
        Self {
            n,
            replicates,
            beta,
            backend,
            test_size: 10_000,
            n_sweep: None,
            master_seed,
            cv1: false,
            square_error: false,
            bg_at_n_minus_one: false,
            neff_floor_fraction: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.replicates == 0 {
            problems.push("replicates must be >= 1".to_string());
        }
        if self.n == 0 {
            problems.push("n must be >= 1".to_string());
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            problems.push(format!("beta must be positive and finite, got {}", self.beta));
        }
        if (self.cv1 || self.bg_at_n_minus_one) && self.n < 2 {
            problems.push("CV_1 and Bg(n-1) need n >= 2".to_string());
        }
        if let Some(sweep) = &self.n_sweep {
            if sweep.is_empty() || sweep[0] == 0 || sweep.windows(2).any(|w| w[1] <= w[0]) {
                problems.push("n_sweep must be nonempty, positive and strictly increasing".to_string());
            }
        }
        if let Backend::Mcmc(cfg) = &self.backend {
            if let Err(e) = cfg.validate() {
                problems.push(e.to_string());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(problems.join("; ")))
        }
    }

    /// Seed of replicate `r`.
    pub fn replicate_seed(&self, r: usize) -> u64 {
        derive_seed(self.master_seed, &[tag("replicate"), self.n as u64, r as u64])
    }

    /// Dataset of replicate `r`.
    pub fn dataset(&self, scenario: &Scenario, r: usize) -> Result<Dataset> {
        sample_truth(
            scenario.truth.as_ref(),
            self.n,
            derive_seed(self.replicate_seed(r), &[tag("data")]),
        )
    }

    /// Backend for replicate `r`, with `salt` separating extra ensembles on the same data.
    pub fn backend_for(&self, r: usize, salt: u64) -> Backend {
        match &self.backend {
            Backend::Mcmc(cfg) => Backend::Mcmc(cfg.with_seed(derive_seed(self.replicate_seed(r), &[tag("mcmc"), salt]))),
            other => other.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityStats {
    pub name: String,
    pub avr: f64,
    pub std: f64,
    pub count: usize,
}

/// Pearson correlations; `None` where a column has zero variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub entries: Vec<Vec<Option<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub survivors: usize,
    pub failures: Vec<(usize, String)>,
    pub stats: Vec<QuantityStats>,
    pub correlations: Option<CorrelationMatrix>,
    pub invariants: Option<InvariantEstimate>,
    pub loo_check: Option<LooExpectationCheck>,
}

impl ExperimentSummary {
    pub fn stat(&self, name: &str) -> Option<&QuantityStats> {
        self.stats.iter().find(|s| s.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub plan: ExperimentPlan,
    pub reports: Vec<CriteriaReport>,
    /// `Bg(n-1)` per surviving replicate, when requested.
    pub bg_prev: Vec<f64>,
    pub summary: ExperimentSummary,
}

/// Quantities tabulated by [`summarize`]; errors are relative to `Ln`.
pub const SUMMARY_QUANTITIES: [&str; 19] = [
    "bg", "bt", "cv", "waic_err", "dic1_err", "dic2_err", "cv1_err", "se", "bg_plus_cv", "cv2_minus_waic", "btl",
    "gtl", "waic", "cv2", "v_n", "y1", "y2", "y3", "y4",
];

/// Columns of the correlation matrix.
pub const CORRELATION_QUANTITIES: [&str; 7] = ["bg", "bt", "cv", "waic_err", "dic1_err", "dic2_err", "bg_plus_cv"];

/// Report field or derived error by name.
pub fn quantity(r: &CriteriaReport, name: &str) -> Option<f64> {
    match name {
        "waic_err" => Some(r.waic - r.ln),
        "dic1_err" => Some(r.dic1 - r.ln),
        "dic2_err" => Some(r.dic2 - r.ln),
        "cv1_err" => r.cv1.map(|v| v - r.ln),
        "bg_plus_cv" => Some(r.bg? + r.cv?),
        "cv2_minus_waic" => Some(r.cv2 - r.waic),
        other => r.field(other),
    }
}

fn column(reports: &[CriteriaReport], name: &str) -> Option<Vec<f64>> {
    reports.iter().map(|r| quantity(r, name)).collect()
}

pub fn summary_stats(reports: &[CriteriaReport]) -> Vec<QuantityStats> {
    SUMMARY_QUANTITIES
        .iter()
        .filter_map(|&name| {
            let col = column(reports, name)?;
            (!col.is_empty()).then(|| QuantityStats {
                name: name.to_string(),
                avr: mean(&col),
                std: if col.len() > 1 { sample_std(&col) } else { 0.0 },
                count: col.len(),
            })
        })
        .collect()
}

/// Pearson correlation matrix over the [`CORRELATION_QUANTITIES`] present in every report.
pub fn correlation_matrix(reports: &[CriteriaReport]) -> Result<CorrelationMatrix> {
    if reports.len() < 3 {
        return Err(Error::TooFewReports {
            needed: 3,
            got: reports.len(),
        });
    }
    let cols: Vec<(String, Vec<f64>)> = CORRELATION_QUANTITIES
        .iter()
        .filter_map(|&name| column(reports, name).map(|c| (name.to_string(), c)))
        .collect();
    let k = cols.len();
    let mut entries = vec![vec![None; k]; k];
    for a in 0..k {
        for b in a..k {
            let v = if a == b {
                pearson(&cols[a].1, &cols[a].1).map(|_| 1.0)
            } else {
                pearson(&cols[a].1, &cols[b].1)
            };
            entries[a][b] = v;
            entries[b][a] = v;
        }
    }
    Ok(CorrelationMatrix {
        names: cols.into_iter().map(|(n, _)| n).collect(),
        entries,
    })
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.entries[i][j]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantEstimate {
    pub lambda_hat: Estimate,
    pub lambda_hat_alt: Estimate,
    pub nu_hat: Estimate,
    pub nu_prime_hat: Option<Estimate>,
}

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

fn bootstrap_mean(values: &[f64], seed: u64) -> Estimate {
    let mut rng = rng_from_seed(seed);
    let k = values.len();
    let means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..k).map(|_| values[rng.gen_range(0..k)]).sum::<f64>() / k as f64)
        .collect();
    Estimate {
        value: mean(values),
        stderr: sample_std(&means),
    }
}

/// `lambda` from `bg + bt`, the same quantity from `bg + cv`, and `nu(beta)` from replicate reports,
/// with bootstrap standard errors.
pub fn estimate_invariants(reports: &[CriteriaReport], beta: f64, seed: u64) -> Result<InvariantEstimate> {
    if reports.len() < 3 {
        return Err(Error::TooFewReports {
            needed: 3,
            got: reports.len(),
        });
    }
    let n = reports[0].n;
    if let Some(r) = reports.iter().find(|r| r.n != n || r.beta != beta) {
        return Err(Error::InvalidInput(format!(
            "reports mix settings: (n, beta) = ({}, {}) vs ({n}, {beta})",
            r.n, r.beta
        )));
    }
    let nf = n as f64;
    let mut lam = Vec::with_capacity(reports.len());
    let mut alt = Vec::with_capacity(reports.len());
    let mut nu = Vec::with_capacity(reports.len());
    for (index, r) in reports.iter().enumerate() {
        let need = |v: Option<f64>, field| v.ok_or(Error::MissingField { index, field });
        let (bg, bt, cv) = (need(r.bg, "bg")?, need(r.bt, "bt")?, need(r.cv, "cv")?);
        let v = r.cumulants.v_n;
        lam.push(0.5 * beta * (nf * (bg + bt) + v));
        alt.push(0.5 * beta * nf * (bg + cv - (beta - 1.0) * v / nf));
        nu.push(0.5 * beta * v);
    }
    Ok(InvariantEstimate {
        lambda_hat: bootstrap_mean(&lam, derive_seed(seed, &[tag("lambda")])),
        lambda_hat_alt: bootstrap_mean(&alt, derive_seed(seed, &[tag("lambda_alt")])),
        nu_hat: bootstrap_mean(&nu, derive_seed(seed, &[tag("nu")])),
        nu_prime_hat: None,
    })
}

/// Central difference `[nu(beta + h) - nu(beta - h)] / (2h)` with
/// `nu(b) = (b/2) V(n)` computed on the same datasets; paired standard error.
pub fn estimate_nu_prime(
    scenario: &Scenario,
    datasets: &[Dataset],
    beta: f64,
    h: f64,
    backend: &Backend,
    seed: u64,
) -> Result<Estimate> {
    if !(h > 0.0 && h <= beta / 2.0) {
        return Err(Error::InvalidInput(format!("step h = {h} must lie in (0, beta/2]")));
    }
    if datasets.len() < 2 {
        return Err(Error::TooFewReports {
            needed: 2,
            got: datasets.len(),
        });
    }
    let model = scenario.model.as_ref();
    let diffs: Vec<f64> = datasets
        .par_iter()
        .enumerate()
        .map(|(r, d)| {
            let nu_at = |b: f64, side: u64| -> Result<f64> {
                let be = match backend {
                    Backend::Mcmc(cfg) => {
                        Backend::Mcmc(cfg.with_seed(derive_seed(seed, &[tag("nu_prime"), r as u64, side])))
                    }
                    other => other.clone(),
                };
                let ens = build_posterior(model, d, b, &be)?;
                Ok(0.5 * b * cumulants(&ens).v_n)
            };
            Ok((nu_at(beta + h, 1)? - nu_at(beta - h, 0)?) / (2.0 * h))
        })
        .collect::<Result<_>>()?;
    Ok(Estimate {
        value: mean(&diffs),
        stderr: std_error(&diffs),
    })
}

/// [`estimate_nu_prime`] on the plan's replicate datasets.
pub fn plan_nu_prime(scenario: &Scenario, plan: &ExperimentPlan, h: f64) -> Result<Estimate> {
    let datasets: Vec<Dataset> = (0..plan.replicates)
        .map(|r| plan.dataset(scenario, r))
        .collect::<Result<_>>()?;
    let seed = derive_seed(plan.master_seed, &[tag("nu_prime"), plan.n as u64]);
    estimate_nu_prime(scenario, &datasets, plan.beta, h, &plan.backend, seed)
}

/// `E[Cv(n)]` against `E[Bg(n-1)]` on paired datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LooExpectationCheck {
    pub cv: Estimate,
    pub bg_prev: Estimate,
}

impl LooExpectationCheck {
    pub fn combined_stderr(&self) -> f64 {
        self.cv.stderr.hypot(self.bg_prev.stderr)
    }
}

struct ReplicateOutcome {
    report: CriteriaReport,
    bg_prev: Option<f64>,
}

fn run_replicate(scenario: &Scenario, plan: &ExperimentPlan, r: usize) -> Result<ReplicateOutcome> {
    let model = scenario.model.as_ref();
    let truth = scenario.truth.as_ref();
    let data = plan.dataset(scenario, r)?;
    let ens = build_posterior(model, &data, plan.beta, &plan.backend_for(r, 0))?;
    let opts = EvaluateOptions {
        truth: (plan.test_size > 0).then_some(truth),
        test_size: plan.test_size.max(1),
        seed: derive_seed(plan.replicate_seed(r), &[tag("eval")]),
        cv1: plan.cv1.then(|| plan.backend_for(r, 1)),
        square_error: plan.square_error,
        neff_floor_fraction: plan.neff_floor_fraction,
    };
    let report = evaluate(model, &data, &ens, &opts)?;
    let bg_prev = if plan.bg_at_n_minus_one && plan.test_size > 0 {
        let prev = data.prefix(plan.n - 1, truth)?;
        let ens_prev = build_posterior(model, &prev, plan.beta, &plan.backend_for(r, 2))?;
        let g = bayes_generalization_loss(
            model,
            truth,
            &ens_prev,
            plan.test_size,
            derive_seed(plan.replicate_seed(r), &[tag("bg_prev")]),
        )?;
        g.bg.map(|e| e.value)
    } else {
        None
    };
    Ok(ReplicateOutcome { report, bg_prev })
}

/// Runs `plan.replicates` independent datasets and summarizes them.
///
/// Replicates may run concurrently; results are reduced in replicate order.
pub fn run_experiment(scenario: &Scenario, plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let outcomes: Vec<Result<ReplicateOutcome>> = (0..plan.replicates)
        .into_par_iter()
        .map(|r| run_replicate(scenario, plan, r))
        .collect();
    let mut reports = Vec::new();
    let mut bg_prev = Vec::new();
    let mut failures = Vec::new();
    let mut cv_paired = Vec::new();
    for (r, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(o) => {
                if let (Some(b), Some(c)) = (o.bg_prev, o.report.cv) {
                    bg_prev.push(b);
                    cv_paired.push(c);
                }
                reports.push(o.report);
            }
            Err(e) => failures.push((r, e.to_string())),
        }
    }
    if reports.is_empty() {
        return Err(Error::AllReplicatesFailed(plan.replicates));
    }
    let mut summary = summarize(&reports, plan.beta, plan.master_seed);
    summary.failures = failures;
    if cv_paired.len() >= 2 {
        summary.loo_check = Some(LooExpectationCheck {
            cv: Estimate {
                value: mean(&cv_paired),
                stderr: std_error(&cv_paired),
            },
            bg_prev: Estimate {
                value: mean(&bg_prev),
                stderr: std_error(&bg_prev),
            },
        });
    }
    Ok(ExperimentResult {
        plan: plan.clone(),
        reports,
        bg_prev,
        summary,
    })
}

/// AVR/STD, correlations and invariants over a set of reports.
pub fn summarize(reports: &[CriteriaReport], beta: f64, seed: u64) -> ExperimentSummary {
    ExperimentSummary {
        survivors: reports.len(),
        failures: Vec::new(),
        stats: summary_stats(reports),
        correlations: correlation_matrix(reports).ok(),
        invariants: estimate_invariants(reports, beta, derive_seed(seed, &[tag("bootstrap")])).ok(),
        loo_check: None,
    }
}

/// Per-replicate residuals of the CV/WAIC expansion and the `bg + cv` sum rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremResiduals {
    /// `cv2 - waic`.
    pub cv_minus_waic: Vec<f64>,
    /// `cv2 - (-Y1 + (2b-1)/2 Y2 - (3b^2-3b+1)/6 Y3)`.
    pub cv_expansion: Vec<f64>,
    /// `cv2 - waic - (b - b^2)/2 Y3 - (b^4 - (1-b)^4 + 1)/24 Y4`; the last
    /// coefficient is 1/12 at `b = 1`.
    pub cv_minus_waic_leading: Vec<f64>,
    /// `bg + cv - 2 lambda/(b n) - (b - 1) v_n / n`, when `bg` and `cv` are present.
    pub bg_plus_cv: Vec<f64>,
}

pub fn theorem_residuals(reports: &[CriteriaReport], lambda: f64) -> TheoremResiduals {
    let mut out = TheoremResiduals {
        cv_minus_waic: Vec::new(),
        cv_expansion: Vec::new(),
        cv_minus_waic_leading: Vec::new(),
        bg_plus_cv: Vec::new(),
    };
    for r in reports {
        let b = r.beta;
        let c = &r.cumulants;
        let nf = r.n as f64;
        out.cv_minus_waic.push(r.cv2 - r.waic);
        out.cv_expansion
            .push(r.cv2 - (-c.y1 + 0.5 * (2.0 * b - 1.0) * c.y2 - (3.0 * b * b - 3.0 * b + 1.0) / 6.0 * c.y3));
        let y4_term = (b.powi(4) - (1.0 - b).powi(4) + 1.0) / 24.0 * c.y4;
        out.cv_minus_waic_leading
            .push(r.cv2 - r.waic - 0.5 * (b - b * b) * c.y3 - y4_term);
        if let (Some(bg), Some(cv)) = (r.bg, r.cv) {
            out.bg_plus_cv
                .push(bg + cv - 2.0 * lambda / (b * nf) - (b - 1.0) * c.v_n / nf);
        }
    }
    out
}

/// Median absolute residuals per `n` and their fitted log-log slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub ns: Vec<usize>,
    pub median_abs_cv_minus_waic: Vec<f64>,
    pub median_abs_cv_expansion: Vec<f64>,
    pub median_abs_cv_minus_waic_leading: Vec<f64>,
    pub slope_cv_minus_waic: f64,
    pub slope_cv_expansion: f64,
    pub slope_cv_minus_waic_leading: f64,
}

fn median_abs(v: &[f64]) -> f64 {
    median(&v.iter().map(|x| x.abs()).collect::<Vec<_>>())
}

/// Log-log slope of `y` against `n`.
pub fn fit_rate(ns: &[usize], y: &[f64]) -> f64 {
    let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ols_slope(&lx, &ly)
}

pub fn fit_sweep(groups: &[(usize, Vec<CriteriaReport>)]) -> SweepFit {
    let ns: Vec<usize> = groups.iter().map(|(n, _)| *n).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut c = Vec::new();
    for (_, reports) in groups {
        let res = theorem_residuals(reports, f64::NAN);
        a.push(median_abs(&res.cv_minus_waic));
        b.push(median_abs(&res.cv_expansion));
        c.push(median_abs(&res.cv_minus_waic_leading));
    }
    SweepFit {
        slope_cv_minus_waic: fit_rate(&ns, &a),
        slope_cv_expansion: fit_rate(&ns, &b),
        slope_cv_minus_waic_leading: fit_rate(&ns, &c),
        ns,
        median_abs_cv_minus_waic: a,
        median_abs_cv_expansion: b,
        median_abs_cv_minus_waic_leading: c,
    }
}

/// One experiment per `n` in the plan's sweep.
pub fn run_sweep(scenario: &Scenario, plan: &ExperimentPlan) -> Result<(Vec<ExperimentResult>, SweepFit)> {
    let sweep = plan
        .n_sweep
        .clone()
        .ok_or_else(|| Error::InvalidInput("sweep needs n_sweep".into()))?;
    plan.validate()?;
    let mut results = Vec::new();
    for &n in &sweep {
        let mut p = plan.clone();
        p.n = n;
        results.push(run_experiment(scenario, &p)?);
    }
    let groups: Vec<(usize, Vec<CriteriaReport>)> = results.iter().map(|r| (r.plan.n, r.reports.clone())).collect();
    let fit = fit_sweep(&groups);
    Ok((results, fit))
}

/// Run-manifest contents.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool_version: &'static str,
    pub git_describe: String,
    pub master_seed: u64,
    pub replicate_seeds: Vec<u64>,
    pub config: &'a serde_json::Value,
}

/// `git describe --always --dirty`, or "unknown" outside a repository.
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_summary_csv(path: &Path, summary: &ExperimentSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["quantity", "avr", "std", "count"])?;
    for s in &summary.stats {
        w.write_record([s.name.clone(), fmt(s.avr), fmt(s.std), s.count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_correlations_csv(path: &Path, m: &CorrelationMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![String::new()];
    header.extend(m.names.iter().cloned());
    w.write_record(&header)?;
    for (name, row) in m.names.iter().zip(&m.entries) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|v| v.map(fmt).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv`, `correlations.csv`, `reports.csv`, `invariants.json`
/// and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, result: &ExperimentResult, config: &serde_json::Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_summary_csv(&dir.join("summary.csv"), &result.summary)?;
    if let Some(m) = &result.summary.correlations {
        write_correlations_csv(&dir.join("correlations.csv"), m)?;
    }
    write_reports_csv(fs::File::create(dir.join("reports.csv"))?, &result.reports)?;
    let inv = serde_json::json!({
        "n": result.plan.n,
        "beta": result.plan.beta,
        "survivors": result.summary.survivors,
        "failures": result.summary.failures,
        "invariants": result.summary.invariants,
        "loo_check": result.summary.loo_check,
    });
    fs::write(dir.join("invariants.json"), serde_json::to_string_pretty(&inv)?)?;
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        git_describe: git_describe(),
        master_seed: result.plan.master_seed,
        replicate_seeds: (0..result.plan.replicates).map(|r| result.plan.replicate_seed(r)).collect(),
        config,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// Ensembles of every replicate, for callers that need more than the reports.
pub fn replicate_ensembles(scenario: &Scenario, plan: &ExperimentPlan) -> Result<Vec<(Dataset, PosteriorEnsemble)>> {
    (0..plan.replicates)
        .into_par_iter()
        .map(|r| {
            let d = plan.dataset(scenario, r)?;
            let e = build_posterior(scenario.model.as_ref(), &d, plan.beta, &plan.backend_for(r, 0))?;
            Ok((d, e))
        })
        .collect()
}
