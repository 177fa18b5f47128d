//! Bayesian losses, errors and information criteria as functionals of a
//! posterior ensemble.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cumulants::{cumulants, generating_function, CumulantSet};
use crate::error::{Error, Result};
use crate::models::{Dataset, McEstimate, Model, Truth};
use crate::numeric::{derive_seed, log_sum_exp, pairwise_sum, rng_from_seed, tag};
use crate::posterior::{build_posterior, refit_loo_posterior, Backend, PosteriorEnsemble};

/// `BtL = -(1/n) sum_i log E_w[p(X_i|w)] = -F(1)`.
pub fn bayes_training_loss(ens: &PosteriorEnsemble) -> Result<f64> {
    Ok(-generating_function(ens, 1.0)?)
}

/// `GtL = -E_w[(1/n) sum_i log p(X_i|w)] = -Y_1`.
pub fn gibbs_training_loss(ens: &PosteriorEnsemble) -> f64 {
    -cumulants(ens).y1
}

/// `WAIC = BtL + (beta/n) V(n)`.
pub fn waic(ens: &PosteriorEnsemble) -> Result<f64> {
    let c = cumulants(ens);
    Ok(waic_from(bayes_training_loss(ens)?, &c, ens))
}

fn waic_from(btl: f64, c: &CumulantSet, ens: &PosteriorEnsemble) -> f64 {
    btl + ens.beta() / ens.n() as f64 * c.v_n
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvEstimate {
    pub value: f64,
    /// Smallest importance-weight effective sample size over samples.
    pub min_neff: f64,
    pub warnings: Vec<String>,
}

/// Importance-sampling leave-one-out loss `CV_2 = F(-beta) - F(1 - beta)`.
///
/// Samples whose effective size falls below `neff_floor` are listed in the warnings.
pub fn cv_importance(ens: &PosteriorEnsemble, neff_floor: f64) -> Result<CvEstimate> {
    if ens.n() == 0 {
        return Err(Error::InvalidInput("cross-validation needs n >= 1".into()));
    }
    let b = ens.beta();
    let value = generating_function(ens, -b)? - generating_function(ens, 1.0 - b)?;
    let neff: Vec<f64> = (0..ens.n()).into_par_iter().map(|i| ens.loo_effective_size(i)).collect();
    let mut warnings = Vec::new();
    for (i, &e) in neff.iter().enumerate() {
        if e < neff_floor {
            warnings.push(format!(
                "sample {i}: LOO effective sample size {e:.1} below floor {neff_floor:.1}"
            ));
        }
    }
    Ok(CvEstimate {
        value,
        min_neff: neff.iter().copied().fold(f64::INFINITY, f64::min),
        warnings,
    })
}

/// Leave-one-out loss `CV_1` from `n` freshly built leave-one-out posteriors.
pub fn cv_refit(
    model: &dyn Model,
    truth: &dyn Truth,
    dataset: &Dataset,
    beta: f64,
    backend: &Backend,
) -> Result<f64> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::InvalidInput("CV_1 needs n >= 2".into()));
    }
    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let loo = refit_loo_posterior(model, truth, dataset, i, beta, backend)?;
            let x = dataset.sample(i);
            let terms: Vec<f64> = loo
                .log_probs()
                .iter()
                .zip(loo.draws())
                .map(|(lp, w)| lp + model.log_density_unchecked(x, w))
                .collect();
            let v = log_sum_exp(&terms);
            if v.is_finite() {
                Ok(-v)
            } else {
                Err(Error::Overflow { sample: i, alpha: 1.0 })
            }
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms) / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dic1 {
    pub value: f64,
    /// `E_w[w]`, the plug-in point.
    pub plug_in: Vec<f64>,
    /// The plug-in point lies outside the parameter box.
    pub outside_box: bool,
}

/// `DIC_1 = BtL + (2/n) sum_i { -E_w[log p(X_i|w)] + log p(X_i|E_w[w]) }`.
pub fn dic1(model: &dyn Model, dataset: &Dataset, ens: &PosteriorEnsemble) -> Result<Dic1> {
    let c = cumulants(ens);
    dic1_from(model, dataset, ens, bayes_training_loss(ens)?, &c)
}

fn dic1_from(model: &dyn Model, dataset: &Dataset, ens: &PosteriorEnsemble, btl: f64, c: &CumulantSet) -> Result<Dic1> {
    let n = ens.n();
    if dataset.len() != n {
        return Err(Error::DimensionMismatch {
            what: "dataset size",
            expected: n,
            actual: dataset.len(),
        });
    }
    let plug_in = ens.mean_param();
    let terms: Vec<f64> = (0..n)
        .map(|i| -c.per_sample[i][0] + model.log_density_unchecked(dataset.sample(i), &plug_in))
        .collect();
    Ok(Dic1 {
        value: btl + 2.0 / n as f64 * pairwise_sum(&terms),
        outside_box: !model.domain().contains(&plug_in),
        plug_in,
    })
}

/// `DIC_2 = BtL + (2/n) Var_w[sum_i log p(X_i|w)]`.
pub fn dic2(ens: &PosteriorEnsemble) -> Result<f64> {
    Ok(dic2_from(ens, bayes_training_loss(ens)?))
}

/// Posterior variance of the total log likelihood.
pub fn total_log_likelihood_variance(ens: &PosteriorEnsemble) -> f64 {
    let m_count = ens.len();
    let mut totals = vec![0.0; m_count];
    for i in 0..ens.n() {
        for (t, l) in totals.iter_mut().zip(ens.log_lik_column(i)) {
            *t += l;
        }
    }
    let probs: Vec<f64> = ens.log_probs().iter().map(|lp| lp.exp()).collect();
    let mean: f64 = probs.iter().zip(&totals).map(|(p, t)| p * t).sum();
    probs.iter().zip(&totals).map(|(p, t)| p * (t - mean).powi(2)).sum()
}

fn dic2_from(ens: &PosteriorEnsemble, btl: f64) -> f64 {
    btl + 2.0 / ens.n() as f64 * total_log_likelihood_variance(ens)
}

/// Bayes generalization loss and error on a fresh test set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generalization {
    /// `BgL`. Equals `L0 + bg.value` when `L0` is known.
    pub bgl: f64,
    /// `Bg = BgL - L0` as the paired mean of `log p0(X) - log p*(X)`; absent without `L0`.
    pub bg: Option<McEstimate>,
    /// Standard error of `BgL` itself.
    pub bgl_stderr: f64,
}

/// Monte Carlo `BgL = -E_X[log E_w p(X|w)]` over `test_size` truth draws.
pub fn bayes_generalization_loss(
    model: &dyn Model,
    truth: &dyn Truth,
    ens: &PosteriorEnsemble,
    test_size: usize,
    seed: u64,
) -> Result<Generalization> {
    if test_size == 0 {
        return Err(Error::InvalidInput("test_size must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let xs: Vec<Vec<f64>> = (0..test_size).map(|_| truth.sample(&mut rng)).collect();
    let lp = ens.log_probs();
    let neg_log_pred: Vec<f64> = xs
        .par_iter()
        .map(|x| {
            let terms: Vec<f64> = lp.iter().zip(ens.draws()).map(|(p, w)| p + model.log_density_unchecked(x, w)).collect();
            -log_sum_exp(&terms)
        })
        .collect();
    let direct = McEstimate::from_terms(&neg_log_pred);
    match truth.min_loss() {
        Some(l0) => {
            let diffs: Vec<f64> = xs.iter().zip(&neg_log_pred).map(|(x, nl)| truth.log_p0(x) + nl).collect();
            let bg = McEstimate::from_terms(&diffs);
            Ok(Generalization {
                bgl: l0 + bg.value,
                bg: Some(bg),
                bgl_stderr: direct.stderr,
            })
        }
        None => Ok(Generalization {
            bgl: direct.value,
            bg: None,
            bgl_stderr: direct.stderr,
        }),
    }
}

/// `SE = (1/2 sigma^2) E_X || R_0(X) - E_w[R(X, w)] ||^2` for regression models.
pub fn square_error(
    model: &dyn Model,
    truth: &dyn Truth,
    ens: &PosteriorEnsemble,
    test_size: usize,
    seed: u64,
) -> Result<McEstimate> {
    let reg = model
        .regression()
        .ok_or(Error::Unsupported("square error needs a regression model"))?;
    if test_size == 0 {
        return Err(Error::InvalidInput("test_size must be at least 1".into()));
    }
    let (din, dout) = (reg.input_dim(), reg.output_dim());
    let probs: Vec<f64> = ens.log_probs().iter().map(|lp| lp.exp()).collect();
    let mut rng = rng_from_seed(seed);
    let inputs: Vec<Vec<f64>> = (0..test_size).map(|_| truth.sample(&mut rng)[..din].to_vec()).collect();
    let s2 = reg.noise_sd().powi(2);
    let terms: Vec<Result<f64>> = inputs
        .par_iter()
        .map(|input| {
            let r0 = truth
                .mean_response(input)
                .ok_or(Error::Unsupported("square error needs the truth's mean response"))?;
            let mut avg = vec![0.0; dout];
            let mut out = vec![0.0; dout];
            for (p, w) in probs.iter().zip(ens.draws()) {
                reg.predict(input, w, &mut out);
                for (a, o) in avg.iter_mut().zip(&out) {
                    *a += p * o;
                }
            }
            Ok(r0.iter().zip(&avg).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (2.0 * s2))
        })
        .collect();
    let terms: Vec<f64> = terms.into_iter().collect::<Result<_>>()?;
    Ok(McEstimate::from_terms(&terms))
}

/// Default 21-node grid: 0, then geometric from 1e-5 to 0.3, then linear to 1.
pub fn default_beta_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let (lo, hi, k) = (1e-5f64, 0.3f64, 17);
    for j in 0..k {
        grid.push(lo * (hi / lo).powf(j as f64 / (k - 1) as f64));
    }
    for j in 1..=3 {
        grid.push(hi + (1.0 - hi) * j as f64 / 3.0);
    }
    *grid.last_mut().expect("nonempty") = 1.0;
    grid
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergy {
    /// `-log` marginal likelihood at the last grid node.
    pub value: f64,
    /// `(beta, n GtL(beta))` at every node.
    pub curve: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Thermodynamic integration `F = int_0^1 n GtL(beta) d beta`.
///
/// Intervals whose endpoints differ by a factor of at least 1.5 are integrated
/// by the trapezoid rule in `log beta`, the rest in `beta`. MCMC ensembles at
/// node `k` use a seed derived from `k`.
pub fn free_energy(model: &dyn Model, dataset: &Dataset, beta_grid: &[f64], backend: &Backend) -> Result<FreeEnergy> {
    validate_beta_grid(beta_grid)?;
    let n = dataset.len() as f64;
    if dataset.is_empty() {
        return Ok(FreeEnergy {
            value: 0.0,
            curve: beta_grid.iter().map(|&b| (b, 0.0)).collect(),
            warnings: Vec::new(),
        });
    }
    let curve: Vec<(f64, f64)> = beta_grid
        .par_iter()
        .enumerate()
        .map(|(k, &b)| {
            let be = match backend {
                Backend::Mcmc(cfg) => Backend::Mcmc(cfg.with_seed(derive_seed(cfg.seed, &[tag("ti"), k as u64]))),
                other => other.clone(),
            };
            let ens = build_posterior(model, dataset, b, &be)?;
            Ok((b, n * gibbs_training_loss(&ens)))
        })
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    for w in curve.windows(2) {
        if w[1].1 > w[0].1 {
            warnings.push(format!(
                "integrand increases from {:.6} at beta = {} to {:.6} at beta = {}",
                w[0].1, w[0].0, w[1].1, w[1].0
            ));
        }
    }
    Ok(FreeEnergy {
        value: integrate_curve(&curve),
        curve,
        warnings,
    })
}

pub(crate) fn validate_beta_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidInput("beta grid needs at least two nodes".into()));
    }
    if !(grid[0] >= 0.0 && grid[0] <= 0.01) {
        return Err(Error::InvalidInput(format!("first beta node must lie in [0, 0.01], got {}", grid[0])));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("beta grid must be strictly increasing".into()));
    }
    Ok(())
}

fn integrate_curve(curve: &[(f64, f64)]) -> f64 {
    curve.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum()
}

/// Which optional quantities [`evaluate`] computes.
#[derive(Clone, Debug)]
pub struct EvaluateOptions<'a> {
    /// Truth oracle for `BgL`, `SE` and `CV_1` (which rebuilds `Ln`).
    pub truth: Option<&'a dyn Truth>,
    pub test_size: usize,
    pub seed: u64,
    /// Backend for `CV_1` refits; `None` skips `CV_1`.
    pub cv1: Option<Backend>,
    pub square_error: bool,
    /// LOO effective-size warning floor as a fraction of the ensemble size.
    pub neff_floor_fraction: f64,
}

impl Default for EvaluateOptions<'_> {
    fn default() -> Self {
        Self {
            truth: None,
            test_size: 10_000,
            seed: 0,
            cv1: None,
            square_error: false,
            neff_floor_fraction: 0.1,
        }
    }
}

/// One dataset's worth of losses, errors, cumulants and criteria.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub n: usize,
    pub beta: f64,
    pub btl: f64,
    pub bgl: Option<f64>,
    pub bgl_stderr: Option<f64>,
    pub gtl: f64,
    pub waic: f64,
    pub cv1: Option<f64>,
    pub cv2: f64,
    pub dic1: f64,
    pub dic2: f64,
    pub se: Option<f64>,
    pub se_stderr: Option<f64>,
    pub bg: Option<f64>,
    pub bg_stderr: Option<f64>,
    pub bt: Option<f64>,
    pub cv: Option<f64>,
    pub ln: f64,
    pub cumulants: CumulantSummary,
    pub min_neff: f64,
    pub acc_rate: Option<f64>,
    pub dic1_outside_box: bool,
    pub warnings: Vec<String>,
}

/// `CumulantSet` without the per-sample rows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantSummary {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub y4: f64,
    pub v_n: f64,
}

impl From<&CumulantSet> for CumulantSummary {
    fn from(c: &CumulantSet) -> Self {
        Self {
            y1: c.y1,
            y2: c.y2,
            y3: c.y3,
            y4: c.y4,
            v_n: c.v_n,
        }
    }
}

/// All criteria for `ens`, built on `dataset`.
pub fn evaluate(
    model: &dyn Model,
    dataset: &Dataset,
    ens: &PosteriorEnsemble,
    opts: &EvaluateOptions,
) -> Result<CriteriaReport> {
    let n = dataset.len();
    if ens.n() != n {
        return Err(Error::DimensionMismatch {
            what: "dataset size",
            expected: ens.n(),
            actual: n,
        });
    }
    let c = cumulants(ens);
    let btl = bayes_training_loss(ens)?;
    let cv = cv_importance(ens, opts.neff_floor_fraction * ens.len() as f64)?;
    let d1 = dic1_from(model, dataset, ens, btl, &c)?;
    let mut warnings = ens.diagnostics().warnings.clone();
    warnings.extend(cv.warnings.iter().cloned());
    if d1.outside_box {
        warnings.push(format!("DIC_1 plug-in point {:?} lies outside the parameter box", d1.plug_in));
    }
    let mut report = CriteriaReport {
        n,
        beta: ens.beta(),
        btl,
        bgl: None,
        bgl_stderr: None,
        gtl: -c.y1,
        waic: waic_from(btl, &c, ens),
        cv1: None,
        cv2: cv.value,
        dic1: d1.value,
        dic2: dic2_from(ens, btl),
        se: None,
        se_stderr: None,
        bg: None,
        bg_stderr: None,
        bt: Some(btl - dataset.ln()),
        cv: Some(cv.value - dataset.ln()),
        ln: dataset.ln(),
        cumulants: CumulantSummary::from(&c),
        min_neff: cv.min_neff,
        acc_rate: mean_acceptance(ens),
        dic1_outside_box: d1.outside_box,
        warnings,
    };
    if let Some(truth) = opts.truth {
        let g = bayes_generalization_loss(model, truth, ens, opts.test_size, derive_seed(opts.seed, &[tag("bg")]))?;
        report.bgl = Some(g.bgl);
        report.bgl_stderr = Some(g.bgl_stderr);
        report.bg = g.bg.map(|e| e.value);
        report.bg_stderr = g.bg.map(|e| e.stderr);
        if opts.square_error {
            let se = square_error(model, truth, ens, opts.test_size, derive_seed(opts.seed, &[tag("se")]))?;
            report.se = Some(se.value);
            report.se_stderr = Some(se.stderr);
        }
        if let Some(backend) = &opts.cv1 {
            report.cv1 = Some(cv_refit(model, truth, dataset, ens.beta(), backend)?);
        }
    }
    Ok(report)
}

fn mean_acceptance(ens: &PosteriorEnsemble) -> Option<f64> {
    let r = &ens.diagnostics().acceptance_rates;
    (!r.is_empty()).then(|| r.iter().sum::<f64>() / r.len() as f64)
}

/// Fixed CSV column order.
pub const REPORT_COLUMNS: [&str; 21] = [
    "n", "beta", "btl", "bgl", "gtl", "waic", "cv1", "cv2", "dic1", "dic2", "se", "bg", "bt", "cv", "y1", "y2", "y3",
    "y4", "v_n", "min_neff", "acc_rate",
];

fn fmt(v: f64) -> String {
    // shortest round-trip representation
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

impl CriteriaReport {
    pub fn csv_row(&self) -> Vec<String> {
        let c = &self.cumulants;
        vec![
            self.n.to_string(),
            fmt(self.beta),
            fmt(self.btl),
            fmt_opt(self.bgl),
            fmt(self.gtl),
            fmt(self.waic),
            fmt_opt(self.cv1),
            fmt(self.cv2),
            fmt(self.dic1),
            fmt(self.dic2),
            fmt_opt(self.se),
            fmt_opt(self.bg),
            fmt_opt(self.bt),
            fmt_opt(self.cv),
            fmt(c.y1),
            fmt(c.y2),
            fmt(c.y3),
            fmt(c.y4),
            fmt(c.v_n),
            fmt(self.min_neff),
            fmt_opt(self.acc_rate),
        ]
    }

    /// Named scalar, for summaries. `bg_plus_cv` and `waic_minus_ln` style
    /// differences are built by the caller.
    pub fn field(&self, name: &str) -> Option<f64> {
        let c = &self.cumulants;
        match name {
            "n" => Some(self.n as f64),
            "beta" => Some(self.beta),
            "btl" => Some(self.btl),
            "bgl" => self.bgl,
            "gtl" => Some(self.gtl),
            "waic" => Some(self.waic),
            "cv1" => self.cv1,
            "cv2" => Some(self.cv2),
            "dic1" => Some(self.dic1),
            "dic2" => Some(self.dic2),
            "se" => self.se,
            "bg" => self.bg,
            "bt" => self.bt,
            "cv" => self.cv,
            "y1" => Some(c.y1),
            "y2" => Some(c.y2),
            "y3" => Some(c.y3),
            "y4" => Some(c.y4),
            "v_n" => Some(c.v_n),
            "min_neff" => Some(self.min_neff),
            "acc_rate" => self.acc_rate,
            "ln" => Some(self.ln),
            _ => None,
        }
    }
}

pub fn write_reports_csv<W: Write>(out: W, reports: &[CriteriaReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

/// JSON variant, including standard errors and warnings.
pub fn reports_to_json(reports: &[CriteriaReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}
