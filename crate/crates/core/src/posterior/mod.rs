//! Weighted-draw representations of the tempered posterior
//! `prod_i p(X_i|w)^beta phi(w)` and expectations under it.
//!
//! Every ensemble caches the log-likelihood matrix `log p(X_i|w_m)`; all
//! downstream quantities (cumulants, losses, criteria) are functionals of that
//! matrix and the normalized log weights. Weight arithmetic stays in log space.

mod io;
mod mcmc;
mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Dataset, Model, Truth};
use crate::numeric::{derive_seed, log_sum_exp, tag};

pub use io::{dataset_hash, read_ensemble, write_ensemble, EnsembleFile, ENSEMBLE_FORMAT_VERSION};
pub use mcmc::{metropolis_sample, McmcConfig, McmcInit};
pub use quadrature::{quadrature_posterior, GridSpacing, GridSpec};

/// How an ensemble was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Mcmc { config: McmcConfig },
    Quadrature { grid: GridSpec, log_evidence: f64 },
    /// Built directly from parts (tests, replays of foreign draws).
    External,
}

/// Posterior construction backend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Mcmc(McmcConfig),
    Quadrature(GridSpec),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub acceptance_rates: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct PosteriorEnsemble {
    dim: usize,
    draws: Vec<f64>,
    log_weights: Vec<f64>,
    log_probs: Vec<f64>,
    beta: f64,
    provenance: Provenance,
    n: usize,
    // sample-major: entry (m, i) lives at i * M + m
    loglik: Vec<f64>,
    diagnostics: Diagnostics,
}

/// `log p(X_i|w_m)` for every draw and sample, sample-major.
pub(crate) fn log_likelihood_matrix<W: AsRef<[f64]>>(
    model: &dyn Model,
    dataset: &Dataset,
    draws: &[W],
) -> Vec<f64> {
    let m_count = draws.len();
    let mut out = Vec::with_capacity(m_count * dataset.len());
    for x in dataset.samples() {
        out.extend(draws.iter().map(|w| model.log_density_unchecked(x, w.as_ref())));
    }
    out
}

impl PosteriorEnsemble {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        dim: usize,
        draws: Vec<f64>,
        log_weights: Vec<f64>,
        beta: f64,
        provenance: Provenance,
        n: usize,
        loglik: Vec<f64>,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        let m_count = log_weights.len();
        if m_count == 0 {
            return Err(Error::InvalidInput("ensemble needs at least one draw".into()));
        }
        if draws.len() != m_count * dim {
            return Err(Error::DimensionMismatch {
                what: "draw matrix",
                expected: m_count * dim,
                actual: draws.len(),
            });
        }
        if loglik.len() != m_count * n {
            return Err(Error::DimensionMismatch {
                what: "log-likelihood matrix",
                expected: m_count * n,
                actual: loglik.len(),
            });
        }
        let norm = log_sum_exp(&log_weights);
        if !norm.is_finite() {
            return Err(Error::InvalidInput(format!(
                "log-sum-exp of log weights is not finite ({norm})"
            )));
        }
        let log_probs = log_weights.iter().map(|lw| lw - norm).collect();
        Ok(Self {
            dim,
            draws,
            log_weights,
            log_probs,
            beta,
            provenance,
            n,
            loglik,
            diagnostics,
        })
    }

    /// Ensemble from explicit parts. `loglik[i][m]` is `log p(X_i|w_m)`.
    pub fn from_parts(
        draws: Vec<Vec<f64>>,
        log_weights: Vec<f64>,
        beta: f64,
        loglik: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let dim = draws.first().map_or(0, Vec::len);
        if let Some(w) = draws.iter().find(|w| w.len() != dim) {
            return Err(Error::DimensionMismatch {
                what: "draw",
                expected: dim,
                actual: w.len(),
            });
        }
        let m_count = draws.len();
        if let Some(col) = loglik.iter().find(|c| c.len() != m_count) {
            return Err(Error::DimensionMismatch {
                what: "log-likelihood column",
                expected: m_count,
                actual: col.len(),
            });
        }
        let n = loglik.len();
        Self::assemble(
            dim,
            draws.into_iter().flatten().collect(),
            log_weights,
            beta,
            Provenance::External,
            n,
            loglik.into_iter().flatten().collect(),
            Diagnostics::default(),
        )
    }

    /// Ensemble from explicit draws, evaluating the log-likelihood matrix on `dataset`.
    pub fn from_draws(
        model: &dyn Model,
        dataset: &Dataset,
        draws: Vec<Vec<f64>>,
        log_weights: Vec<f64>,
        beta: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        let dim = model.dim();
        if let Some(w) = draws.iter().find(|w| w.len() != dim) {
            return Err(Error::DimensionMismatch {
                what: "draw",
                expected: dim,
                actual: w.len(),
            });
        }
        let loglik = log_likelihood_matrix(model, dataset, &draws);
        Self::assemble(
            dim,
            draws.into_iter().flatten().collect(),
            log_weights,
            beta,
            provenance,
            dataset.len(),
            loglik,
            Diagnostics::default(),
        )
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of training samples behind the cached matrix.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn draw(&self, m: usize) -> &[f64] {
        &self.draws[m * self.dim..(m + 1) * self.dim]
    }

    pub fn draws(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |m| self.draw(m))
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Normalized log weights (log posterior probabilities of the draws).
    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    /// `log p(X_i|w_m)`.
    pub fn log_lik(&self, m: usize, i: usize) -> f64 {
        self.loglik[i * self.len() + m]
    }

    /// Column `i` of the log-likelihood matrix (all draws for sample `i`).
    pub fn log_lik_column(&self, i: usize) -> &[f64] {
        let m_count = self.len();
        &self.loglik[i * m_count..(i + 1) * m_count]
    }

    /// Log marginal likelihood for quadrature ensembles.
    pub fn log_evidence(&self) -> Option<f64> {
        match self.provenance {
            Provenance::Quadrature { log_evidence, .. } => Some(log_evidence),
            _ => None,
        }
    }

    /// `E_w[g(w)]` with softmax-normalized weights.
    pub fn expect<G: Fn(&[f64]) -> f64>(&self, g: G) -> Result<f64> {
        let mut total = 0.0;
        for (m, lp) in self.log_probs.iter().enumerate() {
            let v = g(self.draw(m));
            if !v.is_finite() {
                return Err(Error::NonFiniteDraw { index: m, value: v });
            }
            total += lp.exp() * v;
        }
        Ok(total)
    }

    /// Posterior mean of the parameter vector.
    pub fn mean_param(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (m, lp) in self.log_probs.iter().enumerate() {
            let p = lp.exp();
            for (o, v) in out.iter_mut().zip(self.draw(m)) {
                *o += p * v;
            }
        }
        out
    }

    /// `E_w^{(i)}[g]` by importance reweighting with `p(X_i|w)^{-beta}`.
    ///
    /// `neff_floor` is an absolute effective-sample-size threshold below which a
    /// warning is attached.
    pub fn loo_expect<G: Fn(&[f64]) -> f64>(&self, i: usize, g: G, neff_floor: f64) -> Result<LooExpectation> {
        if i >= self.n {
            return Err(Error::InvalidInput(format!(
                "sample index {i} out of range for n = {}",
                self.n
            )));
        }
        let col = self.log_lik_column(i);
        let log_r: Vec<f64> = self
            .log_probs
            .iter()
            .zip(col)
            .map(|(lp, ll)| lp - self.beta * ll)
            .collect();
        let norm = log_sum_exp(&log_r);
        if !norm.is_finite() {
            return Err(Error::Overflow {
                sample: i,
                alpha: -self.beta,
            });
        }
        let mut value = 0.0;
        for (m, lr) in log_r.iter().enumerate() {
            let v = g(self.draw(m));
            if !v.is_finite() {
                return Err(Error::NonFiniteDraw { index: m, value: v });
            }
            value += (lr - norm).exp() * v;
        }
        let n_eff = self.loo_effective_size_with(&log_r, norm);
        let warning = (n_eff < neff_floor).then(|| {
            format!("sample {i}: LOO effective sample size {n_eff:.1} below floor {neff_floor:.1}")
        });
        Ok(LooExpectation { value, n_eff, warning })
    }

    fn loo_effective_size_with(&self, log_r: &[f64], norm: f64) -> f64 {
        // M * E_pi[u]^2 / E_pi[u^2] with u = p(X_i|w)^{-beta}
        let second: Vec<f64> = self
            .log_probs
            .iter()
            .zip(log_r)
            .map(|(lp, lr)| 2.0 * lr - lp)
            .collect();
        let log_second = log_sum_exp(&second);
        self.len() as f64 * (2.0 * norm - log_second).exp()
    }

    /// Importance-weight effective sample size for leaving out sample `i`.
    pub fn loo_effective_size(&self, i: usize) -> f64 {
        let col = self.log_lik_column(i);
        let log_r: Vec<f64> = self
            .log_probs
            .iter()
            .zip(col)
            .map(|(lp, ll)| lp - self.beta * ll)
            .collect();
        let norm = log_sum_exp(&log_r);
        self.loo_effective_size_with(&log_r, norm)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LooExpectation {
    pub value: f64,
    pub n_eff: f64,
    pub warning: Option<String>,
}

/// Builds the tempered posterior with the chosen backend.
pub fn build_posterior(model: &dyn Model, dataset: &Dataset, beta: f64, backend: &Backend) -> Result<PosteriorEnsemble> {
    match backend {
        Backend::Mcmc(cfg) => metropolis_sample(model, dataset, beta, cfg),
        Backend::Quadrature(grid) => quadrature_posterior(model, dataset, beta, grid),
    }
}

/// Posterior on the dataset with sample `i` removed, built from scratch.
///
/// The MCMC backend reuses the configuration with a seed derived from `i`.
pub fn refit_loo_posterior(
    model: &dyn Model,
    truth: &dyn Truth,
    dataset: &Dataset,
    i: usize,
    beta: f64,
    backend: &Backend,
) -> Result<PosteriorEnsemble> {
    if dataset.len() < 2 {
        return Err(Error::InvalidInput("leave-one-out refit needs n >= 2".into()));
    }
    let reduced = dataset.without(i, truth)?;
    let backend = match backend {
        Backend::Mcmc(cfg) => Backend::Mcmc(cfg.with_seed(derive_seed(cfg.seed, &[tag("loo"), i as u64]))),
        other => other.clone(),
    };
    build_posterior(model, &reduced, beta, &backend)
}
