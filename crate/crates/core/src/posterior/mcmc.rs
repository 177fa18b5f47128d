use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Diagnostics, PosteriorEnsemble, Provenance};
use crate::error::{Error, Result};
use crate::models::{std_normal, Dataset, Model};
use crate::numeric::{derive_seed, rng_from_seed, Rng};

/// Where each chain starts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum McmcInit {
    /// Independent prior draws.
    Prior,
    /// `center` mapped through a random exact symmetry of the model (see
    /// [`Model::random_symmetry`]) plus isotropic Gaussian jitter, clamped to the box.
    Symmetric { center: Vec<f64>, jitter: f64 },
}

/// Random-walk Metropolis protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub chains: usize,
    pub burn_in_steps: usize,
    pub thin: usize,
    pub draws_per_chain: usize,
    pub proposal_scale: f64,
    pub seed: u64,
    pub init: McmcInit,
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.chains == 0 {
            problems.push("chains must be >= 1");
        }
        if self.thin == 0 {
            problems.push("thin must be >= 1");
        }
        if self.draws_per_chain == 0 {
            problems.push("draws_per_chain must be >= 1");
        }
        if !(self.proposal_scale > 0.0) {
            problems.push("proposal_scale must be > 0");
        }
        if let McmcInit::Symmetric { jitter, .. } = &self.init {
            if !(*jitter >= 0.0) {
                problems.push("init jitter must be >= 0");
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(problems.join("; ")))
        }
    }

    /// Copy with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

struct ChainOutput {
    draws: Vec<f64>,
    acceptance: f64,
}

fn log_target(model: &dyn Model, dataset: &Dataset, beta: f64, w: &[f64]) -> f64 {
    let lp = model.log_prior(w);
    if lp == f64::NEG_INFINITY {
        return lp;
    }
    let mut total = 0.0;
    for x in dataset.samples() {
        total += model.log_density_unchecked(x, w);
    }
    beta * total + lp
}

fn initial_point(model: &dyn Model, init: &McmcInit, rng: &mut Rng) -> Vec<f64> {
    match init {
        McmcInit::Prior => model.prior().sample(rng),
        McmcInit::Symmetric { center, jitter } => {
            let image = model.random_symmetry(center, rng);
            let b = model.domain();
            image
                .iter()
                .enumerate()
                .map(|(j, v)| (v + jitter * std_normal(rng)).clamp(b.lo[j], b.hi[j]))
                .collect()
        }
    }
}

fn run_chain(
    model: &dyn Model,
    dataset: &Dataset,
    beta: f64,
    cfg: &McmcConfig,
    chain: usize,
) -> Result<ChainOutput> {
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[chain as u64]));
    let d = model.dim();
    if let McmcInit::Symmetric { center, .. } = &cfg.init {
        if center.len() != d {
            return Err(Error::DimensionMismatch {
                what: "mcmc init center",
                expected: d,
                actual: center.len(),
            });
        }
    }
    let mut current = initial_point(model, &cfg.init, &mut rng);
    let mut current_lt = log_target(model, dataset, beta, &current);
    if !current_lt.is_finite() {
        return Err(Error::NonFiniteInit {
            chain,
            param: current,
            value: current_lt,
        });
    }
    let bounds = model.domain().clone();
    let mut proposal = vec![0.0; d];
    let mut draws = Vec::with_capacity(cfg.draws_per_chain * d);
    let mut accepted = 0usize;
    let sampling_steps = cfg.draws_per_chain * cfg.thin;
    for step in 0..cfg.burn_in_steps + sampling_steps {
        for j in 0..d {
            proposal[j] = current[j] + cfg.proposal_scale * std_normal(&mut rng);
        }
        let sampling = step >= cfg.burn_in_steps;
        // proposals leaving the box are rejected outright
        if bounds.contains(&proposal) {
            let lt = log_target(model, dataset, beta, &proposal);
            let log_u: f64 = rng.gen::<f64>().ln();
            if lt.is_finite() && log_u < lt - current_lt {
                current.copy_from_slice(&proposal);
                current_lt = lt;
                if sampling {
                    accepted += 1;
                }
            }
        }
        if sampling && (step - cfg.burn_in_steps + 1) % cfg.thin == 0 {
            draws.extend_from_slice(&current);
        }
    }
    Ok(ChainOutput {
        draws,
        acceptance: accepted as f64 / sampling_steps as f64,
    })
}

/// Random-walk Metropolis on the `beta`-tempered posterior
/// `prod_i p(X_i|w)^beta phi(w)`.
///
/// Chains run independently with sub-seeds derived from `(cfg.seed, chain)` and
/// are pooled by concatenation in chain order. An empty dataset samples the prior.
pub fn metropolis_sample(
    model: &dyn Model,
    dataset: &Dataset,
    beta: f64,
    cfg: &McmcConfig,
) -> Result<PosteriorEnsemble> {
    cfg.validate()?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta must be finite and >= 0, got {beta}")));
    }
    let outputs: Vec<ChainOutput> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(model, dataset, beta, cfg, c))
        .collect::<Result<_>>()?;

    let d = model.dim();
    let mut diagnostics = Diagnostics::default();
    let mut draws = Vec::with_capacity(cfg.chains * cfg.draws_per_chain * d);
    let mut rates = Vec::with_capacity(cfg.chains);
    for (c, out) in outputs.into_iter().enumerate() {
        if out.acceptance < 0.01 || out.acceptance > 0.99 {
            diagnostics.warnings.push(format!(
                "chain {c}: acceptance rate {:.4} outside [0.01, 0.99]",
                out.acceptance
            ));
        }
        rates.push(out.acceptance);
        draws.extend(out.draws);
    }
    diagnostics.acceptance_rates = rates;
    let m_count = draws.len() / d.max(1);
    let nodes: Vec<&[f64]> = draws.chunks(d.max(1)).collect();
    let loglik = super::log_likelihood_matrix(model, dataset, &nodes);
    PosteriorEnsemble::assemble(
        d,
        draws,
        vec![0.0; m_count],
        beta,
        Provenance::Mcmc { config: cfg.clone() },
        dataset.len(),
        loglik,
        diagnostics,
    )
}
