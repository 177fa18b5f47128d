//! Statistical models, true distributions and training datasets.
//!
//! A [`Model`] supplies `log p(x|w)` together with a prior normalized on an
//! axis-aligned parameter box. A [`Truth`] supplies the data-generating
//! distribution `q`, the optimal density `p0` and whatever constants are known
//! for the pair (entropy, minimum loss, real log canonical threshold).
//! [`Scenario`] bundles the two.

mod prior;
mod product_regression;
mod regular_normal;
mod tanh_network;

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{rng_from_seed, Rng};

pub use prior::{BoxPrior, ParamBox, PriorShape};
pub use product_regression::{ProductRegression, ProductTruth};
pub use regular_normal::{NormalTruth, RegularNormal};
pub use tanh_network::{TanhNetwork, TanhTruth};

/// A parametric density `p(x|w)` with a prior on a compact box.
pub trait Model: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Parameter dimension `d`.
    fn dim(&self) -> usize {
        self.prior().dim()
    }

    /// Dimension of one sample `x`.
    fn sample_dim(&self) -> usize;

    fn prior(&self) -> &BoxPrior;

    fn domain(&self) -> &ParamBox {
        self.prior().bounds()
    }

    fn log_prior(&self, w: &[f64]) -> f64 {
        self.prior().log_density(w)
    }

    /// `log p(x|w)` without dimension or domain checks. Hot path for samplers.
    fn log_density_unchecked(&self, x: &[f64], w: &[f64]) -> f64;

    /// Regression structure `y = R(input, w) + noise`, when the model has one.
    fn regression(&self) -> Option<&dyn Regression> {
        None
    }

    /// One-dimensional reduction of the parameter, when the density depends on `w`
    /// only through a scalar.
    fn fiber(&self) -> Option<&dyn Fiber> {
        None
    }

    /// Image of `w` under a random transformation that leaves `p(.|w)` unchanged.
    fn random_symmetry(&self, w: &[f64], _rng: &mut Rng) -> Vec<f64> {
        w.to_vec()
    }
}

/// Models whose density depends on `w` only through a scalar `c = g(w)`.
///
/// Integrals of functions of `p(.|w)` against the prior reduce to integrals
/// over `c` against the pushforward of the prior.
pub trait Fiber: Send + Sync {
    /// Support `[lo, hi]` of `c` under the prior.
    fn fiber_range(&self) -> (f64, f64);

    /// Prior mass of `{w : lo <= g(w) <= hi}`.
    fn fiber_mass(&self, lo: f64, hi: f64) -> f64;

    /// Parameters on the level set `g(w) = c`. Cell mass is split evenly among them.
    fn fiber_points(&self, c: f64) -> Vec<Vec<f64>>;
}

/// Models of the form `p(input, y | w) = s(input) N(y; R(input, w), sigma^2 I)`.
pub trait Regression: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn noise_sd(&self) -> f64;
    /// Writes `R(input, w)` into `out`.
    fn predict(&self, input: &[f64], w: &[f64], out: &mut [f64]);
}

/// The data-generating side of an experiment.
pub trait Truth: Send + Sync + fmt::Debug {
    fn sample_dim(&self) -> usize;

    fn sample(&self, rng: &mut Rng) -> Vec<f64>;

    /// Log of the unique optimal density `p0(x)`.
    fn log_p0(&self, x: &[f64]) -> f64;

    /// Entropy `S` of `q`, when known in closed form.
    fn entropy(&self) -> Option<f64>;

    /// Minimum log loss `L0 = -E[log p0(X)]`, when known.
    fn min_loss(&self) -> Option<f64>;

    /// Known real log canonical threshold for this truth/model pair.
    fn lambda(&self) -> Option<f64> {
        None
    }

    /// One explicit optimal parameter `w0` in the model's parameter space.
    fn optimal_param(&self) -> Option<Vec<f64>>;

    fn is_realizable(&self) -> bool;

    /// Conditional mean `R0(input)` of the response, for regression truths.
    fn mean_response(&self, _input: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// A model paired with the truth that generates its data.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub model: Arc<dyn Model>,
    pub truth: Arc<dyn Truth>,
}

impl Scenario {
    pub fn new(model: Arc<dyn Model>, truth: Arc<dyn Truth>) -> Result<Self> {
        if model.sample_dim() != truth.sample_dim() {
            return Err(Error::DimensionMismatch {
                what: "truth sample",
                expected: model.sample_dim(),
                actual: truth.sample_dim(),
            });
        }
        if let Some(l) = truth.lambda() {
            if !(l > 0.0) {
                return Err(Error::InvalidInput(format!("lambda must be positive, got {l}")));
            }
        }
        Ok(Self { model, truth })
    }
}

/// `n` i.i.d. training samples plus the cached empirical log loss `Ln`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Vec<f64>>,
    ln: f64,
    seed: u64,
}

impl Dataset {
    /// Builds a dataset, computing `Ln = -(1/n) sum log p0(X_i)` (0 when empty).
    pub fn from_samples(samples: Vec<Vec<f64>>, truth: &dyn Truth, seed: u64) -> Result<Self> {
        if let Some(x) = samples.iter().find(|x| x.len() != truth.sample_dim()) {
            return Err(Error::DimensionMismatch {
                what: "sample",
                expected: truth.sample_dim(),
                actual: x.len(),
            });
        }
        let ln = empirical_log_loss(&samples, truth);
        Ok(Self { samples, ln, seed })
    }

    pub fn empty(seed: u64) -> Self {
        Self {
            samples: Vec::new(),
            ln: 0.0,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i]
    }

    /// Empirical log loss `Ln`.
    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The dataset with sample `i` removed.
    pub fn without(&self, i: usize, truth: &dyn Truth) -> Result<Self> {
        if i >= self.len() {
            return Err(Error::InvalidInput(format!(
                "sample index {i} out of range for n = {}",
                self.len()
            )));
        }
        let mut samples = self.samples.clone();
        samples.remove(i);
        Self::from_samples(samples, truth, self.seed)
    }

    /// The first `k` samples.
    pub fn prefix(&self, k: usize, truth: &dyn Truth) -> Result<Self> {
        Self::from_samples(self.samples[..k.min(self.len())].to_vec(), truth, self.seed)
    }
}

fn empirical_log_loss(samples: &[Vec<f64>], truth: &dyn Truth) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let terms: Vec<f64> = samples.iter().map(|x| -truth.log_p0(x)).collect();
    crate::numeric::mean(&terms)
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
}

impl McEstimate {
    pub fn from_terms(terms: &[f64]) -> Self {
        Self {
            value: crate::numeric::mean(terms),
            stderr: crate::numeric::std_error(terms),
        }
    }
}

fn check_sample(model: &dyn Model, x: &[f64]) -> Result<()> {
    if x.len() != model.sample_dim() {
        return Err(Error::DimensionMismatch {
            what: "sample",
            expected: model.sample_dim(),
            actual: x.len(),
        });
    }
    Ok(())
}

/// Checked `log p(x|w)`.
pub fn log_density(model: &dyn Model, x: &[f64], w: &[f64]) -> Result<f64> {
    check_sample(model, x)?;
    model.domain().check(w)?;
    Ok(model.log_density_unchecked(x, w))
}

/// `f(x, w) = log p0(x) - log p(x|w)`.
pub fn log_density_ratio(model: &dyn Model, truth: &dyn Truth, x: &[f64], w: &[f64]) -> Result<f64> {
    let lp = log_density(model, x, w)?;
    Ok(truth.log_p0(x) - lp)
}

/// Monte Carlo estimate of `K(w) = E_X[f(X, w)]` over `mc_size` fresh draws from the truth.
pub fn kl_to_truth(
    model: &dyn Model,
    truth: &dyn Truth,
    w: &[f64],
    mc_size: usize,
    seed: u64,
) -> Result<McEstimate> {
    if mc_size == 0 {
        return Err(Error::InvalidInput("mc_size must be at least 1".into()));
    }
    model.domain().check(w)?;
    let mut rng = rng_from_seed(seed);
    let terms: Vec<f64> = (0..mc_size)
        .map(|_| {
            let x = truth.sample(&mut rng);
            truth.log_p0(&x) - model.log_density_unchecked(&x, w)
        })
        .collect();
    Ok(McEstimate::from_terms(&terms))
}

/// Draws `n` i.i.d. samples from the truth. Same seed, same dataset.
pub fn sample_truth(truth: &dyn Truth, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let samples = (0..n).map(|_| truth.sample(&mut rng)).collect();
    Dataset::from_samples(samples, truth, seed)
}

pub(crate) fn std_normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[cfg(test)]
mod tests {
    use super::*;

    fn regular() -> Scenario {
        let m = RegularNormal::with_default_prior(1).unwrap();
        let t = NormalTruth::new(vec![0.0]);
        Scenario::new(Arc::new(m), Arc::new(t)).unwrap()
    }

    #[test]
    fn log_density_rejects_out_of_box_with_index() {
        let s = regular();
        let err = log_density(s.model.as_ref(), &[0.0], &[100.0]).unwrap_err();
        assert!(matches!(err, Error::DomainViolation { index: 0, .. }));
        let err = log_density(s.model.as_ref(), &[0.0, 1.0], &[0.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn dataset_caches_ln() {
        let s = regular();
        let d = sample_truth(s.truth.as_ref(), 1, 5).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.ln(), -s.truth.log_p0(d.sample(0)));
        let again = Dataset::from_samples(d.samples().to_vec(), s.truth.as_ref(), 5).unwrap();
        assert_eq!(again.ln().to_bits(), d.ln().to_bits());
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = regular();
        let a = sample_truth(s.truth.as_ref(), 50, 11).unwrap();
        let b = sample_truth(s.truth.as_ref(), 50, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_truth(s.truth.as_ref(), 50, 12).unwrap();
        assert_ne!(a, c);
        assert!(sample_truth(s.truth.as_ref(), 0, 1).is_err());
    }

    #[test]
    fn without_drops_one_sample() {
        let s = regular();
        let d = sample_truth(s.truth.as_ref(), 2, 3).unwrap();
        let d1 = d.without(1, s.truth.as_ref()).unwrap();
        assert_eq!(d1.samples(), &d.samples()[..1]);
        assert!(d.without(2, s.truth.as_ref()).is_err());
    }
}
