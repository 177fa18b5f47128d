//! Closed forms for the one-dimensional Gaussian location model
//! `p(x|w) = N(x; w, 1)` with prior `N(mu0, tau^2)` at inverse temperature `beta`.
//!
//! Posterior-side quantities ignore the prior truncation box; with the default
//! box the posterior mass outside it is far below double precision. The free
//! energy includes the truncation correction exactly.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::models::{BoxPrior, PriorShape};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugateNormal {
    pub prior_mean: f64,
    pub prior_sd: f64,
    /// Prior truncation interval.
    pub lo: f64,
    pub hi: f64,
    pub beta: f64,
}

/// Exact values of the evaluation quantities for one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugateValues {
    pub post_mean: f64,
    pub post_var: f64,
    pub btl: f64,
    pub gtl: f64,
    pub v_n: f64,
    pub waic: f64,
    pub cv: f64,
    /// `-log` marginal likelihood of the tempered model.
    pub free_energy: f64,
}

fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln()) - 0.5 * (x - mean).powi(2) / var
}

fn interval_mass(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    let d = Normal::new(mean, sd).expect("positive sd");
    d.cdf(hi) - d.cdf(lo)
}

impl ConjugateNormal {
    /// Reads the prior of a one-dimensional Gaussian-prior model.
    pub fn from_prior(prior: &BoxPrior, beta: f64) -> Result<Self> {
        match prior.shape() {
            PriorShape::Normal { mean, sd } if prior.dim() == 1 => Ok(Self {
                prior_mean: mean,
                prior_sd: sd,
                lo: prior.bounds().lo[0],
                hi: prior.bounds().hi[0],
                beta,
            }),
            _ => Err(Error::Unsupported("closed forms need a one-dimensional Gaussian prior")),
        }
    }

    /// Posterior precision and mean given the data.
    pub fn posterior(&self, xs: &[f64]) -> (f64, f64) {
        let tau2 = self.prior_sd * self.prior_sd;
        let p = 1.0 / tau2 + self.beta * xs.len() as f64;
        let m = (self.prior_mean / tau2 + self.beta * xs.iter().sum::<f64>()) / p;
        (p, m)
    }

    /// `-log` of the tempered marginal likelihood `int prod p(x_i|w)^beta phi(w) dw`.
    pub fn free_energy(&self, xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        if xs.is_empty() || self.beta == 0.0 {
            return 0.0;
        }
        let b = self.beta;
        let tau2 = self.prior_sd * self.prior_sd;
        let xbar = xs.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
        let untruncated = 0.5 * b * n * LN_2PI
            + 0.5 * b * sxx
            + 0.5 * (1.0 + b * n * tau2).ln()
            + b * n * (xbar - self.prior_mean).powi(2) / (2.0 * (1.0 + b * n * tau2));
        let (p, m) = self.posterior(xs);
        let post_box = interval_mass(self.lo, self.hi, m, p.recip().sqrt());
        let prior_box = interval_mass(self.lo, self.hi, self.prior_mean, self.prior_sd);
        untruncated - post_box.ln() + prior_box.ln()
    }

    pub fn values(&self, xs: &[f64]) -> ConjugateValues {
        let n = xs.len() as f64;
        let b = self.beta;
        let (p, m) = self.posterior(xs);
        let s2 = 1.0 / p;
        let btl = -xs.iter().map(|&x| ln_normal(x, m, 1.0 + s2)).sum::<f64>() / n;
        let gtl = 0.5 * LN_2PI + xs.iter().map(|x| (x - m).powi(2) + s2).sum::<f64>() / (2.0 * n);
        let v_n: f64 = xs.iter().map(|x| (x - m).powi(2) * s2 + 0.5 * s2 * s2).sum();
        let cv = -xs
            .iter()
            .map(|&x| {
                let pi = p - b;
                let mi = (m * p - b * x) / pi;
                ln_normal(x, mi, 1.0 + 1.0 / pi)
            })
            .sum::<f64>()
            / n;
        ConjugateValues {
            post_mean: m,
            post_var: s2,
            btl,
            gtl,
            v_n,
            waic: btl + b * v_n / n,
            cv,
            free_energy: self.free_energy(xs),
        }
    }

    /// Bayes generalization loss when the truth is `N(true_mean, 1)`.
    pub fn generalization_loss(&self, xs: &[f64], true_mean: f64) -> f64 {
        let (p, m) = self.posterior(xs);
        let var = 1.0 + 1.0 / p;
        0.5 * (LN_2PI + var.ln()) + (1.0 + (true_mean - m).powi(2)) / (2.0 * var)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle() -> ConjugateNormal {
        ConjugateNormal {
            prior_mean: 0.3,
            prior_sd: 2.0,
            lo: -40.0,
            hi: 40.0,
            beta: 0.7,
        }
    }

    // brute-force midpoint integration over w
    fn numeric_free_energy(c: &ConjugateNormal, xs: &[f64]) -> f64 {
        let g = 400_000;
        let h = (c.hi - c.lo) / g as f64;
        let z_box = interval_mass(c.lo, c.hi, c.prior_mean, c.prior_sd);
        let terms: Vec<f64> = (0..g)
            .map(|k| {
                let w = c.lo + (k as f64 + 0.5) * h;
                let ll: f64 = xs.iter().map(|&x| ln_normal(x, w, 1.0)).sum();
                c.beta * ll + ln_normal(w, c.prior_mean, c.prior_sd.powi(2)) - z_box.ln() + h.ln()
            })
            .collect();
        -crate::numeric::log_sum_exp(&terms)
    }

    #[test]
    fn free_energy_matches_direct_integration() {
        let c = oracle();
        let xs = [0.4, -1.2, 2.2, 0.9, 0.1];
        assert!((c.free_energy(&xs) - numeric_free_energy(&c, &xs)).abs() < 1e-9);
    }

    #[test]
    fn truncation_correction_is_visible_on_a_narrow_box() {
        let mut c = oracle();
        c.lo = -1.0;
        c.hi = 1.5;
        let xs = [0.4, -1.2, 2.2];
        assert!((c.free_energy(&xs) - numeric_free_energy(&c, &xs)).abs() < 1e-9);
    }

    #[test]
    fn waic_and_cv_coincide_in_the_limit_of_many_samples() {
        let c = oracle();
        let xs: Vec<f64> = (0..4000).map(|i| ((i * 7919) % 1000) as f64 / 500.0 - 1.0).collect();
        let v = c.values(&xs);
        assert!((v.waic - v.cv).abs() < 1e-6);
    }

    #[test]
    fn empty_data_has_zero_free_energy() {
        assert_eq!(oracle().free_energy(&[]), 0.0);
    }
}
