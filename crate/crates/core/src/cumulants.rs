//! Functional cumulants of the log likelihood under the posterior.
//!
//! `F(alpha) = (1/n) sum_i log E_w[p(X_i|w)^alpha]` and its derivatives at zero,
//! `Y_k = (1/n) sum_i d^k/d alpha^k log E_w[p(X_i|w)^alpha] |_{alpha=0}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp_iter, pairwise_sum};
use crate::posterior::PosteriorEnsemble;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub y4: f64,
    /// Functional variance, `n * y2`.
    pub v_n: f64,
    /// Per sample: `E_w[log p]`, then the central moments of orders 2, 3, 4.
    pub per_sample: Vec<[f64; 4]>,
}

/// Default window `[-beta - 1, beta + 1]` for `alpha`.
pub fn alpha_window(beta: f64) -> (f64, f64) {
    (-beta - 1.0, beta + 1.0)
}

/// `F(alpha)`, refusing `alpha` outside [`alpha_window`].
pub fn generating_function(ens: &PosteriorEnsemble, alpha: f64) -> Result<f64> {
    let (lo, hi) = alpha_window(ens.beta());
    if !(lo..=hi).contains(&alpha) {
        return Err(Error::AlphaOutOfWindow { alpha, lo, hi });
    }
    generating_function_unbounded(ens, alpha)
}

/// `F(alpha)` without the window check.
pub fn generating_function_unbounded(ens: &PosteriorEnsemble, alpha: f64) -> Result<f64> {
    let n = ens.n();
    if alpha == 0.0 || n == 0 {
        return Ok(0.0);
    }
    let terms = per_sample_log_moment(ens, alpha)?;
    Ok(pairwise_sum(&terms) / n as f64)
}

/// `log E_w[p(X_i|w)^alpha]` for each `i`.
pub fn per_sample_log_moment(ens: &PosteriorEnsemble, alpha: f64) -> Result<Vec<f64>> {
    let lp = ens.log_probs();
    (0..ens.n())
        .into_par_iter()
        .map(|i| {
            let col = ens.log_lik_column(i);
            let v = log_sum_exp_iter(lp.iter().zip(col).map(|(p, l)| p + alpha * l));
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Overflow { sample: i, alpha })
            }
        })
        .collect()
}

fn sample_moments(probs: &[f64], col: &[f64]) -> [f64; 4] {
    let c: f64 = probs.iter().zip(col).map(|(p, l)| p * l).sum();
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for (p, l) in probs.iter().zip(col) {
        let d = l - c;
        let d2 = d * d;
        m2 += p * d2;
        m3 += p * d2 * d;
        m4 += p * d2 * d2;
    }
    [c, m2, m3, m4]
}

fn probabilities(ens: &PosteriorEnsemble) -> Vec<f64> {
    ens.log_probs().iter().map(|lp| lp.exp()).collect()
}

/// `Y_1..Y_4` from per-sample central moments (two passes over the draws).
pub fn cumulants(ens: &PosteriorEnsemble) -> CumulantSet {
    let probs = probabilities(ens);
    let per_sample: Vec<[f64; 4]> = (0..ens.n())
        .into_par_iter()
        .map(|i| sample_moments(&probs, ens.log_lik_column(i)))
        .collect();
    let n = ens.n();
    if n == 0 {
        return CumulantSet {
            y1: 0.0,
            y2: 0.0,
            y3: 0.0,
            y4: 0.0,
            v_n: 0.0,
            per_sample,
        };
    }
    let nf = n as f64;
    let avg = |f: &dyn Fn(&[f64; 4]) -> f64| pairwise_sum(&per_sample.iter().map(f).collect::<Vec<_>>()) / nf;
    let y1 = avg(&|m| m[0]);
    let y2 = avg(&|m| m[1]);
    let y3 = avg(&|m| m[2]);
    let y4 = avg(&|m| m[3] - 3.0 * m[1] * m[1]);
    CumulantSet {
        y1,
        y2,
        y3,
        y4,
        v_n: nf * y2,
        per_sample,
    }
}

/// `Y_1..Y_4` from the raw moments `l_k = E_w[(log p)^k]`. Cross-check only;
/// cancels catastrophically when `|log p|` is large.
pub fn uncentered_cumulants(ens: &PosteriorEnsemble) -> [f64; 4] {
    let probs = probabilities(ens);
    let n = ens.n();
    if n == 0 {
        return [0.0; 4];
    }
    let rows: Vec<[f64; 4]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut l = [0.0; 4];
            for (p, v) in probs.iter().zip(ens.log_lik_column(i)) {
                l[0] += p * v;
                l[1] += p * v * v;
                l[2] += p * v * v * v;
                l[3] += p * v * v * v * v;
            }
            let [l1, l2, l3, l4] = l;
            [
                l1,
                l2 - l1 * l1,
                l3 - 3.0 * l2 * l1 + 2.0 * l1.powi(3),
                l4 - 4.0 * l3 * l1 - 3.0 * l2 * l2 + 12.0 * l2 * l1 * l1 - 6.0 * l1.powi(4),
            ]
        })
        .collect();
    let mut out = [0.0; 4];
    for (k, o) in out.iter_mut().enumerate() {
        *o = pairwise_sum(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()) / n as f64;
    }
    out
}

/// `V(n) = sum_i Var_w[log p(X_i|w)]`; identical to `cumulants(ens).v_n`.
pub fn functional_variance(ens: &PosteriorEnsemble) -> f64 {
    cumulants(ens).v_n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rng_from_seed;
    use rand::Rng;

    fn random_ensemble(seed: u64, m: usize, n: usize, beta: f64) -> PosteriorEnsemble {
        let mut rng = rng_from_seed(seed);
        let draws = (0..m).map(|_| vec![rng.gen::<f64>()]).collect();
        let lw = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let ll = (0..n)
            .map(|_| {
                let c = rng.gen_range(-5.0..0.0);
                (0..m).map(|_| c + rng.gen_range(-1.0..1.0)).collect()
            })
            .collect();
        PosteriorEnsemble::from_parts(draws, lw, beta, ll).unwrap()
    }

    #[test]
    fn f_at_zero_is_exactly_zero() {
        let e = random_ensemble(1, 40, 10, 1.0);
        assert_eq!(generating_function(&e, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn window_is_enforced() {
        let e = random_ensemble(1, 40, 10, 0.5);
        assert!(generating_function(&e, 1.5).is_ok());
        assert!(matches!(
            generating_function(&e, 1.6),
            Err(Error::AlphaOutOfWindow { .. })
        ));
    }

    #[test]
    fn single_draw_is_linear_with_no_fluctuation() {
        let ll = vec![vec![-1.3], vec![-0.2], vec![-2.9]];
        let e = PosteriorEnsemble::from_parts(vec![vec![0.0]], vec![0.0], 1.0, ll).unwrap();
        let mean = (-1.3 - 0.2 - 2.9) / 3.0;
        for a in [-1.5, 0.5, 2.0] {
            assert!((generating_function(&e, a).unwrap() - a * mean).abs() < 1e-14);
        }
        let c = cumulants(&e);
        assert_eq!((c.y2, c.y3, c.y4, c.v_n), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn centered_matches_uncentered() {
        for s in 0..20 {
            let e = random_ensemble(s, 60, 15, 1.0);
            let c = cumulants(&e);
            let u = uncentered_cumulants(&e);
            for (a, b) in [c.y1, c.y2, c.y3, c.y4].iter().zip(u) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn finite_differences_reproduce_cumulants() {
        let e = random_ensemble(9, 80, 12, 1.0);
        let c = cumulants(&e);
        let h = 1e-2;
        let f = |a: f64| generating_function(&e, a).unwrap();
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let d3 = (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h.powi(3));
        let d4 = (f(2.0 * h) - 4.0 * f(h) + 6.0 * f(0.0) - 4.0 * f(-h) + f(-2.0 * h)) / h.powi(4);
        assert!((d1 - c.y1).abs() < 1e-4 * c.y1.abs());
        assert!((d2 - c.y2).abs() < 1e-3 * c.y2.abs());
        assert!((d3 - c.y3).abs() < 1e-2 * c.y3.abs().max(1e-3));
        assert!((d4 - c.y4).abs() < 5e-2 * c.y4.abs().max(1e-2));
    }

    #[test]
    fn fine_differences_on_a_quadrature_posterior() {
        use crate::models::{sample_truth, NormalTruth, RegularNormal};
        use crate::posterior::{build_posterior, Backend, GridSpec};
        let m = RegularNormal::with_default_prior(1).unwrap();
        let d = sample_truth(&NormalTruth::new(vec![0.3]), 20, 3).unwrap();
        let e = build_posterior(&m, &d, 1.0, &Backend::Quadrature(GridSpec::sinh(2001, 0.05))).unwrap();
        let c = cumulants(&e);
        let f = |a: f64| generating_function(&e, a).unwrap();
        let rel = |a: f64, b: f64| (a / b - 1.0).abs();
        let h = 1e-3;
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let d3 = (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h.powi(3));
        assert!(rel(d1, c.y1) < 1e-4 && rel(d2, c.y2) < 1e-4 && rel(d3, c.y3) < 1e-4);
        // the fourth difference at 1e-3 is all roundoff; a wider step resolves it
        let h = 3e-2;
        let d4 = (f(2.0 * h) - 4.0 * f(h) + 6.0 * f(0.0) - 4.0 * f(-h) + f(-2.0 * h)) / h.powi(4);
        assert!(rel(d4, c.y4) < 1e-4, "{d4} vs {}", c.y4);
    }
}
