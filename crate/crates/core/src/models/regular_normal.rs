use super::{std_normal, BoxPrior, Model, ParamBox, PriorShape, Truth, LN_2PI};
use crate::error::Result;
use crate::numeric::Rng;

/// `p(x|w) = N(x; w, I_k)` with `d = k`. Regular for every Gaussian truth.
#[derive(Clone, Debug)]
pub struct RegularNormal {
    prior: BoxPrior,
}

impl RegularNormal {
    pub fn new(prior: BoxPrior) -> Self {
        Self { prior }
    }

    /// `N(0, 10^2)` per coordinate truncated to `[-40, 40]`.
    pub fn with_default_prior(dim: usize) -> Result<Self> {
        let bounds = ParamBox::cube(dim, -40.0, 40.0)?;
        Ok(Self::new(BoxPrior::new(bounds, PriorShape::Normal { mean: 0.0, sd: 10.0 })?))
    }
}

impl Model for RegularNormal {
    fn name(&self) -> String {
        "regular_normal".into()
    }

    fn sample_dim(&self) -> usize {
        self.prior.dim()
    }

    fn prior(&self) -> &BoxPrior {
        &self.prior
    }

    fn log_density_unchecked(&self, x: &[f64], w: &[f64]) -> f64 {
        let sq: f64 = x.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
        -0.5 * x.len() as f64 * LN_2PI - 0.5 * sq
    }
}

/// `q = N(mean, I_k)`, realizable by [`RegularNormal`] with `w0 = mean`.
#[derive(Clone, Debug)]
pub struct NormalTruth {
    mean: Vec<f64>,
}

impl NormalTruth {
    pub fn new(mean: Vec<f64>) -> Self {
        Self { mean }
    }
}

impl Truth for NormalTruth {
    fn sample_dim(&self) -> usize {
        self.mean.len()
    }

    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        self.mean.iter().map(|m| m + std_normal(rng)).collect()
    }

    fn log_p0(&self, x: &[f64]) -> f64 {
        let sq: f64 = x.iter().zip(&self.mean).map(|(a, b)| (a - b) * (a - b)).sum();
        -0.5 * x.len() as f64 * LN_2PI - 0.5 * sq
    }

    fn entropy(&self) -> Option<f64> {
        Some(0.5 * self.mean.len() as f64 * (LN_2PI + 1.0))
    }

    fn min_loss(&self) -> Option<f64> {
        self.entropy()
    }

    fn lambda(&self) -> Option<f64> {
        Some(0.5 * self.mean.len() as f64)
    }

    fn optimal_param(&self) -> Option<Vec<f64>> {
        Some(self.mean.clone())
    }

    fn is_realizable(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{kl_to_truth, log_density, log_density_ratio};

    #[test]
    fn standard_normal_at_mode() {
        let m = RegularNormal::with_default_prior(1).unwrap();
        let v = log_density(&m, &[0.0], &[0.0]).unwrap();
        assert!((v + 0.918_938_533_204_672_7).abs() < 1e-15);
    }

    #[test]
    fn ratio_by_substitution() {
        let m = RegularNormal::with_default_prior(1).unwrap();
        let t = NormalTruth::new(vec![0.0]);
        assert!((log_density_ratio(&m, &t, &[1.0], &[1.0]).unwrap() + 0.5).abs() < 1e-12);
        for x in [-3.0, 0.2, 7.5] {
            assert!(log_density_ratio(&m, &t, &[x], &[0.0]).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let m = RegularNormal::with_default_prior(2).unwrap();
        let w = [0.3, -1.1];
        let h = 0.02;
        let mut total = 0.0;
        for i in 0..1000 {
            for j in 0..1000 {
                let x = [-9.7 + (i as f64 + 0.5) * h, -11.1 + (j as f64 + 0.5) * h];
                total += m.log_density_unchecked(&x, &w).exp() * h * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-3);
    }

    // closed form (w - w0)^2 / 2, cross-checked by 1-D quadrature of q(x) f(x, w)
    #[test]
    fn kl_matches_quadrature_oracle() {
        let m = RegularNormal::with_default_prior(1).unwrap();
        let t = NormalTruth::new(vec![0.0]);
        let h = 1e-3;
        let oracle: f64 = (0..20_000)
            .map(|k| {
                let x = -10.0 + (k as f64 + 0.5) * h;
                t.log_p0(&[x]).exp() * (t.log_p0(&[x]) - m.log_density_unchecked(&[x], &[1.0])) * h
            })
            .sum();
        assert!((oracle - 0.5).abs() < 1e-9);
        let est = kl_to_truth(&m, &t, &[1.0], 20_000, 9).unwrap();
        assert!((est.value - oracle).abs() < 3.0 * est.stderr);
        let zero = kl_to_truth(&m, &t, &[0.0], 1000, 9).unwrap();
        assert_eq!(zero.value, 0.0);
    }
}
