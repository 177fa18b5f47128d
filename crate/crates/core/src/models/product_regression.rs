use super::{std_normal, BoxPrior, Fiber, Model, ParamBox, PriorShape, Regression, Truth, LN_2PI};
use crate::error::Result;
use crate::numeric::Rng;

/// Two-parameter singular regression `y = a b u + N(0, 1)`, `u ~ N(0, 1)`.
///
/// A sample is `x = (u, y)`; the known input density `N(u; 0, 1)` is part of
/// `log p(x|w)`. With truth `ab = 0` the optimal set is the cross `{a = 0} ∪ {b = 0}`
/// and `K(a, b) = (ab)^2 / 2`.
#[derive(Clone, Debug)]
pub struct ProductRegression {
    prior: BoxPrior,
}

impl ProductRegression {
    pub fn new(prior: BoxPrior) -> Self {
        assert_eq!(prior.dim(), 2, "product regression has two parameters");
        Self { prior }
    }

    /// Uniform prior on `[-half_width, half_width]^2`.
    pub fn uniform(half_width: f64) -> Result<Self> {
        let bounds = ParamBox::cube(2, -half_width, half_width)?;
        Ok(Self::new(BoxPrior::new(bounds, PriorShape::Uniform)?))
    }
}

impl Model for ProductRegression {
    fn name(&self) -> String {
        "product_regression".into()
    }

    fn sample_dim(&self) -> usize {
        2
    }

    fn prior(&self) -> &BoxPrior {
        &self.prior
    }

    fn log_density_unchecked(&self, x: &[f64], w: &[f64]) -> f64 {
        let (u, y) = (x[0], x[1]);
        let r = y - w[0] * w[1] * u;
        -LN_2PI - 0.5 * (u * u + r * r)
    }

    fn regression(&self) -> Option<&dyn Regression> {
        Some(self)
    }

    fn fiber(&self) -> Option<&dyn Fiber> {
        let b = self.prior.bounds();
        let symmetric = (0..2).all(|j| b.lo[j] == -b.hi[j]);
        (symmetric && self.prior.shape() == PriorShape::Uniform).then_some(self as &dyn Fiber)
    }
}

impl ProductRegression {
    fn half_widths(&self) -> (f64, f64) {
        let b = self.prior.bounds();
        (b.hi[0], b.hi[1])
    }

    // prior mass of {0 <= ab <= t} for t in [0, AB]
    fn half_mass(&self, t: f64) -> f64 {
        let (a, b) = self.half_widths();
        let c = a * b;
        if t <= 0.0 {
            0.0
        } else {
            t / (2.0 * c) * ((c / t).ln() + 1.0)
        }
    }
}

/// Under the uniform prior on `[-A, A] x [-B, B]` the product `c = ab` has density
/// `ln(AB / |c|) / (2AB)` on `[-AB, AB]`.
impl Fiber for ProductRegression {
    fn fiber_range(&self) -> (f64, f64) {
        let (a, b) = self.half_widths();
        (-a * b, a * b)
    }

    fn fiber_mass(&self, lo: f64, hi: f64) -> f64 {
        if lo >= 0.0 {
            self.half_mass(hi) - self.half_mass(lo)
        } else if hi <= 0.0 {
            self.half_mass(-lo) - self.half_mass(-hi)
        } else {
            self.half_mass(-lo) + self.half_mass(hi)
        }
    }

    fn fiber_points(&self, c: f64) -> Vec<Vec<f64>> {
        let (a, b) = self.half_widths();
        let pa = (c.abs() * a / b).sqrt();
        let pb = c.signum() * (c.abs() * b / a).sqrt();
        vec![vec![pa, pb], vec![-pa, -pb]]
    }
}

impl Regression for ProductRegression {
    fn input_dim(&self) -> usize {
        1
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn noise_sd(&self) -> f64 {
        1.0
    }

    fn predict(&self, input: &[f64], w: &[f64], out: &mut [f64]) {
        out[0] = w[0] * w[1] * input[0];
    }
}

/// Truth `y = c0 u + N(0, 1)`.
#[derive(Clone, Debug)]
pub struct ProductTruth {
    product: f64,
    bounds: ParamBox,
}

impl ProductTruth {
    /// `product` is the true value of `ab`; `bounds` is the model's parameter box,
    /// used to place an explicit optimal parameter inside it.
    pub fn new(product: f64, bounds: ParamBox) -> Self {
        Self { product, bounds }
    }

    pub fn product(&self) -> f64 {
        self.product
    }
}

impl Truth for ProductTruth {
    fn sample_dim(&self) -> usize {
        2
    }

    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        let u = std_normal(rng);
        let y = self.product * u + std_normal(rng);
        vec![u, y]
    }

    fn log_p0(&self, x: &[f64]) -> f64 {
        let r = x[1] - self.product * x[0];
        -LN_2PI - 0.5 * (x[0] * x[0] + r * r)
    }

    fn entropy(&self) -> Option<f64> {
        Some(LN_2PI + 1.0)
    }

    fn min_loss(&self) -> Option<f64> {
        self.entropy()
    }

    /// Both for `ab = 0` (maximum pole of `∫ (a^2 b^2)^z da db`, order two) and
    /// for `ab != 0` (smooth fiber of codimension one) the threshold is 1/2.
    fn lambda(&self) -> Option<f64> {
        Some(0.5)
    }

    fn optimal_param(&self) -> Option<Vec<f64>> {
        let c = self.product;
        let candidates = [
            vec![c, 1.0],
            vec![c.signum() * c.abs().sqrt(), c.abs().sqrt()],
            vec![1.0, c],
        ];
        candidates.into_iter().find(|w| self.bounds.contains(w))
    }

    fn is_realizable(&self) -> bool {
        true
    }

    fn mean_response(&self, input: &[f64]) -> Option<Vec<f64>> {
        Some(vec![self.product * input[0]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{kl_to_truth, log_density, log_density_ratio};

    #[test]
    fn singular_fiber_gives_identical_density() {
        let m = ProductRegression::uniform(2.0).unwrap();
        let x = [0.7, -1.3];
        let base = log_density(&m, &x, &[0.0, 0.0]).unwrap();
        for b in [-2.0, -0.3, 1.9] {
            assert_eq!(log_density(&m, &x, &[0.0, b]).unwrap(), base);
        }
    }

    #[test]
    fn fiber_mass_matches_direct_integration() {
        let m = ProductRegression::new(
            BoxPrior::new(ParamBox::new(vec![-2.0, -3.0], vec![2.0, 3.0]).unwrap(), PriorShape::Uniform).unwrap(),
        );
        let f = m.fiber().unwrap();
        let (lo, hi) = f.fiber_range();
        assert_eq!((lo, hi), (-6.0, 6.0));
        assert!((f.fiber_mass(lo, hi) - 1.0).abs() < 1e-14);
        // midpoint grid over the box, counting cells with ab in [0.1, 0.7]
        let g = 2000;
        let mut hits = 0usize;
        for i in 0..g {
            let a = -2.0 + 4.0 * (i as f64 + 0.5) / g as f64;
            for j in 0..g {
                let b = -3.0 + 6.0 * (j as f64 + 0.5) / g as f64;
                let c = a * b;
                if (-0.4..=0.7).contains(&c) {
                    hits += 1;
                }
            }
        }
        let direct = hits as f64 / (g * g) as f64;
        assert!((f.fiber_mass(-0.4, 0.7) - direct).abs() < 2e-3, "{direct}");
        for c in [-5.9, -0.01, 0.0, 2.5] {
            for w in f.fiber_points(c) {
                assert!(m.domain().contains(&w));
                assert!((w[0] * w[1] - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_prior_has_no_fiber() {
        let b = ParamBox::cube(2, -2.0, 2.0).unwrap();
        let m = ProductRegression::new(BoxPrior::new(b, PriorShape::Normal { mean: 0.0, sd: 1.0 }).unwrap());
        assert!(m.fiber().is_none());
    }

    #[test]
    fn optimal_param_has_zero_ratio() {
        let m = ProductRegression::uniform(2.0).unwrap();
        for c in [0.0, 0.5, -1.5] {
            let t = ProductTruth::new(c, m.domain().clone());
            let w0 = t.optimal_param().unwrap();
            let mut rng = crate::numeric::rng_from_seed(1);
            for _ in 0..50 {
                let x = t.sample(&mut rng);
                assert!(log_density_ratio(&m, &t, &x, &w0).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let m = ProductRegression::uniform(2.0).unwrap();
        let w = [1.3, -0.8];
        let h = 0.02;
        let mut total = 0.0;
        for i in 0..800 {
            for j in 0..1500 {
                let x = [-8.0 + (i as f64 + 0.5) * h, -15.0 + (j as f64 + 0.5) * h];
                total += m.log_density_unchecked(&x, &w).exp() * h * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-3);
    }

    // quadrature of E[(ab u)^2] / 2 over u ~ N(0,1)
    #[test]
    fn kl_matches_quadrature_oracle() {
        let m = ProductRegression::uniform(2.0).unwrap();
        let t = ProductTruth::new(0.0, m.domain().clone());
        let h = 1e-3;
        let oracle: f64 = (0..20_000)
            .map(|k| {
                let u: f64 = -10.0 + (k as f64 + 0.5) * h;
                (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt() * 0.5 * u * u * h
            })
            .sum();
        assert!((oracle - 0.5).abs() < 1e-9);
        let est = kl_to_truth(&m, &t, &[1.0, 1.0], 50_000, 4).unwrap();
        assert!((est.value - oracle).abs() < 3.0 * est.stderr, "{est:?}");
    }
}
