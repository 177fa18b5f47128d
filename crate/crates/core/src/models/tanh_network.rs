use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{std_normal, BoxPrior, Model, ParamBox, PriorShape, Regression, Truth, LN_2PI};
use crate::error::{Error, Result};
use crate::numeric::{rng_from_seed, Rng};

/// Three-layer tanh network `R_H(x, w) = sum_h a_h tanh(b_h . x)` with Gaussian
/// output noise and a fixed, known input density `s(x) = N(0, input_sd^2 I)`.
///
/// Parameters are laid out unit by unit as `[a_1, b_1, ..., a_H, b_H]` with
/// `a_h` in R^out and `b_h` in R^in, so `d = H (in + out)`. A sample is
/// `x = (input, y)`.
#[derive(Clone, Debug)]
pub struct TanhNetwork {
    hidden: usize,
    input_dim: usize,
    output_dim: usize,
    sigma: f64,
    input_sd: f64,
    prior: BoxPrior,
}

impl TanhNetwork {
    pub fn new(
        hidden: usize,
        input_dim: usize,
        output_dim: usize,
        sigma: f64,
        input_sd: f64,
        prior: BoxPrior,
    ) -> Result<Self> {
        if hidden == 0 || input_dim == 0 || output_dim == 0 {
            return Err(Error::InvalidInput("network sizes must be positive".into()));
        }
        if !(sigma > 0.0 && input_sd > 0.0) {
            return Err(Error::InvalidInput("sigma and input_sd must be positive".into()));
        }
        let d = hidden * (input_dim + output_dim);
        if prior.dim() != d {
            return Err(Error::DimensionMismatch {
                what: "tanh network prior",
                expected: d,
                actual: prior.dim(),
            });
        }
        Ok(Self {
            hidden,
            input_dim,
            output_dim,
            sigma,
            input_sd,
            prior,
        })
    }

    /// 3-in/3-out network with `sigma = 0.1`, `s(x) = N(0, 2^2 I)` and prior
    /// `N(0, 10^2 I)` truncated to `[-40, 40]^d`.
    pub fn standard(hidden: usize) -> Result<Self> {
        let d = hidden * 6;
        let prior = BoxPrior::new(
            ParamBox::cube(d, -40.0, 40.0)?,
            PriorShape::Normal { mean: 0.0, sd: 10.0 },
        )?;
        Self::new(hidden, 3, 3, 0.1, 2.0, prior)
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn input_sd(&self) -> f64 {
        self.input_sd
    }

    fn unit_len(&self) -> usize {
        self.input_dim + self.output_dim
    }

    fn log_input_density(&self, input: &[f64]) -> f64 {
        input_log_density(input, self.input_sd)
    }
}

fn input_log_density(input: &[f64], sd: f64) -> f64 {
    let sq: f64 = input.iter().map(|v| v * v).sum();
    -0.5 * input.len() as f64 * (LN_2PI + 2.0 * sd.ln()) - 0.5 * sq / (sd * sd)
}

fn network_output(
    input: &[f64],
    w: &[f64],
    hidden: usize,
    in_dim: usize,
    out_dim: usize,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let unit = in_dim + out_dim;
    for h in 0..hidden {
        let base = h * unit;
        let a = &w[base..base + out_dim];
        let b = &w[base + out_dim..base + unit];
        let act: f64 = b.iter().zip(input).map(|(bi, xi)| bi * xi).sum::<f64>().tanh();
        for (o, ai) in out.iter_mut().zip(a) {
            *o += ai * act;
        }
    }
}

impl Model for TanhNetwork {
    fn name(&self) -> String {
        format!("tanh_network({})", self.hidden)
    }

    fn sample_dim(&self) -> usize {
        self.unit_len()
    }

    fn prior(&self) -> &BoxPrior {
        &self.prior
    }

    fn log_density_unchecked(&self, x: &[f64], w: &[f64]) -> f64 {
        let (input, y) = x.split_at(self.input_dim);
        let mut stack = [0.0f64; 8];
        let mut heap = Vec::new();
        let r: &mut [f64] = if self.output_dim <= stack.len() {
            &mut stack[..self.output_dim]
        } else {
            heap.resize(self.output_dim, 0.0);
            &mut heap
        };
        for h in 0..self.hidden {
            let base = h * self.unit_len();
            let b = &w[base + self.output_dim..base + self.unit_len()];
            let act: f64 = b.iter().zip(input).map(|(bi, xi)| bi * xi).sum::<f64>().tanh();
            for (rk, ak) in r.iter_mut().zip(&w[base..base + self.output_dim]) {
                *rk += ak * act;
            }
        }
        let sq: f64 = r.iter().zip(y).map(|(rk, yk)| (yk - rk) * (yk - rk)).sum();
        let s2 = self.sigma * self.sigma;
        self.log_input_density(input)
            - 0.5 * self.output_dim as f64 * (LN_2PI + s2.ln())
            - 0.5 * sq / s2
    }

    fn regression(&self) -> Option<&dyn Regression> {
        Some(self)
    }

    /// Random permutation of hidden units combined with random sign flips
    /// `(a_h, b_h) -> (-a_h, -b_h)`; both leave `R_H` unchanged.
    fn random_symmetry(&self, w: &[f64], rng: &mut Rng) -> Vec<f64> {
        let unit = self.unit_len();
        let mut order: Vec<usize> = (0..self.hidden).collect();
        order.shuffle(rng);
        let mut out = Vec::with_capacity(w.len());
        for &h in &order {
            let sign = if rng.gen::<bool>() { -1.0 } else { 1.0 };
            out.extend(w[h * unit..(h + 1) * unit].iter().map(|v| sign * v));
        }
        out
    }
}

impl Regression for TanhNetwork {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn noise_sd(&self) -> f64 {
        self.sigma
    }

    fn predict(&self, input: &[f64], w: &[f64], out: &mut [f64]) {
        network_output(input, w, self.hidden, self.input_dim, self.output_dim, out);
    }
}

/// Data generated by a smaller network with `H0` units and parameter `w0`.
#[derive(Clone, Debug)]
pub struct TanhTruth {
    truth_hidden: usize,
    input_dim: usize,
    output_dim: usize,
    sigma: f64,
    input_sd: f64,
    truth_params: Vec<f64>,
    model_hidden: usize,
}

impl TanhTruth {
    /// `truth_params` holds `H0` units in the same `[a_h, b_h]` layout as the model.
    pub fn new(model: &TanhNetwork, truth_hidden: usize, truth_params: Vec<f64>) -> Result<Self> {
        if truth_hidden > model.hidden {
            return Err(Error::InvalidInput(format!(
                "truth has {truth_hidden} units but the model only {}",
                model.hidden
            )));
        }
        let expected = truth_hidden * model.unit_len();
        if truth_params.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "truth network parameters",
                expected,
                actual: truth_params.len(),
            });
        }
        let truth = Self {
            truth_hidden,
            input_dim: model.input_dim,
            output_dim: model.output_dim,
            sigma: model.sigma,
            input_sd: model.input_sd,
            truth_params,
            model_hidden: model.hidden,
        };
        if let Some(w0) = truth.optimal_param() {
            model.domain().check(&w0)?;
        }
        Ok(truth)
    }

    /// Default truth: for `H0 = 1` the unit `a = (0.6, -0.4, 0.5)`,
    /// `b = (0.4, 0.3, -0.5)`; additional units are drawn from `N(0, 0.5^2)`
    /// with a fixed seed.
    pub fn default_for(model: &TanhNetwork, truth_hidden: usize) -> Result<Self> {
        let unit = model.unit_len();
        let mut params = Vec::with_capacity(truth_hidden * unit);
        let first = [0.6, -0.4, 0.5, 0.4, 0.3, -0.5];
        let mut rng = rng_from_seed(0x7a9b);
        for h in 0..truth_hidden {
            for k in 0..unit {
                if h == 0 && model.input_dim == 3 && model.output_dim == 3 {
                    params.push(first[k]);
                } else {
                    params.push(0.5 * std_normal(&mut rng));
                }
            }
        }
        Self::new(model, truth_hidden, params)
    }

    pub fn truth_hidden(&self) -> usize {
        self.truth_hidden
    }

    pub fn truth_params(&self) -> &[f64] {
        &self.truth_params
    }

    fn truth_output(&self, input: &[f64], out: &mut [f64]) {
        network_output(
            input,
            &self.truth_params,
            self.truth_hidden,
            self.input_dim,
            self.output_dim,
            out,
        );
    }
}

impl Truth for TanhTruth {
    fn sample_dim(&self) -> usize {
        self.input_dim + self.output_dim
    }

    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.input_dim).map(|_| self.input_sd * std_normal(rng)).collect();
        let mut mean = vec![0.0; self.output_dim];
        self.truth_output(&x, &mut mean);
        x.extend(mean.iter().map(|m| m + self.sigma * std_normal(rng)));
        x
    }

    fn log_p0(&self, x: &[f64]) -> f64 {
        let (input, y) = x.split_at(self.input_dim);
        let mut mean = vec![0.0; self.output_dim];
        self.truth_output(input, &mut mean);
        let sq: f64 = y.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum();
        let s2 = self.sigma * self.sigma;
        input_log_density(input, self.input_sd) - 0.5 * self.output_dim as f64 * (LN_2PI + s2.ln())
            - 0.5 * sq / s2
    }

    fn entropy(&self) -> Option<f64> {
        let input = 0.5 * self.input_dim as f64 * (LN_2PI + 1.0 + 2.0 * self.input_sd.ln());
        let noise = 0.5 * self.output_dim as f64 * (LN_2PI + 1.0 + 2.0 * self.sigma.ln());
        Some(input + noise)
    }

    fn min_loss(&self) -> Option<f64> {
        self.entropy()
    }

    fn optimal_param(&self) -> Option<Vec<f64>> {
        let mut w = self.truth_params.clone();
        w.resize(self.model_hidden * (self.input_dim + self.output_dim), 0.0);
        Some(w)
    }

    fn is_realizable(&self) -> bool {
        true
    }

    fn mean_response(&self, input: &[f64]) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.output_dim];
        self.truth_output(input, &mut out);
        Some(out)
    }
}
