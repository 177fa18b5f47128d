use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numeric::Rng;

/// Axis-aligned parameter box `[lo_j, hi_j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                what: "box bounds",
                expected: lo.len(),
                actual: hi.len(),
            });
        }
        if let Some(j) = (0..lo.len()).find(|&j| !(lo[j] < hi[j]) || !lo[j].is_finite() || !hi[j].is_finite()) {
            return Err(Error::InvalidInput(format!(
                "box coordinate {j}: need finite lo < hi, got [{}, {}]",
                lo[j], hi[j]
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Validates dimension and membership, naming the first offending coordinate.
    pub fn check(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "parameter",
                expected: self.dim(),
                actual: w.len(),
            });
        }
        for (j, v) in w.iter().enumerate() {
            if !(*v >= self.lo[j] && *v <= self.hi[j]) {
                return Err(Error::DomainViolation {
                    index: j,
                    value: *v,
                    lo: self.lo[j],
                    hi: self.hi[j],
                });
            }
        }
        Ok(())
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorShape {
    Uniform,
    /// Independent `N(mean, sd^2)` per coordinate, truncated to the box.
    Normal { mean: f64, sd: f64 },
}

/// Product prior on a box, normalized over the box.
#[derive(Clone, Debug)]
pub struct BoxPrior {
    bounds: ParamBox,
    shape: PriorShape,
    // per-coordinate log normalizer (log of box mass, or log width for uniform)
    log_norm: Vec<f64>,
    // per-coordinate CDF values at the bounds, for inverse-CDF sampling
    cdf_bounds: Vec<(f64, f64)>,
}

impl BoxPrior {
    pub fn new(bounds: ParamBox, shape: PriorShape) -> Result<Self> {
        let d = bounds.dim();
        let mut log_norm = Vec::with_capacity(d);
        let mut cdf_bounds = Vec::with_capacity(d);
        for j in 0..d {
            let (lo, hi) = (bounds.lo[j], bounds.hi[j]);
            match shape {
                PriorShape::Uniform => {
                    log_norm.push((hi - lo).ln());
                    cdf_bounds.push((0.0, 1.0));
                }
                PriorShape::Normal { mean, sd } => {
                    if !(sd > 0.0) {
                        return Err(Error::InvalidInput(format!("prior sd must be positive, got {sd}")));
                    }
                    let nd = Normal::new(mean, sd).map_err(|e| Error::InvalidInput(e.to_string()))?;
                    let (clo, chi) = (nd.cdf(lo), nd.cdf(hi));
                    if !(chi > clo) {
                        return Err(Error::InvalidInput(format!(
                            "prior has no mass on [{lo}, {hi}]"
                        )));
                    }
                    log_norm.push((chi - clo).ln());
                    cdf_bounds.push((clo, chi));
                }
            }
        }
        Ok(Self {
            bounds,
            shape,
            log_norm,
            cdf_bounds,
        })
    }

    pub fn bounds(&self) -> &ParamBox {
        &self.bounds
    }

    pub fn shape(&self) -> PriorShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    /// Log prior density; `-inf` outside the box.
    pub fn log_density(&self, w: &[f64]) -> f64 {
        if !self.bounds.contains(w) {
            return f64::NEG_INFINITY;
        }
        match self.shape {
            PriorShape::Uniform => -self.log_norm.iter().sum::<f64>(),
            PriorShape::Normal { mean, sd } => {
                let c = -0.5 * (2.0 * std::f64::consts::PI).ln() - sd.ln();
                w.iter()
                    .zip(&self.log_norm)
                    .map(|(v, ln)| {
                        let z = (v - mean) / sd;
                        c - 0.5 * z * z - ln
                    })
                    .sum()
            }
        }
    }

    /// Probability mass of the interval `[a, b]` along coordinate `j`.
    pub fn coordinate_mass(&self, j: usize, a: f64, b: f64) -> f64 {
        let (lo, hi) = (self.bounds.lo[j], self.bounds.hi[j]);
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return 0.0;
        }
        match self.shape {
            PriorShape::Uniform => (b - a) / (hi - lo),
            PriorShape::Normal { mean, sd } => {
                let nd = Normal::new(mean, sd).expect("validated at construction");
                (nd.cdf(b) - nd.cdf(a)) / self.log_norm[j].exp()
            }
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                let (lo, hi) = (self.bounds.lo[j], self.bounds.hi[j]);
                match self.shape {
                    PriorShape::Uniform => 0.5 * (lo + hi),
                    PriorShape::Normal { mean, sd } => {
                        // truncated-normal mean
                        let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                        let (a, b) = ((lo - mean) / sd, (hi - mean) / sd);
                        mean + sd * (phi(a) - phi(b)) / self.log_norm[j].exp()
                    }
                }
            })
            .collect()
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                let (lo, hi) = (self.bounds.lo[j], self.bounds.hi[j]);
                match self.shape {
                    PriorShape::Uniform => rng.gen_range(lo..=hi),
                    PriorShape::Normal { mean, sd } => {
                        let nd = Normal::new(mean, sd).expect("validated at construction");
                        let (clo, chi) = self.cdf_bounds[j];
                        let u: f64 = rng.gen_range(clo..chi);
                        nd.inverse_cdf(u).clamp(lo, hi)
                    }
                }
            })
            .collect()
    }
}
