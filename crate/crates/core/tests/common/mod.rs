#![allow(dead_code)]

use bayescv::criteria::{bayes_training_loss, cv_importance, waic};
use bayescv::cumulants::{cumulants, generating_function, per_sample_log_moment, uncentered_cumulants};
use bayescv::posterior::PosteriorEnsemble;
use proptest::collection::vec;
use proptest::prelude::*;

pub const F0_TOL: f64 = 1e-14;
pub const WAIC_TOL: f64 = 1e-12;
pub const CV2_TOL: f64 = 1e-10;
pub const SHIFT_TOL: f64 = 1e-10;
pub const CENTERED_TOL: f64 = 1e-10;

/// Raw material for a weighted ensemble with arbitrary log-likelihoods.
#[derive(Clone, Debug)]
pub struct EnsembleCase {
    pub beta: f64,
    pub log_weights: Vec<f64>,
    /// `loglik[i][m]`
    pub loglik: Vec<Vec<f64>>,
    /// Per-sample constants added for the shift check.
    pub shifts: Vec<f64>,
}

impl EnsembleCase {
    pub fn ensemble(&self, shifted: bool) -> PosteriorEnsemble {
        let m = self.log_weights.len();
        let draws = (0..m).map(|k| vec![k as f64]).collect();
        let ll = self
            .loglik
            .iter()
            .zip(&self.shifts)
            .map(|(row, s)| row.iter().map(|v| if shifted { v + s } else { *v }).collect())
            .collect();
        PosteriorEnsemble::from_parts(draws, self.log_weights.clone(), self.beta, ll).expect("valid case")
    }
}

pub fn ensemble_case() -> impl Strategy<Value = EnsembleCase> {
    (2usize..40, 1usize..25, 0.1f64..3.0).prop_flat_map(|(m, n, beta)| {
        (
            Just(beta),
            vec(-5.0f64..5.0, m),
            vec((-8.0f64..0.0, 0.01f64..3.0, vec(-1.0f64..1.0, m)), n),
            vec(-10.0f64..10.0, n),
        )
            .prop_map(|(beta, log_weights, rows, shifts)| EnsembleCase {
                beta,
                log_weights,
                loglik: rows
                    .into_iter()
                    .map(|(c, s, z)| z.into_iter().map(|u| c + s * u).collect())
                    .collect(),
                shifts,
            })
    })
}

fn close(what: &str, a: f64, b: f64, tol: f64) -> Result<(), String> {
    let err = (a - b).abs();
    if err <= tol * b.abs().max(1.0) {
        Ok(())
    } else {
        Err(format!("{what}: {a} vs {b} (error {err:e}, tol {tol:e})"))
    }
}

/// Every algebraic identity the criteria must satisfy on any ensemble.
pub fn check_identities(case: &EnsembleCase) -> Result<(), String> {
    let e = case.ensemble(false);
    let n = e.n() as f64;
    let beta = case.beta;

    let f0 = per_sample_log_moment(&e, 0.0).map_err(|x| x.to_string())?;
    for v in f0 {
        close("log E_w[p^0]", v, 0.0, F0_TOL)?;
    }
    close("F(0)", generating_function(&e, 0.0).unwrap(), 0.0, F0_TOL)?;

    let c = cumulants(&e);
    if c.v_n != n * c.y2 {
        return Err(format!("V = {} but n Y2 = {}", c.v_n, n * c.y2));
    }
    let btl = bayes_training_loss(&e).map_err(|x| x.to_string())?;
    close("WAIC", waic(&e).unwrap(), btl + beta * c.v_n / n, WAIC_TOL)?;

    let cv2 = cv_importance(&e, 0.0).map_err(|x| x.to_string())?.value;
    let f = |a: f64| generating_function(&e, a).map_err(|x| x.to_string());
    close("CV2", cv2, f(-beta)? - f(1.0 - beta)?, CV2_TOL)?;

    let s = cumulants(&case.ensemble(true));
    let mean_shift = case.shifts.iter().sum::<f64>() / n;
    close("Y1 shift", s.y1, c.y1 + mean_shift, SHIFT_TOL)?;
    close("Y2 shift", s.y2, c.y2, SHIFT_TOL)?;
    close("Y3 shift", s.y3, c.y3, SHIFT_TOL)?;
    close("Y4 shift", s.y4, c.y4, SHIFT_TOL)?;

    let u = uncentered_cumulants(&e);
    for (k, (a, b)) in u.iter().zip([c.y1, c.y2, c.y3, c.y4]).enumerate() {
        close(&format!("uncentered Y{}", k + 1), *a, b, CENTERED_TOL)?;
    }
    Ok(())
}
