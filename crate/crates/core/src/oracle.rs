//! Hermetic self-check against the conjugate Gaussian closed forms.

use std::io::Write;

use serde::Serialize;

use crate::conjugate::ConjugateNormal;
use crate::criteria::{bayes_training_loss, cv_importance, cv_refit, gibbs_training_loss, waic};
use crate::cumulants::generating_function;
use crate::error::{Error, Result};
use crate::models::{sample_truth, Model, NormalTruth, RegularNormal};
use crate::posterior::{build_posterior, Backend, GridSpec};

/// Relative tolerance against closed forms.
pub const CLOSED_FORM_RTOL: f64 = 1e-5;
/// Absolute tolerance between refit and importance LOO on a shared grid.
pub const CV1_CV2_ATOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub beta: f64,
    pub computed: f64,
    pub expected: f64,
    /// Relative for closed-form comparisons, absolute for `cv1 = cv2`.
    pub tolerance: f64,
    pub relative: bool,
    pub pass: bool,
}

impl OracleCheck {
    fn new(name: &str, beta: f64, computed: f64, expected: f64, tolerance: f64, relative: bool) -> Self {
        let err = (computed - expected).abs();
        let scale = if relative { expected.abs() } else { 1.0 };
        Self {
            name: name.into(),
            beta,
            computed,
            expected,
            tolerance,
            relative,
            pass: err <= tolerance * scale,
        }
    }

    pub fn error(&self) -> f64 {
        let err = (self.computed - self.expected).abs();
        if self.relative {
            err / self.expected.abs()
        } else {
            err
        }
    }
}

/// Compares quadrature criteria on the conjugate model (d = 1, n = 20) with
/// their closed forms at `beta` = 1 and 0.5.
pub fn conjugate_checks(seed: u64) -> Result<Vec<OracleCheck>> {
    let model = RegularNormal::with_default_prior(1)?;
    let truth = NormalTruth::new(vec![0.3]);
    let data = sample_truth(&truth, 20, seed)?;
    let xs: Vec<f64> = data.samples().iter().map(|x| x[0]).collect();
    let backend = Backend::Quadrature(GridSpec::uniform(4001));
    let mut out = Vec::new();
    for beta in [1.0, 0.5] {
        let exact = ConjugateNormal::from_prior(model.prior(), beta)?.values(&xs);
        let ens = build_posterior(&model, &data, beta, &backend)?;
        let btl = bayes_training_loss(&ens)?;
        let cv2 = cv_importance(&ens, 0.0)?.value;
        let cv1 = cv_refit(&model, &truth, &data, beta, &backend)?;
        let log_z = ens
            .log_evidence()
            .ok_or_else(|| Error::InvalidInput("quadrature ensemble without evidence".into()))?;
        let r = CLOSED_FORM_RTOL;
        out.push(OracleCheck::new("btl", beta, btl, exact.btl, r, true));
        out.push(OracleCheck::new("gtl", beta, gibbs_training_loss(&ens), exact.gtl, r, true));
        out.push(OracleCheck::new("waic", beta, waic(&ens)?, exact.waic, r, true));
        out.push(OracleCheck::new("cv2", beta, cv2, exact.cv, r, true));
        out.push(OracleCheck::new("f1", beta, generating_function(&ens, 1.0)?, -exact.btl, r, true));
        out.push(OracleCheck::new("free_energy", beta, -log_z, exact.free_energy, r, true));
        out.push(OracleCheck::new("cv1_minus_cv2", beta, cv1, cv2, CV1_CV2_ATOL, false));
    }
    Ok(out)
}

pub fn write_checks_csv<W: Write>(out: W, checks: &[OracleCheck]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "beta", "computed", "expected", "error", "tolerance", "pass"])?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            format!("{:?}", c.beta),
            format!("{:?}", c.computed),
            format!("{:?}", c.expected),
            format!("{:?}", c.error()),
            format!("{:?}", c.tolerance),
            c.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable table for standard error.
pub fn format_table(checks: &[OracleCheck]) -> String {
    let mut s = format!("{:<14} {:>5} {:>22} {:>22} {:>10}  result\n", "check", "beta", "computed", "expected", "error");
    for c in checks {
        s += &format!(
            "{:<14} {:>5} {:>22.15} {:>22.15} {:>10.2e}  {}\n",
            c.name,
            c.beta,
            c.computed,
            c.expected,
            c.error(),
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    s
}
