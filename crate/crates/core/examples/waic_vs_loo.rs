//! WAIC, importance-sampling LOO and brute-force refit LOO on one dataset of
//! the Gaussian location model, with the cumulant expansion of their gap.

use bayescv::criteria::{cv_refit, evaluate, EvaluateOptions};
use bayescv::models::{sample_truth, NormalTruth, RegularNormal};
use bayescv::posterior::{build_posterior, Backend, GridSpec};

fn main() -> bayescv::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(50, |s| s.parse().expect("integer n"));
    let model = RegularNormal::with_default_prior(1)?;
    let truth = NormalTruth::new(vec![0.5]);
    let data = sample_truth(&truth, n, 11)?;
    let backend = Backend::Quadrature(GridSpec::sinh(2001, 0.05));

    println!("{:>5} {:>12} {:>12} {:>12} {:>12} {:>12}", "beta", "WAIC", "CV2", "CV1", "CV2-WAIC", "expansion");
    for beta in [0.5, 1.0, 2.0] {
        let ens = build_posterior(&model, &data, beta, &backend)?;
        let r = evaluate(&model, &data, &ens, &EvaluateOptions::default())?;
        let cv1 = cv_refit(&model, &truth, &data, beta, &backend)?;
        let y = r.cumulants;
        // CV2 - WAIC through fourth order in the cumulants
        let expansion =
            (beta - beta * beta) / 2.0 * y.y3 + (beta.powi(4) - (1.0 - beta).powi(4) + 1.0) / 24.0 * y.y4;
        println!(
            "{beta:>5} {:>12.6} {:>12.6} {:>12.6} {:>12.3e} {:>12.3e}",
            r.waic,
            r.cv2,
            cv1,
            r.cv2 - r.waic,
            expansion
        );
    }
    Ok(())
}
