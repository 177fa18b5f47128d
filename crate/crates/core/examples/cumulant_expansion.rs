//! Rate of CV2 - WAIC on the singular product model: median absolute gap, the
//! residual after subtracting its cumulant expansion, and fitted log-log slopes.
//!
//! `cargo run --release --example cumulant_expansion -- [beta] [replicates]`

use std::sync::Arc;

use bayescv::experiments::{run_sweep, ExperimentPlan};
use bayescv::models::{Model, ProductRegression, ProductTruth, Scenario};
use bayescv::posterior::{Backend, GridSpec};

fn main() -> bayescv::Result<()> {
    let mut args = std::env::args().skip(1);
    let beta: f64 = args.next().map_or(1.0, |s| s.parse().expect("beta"));
    let reps: usize = args.next().map_or(20, |s| s.parse().expect("replicates"));

    let model = ProductRegression::uniform(3.0)?;
    let truth = ProductTruth::new(0.0, model.domain().clone());
    let scenario = Scenario::new(Arc::new(model), Arc::new(truth))?;
    let mut plan = ExperimentPlan::new(25, reps, beta, Backend::Quadrature(GridSpec::fiber(600, 0.002)), 31);
    plan.test_size = 0;
    plan.n_sweep = Some(vec![25, 50, 100, 200, 400]);
    let (_, fit) = run_sweep(&scenario, &plan)?;

    println!("beta = {beta}, R = {reps}");
    println!("{:>5} {:>14} {:>14} {:>14}", "n", "|CV2-WAIC|", "|leading res|", "|cv expansion|");
    for (k, n) in fit.ns.iter().enumerate() {
        println!(
            "{n:>5} {:>14.4e} {:>14.4e} {:>14.4e}",
            fit.median_abs_cv_minus_waic[k], fit.median_abs_cv_minus_waic_leading[k], fit.median_abs_cv_expansion[k]
        );
    }
    println!(
        "slopes: {:.3} {:.3} {:.3}",
        fit.slope_cv_minus_waic, fit.slope_cv_minus_waic_leading, fit.slope_cv_expansion
    );
    Ok(())
}
