//! Estimates the learning coefficient of the singular product model `y = ab u + noise`
//! with truth `ab = 0` from replicated quadrature posteriors.
//!
//! Run with `cargo run --release --example lambda_estimation -- [n] [replicates]`.

use std::sync::Arc;
use std::time::Instant;

use bayescv::experiments::{run_experiment, ExperimentPlan};
use bayescv::models::{Model, ProductRegression, ProductTruth, Scenario};
use bayescv::posterior::{Backend, GridSpec};

fn main() -> bayescv::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(200);
    let reps = args.next().unwrap_or(50);

    let model = ProductRegression::uniform(3.0)?;
    let truth = ProductTruth::new(0.0, model.domain().clone());
    let scenario = Scenario::new(Arc::new(model), Arc::new(truth))?;
    let backend = Backend::Quadrature(GridSpec::fiber(600, 0.002));
    let mut plan = ExperimentPlan::new(n, reps, 1.0, backend, 2024);
    plan.test_size = 50_000;

    let t = Instant::now();
    let result = run_experiment(&scenario, &plan)?;
    let inv = result.summary.invariants.as_ref().expect("bg present");
    println!("n = {n}, R = {reps}, {:.1} s", t.elapsed().as_secs_f64());
    println!(
        "lambda_hat     = {:.4} +- {:.4}",
        inv.lambda_hat.value, inv.lambda_hat.stderr
    );
    println!(
        "lambda_hat_alt = {:.4} +- {:.4}",
        inv.lambda_hat_alt.value, inv.lambda_hat_alt.stderr
    );
    println!("nu_hat         = {:.4} +- {:.4}", inv.nu_hat.value, inv.nu_hat.stderr);
    for q in ["bg", "cv", "bg_plus_cv"] {
        let s = result.summary.stat(q).expect("present");
        println!("{q:>10}: AVR {:+.5}  STD {:.5}", s.avr, s.std);
    }
    Ok(())
}
