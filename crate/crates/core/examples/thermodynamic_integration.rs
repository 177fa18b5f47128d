//! Free energy by thermodynamic integration over the default beta grid,
//! checked against exact values: the conjugate closed form for the Gaussian
//! model and the quadrature evidence for the singular product model.

use bayescv::conjugate::ConjugateNormal;
use bayescv::criteria::{default_beta_grid, free_energy};
use bayescv::models::{sample_truth, Model, NormalTruth, ProductRegression, ProductTruth, RegularNormal};
use bayescv::posterior::{build_posterior, Backend, GridSpec};

fn main() -> bayescv::Result<()> {
    let grid = default_beta_grid();

    let model = RegularNormal::with_default_prior(1)?;
    let data = sample_truth(&NormalTruth::new(vec![0.2]), 100, 5)?;
    let xs: Vec<f64> = data.samples().iter().map(|x| x[0]).collect();
    let fe = free_energy(&model, &data, &grid, &Backend::Quadrature(GridSpec::sinh(4001, 0.05)))?;
    let exact = ConjugateNormal::from_prior(model.prior(), 1.0)?.free_energy(&xs);
    println!("gaussian  n=100: TI {:.5}  exact {:.5}  diff {:+.2e}", fe.value, exact, fe.value - exact);

    let model = ProductRegression::uniform(3.0)?;
    let truth = ProductTruth::new(0.0, model.domain().clone());
    let data = sample_truth(&truth, 100, 6)?;
    let backend = Backend::Quadrature(GridSpec::fiber(600, 0.002));
    let fe = free_energy(&model, &data, &grid, &backend)?;
    let exact = -build_posterior(&model, &data, 1.0, &backend)?
        .log_evidence()
        .expect("quadrature evidence");
    println!("product   n=100: TI {:.5}  exact {:.5}  diff {:+.2e}", fe.value, exact, fe.value - exact);
    for w in &fe.warnings {
        println!("warning: {w}");
    }

    println!("\n{:>10} {:>14}", "beta", "n GtL(beta)");
    for (b, g) in fe.curve.iter().step_by(2) {
        println!("{b:>10.3e} {g:>14.5}");
    }
    Ok(())
}
