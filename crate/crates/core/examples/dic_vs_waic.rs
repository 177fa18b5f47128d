//! DIC against WAIC and importance-sampling LOO on a singular tanh network,
//! measured against the true generalization error on a few datasets.

use bayescv::criteria::{evaluate, EvaluateOptions};
use bayescv::models::{sample_truth, TanhNetwork, TanhTruth, Truth};
use bayescv::posterior::{build_posterior, Backend, McmcConfig, McmcInit};

fn main() -> bayescv::Result<()> {
    let model = TanhNetwork::standard(3)?;
    let truth = TanhTruth::default_for(&model, 1)?;
    let center = truth.optimal_param().expect("truth is embedded in the model");
    let n = 200;

    println!("errors relative to the empirical entropy Ln");
    println!("{:>4} {:>10} {:>10} {:>10} {:>10} {:>10}", "seed", "bg", "cv", "waic", "dic1", "dic2");
    for seed in 1..=3u64 {
        let data = sample_truth(&truth, n, seed)?;
        let cfg = McmcConfig {
            chains: 2,
            burn_in_steps: 20_000,
            thin: 20,
            draws_per_chain: 400,
            proposal_scale: 0.005,
            seed: 1000 + seed,
            init: McmcInit::Symmetric { center: center.clone(), jitter: 0.01 },
        };
        let ens = build_posterior(&model, &data, 1.0, &Backend::Mcmc(cfg))?;
        let opts = EvaluateOptions {
            truth: Some(&truth),
            test_size: 5_000,
            seed,
            ..EvaluateOptions::default()
        };
        let r = evaluate(&model, &data, &ens, &opts)?;
        println!(
            "{seed:>4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            r.bg.unwrap_or(f64::NAN),
            r.cv.unwrap_or(f64::NAN),
            r.waic - r.ln,
            r.dic1 - r.ln,
            r.dic2 - r.ln
        );
    }
    Ok(())
}
