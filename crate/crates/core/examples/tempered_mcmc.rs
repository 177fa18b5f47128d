//! Metropolis ensembles of a two-unit tanh network at several inverse
//! temperatures, saved to disk and read back.

use bayescv::criteria::{evaluate, EvaluateOptions};
use bayescv::models::{sample_truth, TanhNetwork, TanhTruth, Truth};
use bayescv::posterior::{build_posterior, read_ensemble, write_ensemble, Backend, McmcConfig, McmcInit};

fn main() -> bayescv::Result<()> {
    let model = TanhNetwork::standard(2)?;
    let truth = TanhTruth::default_for(&model, 1)?;
    let data = sample_truth(&truth, 100, 5)?;
    let center = truth.optimal_param().expect("truth is embedded in the model");
    let dir = std::env::temp_dir().join("bayescv_tempered_mcmc");
    std::fs::create_dir_all(&dir)?;

    println!("{:>5} {:>8} {:>10} {:>10} {:>10} {:>10}", "beta", "acc", "BtL", "WAIC", "CV2", "V/n");
    for (k, beta) in [0.5, 1.0, 1.5].into_iter().enumerate() {
        let cfg = McmcConfig {
            chains: 2,
            burn_in_steps: 10_000,
            thin: 20,
            draws_per_chain: 300,
            proposal_scale: 0.01,
            seed: 100 + k as u64,
            init: McmcInit::Symmetric { center: center.clone(), jitter: 0.01 },
        };
        let ens = build_posterior(&model, &data, beta, &Backend::Mcmc(cfg))?;
        let path = dir.join(format!("beta_{beta}.json"));
        write_ensemble(&path, &model, &data, &ens)?;
        let back = read_ensemble(&path, &model, &data)?;
        assert_eq!(back.log_probs(), ens.log_probs());

        let r = evaluate(&model, &data, &back, &EvaluateOptions::default())?;
        let rates = &ens.diagnostics().acceptance_rates;
        let acc = rates.iter().sum::<f64>() / rates.len() as f64;
        println!(
            "{beta:>5} {acc:>8.3} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            r.btl,
            r.waic,
            r.cv2,
            r.cumulants.v_n / r.n as f64
        );
    }
    println!("ensembles in {}", dir.display());
    Ok(())
}

