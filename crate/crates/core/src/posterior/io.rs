use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{log_likelihood_matrix, Diagnostics, PosteriorEnsemble, Provenance};
use crate::error::{Error, Result};
use crate::models::{Dataset, Model};

pub const ENSEMBLE_FORMAT_VERSION: u32 = 1;

/// On-disk ensemble. The log-likelihood matrix is not stored; it is rebuilt
/// from the model and dataset on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub format_version: u32,
    pub model: String,
    pub beta: f64,
    pub n: usize,
    pub dataset_hash: String,
    pub config_hash: String,
    pub provenance: Provenance,
    pub draws: Vec<Vec<f64>>,
    pub log_weights: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// SHA-256 of the raw sample bits, in order.
pub fn dataset_hash(dataset: &Dataset) -> String {
    let mut h = Sha256::new();
    h.update((dataset.len() as u64).to_le_bytes());
    for x in dataset.samples() {
        for v in x {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex(&h.finalize())
}

fn config_hash(model: &str, beta: f64, provenance: &Provenance) -> Result<String> {
    let mut h = Sha256::new();
    h.update(model.as_bytes());
    h.update(beta.to_bits().to_le_bytes());
    h.update(serde_json::to_vec(provenance)?);
    Ok(hex(&h.finalize()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_ensemble(path: &Path, model: &dyn Model, dataset: &Dataset, ens: &PosteriorEnsemble) -> Result<()> {
    if dataset.len() != ens.n() {
        return Err(Error::DimensionMismatch {
            what: "dataset size",
            expected: ens.n(),
            actual: dataset.len(),
        });
    }
    let name = model.name();
    let file = EnsembleFile {
        format_version: ENSEMBLE_FORMAT_VERSION,
        config_hash: config_hash(&name, ens.beta(), ens.provenance())?,
        model: name,
        beta: ens.beta(),
        n: ens.n(),
        dataset_hash: dataset_hash(dataset),
        provenance: ens.provenance().clone(),
        draws: ens.draws().map(<[f64]>::to_vec).collect(),
        log_weights: ens.log_weights().to_vec(),
        diagnostics: ens.diagnostics().clone(),
    };
    fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

/// Loads an ensemble written by [`write_ensemble`], checking that `model` and
/// `dataset` are the ones it was built from.
pub fn read_ensemble(path: &Path, model: &dyn Model, dataset: &Dataset) -> Result<PosteriorEnsemble> {
    let file: EnsembleFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.format_version != ENSEMBLE_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported ensemble format version {} (expected {ENSEMBLE_FORMAT_VERSION})",
            file.format_version
        )));
    }
    if file.model != model.name() {
        return Err(Error::Format(format!(
            "ensemble was built for model {} but {} was supplied",
            file.model,
            model.name()
        )));
    }
    if file.config_hash != config_hash(&file.model, file.beta, &file.provenance)? {
        return Err(Error::Format("ensemble config hash does not match its contents".into()));
    }
    if file.n != dataset.len() || file.dataset_hash != dataset_hash(dataset) {
        return Err(Error::Format("ensemble was built from a different dataset".into()));
    }
    let d = model.dim();
    if let Some(w) = file.draws.iter().find(|w| w.len() != d) {
        return Err(Error::DimensionMismatch {
            what: "stored draw",
            expected: d,
            actual: w.len(),
        });
    }
    let loglik = log_likelihood_matrix(model, dataset, &file.draws);
    PosteriorEnsemble::assemble(
        d,
        file.draws.into_iter().flatten().collect(),
        file.log_weights,
        file.beta,
        file.provenance,
        file.n,
        loglik,
        file.diagnostics,
    )
}
