//! Run configuration: a versioned TOML schema.
//!
//! ```toml
//! schema_version = 1
//! mode = "experiment"            # evaluate | experiment | sweep | oracle-check
//! master_seed = 2024
//! output_dir = "runs/product"
//!
//! [model]
//! name = "product_regression"    # regular_normal | product_regression | "tanh_network(3, 1)"
//! prior = "uniform"              # uniform | normal
//! box = [-3.0, 3.0]
//!
//! [truth]
//! product = 0.0
//!
//! [posterior]
//! backend = "quadrature"         # quadrature | mcmc
//! spacing = "fiber"              # uniform | sinh | fiber
//! grid_points = 600
//! grid_scale = 0.002
//!
//! [plan]
//! n = 200
//! replicates = 50
//! ```
//!
//! Every section and key is optional; [`RunConfig::default`] documents the
//! defaults. Unknown keys are rejected with the nearest valid key suggested.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::ExperimentPlan;
use crate::models::{
    BoxPrior, Model, NormalTruth, ParamBox, PriorShape, ProductRegression, ProductTruth, RegularNormal, Scenario,
    TanhNetwork, TanhTruth,
};
use crate::posterior::{Backend, GridSpacing, GridSpec, McmcConfig, McmcInit};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Evaluate,
    Experiment,
    Sweep,
    OracleCheck,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "evaluate" => Ok(Mode::Evaluate),
            "experiment" => Ok(Mode::Experiment),
            "sweep" => Ok(Mode::Sweep),
            "oracle-check" => Ok(Mode::OracleCheck),
            other => Err(format!(
                "unknown mode `{other}` (expected evaluate, experiment, sweep or oracle-check)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub name: String,
    /// Parameter dimension of `regular_normal`.
    pub dim: usize,
    /// `uniform` or `normal`.
    pub prior: String,
    pub prior_mean: f64,
    pub prior_scale: f64,
    #[serde(rename = "box")]
    pub bounds: [f64; 2],
    /// Output noise of `tanh_network`.
    pub sigma: f64,
    /// Input scale of `tanh_network`.
    pub input_sd: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            name: "regular_normal".into(),
            dim: 1,
            prior: "normal".into(),
            prior_mean: 0.0,
            prior_scale: 10.0,
            bounds: [-40.0, 40.0],
            sigma: 0.1,
            input_sd: 2.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruthSection {
    /// Mean of the `regular_normal` truth; zeros when empty.
    pub mean: Vec<f64>,
    /// True `ab` of the `product_regression` truth.
    pub product: f64,
    /// Units of the `tanh_network` truth; the bundled default when empty.
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PosteriorSection {
    pub backend: String,
    pub beta: f64,
    pub spacing: String,
    pub grid_points: usize,
    pub grid_scale: f64,
    pub chains: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub draws_per_chain: usize,
    pub proposal_scale: f64,
    /// `prior`, or `truth` for symmetric images of the truth's optimal parameter.
    pub init: String,
    pub init_jitter: f64,
}

impl Default for PosteriorSection {
    fn default() -> Self {
        Self {
            backend: "quadrature".into(),
            beta: 1.0,
            spacing: "uniform".into(),
            grid_points: 2001,
            grid_scale: 0.002,
            chains: 4,
            burn_in: 20_000,
            thin: 20,
            draws_per_chain: 500,
            proposal_scale: 0.005,
            init: "prior".into(),
            init_jitter: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanSection {
    pub n: usize,
    pub replicates: usize,
    pub test_size: usize,
    pub n_sweep: Vec<usize>,
    pub cv1: bool,
    pub square_error: bool,
    pub bg_at_n_minus_one: bool,
    pub neff_floor: f64,
    /// Step for the `nu'(beta)` central difference; 0 disables it.
    pub nu_prime_step: f64,
}

impl Default for PlanSection {
    fn default() -> Self {
        Self {
            n: 200,
            replicates: 20,
            test_size: 10_000,
            n_sweep: vec![25, 50, 100, 200, 400],
            cv1: false,
            square_error: false,
            bg_at_n_minus_one: false,
            neff_floor: 0.1,
            nu_prime_step: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub mode: Mode,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub model: ModelSection,
    pub truth: TruthSection,
    pub posterior: PosteriorSection,
    pub plan: PlanSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            mode: Mode::Evaluate,
            master_seed: 0,
            output_dir: PathBuf::from("bayescv-out"),
            model: ModelSection::default(),
            truth: TruthSection::default(),
            posterior: PosteriorSection::default(),
            plan: PlanSection::default(),
        }
    }
}

const TOP_KEYS: &[&str] = &["schema_version", "mode", "master_seed", "output_dir", "model", "truth", "posterior", "plan"];
const MODEL_KEYS: &[&str] = &["name", "dim", "prior", "prior_mean", "prior_scale", "box", "sigma", "input_sd"];
const TRUTH_KEYS: &[&str] = &["mean", "product", "params"];
const POSTERIOR_KEYS: &[&str] = &[
    "backend",
    "beta",
    "spacing",
    "grid_points",
    "grid_scale",
    "chains",
    "burn_in",
    "thin",
    "draws_per_chain",
    "proposal_scale",
    "init",
    "init_jitter",
];
const PLAN_KEYS: &[&str] = &[
    "n",
    "replicates",
    "test_size",
    "n_sweep",
    "cv1",
    "square_error",
    "bg_at_n_minus_one",
    "neff_floor",
    "nu_prime_step",
];

fn nearest<'a>(key: &str, valid: &[&'a str]) -> Option<&'a str> {
    valid
        .iter()
        .map(|v| (strsim::damerau_levenshtein(key, v), v.len().abs_diff(key.len()), *v))
        .filter(|(d, _, v)| *d <= (v.len().max(key.len()) / 2).max(2))
        .min()
        .map(|(_, _, v)| v)
}

fn unknown_key(path: &str, key: &str, valid: &[&str]) -> String {
    match nearest(key, valid) {
        Some(s) => format!("unknown key `{path}{key}`; did you mean `{s}`?"),
        None => format!("unknown key `{path}{key}` (valid keys: {})", valid.join(", ")),
    }
}

/// Parsed `tanh_network(H, H0)` or a plain model name.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelName {
    RegularNormal,
    ProductRegression,
    TanhNetwork { hidden: usize, truth_hidden: usize },
}

pub fn parse_model_name(name: &str) -> std::result::Result<ModelName, String> {
    let s = name.trim();
    match s {
        "regular_normal" => return Ok(ModelName::RegularNormal),
        "product_regression" => return Ok(ModelName::ProductRegression),
        _ => {}
    }
    if let Some(args) = s.strip_prefix("tanh_network(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if let [h, h0] = parts.as_slice() {
            if let (Ok(hidden), Ok(truth_hidden)) = (h.parse::<usize>(), h0.parse::<usize>()) {
                if hidden >= 1 && truth_hidden >= 1 {
                    return Ok(ModelName::TanhNetwork { hidden, truth_hidden });
                }
            }
        }
        return Err(format!("`{name}`: expected tanh_network(H, H0) with H, H0 >= 1"));
    }
    let known = ["regular_normal", "product_regression", "tanh_network"];
    let base = s.split('(').next().unwrap_or(s);
    Err(match nearest(base, &known) {
        Some(k) => format!("unknown model `{name}`; did you mean `{k}`?"),
        None => format!("unknown model `{name}` (expected regular_normal, product_regression or tanh_network(H, H0))"),
    })
}

fn check_keys(table: &toml::Table, errors: &mut Vec<String>) {
    for (k, v) in table {
        let section = match k.as_str() {
            "model" => Some(MODEL_KEYS),
            "truth" => Some(TRUTH_KEYS),
            "posterior" => Some(POSTERIOR_KEYS),
            "plan" => Some(PLAN_KEYS),
            _ => None,
        };
        if !TOP_KEYS.contains(&k.as_str()) {
            errors.push(unknown_key("", k, TOP_KEYS));
            continue;
        }
        if let Some(valid) = section {
            match v.as_table() {
                Some(t) => {
                    for sub in t.keys() {
                        if !valid.contains(&sub.as_str()) {
                            errors.push(unknown_key(&format!("{k}."), sub, valid));
                        }
                    }
                }
                None => errors.push(format!("`{k}` must be a table")),
            }
        }
    }
}

fn section<T: for<'de> Deserialize<'de> + Default>(
    table: &toml::Table,
    key: &str,
    valid: &[&str],
    errors: &mut Vec<String>,
) -> T {
    let Some(toml::Value::Table(t)) = table.get(key) else {
        return T::default();
    };
    let known: toml::Table = t
        .iter()
        .filter(|(k, _)| valid.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    match T::deserialize(toml::Value::Table(known)) {
        Ok(v) => v,
        Err(e) => {
            errors.push(format!("[{key}]: {}", e.message()));
            T::default()
        }
    }
}

impl RunConfig {
    /// Parses and validates TOML text, reporting every problem found.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
        let mut errors = Vec::new();
        check_keys(&table, &mut errors);
        let mut top = toml::Table::new();
        for k in ["schema_version", "mode", "master_seed", "output_dir"] {
            if let Some(v) = table.get(k) {
                top.insert(k.to_string(), v.clone());
            }
        }
        #[derive(Deserialize, Default)]
        #[serde(default)]
        struct Top {
            schema_version: Option<u32>,
            mode: Option<String>,
            master_seed: Option<u64>,
            output_dir: Option<PathBuf>,
        }
        let t: Top = Top::deserialize(toml::Value::Table(top)).unwrap_or_else(|e| {
            errors.push(e.message().to_string());
            Top::default()
        });
        let defaults = RunConfig::default();
        let mut cfg = RunConfig {
            schema_version: t.schema_version.unwrap_or(SCHEMA_VERSION),
            mode: defaults.mode,
            master_seed: t.master_seed.unwrap_or(defaults.master_seed),
            output_dir: t.output_dir.unwrap_or(defaults.output_dir),
            model: section(&table, "model", MODEL_KEYS, &mut errors),
            truth: section(&table, "truth", TRUTH_KEYS, &mut errors),
            posterior: section(&table, "posterior", POSTERIOR_KEYS, &mut errors),
            plan: section(&table, "plan", PLAN_KEYS, &mut errors),
        };
        if let Some(m) = t.mode {
            match m.parse() {
                Ok(mode) => cfg.mode = mode,
                Err(e) => errors.push(e),
            }
        }
        errors.extend(cfg.validation_errors());
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errors))
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml_str(&text)
    }

    /// Normalized TOML with every default filled in.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }

    /// Every semantic problem with the configuration.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut e = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            e.push(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let m = &self.model;
        let name = parse_model_name(&m.name);
        if let Err(msg) = &name {
            e.push(format!("model.name: {msg}"));
        }
        if !matches!(m.prior.as_str(), "uniform" | "normal") {
            e.push(format!("model.prior: `{}` is not one of uniform, normal", m.prior));
        }
        if !(m.bounds[0] < m.bounds[1]) {
            e.push(format!("model.box: lower bound {} must be below upper bound {}", m.bounds[0], m.bounds[1]));
        }
        if m.prior == "normal" && !(m.prior_scale > 0.0) {
            e.push("model.prior_scale must be positive".into());
        }
        if m.dim == 0 {
            e.push("model.dim must be >= 1".into());
        }
        if !(m.sigma > 0.0) || !(m.input_sd > 0.0) {
            e.push("model.sigma and model.input_sd must be positive".into());
        }
        if let Ok(ModelName::RegularNormal) = name {
            if !self.truth.mean.is_empty() && self.truth.mean.len() != m.dim {
                e.push(format!(
                    "truth.mean has {} entries but model.dim is {}",
                    self.truth.mean.len(),
                    m.dim
                ));
            }
        }
        let p = &self.posterior;
        if !(p.beta > 0.0) || !p.beta.is_finite() {
            e.push(format!("posterior.beta must be positive, got {}", p.beta));
        }
        match p.backend.as_str() {
            "quadrature" => {
                if p.grid_points < 1 {
                    e.push("posterior.grid_points must be >= 1".into());
                }
                match p.spacing.as_str() {
                    "uniform" => {}
                    "sinh" | "fiber" => {
                        if !(p.grid_scale > 0.0) {
                            e.push("posterior.grid_scale must be positive".into());
                        }
                    }
                    other => e.push(format!("posterior.spacing: `{other}` is not one of uniform, sinh, fiber")),
                }
            }
            "mcmc" => {
                if p.chains == 0 || p.thin == 0 || p.draws_per_chain == 0 {
                    e.push("posterior.chains, thin and draws_per_chain must be >= 1".into());
                }
                if !(p.proposal_scale > 0.0) {
                    e.push("posterior.proposal_scale must be positive".into());
                }
                if !matches!(p.init.as_str(), "prior" | "truth") {
                    e.push(format!("posterior.init: `{}` is not one of prior, truth", p.init));
                }
                if !(p.init_jitter >= 0.0) {
                    e.push("posterior.init_jitter must be >= 0".into());
                }
            }
            other => e.push(format!("posterior.backend: `{other}` is not one of quadrature, mcmc")),
        }
        let pl = &self.plan;
        if pl.n == 0 {
            e.push("plan.n must be >= 1".into());
        }
        if pl.replicates == 0 {
            e.push("plan.replicates must be >= 1".into());
        }
        if pl.n_sweep.is_empty() || pl.n_sweep[0] == 0 || pl.n_sweep.windows(2).any(|w| w[1] <= w[0]) {
            e.push("plan.n_sweep must be nonempty, positive and strictly increasing".into());
        }
        if !(pl.neff_floor >= 0.0) {
            e.push("plan.neff_floor must be >= 0".into());
        }
        if pl.nu_prime_step < 0.0 || pl.nu_prime_step > p.beta / 2.0 {
            e.push(format!("plan.nu_prime_step must lie in [0, beta/2], got {}", pl.nu_prime_step));
        }
        e
    }

    fn prior(&self, dim: usize) -> Result<BoxPrior> {
        let m = &self.model;
        let bounds = ParamBox::cube(dim, m.bounds[0], m.bounds[1])?;
        let shape = match m.prior.as_str() {
            "uniform" => PriorShape::Uniform,
            _ => PriorShape::Normal {
                mean: m.prior_mean,
                sd: m.prior_scale,
            },
        };
        BoxPrior::new(bounds, shape)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let name = parse_model_name(&self.model.name).map_err(|m| Error::Config(vec![m]))?;
        match name {
            ModelName::RegularNormal => {
                let k = self.model.dim;
                let model = RegularNormal::new(self.prior(k)?);
                let mean = if self.truth.mean.is_empty() {
                    vec![0.0; k]
                } else {
                    self.truth.mean.clone()
                };
                Scenario::new(Arc::new(model), Arc::new(NormalTruth::new(mean)))
            }
            ModelName::ProductRegression => {
                let model = ProductRegression::new(self.prior(2)?);
                let truth = ProductTruth::new(self.truth.product, model.domain().clone());
                Scenario::new(Arc::new(model), Arc::new(truth))
            }
            ModelName::TanhNetwork { hidden, truth_hidden } => {
                let (din, dout) = (3, 3);
                let model = TanhNetwork::new(
                    hidden,
                    din,
                    dout,
                    self.model.sigma,
                    self.model.input_sd,
                    self.prior(hidden * (din + dout))?,
                )?;
                let truth = if self.truth.params.is_empty() {
                    TanhTruth::default_for(&model, truth_hidden)?
                } else {
                    TanhTruth::new(&model, truth_hidden, self.truth.params.clone())?
                };
                Scenario::new(Arc::new(model), Arc::new(truth))
            }
        }
    }

    /// Posterior backend; MCMC seeds are re-derived per replicate downstream.
    pub fn backend(&self, scenario: &Scenario) -> Result<Backend> {
        let p = &self.posterior;
        Ok(match p.backend.as_str() {
            "mcmc" => {
                let init = match p.init.as_str() {
                    "truth" => McmcInit::Symmetric {
                        center: scenario
                            .truth
                            .optimal_param()
                            .ok_or(Error::Unsupported("truth initialization needs an explicit optimal parameter"))?,
                        jitter: p.init_jitter,
                    },
                    _ => McmcInit::Prior,
                };
                Backend::Mcmc(McmcConfig {
                    chains: p.chains,
                    burn_in_steps: p.burn_in,
                    thin: p.thin,
                    draws_per_chain: p.draws_per_chain,
                    proposal_scale: p.proposal_scale,
                    seed: self.master_seed,
                    init,
                })
            }
            _ => Backend::Quadrature(GridSpec {
                points_per_dim: p.grid_points,
                spacing: match p.spacing.as_str() {
                    "sinh" => GridSpacing::Sinh { scale: p.grid_scale },
                    "fiber" => GridSpacing::Fiber { scale: p.grid_scale },
                    _ => GridSpacing::Uniform,
                },
            }),
        })
    }

    pub fn plan(&self, scenario: &Scenario) -> Result<ExperimentPlan> {
        let pl = &self.plan;
        let mut plan = ExperimentPlan::new(
            pl.n,
            pl.replicates,
            self.posterior.beta,
            self.backend(scenario)?,
            self.master_seed,
        );
        plan.test_size = pl.test_size;
        plan.n_sweep = Some(pl.n_sweep.clone());
        plan.cv1 = pl.cv1;
        plan.square_error = pl.square_error;
        plan.bg_at_n_minus_one = pl.bg_at_n_minus_one;
        plan.neff_floor_fraction = pl.neff_floor;
        Ok(plan)
    }
}
