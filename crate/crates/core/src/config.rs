//! Pipeline hyperparameters, ablation switches and the config fingerprint.
//!
//! The config file is a flat TOML document; every key is optional and
//! falls back to the defaults below.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::retrieval::Bm25Params;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Worldtree,
    Arc,
}

/// Feature switches used by the ablation presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablation {
    /// Abstraction step (candidate abstractive facts).
    pub abs: bool,
    /// Plausibility score in the explanatory score.
    pub ps: bool,
    /// Relevance score in the analogical score.
    pub rs: bool,
    /// Unification score, both for retrieval and in the analogical score.
    pub us: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Ablation::FULL
    }
}

impl Ablation {
    pub const FULL: Ablation = Ablation { abs: true, ps: true, rs: true, us: true };
    pub const PS: Ablation = Ablation { abs: false, ps: true, rs: false, us: false };
    pub const ABS_PS: Ablation = Ablation { abs: true, ps: true, rs: false, us: false };
    pub const ABS_PS_RS: Ablation = Ablation { abs: true, ps: true, rs: true, us: false };

    /// The four ablation presets, from the plausibility-only model to the
    /// full model.
    pub const PRESETS: [(&'static str, Ablation); 4] = [
        ("ps", Ablation::PS),
        ("abs-ps", Ablation::ABS_PS),
        ("abs-ps-rs", Ablation::ABS_PS_RS),
        ("full", Ablation::FULL),
    ];

    pub fn preset(name: &str) -> Result<Ablation> {
        Ablation::PRESETS
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, a)| *a)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown ablation preset `{name}` (expected one of ps, abs-ps, abs-ps-rs, full)"
                ))
            })
    }

    pub fn name(&self) -> Option<&'static str> {
        Ablation::PRESETS.iter().find(|(_, a)| a == self).map(|(n, _)| *n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tables: Option<PathBuf>,
    pub questions: Option<PathBuf>,
    pub wordnet: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,

    /// Neighbours retrieved from the explanations KB.
    pub k_neighbours: usize,
    /// Candidate abstractive facts kept per hypothesis.
    pub n_abs: usize,
    /// Candidate unification facts kept per hypothesis.
    pub n_unf: usize,
    /// Unifications summed into the hypothesis score.
    pub k_unifications: usize,
    /// Weight of the relevance score in the analogical score.
    pub lambda1_analogical: f64,
    /// Weight of the unification score in the analogical score.
    pub lambda2_analogical: f64,
    /// Weight of the analogical score in the explanatory score.
    pub lambda1_explanatory: f64,
    /// Weight of the plausibility score in the explanatory score.
    pub lambda2_explanatory: f64,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub mode: Mode,

    pub use_abstraction: bool,
    pub use_plausibility: bool,
    pub use_relevance: bool,
    pub use_unification: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tables: None,
            questions: None,
            wordnet: None,
            snapshot: None,
            k_neighbours: 100,
            n_abs: 200,
            n_unf: 200,
            k_unifications: 2,
            lambda1_analogical: 1.0,
            lambda2_analogical: 1.0,
            lambda1_explanatory: 1.0,
            lambda2_explanatory: 1.0,
            bm25_k1: 1.2,
            bm25_b: 0.75,
            mode: Mode::Worldtree,
            use_abstraction: true,
            use_plausibility: true,
            use_relevance: true,
            use_unification: true,
        }
    }
}

pub const ENV_PREFIX: &str = "SWCU_";

/// Every key accepted in a config file.
pub fn config_keys() -> &'static [&'static str] {
    &[
        "tables",
        "questions",
        "wordnet",
        "snapshot",
        "k_neighbours",
        "n_abs",
        "n_unf",
        "k_unifications",
        "lambda1_analogical",
        "lambda2_analogical",
        "lambda1_explanatory",
        "lambda2_explanatory",
        "bm25_k1",
        "bm25_b",
        "mode",
        "use_abstraction",
        "use_plausibility",
        "use_relevance",
        "use_unification",
    ]
}

/// Hyperparameters that determine pipeline output; paths are excluded.
#[derive(Serialize)]
struct Fingerprinted<'a> {
    k_neighbours: usize,
    n_abs: usize,
    n_unf: usize,
    k_unifications: usize,
    lambda1_analogical: f64,
    lambda2_analogical: f64,
    lambda1_explanatory: f64,
    lambda2_explanatory: f64,
    bm25_k1: f64,
    bm25_b: f64,
    mode: &'a Mode,
    ablation: Ablation,
}

impl Config {
    pub fn from_toml_str(s: &str) -> Result<Config> {
        let config: Config = toml::from_str(s)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_toml_str(&s)
    }

    /// Applies `key = value` overrides. Values are read as TOML literals
    /// (`2`, `0.5`, `true`, `"arc"`); anything that does not parse as one is
    /// taken as a bare string. Unknown keys are rejected.
    pub fn with_overrides<K, V>(&self, overrides: impl IntoIterator<Item = (K, V)>) -> Result<Config>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut table = toml::Table::try_from(self)
            .map_err(|e| Error::InvalidParameter(format!("config does not serialize: {e}")))?;
        for (key, value) in overrides {
            let key = key.as_ref().trim().to_ascii_lowercase();
            let raw = value.as_ref().trim();
            let parsed = format!("v = {raw}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.to_owned()));
            table.insert(key, parsed);
        }
        let config: Config = table.try_into()?;
        config.validate()?;
        Ok(config)
    }

    /// Overrides from `SWCU_<KEY>` environment variables, e.g.
    /// `SWCU_K_UNIFICATIONS=3`. Variables naming no config key are ignored.
    pub fn with_env(&self, vars: impl IntoIterator<Item = (String, String)>) -> Result<Config> {
        let keys = config_keys();
        let overrides: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| {
                let key = k.strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
                keys.contains(&key.as_str()).then_some((key, v))
            })
            .collect();
        self.with_overrides(overrides)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1_analogical", self.lambda1_analogical),
            ("lambda2_analogical", self.lambda2_analogical),
            ("lambda1_explanatory", self.lambda1_explanatory),
            ("lambda2_explanatory", self.lambda2_explanatory),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.k_unifications == 0 {
            return Err(Error::InvalidParameter("k_unifications must be at least 1".into()));
        }
        self.bm25().validate()
    }

    pub fn bm25(&self) -> Bm25Params {
        Bm25Params {
            k1: self.bm25_k1,
            b: self.bm25_b,
        }
    }

    pub fn ablation(&self) -> Ablation {
        Ablation {
            abs: self.use_abstraction,
            ps: self.use_plausibility,
            rs: self.use_relevance,
            us: self.use_unification,
        }
    }

    pub fn with_ablation(mut self, a: Ablation) -> Config {
        self.use_abstraction = a.abs;
        self.use_plausibility = a.ps;
        self.use_relevance = a.rs;
        self.use_unification = a.us;
        self
    }

    /// Weights of (relevance, unification) used to rank candidate facts.
    /// Retrieval always uses relevance (it is the BM25 IR step even when the
    /// relevance score is switched off in scoring); the unification score
    /// joins it only when the explanations KB is enabled.
    pub fn retrieval_lambdas(&self) -> (f64, f64) {
        let unification = if self.use_unification { self.lambda2_analogical } else { 0.0 };
        (self.lambda1_analogical, unification)
    }

    /// Weights of (relevance, unification) in the analogical score.
    pub fn analogical_lambdas(&self) -> (f64, f64) {
        (
            if self.use_relevance { self.lambda1_analogical } else { 0.0 },
            if self.use_unification { self.lambda2_analogical } else { 0.0 },
        )
    }

    /// Weights of (analogical, plausibility) in the explanatory score.
    pub fn explanatory_lambdas(&self) -> (f64, f64) {
        (
            self.lambda1_explanatory,
            if self.use_plausibility { self.lambda2_explanatory } else { 0.0 },
        )
    }

    pub fn pool_sizes(&self) -> (usize, usize) {
        (if self.use_abstraction { self.n_abs } else { 0 }, self.n_unf)
    }

    /// Short hex digest of every output-affecting hyperparameter.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(&Fingerprinted {
            k_neighbours: self.k_neighbours,
            n_abs: self.n_abs,
            n_unf: self.n_unf,
            k_unifications: self.k_unifications,
            lambda1_analogical: self.lambda1_analogical,
            lambda2_analogical: self.lambda2_analogical,
            lambda1_explanatory: self.lambda1_explanatory,
            lambda2_explanatory: self.lambda2_explanatory,
            bm25_k1: self.bm25_k1,
            bm25_b: self.bm25_b,
            mode: &self.mode,
            ablation: self.ablation(),
        })
        .expect("config serializes");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }

    /// Multiplies all four lambdas by `factor`.
    pub fn scaled_lambdas(&self, factor: f64) -> Config {
        let mut c = self.clone();
        c.lambda1_analogical *= factor;
        c.lambda2_analogical *= factor;
        c.lambda1_explanatory *= factor;
        c.lambda2_explanatory *= factor;
        c
    }
}
