use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gsm::LabelMode;
use crate::model::ModelConfig;

/// Every training hyperparameter plus the ablation switches.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub d: usize,
    pub beta: f64,
    pub sigma: f64,
    pub gamma_rank: f64,
    pub gamma_c: f64,
    pub theta: f64,
    pub t: usize,
    pub layers: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub negatives_per_positive: usize,
    pub contrastive_samples: usize,
    pub node_cap: usize,
    /// Validation MRR patience in epochs; 0 disables early stopping.
    pub patience: usize,
    pub seed: u64,
    /// Ablation -R: topological score only.
    pub disable_clrm_score: bool,
    /// Ablation -C: no contrastive term.
    pub disable_contrastive: bool,
    /// Ablation -N: prune nodes beyond the hop budget instead of labeling
    /// them `-1`.
    pub disable_improved_labeling: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.01,
            d: 32,
            beta: 0.5,
            sigma: 0.1,
            gamma_rank: 10.0,
            gamma_c: 1.0,
            theta: 2.0,
            t: 2,
            layers: 3,
            epochs: 100,
            batch_size: 32,
            negatives_per_positive: 1,
            contrastive_samples: 10,
            node_cap: 500,
            patience: 0,
            seed: 0,
            disable_clrm_score: false,
            disable_contrastive: false,
            disable_improved_labeling: false,
        }
    }
}

/// Named ablation variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ablation {
    Full,
    NoSemanticScore,
    NoContrastive,
    NoImprovedLabeling,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::Full,
        Ablation::NoSemanticScore,
        Ablation::NoContrastive,
        Ablation::NoImprovedLabeling,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::NoSemanticScore => "-R",
            Ablation::NoContrastive => "-C",
            Ablation::NoImprovedLabeling => "-N",
        }
    }

    /// `base` with this variant's switch turned on.
    pub fn apply(self, base: &TrainConfig) -> TrainConfig {
        let mut c = base.clone();
        match self {
            Ablation::Full => {}
            Ablation::NoSemanticScore => c.disable_clrm_score = true,
            Ablation::NoContrastive => c.disable_contrastive = true,
            Ablation::NoImprovedLabeling => c.disable_improved_labeling = true,
        }
        c
    }
}

const KEYS: [&str; 19] = [
    "lr",
    "d",
    "beta",
    "sigma",
    "gamma_rank",
    "gamma_c",
    "theta",
    "t",
    "layers",
    "epochs",
    "batch_size",
    "negatives_per_positive",
    "contrastive_samples",
    "node_cap",
    "patience",
    "seed",
    "disable_clrm_score",
    "disable_contrastive",
    "disable_improved_labeling",
];

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("cannot parse `{v}` for `{key}`")))
}

impl TrainConfig {
    pub fn keys() -> &'static [&'static str] {
        &KEYS
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "lr" => self.lr = parse(key, v)?,
            "d" => self.d = parse(key, v)?,
            "beta" => self.beta = parse(key, v)?,
            "sigma" => self.sigma = parse(key, v)?,
            "gamma_rank" => self.gamma_rank = parse(key, v)?,
            "gamma_c" => self.gamma_c = parse(key, v)?,
            "theta" => self.theta = parse(key, v)?,
            "t" => self.t = parse(key, v)?,
            "layers" => self.layers = parse(key, v)?,
            "epochs" => self.epochs = parse(key, v)?,
            "batch_size" => self.batch_size = parse(key, v)?,
            "negatives_per_positive" => self.negatives_per_positive = parse(key, v)?,
            "contrastive_samples" => self.contrastive_samples = parse(key, v)?,
            "node_cap" => self.node_cap = parse(key, v)?,
            "patience" => self.patience = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "disable_clrm_score" => self.disable_clrm_score = parse(key, v)?,
            "disable_contrastive" => self.disable_contrastive = parse(key, v)?,
            "disable_improved_labeling" => self.disable_improved_labeling = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "lr" => self.lr.to_string(),
            "d" => self.d.to_string(),
            "beta" => self.beta.to_string(),
            "sigma" => self.sigma.to_string(),
            "gamma_rank" => self.gamma_rank.to_string(),
            "gamma_c" => self.gamma_c.to_string(),
            "theta" => self.theta.to_string(),
            "t" => self.t.to_string(),
            "layers" => self.layers.to_string(),
            "epochs" => self.epochs.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "negatives_per_positive" => self.negatives_per_positive.to_string(),
            "contrastive_samples" => self.contrastive_samples.to_string(),
            "node_cap" => self.node_cap.to_string(),
            "patience" => self.patience.to_string(),
            "seed" => self.seed.to_string(),
            "disable_clrm_score" => self.disable_clrm_score.to_string(),
            "disable_contrastive" => self.disable_contrastive.to_string(),
            "disable_improved_labeling" => self.disable_improved_labeling.to_string(),
            _ => return None,
        })
    }

    /// `(key, value)` for every field, in declaration order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        KEYS.iter()
            .map(|k| (k.to_string(), self.get(k).expect("known key")))
            .collect()
    }

    /// Applies `pairs` on top of the defaults, then validates.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut c = TrainConfig::default();
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut c = TrainConfig::default();
        c.apply_kv(text)?;
        c.validate()?;
        Ok(c)
    }

    fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_kv(&text)
    }

    /// Overrides fields from `DEKG_<FIELD>` variables found by `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        for k in KEYS {
            if let Some(v) = lookup(&format!("DEKG_{}", k.to_uppercase())) {
                self.set(k, &v)?;
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad("lr must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad("beta must lie in [0, 1)");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be finite and non-negative");
        }
        for (name, v) in [
            ("gamma_rank", self.gamma_rank),
            ("gamma_c", self.gamma_c),
            ("theta", self.theta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and positive")));
            }
        }
        for (name, v) in [
            ("d", self.d),
            ("t", self.t),
            ("layers", self.layers),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("negatives_per_positive", self.negatives_per_positive),
            ("contrastive_samples", self.contrastive_samples),
            ("node_cap", self.node_cap),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Weight of the contrastive term after ablations.
    pub fn contrastive_weight(&self) -> f64 {
        if self.disable_contrastive {
            0.0
        } else {
            self.sigma
        }
    }

    pub fn model_config(&self, n_relations: usize) -> ModelConfig {
        ModelConfig {
            n_relations,
            dim: self.d,
            hops: self.t,
            layers: self.layers,
            node_cap: self.node_cap,
            labeling: if self.disable_improved_labeling {
                LabelMode::Pruned
            } else {
                LabelMode::Improved
            },
            semantic: !self.disable_clrm_score,
        }
    }
}

impl fmt::Display for TrainConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.pairs() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
