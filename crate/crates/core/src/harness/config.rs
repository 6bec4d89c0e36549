use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bnn::BnnConfig;
use crate::error::{Error, Result};
use crate::game::GameKind;
use crate::solver::{CfrParams, DcfrParams, UpdateScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "vcfr")]
    Vcfr,
    #[serde(rename = "naive")]
    Naive,
    #[serde(rename = "vdcfr")]
    Vdcfr,
    #[serde(rename = "naive-dcfr")]
    NaiveDcfr,
    #[serde(rename = "mccfr-os")]
    MccfrOs,
    #[serde(rename = "random")]
    Random,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Vcfr,
        Variant::Naive,
        Variant::Vdcfr,
        Variant::NaiveDcfr,
        Variant::MccfrOs,
        Variant::Random,
    ];

    /// Variants that train the reward model and add information gain.
    pub fn uses_info_gain(self) -> bool {
        matches!(self, Variant::Vcfr | Variant::Vdcfr)
    }

    pub fn discounted(self) -> bool {
        matches!(self, Variant::Vdcfr | Variant::NaiveDcfr)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Vcfr => "vcfr",
            Variant::Naive => "naive",
            Variant::Vdcfr => "vdcfr",
            Variant::NaiveDcfr => "naive-dcfr",
            Variant::MccfrOs => "mccfr-os",
            Variant::Random => "random",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant '{s}'")))
    }
}

/// Flat experiment configuration. Every field has a default, so a config
/// file only lists what it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameKind,
    pub variant: Variant,
    pub outer_rounds: u64,
    pub inner_rounds: u32,
    pub episodes_per_round: usize,
    pub eta: f64,
    pub lambda: f64,
    pub stale_period: u32,
    pub prune_eps: f64,
    pub update_scheme: UpdateScheme,
    pub dcfr_alpha: f64,
    pub dcfr_beta: f64,
    pub dcfr_gamma: f64,
    pub epsilon: f64,
    /// Hidden width; 32 for Kuhn and Leduc(4), 64 for Leduc(5) when unset.
    pub bnn_hidden: Option<usize>,
    /// Batch size; 500 for Kuhn and Leduc(4), 1000 for Leduc(5) when unset.
    pub bnn_batch: Option<usize>,
    pub bnn_learning_rate: f64,
    pub bnn_kl_weight: f64,
    pub bnn_sigma_obs: f64,
    pub bnn_init_sigma: f64,
    pub bnn_steps_per_round: u32,
    pub seed: u64,
    pub eval_every: u64,
    /// Fill the `ms` metrics column with wall-clock time. Off by default so
    /// that metrics files are reproducible byte for byte.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let bnn = BnnConfig::small();
        ExperimentConfig {
            game: GameKind::Leduc4,
            variant: Variant::Vcfr,
            outer_rounds: 20_000,
            inner_rounds: 1,
            episodes_per_round: 10,
            eta: 0.01,
            lambda: 1.0,
            stale_period: 10,
            prune_eps: 1e-5,
            update_scheme: UpdateScheme::Alternating,
            dcfr_alpha: 1.5,
            dcfr_beta: 0.0,
            dcfr_gamma: 2.0,
            epsilon: 0.1,
            bnn_hidden: None,
            bnn_batch: None,
            bnn_learning_rate: bnn.learning_rate,
            bnn_kl_weight: bnn.kl_weight,
            bnn_sigma_obs: bnn.sigma_obs,
            bnn_init_sigma: bnn.init_sigma,
            bnn_steps_per_round: 50,
            seed: 0,
            eval_every: 100,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.outer_rounds == 0 || self.inner_rounds == 0 || self.episodes_per_round == 0 {
            return bad("outer_rounds, inner_rounds and episodes_per_round must be at least 1");
        }
        if self.eval_every == 0 || self.stale_period == 0 {
            return bad("eval_every and stale_period must be at least 1");
        }
        for (name, v) in [
            ("eta", self.eta),
            ("lambda", self.lambda),
            ("prune_eps", self.prune_eps),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be >= 0")));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if ![self.dcfr_alpha, self.dcfr_beta, self.dcfr_gamma]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("discount exponents must be finite");
        }
        self.bnn_config().validate()
    }

    pub fn bnn_config(&self) -> BnnConfig {
        let base = match self.game {
            GameKind::Leduc5 => BnnConfig::large(),
            GameKind::Kuhn | GameKind::Leduc4 => BnnConfig::small(),
        };
        BnnConfig {
            hidden_dim: self.bnn_hidden.unwrap_or(base.hidden_dim),
            batch_size: self.bnn_batch.unwrap_or(base.batch_size),
            learning_rate: self.bnn_learning_rate,
            kl_weight: self.bnn_kl_weight,
            sigma_obs: self.bnn_sigma_obs,
            init_sigma: self.bnn_init_sigma,
            ..base
        }
    }

    pub fn cfr_params(&self) -> CfrParams {
        CfrParams {
            prune_eps: self.prune_eps,
            scheme: self.update_scheme,
        }
    }

    pub fn dcfr_params(&self) -> DcfrParams {
        DcfrParams {
            alpha: self.dcfr_alpha,
            beta: self.dcfr_beta,
            gamma: self.dcfr_gamma,
        }
    }
}
