use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use emotune::negotiation::{
    CreditorConfig, DebtorProfile, EpisodeConfig, NegotiationEngine, ProfileLabel, RewardForm, ScriptedAgents,
};
use emotune::optimizer::OptimizerConfig;
use emotune::scenarios::{generate_cases, load_cases, CreditCase};
use emotune::surrogate::Smoothness;
use emotune_gateway::{ChatClient, EndpointConfig, RemoteAgents};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Scripted,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RewardFormArg {
    Product,
    Quotient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Matern32,
    Matern52,
}

/// Everything an optimize or evaluate run needs. Snapshotted into every run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Case file; when absent, `scenario_count` cases are generated from the seed.
    pub scenarios: Option<PathBuf>,
    pub scenario_count: usize,
    /// Scenarios per candidate evaluation during optimization, taken from the front of the set.
    pub batch: usize,
    pub profiles: Vec<ProfileLabel>,
    pub backend: Backend,
    /// Endpoint config file for the remote backend.
    pub endpoint: Option<PathBuf>,
    /// Seeded repetitions in `evaluate`.
    pub repeats: usize,
    pub optimizer: OptimizerConfig,
    pub episode: EpisodeConfig,
    pub creditor: CreditorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            scenarios: None,
            scenario_count: 100,
            batch: 10,
            profiles: ProfileLabel::ALL.to_vec(),
            backend: Backend::Scripted,
            endpoint: None,
            repeats: 5,
            optimizer: OptimizerConfig::default(),
            episode: EpisodeConfig::default(),
            creditor: CreditorConfig::default(),
        }
    }
}

/// Flags shared by `optimize` and `evaluate`; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run config; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scenario file written by `generate-scenarios`.
    #[arg(long)]
    pub scenarios: Option<PathBuf>,
    /// Cases to generate when no scenario file is given.
    #[arg(long)]
    pub scenario_count: Option<usize>,
    /// Scenarios per candidate evaluation while optimizing.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Comma-separated debtor profiles.
    #[arg(long, value_delimiter = ',')]
    pub profiles: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// Endpoint config for `--backend remote`.
    #[arg(long)]
    pub endpoint: Option<PathBuf>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub concentration: Option<f64>,
    #[arg(long, value_enum)]
    pub reward_form: Option<RewardFormArg>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
}

impl RunArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io("read config", path, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        macro_rules! overlay {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$($field).+ = v; })*
            };
        }
        overlay!(
            scenario_count => scenario_count,
            batch => batch,
            backend => backend,
            iterations => optimizer.iterations,
            candidates => optimizer.candidates,
            patience => optimizer.patience,
            xi => optimizer.xi,
            concentration => optimizer.concentration,
        );
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if self.scenarios.is_some() {
            cfg.scenarios = self.scenarios.clone();
        }
        if self.endpoint.is_some() {
            cfg.endpoint = self.endpoint.clone();
        }
        if let Some(names) = &self.profiles {
            cfg.profiles =
                names.iter().map(|n| n.trim().parse()).collect::<Result<_, String>>().map_err(CliError::Usage)?;
        }
        if let Some(form) = self.reward_form {
            cfg.episode.reward.form = match form {
                RewardFormArg::Product => RewardForm::Product,
                RewardFormArg::Quotient => RewardForm::Quotient,
            };
        }
        if let Some(kernel) = self.kernel {
            cfg.optimizer.kernel.smoothness = match kernel {
                KernelArg::Matern32 => Smoothness::Matern32,
                KernelArg::Matern52 => Smoothness::Matern52,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.backend == Backend::Scripted && self.seed.is_none() {
            return Err(CliError::Usage("--seed is required for scripted runs".into()));
        }
        if self.backend == Backend::Remote && self.endpoint.is_none() {
            return Err(CliError::Usage("--backend remote needs --endpoint".into()));
        }
        if self.profiles.is_empty() {
            return Err(CliError::Usage("at least one debtor profile is required".into()));
        }
        if self.scenarios.is_none() && self.scenario_count == 0 {
            return Err(CliError::Usage("scenario count must be at least 1".into()));
        }
        if self.batch == 0 || self.repeats == 0 {
            return Err(CliError::Usage("batch and repeats must be at least 1".into()));
        }
        if self.episode.t_max == 0 {
            return Err(CliError::Usage("t_max must be at least 1".into()));
        }
        let mut optimizer = self.optimizer;
        optimizer.master_seed = self.master_seed();
        optimizer.validate()?;
        Ok(())
    }

    pub fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig { master_seed: self.master_seed(), ..self.optimizer }
    }

    pub fn load_scenarios(&self) -> Result<Vec<CreditCase>, CliError> {
        match &self.scenarios {
            Some(path) => {
                let cases = load_cases(path)?;
                if cases.is_empty() {
                    return Err(CliError::Usage(format!("{} contains no cases", path.display())));
                }
                Ok(cases)
            }
            None => Ok(generate_cases(self.scenario_count, self.master_seed())),
        }
    }

    pub fn debtor_profiles(&self) -> Vec<DebtorProfile> {
        let suite = DebtorProfile::standard_suite();
        self.profiles.iter().filter_map(|l| suite.iter().find(|p| p.label == *l).cloned()).collect()
    }

    pub fn engine(&self) -> Result<NegotiationEngine, CliError> {
        let tolerance = self.episode.agreement_tolerance;
        match self.backend {
            Backend::Scripted => Ok(NegotiationEngine::scripted(
                ScriptedAgents::new(self.creditor, tolerance),
                self.episode,
                self.master_seed(),
            )),
            Backend::Remote => {
                let path = self.endpoint.as_deref().unwrap_or(Path::new(""));
                let client = ChatClient::from_env(EndpointConfig::load(path)?)?;
                let agents = RemoteAgents::new(Arc::new(client), tolerance);
                Ok(NegotiationEngine::new(Arc::new(agents), self.episode, self.master_seed()))
            }
        }
    }
}
