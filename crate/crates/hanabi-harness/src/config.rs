//! Suite configuration, read from TOML.

use std::path::Path;

use hanabi_core::agents::AgentSpec;
use hanabi_core::orchestrator::{seed_preset, GameOptions};
use hanabi_core::scaffold::{RenderOptions, ScaffoldKind};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::transport::HttpSettings;

/// A named preset (`standard`, `heldout`) or an explicit list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Preset(String),
    List(Vec<u64>),
}

impl Seeds {
    pub fn resolve(&self) -> Result<Vec<u64>, HarnessError> {
        match self {
            Seeds::Preset(name) => seed_preset(name)
                .map(<[u64]>::to_vec)
                .ok_or_else(|| HarnessError::Config(format!("unknown seed preset {name:?}"))),
            Seeds::List(v) => Ok(v.clone()),
        }
    }

    /// `standard`, `heldout`, or a comma-separated list.
    pub fn parse(s: &str) -> Result<Seeds, HarnessError> {
        if seed_preset(s).is_some() {
            return Ok(Seeds::Preset(s.into()));
        }
        s.split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map(Seeds::List)
            .map_err(|_| HarnessError::Config(format!("bad seed list {s:?}")))
    }
}

fn default_seeds() -> Seeds {
    Seeds::Preset("standard".into())
}

fn default_counts() -> Vec<usize> {
    vec![2, 3, 4, 5]
}

fn default_parallelism() -> usize {
    1
}

fn default_max_turns() -> u32 {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Scaffold name, e.g. `watson`, `sherlock`, `sherlock-no-deduction`, `mycroft`.
    pub scaffold: String,
    #[serde(default = "default_seeds")]
    pub seeds: Seeds,
    #[serde(default = "default_counts")]
    pub player_counts: Vec<usize>,
    /// Games run at once.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_max_turns")]
    pub max_turns: u32,
    #[serde(default)]
    pub clean_watson_system: bool,
    /// Agent for every seat (or every seat but 0 when `singleton` is set).
    pub agent: AgentSpec,
    /// Cross-play: this agent takes seat 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singleton: Option<AgentSpec>,
    #[serde(default)]
    pub http: HttpSettings,
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<SuiteConfig, HarnessError> {
        let cfg: SuiteConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<SuiteConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        self.kind()?;
        self.seeds.resolve()?;
        if self.parallelism == 0 {
            return Err(HarnessError::Config("parallelism must be at least 1".into()));
        }
        for spec in std::iter::once(&self.agent).chain(&self.singleton) {
            spec.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn kind(&self) -> Result<ScaffoldKind, HarnessError> {
        ScaffoldKind::from_name(&self.scaffold)
            .ok_or_else(|| HarnessError::Config(format!("unknown scaffold {:?}", self.scaffold)))
    }

    pub fn game_options(&self) -> GameOptions {
        GameOptions {
            max_turns: self.max_turns,
            render: RenderOptions { clean_watson_system: self.clean_watson_system },
        }
    }
}
