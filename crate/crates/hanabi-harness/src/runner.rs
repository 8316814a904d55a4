//! Builds agents from specs, runs suites on a thread pool, and persists run directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hanabi_core::agents::{scripted_agent, Agent, AgentKind, AgentSpec, LlmAgent};
use hanabi_core::orchestrator::{
    plan_suite, run_cell, validate_trajectory, GameOptions, GameRecord, RosterTemplate, SuiteResult,
};
use hanabi_core::scaffold::ScaffoldKind;
use hanabi_core::TerminalReason;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SuiteConfig;
use crate::error::HarnessError;
use crate::fanout::RayonFanout;
use crate::transport::{HttpSettings, HttpTransport};

pub const RUN_SCHEMA: &str = "hanabi-run/1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const GAMES_DIR: &str = "games";

pub fn build_agent(spec: &AgentSpec, http: &HttpSettings) -> Result<Arc<dyn Agent>, HarnessError> {
    spec.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    match spec.kind {
        AgentKind::Llm => {
            let transport = HttpTransport::from_spec(spec, http).map_err(|e| HarnessError::Config(e.to_string()))?;
            let agent = LlmAgent::new(spec.clone(), Arc::new(transport), Arc::new(RayonFanout))
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            Ok(Arc::new(agent))
        }
        _ => scripted_agent(spec).map_err(|e| HarnessError::Config(e.to_string())),
    }
}

pub fn build_template(cfg: &SuiteConfig) -> Result<RosterTemplate, HarnessError> {
    Ok(RosterTemplate {
        singleton: cfg.singleton.as_ref().map(|s| build_agent(s, &cfg.http)).transpose()?,
        rest: build_agent(&cfg.agent, &cfg.http)?,
    })
}

/// Every (player count, seed) cell, up to `parallelism` games at once.
/// Cells come back in plan order whatever order they finish in.
pub fn run_suite_parallel(
    template: &RosterTemplate,
    seeds: &[u64],
    player_counts: &[usize],
    kind: ScaffoldKind,
    opts: &GameOptions,
    parallelism: usize,
) -> Result<SuiteResult, HarnessError> {
    let plan = plan_suite(seeds, player_counts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let cells = pool.install(|| {
        plan.par_iter().map(|&(n, seed)| run_cell(template, n, seed, kind, opts)).collect()
    });
    Ok(SuiteResult { scaffold: kind, cells })
}

pub fn run_config(cfg: &SuiteConfig) -> Result<SuiteResult, HarnessError> {
    let template = build_template(cfg)?;
    run_suite_parallel(
        &template,
        &cfg.seeds.resolve()?,
        &cfg.player_counts,
        cfg.kind()?,
        &cfg.game_options(),
        cfg.parallelism,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameEntry {
    pub n_players: usize,
    pub seed: u64,
    /// Path relative to the run directory; absent when the game failed to run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_score: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<TerminalReason>,
    #[serde(default)]
    pub aborted: bool,
    #[serde(default)]
    pub turns: usize,
    #[serde(default)]
    pub violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub scaffold: ScaffoldKind,
    pub config: SuiteConfig,
    pub games: Vec<GameEntry>,
}

impl RunManifest {
    pub fn failed(&self) -> usize {
        self.games.iter().filter(|g| g.error.is_some()).count()
    }

    pub fn aborted(&self) -> usize {
        self.games.iter().filter(|g| g.aborted).count()
    }

    pub fn violations(&self) -> usize {
        self.games.iter().map(|g| g.violations).sum()
    }
}

pub(crate) fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Writes one JSON file per game plus `manifest.json`. The directory must be new or empty.
pub fn write_run_dir(dir: &Path, cfg: &SuiteConfig, suite: &SuiteResult) -> Result<RunManifest, HarnessError> {
    if dir.exists() {
        let mut it = fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
        if it.next().is_some() {
            return Err(HarnessError::RunDirNotEmpty(dir.to_path_buf()));
        }
    }
    let games_dir = dir.join(GAMES_DIR);
    fs::create_dir_all(&games_dir).map_err(|e| HarnessError::io(&games_dir, e))?;
    let mut games = Vec::with_capacity(suite.cells.len());
    for cell in &suite.cells {
        let mut entry = GameEntry {
            n_players: cell.n_players,
            seed: cell.seed,
            file: None,
            game_id: None,
            final_score: None,
            terminal: None,
            aborted: false,
            turns: 0,
            violations: 0,
            error: None,
        };
        match &cell.outcome {
            Ok(record) => {
                let rel = format!("{GAMES_DIR}/{}.json", record.game_id);
                write(&dir.join(&rel), &to_pretty(record))?;
                entry.file = Some(rel);
                entry.game_id = Some(record.game_id.clone());
                entry.final_score = Some(record.final_score);
                entry.terminal = record.terminal.map(|t| t.reason);
                entry.aborted = record.aborted.is_some();
                entry.turns = record.turns.len();
                entry.violations = validate_trajectory(record).len();
            }
            Err(e) => entry.error = Some(e.clone()),
        }
        games.push(entry);
    }
    let manifest = RunManifest { schema: RUN_SCHEMA.into(), scaffold: suite.scaffold, config: cfg.clone(), games };
    write(&dir.join(MANIFEST_FILE), &to_pretty(&manifest))?;
    Ok(manifest)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::json(path, e))
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, HarnessError> {
    let m: RunManifest = read_json(&dir.join(MANIFEST_FILE))?;
    if m.schema != RUN_SCHEMA {
        return Err(HarnessError::Invalid(format!("unsupported run schema {:?}", m.schema)));
    }
    Ok(m)
}

/// The manifest and every game record it lists, in manifest order.
pub fn read_run_dir(dir: &Path) -> Result<(RunManifest, Vec<GameRecord>), HarnessError> {
    let manifest = read_manifest(dir)?;
    let records = manifest
        .games
        .iter()
        .filter_map(|g| g.file.as_ref())
        .map(|f| read_json::<GameRecord>(&dir.join(f)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((manifest, records))
}

/// Relative paths of every file under `dir`, sorted.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(|e| HarnessError::io(&d, e))? {
            let path = entry.map_err(|e| HarnessError::io(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).expect("under dir").to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}
