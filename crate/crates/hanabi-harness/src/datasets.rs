//! HanabiLogs and HanabiRewards: one JSONL line per turn, with a manifest alongside.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use hanabi_core::orchestrator::{validate_trajectory, GameRecord, TurnRecord};
use hanabi_core::scaffold::{MoveRating, Prompt, ScaffoldKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DATASET_SCHEMA: &str = "hanabi-datasets/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dataset {
    HanabiLogs,
    HanabiRewards,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogsRecord {
    pub game_id: String,
    pub turn_index: u32,
    pub player: usize,
    pub scaffold: ScaffoldKind,
    pub n_players: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub prompt: Prompt,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardsRecord {
    #[serde(flatten)]
    pub log: LogsRecord,
    pub legal_moves: Vec<String>,
    pub ratings: Vec<MoveRating>,
    pub action: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefusedGame {
    pub game_id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema: String,
    pub dataset: Dataset,
    pub games: usize,
    pub lines: usize,
    pub refused_games: Vec<RefusedGame>,
    /// Turns left out of a Rewards export, by reason.
    pub excluded_turns: BTreeMap<String, usize>,
    pub player_count_histogram: BTreeMap<usize, usize>,
    pub score_distribution: BTreeMap<u8, usize>,
}

impl DatasetManifest {
    pub fn excluded(&self) -> usize {
        self.excluded_turns.values().sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExportOptions {
    /// Leave out turns whose ratings had to be clamped into range.
    pub strict_ratings: bool,
}

fn logs_record(game: &GameRecord, t: &TurnRecord) -> LogsRecord {
    LogsRecord {
        game_id: game.game_id.clone(),
        turn_index: t.turn_index,
        player: t.player,
        scaffold: t.scaffold,
        n_players: game.config.n_players,
        seed: game.config.seed,
        model: game.models.get(t.player).cloned().flatten(),
        prompt: t.prompt.clone(),
        response: t.raw_response.clone(),
        reasoning: t.reasoning.clone(),
    }
}

/// Why a turn cannot go into Rewards, if it cannot.
fn rewards_exclusion(t: &TurnRecord, opts: ExportOptions) -> Option<&'static str> {
    if t.fallback {
        Some("fallback")
    } else if opts.strict_ratings && t.decision.ratings_clamped {
        Some("clamped_ratings")
    } else if check_ratings(&t.decision.ratings, t.legal_moves.len(), t.move_index).is_err() {
        Some("invalid_ratings")
    } else {
        None
    }
}

fn check_ratings(ratings: &[MoveRating], n_legal: usize, action: usize) -> Result<(), String> {
    if action >= n_legal {
        return Err(format!("action {action} out of range for {n_legal} legal moves"));
    }
    let mut seen = vec![false; n_legal];
    for r in ratings {
        if r.action >= n_legal || std::mem::replace(&mut seen[r.action], true) {
            return Err(format!("rating for move {} is out of range or repeated", r.action));
        }
        if !(-1.0..=1.0).contains(&r.rating) {
            return Err(format!("rating {} for move {} is outside [-1, 1]", r.rating, r.action));
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(format!("move {missing} has no rating"));
    }
    Ok(())
}

/// Writes one line per turn of every game that replays cleanly; games with
/// replay violations are refused and listed in the manifest.
pub fn export<'a, W: Write>(
    records: impl IntoIterator<Item = &'a GameRecord>,
    which: Dataset,
    opts: ExportOptions,
    mut out: W,
) -> Result<DatasetManifest, DatasetError> {
    let mut m = DatasetManifest {
        schema: DATASET_SCHEMA.into(),
        dataset: which,
        games: 0,
        lines: 0,
        refused_games: Vec::new(),
        excluded_turns: BTreeMap::new(),
        player_count_histogram: BTreeMap::new(),
        score_distribution: BTreeMap::new(),
    };
    for game in records {
        let violations = validate_trajectory(game);
        if let Some(v) = violations.first() {
            m.refused_games.push(RefusedGame {
                game_id: game.game_id.clone(),
                reason: format!("{} replay violation(s), first: {}", violations.len(), v.detail),
            });
            continue;
        }
        m.games += 1;
        *m.player_count_histogram.entry(game.config.n_players).or_default() += 1;
        *m.score_distribution.entry(game.final_score).or_default() += 1;
        for t in &game.turns {
            let line = match which {
                Dataset::HanabiLogs => serde_json::to_string(&logs_record(game, t)),
                Dataset::HanabiRewards => {
                    if let Some(reason) = rewards_exclusion(t, opts) {
                        *m.excluded_turns.entry(reason.into()).or_default() += 1;
                        continue;
                    }
                    serde_json::to_string(&RewardsRecord {
                        log: logs_record(game, t),
                        legal_moves: t.legal_moves.clone(),
                        ratings: t.decision.ratings.clone(),
                        action: t.move_index,
                    })
                }
            }
            .map_err(io::Error::other)?;
            writeln!(out, "{line}")?;
            m.lines += 1;
        }
    }
    out.flush()?;
    Ok(m)
}

/// `logs.jsonl` -> `logs.manifest.json`
pub fn manifest_path(jsonl: &Path) -> PathBuf {
    jsonl.with_extension("manifest.json")
}

pub fn export_to_path<'a>(
    records: impl IntoIterator<Item = &'a GameRecord>,
    which: Dataset,
    opts: ExportOptions,
    path: &Path,
) -> Result<DatasetManifest, DatasetError> {
    let file = io::BufWriter::new(fs::File::create(path)?);
    let m = export(records, which, opts, file)?;
    fs::write(manifest_path(path), crate::runner::to_pretty(&m))?;
    Ok(m)
}

fn line_err(line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Line { line, message: message.into() }
}

fn check_logs(r: &LogsRecord) -> Result<(), String> {
    if !(2..=5).contains(&r.n_players) {
        return Err(format!("n_players {} outside 2..=5", r.n_players));
    }
    if r.player >= r.n_players {
        return Err(format!("player {} outside a {}-player game", r.player, r.n_players));
    }
    if r.game_id.is_empty() || r.prompt.user.is_empty() {
        return Err("empty game id or prompt".into());
    }
    Ok(())
}

/// Parses one line and checks it is exactly what an export would have written.
fn parse_line<T: Serialize + serde::de::DeserializeOwned>(text: &str, line: usize) -> Result<T, DatasetError> {
    let v: T = serde_json::from_str(text).map_err(|e| line_err(line, e.to_string()))?;
    let again = serde_json::to_string(&v).map_err(|e| line_err(line, e.to_string()))?;
    if again != text {
        return Err(line_err(line, "line is not in canonical form (unknown fields or key order)"));
    }
    Ok(v)
}

pub fn validate_logs_line(text: &str, line: usize) -> Result<LogsRecord, DatasetError> {
    let r: LogsRecord = parse_line(text, line)?;
    check_logs(&r).map_err(|m| line_err(line, m))?;
    Ok(r)
}

pub fn validate_rewards_line(text: &str, line: usize) -> Result<RewardsRecord, DatasetError> {
    let r: RewardsRecord = parse_line(text, line)?;
    check_logs(&r.log).map_err(|m| line_err(line, m))?;
    check_ratings(&r.ratings, r.legal_moves.len(), r.action).map_err(|m| line_err(line, m))?;
    Ok(r)
}

fn read_lines<T>(
    reader: impl BufRead,
    parse: impl Fn(&str, usize) -> Result<T, DatasetError>,
) -> Result<Vec<T>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        out.push(parse(&line?, i + 1)?);
    }
    Ok(out)
}

/// Reads and re-validates every line.
pub fn import_logs(reader: impl BufRead) -> Result<Vec<LogsRecord>, DatasetError> {
    read_lines(reader, validate_logs_line)
}

pub fn import_rewards(reader: impl BufRead) -> Result<Vec<RewardsRecord>, DatasetError> {
    read_lines(reader, validate_rewards_line)
}

/// Writes records back out in export form.
pub fn write_lines<T: Serialize, W: Write>(records: &[T], mut out: W) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r).map_err(io::Error::other)?)?;
    }
    out.flush()
}
