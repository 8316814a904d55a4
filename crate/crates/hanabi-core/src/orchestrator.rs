//! The game loop, per-turn records, replay validation and the suite planner.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{Agent, AgentError, SubCall, TurnContext};
use crate::engine::{hex_digest, EngineError, GameConfig, GameState, Move, MoveOutcome, TerminalStatus, SHUFFLE_ALGORITHM};
use crate::scaffold::{mycroft_state_text, AgentDecision, Prompt, RenderOptions, ScaffoldKind, TurnMemory};

/// Bumped whenever the record layout changes.
pub const RECORD_SCHEMA: &str = "hanabi-game-record/1";

pub const STANDARD_SEEDS: [u64; 10] = [1, 2, 3, 5, 7, 11, 13, 17, 19, 23];
pub const HELDOUT_SEEDS: [u64; 5] = [4, 6, 8, 10, 12];

pub fn seed_preset(name: &str) -> Option<&'static [u64]> {
    match name {
        "standard" => Some(&STANDARD_SEEDS),
        "heldout" => Some(&HELDOUT_SEEDS),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrchestratorError {
    #[error("roster has {seats} seats for a {players}-player game")]
    RosterSize { seats: usize, players: usize },
    #[error("no seeds given")]
    NoSeeds,
    #[error("no player counts given")]
    NoPlayerCounts,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOptions {
    /// Turns after which the game is cut off and marked aborted.
    pub max_turns: u32,
    pub render: RenderOptions,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions { max_turns: 200, render: RenderOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn_index: u32,
    pub player: usize,
    pub scaffold: ScaffoldKind,
    pub prompt: Prompt,
    pub raw_response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    pub decision: AgentDecision,
    pub attempts: u32,
    #[serde(default)]
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parse_errors: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sub_calls: Vec<SubCall>,
    /// Legal moves offered this turn, as shown to the agent.
    pub legal_moves: Vec<String>,
    pub move_index: usize,
    #[serde(rename = "move")]
    pub mv: Move,
    pub outcome: MoveOutcome,
    pub pre_state_hash: String,
    pub post_state_hash: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbortInfo {
    pub turn_index: u32,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub schema: String,
    pub game_id: String,
    pub shuffle: String,
    pub config: GameConfig,
    pub scaffold: ScaffoldKind,
    /// One label per seat.
    pub roster: Vec<String>,
    /// Model name per seat, where there is one.
    pub models: Vec<Option<String>>,
    pub turns: Vec<TurnRecord>,
    pub terminal: Option<TerminalStatus>,
    pub final_score: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<AbortInfo>,
}

impl GameRecord {
    pub fn is_self_play(&self) -> bool {
        self.roster.windows(2).all(|w| w[0] == w[1])
    }
}

pub fn game_id(config: &GameConfig, kind: ScaffoldKind, roster: &[String]) -> String {
    let tag = hex_digest(roster.join("|").as_bytes());
    format!("{}-{}p-seed{}-{}", kind.name(), config.n_players, config.seed, &tag[..8])
}

/// Plays one game to the end, or until the turn guard trips or an agent aborts.
pub fn run_game(
    roster: &[Arc<dyn Agent>],
    config: &GameConfig,
    kind: ScaffoldKind,
    opts: &GameOptions,
) -> Result<GameRecord, OrchestratorError> {
    if roster.len() != config.n_players {
        return Err(OrchestratorError::RosterSize { seats: roster.len(), players: config.n_players });
    }
    let labels: Vec<String> = roster.iter().map(|a| a.label()).collect();
    let mut state = GameState::new_game(config.clone())?;
    let mut memory: Vec<Option<TurnMemory>> = alloc::vec![None; config.n_players];
    let mut turns = Vec::new();
    let mut aborted = None;

    while state.terminal.is_none() {
        if turns.len() as u32 >= opts.max_turns {
            aborted = Some(AbortInfo {
                turn_index: state.turn_index,
                reason: format!("turn guard reached after {} turns", opts.max_turns),
            });
            break;
        }
        let seat = state.current_player;
        let ctx = TurnContext {
            kind,
            state: &state,
            viewer: seat,
            memory: if kind == ScaffoldKind::Mycroft { memory[seat].as_ref() } else { None },
            render: opts.render,
        };
        let reply = match roster[seat].decide(&ctx) {
            Ok(r) => r,
            Err(e @ (AgentError::Abort(_) | AgentError::Unavailable(_))) => {
                aborted = Some(AbortInfo { turn_index: state.turn_index, reason: e.to_string() });
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let legal = state.legal_moves()?;
        let mv = legal[reply.decision.action];
        let pre_state_hash = state.state_hash();
        let state_text = (kind == ScaffoldKind::Mycroft).then(|| mycroft_state_text(&state, seat));
        let outcome = state.step(mv)?;
        if let Some(text) = state_text {
            memory[seat] = Some(TurnMemory { previous_state_text: text, previous_response_text: reply.raw_response.clone() });
        }
        turns.push(TurnRecord {
            turn_index: state.turn_index - 1,
            player: seat,
            scaffold: kind,
            prompt: reply.prompt,
            raw_response: reply.raw_response,
            reasoning: reply.reasoning,
            attempts: reply.attempts,
            fallback: reply.fallback,
            parse_errors: reply.parse_errors,
            sub_calls: reply.sub_calls,
            legal_moves: legal.iter().map(|m| m.to_string()).collect(),
            move_index: reply.decision.action,
            decision: reply.decision,
            mv,
            outcome,
            pre_state_hash,
            post_state_hash: state.state_hash(),
        });
    }
    Ok(GameRecord {
        schema: RECORD_SCHEMA.into(),
        game_id: game_id(config, kind, &labels),
        shuffle: SHUFFLE_ALGORITHM.into(),
        config: config.clone(),
        scaffold: kind,
        models: roster.iter().map(|a| a.spec().model_name.clone()).collect(),
        roster: labels,
        turns,
        terminal: state.terminal,
        final_score: state.score(),
        aborted,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    PreStateHash,
    IllegalMove,
    MoveIndexMismatch,
    PostStateHash,
    OutcomeMismatch,
    TurnOrder,
    FinalState,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Position in `turns`, or `None` for whole-record problems.
    pub turn: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

/// Replays the record from its seed and lists every turn that does not reproduce.
pub fn validate_trajectory(record: &GameRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    let v = |turn: Option<usize>, kind, detail: String| Violation { turn, kind, detail };
    if record.shuffle != SHUFFLE_ALGORITHM {
        out.push(v(None, ViolationKind::FinalState, format!("deal made with `{}`", record.shuffle)));
        return out;
    }
    let mut state = match GameState::new_game(record.config.clone()) {
        Ok(s) => s,
        Err(e) => {
            out.push(v(None, ViolationKind::FinalState, e.to_string()));
            return out;
        }
    };
    for (i, t) in record.turns.iter().enumerate() {
        if t.turn_index != state.turn_index || t.player != state.current_player {
            out.push(v(Some(i), ViolationKind::TurnOrder, format!("expected turn {} by P{}", state.turn_index, state.current_player)));
        }
        if t.pre_state_hash != state.state_hash() {
            out.push(v(Some(i), ViolationKind::PreStateHash, "pre-state hash differs from replay".into()));
        }
        let legal = state.legal_moves().unwrap_or_default();
        if legal.get(t.move_index) != Some(&t.mv) || t.decision.action != t.move_index {
            out.push(v(Some(i), ViolationKind::MoveIndexMismatch, format!("index {} does not name {}", t.move_index, t.mv)));
        }
        match state.step(t.mv) {
            Ok(outcome) => {
                if outcome != t.outcome {
                    out.push(v(Some(i), ViolationKind::OutcomeMismatch, "recorded outcome differs from replay".into()));
                }
            }
            Err(e) => {
                out.push(v(Some(i), ViolationKind::IllegalMove, e.to_string()));
                return out;
            }
        }
        if t.post_state_hash != state.state_hash() {
            out.push(v(Some(i), ViolationKind::PostStateHash, "post-state hash differs from replay".into()));
        }
    }
    if state.terminal != record.terminal || state.score() != record.final_score {
        out.push(v(None, ViolationKind::FinalState, format!("replay ends at score {}", state.score())));
    }
    if record.aborted.is_none() && state.terminal.is_none() {
        out.push(v(None, ViolationKind::FinalState, "record ends before the game does".into()));
    }
    out
}

/// Seats for a suite: one optional singleton at seat 0, every other seat `rest`.
#[derive(Clone)]
pub struct RosterTemplate {
    pub singleton: Option<Arc<dyn Agent>>,
    pub rest: Arc<dyn Agent>,
}

impl RosterTemplate {
    pub fn self_play(agent: Arc<dyn Agent>) -> Self {
        RosterTemplate { singleton: None, rest: agent }
    }

    pub fn seats(&self, n_players: usize) -> Vec<Arc<dyn Agent>> {
        (0..n_players)
            .map(|i| match (&self.singleton, i) {
                (Some(s), 0) => s.clone(),
                _ => self.rest.clone(),
            })
            .collect()
    }
}

/// Suite cells ordered by (player count, seed).
pub fn plan_suite(seeds: &[u64], player_counts: &[usize]) -> Result<Vec<(usize, u64)>, OrchestratorError> {
    if seeds.is_empty() {
        return Err(OrchestratorError::NoSeeds);
    }
    if player_counts.is_empty() {
        return Err(OrchestratorError::NoPlayerCounts);
    }
    let mut counts = player_counts.to_vec();
    counts.sort_unstable();
    counts.dedup();
    let mut s = seeds.to_vec();
    s.sort_unstable();
    s.dedup();
    let mut cells = Vec::with_capacity(counts.len() * s.len());
    for &n in &counts {
        GameConfig::new(n, 0)?;
        cells.extend(s.iter().map(|&seed| (n, seed)));
    }
    Ok(cells)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n_players: usize,
    pub seed: u64,
    pub outcome: Result<GameRecord, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub scaffold: ScaffoldKind,
    pub cells: Vec<CellResult>,
}

pub fn run_cell(template: &RosterTemplate, n_players: usize, seed: u64, kind: ScaffoldKind, opts: &GameOptions) -> CellResult {
    let outcome = GameConfig::new(n_players, seed)
        .map_err(OrchestratorError::from)
        .and_then(|cfg| run_game(&template.seats(n_players), &cfg, kind, opts))
        .map_err(|e| e.to_string());
    CellResult { n_players, seed, outcome }
}

/// Every (player count, seed) cell in order, one game after another.
pub fn run_suite(
    template: &RosterTemplate,
    seeds: &[u64],
    player_counts: &[usize],
    kind: ScaffoldKind,
    opts: &GameOptions,
) -> Result<SuiteResult, OrchestratorError> {
    let cells = plan_suite(seeds, player_counts)?
        .into_iter()
        .map(|(n, seed)| run_cell(template, n, seed, kind, opts))
        .collect();
    Ok(SuiteResult { scaffold: kind, cells })
}
