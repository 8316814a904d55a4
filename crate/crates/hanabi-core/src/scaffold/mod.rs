//! Prompt rendering for the Watson, Sherlock and Mycroft scaffolds, and
//! parsing of agent replies back into [`AgentDecision`]s.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::DeductionBlock;
use crate::engine::{EngineError, GameState};

pub mod moa;
mod parse;
pub mod text;

pub(crate) use parse::extract_json_object;
pub use parse::{parse_agent_response, parse_watson, render_response, ParseContext, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScaffoldKind {
    Watson,
    Sherlock,
    SherlockNoDeduction,
    SherlockNoDiscardPile,
    Mycroft,
}

impl ScaffoldKind {
    pub const ALL: [ScaffoldKind; 5] = [
        ScaffoldKind::Watson,
        ScaffoldKind::Sherlock,
        ScaffoldKind::SherlockNoDeduction,
        ScaffoldKind::SherlockNoDiscardPile,
        ScaffoldKind::Mycroft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScaffoldKind::Watson => "watson",
            ScaffoldKind::Sherlock => "sherlock",
            ScaffoldKind::SherlockNoDeduction => "sherlock-no-deduction",
            ScaffoldKind::SherlockNoDiscardPile => "sherlock-no-discard-pile",
            ScaffoldKind::Mycroft => "mycroft",
        }
    }

    pub fn from_name(s: &str) -> Option<ScaffoldKind> {
        ScaffoldKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s.trim()))
    }

    /// Whether replies are JSON objects (everything except Watson).
    pub fn json_reply(self) -> bool {
        self != ScaffoldKind::Watson
    }

    pub fn is_sherlock(self) -> bool {
        matches!(
            self,
            ScaffoldKind::Sherlock | ScaffoldKind::SherlockNoDeduction | ScaffoldKind::SherlockNoDiscardPile
        )
    }
}

/// A rendered prompt. Watson carries a separate system message; the others are a single user message.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Prompt {
    pub system: Option<String>,
    pub user: String,
}

impl Prompt {
    pub fn user(text: String) -> Prompt {
        Prompt { system: None, user: text }
    }

    /// Flattened form for logs and datasets.
    pub fn text(&self) -> String {
        match &self.system {
            Some(s) => format!("[system]\n{s}\n\n[user]\n{}", self.user),
            None => self.user.clone(),
        }
    }
}

/// One rated candidate move.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveRating {
    pub action: usize,
    pub rating: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentDecision {
    pub action: usize,
    pub ratings: Vec<MoveRating>,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deduction: Option<DeductionBlock>,
    /// Set when out-of-range ratings were clamped into [-1, 1].
    #[serde(default)]
    pub ratings_clamped: bool,
}

/// What a Mycroft seat remembers from its own previous turn.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TurnMemory {
    pub previous_state_text: String,
    pub previous_response_text: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Use the Watson system prompt that also asks for move ratings.
    pub clean_watson_system: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaffoldError {
    #[error("player {viewer} asked to act but it is player {current}'s turn")]
    OutOfTurn { viewer: usize, current: usize },
    #[error("memory is only used by the Mycroft scaffold")]
    UnexpectedMemory,
    #[error("Mycroft seat {0} has acted before and needs its previous-turn memory")]
    MissingMemory(usize),
    #[error("{0} is not supported for this scaffold")]
    Unsupported(&'static str),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub(crate) mod assets {
    macro_rules! asset {
        ($name:ident, $file:literal) => {
            pub const $name: &str = include_str!(concat!("../../assets/", $file));
        };
    }
    asset!(RULES, "rules.txt");
    asset!(ROLE, "role.txt");
    asset!(THINK, "think.txt");
    asset!(ACTION_LEGEND, "action_legend.txt");
    asset!(SHERLOCK_OUTPUT, "sherlock_output.txt");
    asset!(SHERLOCK_RATINGS, "sherlock_ratings.txt");
    asset!(PROBABILITY, "probability.txt");
    asset!(WATSON_SYSTEM, "watson_system.txt");
    asset!(WATSON_SYSTEM_CLEAN, "watson_system_clean.txt");
    asset!(WATSON_USER, "watson_user.txt");
    asset!(BEST_OF_K, "best_of_k.txt");
    asset!(MYCROFT_OUTPUT, "mycroft_output.txt");
    asset!(MYCROFT_PROTOCOL, "mycroft_protocol.txt");
    asset!(MYCROFT_MEMORY_NOTE, "mycroft_memory_note.txt");
    asset!(MYCROFT_NOTES, "mycroft_notes.txt");
    asset!(JUDGE, "judge.txt");
    asset!(MOA_WATSON_ANALYST_SYSTEM, "moa_watson_analyst_system.txt");
    asset!(MOA_WATSON_ANALYST_USER, "moa_watson_analyst_user.txt");
    asset!(MOA_WATSON_DISCARD_SYSTEM, "moa_watson_discard_system.txt");
    asset!(MOA_WATSON_DISCARD_USER, "moa_watson_discard_user.txt");
    asset!(MOA_WATSON_HISTORY_SYSTEM, "moa_watson_history_system.txt");
    asset!(MOA_WATSON_HISTORY_USER, "moa_watson_history_user.txt");
    asset!(MOA_WATSON_FINALIZER_SYSTEM, "moa_watson_finalizer_system.txt");
    asset!(MOA_WATSON_FINALIZER_USER, "moa_watson_finalizer_user.txt");
    asset!(MOA_SHERLOCK_ANALYST, "moa_sherlock_analyst.txt");
    asset!(MOA_SHERLOCK_DISCARD, "moa_sherlock_discard.txt");
    asset!(MOA_SHERLOCK_HISTORY, "moa_sherlock_history.txt");
    asset!(MOA_SHERLOCK_AGGREGATOR, "moa_sherlock_aggregator.txt");
}

/// Substitutes `{{name}}` placeholders. Unknown names are left in place and
/// a trailing newline on the template is dropped.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let template = template.strip_suffix('\n').unwrap_or(template);
    let mut out = String::with_capacity(template.len() + 512);
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let Some(end) = after.find("}}") else {
            out.push_str(&rest[start..]);
            rest = "";
            break;
        };
        let key = &after[..end];
        match vars.iter().find(|(k, _)| *k == key) {
            Some((_, v)) => out.push_str(v),
            None => {
                out.push_str("{{");
                out.push_str(key);
                out.push_str("}}");
            }
        }
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    out
}

pub(crate) fn plain(asset: &str) -> &str {
    asset.strip_suffix('\n').unwrap_or(asset)
}

const GOOD_LUCK: &str =
    "To win, you need to play the cards in the correct sequence and maximize the total score of the fireworks. Good luck!";

pub fn render_prompt(
    kind: ScaffoldKind,
    state: &GameState,
    viewer: usize,
    memory: Option<&TurnMemory>,
) -> Result<Prompt, ScaffoldError> {
    render_prompt_with(kind, state, viewer, memory, &RenderOptions::default())
}

pub fn render_prompt_with(
    kind: ScaffoldKind,
    state: &GameState,
    viewer: usize,
    memory: Option<&TurnMemory>,
    opts: &RenderOptions,
) -> Result<Prompt, ScaffoldError> {
    if viewer != state.current_player {
        return Err(ScaffoldError::OutOfTurn { viewer, current: state.current_player });
    }
    if memory.is_some() && kind != ScaffoldKind::Mycroft {
        return Err(ScaffoldError::UnexpectedMemory);
    }
    if kind == ScaffoldKind::Mycroft && memory.is_none() && state.history.iter().any(|h| h.player == viewer) {
        return Err(ScaffoldError::MissingMemory(viewer));
    }
    let legal = state.legal_moves()?;
    Ok(match kind {
        ScaffoldKind::Watson => watson_prompt(state, viewer, &legal, opts),
        ScaffoldKind::Mycroft => Prompt::user(mycroft_prompt(state, viewer, &legal, memory)),
        _ => Prompt::user(sherlock_prompt(kind, state, viewer, &legal)),
    })
}

fn watson_prompt(state: &GameState, viewer: usize, legal: &[crate::engine::Move], opts: &RenderOptions) -> Prompt {
    let system = if opts.clean_watson_system { assets::WATSON_SYSTEM_CLEAN } else { assets::WATSON_SYSTEM };
    let user = fill(
        assets::WATSON_USER,
        &[
            ("player", &viewer.to_string()),
            ("state", &text::watson_state(state, viewer)),
            ("legal_moves", &text::numbered_moves(legal)),
            ("info", &state.info_tokens.to_string()),
        ],
    );
    Prompt { system: Some(plain(system).into()), user }
}

/// Rules, persona, then the state block under `header`.
pub(crate) fn sherlock_context(kind: ScaffoldKind, state: &GameState, viewer: usize, header: &str) -> String {
    let mut out = fill(assets::RULES, &[("n_players", &state.n_players().to_string())]);
    out.push_str("\n\n");
    out.push_str(plain(assets::ROLE));
    out.push_str("\n\n");
    out.push_str(header);
    out.push_str(&text::sherlock_state(state, viewer, kind));
    if let Some(line) = text::final_round_line(state, viewer) {
        out.push_str("\n\n");
        out.push_str(&line);
    }
    out
}

fn sherlock_prompt(kind: ScaffoldKind, state: &GameState, viewer: usize, legal: &[crate::engine::Move]) -> String {
    let mut out = sherlock_context(kind, state, viewer, "Below is the current detailed state information.\n\nGame State:\n");
    out.push_str("\n\n");
    out.push_str(plain(assets::THINK));
    out.push_str("\n\nNow it's your turn. You can choose from the following legal actions:\n\n");
    out.push_str("The legal actions are provided in a mapping of action identifiers to their descriptions:\n");
    out.push_str(&text::legal_mapping(legal));
    out.push_str("\n\n");
    out.push_str(plain(assets::ACTION_LEGEND));
    out.push_str("\n\n");
    out.push_str(plain(assets::SHERLOCK_OUTPUT));
    out.push_str("\n\n");
    out.push_str(plain(assets::SHERLOCK_RATINGS));
    out.push_str("\n\n");
    out.push_str(GOOD_LUCK);
    out.push_str("\n\n");
    out.push_str(plain(assets::PROBABILITY));
    out
}

fn mycroft_prompt(state: &GameState, viewer: usize, legal: &[crate::engine::Move], memory: Option<&TurnMemory>) -> String {
    let n = state.n_players();
    let mut out = fill(assets::RULES, &[("n_players", &n.to_string())]);
    out.push_str("\n\n");
    out.push_str(plain(assets::ROLE));
    out.push_str("\n\n");
    out.push_str(plain(assets::THINK));
    out.push_str("\n\nThe legal actions are provided in a mapping of action identifiers to their descriptions:\n\nExample of legal actions:\n");
    out.push_str(plain(assets::ACTION_LEGEND));
    out.push_str("\n\n");
    out.push_str(plain(assets::MYCROFT_OUTPUT));
    out.push_str("\n\n");
    out.push_str(&fill(assets::MYCROFT_PROTOCOL, &[("others_word", text::number_word(n - 1))]));
    out.push_str("\n\n");
    out.push_str(GOOD_LUCK);
    out.push_str("\n\n");
    out.push_str(plain(assets::PROBABILITY));
    out.push('\n');
    out.push_str(plain(assets::MYCROFT_MEMORY_NOTE));
    out.push_str("\n\n\nBelow is the current detailed state information.\n\nGame State:\n");
    out.push_str(&mycroft_state_text(state, viewer));
    if let Some(line) = text::final_round_line(state, viewer) {
        out.push_str("\n\n");
        out.push_str(&line);
    }
    out.push_str("\n\n");
    out.push_str(plain(assets::MYCROFT_NOTES));
    out.push_str("\n\nLegal moves this turn:\n");
    for (i, mv) in legal.iter().enumerate() {
        out.push_str(&format!("{i}: ({mv})\n"));
    }
    if let Some(mem) = memory {
        out.push_str("\n### You have been given the previous game-state and your last reasoning ###\n");
        out.push_str("PREVIOUS GAME-STATE:\n");
        out.push_str(&mem.previous_state_text);
        out.push_str("\nPREVIOUS TURN RESPONSE:\n");
        out.push_str(&mem.previous_response_text);
    } else if out.ends_with('\n') {
        out.pop();
    }
    out
}

/// The Mycroft state block, from "You are Player" through the discard line.
/// This is also what a seat stores as `previous_state_text`.
pub fn mycroft_state_text(state: &GameState, viewer: usize) -> String {
    text::mycroft_state(state, viewer)
}

/// The Best-of-K selection prompt: the original prompt with all candidate responses appended.
pub fn best_of_k_prompt(base: &Prompt, responses: &[String]) -> Prompt {
    let mut blocks = String::new();
    for (i, r) in responses.iter().enumerate() {
        if i > 0 {
            blocks.push_str("\n\n");
        }
        blocks.push_str(&format!("{{Response {}:}}\n{}", i + 1, r));
    }
    let k = responses.len().to_string();
    let tail = fill(assets::BEST_OF_K, &[("k", &k), ("responses", &blocks)]);
    Prompt { system: base.system.clone(), user: format!("{}\n\n{}", base.user, tail) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_replaces_known_and_keeps_unknown() {
        assert_eq!(fill("a {{x}} b {{y}}\n", &[("x", "1")]), "a 1 b {{y}}");
        assert_eq!(fill("{\"k\": 1}", &[]), "{\"k\": 1}");
        assert_eq!(fill("open {{ only", &[]), "open {{ only");
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ScaffoldKind::ALL {
            assert_eq!(ScaffoldKind::from_name(k.name()), Some(k));
        }
    }

    #[test]
    fn best_of_k_layout() {
        let base = Prompt::user("BASE".into());
        let p = best_of_k_prompt(&base, &["one".into(), "two".into()]);
        assert!(p.user.starts_with("BASE\n\nBelow are 2 different responses"));
        assert!(p.user.contains("{Response 1:}\none\n\n{Response 2:}\ntwo"));
        assert!(p.user.contains("1. Review all 2 responses above"));
        assert!(p.user.ends_with("in the same format as the responses above."));
    }
}
