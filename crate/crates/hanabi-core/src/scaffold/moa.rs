//! Prompts for the six-role mixture: four or five specialists and one aggregator.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::engine::{Fireworks, GameState};

use super::{assets, fill, plain, render_prompt, sherlock_context, text, Prompt, ScaffoldError, ScaffoldKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RoleKind {
    Baseline,
    RankFocused,
    Analyst,
    DiscardStrategist,
    HistoryAnalyst,
    Aggregator,
}

impl RoleKind {
    /// The agent number used in report delimiters.
    pub fn agent_number(self) -> usize {
        match self {
            RoleKind::Baseline => 1,
            RoleKind::RankFocused => 2,
            RoleKind::Analyst => 3,
            RoleKind::DiscardStrategist => 4,
            RoleKind::HistoryAnalyst => 5,
            RoleKind::Aggregator => 6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RoleKind::Baseline => "Baseline",
            RoleKind::RankFocused => "Rank-Preferring",
            RoleKind::Analyst => "Analyst",
            RoleKind::DiscardStrategist => "Discard Expert",
            RoleKind::HistoryAnalyst => "Historian",
            RoleKind::Aggregator => "Aggregator",
        }
    }

    /// Specialist roles in report order. The history agent sits out two-player games.
    pub fn specialists(n_players: usize) -> Vec<RoleKind> {
        let mut v = alloc::vec![RoleKind::Baseline, RoleKind::RankFocused, RoleKind::Analyst, RoleKind::DiscardStrategist];
        if n_players > 2 {
            v.push(RoleKind::HistoryAnalyst);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixtureFlavor {
    Watson,
    Sherlock,
}

pub fn flavor(kind: ScaffoldKind) -> Result<MixtureFlavor, ScaffoldError> {
    match kind {
        ScaffoldKind::Watson => Ok(MixtureFlavor::Watson),
        ScaffoldKind::Mycroft => Err(ScaffoldError::Unsupported("mixture of agents")),
        _ => Ok(MixtureFlavor::Sherlock),
    }
}

/// Scaffold whose reply format the aggregator uses.
pub fn aggregator_reply_kind(kind: ScaffoldKind) -> ScaffoldKind {
    if kind == ScaffoldKind::Watson {
        ScaffoldKind::Watson
    } else {
        ScaffoldKind::Sherlock
    }
}

const WATSON_RANK_RULE: &str = "with a preference for rank clues over color clues when both are equally valuable.";
const SHERLOCK_RANK_RULE: &str =
    "IMPORTANT RULE:\nWhen a color clue and a rank clue are equally valuable, you must give the rank clue.";

fn moa_probability() -> String {
    plain(assets::PROBABILITY)
        .replace("Probability Calculation:", "Probability Calculation")
        .replace('\u{d7}', "x")
}

/// `Recent Turn History (Last 10):` with the state before each move.
pub fn watson_history(state: &GameState) -> String {
    let mut out = String::from("Recent Turn History (Last 10):");
    let start = state.history.len().saturating_sub(10);
    if state.history.is_empty() {
        out.push_str("\n- none yet");
    }
    for h in &state.history[start..] {
        let _ = write!(
            out,
            "\n- T{} (P{}, Info:{}, FW:{}): [{}]",
            h.turn + 1,
            h.player,
            h.info_before,
            h.fireworks_before,
            h.mv
        );
    }
    out
}

fn comma_fireworks(fw: &Fireworks) -> String {
    let parts: Vec<String> = crate::card::COLORS
        .iter()
        .map(|&c| format!("{}{}", c.letter(), fw.height(c)))
        .collect();
    parts.join(", ")
}

/// Full move history, actors named relative to the viewer.
pub fn sherlock_history(state: &GameState, viewer: usize) -> String {
    if state.history.is_empty() {
        return "No turns have been played yet.".into();
    }
    let n = state.n_players();
    let lines: Vec<String> = state
        .history
        .iter()
        .map(|h| {
            let who = match (h.player + n - viewer) % n {
                0 => format!("You (P{})", h.player),
                off => format!("Player +{off} (P{})", h.player),
            };
            format!(
                "Turn {}: {who} chose move '{}'. Fireworks: {}\u{2192}{}, Info tokens: {}\u{2192}{}.",
                h.turn + 1,
                h.mv,
                comma_fireworks(&h.fireworks_before),
                comma_fireworks(&h.fireworks_after),
                h.info_before,
                h.info_after
            )
        })
        .collect();
    lines.join("\n")
}

fn watson_legal(state: &GameState) -> Result<String, ScaffoldError> {
    Ok(format!("Legal Moves:\n{}", text::numbered_moves(&state.legal_moves()?)))
}

fn check_turn(state: &GameState, viewer: usize) -> Result<(), ScaffoldError> {
    if viewer != state.current_player {
        return Err(ScaffoldError::OutOfTurn { viewer, current: state.current_player });
    }
    Ok(())
}

pub fn specialist_prompt(kind: ScaffoldKind, role: RoleKind, state: &GameState, viewer: usize) -> Result<Prompt, ScaffoldError> {
    check_turn(state, viewer)?;
    let flavor = flavor(kind)?;
    match (flavor, role) {
        (_, RoleKind::Aggregator) => Err(ScaffoldError::Unsupported("aggregator as a specialist")),
        (_, RoleKind::Baseline) => render_prompt(kind, state, viewer, None),
        (MixtureFlavor::Watson, RoleKind::RankFocused) => {
            let mut p = render_prompt(kind, state, viewer, None)?;
            let sys = p.system.take().unwrap_or_default();
            p.system = Some(format!("{sys}\n{WATSON_RANK_RULE}"));
            Ok(p)
        }
        (MixtureFlavor::Sherlock, RoleKind::RankFocused) => {
            let mut p = render_prompt(kind, state, viewer, None)?;
            p.user = format!("{}\n\n{SHERLOCK_RANK_RULE}", p.user);
            Ok(p)
        }
        (MixtureFlavor::Watson, role) => {
            let (system, user) = match role {
                RoleKind::Analyst => (assets::MOA_WATSON_ANALYST_SYSTEM, assets::MOA_WATSON_ANALYST_USER),
                RoleKind::DiscardStrategist => (assets::MOA_WATSON_DISCARD_SYSTEM, assets::MOA_WATSON_DISCARD_USER),
                _ => (assets::MOA_WATSON_HISTORY_SYSTEM, assets::MOA_WATSON_HISTORY_USER),
            };
            let user = fill(
                user,
                &[
                    ("state", &text::watson_context(state, viewer)),
                    ("legal_moves", &watson_legal(state)?),
                    ("history", &watson_history(state)),
                ],
            );
            Ok(Prompt { system: Some(plain(system).into()), user })
        }
        (MixtureFlavor::Sherlock, role) => {
            let ctx = sherlock_context(kind, state, viewer, "Current Game State:\n");
            let prob = moa_probability();
            let legal_json = text::legal_json(&state.legal_moves()?);
            let body = match role {
                RoleKind::Analyst => {
                    fill(assets::MOA_SHERLOCK_ANALYST, &[("legal_json", &legal_json), ("probability", &prob)])
                }
                RoleKind::DiscardStrategist => fill(assets::MOA_SHERLOCK_DISCARD, &[("probability", &prob)]),
                _ => fill(
                    assets::MOA_SHERLOCK_HISTORY,
                    &[
                        ("player", &viewer.to_string()),
                        ("history", &sherlock_history(state, viewer)),
                        ("probability", &prob),
                    ],
                ),
            };
            Ok(Prompt::user(format!("{ctx}\n\n{body}")))
        }
    }
}

/// Placeholder text for a specialist that produced nothing usable.
pub fn unavailable_stub(err: &str) -> String {
    format!("[unavailable: {err}]")
}

fn watson_section(role: RoleKind, body: &str) -> String {
    let n = role.agent_number();
    let (open, close) = match role {
        RoleKind::Baseline | RoleKind::RankFocused => {
            (format!("--- Agent {n} Proposal ---"), format!("--- End Agent {n} Proposal ---"))
        }
        RoleKind::Analyst => ("--- Agent 3 Analysis (Hand & Clues) ---".into(), "--- End Agent 3 Analysis ---".into()),
        RoleKind::DiscardStrategist => {
            ("--- Agent 4 Discard Proposal ---".into(), "--- End Agent 4 Discard Proposal ---".into())
        }
        _ => ("--- Agent 5 History Analysis ---".into(), "--- End Agent 5 History Analysis ---".into()),
    };
    format!("{open}\n{body}\n{close}")
}

/// The aggregator prompt. `reports` are in role order; failed specialists should already carry
/// [`unavailable_stub`] text.
pub fn aggregator_prompt(
    kind: ScaffoldKind,
    state: &GameState,
    viewer: usize,
    reports: &[(RoleKind, String)],
) -> Result<Prompt, ScaffoldError> {
    check_turn(state, viewer)?;
    match flavor(kind)? {
        MixtureFlavor::Watson => {
            let sections: Vec<String> = reports.iter().map(|(r, b)| watson_section(*r, b)).collect();
            let user = fill(
                assets::MOA_WATSON_FINALIZER_USER,
                &[
                    ("state", &text::watson_context(state, viewer)),
                    ("legal_moves", &watson_legal(state)?),
                    ("history", &watson_history(state)),
                    ("reports", &sections.join("\n\n")),
                ],
            );
            Ok(Prompt { system: Some(plain(assets::MOA_WATSON_FINALIZER_SYSTEM).into()), user })
        }
        MixtureFlavor::Sherlock => {
            let ctx = sherlock_context(kind, state, viewer, "Current Game State:\n");
            let sections: Vec<String> = reports
                .iter()
                .map(|(r, b)| format!("Report from Agent {} ({}):\n{b}\n---", r.agent_number(), r.label()))
                .collect();
            let body = fill(
                assets::MOA_SHERLOCK_AGGREGATOR,
                &[
                    ("history", &sherlock_history(state, viewer)),
                    ("reports", &sections.join("\n")),
                    ("legal_json", &text::legal_json(&state.legal_moves()?)),
                ],
            );
            Ok(Prompt::user(format!("{ctx}\n{body}")))
        }
    }
}
