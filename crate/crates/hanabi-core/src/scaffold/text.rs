//! State-to-text pieces shared by the scaffold prompts, the MoA context and the judge prompt.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::beliefs::CardKnowledge;
use crate::card::{Card, COLORS};
use crate::engine::{GameState, Hint, Move};

use super::ScaffoldKind;

pub(crate) fn number_word(n: usize) -> &'static str {
    match n {
        1 => "one",
        2 => "two",
        3 => "three",
        4 => "four",
        _ => "several",
    }
}

/// Other seats in absolute order, skipping the viewer, paired with their offset from the viewer.
pub fn others(state: &GameState, viewer: usize) -> impl Iterator<Item = (usize, usize)> {
    let n = state.n_players();
    (0..n).filter(move |&s| s != viewer).map(move |s| (s, (s + n - viewer) % n))
}

/// `1 red card rank 1, 2 red cards rank 3`, sorted by color then rank; `None` when empty.
pub fn discard_summary(discards: &[Card]) -> Option<String> {
    let mut counts = [0u8; 25];
    for c in discards {
        counts[c.slot()] += 1;
    }
    let parts: Vec<String> = (0..25)
        .filter(|&i| counts[i] > 0)
        .map(|i| {
            let c = Card::from_slot(i);
            let n = counts[i];
            let noun = if n == 1 { "card" } else { "cards" };
            format!("{n} {} {noun} rank {}", c.color.lower(), c.rank)
        })
        .collect();
    (!parts.is_empty()).then(|| parts.join(", "))
}

pub fn fireworks_progress(state: &GameState) -> String {
    let parts: Vec<String> = COLORS
        .iter()
        .map(|&c| format!("{} stack is at {}", c.letter(), state.fireworks.height(c)))
        .collect();
    format!("The fireworks progress: {}.", parts.join(", "))
}

/// `(k, last_seat)` when the final countdown is running.
fn final_round(state: &GameState) -> Option<(u8, usize)> {
    let k = state.final_countdown?;
    let last = (state.current_player + k as usize + state.n_players() - 1) % state.n_players();
    Some((k, last))
}

/// The Sherlock / Mycroft final-round notice.
pub fn final_round_line(state: &GameState, viewer: usize) -> Option<String> {
    let (k, last) = final_round(state)?;
    Some(if k == 1 {
        "FINAL ROUND: The deck is empty. You are the final player and this is the final turn for the whole game.".into()
    } else {
        let off = (last + state.n_players() - viewer) % state.n_players();
        format!(
            "FINAL ROUND: The deck is empty. {k} turns remain in the game, including this one; Player +{off} takes the final turn."
        )
    })
}

fn color_list(k: &CardKnowledge) -> String {
    let names: Vec<&str> = k.colors.iter().map(|c| c.name()).collect();
    let ranks: Vec<String> = k.ranks.iter().map(|r| format!("{r}")).collect();
    format!("{} with ranks: {}", names.join(", "), ranks.join(", "))
}

fn known_code(h: Hint) -> String {
    let mut s = String::new();
    s.push(h.color.map_or('X', |c| c.letter()));
    s.push(h.rank.map_or('X', |r| (b'0' + r) as char));
    s
}

fn own_known_text(h: Hint) -> String {
    match (h.color, h.rank) {
        (None, None) => "No hints about this card's color or rank have been given yet.".into(),
        (Some(c), None) => format!("Known: color is {}.", c.lower()),
        (None, Some(r)) => format!("Known: rank is {r}."),
        (Some(c), Some(r)) => format!("Known: color is {} and rank is {r}.", c.lower()),
    }
}

fn other_known_text(h: Hint) -> String {
    match (h.color, h.rank) {
        (None, None) => "This player has no specific hints about the card's identity".into(),
        (Some(c), None) => format!("This player knows color is {}", c.name()),
        (None, Some(r)) => format!("This player knows rank is {r}"),
        (Some(c), Some(r)) => format!("This player knows color is {} and rank is {r}", c.name()),
    }
}

/// The Sherlock state block from the token line through the discard sentence.
/// The ablated kinds drop the possibility lines, and the discard pile for the second ablation.
pub fn sherlock_state(state: &GameState, viewer: usize, kind: ScaffoldKind) -> String {
    let deductions = !matches!(kind, ScaffoldKind::SherlockNoDeduction | ScaffoldKind::SherlockNoDiscardPile);
    let discard_pile = kind != ScaffoldKind::SherlockNoDiscardPile;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "There are {} life tokens and {} info tokens remaining.",
        state.life_tokens, state.info_tokens
    );
    out.push_str(&fireworks_progress(state));
    out.push_str("\nYour hand contains the following cards:\n");
    for (i, (h, k)) in state.explicit_hints[viewer].iter().zip(&state.knowledge[viewer]).enumerate() {
        let _ = writeln!(out, "Card {i}:");
        let _ = writeln!(out, "- Known info: '{}'. {}", known_code(*h), own_known_text(*h));
        if deductions {
            let _ = writeln!(out, "- Could be any of these colors: {}.", color_list(k));
        }
    }
    out.push_str("From your perspective, you can see the other players' hands clearly. Here's what you observe:\n");
    for (seat, off) in others(state, viewer) {
        let _ = writeln!(out, "Player +{off}'s hand:");
        for ((card, h), k) in state.hands[seat].iter().zip(&state.explicit_hints[seat]).zip(&state.knowledge[seat]) {
            let _ = write!(out, "- A card: You can see the card: '{card}', {}", other_known_text(*h));
            if deductions {
                let _ = write!(out, ", This player knows it could be any of these colors: {}", color_list(k));
            }
            out.push_str(".\n");
        }
    }
    let _ = write!(out, "There are {} cards remaining in the deck.", state.deck.len());
    if discard_pile {
        match discard_summary(&state.discards) {
            Some(s) => {
                let _ = write!(out, " The discard pile contains: {s}.");
            }
            None => out.push_str(" The discard pile contains: no cards discarded yet."),
        }
    }
    out
}

fn watson_hint(h: Hint) -> String {
    let color = h.color.map_or("UnknownColor", |c| c.name());
    match h.rank {
        Some(r) => format!("{color} {r}"),
        None => format!("{color} UnknownRank"),
    }
}

fn bracket<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    let parts: Vec<String> = items.iter().map(f).collect();
    format!("[{}]", parts.join(", "))
}

struct WatsonParts {
    header: String,
    fireworks: String,
    discards: String,
    final_round: Option<String>,
    hands: Vec<String>,
    own: String,
    knows: Vec<String>,
}

fn watson_parts(state: &GameState, viewer: usize) -> WatsonParts {
    let n = state.n_players();
    WatsonParts {
        header: format!(
            "P{viewer} ({n}p Game). Lives: {}, Info: {}, Deck: {}.",
            state.life_tokens,
            state.info_tokens,
            state.deck.len()
        ),
        fireworks: format!("Fireworks: {}.", state.fireworks),
        discards: format!("Discards: {}.", discard_summary(&state.discards).as_deref().unwrap_or("None")),
        final_round: final_round(state).map(|(k, last)| format!("FINAL ROUND! {k} turns left (P{last} is last).")),
        hands: others(state, viewer)
            .map(|(s, _)| format!("P{s} Hand: {}", bracket(&state.hands[s], |c| c.long_name())))
            .collect(),
        own: format!(
            "{} (Indices 0-{}).",
            bracket(&state.explicit_hints[viewer], |h| watson_hint(*h)),
            state.hands[viewer].len().saturating_sub(1)
        ),
        knows: others(state, viewer)
            .map(|(s, _)| format!("P{s} Knows: {}", bracket(&state.explicit_hints[s], |h| watson_hint(*h))))
            .collect(),
    }
}

/// The compact Watson state used by the single-agent prompt.
pub fn watson_state(state: &GameState, viewer: usize) -> String {
    let p = watson_parts(state, viewer);
    let mut out = format!("{}\n{} {}\n", p.header, p.fireworks, p.discards);
    if let Some(f) = p.final_round {
        out.push_str(&f);
        out.push('\n');
    }
    let _ = writeln!(out, "Visible Hands: {}", p.hands.join(". "));
    let _ = writeln!(out, "Your Knowledge (Hints): {}", p.own);
    let _ = write!(out, "Others' Knowledge: {}", p.knows.join(". "));
    out
}

/// The multi-line Watson state shared by every mixture agent.
pub fn watson_context(state: &GameState, viewer: usize) -> String {
    let p = watson_parts(state, viewer);
    let mut out = format!("Game State:\n{}\n{}\n{}\n", p.header, p.fireworks, p.discards);
    if let Some(f) = p.final_round {
        out.push_str(&f);
        out.push('\n');
    }
    out.push_str("\nVisible Hands:\n");
    out.push_str(&p.hands.join(".\n"));
    out.push_str("\n\nYour Knowledge (Hints):\n");
    out.push_str(&p.own);
    out.push_str("\n\nOthers' Knowledge:\n");
    out.push_str(&p.knows.join(".\n"));
    out
}

/// `  0. (Discard 0)` lines.
pub fn numbered_moves(legal: &[Move]) -> String {
    let lines: Vec<String> = legal.iter().enumerate().map(|(i, m)| format!("  {i}. {m}")).collect();
    lines.join("\n")
}

/// `{0: '((Discard 0))', 1: '((Play 0))'}`
pub fn legal_mapping(legal: &[Move]) -> String {
    let parts: Vec<String> = legal.iter().enumerate().map(|(i, m)| format!("{i}: '({m})'")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Pretty JSON object from index strings to move text.
pub fn legal_json(legal: &[Move]) -> String {
    let mut out = String::from("{\n");
    for (i, m) in legal.iter().enumerate() {
        let sep = if i + 1 < legal.len() { "," } else { "" };
        let _ = writeln!(out, "  \"{i}\": \"{m}\"{sep}");
    }
    out.push('}');
    out
}

fn mycroft_own(h: Hint) -> String {
    match (h.color, h.rank) {
        (None, None) => "unknown".into(),
        (Some(c), None) => format!("{}, unknown rank", c.letter()),
        (None, Some(r)) => format!("unknown color, rank {r}"),
        (Some(c), Some(r)) => format!("{}, rank {r}", c.letter()),
    }
}

pub fn mycroft_state(state: &GameState, viewer: usize) -> String {
    let n = state.n_players();
    let mut out = format!("You are Player P{viewer}, Turn {}\n", state.turn_index + 1);
    let since = state.actions_since_last_turn(viewer);
    if since.is_empty() {
        out.push_str("No actions have occurred yet; this is the first turn of the game.\n");
    } else {
        out.push_str("Since your last turn the following actions occurred:\n");
        for h in since {
            let _ = writeln!(
                out,
                "- P{} {} | Fireworks: {} | Info: {}",
                h.player,
                h.mv.absolute_text(h.player, n),
                h.fireworks_after,
                h.info_after
            );
        }
    }
    let _ = writeln!(
        out,
        "\nThere are {} life tokens and {} info tokens remaining.",
        state.life_tokens, state.info_tokens
    );
    out.push_str(&fireworks_progress(state));
    out.push_str("\nYour hand (what you know):\n");
    out.push_str("This is your explicit knowledge, showing only what you\u{2019}ve been directly told through clues.\n");
    out.push_str("For further deductions (what each card cannot be, based on prior history and reasoning), use your deduction block.\n");
    for (i, h) in state.explicit_hints[viewer].iter().enumerate() {
        let _ = writeln!(out, "  Card {i}: {}", mycroft_own(*h));
    }
    out.push_str("From your perspective, you can see the other players' hands clearly. Here's what you observe:\n");
    for (seat, off) in others(state, viewer) {
        let _ = writeln!(out, "Player +{off}'s hand:");
        for c in &state.hands[seat] {
            let _ = writeln!(out, "- {c}");
        }
    }
    let _ = write!(out, "There are {} cards remaining in the deck.", state.deck.len());
    match discard_summary(&state.discards) {
        Some(s) => {
            let _ = write!(out, " The discard pile contains: {s}.");
        }
        None => out.push_str(" The discard pile contains: no cards discarded yet."),
    }
    out
}
