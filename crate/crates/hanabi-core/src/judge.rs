//! State-tracking evaluation: the clue-only deduction oracle, a deterministic
//! structural scorer, and the LLM-judge prompt and response handling.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::beliefs::{apply_clue, shift_on_removal, BeliefError, CardKnowledge, DeductionBlock};
use crate::engine::{EngineError, GameConfig, GameState, Move, MoveOutcome};
use crate::scaffold::{self, fill, text, ScaffoldKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JudgeError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error("blocks cover different rosters: {0}")]
    RosterMismatch(String),
    #[error("judge response: {0}")]
    BadResponse(String),
}

/// Who produced a set of scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreSource {
    Structural,
    LlmJudge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateTrackingScores {
    pub source: ScoreSource,
    pub overall_rating: f64,
    pub deduction_accuracy: f64,
    pub history_integration: f64,
    pub state_tracking_quality: f64,
    pub detailed_feedback: String,
    pub key_issues: Vec<String>,
    pub strengths: Vec<String>,
}

/// Every player's clue-only knowledge after `moves`, replayed from a fresh deal and viewed from `viewer`.
pub fn oracle_deduction(config: &GameConfig, moves: &[Move], viewer: usize) -> Result<DeductionBlock, JudgeError> {
    oracle_deduction_from(&GameState::new_game(config.clone())?, moves, viewer)
}

/// Same as [`oracle_deduction`] from an explicit starting deal. Knowledge
/// attached to `start` is ignored; every card begins unknown.
pub fn oracle_deduction_from(start: &GameState, moves: &[Move], viewer: usize) -> Result<DeductionBlock, JudgeError> {
    let mut state = start.clone();
    let n = state.n_players();
    let mut hands: Vec<Vec<CardKnowledge>> =
        state.hands.iter().map(|h| alloc::vec![CardKnowledge::unknown(); h.len()]).collect();
    for &mv in moves {
        let actor = state.current_player;
        match state.step(mv)? {
            MoveOutcome::Played { drew, .. } | MoveOutcome::Discarded { drew, .. } => {
                let slot = match mv {
                    Move::Play { slot } | Move::Discard { slot } => slot,
                    _ => unreachable!("outcome matches move"),
                };
                hands[actor] = shift_on_removal(&hands[actor], slot, drew)?;
            }
            MoveOutcome::Revealed { target, touched } => {
                let (_, clue) = mv.clue().expect("reveal carries a clue");
                hands[target] = apply_clue(&hands[target], &touched, clue)?;
            }
        }
    }
    Ok(DeductionBlock { viewer, hands: (0..n).map(|off| hands[(viewer + off) % n].clone()).collect() })
}

/// The engine's own running knowledge, arranged as a block for `viewer`.
pub fn deduction_from_state(state: &GameState, viewer: usize) -> DeductionBlock {
    let n = state.n_players();
    DeductionBlock { viewer, hands: (0..n).map(|off| state.knowledge[(viewer + off) % n].clone()).collect() }
}

fn jaccard(a: u8, b: u8) -> f64 {
    let union = (a | b).count_ones();
    if union == 0 {
        return 1.0;
    }
    f64::from((a & b).count_ones()) / f64::from(union)
}

fn card_similarity(p: &CardKnowledge, o: &CardKnowledge) -> f64 {
    (jaccard(p.colors.bits(), o.colors.bits()) + jaccard(p.ranks.bits(), o.ranks.bits())) / 2.0
}

fn check_roster(a: &DeductionBlock, b: &DeductionBlock) -> Result<(), JudgeError> {
    if a.viewer != b.viewer || a.hands.len() != b.hands.len() {
        return Err(JudgeError::RosterMismatch(format!(
            "{} players from P{} vs {} players from P{}",
            a.hands.len(),
            a.viewer,
            b.hands.len(),
            b.viewer
        )));
    }
    for (off, (x, y)) in a.hands.iter().zip(&b.hands).enumerate() {
        if x.len() != y.len() {
            return Err(JudgeError::RosterMismatch(format!(
                "{} has {} cards vs {}",
                DeductionBlock::key(off),
                x.len(),
                y.len()
            )));
        }
    }
    Ok(())
}

pub fn score_deduction(predicted: &DeductionBlock, oracle: &DeductionBlock) -> Result<StateTrackingScores, JudgeError> {
    score_deduction_since(predicted, oracle, None)
}

/// Structural scores. With `previous` (the oracle at the viewer's last turn) the
/// history score covers only positions whose correct knowledge changed since then;
/// with nothing changed, or no previous block, it equals deduction accuracy.
pub fn score_deduction_since(
    predicted: &DeductionBlock,
    oracle: &DeductionBlock,
    previous: Option<&DeductionBlock>,
) -> Result<StateTrackingScores, JudgeError> {
    check_roster(predicted, oracle)?;
    let mut total = 0.0;
    let mut cards = 0usize;
    let mut changed_total = 0.0;
    let mut changed = 0usize;
    let mut no_invention = 0usize;
    let mut issues = Vec::new();
    for (off, (ph, oh)) in predicted.hands.iter().zip(&oracle.hands).enumerate() {
        for (j, (p, o)) in ph.iter().zip(oh).enumerate() {
            let sim = card_similarity(p, o);
            total += sim;
            cards += 1;
            let moved = previous
                .and_then(|prev| prev.hands.get(off))
                .map(|prev_hand| prev_hand.get(j).is_none_or(|k| !k.same_sets(o)));
            if moved == Some(true) {
                changed_total += sim;
                changed += 1;
            }
            if p.colors.is_superset(o.colors) && p.ranks.is_superset(o.ranks) {
                no_invention += 1;
            }
            if !p.same_sets(o) {
                issues.push(format!(
                    "{} card{j}: predicted `{}`, correct `{}`",
                    DeductionBlock::key(off),
                    p.describe_short(),
                    o.describe_short()
                ));
            }
        }
    }
    let deduction_accuracy = if cards == 0 { 1.0 } else { total / cards as f64 };
    let history_integration = if changed == 0 { deduction_accuracy } else { changed_total / changed as f64 };
    let state_tracking_quality = if cards == 0 { 1.0 } else { no_invention as f64 / cards as f64 };
    let overall_rating = (deduction_accuracy + history_integration + state_tracking_quality) / 3.0;

    let mut strengths = Vec::new();
    let exact = cards - issues.len();
    if exact > 0 {
        strengths.push(format!("{exact} of {cards} cards match the correct deduction exactly"));
    }
    if no_invention == cards {
        strengths.push("no constraints beyond what the clues support".into());
    }
    let mut feedback = String::from("structural scorer (per-card Jaccard over possibility sets)");
    if issues.is_empty() {
        feedback.push_str("; deduction matches exactly.");
    } else {
        let _ = write!(feedback, "; {} discrepancies:", issues.len());
        for i in &issues {
            let _ = write!(feedback, "\n- {i}");
        }
    }
    Ok(StateTrackingScores {
        source: ScoreSource::Structural,
        overall_rating,
        deduction_accuracy,
        history_integration,
        state_tracking_quality,
        detailed_feedback: feedback,
        key_issues: issues,
        strengths,
    })
}

/// `- Player 2: (Discard 0) | Fireworks: R0 Y2 G1 W0 B1 | Info tokens: 5`
pub fn actions_digest(state: &GameState, viewer: usize) -> String {
    let lines: Vec<String> = state
        .actions_since_last_turn(viewer)
        .iter()
        .map(|h| format!("- Player {}: {} | Fireworks: {} | Info tokens: {}", h.player, h.mv, h.fireworks_after, h.info_after))
        .collect();
    if lines.is_empty() {
        "- none".into()
    } else {
        lines.join("\n")
    }
}

/// The evaluation prompt for an external LLM judge.
pub fn build_judge_prompt(
    current: &GameState,
    viewer: usize,
    model_input: &str,
    model_output: &str,
    oracle: &DeductionBlock,
) -> String {
    fill(
        scaffold::assets::JUDGE,
        &[
            ("turn", &(current.turn_index + 1).to_string()),
            ("player", &viewer.to_string()),
            ("state", &text::sherlock_state(current, viewer, ScaffoldKind::Sherlock)),
            ("actions", &actions_digest(current, viewer)),
            ("model_input", model_input),
            ("model_output", model_output),
            ("oracle", &oracle.to_judge_json()),
        ],
    )
}

fn score_field(obj: &serde_json::Map<String, Value>, key: &str) -> Result<f64, JudgeError> {
    let v = obj
        .get(key)
        .and_then(|v| v.as_f64().or_else(|| v.as_str().and_then(|s| s.trim().parse().ok())))
        .ok_or_else(|| JudgeError::BadResponse(format!("`{key}` missing or not a number")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(JudgeError::BadResponse(format!("`{key}` = {v} is outside [0, 1]")));
    }
    Ok(v)
}

fn string_list(obj: &serde_json::Map<String, Value>, key: &str) -> Vec<String> {
    match obj.get(key) {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
            .collect(),
        Some(Value::String(s)) => alloc::vec![s.clone()],
        _ => Vec::new(),
    }
}

/// Reads a judge reply; the JSON may be wrapped in prose or a code fence.
pub fn parse_judge_response(text: &str) -> Result<StateTrackingScores, JudgeError> {
    let obj = scaffold::extract_json_object(text).ok_or_else(|| JudgeError::BadResponse("no JSON object".into()))?;
    Ok(StateTrackingScores {
        source: ScoreSource::LlmJudge,
        overall_rating: score_field(&obj, "overall_rating")?,
        deduction_accuracy: score_field(&obj, "deduction_accuracy")?,
        history_integration: score_field(&obj, "history_integration")?,
        state_tracking_quality: score_field(&obj, "state_tracking_quality")?,
        detailed_feedback: obj.get("detailed_feedback").and_then(Value::as_str).unwrap_or_default().to_string(),
        key_issues: string_list(&obj, "key_issues"),
        strengths: string_list(&obj, "strengths"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beliefs::{ColorSet, RankSet};
    use crate::card::Color;

    fn block(hands: Vec<Vec<CardKnowledge>>) -> DeductionBlock {
        DeductionBlock { viewer: 0, hands }
    }

    #[test]
    fn identity_scores_one() {
        let k = CardKnowledge::from_sets(ColorSet::single(Color::R), RankSet::ALL);
        let b = block(alloc::vec![alloc::vec![k, CardKnowledge::unknown()], alloc::vec![k]]);
        let s = score_deduction(&b, &b).unwrap();
        assert_eq!(
            (s.overall_rating, s.deduction_accuracy, s.history_integration, s.state_tracking_quality),
            (1.0, 1.0, 1.0, 1.0)
        );
        assert!(s.key_issues.is_empty());
    }

    #[test]
    fn all_unknown_prediction_by_hand() {
        // Oracle: card0 colors {R}, ranks all -> colour Jaccard 1/5, rank 1 -> 0.6.
        //         card1 colors all, ranks {1,2} -> 1 and 2/5 -> 0.7.
        let o = block(alloc::vec![
            alloc::vec![
                CardKnowledge::from_sets(ColorSet::single(Color::R), RankSet::ALL),
                CardKnowledge::from_sets(ColorSet::ALL, RankSet::from_bits(0b00011)),
            ],
            alloc::vec![],
        ]);
        let p = block(alloc::vec![alloc::vec![CardKnowledge::unknown(); 2], alloc::vec![]]);
        let s = score_deduction(&p, &o).unwrap();
        assert_eq!(s.state_tracking_quality, 1.0);
        assert!((s.deduction_accuracy - 0.65).abs() < 1e-12);
    }

    #[test]
    fn one_invented_constraint_in_four() {
        let o = block(alloc::vec![alloc::vec![CardKnowledge::unknown(); 4]]);
        let mut p = o.clone();
        p.hands[0][2].ranks.remove(3);
        let s = score_deduction(&p, &o).unwrap();
        assert_eq!(s.state_tracking_quality, 0.75);
        assert_eq!(s.key_issues.len(), 1);
    }

    #[test]
    fn roster_mismatch() {
        let a = block(alloc::vec![alloc::vec![CardKnowledge::unknown(); 4]]);
        let b = block(alloc::vec![alloc::vec![CardKnowledge::unknown(); 3]]);
        assert!(matches!(score_deduction(&a, &b), Err(JudgeError::RosterMismatch(_))));
    }
}
