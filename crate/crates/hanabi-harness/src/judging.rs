//! Batch state-tracking evaluation of Mycroft runs: structural scores,
//! judge-prompt export, and ingestion of external judge replies.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use hanabi_core::beliefs::DeductionBlock;
use hanabi_core::judge::{
    build_judge_prompt, deduction_from_state, parse_judge_response, score_deduction_since, StateTrackingScores,
};
use hanabi_core::orchestrator::GameRecord;
use hanabi_core::GameState;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// One judged turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JudgedTurn {
    pub game_id: String,
    pub turn_index: u32,
    pub player: usize,
    pub scores: StateTrackingScores,
}

/// A judge prompt ready to send to an external model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgePrompt {
    pub game_id: String,
    pub turn_index: u32,
    pub player: usize,
    pub prompt: String,
}

/// An external judge's reply to a [`JudgePrompt`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeReply {
    pub game_id: String,
    pub turn_index: u32,
    pub player: usize,
    pub response: String,
}

/// Replays a record and calls `f(state_before, turn_position, oracle, previous_oracle)`
/// for every turn whose decision carries a deduction block.
fn for_each_deduction(
    record: &GameRecord,
    mut f: impl FnMut(&GameState, usize, &DeductionBlock, Option<&DeductionBlock>) -> Result<(), HarnessError>,
) -> Result<(), HarnessError> {
    let mut state = GameState::new_game(record.config.clone()).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let mut last: BTreeMap<usize, DeductionBlock> = BTreeMap::new();
    for (i, t) in record.turns.iter().enumerate() {
        let oracle = deduction_from_state(&state, t.player);
        if t.decision.deduction.is_some() {
            f(&state, i, &oracle, last.get(&t.player))?;
        }
        last.insert(t.player, oracle);
        state
            .step(t.mv)
            .map_err(|e| HarnessError::Invalid(format!("{} turn {}: {e}", record.game_id, t.turn_index)))?;
    }
    Ok(())
}

/// Structural scores for every turn that reported a deduction block.
pub fn structural(record: &GameRecord) -> Result<Vec<JudgedTurn>, HarnessError> {
    let mut out = Vec::new();
    for_each_deduction(record, |_, i, oracle, previous| {
        let t = &record.turns[i];
        let predicted = t.decision.deduction.as_ref().expect("filtered");
        let scores = score_deduction_since(predicted, oracle, previous)
            .map_err(|e| HarnessError::Invalid(format!("{} turn {}: {e}", record.game_id, t.turn_index)))?;
        out.push(JudgedTurn { game_id: record.game_id.clone(), turn_index: t.turn_index, player: t.player, scores });
        Ok(())
    })?;
    Ok(out)
}

pub fn judge_prompts(record: &GameRecord) -> Result<Vec<JudgePrompt>, HarnessError> {
    let mut out = Vec::new();
    for_each_deduction(record, |state, i, oracle, _| {
        let t = &record.turns[i];
        out.push(JudgePrompt {
            game_id: record.game_id.clone(),
            turn_index: t.turn_index,
            player: t.player,
            prompt: build_judge_prompt(state, t.player, &t.prompt.text(), &t.raw_response, oracle),
        });
        Ok(())
    })?;
    Ok(out)
}

/// Parses judge replies, one JSON object per line.
pub fn ingest_replies(reader: impl BufRead) -> Result<Vec<JudgedTurn>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| HarnessError::Invalid(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: String| HarnessError::Invalid(format!("reply line {}: {m}", i + 1));
        let r: JudgeReply = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let scores = parse_judge_response(&r.response).map_err(|e| bad(e.to_string()))?;
        out.push(JudgedTurn { game_id: r.game_id, turn_index: r.turn_index, player: r.player, scores });
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(rows: &[T], mut out: impl Write) -> std::io::Result<()> {
    for r in rows {
        writeln!(out, "{}", serde_json::to_string(r).map_err(std::io::Error::other)?)?;
    }
    out.flush()
}

/// Mean of each score over a batch: (overall, deduction, history, tracking).
pub fn mean_scores(rows: &[JudgedTurn]) -> Option<[f64; 4]> {
    if rows.is_empty() {
        return None;
    }
    let mut acc = [0.0; 4];
    for r in rows {
        let s = &r.scores;
        for (a, v) in acc.iter_mut().zip([
            s.overall_rating,
            s.deduction_accuracy,
            s.history_integration,
            s.state_tracking_quality,
        ]) {
            *a += v;
        }
    }
    Some(acc.map(|a| a / rows.len() as f64))
}
