use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::beliefs::DeductionBlock;
use crate::engine::GameState;

use super::{AgentDecision, MoveRating, ScaffoldKind};

/// Everything the parser needs to validate a reply against the current turn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseContext {
    pub n_legal: usize,
    pub viewer: usize,
    /// Hand lengths by offset from the viewer; only used for Mycroft deductions.
    pub hand_lens: Vec<usize>,
    /// Reject out-of-range ratings instead of clamping them.
    pub strict: bool,
}

impl ParseContext {
    pub fn new(n_legal: usize) -> ParseContext {
        ParseContext { n_legal, viewer: 0, hand_lens: Vec::new(), strict: false }
    }

    pub fn for_state(state: &GameState, viewer: usize, strict: bool) -> ParseContext {
        let n = state.n_players();
        ParseContext {
            n_legal: state.legal_moves().map(|m| m.len()).unwrap_or(0),
            viewer,
            hand_lens: (0..n).map(|off| state.hands[(viewer + off) % n].len()).collect(),
            strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("no chosen action found in the response")]
    MissingAction,
    #[error("action {action} is outside 0..{n_legal}")]
    ActionOutOfRange { action: i64, n_legal: usize },
    #[error("no parseable JSON object: {0}")]
    MalformedJson(String),
    #[error("move ratings incomplete: {0}")]
    RatingsIncomplete(String),
    #[error("rating {rating} for move {action} is outside [-1, 1]")]
    RatingOutOfRange { action: usize, rating: f64 },
    #[error("bad deduction block: {0}")]
    BadDeduction(String),
}

impl ParseError {
    /// Stable identifier used in logs and retry bookkeeping.
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::MissingAction => "missing_action",
            ParseError::ActionOutOfRange { .. } => "action_out_of_range",
            ParseError::MalformedJson(_) => "malformed_json",
            ParseError::RatingsIncomplete(_) => "ratings_incomplete",
            ParseError::RatingOutOfRange { .. } => "rating_out_of_range",
            ParseError::BadDeduction(_) => "bad_deduction",
        }
    }
}

pub fn parse_agent_response(kind: ScaffoldKind, text: &str, ctx: &ParseContext) -> Result<AgentDecision, ParseError> {
    if kind.json_reply() {
        parse_json_reply(kind, text, ctx)
    } else {
        parse_watson(text, ctx)
    }
}

const CHOSEN: &str = "Chosen Move Number";
const RATINGS: &str = "Move Ratings";

fn leading_int(s: &str) -> Option<(i64, usize)> {
    let s_trim = s.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, ':' | '*' | '[' | '#' | '`' | '"'));
    let skipped = s.len() - s_trim.len();
    let (neg, body) = match s_trim.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s_trim),
    };
    let digits = body.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let v: i64 = body[..digits].parse().ok()?;
    Some((if neg { -v } else { v }, skipped + usize::from(neg) + digits))
}

fn leading_float(s: &str) -> Option<f64> {
    let s = s.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, '*' | '`' | '"'));
    let len = s
        .char_indices()
        .take_while(|&(i, c)| c.is_ascii_digit() || c == '.' || ((c == '-' || c == '+') && i == 0))
        .count();
    s[..len].parse().ok()
}

/// Watson plain-text replies: `Reasoning:`, `Move Ratings:` and `Chosen Move Number:` sections.
pub fn parse_watson(text: &str, ctx: &ParseContext) -> Result<AgentDecision, ParseError> {
    let chosen_at = text.rfind(CHOSEN).ok_or(ParseError::MissingAction)?;
    let (action, _) = leading_int(&text[chosen_at + CHOSEN.len()..]).ok_or(ParseError::MissingAction)?;
    let action = check_action(action, ctx.n_legal)?;

    let ratings_at = text[..chosen_at].rfind(RATINGS);
    let reason_end = ratings_at.unwrap_or(chosen_at);
    let reason = match text[..reason_end].find("Reasoning:") {
        Some(i) => &text[i + "Reasoning:".len()..reason_end],
        None => &text[..reason_end],
    };
    let mut raw = Vec::new();
    if let Some(start) = ratings_at {
        let section = &text[start + RATINGS.len()..chosen_at];
        let mut rest = section;
        while let Some(i) = rest.find("Move") {
            rest = &rest[i + 4..];
            let Some((idx, used)) = leading_int(rest) else { continue };
            let tail = &rest[used..];
            let Some(colon) = tail.find(':') else { break };
            // The label between the index and the colon must stay on one line.
            if tail[..colon].contains('\n') {
                continue;
            }
            if let Some(r) = leading_float(&tail[colon + 1..]) {
                raw.push((idx, r));
            }
            rest = &tail[colon + 1..];
        }
    }
    let (ratings, clamped) = check_ratings(raw, ctx)?;
    Ok(AgentDecision {
        action,
        ratings,
        reason: reason.trim().to_string(),
        deduction: None,
        ratings_clamped: clamped,
    })
}

fn check_action(action: i64, n_legal: usize) -> Result<usize, ParseError> {
    if action < 0 || action as u64 >= n_legal as u64 {
        return Err(ParseError::ActionOutOfRange { action, n_legal });
    }
    Ok(action as usize)
}

fn check_ratings(raw: Vec<(i64, f64)>, ctx: &ParseContext) -> Result<(Vec<MoveRating>, bool), ParseError> {
    if raw.is_empty() {
        return Err(ParseError::RatingsIncomplete("no ratings found".into()));
    }
    let mut seen = alloc::vec![false; ctx.n_legal];
    let mut out = Vec::with_capacity(raw.len());
    let mut clamped = false;
    for (a, r) in raw {
        if a < 0 || a as u64 >= ctx.n_legal as u64 {
            return Err(ParseError::RatingsIncomplete(format!("rating for unknown move {a}")));
        }
        let a = a as usize;
        if core::mem::replace(&mut seen[a], true) {
            return Err(ParseError::RatingsIncomplete(format!("move {a} rated twice")));
        }
        let mut rating = r;
        if !r.is_finite() || !(-1.0..=1.0).contains(&r) {
            if ctx.strict || !r.is_finite() {
                return Err(ParseError::RatingOutOfRange { action: a, rating: r });
            }
            rating = r.clamp(-1.0, 1.0);
            clamped = true;
        }
        out.push(MoveRating { action: a, rating });
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(ParseError::RatingsIncomplete(format!("move {missing} has no rating")));
    }
    out.sort_by_key(|m| m.action);
    Ok((out, clamped))
}

/// End of the brace-balanced span starting at `start`, honouring JSON strings.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_str {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_str = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// The longest brace-balanced substring that parses as a JSON object.
pub(crate) fn extract_json_object(text: &str) -> Option<Map<String, Value>> {
    let bytes = text.as_bytes();
    let mut best: Option<(usize, Map<String, Value>)> = None;
    for start in (0..bytes.len()).filter(|&i| bytes[i] == b'{') {
        let Some(end) = balanced_end(bytes, start) else { continue };
        let len = end - start;
        if best.as_ref().is_some_and(|(l, _)| *l >= len) {
            continue;
        }
        if let Ok(Value::Object(map)) = serde_json::from_str::<Value>(&text[start..end]) {
            best = Some((len, map));
        }
    }
    best.map(|(_, m)| m)
}

fn value_int(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().filter(|&f| f == (f as i64) as f64).map(|f| f as i64)),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn value_float(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn parse_json_reply(kind: ScaffoldKind, text: &str, ctx: &ParseContext) -> Result<AgentDecision, ParseError> {
    let Some(obj) = extract_json_object(text) else {
        return Err(if text.contains('{') {
            ParseError::MalformedJson("no brace-balanced object parses".into())
        } else {
            ParseError::MissingAction
        });
    };
    let action = obj.get("action").ok_or(ParseError::MissingAction)?;
    let action = value_int(action).ok_or(ParseError::MissingAction)?;
    let action = check_action(action, ctx.n_legal)?;

    let mut raw = Vec::new();
    match obj.get("move_ratings") {
        Some(Value::Array(items)) => {
            for item in items {
                let pair = item
                    .get("action")
                    .and_then(value_int)
                    .zip(item.get("rating").and_then(value_float));
                let Some(pair) = pair else {
                    return Err(ParseError::RatingsIncomplete(format!("unreadable rating entry {item}")));
                };
                raw.push(pair);
            }
        }
        Some(Value::Object(map)) => {
            for (k, v) in map {
                let pair = k.trim().parse::<i64>().ok().zip(value_float(v));
                let Some(pair) = pair else {
                    return Err(ParseError::RatingsIncomplete(format!("unreadable rating entry {k}")));
                };
                raw.push(pair);
            }
        }
        _ => return Err(ParseError::RatingsIncomplete("move_ratings missing".into())),
    }
    let (ratings, clamped) = check_ratings(raw, ctx)?;

    let reason = match obj.get("reason") {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => String::new(),
    };
    let deduction = if kind == ScaffoldKind::Mycroft {
        let value = obj
            .get("deduction")
            .ok_or_else(|| ParseError::BadDeduction("deduction missing".into()))?;
        Some(
            DeductionBlock::from_value(value, ctx.viewer, &ctx.hand_lens)
                .map_err(|e| ParseError::BadDeduction(e.to_string()))?,
        )
    } else {
        None
    };
    Ok(AgentDecision { action, ratings, reason, deduction, ratings_clamped: clamped })
}

fn indent_json(text: &str, pad: &str) -> String {
    let mut out = String::new();
    for (i, line) in text.lines().enumerate() {
        if i > 0 {
            out.push('\n');
            out.push_str(pad);
        }
        out.push_str(line);
    }
    out
}

/// Writes a decision back out in the reply shape its scaffold asks for.
pub fn render_response(kind: ScaffoldKind, d: &AgentDecision) -> String {
    if !kind.json_reply() {
        let mut out = format!("Reasoning:\n{}\n\nMove Ratings:\n", d.reason);
        for m in &d.ratings {
            let _ = writeln!(out, "Move {}: {}", m.action, m.rating);
        }
        let _ = write!(out, "\nChosen Move Number: {}", d.action);
        return out;
    }
    let mut out = String::from("{\n  \"move_ratings\": [\n");
    for (i, m) in d.ratings.iter().enumerate() {
        let sep = if i + 1 < d.ratings.len() { "," } else { "" };
        let rating = serde_json::to_string(&m.rating).unwrap_or_else(|_| "0.0".into());
        let _ = writeln!(out, "    {{\"action\": {}, \"rating\": {}}}{sep}", m.action, rating);
    }
    out.push_str("  ],\n");
    if let (ScaffoldKind::Mycroft, Some(block)) = (kind, &d.deduction) {
        let _ = writeln!(out, "  \"deduction\": {},", indent_json(&block.to_prompt_json(), "  "));
    }
    let reason = serde_json::to_string(&d.reason).unwrap_or_else(|_| "\"\"".into());
    let _ = write!(out, "  \"reason\": {reason},\n  \"action\": {}\n}}", d.action);
    out
}
