mod common;

use common::*;
use hanabi_core::beliefs::{CardKnowledge, DeductionBlock};
use hanabi_core::judge::{
    actions_digest, build_judge_prompt, deduction_from_state, oracle_deduction_from, parse_judge_response,
    score_deduction, score_deduction_since, ScoreSource,
};

#[test]
fn digest_lists_moves_since_the_viewers_turn() {
    let (start, moves) = five_player_game_a();
    let end = replay(&start, &moves);
    assert_eq!(
        actions_digest(&end, 1),
        "- Player 2: (Discard 0) | Fireworks: R0 Y2 G1 W0 B1 | Info tokens: 5
- Player 3: (Reveal player +1 color W) | Fireworks: R0 Y2 G1 W0 B1 | Info tokens: 4
- Player 4: (Reveal player +3 color B) | Fireworks: R0 Y2 G1 W0 B1 | Info tokens: 3
- Player 0: (Reveal player +1 color R) | Fireworks: R0 Y2 G1 W0 B1 | Info tokens: 2"
    );
    let (start, moves) = five_player_game_b();
    let end = replay(&start, &moves);
    assert_eq!(
        actions_digest(&end, 2),
        "- Player 3: (Reveal player +3 color G) | Fireworks: R0 Y1 G0 W0 B1 | Info tokens: 3
- Player 4: (Reveal player +2 rank 1) | Fireworks: R0 Y1 G0 W0 B1 | Info tokens: 2
- Player 0: (Reveal player +3 rank 1) | Fireworks: R0 Y1 G0 W0 B1 | Info tokens: 1
- Player 1: (Play 0) | Fireworks: R0 Y1 G1 W0 B1 | Info tokens: 1"
    );
}

#[test]
fn judge_prompt_carries_state_and_oracle() {
    let (start, moves) = five_player_game_a();
    let end = replay(&start, &moves);
    let oracle = oracle_deduction_from(&start, &moves, 1).unwrap();
    let p = build_judge_prompt(&end, 1, "MODEL INPUT", "MODEL OUTPUT", &oracle);
    assert!(p.contains("CURRENT PLAYER: Player 1"));
    assert!(p.contains(
        "- A card: You can see the card: 'B2', This player knows color is Blue, This player knows it could be any of these colors: Blue with ranks: 1, 2, 3, 4, 5."
    ));
    assert!(p.contains("Player +4's hand:\n- A card: You can see the card: 'R2'"));
    assert!(p.contains("There are 24 cards remaining in the deck. The discard pile contains: 1 red card rank 4, 1 yellow card rank 3."));
    assert!(p.contains(&format!("the game rules and history:\n\n{}", fixture("oracle_viewer_p1.json").trim_end())));
    assert!(p.contains("=== MODEL INPUT (CURRENT TURN PROMPT) ===\n\nNote:"));
    assert!(p.contains("\n\nMODEL OUTPUT\n\n"));
    assert!(!p.contains("{{"));
}

#[test]
fn judge_state_lists_hints_on_others() {
    let (start, moves) = five_player_game_b();
    let end = replay(&start, &moves);
    let p = build_judge_prompt(&end, 2, "in", "out", &oracle_deduction_from(&start, &moves, 2).unwrap());
    assert!(p.contains(
        "- A card: You can see the card: 'B5', This player knows color is Blue, This player knows it could be any of these colors: Blue with ranks: 2, 3, 4, 5."
    ));
    assert!(p.contains(
        "- A card: You can see the card: 'G1', This player knows rank is 1, This player knows it could be any of these colors: Red, Yellow, Green, White with ranks: 1."
    ));
    assert!(p.contains("There are 27 cards remaining in the deck. The discard pile contains: no cards discarded yet."));
}

#[test]
fn exact_deduction_scores_one() {
    let (start, moves) = five_player_game_b();
    let oracle = oracle_deduction_from(&start, &moves, 2).unwrap();
    let s = score_deduction(&oracle, &oracle).unwrap();
    assert_eq!(s.source, ScoreSource::Structural);
    assert_eq!((s.overall_rating, s.deduction_accuracy, s.state_tracking_quality), (1.0, 1.0, 1.0));
    assert!(s.key_issues.is_empty());
}

#[test]
fn forgotten_rank_hints_lower_the_score() {
    // The judge example: player+2's rank information was lost.
    let (start, moves) = five_player_game_b();
    let oracle = oracle_deduction_from(&start, &moves, 2).unwrap();
    let mut predicted = oracle.clone();
    for k in predicted.hands[2].iter_mut().take(3) {
        k.ranks = CardKnowledge::unknown().ranks;
    }
    let s = score_deduction(&predicted, &oracle).unwrap();
    assert_eq!(s.key_issues.len(), 3);
    assert!(s.deduction_accuracy < 1.0 && s.deduction_accuracy > 0.8);
    assert_eq!(s.state_tracking_quality, 1.0);
    assert!(s.key_issues[0].starts_with("player+2 card0"));
}

#[test]
fn history_score_covers_changed_cards_only() {
    let (start, moves) = five_player_game_b();
    let before = oracle_deduction_from(&start, &moves[..5], 2).unwrap();
    let now = oracle_deduction_from(&start, &moves, 2).unwrap();
    // A model that never updates from its previous view.
    let mut stale = before.clone();
    for (h, n) in stale.hands.iter_mut().zip(&now.hands) {
        h.resize(n.len(), CardKnowledge::unknown());
    }
    let s = score_deduction_since(&stale, &now, Some(&before)).unwrap();
    assert!(s.history_integration < s.deduction_accuracy);
}

#[test]
fn mismatched_rosters_are_rejected() {
    let (start, moves) = five_player_game_b();
    let a = oracle_deduction_from(&start, &moves, 2).unwrap();
    let b = DeductionBlock { viewer: 1, hands: a.hands.clone() };
    assert!(score_deduction(&a, &b).is_err());
    let end = replay(&start, &moves);
    assert_eq!(deduction_from_state(&end, 2), a);
}

#[test]
fn judge_reply_in_a_code_fence() {
    let text = format!("Here you go:\n```json\n{}\n```", fixture("judge_response.json"));
    assert_eq!(parse_judge_response(&text).unwrap().overall_rating, 0.8);
    assert!(parse_judge_response("{\"overall_rating\": 1.4}").is_err());
    assert!(parse_judge_response("no json").is_err());
}
