mod common;

use std::io::Cursor;

use hanabi_core::agents::{AgentKind, AgentSpec};
use hanabi_core::orchestrator::{run_game, GameOptions, GameRecord};
use hanabi_core::scaffold::ScaffoldKind;
use hanabi_core::GameConfig;
use hanabi_harness::datasets::*;
use hanabi_harness::runner::build_agent;
use hanabi_harness::transport::HttpSettings;

fn game(kind: AgentKind, scaffold: ScaffoldKind, n: usize, seed: u64) -> GameRecord {
    let a = build_agent(&AgentSpec::scripted(kind), &HttpSettings::default()).unwrap();
    run_game(&vec![a; n], &GameConfig::new(n, seed).unwrap(), scaffold, &GameOptions::default()).unwrap()
}

fn export_string(records: &[GameRecord], which: Dataset, opts: ExportOptions) -> (String, DatasetManifest) {
    let mut buf = Vec::new();
    let m = export(records, which, opts, &mut buf).unwrap();
    (String::from_utf8(buf).unwrap(), m)
}

#[test]
fn one_logs_line_per_turn() {
    let g = game(AgentKind::ScriptedGreedy, ScaffoldKind::Sherlock, 2, 1);
    let (text, m) = export_string(std::slice::from_ref(&g), Dataset::HanabiLogs, ExportOptions::default());
    let recs = import_logs(Cursor::new(&text)).unwrap();
    assert_eq!(recs.len(), g.turns.len());
    assert_eq!(m.lines, g.turns.len());
    for (r, t) in recs.iter().zip(&g.turns) {
        assert_eq!(r.prompt, t.prompt);
        assert_eq!(r.response, t.raw_response);
        assert_eq!((r.turn_index, r.player, r.n_players, r.seed), (t.turn_index, t.player, 2, 1));
        assert_eq!(r.game_id, g.game_id);
        assert_eq!(r.model, None);
    }
}

#[test]
fn import_then_export_is_byte_stable() {
    let games: Vec<_> = [(2, 3), (4, 5)].iter().map(|&(n, s)| game(AgentKind::RandomLegal, ScaffoldKind::Watson, n, s)).collect();
    for which in [Dataset::HanabiLogs, Dataset::HanabiRewards] {
        let (text, _) = export_string(&games, which, ExportOptions::default());
        let mut again = Vec::new();
        match which {
            Dataset::HanabiLogs => write_lines(&import_logs(Cursor::new(&text)).unwrap(), &mut again).unwrap(),
            Dataset::HanabiRewards => write_lines(&import_rewards(Cursor::new(&text)).unwrap(), &mut again).unwrap(),
        }
        assert_eq!(String::from_utf8(again).unwrap(), text);
        assert_eq!(export_string(&games, which, ExportOptions::default()).0, text);
    }
}

#[test]
fn rewards_lines_rate_every_move_and_the_choice() {
    let games: Vec<_> = (1..=4).map(|s| game(AgentKind::ScriptedGreedy, ScaffoldKind::Mycroft, s as usize + 1, s)).collect();
    let (text, m) = export_string(&games, Dataset::HanabiRewards, ExportOptions::default());
    let recs = import_rewards(Cursor::new(&text)).unwrap();
    assert_eq!(recs.len(), games.iter().map(|g| g.turns.len()).sum::<usize>());
    assert_eq!(m.excluded(), 0);
    for r in &recs {
        let mut rated: Vec<_> = r.ratings.iter().map(|x| x.action).collect();
        rated.sort_unstable();
        assert_eq!(rated, (0..r.legal_moves.len()).collect::<Vec<_>>());
        assert!(rated.contains(&r.action));
    }
}

#[test]
fn clamped_ratings_leave_rewards_only_in_strict_mode() {
    let mut g = game(AgentKind::ScriptedGreedy, ScaffoldKind::Sherlock, 3, 2);
    g.turns[4].decision.ratings_clamped = true;
    g.turns[7].fallback = true;
    let turns = g.turns.len();
    let (_, lax) = export_string(std::slice::from_ref(&g), Dataset::HanabiRewards, ExportOptions::default());
    assert_eq!(lax.lines, turns - 1);
    assert_eq!(lax.excluded_turns.get("fallback"), Some(&1));
    let (text, strict) = export_string(std::slice::from_ref(&g), Dataset::HanabiRewards, ExportOptions { strict_ratings: true });
    assert_eq!(strict.lines, turns - 2);
    assert_eq!(strict.excluded_turns.get("clamped_ratings"), Some(&1));
    assert_eq!(strict.excluded(), 2);
    assert!(import_rewards(Cursor::new(&text)).unwrap().iter().all(|r| r.log.turn_index != 4 && r.log.turn_index != 7));
    let (_, logs) = export_string(std::slice::from_ref(&g), Dataset::HanabiLogs, ExportOptions { strict_ratings: true });
    assert_eq!(logs.lines, turns);
}

#[test]
fn games_that_do_not_replay_are_refused() {
    let good = game(AgentKind::ScriptedGreedy, ScaffoldKind::Watson, 2, 7);
    let mut bad = game(AgentKind::ScriptedGreedy, ScaffoldKind::Watson, 3, 7);
    bad.turns[2].post_state_hash = "0".repeat(64);
    let (text, m) = export_string(&[good.clone(), bad.clone()], Dataset::HanabiLogs, ExportOptions::default());
    assert_eq!(m.games, 1);
    assert_eq!(m.refused_games.len(), 1);
    assert_eq!(m.refused_games[0].game_id, bad.game_id);
    assert_eq!(m.lines, good.turns.len());
    assert!(!text.contains(&bad.game_id));
}

#[test]
fn manifest_summarises_counts_and_scores() {
    let games: Vec<_> = [2, 2, 3, 5].iter().enumerate().map(|(i, &n)| game(AgentKind::ScriptedGreedy, ScaffoldKind::Watson, n, i as u64 + 1)).collect();
    let (_, m) = export_string(&games, Dataset::HanabiLogs, ExportOptions::default());
    assert_eq!(m.schema, DATASET_SCHEMA);
    assert_eq!(m.games, 4);
    assert_eq!(m.player_count_histogram.iter().map(|(k, v)| (*k, *v)).collect::<Vec<_>>(), vec![(2, 2), (3, 1), (5, 1)]);
    assert_eq!(m.score_distribution.values().sum::<usize>(), 4);
    for g in &games {
        assert!(m.score_distribution.contains_key(&g.final_score));
    }
}

#[test]
fn export_to_path_writes_manifest_alongside() {
    let g = game(AgentKind::ScriptedGreedy, ScaffoldKind::Watson, 2, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("logs.jsonl");
    let m = export_to_path([&g], Dataset::HanabiLogs, ExportOptions::default(), &path).unwrap();
    let back: DatasetManifest = serde_json::from_str(&std::fs::read_to_string(manifest_path(&path)).unwrap()).unwrap();
    assert_eq!(back, m);
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), g.turns.len());
}

#[test]
fn validation_rejects_malformed_lines() {
    let g = game(AgentKind::ScriptedGreedy, ScaffoldKind::Sherlock, 2, 3);
    let (text, _) = export_string(std::slice::from_ref(&g), Dataset::HanabiRewards, ExportOptions::default());
    let line = text.lines().next().unwrap().to_string();
    assert!(validate_rewards_line(&line, 1).is_ok());
    let mut v: serde_json::Value = serde_json::from_str(&line).unwrap();

    let mut extra = v.clone();
    extra["surprise"] = 1.into();
    let mut out_of_range = v.clone();
    out_of_range["ratings"][0]["rating"] = 1.5.into();
    let mut missing = v.clone();
    missing["ratings"].as_array_mut().unwrap().pop();
    let mut bad_action = v.clone();
    bad_action["action"] = 99.into();
    let mut bad_player = v.clone();
    bad_player["player"] = 2.into();
    for bad in [extra, out_of_range, missing, bad_action, bad_player] {
        let s = serde_json::to_string(&bad).unwrap();
        assert!(validate_rewards_line(&s, 3).is_err(), "{s}");
    }
    assert!(validate_rewards_line("{not json", 1).is_err());
    // Pretty-printed or reordered lines are not canonical.
    v.as_object_mut().unwrap().remove("game_id");
    assert!(validate_rewards_line(&serde_json::to_string_pretty(&v).unwrap(), 1).is_err());
    assert!(validate_logs_line(&line, 1).is_err());
}
