mod common;

use std::sync::Arc;

use common::*;
use hanabi_core::agents::{AgentSpec, Completion, CompletionRequest, ReasoningEffort, Sequential};
use hanabi_core::orchestrator::{run_game, validate_trajectory, GameOptions};
use hanabi_core::scaffold::{Prompt, ScaffoldKind};
use hanabi_core::GameConfig;
use hanabi_harness::runner::build_agent;
use hanabi_harness::transport::HttpTransport;

fn request(system: Option<&str>, user: &str) -> CompletionRequest {
    CompletionRequest {
        prompt: Prompt { system: system.map(str::to_string), user: user.into() },
        sample: 0,
        attempt: 1,
        purpose: "decide".into(),
    }
}

#[test]
fn request_carries_messages_options_and_key() {
    let server = MockServer::start(|_, _| Reply::ok(chat_reply("Chosen Move Number: 0")));
    let mut spec = AgentSpec::llm(&server.url, "test-model");
    spec.temperature = Some(0.5);
    spec.reasoning_effort = Some(ReasoningEffort::High);
    spec.extras.insert("thinking".into(), serde_json::json!({"type": "enabled", "budget_tokens": 64}));
    std::env::set_var("HANABI_TEST_KEY_A", "sk-test-123");
    let t = HttpTransport::from_spec(&spec, &fast_http("HANABI_TEST_KEY_A")).unwrap();
    assert!(!format!("{t:?}").contains("sk-test-123"));
    let got = t.complete(&request(Some("sys"), "usr")).unwrap();
    assert_eq!(got.text, "Chosen Move Number: 0");
    let seen = &server.requests()[0];
    assert_eq!(seen.header("authorization"), Some("Bearer sk-test-123"));
    assert_eq!(
        seen.json(),
        serde_json::json!({
            "model": "test-model",
            "messages": [{"role": "system", "content": "sys"}, {"role": "user", "content": "usr"}],
            "temperature": 0.5,
            "reasoning_effort": "high",
            "thinking": {"type": "enabled", "budget_tokens": 64}
        })
    );
}

#[test]
fn missing_key_sends_no_auth_header() {
    let server = MockServer::start(|_, _| Reply::ok(chat_reply("x")));
    let spec = AgentSpec::llm(&server.url, "m");
    let t = HttpTransport::from_spec(&spec, &fast_http("HANABI_TEST_KEY_UNSET_ZZ")).unwrap();
    t.complete(&request(None, "u")).unwrap();
    let seen = &server.requests()[0];
    assert_eq!(seen.header("authorization"), None);
    assert_eq!(seen.json()["messages"].as_array().unwrap().len(), 1);
}

#[test]
fn retries_server_errors_then_succeeds() {
    let server = MockServer::start(|_, n| match n {
        0 => Reply::status(503, "busy"),
        1 => Reply { status: 429, headers: vec![("Retry-After", "0".into())], body: "slow down".into() },
        _ => Reply::ok(chat_reply("fine")),
    });
    let t = HttpTransport::with_key(&AgentSpec::llm(&server.url, "m"), &fast_http("X"), None).unwrap();
    assert_eq!(t.complete(&request(None, "u")).unwrap().text, "fine");
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let server = MockServer::start(|_, _| Reply::status(400, "{\"error\": \"bad\"}"));
    let t = HttpTransport::with_key(&AgentSpec::llm(&server.url, "m"), &fast_http("X"), None).unwrap();
    let e = t.complete(&request(None, "u")).unwrap_err();
    assert!(e.message.contains("HTTP 400"), "{e}");
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn persistent_failure_gives_up_after_max_attempts() {
    let server = MockServer::start(|_, _| Reply::status(500, "down"));
    let t = HttpTransport::with_key(&AgentSpec::llm(&server.url, "m"), &fast_http("X"), None).unwrap();
    assert!(t.complete(&request(None, "u")).is_err());
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    drop(listener);
    let t = HttpTransport::with_key(&AgentSpec::llm(&url, "m"), &fast_http("X"), None).unwrap();
    assert!(t.complete(&request(None, "u")).is_err());
}

#[test]
fn llm_agent_plays_a_game_over_http() {
    let server = MockServer::start(|req, _| {
        let prompt = req.json()["messages"][0]["content"].as_str().unwrap().to_string();
        Reply::ok(chat_reply(&sherlock_answer(&prompt)))
    });
    let agent = build_agent(&AgentSpec::llm(&server.url, "mock-model"), &fast_http("X")).unwrap();
    let cfg = GameConfig::new(2, 5).unwrap();
    let rec = run_game(&[agent.clone(), agent], &cfg, ScaffoldKind::Sherlock, &GameOptions::default()).unwrap();
    assert!(rec.terminal.is_some());
    assert!(rec.turns.iter().all(|t| t.attempts == 1 && !t.fallback && t.move_index == 0));
    assert_eq!(server.requests().len(), rec.turns.len());
    assert_eq!(rec.models, vec![Some("mock-model".to_string()); 2]);
    assert!(validate_trajectory(&rec).is_empty());
}

#[test]
fn transport_failure_aborts_the_game() {
    let server = MockServer::start(|_, _| Reply::status(500, "down"));
    let spec = AgentSpec::llm(&server.url, "m");
    let t = HttpTransport::with_key(&spec, &fast_http("X"), None).unwrap();
    let agent = hanabi_core::agents::LlmAgent::new(spec, Arc::new(t), Arc::new(Sequential)).unwrap();
    let agent: Arc<dyn hanabi_core::agents::Agent> = Arc::new(agent);
    let rec = run_game(&[agent.clone(), agent], &GameConfig::new(2, 1).unwrap(), ScaffoldKind::Watson, &GameOptions::default())
        .unwrap();
    assert!(rec.turns.is_empty());
    assert!(rec.aborted.as_ref().unwrap().reason.contains("unavailable"));
}
