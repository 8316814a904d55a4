#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::thread;

use hanabi_core::agents::{AgentKind, AgentSpec};
use hanabi_harness::config::{Seeds, SuiteConfig};
use hanabi_harness::transport::HttpSettings;

#[derive(Clone, Debug)]
pub struct Seen {
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Seen {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap()
    }
}

pub struct Reply {
    pub status: u16,
    pub headers: Vec<(&'static str, String)>,
    pub body: String,
}

impl Reply {
    pub fn ok(body: String) -> Reply {
        Reply { status: 200, headers: vec![], body }
    }

    pub fn status(status: u16, body: &str) -> Reply {
        Reply { status, headers: vec![], body: body.into() }
    }
}

/// A one-connection-at-a-time HTTP/1.1 server on localhost.
pub struct MockServer {
    pub url: String,
    pub seen: Arc<Mutex<Vec<Seen>>>,
}

fn read_request(stream: &mut TcpStream) -> Option<Seen> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut line = String::new();
    if reader.read_line(&mut line).ok()? == 0 {
        return None;
    }
    let mut headers = Vec::new();
    loop {
        line.clear();
        reader.read_line(&mut line).ok()?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        let (k, v) = l.split_once(':')?;
        headers.push((k.trim().to_string(), v.trim().to_string()));
    }
    let len: usize = headers
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
        .and_then(|(_, v)| v.parse().ok())
        .unwrap_or(0);
    let mut body = vec![0; len];
    reader.read_exact(&mut body).ok()?;
    Some(Seen { headers, body: String::from_utf8(body).ok()? })
}

impl MockServer {
    pub fn start(handler: impl Fn(&Seen, usize) -> Reply + Send + 'static) -> MockServer {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = seen.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                while let Some(req) = read_request(&mut stream) {
                    let n = {
                        let mut l = log.lock().unwrap();
                        l.push(req.clone());
                        l.len() - 1
                    };
                    let r = handler(&req, n);
                    let mut head = format!(
                        "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\n",
                        r.status,
                        r.body.len()
                    );
                    for (k, v) in &r.headers {
                        head.push_str(&format!("{k}: {v}\r\n"));
                    }
                    head.push_str("\r\n");
                    if stream.write_all(head.as_bytes()).is_err() || stream.write_all(r.body.as_bytes()).is_err() {
                        break;
                    }
                }
            }
        });
        MockServer { url, seen }
    }

    pub fn requests(&self) -> Vec<Seen> {
        self.seen.lock().unwrap().clone()
    }
}

pub fn chat_reply(text: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

/// A Sherlock-style JSON reply choosing move 0 and rating every listed move.
pub fn sherlock_answer(prompt: &str) -> String {
    let n = prompt.matches("'((").count();
    let ratings: Vec<_> = (0..n).map(|a| serde_json::json!({"action": a, "rating": if a == 0 { 0.9 } else { 0.0 }})).collect();
    serde_json::json!({"move_ratings": ratings, "reason": "mock", "action": 0}).to_string()
}

pub fn fast_http(key_env: &str) -> HttpSettings {
    HttpSettings { api_key_env: key_env.into(), timeout_secs: 10, max_attempts: 3, backoff_ms: 1 }
}

pub fn scripted_suite(kind: AgentKind, scaffold: &str, seeds: Vec<u64>, counts: Vec<usize>) -> SuiteConfig {
    SuiteConfig {
        scaffold: scaffold.into(),
        seeds: Seeds::List(seeds),
        player_counts: counts,
        parallelism: 4,
        max_turns: 200,
        clean_watson_system: false,
        agent: AgentSpec::scripted(kind),
        singleton: None,
        http: HttpSettings::default(),
    }
}

pub fn core_fixture(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../hanabi-core/tests/fixtures").join(name);
    std::fs::read_to_string(p).unwrap()
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot(dir: &Path) -> Vec<(std::path::PathBuf, Vec<u8>)> {
    hanabi_harness::runner::list_files(dir)
        .unwrap()
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(dir.join(&p)).unwrap();
            (p, bytes)
        })
        .collect()
}
