//! Messages-style chat-completion client over HTTP, with status-aware retries.

use std::collections::BTreeMap;
use std::time::Duration;

use hanabi_core::agents::{AgentSpec, Completed, Completion, CompletionRequest, TransportError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

pub const DEFAULT_API_KEY_ENV: &str = "HANABI_API_KEY";

fn default_timeout() -> u64 {
    180
}

fn default_attempts() -> u32 {
    4
}

fn default_backoff() -> u64 {
    500
}

fn default_key_env() -> String {
    DEFAULT_API_KEY_ENV.into()
}

/// Connection settings shared by every LLM seat of a suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpSettings {
    /// Name of the environment variable holding the API key.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// HTTP-level attempts per completion, independent of parse retries.
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
}

impl Default for HttpSettings {
    fn default() -> Self {
        HttpSettings {
            api_key_env: default_key_env(),
            timeout_secs: default_timeout(),
            max_attempts: default_attempts(),
            backoff_ms: default_backoff(),
        }
    }
}

pub struct HttpTransport {
    endpoint: String,
    model: String,
    temperature: Option<f64>,
    reasoning_effort: Option<Value>,
    extras: BTreeMap<String, Value>,
    api_key: Option<String>,
    settings: HttpSettings,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpTransport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpTransport")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<set>"))
            .finish()
    }
}

impl HttpTransport {
    /// Reads the API key from `settings.api_key_env`; a missing variable means no auth header.
    pub fn from_spec(spec: &AgentSpec, settings: &HttpSettings) -> Result<Self, TransportError> {
        let key = std::env::var(&settings.api_key_env).ok().filter(|k| !k.is_empty());
        Self::with_key(spec, settings, key)
    }

    pub fn with_key(spec: &AgentSpec, settings: &HttpSettings, api_key: Option<String>) -> Result<Self, TransportError> {
        let (Some(endpoint), Some(model)) = (&spec.endpoint, &spec.model_name) else {
            return Err(TransportError::new("spec has no endpoint or model name"));
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(settings.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpTransport {
            endpoint: endpoint.clone(),
            model: model.clone(),
            temperature: spec.temperature,
            reasoning_effort: spec.reasoning_effort.map(|e| serde_json::to_value(e).unwrap_or(Value::Null)),
            extras: spec.extras.clone(),
            api_key,
            settings: settings.clone(),
            agent,
        })
    }

    pub fn request_body(&self, req: &CompletionRequest) -> Value {
        let mut messages = Vec::new();
        if let Some(system) = &req.prompt.system {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": req.prompt.user}));
        let mut body = Map::new();
        body.insert("model".into(), Value::String(self.model.clone()));
        body.insert("messages".into(), Value::Array(messages));
        if let Some(t) = self.temperature {
            body.insert("temperature".into(), json!(t));
        }
        if let Some(e) = &self.reasoning_effort {
            body.insert("reasoning_effort".into(), e.clone());
        }
        for (k, v) in &self.extras {
            body.insert(k.clone(), v.clone());
        }
        Value::Object(body)
    }

    fn post_once(&self, body: &Value) -> Result<(u16, Option<u64>, String), ureq::Error> {
        let mut req = self.agent.post(&self.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body)?;
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok());
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string()?;
        Ok((status, retry_after, text))
    }

    fn backoff(&self, attempt: u32, retry_after: Option<u64>) -> Duration {
        let exp = self.settings.backoff_ms.saturating_mul(1u64 << attempt.min(6));
        let wait = retry_after.map(|s| s.saturating_mul(1000)).unwrap_or(0).max(exp);
        Duration::from_millis(wait.min(60_000))
    }
}

fn retryable(status: u16) -> bool {
    status == 408 || status == 429 || status >= 500
}

fn text_of(content: &Value) -> Option<String> {
    match content {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => {
            let texts: Vec<&str> = parts
                .iter()
                .filter(|p| p.get("type").and_then(Value::as_str).is_none_or(|t| t == "text"))
                .filter_map(|p| p.get("text").and_then(Value::as_str))
                .collect();
            (!texts.is_empty()).then(|| texts.concat())
        }
        _ => None,
    }
}

/// Extracts the reply from an OpenAI-style `choices` body or a messages-style `content` array.
pub fn parse_completion(body: &Value) -> Result<Completed, TransportError> {
    if let Some(err) = body.get("error") {
        return Err(TransportError::new(format!("provider error: {err}")));
    }
    if let Some(message) = body.pointer("/choices/0/message") {
        let text = message.get("content").and_then(text_of).unwrap_or_default();
        let reasoning = ["reasoning_content", "reasoning"]
            .iter()
            .find_map(|k| message.get(*k).and_then(Value::as_str))
            .map(str::to_string);
        if text.is_empty() && reasoning.is_none() {
            return Err(TransportError::new("empty completion"));
        }
        return Ok(Completed { text, reasoning });
    }
    if let Some(content) = body.get("content") {
        let text = text_of(content).ok_or_else(|| TransportError::new("no text block in content"))?;
        let thinking: Vec<&str> = content
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|p| p.get("thinking").and_then(Value::as_str))
            .collect();
        return Ok(Completed { text, reasoning: (!thinking.is_empty()).then(|| thinking.join("\n")) });
    }
    Err(TransportError::new("unrecognised completion body"))
}

impl Completion for HttpTransport {
    fn complete(&self, req: &CompletionRequest) -> Result<Completed, TransportError> {
        let body = self.request_body(req);
        let attempts = self.settings.max_attempts.max(1);
        let mut last = String::new();
        let mut hint = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.backoff(attempt - 1, hint.take()));
            }
            match self.post_once(&body) {
                Ok((200..=299, _, text)) => {
                    let v: Value = serde_json::from_str(&text)
                        .map_err(|e| TransportError::new(format!("response is not JSON: {e}")))?;
                    return parse_completion(&v);
                }
                Ok((status, retry_after, text)) => {
                    last = format!("HTTP {status}: {}", text.chars().take(300).collect::<String>());
                    if !retryable(status) {
                        break;
                    }
                    hint = retry_after;
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(TransportError::new(last))
    }
}
