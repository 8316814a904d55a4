//! Agents: offline scripted baselines and LLM-backed agents over a generic
//! completion contract, with retries, Best-of-K and the mixture pipeline.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::engine::{GameState, Move};
use crate::scaffold::{
    render_prompt_with, render_response, AgentDecision, MoveRating, Prompt, RenderOptions, ScaffoldError,
    ScaffoldKind, TurnMemory,
};

mod llm;
mod scripted;

pub use llm::{best_of_k, decide_llm, mixture_of_agents, LlmAgent, MixtureMember};
pub use scripted::{scripted_greedy, RandomLegal, ScriptedGreedy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentKind {
    Llm,
    RandomLegal,
    ScriptedGreedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Fallback {
    #[default]
    SafestDiscard,
    AbortGame,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasoningEffort {
    Low,
    Medium,
    High,
}

fn default_retries() -> u32 {
    3
}

fn default_k() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub kind: AgentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_effort: Option<ReasoningEffort>,
    /// Re-asks after the first attempt.
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub fallback: Fallback,
    /// Samples per decision; 1 disables Best-of-K.
    #[serde(default = "default_k")]
    pub best_of_k: u32,
    /// Always consult the selector, even when every sample agrees.
    #[serde(default)]
    pub strict_best_of_k: bool,
    /// Run the six-role mixture instead of a single call.
    #[serde(default)]
    pub mixture: bool,
    /// Reject out-of-range ratings instead of clamping them.
    #[serde(default)]
    pub strict_ratings: bool,
    /// Provider-specific request fields passed through untouched.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("LLM agents need both an endpoint and a model name")]
    MissingEndpoint,
    #[error("scripted agents take no endpoint or model name")]
    UnexpectedEndpoint,
    #[error("best_of_k must be at least 1")]
    ZeroK,
    #[error("{0}")]
    Invalid(String),
}

impl AgentSpec {
    pub fn scripted(kind: AgentKind) -> AgentSpec {
        AgentSpec {
            kind,
            endpoint: None,
            model_name: None,
            temperature: None,
            reasoning_effort: None,
            max_retries: default_retries(),
            fallback: Fallback::SafestDiscard,
            best_of_k: 1,
            strict_best_of_k: false,
            mixture: false,
            strict_ratings: false,
            extras: BTreeMap::new(),
        }
    }

    pub fn llm(endpoint: &str, model: &str) -> AgentSpec {
        AgentSpec {
            endpoint: Some(endpoint.into()),
            model_name: Some(model.into()),
            ..AgentSpec::scripted(AgentKind::Llm)
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        match self.kind {
            AgentKind::Llm if self.endpoint.is_none() || self.model_name.is_none() => Err(SpecError::MissingEndpoint),
            AgentKind::RandomLegal | AgentKind::ScriptedGreedy
                if self.endpoint.is_some() || self.model_name.is_some() =>
            {
                Err(SpecError::UnexpectedEndpoint)
            }
            _ if self.best_of_k == 0 => Err(SpecError::ZeroK),
            _ if self.mixture && self.best_of_k > 1 => {
                Err(SpecError::Invalid("best_of_k and mixture cannot be combined".into()))
            }
            _ => Ok(()),
        }
    }

    /// Short human-readable label, e.g. `llm:gpt-x` or `scripted-greedy`.
    pub fn label(&self) -> String {
        let base = match self.kind {
            AgentKind::Llm => format!("llm:{}", self.model_name.as_deref().unwrap_or("?")),
            AgentKind::RandomLegal => "random-legal".into(),
            AgentKind::ScriptedGreedy => "scripted-greedy".into(),
        };
        if self.mixture {
            format!("{base}+moa")
        } else if self.best_of_k > 1 {
            format!("{base}+bo{}", self.best_of_k)
        } else {
            base
        }
    }
}

/// A single chat-completion request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: Prompt,
    /// Distinguishes independent samples of the same prompt.
    pub sample: u32,
    /// 1 for the first ask, incremented on each retry.
    pub attempt: u32,
    /// What the call is for, e.g. `decide`, `sample`, `selector`, `Analyst`.
    pub purpose: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Completed {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("transport error: {message}")]
pub struct TransportError {
    pub message: String,
}

impl TransportError {
    pub fn new(message: impl Into<String>) -> Self {
        TransportError { message: message.into() }
    }
}

/// The chat-completion contract an LLM agent talks to.
pub trait Completion: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<Completed, TransportError>;
}

impl<F> Completion for F
where
    F: Fn(&CompletionRequest) -> Result<Completed, TransportError> + Send + Sync,
{
    fn complete(&self, req: &CompletionRequest) -> Result<Completed, TransportError> {
        self(req)
    }
}

/// Runs independent jobs, possibly concurrently. Each job writes its own result slot.
pub trait Fanout: Send + Sync {
    fn run<'a>(&self, jobs: Vec<Box<dyn FnOnce() + Send + 'a>>);
}

/// Runs jobs one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Fanout for Sequential {
    fn run<'a>(&self, jobs: Vec<Box<dyn FnOnce() + Send + 'a>>) {
        for job in jobs {
            job();
        }
    }
}

/// One completion call made while reaching a decision, kept for the turn log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubCall {
    pub purpose: String,
    pub prompt: Prompt,
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Everything an agent needs for one decision.
#[derive(Clone, Copy, Debug)]
pub struct TurnContext<'a> {
    pub kind: ScaffoldKind,
    pub state: &'a GameState,
    pub viewer: usize,
    pub memory: Option<&'a TurnMemory>,
    pub render: RenderOptions,
}

impl TurnContext<'_> {
    pub fn legal(&self) -> Result<Vec<Move>, AgentError> {
        Ok(self.state.legal_moves().map_err(ScaffoldError::from)?)
    }

    pub fn prompt(&self) -> Result<Prompt, AgentError> {
        Ok(render_prompt_with(self.kind, self.state, self.viewer, self.memory, &self.render)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentReply {
    /// The prompt of the call whose reply decided the move.
    pub prompt: Prompt,
    pub raw_response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    pub decision: AgentDecision,
    pub attempts: u32,
    /// The decision came from the fallback rule, not from the agent.
    #[serde(default)]
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parse_errors: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sub_calls: Vec<SubCall>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("agent unavailable: {0}")]
    Unavailable(String),
    #[error("game aborted: {0}")]
    Abort(String),
    #[error(transparent)]
    Scaffold(#[from] ScaffoldError),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

pub trait Agent: Send + Sync {
    fn spec(&self) -> &AgentSpec;

    fn decide(&self, ctx: &TurnContext<'_>) -> Result<AgentReply, AgentError>;

    fn label(&self) -> String {
        self.spec().label()
    }
}

/// Builds the scripted agent for a spec; LLM specs need a transport and go through [`LlmAgent`].
pub fn scripted_agent(spec: &AgentSpec) -> Result<Arc<dyn Agent>, SpecError> {
    spec.validate()?;
    match spec.kind {
        AgentKind::ScriptedGreedy => Ok(Arc::new(ScriptedGreedy::new(spec.clone()))),
        AgentKind::RandomLegal => Ok(Arc::new(RandomLegal::new(spec.clone()))),
        AgentKind::Llm => Err(SpecError::Invalid("LLM agents need a transport".into())),
    }
}

/// Lowest-index discard, or the first legal move when discarding is not allowed.
pub fn safest_discard(legal: &[Move]) -> usize {
    legal.iter().position(|m| matches!(m, Move::Discard { .. })).unwrap_or(0)
}

/// A decision that rates the chosen move 1 and everything else 0.
pub(crate) fn flat_decision(action: usize, n_legal: usize, reason: String) -> AgentDecision {
    AgentDecision {
        action,
        ratings: (0..n_legal)
            .map(|a| MoveRating { action: a, rating: if a == action { 1.0 } else { 0.0 } })
            .collect(),
        reason,
        deduction: None,
        ratings_clamped: false,
    }
}

/// Wraps a locally computed decision in a reply whose response text is the scaffold's
/// reply shape, so logs of scripted games parse like real ones.
pub(crate) fn local_reply(ctx: &TurnContext<'_>, mut decision: AgentDecision) -> Result<AgentReply, AgentError> {
    if ctx.kind == ScaffoldKind::Mycroft {
        decision.deduction = Some(crate::judge::deduction_from_state(ctx.state, ctx.viewer));
    }
    let prompt = ctx.prompt()?;
    Ok(AgentReply {
        prompt,
        raw_response: render_response(ctx.kind, &decision),
        reasoning: None,
        decision,
        attempts: 1,
        fallback: false,
        parse_errors: Vec::new(),
        sub_calls: Vec::new(),
    })
}

pub(crate) fn fallback_decision(legal: &[Move], why: &str) -> AgentDecision {
    let action = safest_discard(legal);
    let mut d = flat_decision(action, legal.len(), format!("fallback after failed attempts: {why}"));
    for r in &mut d.ratings {
        r.rating = 0.0;
    }
    d
}

pub(crate) fn to_string_err(e: impl core::fmt::Display) -> String {
    e.to_string()
}
