use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::engine::{GameState, Move};
use crate::scaffold::moa::{self, RoleKind};
use crate::scaffold::{best_of_k_prompt, parse_agent_response, ParseContext, Prompt, ScaffoldKind};

use super::{
    fallback_decision, to_string_err, Agent, AgentError, AgentReply, AgentSpec, Completion, CompletionRequest,
    Fallback, Fanout, SpecError, SubCall, TurnContext,
};

/// One prompt, parsed with retries. Transport errors and unparseable replies both use up an
/// attempt; when every attempt fails the spec's fallback decides.
#[allow(clippy::too_many_arguments)]
pub fn decide_llm(
    spec: &AgentSpec,
    transport: &dyn Completion,
    prompt: &Prompt,
    reply_kind: ScaffoldKind,
    pctx: &ParseContext,
    legal: &[Move],
    sample: u32,
    purpose: &str,
) -> Result<AgentReply, AgentError> {
    let mut errors = Vec::new();
    let mut last_raw: Option<String> = None;
    let mut transport_failed_last = false;
    let attempts = spec.max_retries + 1;
    for attempt in 1..=attempts {
        let req = CompletionRequest { prompt: prompt.clone(), sample, attempt, purpose: purpose.into() };
        match transport.complete(&req) {
            Err(e) => {
                transport_failed_last = true;
                errors.push(format!("attempt {attempt}: {e}"));
            }
            Ok(done) => {
                transport_failed_last = false;
                match parse_agent_response(reply_kind, &done.text, pctx) {
                    Ok(decision) => {
                        return Ok(AgentReply {
                            prompt: prompt.clone(),
                            raw_response: done.text,
                            reasoning: done.reasoning,
                            decision,
                            attempts: attempt,
                            fallback: false,
                            parse_errors: errors,
                            sub_calls: Vec::new(),
                        })
                    }
                    Err(e) => {
                        errors.push(format!("attempt {attempt}: {}: {e}", e.code()));
                        last_raw = Some(done.text);
                    }
                }
            }
        }
    }
    let why = errors.last().cloned().unwrap_or_default();
    if transport_failed_last && last_raw.is_none() {
        return Err(AgentError::Unavailable(why));
    }
    match spec.fallback {
        Fallback::AbortGame => Err(AgentError::Abort(why)),
        Fallback::SafestDiscard => Ok(AgentReply {
            prompt: prompt.clone(),
            raw_response: last_raw.unwrap_or_default(),
            reasoning: None,
            decision: fallback_decision(legal, &why),
            attempts,
            fallback: true,
            parse_errors: errors,
            sub_calls: Vec::new(),
        }),
    }
}

fn sub_call(purpose: String, r: &AgentReply) -> SubCall {
    SubCall { purpose, prompt: r.prompt.clone(), response: Some(r.raw_response.clone()), error: None }
}

/// Draws `k` samples; unanimous samples short-circuit unless `strict_best_of_k` is set,
/// otherwise a selector call picks among them.
#[allow(clippy::too_many_arguments)]
pub fn best_of_k(
    spec: &AgentSpec,
    transport: &dyn Completion,
    fanout: &dyn Fanout,
    base: &Prompt,
    kind: ScaffoldKind,
    pctx: &ParseContext,
    legal: &[Move],
    k: u32,
) -> Result<AgentReply, AgentError> {
    if k == 0 {
        return Err(SpecError::ZeroK.into());
    }
    if k == 1 {
        return decide_llm(spec, transport, base, kind, pctx, legal, 0, "decide");
    }
    let mut slots: Vec<Option<Result<AgentReply, AgentError>>> = (0..k).map(|_| None).collect();
    let jobs: Vec<Box<dyn FnOnce() + Send + '_>> = slots
        .iter_mut()
        .enumerate()
        .map(|(i, slot)| {
            Box::new(move || {
                *slot = Some(decide_llm(spec, transport, base, kind, pctx, legal, i as u32, "sample"));
            }) as Box<dyn FnOnce() + Send + '_>
        })
        .collect();
    fanout.run(jobs);
    let samples = slots
        .into_iter()
        .map(|s| s.unwrap_or_else(|| Err(AgentError::Unavailable("sample job did not run".into()))))
        .collect::<Result<Vec<_>, _>>()?;
    let calls: Vec<SubCall> = samples.iter().enumerate().map(|(i, r)| sub_call(format!("sample {}", i + 1), r)).collect();
    let first = samples[0].decision.action;
    let unanimous = samples.iter().all(|r| !r.fallback && r.decision.action == first);
    if unanimous && !spec.strict_best_of_k {
        let mut reply = samples.into_iter().next().expect("k >= 2");
        reply.attempts = calls.len() as u32;
        reply.sub_calls = calls;
        return Ok(reply);
    }
    let raws: Vec<String> = samples.iter().map(|r| r.raw_response.clone()).collect();
    let selector = best_of_k_prompt(base, &raws);
    let mut reply = decide_llm(spec, transport, &selector, kind, pctx, legal, 0, "selector")?;
    reply.sub_calls = calls;
    Ok(reply)
}

/// One seat in a mixture: the role it plays and the model behind it.
#[derive(Clone, Copy)]
pub struct MixtureMember<'a> {
    pub role: RoleKind,
    pub spec: &'a AgentSpec,
    pub transport: &'a dyn Completion,
}

fn check_roles(members: &[MixtureMember<'_>], n_players: usize) -> Result<(), SpecError> {
    let aggregators = members.iter().filter(|m| m.role == RoleKind::Aggregator).count();
    if aggregators != 1 {
        return Err(SpecError::Invalid(format!("a mixture needs exactly one aggregator, found {aggregators}")));
    }
    let mut roles: Vec<RoleKind> = members.iter().map(|m| m.role).filter(|&r| r != RoleKind::Aggregator).collect();
    roles.sort();
    if roles != RoleKind::specialists(n_players) {
        return Err(SpecError::Invalid(format!("{n_players}-player mixture has specialists {roles:?}")));
    }
    Ok(())
}

/// Specialists run through `fanout`, then the aggregator decides. A specialist that cannot be
/// reached after its retries is reported to the aggregator as unavailable.
pub fn mixture_of_agents(
    members: &[MixtureMember<'_>],
    fanout: &dyn Fanout,
    kind: ScaffoldKind,
    state: &GameState,
    viewer: usize,
    pctx: &ParseContext,
) -> Result<AgentReply, AgentError> {
    check_roles(members, state.n_players())?;
    let legal = state.legal_moves().map_err(crate::scaffold::ScaffoldError::from)?;
    let mut specialists: Vec<MixtureMember<'_>> =
        members.iter().copied().filter(|m| m.role != RoleKind::Aggregator).collect();
    specialists.sort_by_key(|m| m.role);
    let aggregator = members.iter().find(|m| m.role == RoleKind::Aggregator).expect("checked");

    let prompts = specialists
        .iter()
        .map(|m| moa::specialist_prompt(kind, m.role, state, viewer))
        .collect::<Result<Vec<_>, _>>()?;
    let mut slots: Vec<Option<Result<String, String>>> = specialists.iter().map(|_| None).collect();
    let jobs: Vec<Box<dyn FnOnce() + Send + '_>> = slots
        .iter_mut()
        .zip(specialists.iter().zip(&prompts))
        .map(|(slot, (m, prompt))| {
            Box::new(move || {
                let mut last = String::new();
                for attempt in 1..=m.spec.max_retries + 1 {
                    let req = CompletionRequest {
                        prompt: prompt.clone(),
                        sample: 0,
                        attempt,
                        purpose: m.role.label().into(),
                    };
                    match m.transport.complete(&req) {
                        Ok(done) => {
                            *slot = Some(Ok(done.text));
                            return;
                        }
                        Err(e) => last = to_string_err(e),
                    }
                }
                *slot = Some(Err(last));
            }) as Box<dyn FnOnce() + Send + '_>
        })
        .collect();
    fanout.run(jobs);

    let mut reports = Vec::with_capacity(specialists.len());
    let mut calls = Vec::with_capacity(specialists.len());
    for ((m, prompt), slot) in specialists.iter().zip(prompts).zip(slots) {
        let result = slot.unwrap_or_else(|| Err("specialist job did not run".into()));
        let (text, call) = match result {
            Ok(text) => (text.clone(), SubCall { purpose: m.role.label().into(), prompt, response: Some(text), error: None }),
            Err(e) => (
                moa::unavailable_stub(&e),
                SubCall { purpose: m.role.label().into(), prompt, response: None, error: Some(e) },
            ),
        };
        reports.push((m.role, text));
        calls.push(call);
    }
    let agg_prompt = moa::aggregator_prompt(kind, state, viewer, &reports)?;
    let reply_kind = moa::aggregator_reply_kind(kind);
    let mut reply =
        decide_llm(aggregator.spec, aggregator.transport, &agg_prompt, reply_kind, pctx, &legal, 0, "aggregator")?;
    reply.sub_calls = calls;
    Ok(reply)
}

/// An LLM-backed seat: plain, Best-of-K or mixture depending on its spec.
#[derive(Clone)]
pub struct LlmAgent {
    spec: AgentSpec,
    transport: Arc<dyn Completion>,
    fanout: Arc<dyn Fanout>,
}

impl LlmAgent {
    pub fn new(spec: AgentSpec, transport: Arc<dyn Completion>, fanout: Arc<dyn Fanout>) -> Result<Self, SpecError> {
        spec.validate()?;
        if spec.kind != super::AgentKind::Llm {
            return Err(SpecError::Invalid("LlmAgent needs an Llm spec".into()));
        }
        Ok(LlmAgent { spec, transport, fanout })
    }
}

impl Agent for LlmAgent {
    fn spec(&self) -> &AgentSpec {
        &self.spec
    }

    fn decide(&self, ctx: &TurnContext<'_>) -> Result<AgentReply, AgentError> {
        let legal = ctx.legal()?;
        let pctx = ParseContext::for_state(ctx.state, ctx.viewer, self.spec.strict_ratings);
        if self.spec.mixture {
            let mut members: Vec<MixtureMember<'_>> = RoleKind::specialists(ctx.state.n_players())
                .into_iter()
                .map(|role| MixtureMember { role, spec: &self.spec, transport: &*self.transport })
                .collect();
            members.push(MixtureMember { role: RoleKind::Aggregator, spec: &self.spec, transport: &*self.transport });
            return mixture_of_agents(&members, &*self.fanout, ctx.kind, ctx.state, ctx.viewer, &pctx);
        }
        let prompt = ctx.prompt()?;
        best_of_k(&self.spec, &*self.transport, &*self.fanout, &prompt, ctx.kind, &pctx, &legal, self.spec.best_of_k)
    }
}
