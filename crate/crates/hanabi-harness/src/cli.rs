//! The `hanabi` command line.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use hanabi_core::agents::{AgentKind, AgentSpec};
use hanabi_core::orchestrator::{run_game, validate_trajectory, GameRecord};
use hanabi_core::scaffold::ScaffoldKind;
use hanabi_core::GameConfig;

use crate::config::{Seeds, SuiteConfig};
use crate::datasets::{export_to_path, Dataset, ExportOptions};
use crate::error::HarnessError;
use crate::judging;
use crate::report::{render_table, report, GameOutcome};
use crate::runner::{build_agent, read_json, read_manifest, read_run_dir, run_config, to_pretty, write_run_dir};
use crate::stats::DEFAULT_BOOTSTRAP;
use crate::transport::HttpSettings;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Success = 0,
    Usage = 1,
    Partial = 2,
    Integrity = 3,
}

#[derive(Parser, Debug)]
#[command(name = "hanabi", version, about = "Hanabi simulator and LLM evaluation harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Play one game and print the transcript.
    Play(PlayArgs),
    /// Run a suite from a config file into a run directory.
    Suite(SuiteArgs),
    /// Export a run directory as HanabiLogs or HanabiRewards JSONL.
    #[command(group(ArgGroup::new("which").required(true).args(["logs", "rewards"])))]
    Export(ExportArgs),
    /// State-tracking evaluation of Mycroft turns.
    #[command(group(ArgGroup::new("mode").required(true).args(["structural", "prompt_out", "responses"])))]
    Judge(JudgeArgs),
    /// Replay a game record and report any divergence.
    Replay { game: PathBuf },
    /// Aggregate statistics for a run directory.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
pub struct AgentArgs {
    /// greedy, random or llm
    #[arg(long, default_value = "greedy")]
    pub agent: String,
    /// Seat-0 agent for cross-play.
    #[arg(long)]
    pub singleton: Option<String>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = crate::transport::DEFAULT_API_KEY_ENV)]
    pub api_key_env: String,
}

impl AgentArgs {
    fn spec(&self, name: &str) -> Result<AgentSpec, HarnessError> {
        let mut spec = match name {
            "greedy" => AgentSpec::scripted(AgentKind::ScriptedGreedy),
            "random" => AgentSpec::scripted(AgentKind::RandomLegal),
            "llm" => {
                let (Some(e), Some(m)) = (&self.endpoint, &self.model) else {
                    return Err(HarnessError::Config("--agent llm needs --endpoint and --model".into()));
                };
                AgentSpec::llm(e, m)
            }
            other => return Err(HarnessError::Config(format!("unknown agent {other:?}"))),
        };
        if spec.kind == AgentKind::Llm {
            spec.temperature = self.temperature;
        }
        Ok(spec)
    }

    fn http(&self) -> HttpSettings {
        HttpSettings { api_key_env: self.api_key_env.clone(), ..HttpSettings::default() }
    }
}

#[derive(Args, Debug)]
pub struct PlayArgs {
    #[arg(long, default_value_t = 2)]
    pub players: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "watson")]
    pub scaffold: String,
    #[command(flatten)]
    pub agents: AgentArgs,
    #[arg(long, default_value_t = 200)]
    pub max_turns: u32,
    /// Print every prompt and response as well.
    #[arg(long)]
    pub show_prompts: bool,
    /// Save the game record here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub scaffold: Option<String>,
    /// `standard`, `heldout` or a comma-separated list.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub players: Option<Vec<usize>>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub max_turns: Option<u32>,
    #[arg(long)]
    pub api_key_env: Option<String>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    pub run_dir: PathBuf,
    #[arg(long)]
    pub logs: bool,
    #[arg(long)]
    pub rewards: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Leave out turns whose ratings were clamped.
    #[arg(long)]
    pub strict_ratings: bool,
}

#[derive(Args, Debug)]
pub struct JudgeArgs {
    pub run_dir: PathBuf,
    /// Score deduction blocks against the oracle, offline.
    #[arg(long)]
    pub structural: bool,
    /// Write judge prompts for an external model to this JSONL file.
    #[arg(long)]
    pub prompt_out: Option<PathBuf>,
    /// Parse external judge replies from this JSONL file.
    #[arg(long)]
    pub responses: Option<PathBuf>,
    /// Scores output (JSONL); required with --structural and --responses.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    pub run_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

fn scaffold(name: &str) -> Result<ScaffoldKind, HarnessError> {
    ScaffoldKind::from_name(name).ok_or_else(|| HarnessError::Config(format!("unknown scaffold {name:?}")))
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>, HarnessError> {
    fs::File::create(path).map(std::io::BufWriter::new).map_err(|e| HarnessError::io(path, e))
}

fn play(a: &PlayArgs, out: &mut dyn Write) -> Result<Exit, HarnessError> {
    let kind = scaffold(&a.scaffold)?;
    let config = GameConfig::new(a.players, a.seed).map_err(|e| HarnessError::Config(e.to_string()))?;
    let http = a.agents.http();
    let rest = build_agent(&a.agents.spec(&a.agents.agent)?, &http)?;
    let first = a.agents.singleton.as_deref().map(|s| a.agents.spec(s).and_then(|sp| build_agent(&sp, &http))).transpose()?;
    let roster: Vec<_> = (0..a.players)
        .map(|i| match (&first, i) {
            (Some(f), 0) => f.clone(),
            _ => rest.clone(),
        })
        .collect();
    let opts = hanabi_core::orchestrator::GameOptions { max_turns: a.max_turns, ..Default::default() };
    let record = run_game(&roster, &config, kind, &opts)?;
    print_transcript(&record, a.show_prompts, out).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    if let Some(p) = &a.out {
        fs::write(p, to_pretty(&record)).map_err(|e| HarnessError::io(p, e))?;
    }
    Ok(if record.aborted.is_some() { Exit::Partial } else { Exit::Success })
}

pub fn print_transcript(r: &GameRecord, show_prompts: bool, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{} ({} players, seed {}, {})", r.game_id, r.config.n_players, r.config.seed, r.scaffold.name())?;
    for (seat, label) in r.roster.iter().enumerate() {
        writeln!(out, "  P{seat}: {label}")?;
    }
    for t in &r.turns {
        if show_prompts {
            writeln!(out, "--- prompt ---\n{}\n--- response ---\n{}", t.prompt.text(), t.raw_response)?;
        }
        let note = if t.fallback { " [fallback]" } else { "" };
        writeln!(out, "T{:<3} P{} {}{} -> {}", t.turn_index, t.player, t.mv, note, outcome_text(&t.outcome))?;
    }
    match (&r.terminal, &r.aborted) {
        (_, Some(a)) => writeln!(out, "Aborted at turn {}: {}. Score {}", a.turn_index, a.reason, r.final_score),
        (Some(t), None) => writeln!(out, "Final score {} ({:?})", t.final_score, t.reason),
        (None, None) => writeln!(out, "Score {}", r.final_score),
    }
}

fn outcome_text(o: &hanabi_core::MoveOutcome) -> String {
    use hanabi_core::MoveOutcome::*;
    match o {
        Played { card, success: true, .. } => format!("played {card}"),
        Played { card, success: false, .. } => format!("misplayed {card}"),
        Discarded { card, .. } => format!("discarded {card}"),
        Revealed { target, touched } => format!("P{target} slots {touched:?}"),
    }
}

fn suite(a: &SuiteArgs, out: &mut dyn Write) -> Result<Exit, HarnessError> {
    let mut cfg = SuiteConfig::load(&a.config)?;
    if let Some(s) = &a.scaffold {
        cfg.scaffold = s.clone();
    }
    if let Some(s) = &a.seeds {
        cfg.seeds = Seeds::parse(s)?;
    }
    if let Some(p) = &a.players {
        cfg.player_counts = p.clone();
    }
    if let Some(p) = a.parallelism {
        cfg.parallelism = p;
    }
    if let Some(m) = a.max_turns {
        cfg.max_turns = m;
    }
    if let Some(k) = &a.api_key_env {
        cfg.http.api_key_env = k.clone();
    }
    cfg.check()?;
    let result = run_config(&cfg)?;
    let manifest = write_run_dir(&a.out, &cfg, &result)?;
    let rep = report(&GameOutcome::from_suite(&result), DEFAULT_BOOTSTRAP, 0);
    let _ = write!(out, "{}", render_table(&rep));
    let _ = writeln!(out, "run directory: {}", a.out.display());
    Ok(if manifest.violations() > 0 {
        Exit::Integrity
    } else if manifest.failed() + manifest.aborted() > 0 {
        Exit::Partial
    } else {
        Exit::Success
    })
}

fn export(a: &ExportArgs, out: &mut dyn Write) -> Result<Exit, HarnessError> {
    let (_, records) = read_run_dir(&a.run_dir)?;
    let which = if a.logs { Dataset::HanabiLogs } else { Dataset::HanabiRewards };
    let m = export_to_path(&records, which, ExportOptions { strict_ratings: a.strict_ratings }, &a.out)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let _ = writeln!(out, "{:?}: {} lines from {} games, {} turns excluded", which, m.lines, m.games, m.excluded());
    for g in &m.refused_games {
        let _ = writeln!(out, "refused {}: {}", g.game_id, g.reason);
    }
    Ok(if m.refused_games.is_empty() { Exit::Success } else { Exit::Integrity })
}

fn judge(a: &JudgeArgs, out: &mut dyn Write) -> Result<Exit, HarnessError> {
    if let Some(path) = &a.responses {
        let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
        let rows = judging::ingest_replies(BufReader::new(file))?;
        return finish_scores(&rows, a.out.as_deref(), "llm-judge", out);
    }
    let (_, records) = read_run_dir(&a.run_dir)?;
    if let Some(path) = &a.prompt_out {
        let mut rows = Vec::new();
        for r in &records {
            rows.extend(judging::judge_prompts(r)?);
        }
        judging::write_jsonl(&rows, create(path)?).map_err(|e| HarnessError::io(path, e))?;
        let _ = writeln!(out, "{} judge prompts written to {}", rows.len(), path.display());
        return Ok(if rows.is_empty() { Exit::Partial } else { Exit::Success });
    }
    let mut rows = Vec::new();
    for r in &records {
        rows.extend(judging::structural(r)?);
    }
    finish_scores(&rows, a.out.as_deref(), "structural", out)
}

fn finish_scores(rows: &[judging::JudgedTurn], path: Option<&Path>, label: &str, out: &mut dyn Write) -> Result<Exit, HarnessError> {
    let path = path.ok_or_else(|| HarnessError::Config("--out is required".into()))?;
    judging::write_jsonl(rows, create(path)?).map_err(|e| HarnessError::io(path, e))?;
    match judging::mean_scores(rows) {
        Some([o, d, h, s]) => {
            let _ = writeln!(
                out,
                "{label} scores over {} turns: overall {o:.3}, deduction_accuracy {d:.3}, history_integration {h:.3}, state_tracking_quality {s:.3}",
                rows.len()
            );
            Ok(Exit::Success)
        }
        None => {
            let _ = writeln!(out, "no turns with deduction blocks");
            Ok(Exit::Partial)
        }
    }
}

fn replay(path: &Path, out: &mut dyn Write) -> Result<Exit, HarnessError> {
    let record: GameRecord = read_json(path)?;
    let violations = validate_trajectory(&record);
    if violations.is_empty() {
        let _ = writeln!(out, "ok: {} turns replay exactly, score {}", record.turns.len(), record.final_score);
        return Ok(Exit::Success);
    }
    for v in &violations {
        let turn = v.turn.map_or("-".to_string(), |t| t.to_string());
        let _ = writeln!(out, "turn {turn}: {:?}: {}", v.kind, v.detail);
    }
    Ok(Exit::Integrity)
}

fn stats(a: &StatsArgs, out: &mut dyn Write) -> Result<Exit, HarnessError> {
    let manifest = read_manifest(&a.run_dir)?;
    let rep = report(&GameOutcome::from_manifest(&manifest), a.bootstrap, a.seed);
    if a.json {
        let _ = write!(out, "{}", to_pretty(&rep));
    } else {
        let _ = write!(out, "{}", render_table(&rep));
    }
    Ok(if rep.rows.iter().all(|c| c.n == 0) { Exit::Partial } else { Exit::Success })
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Exit, HarnessError> {
    match &cli.command {
        Command::Play(a) => play(a, out),
        Command::Suite(a) => suite(a, out),
        Command::Export(a) => export(a, out),
        Command::Judge(a) => judge(a, out),
        Command::Replay { game } => replay(game, out),
        Command::Stats(a) => stats(a, out),
    }
}

/// Parses `args` (program name first), runs the command, and returns the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return Exit::Usage;
            }
            let _ = write!(out, "{}", e.render());
            return Exit::Success;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                HarnessError::Orchestrator(_) => Exit::Partial,
                _ => Exit::Usage,
            }
        }
    }
}
