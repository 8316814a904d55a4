//! Per-(player count, scaffold) statistics and the results table.

use std::collections::BTreeMap;
use std::fmt::Write;

use hanabi_core::orchestrator::{GameRecord, SuiteResult};
use hanabi_core::scaffold::ScaffoldKind;
use serde::{Deserialize, Serialize};

use crate::runner::RunManifest;
use crate::stats::{iqm_ci, mean, std_dev, DEFAULT_BOOTSTRAP};

/// What the report needs from one game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameOutcome {
    pub n_players: usize,
    pub scaffold: ScaffoldKind,
    /// `None` when the game failed to run at all.
    pub score: Option<u8>,
    pub aborted: bool,
}

impl GameOutcome {
    pub fn from_record(r: &GameRecord) -> Self {
        GameOutcome {
            n_players: r.config.n_players,
            scaffold: r.scaffold,
            score: Some(r.final_score),
            aborted: r.aborted.is_some(),
        }
    }

    pub fn from_suite(s: &SuiteResult) -> Vec<Self> {
        s.cells
            .iter()
            .map(|c| match &c.outcome {
                Ok(r) => Self::from_record(r),
                Err(_) => GameOutcome { n_players: c.n_players, scaffold: s.scaffold, score: None, aborted: false },
            })
            .collect()
    }

    pub fn from_manifest(m: &RunManifest) -> Vec<Self> {
        m.games
            .iter()
            .map(|g| GameOutcome {
                n_players: g.n_players,
                scaffold: m.scaffold,
                score: g.final_score,
                aborted: g.aborted,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub n_players: usize,
    pub scaffold: ScaffoldKind,
    /// Completed games; aborted and failed games are counted separately.
    pub n: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub iqm: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    /// Fewer than four scores, so the IQM column holds the plain mean.
    pub plain_mean: bool,
    pub aborted: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub n_bootstrap: usize,
    pub seed: u64,
    pub rows: Vec<CellStats>,
}

impl AggregateReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn scaffold_order(k: ScaffoldKind) -> usize {
    ScaffoldKind::ALL.iter().position(|&x| x == k).expect("listed")
}

pub fn report(games: &[GameOutcome], n_bootstrap: usize, seed: u64) -> AggregateReport {
    let mut cells: BTreeMap<(usize, usize), Vec<&GameOutcome>> = BTreeMap::new();
    for g in games {
        cells.entry((g.n_players, scaffold_order(g.scaffold))).or_default().push(g);
    }
    let rows = cells
        .into_values()
        .map(|gs| {
            let mut scores: Vec<f64> =
                gs.iter().filter(|g| !g.aborted).filter_map(|g| g.score).map(f64::from).collect();
            scores.sort_by(f64::total_cmp);
            let est = iqm_ci(&scores, n_bootstrap.max(1), seed).ok();
            CellStats {
                n_players: gs[0].n_players,
                scaffold: gs[0].scaffold,
                n: scores.len(),
                mean: (!scores.is_empty()).then(|| mean(&scores)),
                std: (!scores.is_empty()).then(|| std_dev(&scores)),
                iqm: est.map(|e| e.iqm),
                ci_low: est.map(|e| e.ci_low),
                ci_high: est.map(|e| e.ci_high),
                plain_mean: est.is_some_and(|e| e.plain_mean),
                aborted: gs.iter().filter(|g| g.aborted).count(),
                failed: gs.iter().filter(|g| g.score.is_none()).count(),
            }
        })
        .collect();
    AggregateReport { n_bootstrap, seed, rows }
}

pub fn default_report(games: &[GameOutcome]) -> AggregateReport {
    report(games, DEFAULT_BOOTSTRAP, 0)
}

pub fn render_table(r: &AggregateReport) -> String {
    let mut s = String::from("| players | scaffold | n | mean±std | IQM [95% CI] |\n|---|---|---|---|---|\n");
    let mut notes = Vec::new();
    for c in &r.rows {
        let ms = match (c.mean, c.std) {
            (Some(m), Some(sd)) => format!("{m:.2}±{sd:.2}"),
            _ => "-".into(),
        };
        let iqm = match (c.iqm, c.ci_low, c.ci_high) {
            (Some(i), Some(lo), Some(hi)) => format!("{i:.2} [{lo:.2}, {hi:.2}]{}", if c.plain_mean { "*" } else { "" }),
            _ => "-".into(),
        };
        let _ = writeln!(s, "| {} | {} | {} | {} | {} |", c.n_players, c.scaffold.name(), c.n, ms, iqm);
        if c.aborted > 0 || c.failed > 0 {
            notes.push(format!(
                "{}p {}: {} aborted, {} failed (excluded from n)",
                c.n_players,
                c.scaffold.name(),
                c.aborted,
                c.failed
            ));
        }
    }
    s.push('\n');
    let _ = writeln!(
        s,
        "IQM: mean of the middle 50% of scores, weighting the values at the quartile cuts fractionally when n is not a multiple of 4. \
         CI: 2.5/97.5 percentiles of {} bootstrap resamples (seed {}).",
        r.n_bootstrap, r.seed
    );
    if r.rows.iter().any(|c| c.plain_mean) {
        s.push_str("* fewer than 4 scores: plain mean and its bootstrap interval.\n");
    }
    for n in notes {
        let _ = writeln!(s, "{n}");
    }
    s
}
