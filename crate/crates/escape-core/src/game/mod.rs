//! The two-player escape game: a fugitive picks a green opening path between
//! the constants and must serve crocodile-selected requests; the fugitive
//! loses as soon as a red start-query path connects the constants.
//!
//! The engine keeps the two roles separate: a [`Schedule`] is the crocodile
//! (which request next), a [`Policy`] is the fugitive (which word serves it).
//! Plays are deterministic given their seeds and fully replayable from the
//! transcript.

mod audit;
mod monitor;
mod policy;
mod staged;
mod worklist;

pub use audit::{audit_forced_words, AlternativeFate, ForcedWordAudit};
pub use monitor::{monitor_principles, p2_ready, MonitorReport, Principle, Violation};
pub use policy::{
    CanonicalPolicy, LiftingPolicy, Policy, RandomPrincipledPolicy, ScriptedPolicy, ScriptedStart,
};
pub use staged::{play_strategy, run_stage_pipeline, PipelineReport, ShapeMismatch, StageDepth};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chase::{constraint_system, ConstraintId, Direction, RegularConstraint};
use crate::graph::{Structure, VertexId};
use crate::reduce::{LanguageId, ReductionOutput};
use crate::symbol::{word_to_string, Color, Word};

pub const DEFAULT_STEP_BUDGET: usize = 10_000;
pub const DEFAULT_WORD_BUDGET: usize = 1_000;

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub reduction: ReductionOutput,
    pub step_budget: usize,
    pub word_budget: usize,
}

impl GameConfig {
    pub fn new(reduction: ReductionOutput) -> GameConfig {
        GameConfig { reduction, step_budget: DEFAULT_STEP_BUDGET, word_budget: DEFAULT_WORD_BUDGET }
    }
}

/// How the crocodile picks requests.
#[derive(Debug, Clone)]
pub enum Schedule {
    /// Phases over language ids; each phase runs its language to quiescence.
    /// Requests at the constants from forbidden-pattern languages are always
    /// punished first. Within a phase the chase order is deterministic, or
    /// seeded when `shuffle_seed` is set.
    Staged { phases: Vec<LanguageId>, shuffle_seed: Option<u64> },
    /// Any pending request of the whole system, chosen uniformly at random.
    RandomPending { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// a red start-query path connected the constants at this step
    FugitiveLost { step: u32 },
    /// the schedule ran out of requests at this step
    Quiescent { step: u32 },
    BudgetExhausted,
    /// the fugitive could not produce a legal word
    PolicyFault { step: u32, reason: String },
}

impl Outcome {
    pub fn lost(&self) -> bool {
        matches!(self, Outcome::FugitiveLost { .. })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::FugitiveLost { step } => write!(f, "fugitive lost at step {step}"),
            Outcome::Quiescent { step } => write!(f, "quiescent after {step} steps"),
            Outcome::BudgetExhausted => write!(f, "step budget exhausted"),
            Outcome::PolicyFault { step, reason } => write!(f, "policy fault at step {step}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub step: u32,
    pub constraint: ConstraintId,
    pub u: VertexId,
    pub v: VertexId,
    pub word: Word,
    pub fresh: Vec<VertexId>,
}

/// The replayable record of one play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayTranscript {
    pub seed: Option<u64>,
    pub initial_word: Word,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
}

#[derive(Debug)]
pub struct PlayResult {
    pub transcript: PlayTranscript,
    pub final_structure: Structure,
    /// grid coordinates the canonical fugitive assigned while playing
    pub coords: Option<BTreeMap<VertexId, (u32, u32)>>,
    /// lifting plays: whether the certificate held at every step
    pub certificate_ok: Option<bool>,
}

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("fugitive's opening word is not in the start query language")]
    BadInitialWord,
    #[error("policy failed before the play started: {0}")]
    InitialPolicyFault(String),
    #[error("strategy names a language the reduction does not define: {0}")]
    UnknownLanguage(LanguageId),
}

/// Runs one play to its outcome.
pub fn play(
    config: &GameConfig,
    fugitive: &mut dyn Policy,
    schedule: &Schedule,
) -> Result<PlayResult, GameError> {
    match schedule {
        Schedule::Staged { phases, shuffle_seed } => {
            staged::run_staged(config, fugitive, phases, *shuffle_seed)
        }
        Schedule::RandomPending { seed } => worklist::run_random(config, fugitive, *seed),
    }
}

/// The fugitive's opening move as a standalone operation: the green frozen
/// path of its chosen word, rejected when the word lies outside the start
/// query language or the policy cannot name one within its budgets.
pub fn initial_position(
    config: &GameConfig,
    fugitive: &mut dyn Policy,
) -> Result<Structure, GameError> {
    open_play(config, fugitive).map(|(d, _)| d)
}

/// Shared opening: asks the fugitive for its word, validates it against the
/// start query language and builds the green initial position.
pub(crate) fn open_play(
    config: &GameConfig,
    fugitive: &mut dyn Policy,
) -> Result<(Structure, Word), GameError> {
    let word = fugitive.initial_word(config).map_err(GameError::InitialPolicyFault)?;
    if !config.reduction.q0.contains_word(&word) {
        return Err(GameError::BadInitialWord);
    }
    let mut d = Structure::new();
    let fresh = d.push_path(d.a(), d.b(), Color::Green, &word).expect("nonempty word");
    let mut path = vec![d.a()];
    path.extend(fresh);
    path.push(d.b());
    fugitive.observe_initial(&d, &path);
    Ok((d, word))
}

pub(crate) fn forbidden_constraints(r: &ReductionOutput) -> Vec<RegularConstraint> {
    let forbidden: std::collections::BTreeSet<LanguageId> = r.forbidden_ids().into_iter().collect();
    constraint_system(r)
        .into_iter()
        .filter(|c| forbidden.contains(&c.id.language))
        .collect()
}

// -- transcript text format ---------------------------------------------------

/// One line per served request, tab separated:
/// step, group, index, direction, u, v, word. Header comments carry the seed
/// and the initial word.
pub fn transcript_to_tsv(t: &PlayTranscript) -> String {
    let mut out = String::new();
    if let Some(seed) = t.seed {
        out.push_str(&format!("# seed\t{seed}\n"));
    }
    out.push_str(&format!("# initial\t{}\n", word_to_string(&t.initial_word)));
    out.push_str(&format!("# outcome\t{}\n", t.outcome));
    out.push_str("# step\tgroup\tindex\tdirection\tu\tv\tword\n");
    for s in &t.steps {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            s.step,
            s.constraint.language.group,
            s.constraint.language.index,
            s.constraint.direction.arrow(),
            s.u,
            s.v,
            word_to_string(&s.word),
        ));
    }
    out
}

/// Parses the tab-separated transcript form. Fresh vertex ids are not part
/// of the text format; replay reallocates them deterministically.
pub fn transcript_from_tsv(text: &str) -> Result<PlayTranscript, String> {
    use crate::reduce::{LanguageGroup, LanguageId};
    use crate::symbol::word_from_string;
    let mut seed = None;
    let mut initial_word = None;
    let mut steps = Vec::new();
    let mut last_step = 0;
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.trim_start().splitn(2, '\t');
            match (parts.next(), parts.next()) {
                (Some("seed"), Some(v)) => seed = Some(v.trim().parse().map_err(|_| "bad seed")?),
                (Some("initial"), Some(v)) => initial_word = Some(word_from_string(v.trim())?),
                _ => {}
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 7 {
            return Err(format!("transcript row needs 7 columns, got {}", cols.len()));
        }
        let group = match cols[1] {
            "good" => LanguageGroup::Good,
            "bad" => LanguageGroup::Bad,
            "ugly" => LanguageGroup::Ugly,
            other => return Err(format!("bad language group {other:?}")),
        };
        let direction = match cols[3] {
            "->" => Direction::GreenToRed,
            "<-" => Direction::RedToGreen,
            other => return Err(format!("bad direction {other:?}")),
        };
        let step: u32 = cols[0].parse().map_err(|_| "bad step number")?;
        last_step = step;
        steps.push(StepRecord {
            step,
            constraint: ConstraintId {
                language: LanguageId { group, index: cols[2].parse().map_err(|_| "bad index")? },
                direction,
            },
            u: crate::graph::VertexId(cols[4].parse().map_err(|_| "bad vertex")?),
            v: crate::graph::VertexId(cols[5].parse().map_err(|_| "bad vertex")?),
            word: word_from_string(cols[6])?,
            fresh: Vec::new(),
        });
    }
    Ok(PlayTranscript {
        seed,
        initial_word: initial_word.ok_or("transcript is missing its initial word header")?,
        steps,
        outcome: Outcome::Quiescent { step: last_step },
    })
}

/// Re-executes a transcript against a config, verifying each recorded step
/// was a pending request served with a legal word. Vertex ids allocate
/// identically, so the result is bit-for-bit the recorded final structure.
pub fn replay(config: &GameConfig, t: &PlayTranscript) -> Result<Structure, String> {
    if !config.reduction.q0.contains_word(&t.initial_word) {
        return Err("initial word is outside the start query language".into());
    }
    let mut d = Structure::new();
    d.push_path(d.a(), d.b(), Color::Green, &t.initial_word).expect("nonempty");
    let constraints: BTreeMap<ConstraintId, RegularConstraint> =
        constraint_system(&config.reduction).into_iter().map(|c| (c.id, c)).collect();
    for s in &t.steps {
        let c = constraints
            .get(&s.constraint)
            .ok_or_else(|| format!("step {}: unknown constraint {}", s.step, s.constraint))?;
        if !c.base.contains_word(&s.word) {
            return Err(format!("step {}: word outside the head language", s.step));
        }
        if !c.body.eval_pair(&d, s.u, s.v) {
            return Err(format!("step {}: body does not hold for ({}, {})", s.step, s.u, s.v));
        }
        let fresh = d
            .push_path(s.u, s.v, c.id.direction.head_color(), &s.word)
            .map_err(|e| format!("step {}: {e}", s.step))?;
        // text-form transcripts do not carry fresh ids; in-memory ones do
        if !s.fresh.is_empty() && fresh != s.fresh {
            return Err(format!("step {}: fresh vertex ids diverge", s.step));
        }
    }
    Ok(d)
}
