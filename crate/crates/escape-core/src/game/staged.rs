//! The staged crocodile: runs language phases to quiescence in script order,
//! always punishing forbidden-pattern requests at the constants first, and
//! the stage pipeline that asserts the shapes such plays are forced into.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chase::{constraint_system, ConstraintId, Direction, RegularConstraint, Request};
use crate::fixtures::{self, ShadeOracle};
use crate::graph::{Edge, Structure, VertexName};
use crate::reduce::LanguageId;
use crate::symbol::Color;
use crate::tiling::TilingInstance;

use super::policy::{CanonicalPolicy, Policy};
use super::{
    forbidden_constraints, open_play, GameConfig, GameError, Outcome, PlayResult, PlayTranscript,
    Schedule, StepRecord,
};

struct Loop<'a> {
    config: &'a GameConfig,
    d: Structure,
    red_q0: crate::lang::PathLanguage,
    steps: Vec<StepRecord>,
    step: u32,
}

impl<'a> Loop<'a> {
    fn lost(&self) -> bool {
        self.red_q0.eval_pair(&self.d, self.d.a(), self.d.b())
    }

    /// Serves one request; returns the outcome if the play ended here.
    fn serve(
        &mut self,
        fugitive: &mut dyn Policy,
        c: &RegularConstraint,
        req: &Request,
    ) -> Result<Option<Outcome>, GameError> {
        self.step += 1;
        let word = match fugitive.choose_word(self.config, &self.d, c, req) {
            Ok(w) => w,
            Err(reason) => return Ok(Some(Outcome::PolicyFault { step: self.step, reason })),
        };
        if !c.base.contains_word(&word) {
            return Ok(Some(Outcome::PolicyFault {
                step: self.step,
                reason: format!("chosen word is outside the head language of {}", c.id),
            }));
        }
        let fresh = self
            .d
            .push_path(req.u, req.v, c.id.direction.head_color(), &word)
            .expect("request endpoints exist");
        self.steps.push(StepRecord {
            step: self.step,
            constraint: c.id,
            u: req.u,
            v: req.v,
            word: word.clone(),
            fresh: fresh.clone(),
        });
        if let Err(reason) = fugitive.observe_step(&self.d, req, &word, &fresh) {
            return Ok(Some(Outcome::PolicyFault { step: self.step, reason }));
        }
        if self.lost() {
            return Ok(Some(Outcome::FugitiveLost { step: self.step }));
        }
        if self.step as usize >= self.config.step_budget {
            return Ok(Some(Outcome::BudgetExhausted));
        }
        Ok(None)
    }
}

pub(super) fn run_staged(
    config: &GameConfig,
    fugitive: &mut dyn Policy,
    phases: &[LanguageId],
    shuffle_seed: Option<u64>,
) -> Result<PlayResult, GameError> {
    for id in phases {
        if config.reduction.language(*id).is_none() {
            return Err(GameError::UnknownLanguage(*id));
        }
    }
    let constraints: BTreeMap<ConstraintId, RegularConstraint> =
        constraint_system(&config.reduction).into_iter().map(|c| (c.id, c)).collect();
    let punishers = forbidden_constraints(&config.reduction);
    let mut rng = shuffle_seed.map(ChaCha8Rng::seed_from_u64);

    let (d, initial_word) = open_play(config, fugitive)?;
    let mut game = Loop {
        config,
        d,
        red_q0: config.reduction.q0.color(Color::Red).expect("base q0"),
        steps: Vec::new(),
        step: 0,
    };

    let mut outcome = None;
    'play: {
        if game.lost() {
            outcome = Some(Outcome::FugitiveLost { step: 0 });
            break 'play;
        }
        for phase in phases {
            loop {
                // punish forbidden patterns between the constants before
                // anything else; this is what makes cheating openings fatal
                if let Some((c, req)) = punishable(&punishers, &game.d) {
                    if let Some(end) = game.serve(fugitive, c, &req)? {
                        outcome = Some(end);
                        break 'play;
                    }
                    continue;
                }
                let mut reqs = phase_requests(&constraints, *phase, &game.d);
                if reqs.is_empty() {
                    break;
                }
                if let Some(rng) = rng.as_mut() {
                    reqs.shuffle(rng);
                }
                let req = reqs.remove(0);
                let c = &constraints[&req.constraint];
                if let Some(end) = game.serve(fugitive, c, &req)? {
                    outcome = Some(end);
                    break 'play;
                }
            }
        }
    }
    let outcome = outcome.unwrap_or(Outcome::Quiescent { step: game.step });

    Ok(PlayResult {
        transcript: PlayTranscript { seed: shuffle_seed, initial_word, steps: game.steps, outcome },
        final_structure: game.d,
        coords: fugitive.coords().cloned(),
        certificate_ok: fugitive.certificate_ok(),
    })
}

fn phase_requests(
    constraints: &BTreeMap<ConstraintId, RegularConstraint>,
    language: LanguageId,
    d: &Structure,
) -> Vec<Request> {
    let mut out = Vec::new();
    for direction in [Direction::GreenToRed, Direction::RedToGreen] {
        let id = ConstraintId { language, direction };
        out.extend(crate::chase::requests_of(&constraints[&id], d));
    }
    out.sort();
    out
}

fn punishable<'a>(
    punishers: &'a [RegularConstraint],
    d: &Structure,
) -> Option<(&'a RegularConstraint, Request)> {
    for c in punishers {
        if c.body.eval_pair(d, d.a(), d.b()) && !c.head.eval_pair(d, d.a(), d.b()) {
            return Some((c, Request { constraint: c.id, u: d.a(), v: d.b() }));
        }
    }
    None
}

// -- stage pipeline -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageDepth {
    /// staircase stages only
    PathOnly,
    /// staircase stages followed by the layering stages
    FullGrid,
}

/// A detailed description of how a play's final structure differs from the
/// expected canonical fixture.
#[derive(Debug, Clone)]
pub struct ShapeMismatch {
    pub expected_name: String,
    pub detail: String,
    pub missing_edges: Vec<Edge>,
    pub extra_edges: Vec<Edge>,
}

impl std::fmt::Display for ShapeMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "expected {}: {} ({} missing, {} extra edges)",
            self.expected_name,
            self.detail,
            self.missing_edges.len(),
            self.extra_edges.len()
        )
    }
}

#[derive(Debug)]
pub struct PipelineReport {
    pub play: PlayResult,
    pub expected_name: String,
    /// the play's final structure renamed by the fugitive's coordinates
    pub renamed: Option<Structure>,
    pub shape: Result<(), ShapeMismatch>,
}

/// Runs the staged strategies for the given size against the canonical
/// fugitive and checks the final structure equals the canonical fixture:
/// the one-wider staircase (or its dollar cut at the scripted exit) after
/// the path stages, the corresponding grid after the layer stages.
pub fn run_stage_pipeline(
    instance: &TilingInstance,
    m: u32,
    exit_at: Option<u32>,
    depth: StageDepth,
    oracle: Box<dyn ShadeOracle>,
    fixture_oracle: &dyn ShadeOracle,
) -> Result<PipelineReport, GameError> {
    assert!(m >= 1);
    if let Some(k) = exit_at {
        assert!((1..=m).contains(&k), "exit size must lie in 1..=m");
    }
    let reduction = crate::reduce::reduce(instance);
    let config = GameConfig::new(reduction);
    let mut phases = fixtures::s_k(m + 1);
    if depth == StageDepth::FullGrid {
        phases.extend(fixtures::s_layer(m + 1));
    }
    let mut fugitive = CanonicalPolicy::new(oracle, exit_at);
    let play = run_staged(&config, &mut fugitive, &phases, None)?;

    let expected = match (depth, exit_at) {
        (StageDepth::PathOnly, Some(k)) => fixtures::build_p_dollar(k, fixture_oracle),
        (StageDepth::PathOnly, None) => fixtures::build_p(m + 1, fixture_oracle),
        (StageDepth::FullGrid, Some(k)) => fixtures::build_g_dollar(k, fixture_oracle),
        (StageDepth::FullGrid, None) => fixtures::build_g(m + 1, fixture_oracle),
    };
    let expected_name = match (depth, exit_at) {
        (StageDepth::PathOnly, Some(k)) => format!("P_{k}$"),
        (StageDepth::PathOnly, None) => format!("P_{}", m + 1),
        (StageDepth::FullGrid, Some(k)) => format!("G_{k}$"),
        (StageDepth::FullGrid, None) => format!("G_{}", m + 1),
    };

    let (renamed, shape) = compare_shape(&play, depth, &expected, &expected_name);
    Ok(PipelineReport { play, expected_name, renamed, shape })
}

fn compare_shape(
    play: &PlayResult,
    depth: StageDepth,
    expected: &Structure,
    expected_name: &str,
) -> (Option<Structure>, Result<(), ShapeMismatch>) {
    let mismatch = |detail: String, missing: Vec<Edge>, extra: Vec<Edge>| ShapeMismatch {
        expected_name: expected_name.to_string(),
        detail,
        missing_edges: missing,
        extra_edges: extra,
    };
    if !matches!(play.transcript.outcome, Outcome::Quiescent { .. }) {
        return (
            None,
            Err(mismatch(format!("play did not finish: {}", play.transcript.outcome), vec![], vec![])),
        );
    }
    let Some(coords) = &play.coords else {
        return (None, Err(mismatch("fugitive reported no coordinates".into(), vec![], vec![])));
    };
    // name the play's vertices from the fugitive's coordinate map;
    // a' is the target of a's alpha edges, b' the source of b's omega edges
    let mut named = play.final_structure.clone();
    let a_prime = named.out_edges(named.a()).next().map(|e| e.dst);
    let b_prime = named.in_edges(named.b()).next().map(|e| e.src);
    let (Some(a_prime), Some(b_prime)) = (a_prime, b_prime) else {
        return (None, Err(mismatch("play structure lacks the constant frame".into(), vec![], vec![])));
    };
    named.set_name(a_prime, VertexName::APrime);
    named.set_name(b_prime, VertexName::BPrime);
    for (v, (i, j)) in coords {
        let name = match depth {
            StageDepth::FullGrid => VertexName::Grid(*i, *j),
            StageDepth::PathOnly => match fixtures::staircase_path_index(*i, *j) {
                Some(idx) => VertexName::Path(idx),
                None => {
                    return (
                        None,
                        Err(mismatch(
                            format!("vertex {v} sits at ({i},{j}), off the staircase"),
                            vec![],
                            vec![],
                        )),
                    )
                }
            },
        };
        named.set_name(*v, name);
    }
    let Some(canonical) = named.canonicalize_by_names() else {
        return (None, Err(mismatch("some play vertex has no coordinate".into(), vec![], vec![])));
    };
    if canonical == *expected {
        return (Some(canonical), Ok(()));
    }
    let got: std::collections::BTreeSet<Edge> = canonical.edges().cloned().collect();
    let want: std::collections::BTreeSet<Edge> = expected.edges().cloned().collect();
    let missing: Vec<Edge> = want.difference(&got).cloned().collect();
    let extra: Vec<Edge> = got.difference(&want).cloned().collect();
    let detail = format!(
        "{} vertices vs {} expected",
        canonical.vertex_count(),
        expected.vertex_count()
    );
    (Some(canonical), Err(mismatch(detail, missing, extra)))
}

/// Convenience wrapper: play one named strategy with any policy and schedule.
pub fn play_strategy(
    config: &GameConfig,
    fugitive: &mut dyn Policy,
    phases: Vec<LanguageId>,
    shuffle_seed: Option<u64>,
) -> Result<PlayResult, GameError> {
    super::play(config, fugitive, &Schedule::Staged { phases, shuffle_seed })
}
