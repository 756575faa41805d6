//! The budgeted randomized crocodile: keeps an incrementally maintained pool
//! of pending requests and serves a uniformly random one each step.
//!
//! Long plays never recompute requests from scratch. Short-word constraints
//! discover new request candidates locally around each written edge; the
//! anchored constraints (whose bodies start at an alpha edge) and the loss
//! query are tracked by incremental product reachability, so the per-step
//! cost stays proportional to the written path, not to the whole structure.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chase::{constraint_system, ConstraintId, RegularConstraint, Request};
use crate::graph::{Edge, Structure, VertexId};
use crate::lang::{LabelPattern, PathLanguage};
use crate::reduce::LanguageGroup;
use crate::symbol::{Color, SymbolKind};

use super::policy::Policy;
use super::{open_play, GameConfig, GameError, Outcome, PlayResult, PlayTranscript, StepRecord};

/// Incremental reachability of one colored automaton from a fixed source
/// vertex: the set of product states (automaton state, vertex) reachable
/// from (start, source) in the current structure.
struct ReachTracker {
    lang: PathLanguage,
    source: VertexId,
    reached: HashSet<(u32, VertexId)>,
}

impl ReachTracker {
    fn new(lang: PathLanguage, d: &Structure, source: VertexId) -> ReachTracker {
        let mut t = ReachTracker { lang, source, reached: HashSet::new() };
        let start = t.lang.start();
        t.reached.insert((start, source));
        let mut stack = vec![(start, source)];
        t.propagate(d, &mut stack);
        t
    }

    fn propagate(&mut self, d: &Structure, stack: &mut Vec<(u32, VertexId)>) -> Vec<VertexId> {
        let lang = &self.lang;
        let reached = &mut self.reached;
        let mut newly_accepting = Vec::new();
        while let Some((q, w)) = stack.pop() {
            if lang.accepting().contains(&q) {
                newly_accepting.push(w);
            }
            for t in lang.transitions().iter().filter(|t| t.from == q) {
                for e in d.out_edges(w) {
                    if t.label.matches(e.label.color, &e.label.symbol)
                        && reached.insert((t.to, e.dst))
                    {
                        stack.push((t.to, e.dst));
                    }
                }
            }
        }
        newly_accepting
    }

    /// Feeds one new edge; returns vertices that newly complete a word from
    /// the source.
    fn on_edge(&mut self, d: &Structure, e: &Edge) -> Vec<VertexId> {
        let mut stack = Vec::new();
        {
            let lang = &self.lang;
            let reached = &mut self.reached;
            for q in 0..lang.state_count() {
                if reached.contains(&(q, e.src)) {
                    for t in lang.transitions().iter().filter(|t| t.from == q) {
                        if t.label.matches(e.label.color, &e.label.symbol)
                            && reached.insert((t.to, e.dst))
                        {
                            stack.push((t.to, e.dst));
                        }
                    }
                }
            }
        }
        self.propagate(d, &mut stack)
    }

    fn accepts_at(&self, v: VertexId) -> bool {
        self.lang.accepting().iter().any(|q| self.reached.contains(&(*q, v)))
    }

    /// All vertices currently completing a word from the source, sorted.
    fn accepting_vertices(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self
            .reached
            .iter()
            .filter(|(q, _)| self.lang.accepting().contains(q))
            .map(|(_, v)| *v)
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Word shapes of a small automaton (pattern chains from start to accept),
/// used for degree-directed head checks.
fn shapes_of(l: &PathLanguage) -> Vec<Vec<LabelPattern>> {
    let mut out = Vec::new();
    let mut stack: Vec<(u32, Vec<LabelPattern>)> = vec![(l.start(), Vec::new())];
    while let Some((q, prefix)) = stack.pop() {
        if l.accepting().contains(&q) && !prefix.is_empty() {
            out.push(prefix.clone());
        }
        for t in l.transitions().iter().filter(|t| t.from == q) {
            let mut next = prefix.clone();
            next.push(t.label.clone());
            stack.push((t.to, next));
        }
    }
    out
}

struct HeadChecker {
    /// shapes when the head is short, otherwise the full automaton is used
    shapes: Option<Vec<Vec<LabelPattern>>>,
    lang: PathLanguage,
}

impl HeadChecker {
    fn new(head: &PathLanguage) -> HeadChecker {
        let shapes = (head.max_word_len() <= 3).then(|| shapes_of(head));
        HeadChecker { shapes, lang: head.clone() }
    }

    fn holds(&self, d: &Structure, u: VertexId, v: VertexId) -> bool {
        let Some(shapes) = &self.shapes else {
            return self.lang.eval_pair(d, u, v);
        };
        shapes.iter().any(|s| shape_holds(d, s, u, v))
    }
}

/// Matches a fixed pattern chain between two vertices, walking from the
/// lower-degree end so that hub vertices (the fan sources and sinks) never
/// get scanned in full.
fn shape_holds(d: &Structure, shape: &[LabelPattern], u: VertexId, v: VertexId) -> bool {
    let m = |p: &LabelPattern, e: &Edge| p.matches(e.label.color, &e.label.symbol);
    match shape.len() {
        1 => d.edges_between(u, v).any(|e| m(&shape[0], e)),
        2 => {
            let out_deg = d.out_degree(u);
            let in_deg = d.in_degree(v);
            if out_deg <= in_deg {
                d.out_edges(u)
                    .filter(|e| m(&shape[0], e))
                    .any(|e| d.edges_between(e.dst, v).any(|e2| m(&shape[1], e2)))
            } else {
                d.in_edges(v)
                    .filter(|e| m(&shape[1], e))
                    .any(|e| d.edges_between(u, e.src).any(|e0| m(&shape[0], e0)))
            }
        }
        3 => {
            if d.out_degree(u) <= d.in_degree(v) {
                d.out_edges(u).filter(|e| m(&shape[0], e)).any(|e1| {
                    d.out_edges(e1.dst)
                        .filter(|e| m(&shape[1], e))
                        .any(|e2| d.edges_between(e2.dst, v).any(|e3| m(&shape[2], e3)))
                })
            } else {
                d.in_edges(v).filter(|e| m(&shape[2], e)).any(|e3| {
                    d.in_edges(e3.src)
                        .filter(|e| m(&shape[1], e))
                        .any(|e2| d.edges_between(u, e2.src).any(|e1| m(&shape[0], e1)))
                })
            }
        }
        _ => unreachable!("shapes are only precomputed for short heads"),
    }
}

/// Start-anchored body pairs created by one new edge: walk the automaton
/// backward to its start and forward to acceptance around the edge.
fn pairs_through_edge(body: &PathLanguage, d: &Structure, e: &Edge) -> Vec<(VertexId, VertexId)> {
    let mut out = Vec::new();
    for t in body.transitions() {
        if !t.label.matches(e.label.color, &e.label.symbol) {
            continue;
        }
        let sources = walk_to_start(body, d, t.from, e.src);
        if sources.is_empty() {
            continue;
        }
        let targets = walk_to_accept(body, d, t.to, e.dst);
        for &x in &sources {
            for &y in &targets {
                out.push((x, y));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn walk_to_start(body: &PathLanguage, d: &Structure, state: u32, vertex: VertexId) -> Vec<VertexId> {
    let mut found = Vec::new();
    let mut seen = HashSet::new();
    let mut stack = vec![(state, vertex)];
    while let Some((q, w)) = stack.pop() {
        if !seen.insert((q, w)) {
            continue;
        }
        if q == body.start() {
            found.push(w);
        }
        for t in body.transitions().iter().filter(|t| t.to == q) {
            for e in d.in_edges(w) {
                if t.label.matches(e.label.color, &e.label.symbol) {
                    stack.push((t.from, e.src));
                }
            }
        }
    }
    found.sort();
    found.dedup();
    found
}

fn walk_to_accept(body: &PathLanguage, d: &Structure, state: u32, vertex: VertexId) -> Vec<VertexId> {
    let mut found = Vec::new();
    let mut seen = HashSet::new();
    let mut stack = vec![(state, vertex)];
    while let Some((q, w)) = stack.pop() {
        if !seen.insert((q, w)) {
            continue;
        }
        if body.accepting().contains(&q) {
            found.push(w);
        }
        for t in body.transitions().iter().filter(|t| t.from == q) {
            for e in d.out_edges(w) {
                if t.label.matches(e.label.color, &e.label.symbol) {
                    stack.push((t.to, e.dst));
                }
            }
        }
    }
    found.sort();
    found.dedup();
    found
}

pub(super) fn run_random(
    config: &GameConfig,
    fugitive: &mut dyn Policy,
    seed: u64,
) -> Result<PlayResult, GameError> {
    let constraints: Vec<RegularConstraint> = constraint_system(&config.reduction);
    let heads: HashMap<ConstraintId, HeadChecker> =
        constraints.iter().map(|c| (c.id, HeadChecker::new(&c.head))).collect();
    let by_id: HashMap<ConstraintId, usize> =
        constraints.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    // short bodies are discovered around new edges; anchored ones by trackers
    let local: Vec<usize> = constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.id.language.group == LanguageGroup::Good)
        .map(|(i, _)| i)
        .collect();
    let anchored: Vec<usize> = constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.id.language.group != LanguageGroup::Good)
        .map(|(i, _)| i)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut d, initial_word) = open_play(config, fugitive)?;
    let red_q0 = config.reduction.q0.color(Color::Red).expect("base q0");

    let mut loss = ReachTracker::new(red_q0, &d, d.a());
    let mut trackers: Vec<(usize, ReachTracker)> = Vec::new();
    let mut alpha_sources: HashSet<VertexId> = HashSet::new();

    let mut pending: Vec<Request> = crate::chase::requests(&constraints, &d);
    let mut enqueued: HashSet<(ConstraintId, VertexId, VertexId)> =
        pending.iter().map(|r| (r.constraint, r.u, r.v)).collect();

    // spawns anchored trackers for a new alpha-edge source and enqueues any
    // body pair the fresh trackers already complete
    fn spawn_source(
        src: VertexId,
        d: &Structure,
        constraints: &[RegularConstraint],
        anchored: &[usize],
        trackers: &mut Vec<(usize, ReachTracker)>,
        alpha_sources: &mut HashSet<VertexId>,
        pending: &mut Vec<Request>,
        enqueued: &mut HashSet<(ConstraintId, VertexId, VertexId)>,
    ) {
        if !alpha_sources.insert(src) {
            return;
        }
        for &i in anchored {
            let tracker = ReachTracker::new(constraints[i].body.clone(), d, src);
            for w in tracker.accepting_vertices() {
                let key = (constraints[i].id, src, w);
                if !enqueued.contains(&key) {
                    enqueued.insert(key);
                    pending.push(Request { constraint: constraints[i].id, u: src, v: w });
                }
            }
            trackers.push((i, tracker));
        }
    }
    for e in d.edges().cloned().collect::<Vec<_>>() {
        if e.label.symbol.kind() == SymbolKind::Alpha {
            spawn_source(
                e.src,
                &d,
                &constraints,
                &anchored,
                &mut trackers,
                &mut alpha_sources,
                &mut pending,
                &mut enqueued,
            );
        }
    }

    let mut steps: Vec<StepRecord> = Vec::new();
    let mut step: u32 = 0;
    let outcome = 'play: loop {
        if loss.accepts_at(d.b()) {
            break Outcome::FugitiveLost { step };
        }
        // draw until a live request comes up
        let (req, c) = loop {
            if pending.is_empty() {
                break 'play Outcome::Quiescent { step };
            }
            let idx = rng.gen_range(0..pending.len());
            let r = pending.swap_remove(idx);
            let ci = by_id[&r.constraint];
            if !heads[&r.constraint].holds(&d, r.u, r.v) {
                break (r, &constraints[ci]);
            }
            // stale: its head got satisfied as a side effect earlier
        };
        if step as usize >= config.step_budget {
            break Outcome::BudgetExhausted;
        }
        step += 1;
        let word = match fugitive.choose_word(config, &d, c, &req) {
            Ok(w) => w,
            Err(reason) => break Outcome::PolicyFault { step, reason },
        };
        if !c.base.contains_word(&word) {
            break Outcome::PolicyFault {
                step,
                reason: format!("chosen word is outside the head language of {}", c.id),
            };
        }
        let fresh = d
            .push_path(req.u, req.v, c.id.direction.head_color(), &word)
            .expect("request endpoints exist");
        steps.push(StepRecord {
            step,
            constraint: c.id,
            u: req.u,
            v: req.v,
            word: word.clone(),
            fresh: fresh.clone(),
        });
        if let Err(reason) = fugitive.observe_step(&d, &req, &word, &fresh) {
            break Outcome::PolicyFault { step, reason };
        }

        // discovery around the written path
        let mut path_vertices = vec![req.u];
        path_vertices.extend(&fresh);
        path_vertices.push(req.v);
        let color = c.id.direction.head_color();
        let new_edges: Vec<Edge> = word
            .iter()
            .enumerate()
            .map(|(i, s)| Edge {
                src: path_vertices[i],
                dst: path_vertices[i + 1],
                label: crate::symbol::EdgeLabel { color, symbol: s.clone() },
            })
            .collect();
        for e in &new_edges {
            if e.label.symbol.kind() == SymbolKind::Alpha {
                spawn_source(
                    e.src,
                    &d,
                    &constraints,
                    &anchored,
                    &mut trackers,
                    &mut alpha_sources,
                    &mut pending,
                    &mut enqueued,
                );
            }
            loss.on_edge(&d, e);
            for (ci, tracker) in trackers.iter_mut() {
                for w in tracker.on_edge(&d, e) {
                    let c2 = &constraints[*ci];
                    let key = (c2.id, tracker.source, w);
                    if !enqueued.contains(&key) {
                        enqueued.insert(key);
                        pending.push(Request { constraint: c2.id, u: tracker.source, v: w });
                    }
                }
            }
            for &ci in &local {
                let c2 = &constraints[ci];
                for (x, y) in pairs_through_edge(&c2.body, &d, e) {
                    let key = (c2.id, x, y);
                    if !enqueued.contains(&key) {
                        enqueued.insert(key);
                        pending.push(Request { constraint: c2.id, u: x, v: y });
                    }
                }
            }
        }
        if loss.accepts_at(d.b()) {
            break Outcome::FugitiveLost { step };
        }
    };

    Ok(PlayResult {
        transcript: PlayTranscript { seed: Some(seed), initial_word, steps, outcome },
        final_structure: d,
        coords: fugitive.coords().cloned(),
        certificate_ok: fugitive.certificate_ok(),
    })
}
