//! Principle monitors: replay a transcript and flag every step where the
//! fugitive opened outside the start language, wrote a green warm or red
//! cold edge, or let a forbidden-pattern path connect the constants. Also
//! reports, per step, whether the structure was ready for temperature
//! enforcement (the frame condition plus short distances from a' and to b').

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::graph::{Structure, VertexId};
use crate::symbol::{Color, SymbolKind, Temperature};

use super::{forbidden_constraints, GameConfig, PlayTranscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Principle {
    /// the opening word must come from the start language
    StartWord,
    /// no green warm edge, no red cold edge
    Temperature,
    /// no forbidden-pattern path between the constants, in either color
    ForbiddenPattern,
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub step: u32,
    pub principle: Principle,
    pub detail: String,
    /// whether the structure was enforcement-ready when this happened
    pub p2_ready: bool,
}

#[derive(Debug, Clone)]
pub struct MonitorReport {
    pub violations: Vec<Violation>,
    /// readiness after the opening (index 0) and after each step
    pub p2_status: Vec<bool>,
}

impl MonitorReport {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The frame-and-distance condition under which temperature discipline
/// becomes enforceable: the constants carry exactly their two frame edges,
/// every alpha and omega edge sits on the frame, and every other vertex is
/// within distance four from a' and to b'.
pub fn p2_ready(d: &Structure) -> bool {
    let a = d.a();
    let b = d.b();
    if d.in_degree(a) != 0 || d.out_degree(a) != 2 {
        return false;
    }
    if d.out_degree(b) != 0 || d.in_degree(b) != 2 {
        return false;
    }
    let mut a_out = d.out_edges(a);
    let first = a_out.next().expect("degree checked");
    let a_prime = first.dst;
    let labels: BTreeSet<(Color, SymbolKind, Option<Temperature>)> = d
        .out_edges(a)
        .map(|e| (e.label.color, e.label.symbol.kind(), e.label.symbol.temperature()))
        .collect();
    let expected_a: BTreeSet<_> = [
        (Color::Green, SymbolKind::Alpha, Some(Temperature::Cold)),
        (Color::Red, SymbolKind::Alpha, Some(Temperature::Warm)),
    ]
    .into();
    if labels != expected_a || d.out_edges(a).any(|e| e.dst != a_prime) {
        return false;
    }
    let mut b_in = d.in_edges(b);
    let b_prime = b_in.next().expect("degree checked").src;
    let labels_b: BTreeSet<(Color, SymbolKind)> =
        d.in_edges(b).map(|e| (e.label.color, e.label.symbol.kind())).collect();
    let expected_b: BTreeSet<_> =
        [(Color::Green, SymbolKind::Omega), (Color::Red, SymbolKind::Omega)].into();
    if labels_b != expected_b || d.in_edges(b).any(|e| e.src != b_prime) {
        return false;
    }
    for e in d.edges() {
        match e.label.symbol.kind() {
            SymbolKind::Alpha if (e.src, e.dst) != (a, a_prime) => return false,
            SymbolKind::Omega if (e.src, e.dst) != (b_prime, b) => return false,
            _ => {}
        }
    }
    // distances: at most four hops from a' to everything and from
    // everything to b'
    let fwd = bfs(d, a_prime, false);
    let bwd = bfs(d, b_prime, true);
    for v in d.vertices() {
        if v == a || v == b {
            continue;
        }
        match (fwd.get(&v), bwd.get(&v)) {
            (Some(&x), Some(&y)) if x <= 4 && y <= 4 => {}
            _ => return false,
        }
    }
    true
}

fn bfs(d: &Structure, from: VertexId, reverse: bool) -> HashMap<VertexId, u32> {
    let mut dist = HashMap::new();
    dist.insert(from, 0);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        let cur = dist[&v];
        let next: Vec<VertexId> = if reverse {
            d.in_edges(v).map(|e| e.src).collect()
        } else {
            d.out_edges(v).map(|e| e.dst).collect()
        };
        for w in next {
            dist.entry(w).or_insert_with(|| {
                queue.push_back(w);
                cur + 1
            });
        }
    }
    dist
}

/// Replays a transcript and reports every principle violation.
pub fn monitor_principles(config: &GameConfig, t: &PlayTranscript) -> Result<MonitorReport, String> {
    let r = &config.reduction;
    let mut violations = Vec::new();
    let mut p2_status = Vec::new();

    if !r.q_start.contains_word(&t.initial_word) {
        violations.push(Violation {
            step: 0,
            principle: Principle::StartWord,
            detail: format!(
                "opening word {} is outside the start language",
                crate::symbol::word_to_string(&t.initial_word)
            ),
            p2_ready: false,
        });
    }
    let mut d = Structure::new();
    d.push_path(d.a(), d.b(), Color::Green, &t.initial_word).map_err(|e| e.to_string())?;
    p2_status.push(p2_ready(&d));

    let punishers = forbidden_constraints(r);
    let mut reported: BTreeSet<crate::chase::ConstraintId> = BTreeSet::new();
    let constraints: HashMap<_, _> = crate::chase::constraint_system(r)
        .into_iter()
        .map(|c| (c.id, c))
        .collect();

    for s in &t.steps {
        let ready_before = *p2_status.last().expect("status recorded");
        let c = constraints
            .get(&s.constraint)
            .ok_or_else(|| format!("step {}: unknown constraint {}", s.step, s.constraint))?;
        let color = s.constraint.direction.head_color();
        for symbol in &s.word {
            let bad = match (color, symbol.temperature()) {
                (Color::Green, Some(Temperature::Warm)) => true,
                (Color::Red, Some(Temperature::Cold)) => true,
                _ => false,
            };
            if bad {
                violations.push(Violation {
                    step: s.step,
                    principle: Principle::Temperature,
                    detail: format!("{} edge written with {}", color.letter(), symbol),
                    p2_ready: ready_before,
                });
            }
        }
        d.push_path(s.u, s.v, color, &s.word).map_err(|e| format!("step {}: {e}", s.step))?;
        let ready_now = p2_ready(&d);
        p2_status.push(ready_now);
        for p in &punishers {
            if reported.contains(&p.id) {
                continue;
            }
            if p.body.eval_pair(&d, d.a(), d.b()) {
                reported.insert(p.id);
                violations.push(Violation {
                    step: s.step,
                    principle: Principle::ForbiddenPattern,
                    detail: format!(
                        "{} path between the constants (body of {})",
                        p.id.direction.body_color().letter(),
                        p.id
                    ),
                    p2_ready: ready_now,
                });
            }
        }
        let _ = c;
    }
    Ok(MonitorReport { violations, p2_status })
}
