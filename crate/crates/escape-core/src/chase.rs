//! Regular constraints over the doubled signature, request computation and
//! the single growth step that serves a request by writing a fresh path.
//!
//! A constraint pairs one base language with a direction: green-to-red reads
//! the green copy as the body and the red copy as the head, red-to-green the
//! converse. A request is a vertex pair where the body holds and the head
//! does not; serving it never removes anything, so structures only grow.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Structure, VertexId};
use crate::lang::PathLanguage;
use crate::reduce::{LanguageId, ReductionOutput};
use crate::symbol::{Color, Symbol, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// green body, red head
    GreenToRed,
    /// red body, green head
    RedToGreen,
}

impl Direction {
    pub fn body_color(self) -> Color {
        match self {
            Direction::GreenToRed => Color::Green,
            Direction::RedToGreen => Color::Red,
        }
    }

    pub fn head_color(self) -> Color {
        self.body_color().opposite()
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Direction::GreenToRed => "->",
            Direction::RedToGreen => "<-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConstraintId {
    pub language: LanguageId,
    pub direction: Direction,
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.language, self.direction.arrow())
    }
}

/// One regular constraint with its colored body and head automata.
#[derive(Debug, Clone)]
pub struct RegularConstraint {
    pub id: ConstraintId,
    pub base: PathLanguage,
    pub body: PathLanguage,
    pub head: PathLanguage,
}

impl RegularConstraint {
    pub fn new(id: ConstraintId, base: &PathLanguage) -> RegularConstraint {
        let body = base.color(id.direction.body_color()).expect("base language");
        let head = base.color(id.direction.head_color()).expect("base language");
        RegularConstraint { id, base: base.clone(), body, head }
    }
}

/// Both directions of every language of a reduction, in canonical order.
pub fn constraint_system(r: &ReductionOutput) -> Vec<RegularConstraint> {
    let mut out = Vec::new();
    for t in r.tagged() {
        for direction in [Direction::GreenToRed, Direction::RedToGreen] {
            out.push(RegularConstraint::new(
                ConstraintId { language: t.id, direction },
                &t.language,
            ));
        }
    }
    out
}

/// The unit of chase work: a pair where the body holds and the head fails.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Request {
    pub constraint: ConstraintId,
    pub u: VertexId,
    pub v: VertexId,
}

impl fmt::Display for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.u, self.v, self.constraint)
    }
}

/// All requests of the given constraints, sorted by (constraint, u, v).
pub fn requests(constraints: &[RegularConstraint], d: &Structure) -> Vec<Request> {
    let mut out = Vec::new();
    for c in constraints {
        out.extend(requests_of(c, d));
    }
    out.sort();
    out
}

/// Requests of one constraint, sorted by endpoints.
pub fn requests_of(c: &RegularConstraint, d: &Structure) -> Vec<Request> {
    let body_pairs = c.body.eval(d);
    if body_pairs.is_empty() {
        return Vec::new();
    }
    let head_pairs = c.head.eval(d);
    body_pairs
        .difference(&head_pairs)
        .map(|&(u, v)| Request { constraint: c.id, u, v })
        .collect()
}

/// True when no constraint generates a request.
pub fn satisfies(d: &Structure, constraints: &[RegularConstraint]) -> bool {
    constraints.iter().all(|c| requests_of(c, d).is_empty())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChaseError {
    #[error("word is not in the head language of {0}")]
    WordOutsideHead(ConstraintId),
    #[error("request {0} is stale: its head is already satisfied")]
    StaleRequest(String),
    #[error("request {0} is spurious: its body does not hold")]
    NoSuchRequest(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// Serves a request: returns the structure extended with the chosen head
/// word written as a fresh path between the request's endpoints. Rejects
/// words outside the head language, spurious requests and stale requests.
pub fn add(d: &Structure, c: &RegularConstraint, r: &Request, word: &[Symbol]) -> Result<Structure, ChaseError> {
    assert_eq!(c.id, r.constraint, "constraint/request mismatch");
    if !c.base.contains_word(word) {
        return Err(ChaseError::WordOutsideHead(c.id));
    }
    if !c.body.eval_pair(d, r.u, r.v) {
        return Err(ChaseError::NoSuchRequest(r.to_string()));
    }
    if c.head.eval_pair(d, r.u, r.v) {
        return Err(ChaseError::StaleRequest(r.to_string()));
    }
    let mut next = d.clone();
    next.push_path(r.u, r.v, c.id.direction.head_color(), word)?;
    Ok(next)
}

/// The verdict of the counterexample validator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(InvalidReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvalidReason {
    /// some constraint still generates a request; the first one is reported
    UnservedRequest(Request),
    /// the green query fails between the constants
    GreenQueryMissing,
    /// the red query holds between the constants, witnessed by a word
    RedQueryPresent(Word),
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::UnservedRequest(r) => write!(f, "unserved request {r}"),
            InvalidReason::GreenQueryMissing => {
                write!(f, "green start query does not connect the constants")
            }
            InvalidReason::RedQueryPresent(w) => {
                write!(f, "red start query connects the constants via {}", crate::symbol::word_to_string(w))
            }
        }
    }
}

/// Checks the three clauses a finite counterexample must satisfy: every
/// constraint of the system holds, the green query connects a to b, and the
/// red query does not.
pub fn validate_counterexample(m: &Structure, r: &ReductionOutput) -> Verdict {
    let constraints = constraint_system(r);
    for c in &constraints {
        if let Some(first) = requests_of(c, m).into_iter().next() {
            return Verdict::Invalid(InvalidReason::UnservedRequest(first));
        }
    }
    let green_q0 = r.q0.color(Color::Green).expect("base q0");
    if !green_q0.eval_pair(m, m.a(), m.b()) {
        return Verdict::Invalid(InvalidReason::GreenQueryMissing);
    }
    let red_q0 = r.q0.color(Color::Red).expect("base q0");
    if let Some((word, _)) = red_q0.eval_witness(m, m.a(), m.b()) {
        return Verdict::Invalid(InvalidReason::RedQueryPresent(word));
    }
    Verdict::Valid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::reduce;
    use crate::symbol::{Shade, Temperature};
    use crate::tiling::TilingInstance;

    fn system() -> (ReductionOutput, Vec<RegularConstraint>) {
        let r = reduce(&TilingInstance::unconstrained());
        let cs = constraint_system(&r);
        (r, cs)
    }

    #[test]
    fn empty_structure_generates_nothing_and_satisfies_everything() {
        let (_, cs) = system();
        let d = Structure::new();
        assert!(requests(&cs, &d).is_empty());
        assert!(satisfies(&d, &cs));
    }

    #[test]
    fn single_green_omega_demands_its_red_copy() {
        let (_, cs) = system();
        let d = Structure::initial_green(&vec![Symbol::Omega]).unwrap();
        let reqs = requests(&cs, &d);
        assert_eq!(reqs.len(), 1);
        let req = &reqs[0];
        assert_eq!(req.constraint.language, LanguageId::good(1));
        assert_eq!(req.constraint.direction, Direction::GreenToRed);

        let c = cs.iter().find(|c| c.id == req.constraint).unwrap();
        let next = add(&d, c, req, &[Symbol::Omega]).unwrap();
        assert_eq!(next.vertex_count(), d.vertex_count());
        assert_eq!(next.edge_count(), d.edge_count() + 1);
        // the request is gone and re-serving is stale
        assert!(requests(&cs, &next).is_empty());
        assert_eq!(add(&next, c, req, &[Symbol::Omega]), Err(ChaseError::StaleRequest(req.to_string())));
    }

    #[test]
    fn word_outside_head_is_rejected() {
        let (_, cs) = system();
        let d = Structure::initial_green(&vec![Symbol::Omega]).unwrap();
        let req = requests(&cs, &d).remove(0);
        let c = cs.iter().find(|c| c.id == req.constraint).unwrap();
        assert_eq!(
            add(&d, c, &req, &[Symbol::X(Temperature::Warm)]),
            Err(ChaseError::WordOutsideHead(c.id))
        );
    }

    #[test]
    fn initial_position_alone_is_not_a_counterexample() {
        let r = reduce(&TilingInstance::unconstrained());
        let (words, _) = r.q_start.enumerate_words(r.shades(), 10);
        let d = Structure::initial_green(&words[0]).unwrap();
        match validate_counterexample(&d, &r) {
            Verdict::Invalid(InvalidReason::UnservedRequest(_)) => {}
            other => panic!("expected an unserved request, got {other:?}"),
        }
    }

    #[test]
    fn bad_language_for_gray_shade_only() {
        let r = reduce(&TilingInstance::unconstrained());
        let (words, _) = r.bad[0].enumerate_words(r.shades(), 10);
        assert_eq!(words.len(), 1);
        let word = &words[0];
        assert_eq!(word.len(), 5);
        assert_eq!(word[2].shade(), Some(&Shade::gray()));
    }
}
