//! Forced-word audit: for each step of a transcript, would the words the
//! fugitive did not play have lost? The claim behind the canonical policy is
//! that its answers are unique up to shades; this audit checks each
//! alternative against a bounded crocodile lookahead instead of assuming it,
//! and reports alternatives it cannot refute.

use crate::chase::{constraint_system, RegularConstraint};
use crate::graph::Structure;
use crate::symbol::{Color, Word};

use super::{GameConfig, PlayTranscript};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlternativeFate {
    /// playing it completes a red start-query path at once
    LosesImmediately,
    /// the crocodile can force the loss within this many further requests
    LosesWithin(u32),
    /// the bounded lookahead found no forced loss
    NotRefuted,
}

#[derive(Debug, Clone)]
pub struct ForcedWordAudit {
    pub step: u32,
    pub constraint: crate::chase::ConstraintId,
    pub chosen: Word,
    pub alternatives: Vec<(Word, AlternativeFate)>,
}

fn same_up_to_shades(a: &Word, b: &Word) -> bool {
    a.len() == b.len()
        && a.iter().zip(b.iter()).all(|(x, y)| x.erase_shade() == y.erase_shade())
}

/// Can the crocodile force a red start-query path between the constants
/// within `depth` further requests, whatever the fugitive answers? Requests
/// whose head words cannot be exhaustively enumerated within the word budget
/// are never counted as forcing, so a positive answer is sound.
fn crocodile_wins(
    d: &Structure,
    constraints: &[RegularConstraint],
    red_q0: &crate::lang::PathLanguage,
    config: &GameConfig,
    depth: u32,
) -> bool {
    if depth == 0 {
        return false;
    }
    let shades = config.reduction.shades();
    for req in crate::chase::requests(constraints, d) {
        let c = constraints.iter().find(|c| c.id == req.constraint).expect("own request");
        let (words, truncated) = c.base.enumerate_words(shades, config.word_budget);
        if truncated || words.is_empty() {
            continue;
        }
        let all_lose = words.iter().all(|w| {
            let mut next = d.clone();
            next.push_path(req.u, req.v, c.id.direction.head_color(), w).expect("endpoints exist");
            red_q0.eval_pair(&next, next.a(), next.b())
                || crocodile_wins(&next, constraints, red_q0, config, depth - 1)
        });
        if all_lose {
            return true;
        }
    }
    false
}

/// Replays a transcript and audits up to `max_steps` of its moves: every
/// head word that differs from the chosen one beyond shades is played in a
/// fork and handed to the bounded crocodile.
pub fn audit_forced_words(
    config: &GameConfig,
    t: &PlayTranscript,
    lookahead: u32,
    max_steps: usize,
) -> Result<Vec<ForcedWordAudit>, String> {
    let constraints = constraint_system(&config.reduction);
    let red_q0 = config.reduction.q0.color(Color::Red).expect("base q0");
    let shades = config.reduction.shades();
    let mut d = Structure::new();
    d.push_path(d.a(), d.b(), Color::Green, &t.initial_word).map_err(|e| e.to_string())?;

    let mut audits = Vec::new();
    for s in &t.steps {
        let c = constraints
            .iter()
            .find(|c| c.id == s.constraint)
            .ok_or_else(|| format!("step {}: unknown constraint", s.step))?;
        if audits.len() < max_steps {
            let (words, _) = c.base.enumerate_words(shades, config.word_budget);
            let mut alternatives = Vec::new();
            for w in words.iter().filter(|w| !same_up_to_shades(w, &s.word)) {
                let mut fork = d.clone();
                fork.push_path(s.u, s.v, c.id.direction.head_color(), w).expect("endpoints");
                let fate = if red_q0.eval_pair(&fork, fork.a(), fork.b()) {
                    AlternativeFate::LosesImmediately
                } else {
                    let mut found = AlternativeFate::NotRefuted;
                    for depth in 1..=lookahead {
                        if crocodile_wins(&fork, &constraints, &red_q0, config, depth) {
                            found = AlternativeFate::LosesWithin(depth);
                            break;
                        }
                    }
                    found
                };
                alternatives.push((w.clone(), fate));
            }
            audits.push(ForcedWordAudit {
                step: s.step,
                constraint: s.constraint,
                chosen: s.word.clone(),
                alternatives,
            });
        }
        d.push_path(s.u, s.v, s.constraint.direction.head_color(), &s.word)
            .map_err(|e| format!("step {}: {e}", s.step))?;
    }
    Ok(audits)
}
