//! Finite path languages as acyclic automata over symbol patterns.
//!
//! A language is never materialized as a word set: a handful of pattern
//! transitions can stand for billions of words once shades multiply out, so
//! every operation (evaluation, membership, counting) works on the automaton.
//! Evaluation over a structure is the product of the automaton with the
//! graph followed by reachability; word enumeration is shortlex and budgeted.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Structure, VertexId};
use crate::symbol::{Color, Shade, Symbol, SymbolPattern, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colorspace {
    Base,
    Green,
    Red,
    Mixed,
}

/// A transition label: a symbol pattern plus, in colored languages, the
/// required edge color.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelPattern {
    pub color: Option<Color>,
    pub pattern: SymbolPattern,
}

impl LabelPattern {
    pub fn matches(&self, color: Color, symbol: &Symbol) -> bool {
        match self.color {
            Some(c) if c != color => false,
            _ => self.pattern.matches(symbol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub from: u32,
    pub to: u32,
    pub label: LabelPattern,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LangError {
    #[error("language automaton must be acyclic")]
    Cyclic,
    #[error("languages contain no empty word: the start state cannot accept")]
    EpsilonWord,
    #[error("operands use different colorspaces ({0:?} vs {1:?}); recolor explicitly first")]
    ColorspaceMismatch(Colorspace, Colorspace),
    #[error("language is already colored ({0:?})")]
    AlreadyColored(Colorspace),
    #[error("sigma_upto needs n >= 1")]
    BadBound,
}

/// A finite path language. Invariants: the automaton is acyclic, every state
/// lies on a path from the start to an accepting state, and the start state
/// does not accept (no empty word).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathLanguage {
    n_states: u32,
    start: u32,
    accepting: BTreeSet<u32>,
    transitions: Vec<Transition>,
    colorspace: Colorspace,
}

impl PathLanguage {
    pub fn build(
        n_states: u32,
        start: u32,
        accepting: impl IntoIterator<Item = u32>,
        transitions: Vec<Transition>,
        colorspace: Colorspace,
    ) -> Result<PathLanguage, LangError> {
        let lang = PathLanguage {
            n_states,
            start,
            accepting: accepting.into_iter().collect(),
            transitions,
            colorspace,
        };
        if lang.accepting.contains(&start) {
            return Err(LangError::EpsilonWord);
        }
        let lang = lang.pruned();
        lang.topo_order().ok_or(LangError::Cyclic)?;
        Ok(lang)
    }

    /// The one-word-per-symbol language of a pattern (all words length 1).
    pub fn from_pattern(p: SymbolPattern) -> PathLanguage {
        PathLanguage {
            n_states: 2,
            start: 0,
            accepting: [1].into(),
            transitions: vec![Transition { from: 0, to: 1, label: LabelPattern { color: None, pattern: p } }],
            colorspace: Colorspace::Base,
        }
    }

    /// The language of a single word.
    pub fn from_word(word: &[Symbol]) -> PathLanguage {
        assert!(!word.is_empty(), "languages contain no empty word");
        let transitions = word
            .iter()
            .enumerate()
            .map(|(i, s)| Transition {
                from: i as u32,
                to: i as u32 + 1,
                label: LabelPattern { color: None, pattern: SymbolPattern::exact(s) },
            })
            .collect();
        PathLanguage {
            n_states: word.len() as u32 + 1,
            start: 0,
            accepting: [word.len() as u32].into(),
            transitions,
            colorspace: Colorspace::Base,
        }
    }

    /// A chain of patterns read in order (one word shape).
    pub fn from_shape(patterns: &[SymbolPattern]) -> PathLanguage {
        assert!(!patterns.is_empty());
        let transitions = patterns
            .iter()
            .enumerate()
            .map(|(i, p)| Transition {
                from: i as u32,
                to: i as u32 + 1,
                label: LabelPattern { color: None, pattern: p.clone() },
            })
            .collect();
        PathLanguage {
            n_states: patterns.len() as u32 + 1,
            start: 0,
            accepting: [patterns.len() as u32].into(),
            transitions,
            colorspace: Colorspace::Base,
        }
    }

    /// All words of length 1..=n over the full alphabet.
    pub fn sigma_upto(n: u32) -> Result<PathLanguage, LangError> {
        if n < 1 {
            return Err(LangError::BadBound);
        }
        let mut transitions = Vec::new();
        for i in 0..n {
            transitions.push(Transition {
                from: i,
                to: i + 1,
                label: LabelPattern { color: None, pattern: SymbolPattern::any() },
            });
        }
        PathLanguage::build(n + 1, 0, 1..=n, transitions, Colorspace::Base)
    }

    pub fn union(a: &PathLanguage, b: &PathLanguage) -> Result<PathLanguage, LangError> {
        if a.colorspace != b.colorspace {
            return Err(LangError::ColorspaceMismatch(a.colorspace, b.colorspace));
        }
        // fresh start replicating both start states' out-transitions
        let offset_a = 1;
        let offset_b = 1 + a.n_states;
        let mut transitions = Vec::new();
        let mut accepting = BTreeSet::new();
        for t in &a.transitions {
            transitions.push(Transition { from: t.from + offset_a, to: t.to + offset_a, label: t.label.clone() });
            if t.from == a.start {
                transitions.push(Transition { from: 0, to: t.to + offset_a, label: t.label.clone() });
            }
        }
        for t in &b.transitions {
            transitions.push(Transition { from: t.from + offset_b, to: t.to + offset_b, label: t.label.clone() });
            if t.from == b.start {
                transitions.push(Transition { from: 0, to: t.to + offset_b, label: t.label.clone() });
            }
        }
        accepting.extend(a.accepting.iter().map(|s| s + offset_a));
        accepting.extend(b.accepting.iter().map(|s| s + offset_b));
        PathLanguage::build(1 + a.n_states + b.n_states, 0, accepting, transitions, a.colorspace)
    }

    pub fn union_all(langs: &[PathLanguage]) -> Result<PathLanguage, LangError> {
        let mut it = langs.iter();
        let first = it.next().expect("union of at least one language").clone();
        it.try_fold(first, |acc, l| PathLanguage::union(&acc, l))
    }

    pub fn concat(a: &PathLanguage, b: &PathLanguage) -> Result<PathLanguage, LangError> {
        if a.colorspace != b.colorspace {
            return Err(LangError::ColorspaceMismatch(a.colorspace, b.colorspace));
        }
        let offset_b = a.n_states;
        let mut transitions = a.transitions.clone();
        for t in &b.transitions {
            transitions.push(Transition { from: t.from + offset_b, to: t.to + offset_b, label: t.label.clone() });
            // entering b from any accepting state of a
            if t.from == b.start {
                for &acc in &a.accepting {
                    transitions.push(Transition { from: acc, to: t.to + offset_b, label: t.label.clone() });
                }
            }
        }
        let accepting: BTreeSet<u32> = b.accepting.iter().map(|s| s + offset_b).collect();
        PathLanguage::build(a.n_states + b.n_states, a.start, accepting, transitions, a.colorspace)
    }

    /// Recolors a base language wholesale; size and shape are preserved.
    pub fn color(&self, color: Color) -> Result<PathLanguage, LangError> {
        if self.colorspace != Colorspace::Base {
            return Err(LangError::AlreadyColored(self.colorspace));
        }
        let mut out = self.clone();
        out.colorspace = match color {
            Color::Green => Colorspace::Green,
            Color::Red => Colorspace::Red,
        };
        for t in &mut out.transitions {
            t.label.color = Some(color);
        }
        Ok(out)
    }

    pub fn colorspace(&self) -> Colorspace {
        self.colorspace
    }

    pub fn state_count(&self) -> u32 {
        self.n_states
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn accepting(&self) -> &BTreeSet<u32> {
        &self.accepting
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Drops states not on a start-to-accept path and renumbers densely.
    fn pruned(&self) -> PathLanguage {
        let mut fwd: HashSet<u32> = HashSet::new();
        let mut stack = vec![self.start];
        while let Some(q) = stack.pop() {
            if fwd.insert(q) {
                for t in self.transitions.iter().filter(|t| t.from == q) {
                    stack.push(t.to);
                }
            }
        }
        let mut bwd: HashSet<u32> = HashSet::new();
        let mut stack: Vec<u32> = self.accepting.iter().copied().collect();
        while let Some(q) = stack.pop() {
            if bwd.insert(q) {
                for t in self.transitions.iter().filter(|t| t.to == q) {
                    stack.push(t.from);
                }
            }
        }
        let alive: BTreeSet<u32> = fwd.intersection(&bwd).copied().collect();
        let renumber: BTreeMap<u32, u32> =
            alive.iter().enumerate().map(|(i, q)| (*q, i as u32)).collect();
        PathLanguage {
            n_states: alive.len() as u32,
            start: renumber[&self.start],
            accepting: self.accepting.iter().filter_map(|q| renumber.get(q).copied()).collect(),
            transitions: self
                .transitions
                .iter()
                .filter(|t| alive.contains(&t.from) && alive.contains(&t.to))
                .map(|t| Transition { from: renumber[&t.from], to: renumber[&t.to], label: t.label.clone() })
                .collect(),
            colorspace: self.colorspace,
        }
    }

    fn topo_order(&self) -> Option<Vec<u32>> {
        let mut indegree = vec![0usize; self.n_states as usize];
        for t in &self.transitions {
            indegree[t.to as usize] += 1;
        }
        let mut queue: Vec<u32> =
            (0..self.n_states).filter(|q| indegree[*q as usize] == 0).collect();
        queue.sort();
        let mut order = Vec::new();
        let mut i = 0;
        while i < queue.len() {
            let q = queue[i];
            i += 1;
            order.push(q);
            let mut freed: Vec<u32> = Vec::new();
            for t in self.transitions.iter().filter(|t| t.from == q) {
                indegree[t.to as usize] -= 1;
                if indegree[t.to as usize] == 0 {
                    freed.push(t.to);
                }
            }
            freed.sort();
            freed.dedup();
            queue.extend(freed);
        }
        (order.len() == self.n_states as usize).then_some(order)
    }

    /// Length of the longest accepted word.
    pub fn max_word_len(&self) -> u32 {
        let order = self.topo_order().expect("invariant: acyclic");
        let mut dist: HashMap<u32, u32> = HashMap::new();
        dist.insert(self.start, 0);
        let mut best = 0;
        for q in order {
            let Some(&d) = dist.get(&q) else { continue };
            if self.accepting.contains(&q) {
                best = best.max(d);
            }
            for t in self.transitions.iter().filter(|t| t.from == q) {
                let e = dist.entry(t.to).or_insert(0);
                *e = (*e).max(d + 1);
            }
        }
        best
    }

    /// Number of distinct words over the given shade set.
    pub fn count_words(&self, shades: &[Shade]) -> u128 {
        // distinct words, so run the count on the determinized state sets
        let n = shades.len() as u64;
        let mut memo: HashMap<BTreeSet<u32>, u128> = HashMap::new();
        self.count_from(&BTreeSet::from([self.start]), n, shades, &mut memo)
    }

    fn count_from(
        &self,
        states: &BTreeSet<u32>,
        n_shades: u64,
        shades: &[Shade],
        memo: &mut HashMap<BTreeSet<u32>, u128>,
    ) -> u128 {
        if let Some(&c) = memo.get(states) {
            return c;
        }
        // group successor state-sets by concrete next symbol
        let mut by_symbol: BTreeMap<Symbol, BTreeSet<u32>> = BTreeMap::new();
        let mut uniform: Vec<(&Transition, u64)> = Vec::new();
        // when patterns out of this state set never overlap we could multiply,
        // but overlap is common (unions share prefixes), so expand symbols.
        for q in states {
            for t in self.transitions.iter().filter(|t| t.from == *q) {
                uniform.push((t, t.label.pattern.denotation_size(n_shades)));
            }
        }
        let mut total: u128 = 0;
        if uniform.is_empty() {
            memo.insert(states.clone(), 0);
            return 0;
        }
        // fast path: a single transition with no sibling overlap
        if uniform.len() == 1 {
            let (t, size) = (&uniform[0].0, uniform[0].1);
            let mut next = BTreeSet::new();
            next.insert(t.to);
            let sub = self.count_from(&next, n_shades, shades, memo);
            let here = if next.iter().any(|q| self.accepting.contains(q)) { 1 } else { 0 };
            total = size as u128 * (sub + here);
            // `here` counts the word ending exactly after this transition; sub
            // counts strict continuations. Avoid double counting: count_from
            // counts continuations only, so add acceptance separately.
            memo.insert(states.clone(), total);
            return total;
        }
        for (t, _) in &uniform {
            for symbol in t.label.pattern.expand(shades) {
                by_symbol.entry(symbol).or_default().insert(t.to);
            }
        }
        for (_, next) in by_symbol {
            let accept_here = next.iter().any(|q| self.accepting.contains(q));
            total += self.count_from(&next, n_shades, shades, memo);
            if accept_here {
                total += 1;
            }
        }
        memo.insert(states.clone(), total);
        total
    }

    /// Word membership by state-set simulation.
    pub fn contains_word(&self, word: &[Symbol]) -> bool {
        if word.is_empty() {
            return false;
        }
        let mut states: BTreeSet<u32> = BTreeSet::from([self.start]);
        for symbol in word {
            let mut next = BTreeSet::new();
            for q in &states {
                for t in self.transitions.iter().filter(|t| t.from == *q) {
                    if t.label.pattern.matches(symbol) {
                        next.insert(t.to);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            states = next;
        }
        states.iter().any(|q| self.accepting.contains(q))
    }

    /// Words in shortlex order (length first, then the canonical symbol
    /// order), truncated at `budget`. The boolean reports truncation.
    pub fn enumerate_words(&self, shades: &[Shade], budget: usize) -> (Vec<Word>, bool) {
        assert!(budget >= 1);
        let mut out = Vec::new();
        let maxlen = self.max_word_len();
        // feasible(q, k): can we accept in exactly k more symbols from q?
        let mut feasible: HashMap<(u32, u32), bool> = HashMap::new();
        fn feas(lang: &PathLanguage, q: u32, k: u32, memo: &mut HashMap<(u32, u32), bool>) -> bool {
            if let Some(&v) = memo.get(&(q, k)) {
                return v;
            }
            let v = if k == 0 {
                lang.accepting.contains(&q)
            } else {
                lang.transitions.iter().any(|t| t.from == q && feas(lang, t.to, k - 1, memo))
            };
            memo.insert((q, k), v);
            v
        }
        'lens: for len in 1..=maxlen {
            let mut prefix: Word = Vec::new();
            let start: BTreeSet<u32> = BTreeSet::from([self.start]);
            if !self.enum_rec(&start, len, shades, &mut prefix, &mut out, budget, &mut feasible, feas) {
                break 'lens;
            }
        }
        let truncated = (out.len() as u128) < self.count_words(shades);
        (out, truncated)
    }

    #[allow(clippy::too_many_arguments)]
    fn enum_rec(
        &self,
        states: &BTreeSet<u32>,
        remaining: u32,
        shades: &[Shade],
        prefix: &mut Word,
        out: &mut Vec<Word>,
        budget: usize,
        memo: &mut HashMap<(u32, u32), bool>,
        feas: fn(&PathLanguage, u32, u32, &mut HashMap<(u32, u32), bool>) -> bool,
    ) -> bool {
        if remaining == 0 {
            if states.iter().any(|q| self.accepting.contains(q)) {
                out.push(prefix.clone());
                if out.len() >= budget {
                    return false;
                }
            }
            return true;
        }
        let mut by_symbol: BTreeMap<Symbol, BTreeSet<u32>> = BTreeMap::new();
        for q in states {
            for t in self.transitions.iter().filter(|t| t.from == *q) {
                if feas(self, t.to, remaining - 1, memo) {
                    for symbol in t.label.pattern.expand(shades) {
                        by_symbol.entry(symbol).or_default().insert(t.to);
                    }
                }
            }
        }
        for (symbol, next) in by_symbol {
            prefix.push(symbol);
            let keep_going = self.enum_rec(&next, remaining - 1, shades, prefix, out, budget, memo, feas);
            prefix.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }

    /// All endpoint pairs connected by a path spelling a word of this
    /// language: the product of the automaton with the structure plus
    /// reachability, never word enumeration.
    pub fn eval(&self, d: &Structure) -> BTreeSet<(VertexId, VertexId)> {
        assert!(self.colorspace != Colorspace::Base, "evaluation needs a colored language");
        let order = self.topo_order().expect("invariant: acyclic");
        let mut outgoing: HashMap<u32, Vec<&Transition>> = HashMap::new();
        for t in &self.transitions {
            outgoing.entry(t.from).or_default().push(t);
        }
        // reach[q]: pairs (u, v) such that a start->q word labels a u->v path
        let mut reach: HashMap<u32, HashSet<(VertexId, VertexId)>> = HashMap::new();
        reach.insert(self.start, d.vertices().map(|v| (v, v)).collect());
        let mut result = BTreeSet::new();
        for q in order {
            let Some(pairs) = reach.get(&q).cloned() else { continue };
            if self.accepting.contains(&q) && q != self.start {
                result.extend(pairs.iter().copied());
            }
            let Some(ts) = outgoing.get(&q) else { continue };
            for t in ts {
                let mut next: Vec<(VertexId, VertexId)> = Vec::new();
                for &(u, v) in &pairs {
                    for e in d.out_edges(v) {
                        if t.label.matches(e.label.color, &e.label.symbol) {
                            next.push((u, e.dst));
                        }
                    }
                }
                reach.entry(t.to).or_default().extend(next);
            }
        }
        result
    }

    /// Does some word of the language label a path from `u` to `v`?
    pub fn eval_pair(&self, d: &Structure, u: VertexId, v: VertexId) -> bool {
        assert!(self.colorspace != Colorspace::Base);
        let mut seen: HashSet<(u32, VertexId)> = HashSet::new();
        let mut stack = vec![(self.start, u)];
        while let Some((q, w)) = stack.pop() {
            if !seen.insert((q, w)) {
                continue;
            }
            if w == v && self.accepting.contains(&q) && q != self.start {
                return true;
            }
            for t in self.transitions.iter().filter(|t| t.from == q) {
                for e in d.out_edges(w) {
                    if t.label.matches(e.label.color, &e.label.symbol) {
                        stack.push((t.to, e.dst));
                    }
                }
            }
        }
        false
    }

    /// A witness for `eval_pair`: the word and the full vertex path,
    /// deterministic for a fixed structure. Prefers shorter witnesses.
    pub fn eval_witness(
        &self,
        d: &Structure,
        u: VertexId,
        v: VertexId,
    ) -> Option<(Word, Vec<VertexId>)> {
        assert!(self.colorspace != Colorspace::Base);
        // BFS over the product graph gives a shortest, deterministic witness
        let mut prev: HashMap<(u32, VertexId), ((u32, VertexId), Symbol)> = HashMap::new();
        let mut queue = std::collections::VecDeque::new();
        let start = (self.start, u);
        queue.push_back(start);
        let mut seen: HashSet<(u32, VertexId)> = HashSet::from([start]);
        while let Some((q, w)) = queue.pop_front() {
            if w == v && self.accepting.contains(&q) && q != self.start {
                let mut word = Vec::new();
                let mut path = vec![w];
                let mut cur = (q, w);
                while cur != start {
                    let (p, s) = prev[&cur].clone();
                    word.push(s);
                    path.push(p.1);
                    cur = p;
                }
                word.reverse();
                path.reverse();
                return Some((word, path));
            }
            let mut steps: Vec<((u32, VertexId), Symbol)> = Vec::new();
            for t in self.transitions.iter().filter(|t| t.from == q) {
                for e in d.out_edges(w) {
                    if t.label.matches(e.label.color, &e.label.symbol) {
                        steps.push(((t.to, e.dst), e.label.symbol.clone()));
                    }
                }
            }
            steps.sort();
            for (next, symbol) in steps {
                if seen.insert(next) {
                    prev.insert(next, ((q, w), symbol));
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Temperature;

    fn x(t: Temperature) -> Symbol {
        Symbol::X(t)
    }

    #[test]
    fn union_of_two_patterns_is_the_two_word_language() {
        let l = PathLanguage::union(
            &PathLanguage::from_word(&[x(Temperature::Cold)]),
            &PathLanguage::from_word(&[x(Temperature::Warm)]),
        )
        .unwrap();
        let shades = [Shade::gray(), Shade::black()];
        let (words, truncated) = l.enumerate_words(&shades, 10);
        assert!(!truncated);
        assert_eq!(words, vec![vec![x(Temperature::Cold)], vec![x(Temperature::Warm)]]);
        assert!(l.contains_word(&[x(Temperature::Cold)]));
        assert!(!l.contains_word(&[Symbol::Omega]));
    }

    #[test]
    fn concat_extends_max_len_by_one() {
        let l = PathLanguage::union(
            &PathLanguage::from_word(&[x(Temperature::Cold)]),
            &PathLanguage::from_word(&[x(Temperature::Cold), x(Temperature::Warm)]),
        )
        .unwrap();
        let omega = PathLanguage::from_word(&[Symbol::Omega]);
        let c = PathLanguage::concat(&l, &omega).unwrap();
        assert_eq!(c.max_word_len(), l.max_word_len() + 1);
    }

    #[test]
    fn sigma_upto_counts() {
        let shades = [Shade::gray(), Shade::black()];
        let l = PathLanguage::sigma_upto(4).unwrap();
        let sigma = 8 * shades.len() as u128 + 9;
        let expected: u128 = (1..=4).map(|i| sigma.pow(i)).sum();
        assert_eq!(l.count_words(&shades), expected);
        assert!(PathLanguage::sigma_upto(0).is_err());
    }

    #[test]
    fn color_preserves_size_and_rejects_recolor() {
        let l = PathLanguage::union(
            &PathLanguage::from_word(&[Symbol::Omega]),
            &PathLanguage::from_word(&[x(Temperature::Warm), Symbol::Omega]),
        )
        .unwrap();
        let shades = [Shade::gray()];
        let green = l.color(Color::Green).unwrap();
        assert_eq!(green.count_words(&shades), l.count_words(&shades));
        assert_eq!(green.color(Color::Red), Err(LangError::AlreadyColored(Colorspace::Green)));
    }

    #[test]
    fn eval_finds_the_frozen_word() {
        let word = vec![x(Temperature::Cold), Symbol::Omega];
        let lang = PathLanguage::from_word(&word).color(Color::Green).unwrap();
        let d = Structure::initial_green(&word).unwrap();
        let pairs = lang.eval(&d);
        assert!(pairs.contains(&(d.a(), d.b())));
        assert!(lang.eval_pair(&d, d.a(), d.b()));
        let (w, path) = lang.eval_witness(&d, d.a(), d.b()).unwrap();
        assert_eq!(w, word);
        assert_eq!(path.len(), 3);
    }

    #[test]
    fn truncated_enumeration_reports_it() {
        let l = PathLanguage::union(
            &PathLanguage::from_word(&[x(Temperature::Cold)]),
            &PathLanguage::from_word(&[x(Temperature::Warm)]),
        )
        .unwrap();
        let (words, truncated) = l.enumerate_words(&[Shade::gray()], 1);
        assert_eq!(words.len(), 1);
        assert!(truncated);
    }
}
