//! Shared brute-force oracles, independent of the engine's evaluation paths:
//! path enumeration for query evaluation, exhaustive map enumeration for
//! homomorphisms, and seeded random structure generators.
#![allow(dead_code)] // each test binary uses its own subset

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use escape_core::chase::{Request, RegularConstraint};
use escape_core::graph::{Structure, VertexId, VertexMap};
use escape_core::lang::PathLanguage;
use escape_core::symbol::{alphabet, Color, EdgeLabel, Shade, Symbol, Word};

/// All pairs connected by a path spelling a word of the language, found by
/// enumerating every directed path up to the language's maximum length and
/// testing membership by direct automaton simulation.
pub fn brute_eval(lang: &PathLanguage, d: &Structure) -> BTreeSet<(VertexId, VertexId)> {
    let color = match lang.colorspace() {
        escape_core::lang::Colorspace::Green => Color::Green,
        escape_core::lang::Colorspace::Red => Color::Red,
        other => panic!("oracle needs a single-color language, got {other:?}"),
    };
    let maxlen = lang.max_word_len() as usize;
    let mut out = BTreeSet::new();
    for u in d.vertices() {
        let mut stack: Vec<(VertexId, Word)> = vec![(u, Vec::new())];
        while let Some((at, word)) = stack.pop() {
            if !word.is_empty() && lang.contains_word(&word) {
                out.insert((u, at));
            }
            if word.len() == maxlen {
                continue;
            }
            for e in d.out_edges(at) {
                if e.label.color == color {
                    let mut next = word.clone();
                    next.push(e.label.symbol.clone());
                    stack.push((e.dst, next));
                }
            }
        }
    }
    out
}

/// Requests by definition: brute body pairs minus brute head pairs.
pub fn brute_requests(constraints: &[RegularConstraint], d: &Structure) -> Vec<Request> {
    let mut out = Vec::new();
    for c in constraints {
        let body = brute_eval(&c.body, d);
        let head = brute_eval(&c.head, d);
        for &(u, v) in body.difference(&head) {
            out.push(Request { constraint: c.id, u, v });
        }
    }
    out.sort();
    out
}

/// Exhaustive homomorphism search: every total map from source vertices to
/// target vertices, constants fixed, checked edge by edge.
pub fn brute_homomorphism(source: &Structure, target: &Structure) -> Option<VertexMap> {
    let src: Vec<VertexId> = source.vertices().collect();
    let tgt: Vec<VertexId> = target.vertices().collect();
    let mut indices = vec![0usize; src.len()];
    loop {
        let map = VertexMap {
            map: src.iter().zip(indices.iter()).map(|(s, &i)| (*s, tgt[i])).collect(),
        };
        if map.is_homomorphism(source, target) {
            return Some(map);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == indices.len() {
                return None;
            }
            indices[pos] += 1;
            if indices[pos] < tgt.len() {
                break;
            }
            indices[pos] = 0;
            pos += 1;
        }
    }
}

/// A seeded random structure: up to `max_vertices` vertices (including the
/// constants) and `max_edges` random edges over the two-shade alphabet, with
/// out-degrees capped so that path enumeration stays bounded.
pub fn random_structure(seed: u64, max_vertices: u32, max_edges: usize) -> Structure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Structure::new();
    let extra = rng.gen_range(0..=max_vertices.saturating_sub(2));
    for _ in 0..extra {
        d.fresh_vertex();
    }
    let vs: Vec<VertexId> = d.vertices().collect();
    let pool: Vec<Symbol> = alphabet(&[Shade::gray(), Shade::black()]);
    let n_edges = rng.gen_range(0..=max_edges);
    for _ in 0..n_edges {
        let u = vs[rng.gen_range(0..vs.len())];
        if d.out_degree(u) >= 3 {
            continue;
        }
        let v = vs[rng.gen_range(0..vs.len())];
        let color = if rng.gen_bool(0.5) { Color::Green } else { Color::Red };
        let symbol = pool[rng.gen_range(0..pool.len())].clone();
        d.insert_edge(u, v, EdgeLabel { color, symbol });
    }
    d
}

/// Rough count of directed paths up to the given length; used to skip
/// pathological random structures in the brute-force comparison.
pub fn path_count(d: &Structure, maxlen: usize, cap: usize) -> usize {
    let mut total = 0usize;
    for u in d.vertices() {
        let mut stack = vec![(u, 0usize)];
        while let Some((at, len)) = stack.pop() {
            total += 1;
            if total > cap {
                return total;
            }
            if len == maxlen {
                continue;
            }
            for e in d.out_edges(at) {
                stack.push((e.dst, len + 1));
            }
        }
    }
    total
}
