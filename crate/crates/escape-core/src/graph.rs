//! Finite directed edge-labeled multigraphs with two distinguished constants
//! `a` and `b`, plus homomorphism and isomorphism search over them.
//!
//! Parallel edges with distinct labels are allowed; a repeated
//! (source, target, label) triple is stored once. Vertex ids are allocated by
//! a per-structure counter and are preserved by serialization so that replays
//! are reproducible.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::symbol::{Color, EdgeLabel, Symbol, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Role names used by the canonical builders. The derived order is the
/// canonical allocation order of named structures: a, b, a', b', path
/// vertices, grid vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexName {
    A,
    B,
    APrime,
    BPrime,
    Path(u32),
    Grid(u32, u32),
}

impl fmt::Display for VertexName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexName::A => write!(f, "a"),
            VertexName::B => write!(f, "b"),
            VertexName::APrime => write!(f, "a'"),
            VertexName::BPrime => write!(f, "b'"),
            VertexName::Path(i) => write!(f, "v{i}"),
            VertexName::Grid(i, j) => write!(f, "v{i},{j}"),
        }
    }
}

impl VertexName {
    pub fn parse(s: &str) -> Option<VertexName> {
        match s {
            "a" => return Some(VertexName::A),
            "b" => return Some(VertexName::B),
            "a'" => return Some(VertexName::APrime),
            "b'" => return Some(VertexName::BPrime),
            _ => {}
        }
        let rest = s.strip_prefix('v')?;
        if let Some((i, j)) = rest.split_once(',') {
            Some(VertexName::Grid(i.parse().ok()?, j.parse().ok()?))
        } else {
            Some(VertexName::Path(rest.parse().ok()?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub label: EdgeLabel,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("empty word: paths must carry at least one symbol")]
    EmptyWord,
    #[error("vertex {0} is not part of the structure")]
    NoSuchVertex(VertexId),
    #[error("seed maps {0} more than once")]
    SeedConflict(VertexId),
    #[error("seed must map a to a and b to b")]
    SeedConstants,
    #[error("seed mentions a vertex outside the structures")]
    SeedOutOfRange,
}

/// The game board: a finite directed multigraph over colored symbols with
/// distinguished constants `a` and `b`.
#[derive(Debug, Clone)]
pub struct Structure {
    vertices: BTreeSet<VertexId>,
    edges: BTreeSet<Edge>,
    a: VertexId,
    b: VertexId,
    names: BTreeMap<VertexId, VertexName>,
    next_id: u32,
    // adjacency caches, rebuilt incrementally; indices into `edge_list`
    edge_list: Vec<Edge>,
    out: HashMap<VertexId, Vec<usize>>,
    inc: HashMap<VertexId, Vec<usize>>,
    pair: HashMap<(VertexId, VertexId), Vec<usize>>,
}

impl Structure {
    /// A fresh structure containing only the constants: a gets id 0, b id 1.
    pub fn new() -> Structure {
        let a = VertexId(0);
        let b = VertexId(1);
        let mut s = Structure {
            vertices: BTreeSet::new(),
            edges: BTreeSet::new(),
            a,
            b,
            names: BTreeMap::new(),
            next_id: 2,
            edge_list: Vec::new(),
            out: HashMap::new(),
            inc: HashMap::new(),
            pair: HashMap::new(),
        };
        s.vertices.insert(a);
        s.vertices.insert(b);
        s.names.insert(a, VertexName::A);
        s.names.insert(b, VertexName::B);
        s
    }

    pub fn a(&self) -> VertexId {
        self.a
    }

    pub fn b(&self) -> VertexId {
        self.b
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter()
    }

    pub fn has_edge(&self, src: VertexId, dst: VertexId, label: &EdgeLabel) -> bool {
        self.edges.contains(&Edge { src, dst, label: label.clone() })
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.out.get(&v).into_iter().flatten().map(move |&i| &self.edge_list[i])
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.inc.get(&v).into_iter().flatten().map(move |&i| &self.edge_list[i])
    }

    pub fn edges_between(&self, u: VertexId, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.pair.get(&(u, v)).into_iter().flatten().map(move |&i| &self.edge_list[i])
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out.get(&v).map_or(0, |e| e.len())
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.inc.get(&v).map_or(0, |e| e.len())
    }

    pub fn name_of(&self, v: VertexId) -> Option<VertexName> {
        self.names.get(&v).copied()
    }

    pub fn vertex_by_name(&self, name: VertexName) -> Option<VertexId> {
        self.names.iter().find(|(_, n)| **n == name).map(|(v, _)| *v)
    }

    pub fn set_name(&mut self, v: VertexId, name: VertexName) {
        assert!(self.vertices.contains(&v));
        self.names.insert(v, name);
    }

    pub fn names(&self) -> &BTreeMap<VertexId, VertexName> {
        &self.names
    }

    pub fn fresh_vertex(&mut self) -> VertexId {
        let id = VertexId(self.next_id);
        self.next_id += 1;
        self.vertices.insert(id);
        id
    }

    /// Inserts one labeled edge. Duplicate triples are ignored (set
    /// semantics). Returns true when the edge is new.
    pub fn insert_edge(&mut self, src: VertexId, dst: VertexId, label: EdgeLabel) -> bool {
        assert!(self.vertices.contains(&src), "unknown source {src}");
        assert!(self.vertices.contains(&dst), "unknown target {dst}");
        let edge = Edge { src, dst, label };
        if !self.edges.insert(edge.clone()) {
            return false;
        }
        let idx = self.edge_list.len();
        self.out.entry(src).or_default().push(idx);
        self.inc.entry(dst).or_default().push(idx);
        self.pair.entry((src, dst)).or_default().push(idx);
        self.edge_list.push(edge);
        true
    }

    /// Writes a colored word as a fresh path from `u` to `v`, allocating
    /// fresh intermediate vertices, and returns the ids of those vertices.
    pub fn push_path(
        &mut self,
        u: VertexId,
        v: VertexId,
        color: Color,
        word: &[Symbol],
    ) -> Result<Vec<VertexId>, GraphError> {
        if word.is_empty() {
            return Err(GraphError::EmptyWord);
        }
        if !self.vertices.contains(&u) {
            return Err(GraphError::NoSuchVertex(u));
        }
        if !self.vertices.contains(&v) {
            return Err(GraphError::NoSuchVertex(v));
        }
        let mut fresh = Vec::new();
        let mut cur = u;
        for (i, symbol) in word.iter().enumerate() {
            let next = if i + 1 == word.len() {
                v
            } else {
                let id = self.fresh_vertex();
                fresh.push(id);
                id
            };
            self.insert_edge(cur, next, EdgeLabel { color, symbol: symbol.clone() });
            cur = next;
        }
        Ok(fresh)
    }

    /// The canonical path structure of a word: this structure extended with a
    /// fresh path from `u` to `v` carrying the word's labels in order. The
    /// receiver is not modified.
    pub fn freeze(&self, word: &[EdgeLabel], u: VertexId, v: VertexId) -> Result<Structure, GraphError> {
        if word.is_empty() {
            return Err(GraphError::EmptyWord);
        }
        let mut next = self.clone();
        let mut cur = u;
        if !next.vertices.contains(&u) {
            return Err(GraphError::NoSuchVertex(u));
        }
        if !next.vertices.contains(&v) {
            return Err(GraphError::NoSuchVertex(v));
        }
        for (i, label) in word.iter().enumerate() {
            let target = if i + 1 == word.len() { v } else { next.fresh_vertex() };
            next.insert_edge(cur, target, label.clone());
            cur = target;
        }
        Ok(next)
    }

    /// The initial game position for a word: a two-vertex structure holding
    /// only `a` and `b`, extended with the green path labeled by `word`.
    pub fn initial_green(word: &Word) -> Result<Structure, GraphError> {
        let mut s = Structure::new();
        s.push_path(s.a, s.b, Color::Green, word)?;
        Ok(s)
    }

    /// Stable content hash of the canonical serialization.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("structure serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The edge set with every grid shade erased; basis of all shade-blind
    /// comparisons.
    pub fn shade_erased_edges(&self) -> BTreeSet<Edge> {
        self.edges
            .iter()
            .map(|e| Edge {
                src: e.src,
                dst: e.dst,
                label: EdgeLabel { color: e.label.color, symbol: e.label.symbol.erase_shade() },
            })
            .collect()
    }

    /// Renumbers vertices so that named vertices take dense ids in canonical
    /// name order. Every vertex must be named.
    pub fn canonicalize_by_names(&self) -> Option<Structure> {
        if self.names.len() != self.vertices.len() {
            return None;
        }
        let mut named: Vec<(VertexName, VertexId)> =
            self.names.iter().map(|(v, n)| (*n, *v)).collect();
        named.sort();
        let mut map = BTreeMap::new();
        for (i, (_, v)) in named.iter().enumerate() {
            map.insert(*v, VertexId(i as u32));
        }
        let mut out = Structure::new();
        out.next_id = named.len() as u32;
        for (name, v) in &named {
            let nv = map[v];
            out.vertices.insert(nv);
            out.names.insert(nv, *name);
        }
        for e in &self.edges {
            out.insert_edge(map[&e.src], map[&e.dst], e.label.clone());
        }
        Some(out)
    }
}

impl Default for Structure {
    fn default() -> Self {
        Structure::new()
    }
}

impl PartialEq for Structure {
    /// Content equality: constants, vertex set, labeled edge set and names.
    /// Adjacency caches and insertion order are irrelevant.
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
            && self.b == other.b
            && self.vertices == other.vertices
            && self.edges == other.edges
            && self.names == other.names
    }
}

impl Eq for Structure {}

/// A partial map between vertex sets, used both as a homomorphism seed and
/// as a returned certificate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexMap {
    pub map: BTreeMap<VertexId, VertexId>,
}

impl VertexMap {
    pub fn identity_on(s: &Structure) -> VertexMap {
        VertexMap { map: s.vertices().map(|v| (v, v)).collect() }
    }

    /// Builds a map from pairs, rejecting conflicting duplicate entries.
    pub fn from_pairs(pairs: &[(VertexId, VertexId)]) -> Result<VertexMap, GraphError> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            if let Some(prev) = map.insert(*k, *v) {
                if prev != *v {
                    return Err(GraphError::SeedConflict(*k));
                }
            }
        }
        Ok(VertexMap { map })
    }

    pub fn get(&self, v: VertexId) -> Option<VertexId> {
        self.map.get(&v).copied()
    }

    pub fn insert(&mut self, k: VertexId, v: VertexId) {
        self.map.insert(k, v);
    }

    /// True when `other` agrees with self on self's whole domain.
    pub fn extends(&self, other: &VertexMap) -> bool {
        other.map.iter().all(|(k, v)| self.map.get(k) == Some(v))
    }

    /// Edge-by-edge homomorphism check: total on source, constants fixed,
    /// every labeled edge preserved.
    pub fn is_homomorphism(&self, source: &Structure, target: &Structure) -> bool {
        if self.map.get(&source.a()) != Some(&target.a()) || self.map.get(&source.b()) != Some(&target.b()) {
            return false;
        }
        for v in source.vertices() {
            match self.map.get(&v) {
                Some(img) if target.contains_vertex(*img) => {}
                _ => return false,
            }
        }
        for e in source.edges() {
            let (u, v) = (self.map[&e.src], self.map[&e.dst]);
            if !target.has_edge(u, v, &e.label) {
                return false;
            }
        }
        true
    }
}

fn validate_seed(seed: &VertexMap, source: &Structure, target: &Structure) -> Result<(), GraphError> {
    for (k, v) in &seed.map {
        if !source.contains_vertex(*k) || !target.contains_vertex(*v) {
            return Err(GraphError::SeedOutOfRange);
        }
    }
    if let Some(img) = seed.get(source.a()) {
        if img != target.a() {
            return Err(GraphError::SeedConstants);
        }
    }
    if let Some(img) = seed.get(source.b()) {
        if img != target.b() {
            return Err(GraphError::SeedConstants);
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LabelView {
    Exact,
    ShadeBlind,
}

fn labels_match(x: &EdgeLabel, y: &EdgeLabel, view: LabelView) -> bool {
    match view {
        LabelView::Exact => x == y,
        LabelView::ShadeBlind => {
            x.color == y.color && x.symbol.erase_shade() == y.symbol.erase_shade()
        }
    }
}

/// Backtracking homomorphism search. Vertices are tried in descending degree
/// order with forward checking against label-compatible candidate sets; the
/// search order is fixed, so the result is deterministic.
fn search_hom(
    source: &Structure,
    target: &Structure,
    seed: &VertexMap,
    injective: bool,
    view: LabelView,
) -> Option<VertexMap> {
    let src_vertices: Vec<VertexId> = {
        let mut vs: Vec<VertexId> = source.vertices().collect();
        let degree = |v: VertexId| source.out_edges(v).count() + source.in_edges(v).count();
        vs.sort_by_key(|v| (std::cmp::Reverse(degree(*v)), *v));
        vs
    };
    let tgt_vertices: Vec<VertexId> = target.vertices().collect();

    // candidate domains with the seed and constants applied
    let mut domains: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &v in &src_vertices {
        let dom: Vec<VertexId> = if let Some(img) = seed.get(v) {
            vec![img]
        } else if v == source.a() {
            vec![target.a()]
        } else if v == source.b() {
            vec![target.b()]
        } else {
            tgt_vertices.clone()
        };
        domains.insert(v, dom);
    }

    struct Ctx<'a> {
        source: &'a Structure,
        target: &'a Structure,
        order: Vec<VertexId>,
        domains: BTreeMap<VertexId, Vec<VertexId>>,
        injective: bool,
        view: LabelView,
    }

    fn consistent(ctx: &Ctx, assign: &BTreeMap<VertexId, VertexId>, v: VertexId, img: VertexId) -> bool {
        if ctx.injective && assign.values().any(|&w| w == img) {
            return false;
        }
        for e in ctx.source.out_edges(v) {
            if let Some(&dimg) = assign.get(&e.dst) {
                if !ctx
                    .target
                    .out_edges(img)
                    .any(|t| t.dst == dimg && labels_match(&t.label, &e.label, ctx.view))
                {
                    return false;
                }
            }
        }
        for e in ctx.source.in_edges(v) {
            if let Some(&simg) = assign.get(&e.src) {
                if !ctx
                    .target
                    .in_edges(img)
                    .any(|t| t.src == simg && labels_match(&t.label, &e.label, ctx.view))
                {
                    return false;
                }
            }
        }
        // self loops
        for e in ctx.source.out_edges(v).filter(|e| e.dst == v) {
            if !ctx
                .target
                .out_edges(img)
                .any(|t| t.dst == img && labels_match(&t.label, &e.label, ctx.view))
            {
                return false;
            }
        }
        true
    }

    fn backtrack(ctx: &Ctx, assign: &mut BTreeMap<VertexId, VertexId>, depth: usize) -> bool {
        if depth == ctx.order.len() {
            return true;
        }
        let v = ctx.order[depth];
        let candidates = ctx.domains[&v].clone();
        for img in candidates {
            if consistent(ctx, assign, v, img) {
                assign.insert(v, img);
                if backtrack(ctx, assign, depth + 1) {
                    return true;
                }
                assign.remove(&v);
            }
        }
        false
    }

    let ctx = Ctx { source, target, order: src_vertices, domains, injective, view };
    let mut assign = BTreeMap::new();
    if backtrack(&ctx, &mut assign, 0) {
        Some(VertexMap { map: assign })
    } else {
        None
    }
}

/// Extends `seed` to a total homomorphism from `source` to `target`, or
/// reports that none exists. Constants are always mapped to constants.
pub fn find_homomorphism(
    source: &Structure,
    target: &Structure,
    seed: &VertexMap,
) -> Result<Option<VertexMap>, GraphError> {
    validate_seed(seed, source, target)?;
    Ok(search_hom(source, target, seed, false, LabelView::Exact))
}

/// An isomorphism witness with grid shades erased on both sides, or `None`.
pub fn iso_witness_mod_shades(x: &Structure, y: &Structure) -> Option<VertexMap> {
    if x.vertex_count() != y.vertex_count() {
        return None;
    }
    if x.shade_erased_edges().len() != y.shade_erased_edges().len() {
        return None;
    }
    let fwd = search_hom(x, y, &VertexMap::default(), true, LabelView::ShadeBlind)?;
    // a bijective shade-blind homomorphism with equal edge counts is an
    // isomorphism; double-check the inverse direction edge by edge
    let inverse: BTreeMap<VertexId, VertexId> = fwd.map.iter().map(|(k, v)| (*v, *k)).collect();
    for e in y.edges() {
        let (u, v) = (inverse.get(&e.src)?, inverse.get(&e.dst)?);
        let ok = x
            .out_edges(*u)
            .any(|t| t.dst == *v && labels_match(&t.label, &e.label, LabelView::ShadeBlind));
        if !ok {
            return None;
        }
    }
    Some(fwd)
}

/// True when erasing every shade makes the two structures isomorphic with
/// constants mapped to constants.
pub fn isomorphic_mod_shades(x: &Structure, y: &Structure) -> bool {
    iso_witness_mod_shades(x, y).is_some()
}

// -- serialization ----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct StructureJson {
    vertices: Vec<u32>,
    a: u32,
    b: u32,
    edges: Vec<EdgeJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    names: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    src: u32,
    dst: u32,
    color: Color,
    symbol: Symbol,
}

impl Serialize for Structure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StructureJson {
            vertices: self.vertices.iter().map(|v| v.0).collect(),
            a: self.a.0,
            b: self.b.0,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    src: e.src.0,
                    dst: e.dst.0,
                    color: e.label.color,
                    symbol: e.label.symbol.clone(),
                })
                .collect(),
            names: self.names.iter().map(|(v, n)| (v.0.to_string(), n.to_string())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Structure, D::Error> {
        use serde::de::Error;
        let j = StructureJson::deserialize(d)?;
        if j.a == j.b {
            return Err(D::Error::custom("constants a and b must differ"));
        }
        let mut s = Structure::new();
        s.a = VertexId(j.a);
        s.b = VertexId(j.b);
        s.vertices = j.vertices.iter().map(|&v| VertexId(v)).collect();
        s.vertices.insert(s.a);
        s.vertices.insert(s.b);
        s.names.clear();
        s.next_id = s.vertices.iter().map(|v| v.0 + 1).max().unwrap_or(0);
        for (v, n) in &j.names {
            let id = VertexId(v.parse().map_err(D::Error::custom)?);
            if !s.vertices.contains(&id) {
                return Err(D::Error::custom(format!("named vertex {v} missing")));
            }
            let name = VertexName::parse(n).ok_or_else(|| D::Error::custom(format!("bad name {n:?}")))?;
            s.names.insert(id, name);
        }
        for e in j.edges {
            let (src, dst) = (VertexId(e.src), VertexId(e.dst));
            if !s.vertices.contains(&src) || !s.vertices.contains(&dst) {
                return Err(D::Error::custom("edge endpoint missing from vertex list"));
            }
            s.insert_edge(src, dst, EdgeLabel { color: e.color, symbol: e.symbol });
        }
        Ok(s)
    }
}

/// Graphviz rendering: green edges green, red edges red, symbol text as the
/// edge label. `erase_shades` renders the shade-blind view.
pub fn to_dot(s: &Structure, erase_shades: bool) -> String {
    let mut out = String::from("digraph structure {\n  rankdir=LR;\n");
    for v in s.vertices() {
        let label = match s.name_of(v) {
            Some(n) => n.to_string(),
            None => format!("#{v}"),
        };
        out.push_str(&format!("  n{} [label=\"{}\"];\n", v.0, label));
    }
    for e in s.edges() {
        let color = match e.label.color {
            Color::Green => "green",
            Color::Red => "red",
        };
        let symbol = if erase_shades { e.label.symbol.erase_shade() } else { e.label.symbol.clone() };
        let mut text = symbol.to_string();
        if erase_shades {
            text = text.replace("[*]", "");
        }
        out.push_str(&format!(
            "  n{} -> n{} [color={color} fontcolor={color} label=\"{text}\"];\n",
            e.src.0, e.dst.0
        ));
    }
    out.push_str("}\n");
    out
}
