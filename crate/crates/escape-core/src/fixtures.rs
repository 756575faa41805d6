//! Canonical structures and strategy tables: the staircase paths, the full
//! and partial grids with their dollar variants, the named crocodile
//! strategies, and the counterexample assembler.
//!
//! Builders allocate ids in one canonical order (a, b, a', b', then grid
//! coordinates lexicographically) and name every vertex, so equality of
//! fixtures can be asserted directly rather than up to isomorphism.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::chase::{self, Direction, RegularConstraint, Verdict};
use crate::graph::{Structure, VertexId, VertexName};
use crate::reduce::{LanguageId, ReductionOutput};
use crate::symbol::{EdgeLabel, Letter, Orientation, Shade, Symbol, Temperature};
use crate::tiling::{check_shading, GridEdge, GridShading, ShadingReport, TilingInstance};

/// Supplies the shade for a grid edge while a structure is being built or a
/// play is running. Stage analysis is shade-blind, so shape-only runs use a
/// uniform oracle; counterexample runs use a concrete shading.
pub trait ShadeOracle {
    fn shade(&self, edge: GridEdge) -> Shade;
}

/// The same shade everywhere.
#[derive(Debug, Clone)]
pub struct UniformShading(pub Shade);

impl ShadeOracle for UniformShading {
    fn shade(&self, _edge: GridEdge) -> Shade {
        self.0.clone()
    }
}

/// Gray everywhere, except black on the vertical edge into the corner where
/// the dollar exit will be taken. A gray shade there would make the red
/// dollar path match a forbidden pattern, so exits demand the black corner.
#[derive(Debug, Clone)]
pub struct DefaultShading {
    pub black_corner: Option<u32>,
}

impl DefaultShading {
    pub fn for_exit(exit_at: Option<u32>) -> DefaultShading {
        DefaultShading { black_corner: exit_at }
    }
}

impl ShadeOracle for DefaultShading {
    fn shade(&self, edge: GridEdge) -> Shade {
        match self.black_corner {
            Some(k) if edge == GridEdge::vertical(k, k - 1) => Shade::black(),
            _ => Shade::gray(),
        }
    }
}

impl ShadeOracle for GridShading {
    fn shade(&self, edge: GridEdge) -> Shade {
        match self.shade_of(&edge) {
            Some(s) => s.clone(),
            None => panic!("shading of size {} has no label for {edge:?}", self.k),
        }
    }
}

/// Letter carried by every edge leaving the grid vertex (i, j).
pub fn letter_at(i: u32, j: u32) -> Letter {
    if (i + j) % 2 == 0 {
        Letter::A
    } else {
        Letter::B
    }
}

/// Path index of a staircase coordinate: the diagonal (i,i) is v_{2i}, the
/// subdiagonal (i+1,i) is v_{2i+1}.
pub fn staircase_path_index(i: u32, j: u32) -> Option<u32> {
    if i == j {
        Some(2 * i)
    } else if i == j + 1 {
        Some(2 * j + 1)
    } else {
        None
    }
}

fn both_colors(s: &mut Structure, u: VertexId, v: VertexId, cold: Symbol, warm: Symbol) {
    s.insert_edge(u, v, EdgeLabel::green(cold));
    s.insert_edge(u, v, EdgeLabel::red(warm));
}

fn grid_pair(
    s: &mut Structure,
    u: VertexId,
    v: VertexId,
    letter: Letter,
    orient: Orientation,
    shade: Shade,
) {
    both_colors(
        s,
        u,
        v,
        Symbol::grid(letter, orient, Temperature::Cold, shade.clone()),
        Symbol::grid(letter, orient, Temperature::Warm, shade),
    );
}

fn frame(s: &mut Structure) -> (VertexId, VertexId) {
    let ap = s.fresh_vertex();
    s.set_name(ap, VertexName::APrime);
    let bp = s.fresh_vertex();
    s.set_name(bp, VertexName::BPrime);
    both_colors(s, s.a(), ap, Symbol::Alpha(Temperature::Cold), Symbol::Alpha(Temperature::Warm));
    both_colors(s, bp, s.b(), Symbol::Omega, Symbol::Omega);
    (ap, bp)
}

fn fan(s: &mut Structure, ap: VertexId, bp: VertexId, v: VertexId) {
    both_colors(s, ap, v, Symbol::X(Temperature::Cold), Symbol::X(Temperature::Warm));
    both_colors(s, v, bp, Symbol::Y(Temperature::Cold), Symbol::Y(Temperature::Warm));
}

fn dollar_edges(s: &mut Structure, from: VertexId, bp: VertexId) {
    both_colors(s, from, bp, Symbol::Dollar(Temperature::Cold), Symbol::Dollar(Temperature::Warm));
}

/// The staircase path with 2m+1 interior vertices v_0..v_{2m}: even steps
/// horizontal A-edges, odd steps vertical B-edges, a fan of x and y edges in
/// both colors, cold green and warm red throughout.
pub fn build_p(m: u32, shades: &dyn ShadeOracle) -> Structure {
    assert!(m >= 1);
    let mut s = Structure::new();
    let (ap, bp) = frame(&mut s);
    let mut vs = Vec::new();
    for i in 0..=2 * m {
        let v = s.fresh_vertex();
        s.set_name(v, VertexName::Path(i));
        fan(&mut s, ap, bp, v);
        vs.push(v);
    }
    for i in 0..2 * m {
        let (u, v) = (vs[i as usize], vs[i as usize + 1]);
        if i % 2 == 0 {
            let d = i / 2;
            let shade = shades.shade(GridEdge::horizontal(d, d));
            grid_pair(&mut s, u, v, Letter::A, Orientation::Horizontal, shade);
        } else {
            let d = i / 2;
            let shade = shades.shade(GridEdge::vertical(d + 1, d));
            grid_pair(&mut s, u, v, Letter::B, Orientation::Vertical, shade);
        }
    }
    s
}

/// The staircase with the two terminating dollar edges from v_{2m} to b'.
pub fn build_p_dollar(m: u32, shades: &dyn ShadeOracle) -> Structure {
    let mut s = build_p(m, shades);
    let last = s.vertex_by_name(VertexName::Path(2 * m)).expect("last path vertex");
    let bp = s.vertex_by_name(VertexName::BPrime).expect("b'");
    dollar_edges(&mut s, last, bp);
    s
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixtureError {
    #[error("band width {k} exceeds grid size {m}")]
    BandTooWide { m: u32, k: u32 },
    #[error("size must be at least 1")]
    BadSize,
}

/// The partial grid: the band of vertices v_{i,j} with |i-j| <= k inside the
/// (m+1) x (m+1) grid, fans from a' and to b', grid edges where both
/// endpoints lie in the band.
pub fn build_l(m: u32, k: u32, shades: &dyn ShadeOracle) -> Result<Structure, FixtureError> {
    build_l_inner(m, k, shades, false)
}

/// The partial grid with the two dollar edges from v_{m,m} to b'.
pub fn build_l_dollar(m: u32, k: u32, shades: &dyn ShadeOracle) -> Result<Structure, FixtureError> {
    build_l_inner(m, k, shades, true)
}

/// The full grid: exactly the widest band.
pub fn build_g(m: u32, shades: &dyn ShadeOracle) -> Structure {
    build_l(m, m, shades).expect("k = m is always a valid band")
}

/// The full grid with the two dollar edges.
pub fn build_g_dollar(m: u32, shades: &dyn ShadeOracle) -> Structure {
    build_l_dollar(m, m, shades).expect("k = m is always a valid band")
}

fn build_l_inner(m: u32, k: u32, shades: &dyn ShadeOracle, dollar: bool) -> Result<Structure, FixtureError> {
    if m < 1 {
        return Err(FixtureError::BadSize);
    }
    if k > m {
        return Err(FixtureError::BandTooWide { m, k });
    }
    let in_band = |i: u32, j: u32| i.abs_diff(j) <= k;
    let mut s = Structure::new();
    let (ap, bp) = frame(&mut s);
    let mut ids: BTreeMap<(u32, u32), VertexId> = BTreeMap::new();
    for i in 0..=m {
        for j in 0..=m {
            if in_band(i, j) {
                let v = s.fresh_vertex();
                s.set_name(v, VertexName::Grid(i, j));
                fan(&mut s, ap, bp, v);
                ids.insert((i, j), v);
            }
        }
    }
    for (&(i, j), &u) in &ids {
        let letter = letter_at(i, j);
        if i + 1 <= m && in_band(i + 1, j) {
            let shade = shades.shade(GridEdge::horizontal(i, j));
            grid_pair(&mut s, u, ids[&(i + 1, j)], letter, Orientation::Horizontal, shade);
        }
        if j + 1 <= m && in_band(i, j + 1) {
            let shade = shades.shade(GridEdge::vertical(i, j));
            grid_pair(&mut s, u, ids[&(i, j + 1)], letter, Orientation::Vertical, shade);
        }
    }
    if dollar {
        dollar_edges(&mut s, ids[&(m, m)], bp);
    }
    Ok(s)
}

// -- strategies ---------------------------------------------------------------

fn good(indices: &[u32]) -> Vec<LanguageId> {
    indices.iter().map(|&i| LanguageId::good(i)).collect()
}

/// Syncs colors: runs the nine one-symbol languages so that every edge gains
/// its opposite-color, opposite-temperature counterpart.
pub fn s_color() -> Vec<LanguageId> {
    good(&[3, 4, 5, 6, 7, 8, 9])
}

/// One growth cycle of the staircase: extend at the frontier, refresh fans,
/// then sync colors twice.
pub fn s_cycle() -> Vec<LanguageId> {
    let mut s = good(&[15, 14]);
    s.extend(s_color());
    s.extend(good(&[12, 13]));
    s.extend(s_color());
    s
}

/// The opening strategy: force the red frame first, then one cycle.
pub fn s_start() -> Vec<LanguageId> {
    let mut s = good(&[1, 2]);
    s.extend(s_cycle());
    s
}

/// The staged staircase strategy: the opening plus k-1 further cycles.
pub fn s_k(k: u32) -> Vec<LanguageId> {
    assert!(k >= 1);
    let mut s = s_start();
    for _ in 1..k {
        s.extend(s_cycle());
    }
    s
}

/// One layer above the diagonal.
pub fn s_odd() -> Vec<LanguageId> {
    let mut s = good(&[11]);
    s.extend(s_color());
    s.extend(good(&[12, 13]));
    s.extend(s_color());
    s
}

/// One layer below the diagonal.
pub fn s_even() -> Vec<LanguageId> {
    let mut s = good(&[10]);
    s.extend(s_color());
    s.extend(good(&[12, 13]));
    s.extend(s_color());
    s
}

/// The layering strategy: alternate odd and even layers, odd first.
pub fn s_layer(k: u32) -> Vec<LanguageId> {
    let mut s = Vec::new();
    for layer in 1..=k {
        if layer % 2 == 1 {
            s.extend(s_odd());
        } else {
            s.extend(s_even());
        }
    }
    s
}

/// The named strategy table for lookups from run descriptors.
pub fn named_strategies() -> BTreeMap<String, Vec<LanguageId>> {
    let mut out = BTreeMap::new();
    out.insert("S_color".into(), s_color());
    out.insert("S_cycle".into(), s_cycle());
    out.insert("S_start".into(), s_start());
    out.insert("S_odd".into(), s_odd());
    out.insert("S_even".into(), s_even());
    out
}

/// Parses `S_start`, `S_k:3`, `S_layer:2`, or an explicit `good:1,2,15` list.
pub fn parse_strategy(name: &str) -> Option<Vec<LanguageId>> {
    if let Some(s) = named_strategies().get(name) {
        return Some(s.clone());
    }
    if let Some(k) = name.strip_prefix("S_k:") {
        return Some(s_k(k.parse().ok()?));
    }
    if let Some(k) = name.strip_prefix("S_layer:") {
        return Some(s_layer(k.parse().ok()?));
    }
    if let Some(list) = name.strip_prefix("good:") {
        let mut out = Vec::new();
        for part in list.split(',') {
            out.push(LanguageId::good(part.trim().parse().ok()?));
        }
        return Some(out);
    }
    None
}

// -- counterexample assembly ---------------------------------------------------

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error("shading is not proper: {0:?}")]
    ImproperShading(ShadingReport),
    #[error(transparent)]
    Tiling(#[from] crate::tiling::TilingError),
    #[error("assembled structure failed validation: {0}")]
    NotValid(String),
}

/// The dollar grid leaves a few border vertices whose red warm y-edge has no
/// same-language green continuation: language 15 offers them no cold word
/// that stays inside the grid. The only harmless way to serve those requests
/// is the green copy of the warm y-word itself, one edge each, no fresh
/// vertices. This completion is what makes the assembled structure satisfy
/// every constraint.
pub fn complete_exit_heads(s: &mut Structure, r: &ReductionOutput) {
    let c15 = RegularConstraint::new(
        chase::ConstraintId { language: LanguageId::good(15), direction: Direction::RedToGreen },
        &r.good[14],
    );
    loop {
        let pending = chase::requests_of(&c15, s);
        if pending.is_empty() {
            return;
        }
        for req in pending {
            s.insert_edge(req.u, req.v, EdgeLabel::green(Symbol::Y(Temperature::Warm)));
        }
    }
}

/// Builds the counterexample for a properly shaded grid: the dollar grid with
/// the shading written onto both color copies of every grid edge, plus the
/// border completion, validated against the full constraint system.
pub fn assemble_counterexample(
    inst: &TilingInstance,
    shading: &GridShading,
) -> Result<Structure, AssembleError> {
    let report = check_shading(inst, shading)?;
    if !report.proper() {
        return Err(AssembleError::ImproperShading(report));
    }
    let r = crate::reduce::reduce(inst);
    let mut s = build_g_dollar(shading.k, shading);
    complete_exit_heads(&mut s, &r);
    match chase::validate_counterexample(&s, &r) {
        Verdict::Valid => Ok(s),
        Verdict::Invalid(reason) => Err(AssembleError::NotValid(reason.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use std::collections::BTreeSet;

    fn gray() -> UniformShading {
        UniformShading(Shade::gray())
    }

    #[test]
    fn p1_has_seven_vertices() {
        let p1 = build_p(1, &gray());
        assert_eq!(p1.vertex_count(), 7);
        // a, b, a', b' and three path vertices, every one named
        assert_eq!(p1.names().len(), 7);
    }

    #[test]
    fn dollar_variant_adds_exactly_two_edges() {
        for m in 1..=3 {
            let plain = build_p(m, &gray());
            let dollar = build_p_dollar(m, &gray());
            let plain_edges: BTreeSet<Edge> = plain.edges().cloned().collect();
            let dollar_edges: BTreeSet<Edge> = dollar.edges().cloned().collect();
            let delta: Vec<Edge> = dollar_edges.difference(&plain_edges).cloned().collect();
            assert_eq!(delta.len(), 2);
            let last = dollar.vertex_by_name(VertexName::Path(2 * m)).unwrap();
            let bp = dollar.vertex_by_name(VertexName::BPrime).unwrap();
            for e in delta {
                assert_eq!((e.src, e.dst), (last, bp));
                assert_eq!(e.label.symbol.kind(), crate::symbol::SymbolKind::Dollar);
            }
        }
    }

    #[test]
    fn widest_band_equals_the_grid_exactly() {
        for m in 1..=3 {
            assert_eq!(build_l(m, m, &gray()).unwrap(), build_g(m, &gray()));
            assert_eq!(build_l_dollar(m, m, &gray()).unwrap(), build_g_dollar(m, &gray()));
        }
        assert_eq!(build_l(2, 3, &gray()), Err(FixtureError::BandTooWide { m: 2, k: 3 }));
    }

    #[test]
    fn strategy_tables_match_their_definitions() {
        assert_eq!(s_color(), good(&[3, 4, 5, 6, 7, 8, 9]));
        let mut expected_cycle = good(&[15, 14]);
        expected_cycle.extend(good(&[3, 4, 5, 6, 7, 8, 9]));
        expected_cycle.extend(good(&[12, 13]));
        expected_cycle.extend(good(&[3, 4, 5, 6, 7, 8, 9]));
        assert_eq!(s_cycle(), expected_cycle);
        let mut expected_start = good(&[1, 2]);
        expected_start.extend(expected_cycle.clone());
        assert_eq!(s_start(), expected_start);
        assert_eq!(s_k(1), s_start());
        let mut s2 = s_start();
        s2.extend(s_cycle());
        assert_eq!(s_k(2), s2);
        let mut layer2 = s_odd();
        layer2.extend(s_even());
        assert_eq!(s_layer(2), layer2);
        assert!(s_layer(0).is_empty());
    }

    #[test]
    fn assemble_rejects_improper_shadings() {
        let inst = TilingInstance::unconstrained();
        let mut shading = crate::tiling::search_shading(&inst, 1, &crate::tiling::Condition::all())
            .unwrap()
            .unwrap();
        // break the bottom-left condition
        shading
            .labels
            .insert(GridEdge::horizontal(0, 0), (Orientation::Horizontal, Shade::black()));
        assert!(matches!(
            assemble_counterexample(&inst, &shading),
            Err(AssembleError::ImproperShading(_))
        ));
    }
}
