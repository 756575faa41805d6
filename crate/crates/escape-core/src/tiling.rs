//! The grid shading problem: instances (shade sets plus forbidden
//! orientation/shade pairs of consecutive edges), shadings of finite square
//! grids, the five-condition checker and a bounded backtracking search.
//!
//! The existence question over all grid sizes is not decidable by any bounded
//! procedure, so exhaustion results are always reported per grid size.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbol::{Orientation, Shade};

/// One edge of the k-sized square grid ((k+1) x (k+1) vertices): either the
/// horizontal edge (i,j)->(i+1,j) or the vertical edge (i,j)->(i,j+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridEdge {
    pub from: (u32, u32),
    pub axis: Orientation,
}

impl GridEdge {
    pub fn horizontal(i: u32, j: u32) -> GridEdge {
        GridEdge { from: (i, j), axis: Orientation::Horizontal }
    }

    pub fn vertical(i: u32, j: u32) -> GridEdge {
        GridEdge { from: (i, j), axis: Orientation::Vertical }
    }

    pub fn to(&self) -> (u32, u32) {
        match self.axis {
            Orientation::Horizontal => (self.from.0 + 1, self.from.1),
            Orientation::Vertical => (self.from.0, self.from.1 + 1),
        }
    }
}

/// An edge label: the declared orientation (normally matching the axis, but
/// deliberately malformed shadings are representable) plus a shade.
pub type EdgeTag = (Orientation, Shade);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingInstance {
    pub shades: Vec<Shade>,
    pub forbidden: BTreeSet<(EdgeTag, EdgeTag)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TilingError {
    #[error("shade set must contain gray and black")]
    MissingBaseShades,
    #[error("shade set must have at least two shades")]
    TooFewShades,
    #[error("forbidden pair mentions a shade outside the shade set")]
    UnknownShade,
    #[error("shading is not total: edge {0:?} is unlabeled")]
    NotTotal(GridEdge),
    #[error("grid size must be at least 1")]
    BadSize,
}

impl TilingInstance {
    pub fn new(shades: Vec<Shade>, forbidden: BTreeSet<(EdgeTag, EdgeTag)>) -> Result<TilingInstance, TilingError> {
        let inst = TilingInstance { shades, forbidden };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), TilingError> {
        if self.shades.len() < 2 {
            return Err(TilingError::TooFewShades);
        }
        if !self.shades.contains(&Shade::gray()) || !self.shades.contains(&Shade::black()) {
            return Err(TilingError::MissingBaseShades);
        }
        for ((_, s1), (_, s2)) in &self.forbidden {
            if !self.shades.contains(s1) || !self.shades.contains(s2) {
                return Err(TilingError::UnknownShade);
            }
        }
        Ok(())
    }

    /// The two-shade instance with no forbidden pairs.
    pub fn unconstrained() -> TilingInstance {
        TilingInstance { shades: vec![Shade::gray(), Shade::black()], forbidden: BTreeSet::new() }
    }

    /// Every orientation/shade pair forbidden: no grid of any size admits a
    /// shading satisfying the path condition.
    pub fn all_forbidden(shades: Vec<Shade>) -> TilingInstance {
        let tags: Vec<EdgeTag> = [Orientation::Horizontal, Orientation::Vertical]
            .into_iter()
            .flat_map(|o| shades.iter().map(move |s| (o, s.clone())))
            .collect();
        let forbidden = tags
            .iter()
            .flat_map(|c| tags.iter().map(move |d| (c.clone(), d.clone())))
            .collect();
        TilingInstance { shades, forbidden }
    }
}

/// A total assignment of (orientation, shade) labels to the edges of the
/// k-sized square grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShading {
    pub k: u32,
    pub labels: BTreeMap<GridEdge, EdgeTag>,
}

/// All edges of the k-sized grid in row-major order (by row, then column,
/// horizontal before vertical at each point). This is also the search order.
pub fn grid_edges(k: u32) -> Vec<GridEdge> {
    let mut out = Vec::new();
    for j in 0..=k {
        for i in 0..=k {
            if i < k {
                out.push(GridEdge::horizontal(i, j));
            }
            if j < k {
                out.push(GridEdge::vertical(i, j));
            }
        }
    }
    out
}

impl GridShading {
    pub fn shade_of(&self, e: &GridEdge) -> Option<&Shade> {
        self.labels.get(e).map(|(_, s)| s)
    }

    pub fn is_total(&self) -> Result<(), TilingError> {
        for e in grid_edges(self.k) {
            if !self.labels.contains_key(&e) {
                return Err(TilingError::NotTotal(e));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    A1,
    A2,
    B1,
    B2,
    B3,
}

impl Condition {
    pub fn all() -> [Condition; 5] {
        [Condition::A1, Condition::A2, Condition::B1, Condition::B2, Condition::B3]
    }

    /// The subset used for bounded refutation: everything except the
    /// upper-right black condition.
    pub fn refutation_set() -> [Condition; 4] {
        [Condition::A1, Condition::A2, Condition::B1, Condition::B3]
    }
}

/// A per-condition verdict with a witness for each failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadingReport {
    pub results: BTreeMap<Condition, Result<(), String>>,
}

impl ShadingReport {
    pub fn proper(&self) -> bool {
        self.results.values().all(|r| r.is_ok())
    }

    pub fn passes(&self, conditions: &[Condition]) -> bool {
        conditions.iter().all(|c| matches!(self.results.get(c), Some(Ok(()))))
    }
}

/// Checks all five conditions of a proper shading and reports each with a
/// witness edge or path on failure. Finite grids always have an upper-right
/// vertical edge, so the black condition is never vacuous here.
pub fn check_shading(inst: &TilingInstance, s: &GridShading) -> Result<ShadingReport, TilingError> {
    if s.k < 1 {
        return Err(TilingError::BadSize);
    }
    s.is_total()?;
    let mut results: BTreeMap<Condition, Result<(), String>> = BTreeMap::new();

    let mut a1 = Ok(());
    let mut a2 = Ok(());
    for e in grid_edges(s.k) {
        let (orient, _) = &s.labels[&e];
        match e.axis {
            Orientation::Horizontal if *orient != Orientation::Horizontal && a1.is_ok() => {
                a1 = Err(format!("horizontal edge {:?} labeled {}", e.from, orient.letter()));
            }
            Orientation::Vertical if *orient != Orientation::Vertical && a2.is_ok() => {
                a2 = Err(format!("vertical edge {:?} labeled {}", e.from, orient.letter()));
            }
            _ => {}
        }
    }
    results.insert(Condition::A1, a1);
    results.insert(Condition::A2, a2);

    let bottom_left = GridEdge::horizontal(0, 0);
    let (_, bl_shade) = &s.labels[&bottom_left];
    results.insert(
        Condition::B1,
        if *bl_shade == Shade::gray() {
            Ok(())
        } else {
            Err(format!("bottom-left horizontal edge shaded {bl_shade}"))
        },
    );

    let upper_right = GridEdge::vertical(s.k, s.k - 1);
    let (_, ur_shade) = &s.labels[&upper_right];
    results.insert(
        Condition::B2,
        if *ur_shade == Shade::black() {
            Ok(())
        } else {
            Err(format!("upper-right vertical edge shaded {ur_shade}"))
        },
    );

    // any directed 2-path, whatever the axes of its two edges
    let mut b3 = Ok(());
    'outer: for e1 in grid_edges(s.k) {
        let mid = e1.to();
        for e2 in [GridEdge::horizontal(mid.0, mid.1), GridEdge::vertical(mid.0, mid.1)] {
            if let Some(tag2) = s.labels.get(&e2) {
                let tag1 = &s.labels[&e1];
                if inst.forbidden.contains(&(tag1.clone(), tag2.clone())) {
                    b3 = Err(format!(
                        "forbidden 2-path {:?} -> {:?} -> {:?} labeled ({},{}) ({},{})",
                        e1.from,
                        mid,
                        e2.to(),
                        tag1.0.letter(),
                        tag1.1,
                        tag2.0.letter(),
                        tag2.1
                    ));
                    break 'outer;
                }
            }
        }
    }
    results.insert(Condition::B3, b3);
    Ok(ShadingReport { results })
}

/// Backtracking search for a shading of the k-sized grid satisfying the given
/// conditions: row-major edge order, shades in lexicographic order, failing
/// fast on forbidden-pair conflicts against already-placed neighbors.
/// Orientation labels range only where the axis conditions do not pin them.
pub fn search_shading(
    inst: &TilingInstance,
    k: u32,
    conditions: &[Condition],
) -> Result<Option<GridShading>, TilingError> {
    if k < 1 {
        return Err(TilingError::BadSize);
    }
    inst.validate()?;
    let edges = grid_edges(k);
    let mut shades: Vec<Shade> = inst.shades.clone();
    shades.sort();
    let want = |c: Condition| conditions.contains(&c);

    let domain = |e: &GridEdge| -> Vec<EdgeTag> {
        let orients: Vec<Orientation> = match e.axis {
            Orientation::Horizontal if want(Condition::A1) => vec![Orientation::Horizontal],
            Orientation::Vertical if want(Condition::A2) => vec![Orientation::Vertical],
            _ => vec![Orientation::Horizontal, Orientation::Vertical],
        };
        let shade_choices: Vec<Shade> = if want(Condition::B1) && *e == GridEdge::horizontal(0, 0) {
            vec![Shade::gray()]
        } else if want(Condition::B2) && *e == GridEdge::vertical(k, k - 1) {
            vec![Shade::black()]
        } else {
            shades.clone()
        };
        orients
            .into_iter()
            .flat_map(|o| shade_choices.iter().map(move |s| (o, s.clone())))
            .collect()
    };

    fn conflicts(
        inst: &TilingInstance,
        labels: &BTreeMap<GridEdge, EdgeTag>,
        e: &GridEdge,
        tag: &EdgeTag,
        check_b3: bool,
    ) -> bool {
        if !check_b3 {
            return false;
        }
        // predecessors: edges ending at e.from
        let (i, j) = e.from;
        let mut preds = Vec::new();
        if i > 0 {
            preds.push(GridEdge::horizontal(i - 1, j));
        }
        if j > 0 {
            preds.push(GridEdge::vertical(i, j - 1));
        }
        for p in preds {
            if let Some(ptag) = labels.get(&p) {
                if inst.forbidden.contains(&(ptag.clone(), tag.clone())) {
                    return true;
                }
            }
        }
        // successors: edges starting at e.to()
        let (i, j) = e.to();
        for snext in [GridEdge::horizontal(i, j), GridEdge::vertical(i, j)] {
            if let Some(stag) = labels.get(&snext) {
                if inst.forbidden.contains(&(tag.clone(), stag.clone())) {
                    return true;
                }
            }
        }
        false
    }

    fn backtrack(
        inst: &TilingInstance,
        edges: &[GridEdge],
        idx: usize,
        labels: &mut BTreeMap<GridEdge, EdgeTag>,
        domain: &dyn Fn(&GridEdge) -> Vec<EdgeTag>,
        check_b3: bool,
    ) -> bool {
        if idx == edges.len() {
            return true;
        }
        let e = edges[idx];
        for tag in domain(&e) {
            if conflicts(inst, labels, &e, &tag, check_b3) {
                continue;
            }
            labels.insert(e, tag);
            if backtrack(inst, edges, idx + 1, labels, domain, check_b3) {
                return true;
            }
            labels.remove(&e);
        }
        false
    }

    let mut labels = BTreeMap::new();
    let found = backtrack(inst, &edges, 0, &mut labels, &domain, want(Condition::B3));
    Ok(found.then_some(GridShading { k, labels }))
}

// -- JSON -------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    shades: Vec<String>,
    forbidden: Vec<[(String, String); 2]>,
}

pub fn instance_to_json(inst: &TilingInstance) -> serde_json::Value {
    let j = InstanceJson {
        shades: inst.shades.iter().map(|s| s.to_string()).collect(),
        forbidden: inst
            .forbidden
            .iter()
            .map(|((o1, s1), (o2, s2))| {
                [(o1.letter().into(), s1.to_string()), (o2.letter().into(), s2.to_string())]
            })
            .collect(),
    };
    serde_json::to_value(j).expect("instance serializes")
}

pub fn instance_from_json(v: &serde_json::Value) -> Result<TilingInstance, String> {
    let j: InstanceJson = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
    let mut forbidden = BTreeSet::new();
    for [(o1, s1), (o2, s2)] in &j.forbidden {
        forbidden.insert(((parse_orient(o1)?, Shade::new(s1)), (parse_orient(o2)?, Shade::new(s2))));
    }
    TilingInstance::new(j.shades.iter().map(|s| Shade::new(s)).collect(), forbidden)
        .map_err(|e| e.to_string())
}

fn parse_orient(s: &str) -> Result<Orientation, String> {
    match s {
        "H" => Ok(Orientation::Horizontal),
        "V" => Ok(Orientation::Vertical),
        other => Err(format!("bad orientation {other:?}")),
    }
}

#[derive(Serialize, Deserialize)]
struct ShadingEdgeJson {
    from: (u32, u32),
    axis: String,
    orient: String,
    shade: String,
}

pub fn shading_to_json(s: &GridShading) -> serde_json::Value {
    let labels: Vec<ShadingEdgeJson> = s
        .labels
        .iter()
        .map(|(e, (o, shade))| ShadingEdgeJson {
            from: e.from,
            axis: e.axis.letter().into(),
            orient: o.letter().into(),
            shade: shade.to_string(),
        })
        .collect();
    serde_json::json!({ "k": s.k, "labels": serde_json::to_value(labels).expect("serializes") })
}

pub fn shading_from_json(v: &serde_json::Value) -> Result<GridShading, String> {
    let k = v.get("k").and_then(|k| k.as_u64()).ok_or("shading missing k")? as u32;
    let labels: Vec<ShadingEdgeJson> =
        serde_json::from_value(v.get("labels").cloned().ok_or("shading missing labels")?)
            .map_err(|e| e.to_string())?;
    let mut map = BTreeMap::new();
    for l in labels {
        let edge = GridEdge { from: l.from, axis: parse_orient(&l.axis)? };
        map.insert(edge, (parse_orient(&l.orient)?, Shade::new(&l.shade)));
    }
    Ok(GridShading { k, labels: map })
}
