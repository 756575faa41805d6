//! The reduction from a tiling instance to a path-query system: the fifteen
//! builder languages, one forbidden-pattern language per forbidden pair plus
//! one per non-black shade, the three discipline languages, and the start
//! language that seeds the game.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::{Colorspace, LabelPattern, PathLanguage, Transition};
use crate::symbol::{
    alphabet, Letter, Orientation, Shade, Symbol, SymbolKind, SymbolPattern, Temperature,
};
use crate::tiling::TilingInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageGroup {
    Good,
    Bad,
    Ugly,
}

impl fmt::Display for LanguageGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LanguageGroup::Good => write!(f, "good"),
            LanguageGroup::Bad => write!(f, "bad"),
            LanguageGroup::Ugly => write!(f, "ugly"),
        }
    }
}

/// Stable identity of a language within a reduction: group plus 1-based
/// index in the canonical listing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LanguageId {
    pub group: LanguageGroup,
    pub index: u32,
}

impl LanguageId {
    pub fn good(index: u32) -> LanguageId {
        LanguageId { group: LanguageGroup::Good, index }
    }

    pub fn bad(index: u32) -> LanguageId {
        LanguageId { group: LanguageGroup::Bad, index }
    }

    pub fn ugly(index: u32) -> LanguageId {
        LanguageId { group: LanguageGroup::Ugly, index }
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.group, self.index)
    }
}

#[derive(Debug, Clone)]
pub struct TaggedLanguage {
    pub id: LanguageId,
    pub language: PathLanguage,
}

/// The full output of the reduction for one instance.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub instance: TilingInstance,
    pub good: Vec<PathLanguage>,
    pub bad: Vec<PathLanguage>,
    pub ugly: Vec<PathLanguage>,
    pub q_start: PathLanguage,
    pub q0: PathLanguage,
}

fn pat(p: SymbolPattern) -> PathLanguage {
    PathLanguage::from_pattern(p)
}

fn shape(ps: &[SymbolPattern]) -> PathLanguage {
    PathLanguage::from_shape(ps)
}

fn grid(l: Option<Letter>, o: Option<Orientation>, t: Temperature) -> SymbolPattern {
    SymbolPattern::grid(l, o, Some(t), None)
}

fn sym(s: Symbol) -> SymbolPattern {
    SymbolPattern::exact(&s)
}

fn union(langs: &[PathLanguage]) -> PathLanguage {
    PathLanguage::union_all(langs).expect("same colorspace")
}

use Letter::{A, B};
use Orientation::{Horizontal as H, Vertical as V};
use Temperature::{Cold, Warm};

fn alpha(t: Temperature) -> SymbolPattern {
    sym(Symbol::Alpha(t))
}
fn x(t: Temperature) -> SymbolPattern {
    sym(Symbol::X(t))
}
fn y(t: Temperature) -> SymbolPattern {
    sym(Symbol::Y(t))
}
fn dollar(t: Temperature) -> SymbolPattern {
    sym(Symbol::Dollar(t))
}
fn omega() -> SymbolPattern {
    sym(Symbol::Omega)
}

/// The fifteen builder languages in their canonical order.
fn good_languages() -> Vec<PathLanguage> {
    let cold_grid = grid(None, None, Cold);
    vec![
        // 1..5: the five non-grid symbol families, both temperatures
        pat(omega()),
        union(&[pat(alpha(Cold)), pat(alpha(Warm))]),
        union(&[pat(x(Cold)), pat(x(Warm))]),
        union(&[pat(y(Cold)), pat(y(Warm))]),
        union(&[pat(dollar(Cold)), pat(dollar(Warm))]),
        // 6..9: the four grid letter/orientation families, both temperatures
        union(&[pat(grid(Some(B), Some(V), Cold)), pat(grid(Some(B), Some(V), Warm))]),
        union(&[pat(grid(Some(B), Some(H), Warm)), pat(grid(Some(B), Some(H), Cold))]),
        union(&[pat(grid(Some(A), Some(V), Warm)), pat(grid(Some(A), Some(V), Cold))]),
        union(&[pat(grid(Some(A), Some(H), Cold)), pat(grid(Some(A), Some(H), Warm))]),
        // 10, 11: the two diagonal steps, each in its two temperature guises
        union(&[
            shape(&[grid(Some(B), Some(H), Warm), grid(Some(A), Some(V), Warm)]),
            shape(&[grid(Some(B), Some(V), Cold), grid(Some(A), Some(H), Cold)]),
        ]),
        union(&[
            shape(&[grid(Some(A), Some(H), Cold), grid(Some(B), Some(V), Cold)]),
            shape(&[grid(Some(A), Some(V), Warm), grid(Some(B), Some(H), Warm)]),
        ]),
        // 12, 13: fan edges to and from freshly created grid vertices
        union(&[shape(&[x(Cold), cold_grid.clone()]), pat(x(Cold)), pat(x(Warm))]),
        union(&[shape(&[cold_grid.clone(), y(Cold)]), pat(y(Cold)), pat(y(Warm))]),
        // 14, 15: the cycle driver pair; 15 deliberately omits the bare cold y
        union(&[
            pat(x(Warm)),
            pat(x(Cold)),
            shape(&[x(Cold), grid(Some(A), Some(H), Cold), grid(Some(B), Some(V), Cold)]),
        ]),
        union(&[
            pat(y(Warm)),
            pat(dollar(Cold)),
            shape(&[grid(Some(A), Some(H), Cold), grid(Some(B), Some(V), Cold), y(Cold)]),
            shape(&[grid(Some(B), Some(V), Cold), y(Cold)]),
        ]),
    ]
}

/// One all-warm forbidden-pattern word per forbidden pair, then one per
/// non-black shade for the early-exit edge.
fn bad_languages(inst: &TilingInstance) -> Vec<PathLanguage> {
    let mut out = Vec::new();
    for ((d1, s1), (d2, s2)) in &inst.forbidden {
        out.push(shape(&[
            alpha(Warm),
            x(Warm),
            SymbolPattern::grid(None, Some(*d1), Some(Warm), Some(s1.clone())),
            SymbolPattern::grid(None, Some(*d2), Some(Warm), Some(s2.clone())),
            y(Warm),
            omega(),
        ]));
    }
    let mut shades = inst.shades.clone();
    shades.sort();
    for s in shades.iter().filter(|s| **s != Shade::black()) {
        out.push(shape(&[
            alpha(Warm),
            x(Warm),
            SymbolPattern::grid(Some(B), Some(V), Some(Warm), Some(s.clone())),
            dollar(Warm),
            omega(),
        ]));
    }
    out
}

/// An anchored pattern with up to four arbitrary symbols on each side of a
/// mandatory middle symbol: first anchor, Sigma^{0..4}, middle, Sigma^{0..4},
/// last anchor. Built directly so the middle gaps may be empty.
fn anchored_window(first: SymbolPattern, middle: SymbolPattern, last: SymbolPattern) -> PathLanguage {
    let mut transitions = Vec::new();
    let t = |from: u32, to: u32, p: &SymbolPattern| Transition {
        from,
        to,
        label: LabelPattern { color: None, pattern: p.clone() },
    };
    // states: 0 -first-> 1..5 (sigma chain) -middle-> 6..10 (sigma chain) -last-> 11
    transitions.push(t(0, 1, &first));
    let any = SymbolPattern::any();
    for i in 1..5 {
        transitions.push(t(i, i + 1, &any));
    }
    for i in 1..=5 {
        transitions.push(t(i, 6, &middle));
    }
    for i in 6..10 {
        transitions.push(t(i, i + 1, &any));
    }
    for i in 6..=10 {
        transitions.push(t(i, 11, &last));
    }
    PathLanguage::build(12, 0, [11], transitions, Colorspace::Base).expect("valid window automaton")
}

/// The three discipline languages: cold-start words hiding a warm grid
/// symbol, warm-start words hiding a cold grid symbol, and the double
/// vertical step.
fn ugly_languages() -> Vec<PathLanguage> {
    vec![
        anchored_window(alpha(Cold), grid(None, None, Warm), omega()),
        anchored_window(alpha(Warm), grid(None, None, Cold), omega()),
        shape(&[
            alpha(Cold),
            x(Cold),
            grid(Some(B), Some(V), Cold),
            grid(Some(B), Some(V), Cold),
            y(Cold),
            omega(),
        ]),
    ]
}

/// The start language: the unique legal opening shape, gray on its first
/// grid symbol, any shade on the second.
fn q_start_language() -> PathLanguage {
    shape(&[
        alpha(Cold),
        x(Cold),
        SymbolPattern::grid(Some(A), Some(H), Some(Cold), Some(Shade::gray())),
        grid(Some(B), Some(V), Cold),
        y(Cold),
        omega(),
    ])
}

/// Builds the full language system for an instance.
pub fn reduce(inst: &TilingInstance) -> ReductionOutput {
    inst.validate().expect("valid instance");
    let good = good_languages();
    let bad = bad_languages(inst);
    let ugly = ugly_languages();
    let q_start = q_start_language();
    let mut q0_parts = vec![q_start.clone()];
    q0_parts.extend(ugly.iter().cloned());
    q0_parts.extend(bad.iter().cloned());
    let q0 = union(&q0_parts);
    ReductionOutput { instance: inst.clone(), good, bad, ugly, q_start, q0 }
}

impl ReductionOutput {
    pub fn shades(&self) -> &[Shade] {
        &self.instance.shades
    }

    pub fn alphabet(&self) -> Vec<Symbol> {
        alphabet(&self.instance.shades)
    }

    pub fn language(&self, id: LanguageId) -> Option<&PathLanguage> {
        let list = match id.group {
            LanguageGroup::Good => &self.good,
            LanguageGroup::Bad => &self.bad,
            LanguageGroup::Ugly => &self.ugly,
        };
        list.get(id.index as usize - 1)
    }

    /// All languages with their ids, in canonical order (good, bad, ugly).
    pub fn tagged(&self) -> Vec<TaggedLanguage> {
        let mut out = Vec::new();
        for (i, l) in self.good.iter().enumerate() {
            out.push(TaggedLanguage { id: LanguageId::good(i as u32 + 1), language: l.clone() });
        }
        for (i, l) in self.bad.iter().enumerate() {
            out.push(TaggedLanguage { id: LanguageId::bad(i as u32 + 1), language: l.clone() });
        }
        for (i, l) in self.ugly.iter().enumerate() {
            out.push(TaggedLanguage { id: LanguageId::ugly(i as u32 + 1), language: l.clone() });
        }
        out
    }

    /// Languages whose mere appearance between the constants is fatal.
    pub fn forbidden_ids(&self) -> Vec<LanguageId> {
        let mut out: Vec<LanguageId> =
            (1..=self.bad.len() as u32).map(LanguageId::bad).collect();
        out.extend((1..=self.ugly.len() as u32).map(LanguageId::ugly));
        out
    }
}

// -- bundle serialization ----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct LanguageJson {
    group: LanguageGroup,
    index: u32,
    states: u32,
    start: u32,
    accepting: Vec<u32>,
    transitions: Vec<TransitionJson>,
}

#[derive(Serialize, Deserialize)]
struct TransitionJson {
    from: u32,
    to: u32,
    kind: Option<SymbolKind>,
    temp: Option<Temperature>,
    letter: Option<Letter>,
    orient: Option<Orientation>,
    shade: Option<Shade>,
}

fn language_to_json(id: LanguageId, l: &PathLanguage) -> LanguageJson {
    LanguageJson {
        group: id.group,
        index: id.index,
        states: l.state_count(),
        start: l.start(),
        accepting: l.accepting().iter().copied().collect(),
        transitions: l
            .transitions()
            .iter()
            .map(|t| TransitionJson {
                from: t.from,
                to: t.to,
                kind: t.label.pattern.kind,
                temp: t.label.pattern.temp,
                letter: t.label.pattern.letter,
                orient: t.label.pattern.orient,
                shade: t.label.pattern.shade.clone(),
            })
            .collect(),
    }
}

fn language_from_json(j: &LanguageJson) -> Result<PathLanguage, String> {
    let transitions = j
        .transitions
        .iter()
        .map(|t| Transition {
            from: t.from,
            to: t.to,
            label: LabelPattern {
                color: None,
                pattern: SymbolPattern {
                    kind: t.kind,
                    temp: t.temp,
                    letter: t.letter,
                    orient: t.orient,
                    shade: t.shade.clone(),
                },
            },
        })
        .collect();
    PathLanguage::build(j.states, j.start, j.accepting.iter().copied(), transitions, Colorspace::Base)
        .map_err(|e| e.to_string())
}

/// Serializes a reduction as a self-contained bundle: the source instance,
/// the alphabet summary and every language as an automaton.
pub fn bundle_to_json(r: &ReductionOutput) -> serde_json::Value {
    let mut languages: Vec<LanguageJson> = Vec::new();
    for t in r.tagged() {
        languages.push(language_to_json(t.id, &t.language));
    }
    serde_json::json!({
        "instance": crate::tiling::instance_to_json(&r.instance),
        "alphabet": {
            "shades": r.instance.shades.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "size": r.alphabet().len(),
        },
        "languages": serde_json::to_value(&languages).expect("languages serialize"),
        "counts": { "good": r.good.len(), "bad": r.bad.len(), "ugly": r.ugly.len() },
    })
}

/// Reads a bundle back. The languages are rebuilt from the stored instance
/// and verified against the stored automata.
pub fn bundle_from_json(v: &serde_json::Value) -> Result<ReductionOutput, String> {
    let instance = crate::tiling::instance_from_json(
        v.get("instance").ok_or("bundle missing instance")?,
    )?;
    let rebuilt = reduce(&instance);
    if let Some(languages) = v.get("languages") {
        let stored: Vec<LanguageJson> =
            serde_json::from_value(languages.clone()).map_err(|e| e.to_string())?;
        for j in &stored {
            let lang = language_from_json(j)?;
            let id = LanguageId { group: j.group, index: j.index };
            let own = rebuilt
                .language(id)
                .ok_or_else(|| format!("bundle names unknown language {id}"))?;
            let shades = &rebuilt.instance.shades;
            if lang.count_words(shades) != own.count_words(shades)
                || lang.max_word_len() != own.max_word_len()
            {
                return Err(format!("bundle language {id} disagrees with the instance"));
            }
        }
    }
    Ok(rebuilt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_size_for_two_shades_is_25() {
        let r = reduce(&TilingInstance::unconstrained());
        assert_eq!(r.alphabet().len(), 25);
        assert_eq!(r.alphabet().len(), 8 * r.instance.shades.len() + 9);
    }

    #[test]
    fn group_sizes() {
        let r = reduce(&TilingInstance::unconstrained());
        assert_eq!(r.good.len(), 15);
        assert_eq!(r.ugly.len(), 3);
        // no forbidden pairs: only the per-non-black-shade family, one member
        assert_eq!(r.bad.len(), 1);
    }

    #[test]
    fn bad_count_follows_instance() {
        let mut inst = TilingInstance::unconstrained();
        inst.shades.push(Shade::new("white"));
        inst.forbidden.insert((
            (Orientation::Horizontal, Shade::gray()),
            (Orientation::Vertical, Shade::black()),
        ));
        let r = reduce(&inst);
        assert_eq!(r.bad.len(), inst.forbidden.len() + inst.shades.len() - 1);
    }

    #[test]
    fn good1_is_the_omega_singleton() {
        let r = reduce(&TilingInstance::unconstrained());
        let (words, truncated) = r.good[0].enumerate_words(r.shades(), 10);
        assert!(!truncated);
        assert_eq!(words, vec![vec![Symbol::Omega]]);
    }

    #[test]
    fn good15_word_count_is_2_plus_s2_plus_s() {
        let r = reduce(&TilingInstance::unconstrained());
        let s = r.shades().len() as u128;
        assert_eq!(r.good[14].count_words(r.shades()), 2 + s * s + s);
    }

    #[test]
    fn language_lengths_match_the_construction() {
        let r = reduce(&TilingInstance::unconstrained());
        for (i, l) in r.good.iter().enumerate() {
            assert!(l.max_word_len() <= 3, "good {} too long", i + 1);
        }
        assert_eq!(r.bad[0].max_word_len(), 5);
        assert_eq!(r.ugly[0].max_word_len(), 11);
        assert_eq!(r.ugly[1].max_word_len(), 11);
        assert_eq!(r.ugly[2].max_word_len(), 6);
        assert_eq!(r.q_start.max_word_len(), 6);
    }

    #[test]
    fn bundle_round_trips() {
        let r = reduce(&TilingInstance::unconstrained());
        let v = bundle_to_json(&r);
        let back = bundle_from_json(&v).unwrap();
        assert_eq!(back.instance, r.instance);
        assert_eq!(back.good.len(), 15);
    }
}
