//! Fugitive policies: the canonical forced-word player, scripted and seeded
//! random players for adversarial tests, and the homomorphism-lifting player
//! that survives forever whenever a counterexample structure exists.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chase::{RegularConstraint, Request};
use crate::fixtures::ShadeOracle;
use crate::graph::{Structure, VertexId, VertexMap};
use crate::lang::PathLanguage;
use crate::reduce::{LanguageGroup, LanguageId};
use crate::symbol::{Color, Letter, Orientation, Shade, Symbol, Temperature, Word};
use crate::tiling::GridEdge;

use super::GameConfig;

/// The fugitive's half of the game loop. `choose_word` may stash state that
/// `observe_step` consumes once the engine has written the path.
pub trait Policy {
    fn kind(&self) -> &'static str;

    fn initial_word(&mut self, config: &GameConfig) -> Result<Word, String>;

    /// Called once with the opening structure and its path from a to b.
    fn observe_initial(&mut self, d0: &Structure, path: &[VertexId]);

    fn choose_word(
        &mut self,
        config: &GameConfig,
        d: &Structure,
        c: &RegularConstraint,
        req: &Request,
    ) -> Result<Word, String>;

    /// Called after the chosen word was written; `fresh` are the new interior
    /// vertices in path order.
    fn observe_step(
        &mut self,
        d: &Structure,
        req: &Request,
        word: &Word,
        fresh: &[VertexId],
    ) -> Result<(), String>;

    fn coords(&self) -> Option<&BTreeMap<VertexId, (u32, u32)>> {
        None
    }

    fn certificate_ok(&self) -> Option<bool> {
        None
    }
}

// -- canonical ----------------------------------------------------------------

/// Plays the unique principled answer to every request: red answers warm,
/// green answers cold, grid growth follows the staircase-and-layers shape,
/// shades come from the oracle, and the dollar exit is taken exactly at the
/// scripted size. Tracks grid coordinates for every vertex it creates.
pub struct CanonicalPolicy {
    oracle: Box<dyn ShadeOracle>,
    exit_at: Option<u32>,
    coords: BTreeMap<VertexId, (u32, u32)>,
    planned: Vec<(u32, u32)>,
}

impl CanonicalPolicy {
    pub fn new(oracle: Box<dyn ShadeOracle>, exit_at: Option<u32>) -> CanonicalPolicy {
        CanonicalPolicy { oracle, exit_at, coords: BTreeMap::new(), planned: Vec::new() }
    }

    fn shade(&self, edge: GridEdge) -> Shade {
        self.oracle.shade(edge)
    }

    fn coord(&self, v: VertexId) -> Result<(u32, u32), String> {
        self.coords.get(&v).copied().ok_or_else(|| format!("vertex {v} has no grid coordinate"))
    }

    fn grid_sym(&self, l: Letter, o: Orientation, t: Temperature, from: (u32, u32)) -> Symbol {
        Symbol::grid(l, o, t, self.shade(GridEdge { from, axis: o }))
    }
}

use crate::chase::Direction;
use Orientation::{Horizontal as H, Vertical as V};
use Temperature::{Cold, Warm};

impl Policy for CanonicalPolicy {
    fn kind(&self) -> &'static str {
        "canonical"
    }

    fn initial_word(&mut self, _config: &GameConfig) -> Result<Word, String> {
        Ok(vec![
            Symbol::Alpha(Cold),
            Symbol::X(Cold),
            Symbol::grid(Letter::A, H, Cold, Shade::gray()),
            Symbol::grid(Letter::B, V, Cold, self.shade(GridEdge::vertical(1, 0))),
            Symbol::Y(Cold),
            Symbol::Omega,
        ])
    }

    fn observe_initial(&mut self, _d0: &Structure, path: &[VertexId]) {
        // a, a', v(0,0), v(1,0), v(1,1), b', b
        assert_eq!(path.len(), 7, "opening word has six symbols");
        self.coords.insert(path[2], (0, 0));
        self.coords.insert(path[3], (1, 0));
        self.coords.insert(path[4], (1, 1));
    }

    fn choose_word(
        &mut self,
        _config: &GameConfig,
        _d: &Structure,
        _c: &RegularConstraint,
        req: &Request,
    ) -> Result<Word, String> {
        self.planned.clear();
        let id = req.constraint.language;
        if id.group != LanguageGroup::Good {
            return Err(format!("no principled answer to a {} request", id.group));
        }
        let dir = req.constraint.direction;
        let warm_head = dir == Direction::GreenToRed;
        let t = if warm_head { Warm } else { Cold };
        let word = match id.index {
            1 => vec![Symbol::Omega],
            2 => vec![Symbol::Alpha(t)],
            3 | 12 | 14 => vec![Symbol::X(t)],
            4 | 13 => vec![Symbol::Y(t)],
            5 => vec![Symbol::Dollar(t)],
            6..=9 => {
                let (letter, orient) = match id.index {
                    6 => (Letter::B, V),
                    7 => (Letter::B, H),
                    8 => (Letter::A, V),
                    _ => (Letter::A, H),
                };
                let from = self.coord(req.u)?;
                vec![self.grid_sym(letter, orient, t, from)]
            }
            10 => {
                let (i, j) = self.coord(req.u)?;
                if warm_head {
                    self.planned.push((i + 1, j));
                    vec![
                        self.grid_sym(Letter::B, H, Warm, (i, j)),
                        self.grid_sym(Letter::A, V, Warm, (i + 1, j)),
                    ]
                } else {
                    self.planned.push((i, j + 1));
                    vec![
                        self.grid_sym(Letter::B, V, Cold, (i, j)),
                        self.grid_sym(Letter::A, H, Cold, (i, j + 1)),
                    ]
                }
            }
            11 => {
                let (i, j) = self.coord(req.u)?;
                if warm_head {
                    self.planned.push((i, j + 1));
                    vec![
                        self.grid_sym(Letter::A, V, Warm, (i, j)),
                        self.grid_sym(Letter::B, H, Warm, (i, j + 1)),
                    ]
                } else {
                    self.planned.push((i + 1, j));
                    vec![
                        self.grid_sym(Letter::A, H, Cold, (i, j)),
                        self.grid_sym(Letter::B, V, Cold, (i + 1, j)),
                    ]
                }
            }
            15 => {
                if warm_head {
                    vec![Symbol::Y(Warm)]
                } else {
                    let (i, j) = self.coord(req.u)?;
                    if i != j {
                        return Err(format!(
                            "frontier request expected on the diagonal, got ({i},{j})"
                        ));
                    }
                    if self.exit_at == Some(i) {
                        vec![Symbol::Dollar(Cold)]
                    } else {
                        self.planned.push((i + 1, j));
                        self.planned.push((i + 1, j + 1));
                        vec![
                            self.grid_sym(Letter::A, H, Cold, (i, j)),
                            self.grid_sym(Letter::B, V, Cold, (i + 1, j)),
                            Symbol::Y(Cold),
                        ]
                    }
                }
            }
            other => return Err(format!("unknown builder language index {other}")),
        };
        Ok(word)
    }

    fn observe_step(
        &mut self,
        _d: &Structure,
        _req: &Request,
        _word: &Word,
        fresh: &[VertexId],
    ) -> Result<(), String> {
        if fresh.len() != self.planned.len() {
            return Err(format!(
                "planned {} fresh vertices, engine created {}",
                self.planned.len(),
                fresh.len()
            ));
        }
        for (v, c) in fresh.iter().zip(self.planned.drain(..)) {
            self.coords.insert(*v, c);
        }
        Ok(())
    }

    fn coords(&self) -> Option<&BTreeMap<VertexId, (u32, u32)>> {
        Some(&self.coords)
    }
}

// -- scripted -----------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum ScriptedStart {
    Word(Word),
    /// The rank-th word (shortlex) of the given language, found within the
    /// word budget.
    LanguageWord { id: Option<LanguageId>, rank: usize },
}

/// Replays a fixed script of response words, then (optionally) falls back to
/// the first enumerable head word.
pub struct ScriptedPolicy {
    start: ScriptedStart,
    responses: VecDeque<Word>,
    fallback_first: bool,
}

impl ScriptedPolicy {
    pub fn new(start: ScriptedStart, responses: Vec<Word>, fallback_first: bool) -> ScriptedPolicy {
        ScriptedPolicy { start, responses: responses.into(), fallback_first }
    }

    /// Opens with the canonical start-language word, serving everything else
    /// with the first enumerable word.
    pub fn first_word_everywhere() -> ScriptedPolicy {
        ScriptedPolicy::new(ScriptedStart::LanguageWord { id: None, rank: 0 }, Vec::new(), true)
    }
}

fn nth_word(l: &PathLanguage, shades: &[Shade], budget: usize, rank: usize) -> Result<Word, String> {
    let (words, _) = l.enumerate_words(shades, budget);
    words.get(rank).cloned().ok_or_else(|| {
        format!("word budget {budget} too small to surface word #{rank} of the language")
    })
}

impl Policy for ScriptedPolicy {
    fn kind(&self) -> &'static str {
        "scripted"
    }

    fn initial_word(&mut self, config: &GameConfig) -> Result<Word, String> {
        let r = &config.reduction;
        match &self.start {
            ScriptedStart::Word(w) => Ok(w.clone()),
            ScriptedStart::LanguageWord { id: None, rank } => {
                nth_word(&r.q_start, r.shades(), config.word_budget, *rank)
            }
            ScriptedStart::LanguageWord { id: Some(id), rank } => {
                let l = r.language(*id).ok_or_else(|| format!("unknown language {id}"))?;
                nth_word(l, r.shades(), config.word_budget, *rank)
            }
        }
    }

    fn observe_initial(&mut self, _d0: &Structure, _path: &[VertexId]) {}

    fn choose_word(
        &mut self,
        config: &GameConfig,
        _d: &Structure,
        c: &RegularConstraint,
        _req: &Request,
    ) -> Result<Word, String> {
        if let Some(word) = self.responses.pop_front() {
            return Ok(word);
        }
        if self.fallback_first {
            return nth_word(&c.base, config.reduction.shades(), config.word_budget, 0);
        }
        Err("script exhausted".into())
    }

    fn observe_step(
        &mut self,
        _d: &Structure,
        _req: &Request,
        _word: &Word,
        _fresh: &[VertexId],
    ) -> Result<(), String> {
        Ok(())
    }
}

// -- seeded random, principle-obeying ------------------------------------------

/// Opens legally and serves every request with a uniformly random head word
/// whose temperatures match its color (red words warm, green words cold).
pub struct RandomPrincipledPolicy {
    rng: ChaCha8Rng,
}

impl RandomPrincipledPolicy {
    pub fn new(seed: u64) -> RandomPrincipledPolicy {
        RandomPrincipledPolicy { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

fn temperature_ok(word: &[Symbol], head_color: Color) -> bool {
    let banned = match head_color {
        Color::Red => Temperature::Cold,
        Color::Green => Temperature::Warm,
    };
    word.iter().all(|s| s.temperature() != Some(banned))
}

impl Policy for RandomPrincipledPolicy {
    fn kind(&self) -> &'static str {
        "random-principled"
    }

    fn initial_word(&mut self, config: &GameConfig) -> Result<Word, String> {
        let shades = config.reduction.shades();
        let pick = shades[self.rng.gen_range(0..shades.len())].clone();
        Ok(vec![
            Symbol::Alpha(Cold),
            Symbol::X(Cold),
            Symbol::grid(Letter::A, H, Cold, Shade::gray()),
            Symbol::grid(Letter::B, V, Cold, pick),
            Symbol::Y(Cold),
            Symbol::Omega,
        ])
    }

    fn observe_initial(&mut self, _d0: &Structure, _path: &[VertexId]) {}

    fn choose_word(
        &mut self,
        config: &GameConfig,
        _d: &Structure,
        c: &RegularConstraint,
        req: &Request,
    ) -> Result<Word, String> {
        let shades = config.reduction.shades();
        let (words, _) = c.base.enumerate_words(shades, config.word_budget);
        let head_color = req.constraint.direction.head_color();
        let compliant: Vec<&Word> = words.iter().filter(|w| temperature_ok(w, head_color)).collect();
        let pool: Vec<&Word> = if compliant.is_empty() { words.iter().collect() } else { compliant };
        if pool.is_empty() {
            return Err("no word available within the word budget".into());
        }
        Ok(pool[self.rng.gen_range(0..pool.len())].clone())
    }

    fn observe_step(
        &mut self,
        _d: &Structure,
        _req: &Request,
        _word: &Word,
        _fresh: &[VertexId],
    ) -> Result<(), String> {
        Ok(())
    }
}

// -- homomorphism lifting -------------------------------------------------------

/// Keeps a certified homomorphism from the play into a fixed target
/// structure that satisfies every constraint: each request is served by
/// copying a head path that must exist in the target, so the play can never
/// create a red start-query path if the target has none.
pub struct LiftingPolicy {
    target: Structure,
    h: VertexMap,
    pending_image: Vec<VertexId>,
    pending_color: Option<Color>,
    certificate_ok: bool,
}

impl LiftingPolicy {
    pub fn new(target: Structure) -> LiftingPolicy {
        LiftingPolicy {
            target,
            h: VertexMap::default(),
            pending_image: Vec::new(),
            pending_color: None,
            certificate_ok: true,
        }
    }

    pub fn map(&self) -> &VertexMap {
        &self.h
    }

    pub fn verify_certificate(&self, d: &Structure) -> bool {
        self.h.is_homomorphism(d, &self.target)
    }
}

impl Policy for LiftingPolicy {
    fn kind(&self) -> &'static str {
        "lifting"
    }

    fn initial_word(&mut self, config: &GameConfig) -> Result<Word, String> {
        let green_q0 = config.reduction.q0.color(Color::Green).expect("base q0");
        let (word, path) = green_q0
            .eval_witness(&self.target, self.target.a(), self.target.b())
            .ok_or("target does not satisfy the green start query between its constants")?;
        self.pending_image = path;
        self.pending_color = Some(Color::Green);
        Ok(word)
    }

    fn observe_initial(&mut self, d0: &Structure, path: &[VertexId]) {
        assert_eq!(path.len(), self.pending_image.len());
        for (v, img) in path.iter().zip(self.pending_image.drain(..)) {
            self.h.insert(*v, img);
        }
        debug_assert!(self.verify_certificate(d0));
    }

    fn choose_word(
        &mut self,
        _config: &GameConfig,
        _d: &Structure,
        c: &RegularConstraint,
        req: &Request,
    ) -> Result<Word, String> {
        let u = self.h.get(req.u).ok_or_else(|| format!("no image for {}", req.u))?;
        let v = self.h.get(req.v).ok_or_else(|| format!("no image for {}", req.v))?;
        let (word, path) = c.head.eval_witness(&self.target, u, v).ok_or_else(|| {
            format!("target does not satisfy the head of {} between the images of ({}, {})", c.id, req.u, req.v)
        })?;
        self.pending_image = path;
        self.pending_color = Some(req.constraint.direction.head_color());
        Ok(word)
    }

    fn observe_step(
        &mut self,
        d: &Structure,
        req: &Request,
        word: &Word,
        fresh: &[VertexId],
    ) -> Result<(), String> {
        let image = std::mem::take(&mut self.pending_image);
        let color = self.pending_color.take().expect("choose_word ran");
        assert_eq!(image.len(), word.len() + 1);
        assert_eq!(fresh.len(), word.len().saturating_sub(1));
        // interior vertices map onto the witness path's interior; the map
        // only ever grows (each image binds a brand new vertex)
        for (v, img) in fresh.iter().zip(image[1..].iter()) {
            if self.h.get(*v).is_some() {
                self.certificate_ok = false;
                return Err(format!("fresh vertex {v} was already mapped"));
            }
            self.h.insert(*v, *img);
        }
        // per-step certificate: every edge of the added path maps to an edge
        // of the target
        let mut path_vertices = Vec::with_capacity(word.len() + 1);
        path_vertices.push(req.u);
        path_vertices.extend_from_slice(fresh);
        path_vertices.push(req.v);
        for (i, symbol) in word.iter().enumerate() {
            let (src, dst) = (path_vertices[i], path_vertices[i + 1]);
            let label = crate::symbol::EdgeLabel { color, symbol: symbol.clone() };
            let (isrc, idst) = (self.h.get(src).unwrap(), self.h.get(dst).unwrap());
            if !self.target.has_edge(isrc, idst, &label) {
                self.certificate_ok = false;
                return Err(format!(
                    "certificate broken: edge {src}->{dst} ({label}) has no image in the target"
                ));
            }
            if !d.has_edge(src, dst, &label) {
                self.certificate_ok = false;
                return Err("engine and policy disagree about the written path".into());
            }
        }
        Ok(())
    }

    fn certificate_ok(&self) -> Option<bool> {
        Some(self.certificate_ok)
    }
}
