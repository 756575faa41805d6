//! Property tests over randomized structures and languages.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::random_structure;
use escape_core::chase::{add, constraint_system, requests};
use escape_core::graph::{
    find_homomorphism, isomorphic_mod_shades, Structure, VertexId, VertexMap,
};
use escape_core::lang::PathLanguage;
use escape_core::reduce::reduce;
use escape_core::symbol::{Color, Shade, Symbol, SymbolPattern, Temperature};
use escape_core::tiling::TilingInstance;

fn shades() -> Vec<Shade> {
    vec![Shade::gray(), Shade::black()]
}

fn arb_symbol() -> impl Strategy<Value = Symbol> {
    let all = escape_core::symbol::alphabet(&shades());
    (0..all.len()).prop_map(move |i| all[i].clone())
}

/// Small random base languages built from unions and concatenations of
/// one-symbol pattern languages.
fn arb_language() -> impl Strategy<Value = PathLanguage> {
    let leaf = arb_symbol().prop_map(|s| PathLanguage::from_pattern(SymbolPattern::exact(&s)));
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| PathLanguage::union(&a, &b).unwrap()),
            (inner.clone(), inner).prop_map(|(a, b)| PathLanguage::concat(&a, &b).unwrap()),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homomorphisms_found_are_sound(seed_s in 0u64..5000, seed_t in 0u64..5000) {
        let source = random_structure(seed_s, 6, 9);
        let target = random_structure(seed_t, 10, 18);
        if let Some(map) = find_homomorphism(&source, &target, &VertexMap::default()).unwrap() {
            prop_assert!(map.is_homomorphism(&source, &target));
        }
    }

    #[test]
    fn shade_blind_isomorphism_is_an_equivalence(x in 0u64..2000, y in 0u64..2000, z in 0u64..2000) {
        let sx = random_structure(x, 5, 8);
        let sy = random_structure(y, 5, 8);
        let sz = random_structure(z, 5, 8);
        prop_assert!(isomorphic_mod_shades(&sx, &sx));
        prop_assert_eq!(isomorphic_mod_shades(&sx, &sy), isomorphic_mod_shades(&sy, &sx));
        if isomorphic_mod_shades(&sx, &sy) && isomorphic_mod_shades(&sy, &sz) {
            prop_assert!(isomorphic_mod_shades(&sx, &sz));
        }
    }

    #[test]
    fn eval_distributes_over_union(a in arb_language(), b in arb_language(), seed in 0u64..5000) {
        let d = random_structure(seed, 7, 14);
        let u = PathLanguage::union(&a, &b).unwrap();
        for color in [Color::Green, Color::Red] {
            let ua = a.color(color).unwrap().eval(&d);
            let ub = b.color(color).unwrap().eval(&d);
            let both: BTreeSet<_> = ua.union(&ub).copied().collect();
            prop_assert_eq!(u.color(color).unwrap().eval(&d), both);
        }
    }

    #[test]
    fn eval_of_concat_is_the_midpoint_join(a in arb_language(), b in arb_language(), seed in 0u64..5000) {
        let d = random_structure(seed, 7, 14);
        let c = PathLanguage::concat(&a, &b).unwrap();
        let color = Color::Green;
        let ea = a.color(color).unwrap().eval(&d);
        let eb = b.color(color).unwrap().eval(&d);
        let join: BTreeSet<(VertexId, VertexId)> = ea
            .iter()
            .flat_map(|&(u, v)| eb.iter().filter(move |&&(x, _)| x == v).map(move |&(_, w)| (u, w)))
            .collect();
        prop_assert_eq!(c.color(color).unwrap().eval(&d), join);
    }

    #[test]
    fn coloring_preserves_word_counts(l in arb_language()) {
        let s = shades();
        let n = l.count_words(&s);
        prop_assert_eq!(l.color(Color::Green).unwrap().count_words(&s), n);
        prop_assert_eq!(l.color(Color::Red).unwrap().count_words(&s), n);
    }

    #[test]
    fn eval_is_isomorphism_invariant(seed in 0u64..3000, perm_seed in 0u64..1000) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let d = random_structure(seed, 7, 12);
        // renumber the non-constant vertices by a seeded permutation
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
        let mut others: Vec<VertexId> = d.vertices().filter(|v| *v != d.a() && *v != d.b()).collect();
        let mut images = others.clone();
        images.shuffle(&mut rng);
        let map: std::collections::BTreeMap<VertexId, VertexId> = {
            let mut m = std::collections::BTreeMap::new();
            m.insert(d.a(), d.a());
            m.insert(d.b(), d.b());
            for (v, img) in others.drain(..).zip(images) {
                m.insert(v, img);
            }
            m
        };
        let mut renamed = serde_json::to_value(&d).unwrap();
        {
            let obj = renamed.as_object_mut().unwrap();
            obj.remove("names");
            for e in obj["edges"].as_array_mut().unwrap() {
                let src = VertexId(e["src"].as_u64().unwrap() as u32);
                let dst = VertexId(e["dst"].as_u64().unwrap() as u32);
                e["src"] = serde_json::json!(map[&src].0);
                e["dst"] = serde_json::json!(map[&dst].0);
            }
        }
        let renamed: Structure = serde_json::from_value(renamed).unwrap();
        let lang = PathLanguage::sigma_upto(3).unwrap().color(Color::Green).unwrap();
        let direct: BTreeSet<_> = lang.eval(&d).into_iter().map(|(u, v)| (map[&u], map[&v])).collect();
        prop_assert_eq!(lang.eval(&renamed), direct);
    }

    #[test]
    fn requests_empty_iff_satisfies(seed in 0u64..4000) {
        let r = reduce(&TilingInstance::unconstrained());
        let cs = constraint_system(&r);
        let d = random_structure(seed, 5, 8);
        prop_assert_eq!(requests(&cs, &d).is_empty(), escape_core::chase::satisfies(&d, &cs));
    }

    #[test]
    fn serving_in_any_order_only_shrinks_the_original_requests(seed in 0u64..500) {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let r = reduce(&TilingInstance::unconstrained());
        let cs = constraint_system(&r);
        let (words, _) = r.q_start.enumerate_words(r.shades(), 10);
        let mut d = Structure::initial_green(&words[0]).unwrap();
        let original = requests(&cs, &d);
        let mut unserved = original.len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..12 {
            let mut pending = requests(&cs, &d);
            if pending.is_empty() {
                break;
            }
            pending.shuffle(&mut rng);
            let req = pending.remove(0);
            let c = cs.iter().find(|c| c.id == req.constraint).unwrap();
            let (head_words, _) = c.base.enumerate_words(r.shades(), 50);
            let word = &head_words[rng.gen_range(0..head_words.len())];
            // growth is monotone
            let before_vertices = d.vertex_count();
            let before_edges = d.edge_count();
            d = add(&d, c, &req, word).unwrap();
            prop_assert!(d.vertex_count() >= before_vertices);
            prop_assert!(d.edge_count() > before_edges);
            // the originally reported requests only get served, never revived
            let still: Vec<_> = original
                .iter()
                .filter(|r0| {
                    let c0 = cs.iter().find(|c| c.id == r0.constraint).unwrap();
                    c0.body.eval_pair(&d, r0.u, r0.v) && !c0.head.eval_pair(&d, r0.u, r0.v)
                })
                .collect();
            prop_assert!(still.len() <= unserved);
            unserved = still.len();
        }
    }
}
