//! Brute-force oracles for the graph routines.

mod common;

use std::collections::HashMap;

use ks_core::graph::{
    canonical_form, find_subgraph_injection, is_010_colorable, is_canonical, pair_count, Canonicity, Graph,
    Permutation,
};
use common::{all_perms, brute_colorable, brute_min_key, graph_from_code, lex_key};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn canonicity_matches_brute_force_up_to_order_6() {
    // labeled-graph isomorphism class counts for n = 1..6
    let expected_classes = [1usize, 2, 4, 11, 34, 156];
    for n in 1..=6 {
        let perms = all_perms(n);
        let m = pair_count(n);
        let mut classes: HashMap<u64, usize> = HashMap::new();
        for code in 0..(1u64 << m) {
            let g = graph_from_code(n, code);
            assert_eq!(lex_key(&g), code);
            let min = brute_min_key(&g, &perms);
            let brute_canonical = min == code;
            match is_canonical(&g) {
                Canonicity::Canonical => assert!(brute_canonical, "n={n} code={code:b}"),
                Canonicity::Noncanonical(w) => {
                    assert!(!brute_canonical, "n={n} code={code:b}");
                    assert!(lex_key(&g.permute(&w).unwrap()) < code, "witness must reduce");
                }
            }
            if brute_canonical {
                *classes.entry(min).or_default() += 1;
                if n >= 2 {
                    assert!(is_canonical(&g.parent().unwrap()).is_canonical(), "hereditary");
                }
            }
            let (form, p) = canonical_form(&g);
            assert_eq!(lex_key(&form), min);
            assert_eq!(g.permute(&p).unwrap(), form);
        }
        assert_eq!(classes.len(), expected_classes[n - 1], "class count n={n}");
        assert!(classes.values().all(|&c| c == 1), "exactly one canonical per class");
    }
}

#[test]
fn colorability_matches_brute_force() {
    for n in 1..=6 {
        for code in 0..(1u64 << pair_count(n)) {
            let g = graph_from_code(n, code);
            assert_eq!(is_010_colorable(&g).is_colorable(), brute_colorable(&g), "{g:?}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.gen_range(7..=12);
        let density = rng.gen_range(0.2..0.9);
        let mut g = Graph::empty(n).unwrap();
        for j in 1..n {
            for i in 0..j {
                if rng.gen_bool(density) {
                    g.add_edge(i, j);
                }
            }
        }
        assert_eq!(is_010_colorable(&g).is_colorable(), brute_colorable(&g), "{g:?}");
    }
}

fn brute_injection_exists(h: &Graph, g: &Graph) -> bool {
    fn rec(h: &Graph, g: &Graph, v: usize, map: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        if v == h.order() {
            return h.edges().iter().all(|&(a, b)| g.has_edge(map[a], map[b]));
        }
        for w in 0..g.order() {
            if !used[w] {
                used[w] = true;
                map.push(w);
                if rec(h, g, v + 1, map, used) {
                    return true;
                }
                map.pop();
                used[w] = false;
            }
        }
        false
    }
    rec(h, g, 0, &mut Vec::new(), &mut vec![false; g.order()])
}

#[test]
fn subgraph_search_matches_exhaustive_injections() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..600 {
        let hn = rng.gen_range(1..=5);
        let gn = rng.gen_range(hn..=8);
        let random = |rng: &mut ChaCha8Rng, n: usize, p: f64| {
            let mut g = Graph::empty(n).unwrap();
            for j in 1..n {
                for i in 0..j {
                    if rng.gen_bool(p) {
                        g.add_edge(i, j);
                    }
                }
            }
            g
        };
        let h = random(&mut rng, hn, 0.5);
        let g = random(&mut rng, gn, 0.45);
        let found = find_subgraph_injection(&h, &g);
        assert_eq!(found.is_some(), brute_injection_exists(&h, &g), "h={h:?} g={g:?}");
        if let Some(map) = found {
            let mut seen = vec![false; gn];
            for &w in &map {
                assert!(!seen[w]);
                seen[w] = true;
            }
            for (a, b) in h.edges() {
                assert!(g.has_edge(map[a], map[b]));
            }
        }
    }
}

fn arb_graph_and_perms() -> impl Strategy<Value = (Graph, Vec<usize>, Vec<usize>)> {
    (1usize..=9).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<bool>(), pair_count(n)),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        )
            .prop_map(move |(bits, p, q)| (Graph::from_lex_bits(n, &bits).unwrap(), p, q))
    })
}

proptest! {
    #[test]
    fn permute_is_group_action((g, p, q) in arb_graph_and_perms()) {
        let p = Permutation::new(p).unwrap();
        let q = Permutation::new(q).unwrap();
        let lhs = g.permute(&p).unwrap().permute(&q).unwrap();
        prop_assert_eq!(lhs, g.permute(&q.compose(&p)).unwrap());
        prop_assert_eq!(g.permute(&Permutation::identity(g.order())).unwrap(), g);
    }

    #[test]
    fn witnesses_strictly_reduce((g, _, _) in arb_graph_and_perms()) {
        if let Canonicity::Noncanonical(w) = is_canonical(&g) {
            prop_assert_eq!(g.permute(&w).unwrap().lex_cmp(&g), std::cmp::Ordering::Less);
        }
    }
}
