//! Clause families checked against direct graph predicates on every small graph.

use ks_core::cnf::{
    assemble, encode_lex_symmetry, encode_min_degree, encode_noncolorability, encode_squarefree,
    encode_triangle_membership, CnfFormula, EncodeOptions, Family, Lit, VarMap,
};
use ks_core::graph::{is_010_colorable, is_canonical, pair_count, Graph};

fn graph_from_code(n: usize, code: u64) -> Graph {
    let m = pair_count(n);
    let bits: Vec<bool> = (0..m).map(|s| (code >> s) & 1 == 1).collect();
    Graph::from_lex_bits(n, &bits).unwrap()
}

/// Value of every edge and triangle variable for `g`; other variables from `aux`.
fn base_value(map: &VarMap, g: &Graph, v: Lit) -> Option<bool> {
    let n = map.order();
    if let Some((i, j)) = map.edge_of_var(v) {
        return Some(g.has_edge(i, j));
    }
    for k in 2..n {
        for j in 1..k {
            for i in 0..j {
                if map.triangle_var(i, j, k) == v {
                    return Some(g.has_edge(i, j) && g.has_edge(i, k) && g.has_edge(j, k));
                }
            }
        }
    }
    None
}

fn satisfied(f: &CnfFormula, map: &VarMap, g: &Graph) -> bool {
    f.satisfied_by(|v| base_value(map, g, v).expect("family uses only edges and triangles"))
}

fn rows_lex_ordered(g: &Graph) -> bool {
    let n = g.order();
    for j in 1..n {
        for i in 0..j {
            for k in (0..n).filter(|&k| k != i && k != j) {
                match (g.has_edge(i, k), g.has_edge(j, k)) {
                    (false, true) => break,
                    (true, false) => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

/// Whether some auxiliary assignment satisfies every lex clause for `g`.
fn lex_satisfiable(map: &VarMap, g: &Graph) -> bool {
    let n = map.order();
    let f = encode_lex_symmetry(map);
    let aux = map.aux_per_pair();
    let per_pair = if n >= 3 { 3 * (n - 2) - 2 } else { 0 };
    let mut pair = 0;
    for j in 1..n {
        for i in 0..j {
            let block = &f.clauses[pair * per_pair..(pair + 1) * per_pair];
            let ok = (0u32..(1 << aux)).any(|bits| {
                block.iter().all(|c| {
                    c.iter().any(|&l| {
                        let v = l.abs();
                        let val = base_value(map, g, v).unwrap_or_else(|| {
                            let t = (0..aux).find(|&t| map.aux_var(i, j, t) == v).expect("own auxiliary");
                            (bits >> t) & 1 == 1
                        });
                        val == (l > 0)
                    })
                })
            });
            if !ok {
                return false;
            }
            pair += 1;
        }
    }
    true
}

#[test]
fn families_match_graph_predicates() {
    for n in 4..=6 {
        let map = VarMap::new(n, true).unwrap();
        let sq = encode_squarefree(&map);
        let d2 = encode_min_degree(&map, 2).unwrap();
        let d3 = encode_min_degree(&map, 3).unwrap();
        let tri = encode_triangle_membership(&map);
        let nc = encode_noncolorability(&map, false);
        for code in 0..(1u64 << pair_count(n)) {
            let g = graph_from_code(n, code);
            assert_eq!(satisfied(&sq, &map, &g), g.is_squarefree());
            assert_eq!(satisfied(&d2, &map, &g), g.min_degree() >= 2);
            assert_eq!(satisfied(&d3, &map, &g), g.min_degree() >= 3);
            assert_eq!(satisfied(&tri, &map, &g), g.every_vertex_in_triangle());
            assert_eq!(satisfied(&nc, &map, &g), !is_010_colorable(&g).is_colorable());
        }
    }
}

#[test]
fn lex_clauses_encode_row_order_and_admit_canonical_graphs() {
    for n in 3..=6 {
        let map = VarMap::new(n, true).unwrap();
        for code in 0..(1u64 << pair_count(n)) {
            let g = graph_from_code(n, code);
            let sat = lex_satisfiable(&map, &g);
            assert_eq!(sat, rows_lex_ordered(&g), "{g:?}");
            if is_canonical(&g).is_canonical() {
                assert!(sat, "canonical graph rejected: {g:?}");
            }
        }
    }
}

#[test]
fn closed_form_counts_up_to_23() {
    use ks_core::cnf::binomial;
    for n in 4..=23 {
        // the noncolorability family is too large to materialise above 17
        let opts = if n <= 17 { EncodeOptions::ks() } else { EncodeOptions::cubing() };
        let inst = assemble(n, &opts).unwrap();
        assert_eq!(inst.family_count(Family::TriangleDefs), Some(4 * binomial(n, 3)));
        assert_eq!(inst.family_count(Family::Squarefree), Some(3 * binomial(n, 4)));
        assert_eq!(inst.family_count(Family::MinDegree), Some(n * binomial(n - 1, 2)));
        assert_eq!(inst.family_count(Family::TriangleMembership), Some(n));
        assert_eq!(inst.family_count(Family::LexSymmetry), Some(pair_count(n) * (3 * (n - 2) - 2)));
        if n <= 16 {
            let map = VarMap::new(n, false).unwrap();
            assert_eq!(encode_noncolorability(&map, false).len(), 1 << n);
        }
    }
}

#[test]
fn truncation_keeps_small_one_sets() {
    use ks_core::cnf::binomial;
    for n in 3..=12 {
        let map = VarMap::new(n, false).unwrap();
        let kept: usize = (0..n.div_ceil(2)).map(|k| binomial(n, k)).sum();
        assert_eq!(encode_noncolorability(&map, true).len(), kept);
    }
}
