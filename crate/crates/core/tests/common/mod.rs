//! Brute-force helpers shared by the oracle tests and the acceptance suite.
#![allow(dead_code)]

use ks_core::graph::{pair_count, Graph, Permutation};

pub fn all_perms(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    heap_permute(k, &mut cur, &mut out);
    out
}

fn heap_permute(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k - 1 {
        heap_permute(k - 1, a, out);
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
    heap_permute(k - 1, a, out);
}

/// Lex string as an integer, first slot most significant.
pub fn lex_key(g: &Graph) -> u64 {
    g.lex_bits().iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

pub fn graph_from_code(n: usize, code: u64) -> Graph {
    let m = pair_count(n);
    let bits: Vec<bool> = (0..m).map(|s| (code >> (m - 1 - s)) & 1 == 1).collect();
    Graph::from_lex_bits(n, &bits).unwrap()
}

pub fn brute_min_key(g: &Graph, perms: &[Vec<usize>]) -> u64 {
    perms
        .iter()
        .map(|p| lex_key(&g.permute(&Permutation::new(p.clone()).unwrap()).unwrap()))
        .min()
        .unwrap()
}

pub fn brute_colorable(g: &Graph) -> bool {
    let n = g.order();
    let edges = g.edges();
    let mut tris = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if g.has_edge(i, j) && g.has_edge(i, k) && g.has_edge(j, k) {
                    tris.push((i, j, k));
                }
            }
        }
    }
    (0..(1u64 << n)).any(|c| {
        let one = |v: usize| (c >> v) & 1 == 1;
        edges.iter().all(|&(i, j)| !(one(i) && one(j))) && tris.iter().all(|&(i, j, k)| one(i) || one(j) || one(k))
    })
}
