//! Non-induced subgraph containment by backtracking with degree pruning.

use super::{low_mask, Graph, PartialGraph};

/// An injective map `π` with `g.has_edge(π(a), π(b))` for every edge `{a, b}`
/// of `h`, if one exists.
pub fn find_subgraph_injection(h: &Graph, g: &Graph) -> Option<Vec<usize>> {
    let (hn, gn) = (h.order(), g.order());
    if hn > gn || h.edge_count() > g.edge_count() {
        return None;
    }
    let mut hdeg: Vec<usize> = (0..hn).map(|v| h.degree(v)).collect();
    let mut gdeg: Vec<usize> = (0..gn).map(|v| g.degree(v)).collect();
    hdeg.sort_unstable_by(|a, b| b.cmp(a));
    gdeg.sort_unstable_by(|a, b| b.cmp(a));
    if hdeg.iter().zip(&gdeg).any(|(a, b)| a > b) {
        return None;
    }

    // match vertices with many already-ordered neighbours first
    let mut order = Vec::with_capacity(hn);
    let mut placed: u64 = 0;
    for _ in 0..hn {
        let v = (0..hn)
            .filter(|&v| placed >> v & 1 == 0)
            .max_by_key(|&v| ((h.row(v) & placed).count_ones(), h.degree(v), std::cmp::Reverse(v)))
            .unwrap();
        order.push(v);
        placed |= 1u64 << v;
    }

    let mut map = vec![usize::MAX; hn];
    if extend(h, g, &order, 0, &mut map, 0) {
        Some(map)
    } else {
        None
    }
}

fn extend(h: &Graph, g: &Graph, order: &[usize], depth: usize, map: &mut [usize], used: u64) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    let need = h.degree(v);
    let mut cand = low_mask(g.order()) & !used;
    for &u in &order[..depth] {
        if h.has_edge(u, v) {
            cand &= g.row(map[u]);
        }
    }
    while cand != 0 {
        let w = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        if g.degree(w) < need {
            continue;
        }
        map[v] = w;
        if extend(h, g, order, depth + 1, map, used | (1u64 << w)) {
            return true;
        }
    }
    map[v] = usize::MAX;
    false
}

/// Containment in the positively assigned edges of a partial assignment.
pub fn find_subgraph_injection_partial(h: &Graph, g: &PartialGraph) -> Option<Vec<usize>> {
    find_subgraph_injection(h, &g.present_graph())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let c4 = Graph::cycle(4).unwrap();
        let map = find_subgraph_injection(&c4, &c4).unwrap();
        for (a, b) in c4.edges() {
            assert!(c4.has_edge(map[a], map[b]));
        }
        let k3_plus = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(find_subgraph_injection(&c4, &k3_plus).is_none());
        let k3 = Graph::complete(3).unwrap();
        assert!(find_subgraph_injection(&k3, &Graph::complete(4).unwrap()).is_some());
    }
}
