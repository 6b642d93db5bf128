//! Vector assignments: disjoint pairs of edges at a common vertex, each read
//! as a cross-product definition of that vertex's vector.

use std::fmt;

use crate::graph::Graph;

/// `V_fixed = V_a × V_b`, covering edges `{fixed, a}` and `{fixed, b}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CrossPair {
    pub fixed: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorAssignment {
    /// Sorted by fixed vertex.
    pub pairs: Vec<CrossPair>,
}

impl fmt::Display for VectorAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pairs
            .iter()
            .map(|p| format!("V{} = V{} x V{}", p.fixed + 1, p.a + 1, p.b + 1))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl VectorAssignment {
    pub fn free_count(&self, order: usize) -> usize {
        order - self.pairs.len()
    }

    pub fn definition(&self, v: usize) -> Option<&CrossPair> {
        self.pairs.iter().find(|p| p.fixed == v)
    }

    /// Edges covered by cross definitions, as `(min, max)`.
    pub fn covered_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in &self.pairs {
            for w in [p.a, p.b] {
                out.push((p.fixed.min(w), p.fixed.max(w)));
            }
        }
        out.sort_unstable();
        out
    }

    /// Vertices in an order where each defined vertex follows its inputs;
    /// `None` when definitions are cyclic.
    pub fn topo_order(&self, order: usize) -> Option<Vec<usize>> {
        let mut def = vec![None; order];
        for p in &self.pairs {
            def[p.fixed] = Some((p.a, p.b));
        }
        let mut state = vec![0u8; order];
        let mut out = Vec::with_capacity(order);
        fn visit(v: usize, def: &[Option<(usize, usize)>], state: &mut [u8], out: &mut Vec<usize>) -> bool {
            match state[v] {
                2 => return true,
                1 => return false,
                _ => {}
            }
            state[v] = 1;
            if let Some((a, b)) = def[v] {
                if !visit(a, def, state, out) || !visit(b, def, state, out) {
                    return false;
                }
            }
            state[v] = 2;
            out.push(v);
            true
        }
        for v in 0..order {
            if !visit(v, &def, &mut state, &mut out) {
                return None;
            }
        }
        Some(out)
    }

    /// Pairs are edges of `g`, share their vertex, use every edge and every
    /// fixed vertex at most once, and have acyclic definitions.
    pub fn is_valid(&self, g: &Graph) -> bool {
        let mut fixed = vec![false; g.order()];
        for p in &self.pairs {
            if p.a == p.b || !g.has_edge(p.fixed, p.a) || !g.has_edge(p.fixed, p.b) || fixed[p.fixed] {
                return false;
            }
            fixed[p.fixed] = true;
        }
        let edges = self.covered_edges();
        edges.windows(2).all(|w| w[0] != w[1]) && self.topo_order(g.order()).is_some()
    }
}

struct Search<'a> {
    g: &'a Graph,
    n: usize,
    /// neighbours `w` of `v` whose edge is already in a pair
    used: Vec<u64>,
    def: Vec<Option<(usize, usize)>>,
    pairs: Vec<CrossPair>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn new(g: &Graph, budget: u64) -> Search<'_> {
        Search {
            g,
            n: g.order(),
            used: vec![0; g.order()],
            def: vec![None; g.order()],
            pairs: Vec::new(),
            nodes: 0,
            budget,
        }
    }

    fn depends_on(&self, x: usize, target: usize) -> bool {
        let mut stack = vec![x];
        let mut seen = 0u64;
        while let Some(v) = stack.pop() {
            if v == target {
                return true;
            }
            if seen >> v & 1 == 1 {
                continue;
            }
            seen |= 1 << v;
            if let Some((a, b)) = self.def[v] {
                stack.push(a);
                stack.push(b);
            }
        }
        false
    }

    fn options(&self, v: usize) -> Vec<(usize, usize)> {
        let free = self.g.row(v) & !self.used[v];
        let nb: Vec<usize> = (0..self.n).filter(|&w| free >> w & 1 == 1).collect();
        let mut out = Vec::new();
        for (x, &a) in nb.iter().enumerate() {
            for &b in &nb[x + 1..] {
                if !self.depends_on(a, v) && !self.depends_on(b, v) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    fn push(&mut self, v: usize, a: usize, b: usize) {
        self.def[v] = Some((a, b));
        for w in [a, b] {
            self.used[v] |= 1 << w;
            self.used[w] |= 1 << v;
        }
        self.pairs.push(CrossPair { fixed: v, a, b });
    }

    fn pop(&mut self, v: usize, a: usize, b: usize) {
        self.def[v] = None;
        for w in [a, b] {
            self.used[v] &= !(1 << w);
            self.used[w] &= !(1 << v);
        }
        self.pairs.pop();
    }

    fn is_maximal(&self) -> bool {
        (0..self.n).all(|v| self.def[v].is_some() || self.options(v).is_empty())
    }

    fn enumerate(&mut self, v: usize, out: &mut Vec<VectorAssignment>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if v == self.n {
            if self.is_maximal() {
                out.push(VectorAssignment {
                    pairs: self.pairs.clone(),
                });
            }
            return;
        }
        for (a, b) in self.options(v) {
            self.push(v, a, b);
            self.enumerate(v + 1, out, limit);
            self.pop(v, a, b);
        }
        self.enumerate(v + 1, out, limit);
    }

    fn upper_bound(&self, v: usize) -> usize {
        let mut possible = 0;
        for w in v..self.n {
            if (self.g.row(w) & !self.used[w]).count_ones() >= 2 {
                possible += 1;
            }
        }
        self.pairs.len() + possible
    }

    fn best(&mut self, v: usize, best: &mut Option<Vec<CrossPair>>, cap: usize) {
        self.nodes += 1;
        let best_len = best.as_ref().map_or(0, |b| b.len());
        if best.is_some() && (self.nodes > self.budget || best_len >= cap) {
            return;
        }
        if best.is_some() && self.upper_bound(v) <= best_len {
            return;
        }
        if v == self.n {
            if best.is_none() || self.pairs.len() > best_len {
                *best = Some(self.pairs.clone());
            }
            return;
        }
        for (a, b) in self.options(v) {
            self.push(v, a, b);
            self.best(v + 1, best, cap);
            self.pop(v, a, b);
        }
        self.best(v + 1, best, cap);
    }
}

/// All maximal assignments (at most `limit`), fewest free vectors first,
/// ties in lexicographic pair order.
pub fn enumerate_vector_assignments(g: &Graph, limit: usize) -> Vec<VectorAssignment> {
    let mut s = Search::new(g, u64::MAX);
    let mut out = Vec::new();
    s.enumerate(0, &mut out, limit);
    out.sort_by(|x, y| y.pairs.len().cmp(&x.pairs.len()).then_with(|| x.cmp(y)));
    out
}

/// An assignment with the fewest free vectors found within the node budget
/// (exact when the budget is not hit).
pub fn select_assignment(g: &Graph) -> VectorAssignment {
    select_assignment_budgeted(g, 2_000_000)
}

pub fn select_assignment_budgeted(g: &Graph, budget: u64) -> VectorAssignment {
    let n = g.order();
    // the first defined vertex in a dependency order has two free inputs
    let cap = n.saturating_sub(2).min(g.edge_count() / 2);
    let mut s = Search::new(g, budget);
    let mut best = None;
    s.best(0, &mut best, cap);
    VectorAssignment {
        pairs: best.unwrap_or_default(),
    }
}
