//! Simple undirected graphs on at most 64 vertices, plus the combinatorial
//! routines the search queries: lex canonicity, 010-colorability and
//! (non-induced) subgraph containment.
//!
//! Vertices are 0-based in the API. Text formats (witness permutations,
//! sidecar records) are 1-based.

mod canon;
mod color;
pub mod graph6;
mod subgraph;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

pub use canon::{
    canonical_form, check_canonical, is_canonical, BudgetedCanonicity, Canonicity, CanonStats,
};
pub use color::{is_010_colorable, Colorability, Coloring};
pub use subgraph::{find_subgraph_injection, find_subgraph_injection_partial};

/// Largest supported order; adjacency rows are single `u64` words.
pub const MAX_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("order {0} out of range 1..={MAX_ORDER}")]
    BadOrder(usize),
    #[error("order mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("vertex {vertex} out of range for order {order}")]
    BadVertex { vertex: usize, order: usize },
    #[error("not a permutation: {0}")]
    BadPermutation(String),
    #[error("graph6 parse error at byte {offset}: {reason}")]
    Graph6 { offset: usize, reason: String },
    #[error("order-1 graph has no parent")]
    NoParent,
}

/// Number of unordered pairs on `n` vertices.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the slot `{i, j}` in the column-major upper triangle:
/// `(0,1), (0,2), (1,2), (0,3), ...`.
#[inline]
pub fn slot_index(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

/// Inverse of [`slot_index`].
pub fn slot_pair(slot: usize) -> (usize, usize) {
    // largest j with j(j-1)/2 <= slot
    let mut j = (((8 * slot + 1) as f64).sqrt() as usize + 1) / 2;
    while j * (j - 1) / 2 > slot {
        j -= 1;
    }
    while (j + 1) * j / 2 <= slot {
        j += 1;
    }
    (slot - j * (j - 1) / 2, j)
}

#[inline]
pub(crate) fn low_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// An order-`n` simple graph stored as symmetric adjacency rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    order: usize,
    rows: Vec<u64>,
}

impl Graph {
    pub fn empty(order: usize) -> Result<Self, GraphError> {
        if order == 0 || order > MAX_ORDER {
            return Err(GraphError::BadOrder(order));
        }
        Ok(Graph {
            order,
            rows: vec![0; order],
        })
    }

    pub fn complete(order: usize) -> Result<Self, GraphError> {
        let mut g = Graph::empty(order)?;
        for i in 0..order {
            g.rows[i] = low_mask(order) & !(1u64 << i);
        }
        Ok(g)
    }

    pub fn cycle(order: usize) -> Result<Self, GraphError> {
        let mut g = Graph::empty(order)?;
        for i in 0..order {
            g.add_edge(i, (i + 1) % order);
        }
        Ok(g)
    }

    pub fn from_edges(order: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(order)?;
        for &(i, j) in edges {
            for v in [i, j] {
                if v >= order {
                    return Err(GraphError::BadVertex { vertex: v, order });
                }
            }
            if i != j {
                g.add_edge(i, j);
            }
        }
        Ok(g)
    }

    /// Builds a graph from its lex string (column-major upper triangle).
    pub fn from_lex_bits(order: usize, bits: &[bool]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(order)?;
        if bits.len() != pair_count(order) {
            return Err(GraphError::SizeMismatch {
                left: bits.len(),
                right: pair_count(order),
            });
        }
        for (slot, &b) in bits.iter().enumerate() {
            if b {
                let (i, j) = slot_pair(slot);
                g.add_edge(i, j);
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        (self.rows[i] >> j) & 1 == 1
    }

    #[inline]
    pub fn add_edge(&mut self, i: usize, j: usize) {
        debug_assert!(i != j);
        self.rows[i] |= 1u64 << j;
        self.rows[j] |= 1u64 << i;
    }

    #[inline]
    pub fn remove_edge(&mut self, i: usize, j: usize) {
        self.rows[i] &= !(1u64 << j);
        self.rows[j] &= !(1u64 << i);
    }

    /// Neighbourhood of `v` as a bit mask.
    #[inline]
    pub fn row(&self, v: usize) -> u64 {
        self.rows[v]
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].count_ones() as usize
    }

    pub fn min_degree(&self) -> usize {
        (0..self.order).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, in lex-string order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for j in 1..self.order {
            let mut col = self.rows[j] & low_mask(j);
            while col != 0 {
                let i = col.trailing_zeros() as usize;
                out.push((i, j));
                col &= col - 1;
            }
        }
        out
    }

    pub fn lex_bits(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(pair_count(self.order));
        for j in 1..self.order {
            for i in 0..j {
                out.push(self.has_edge(i, j));
            }
        }
        out
    }

    /// The `n(n-1)/2`-character lex string, read column by column.
    pub fn lex_string(&self) -> String {
        self.lex_bits()
            .into_iter()
            .map(|b| if b { '1' } else { '0' })
            .collect()
    }

    /// Lexicographic comparison of lex strings; graphs must share an order.
    pub fn lex_cmp(&self, other: &Graph) -> Ordering {
        debug_assert_eq!(self.order, other.order);
        for j in 1..self.order {
            let a = self.rows[j] & low_mask(j);
            let b = other.rows[j] & low_mask(j);
            match column_cmp(a, b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    /// `h` with edge `{p(i), p(j)}` iff `self` has edge `{i, j}`.
    pub fn permute(&self, p: &Permutation) -> Result<Graph, GraphError> {
        if p.len() != self.order {
            return Err(GraphError::SizeMismatch {
                left: self.order,
                right: p.len(),
            });
        }
        let mut h = Graph::empty(self.order)?;
        for (i, j) in self.edges() {
            h.add_edge(p.apply(i), p.apply(j));
        }
        Ok(h)
    }

    /// The top-left `(n-1) x (n-1)` intermediate matrix.
    pub fn parent(&self) -> Result<Graph, GraphError> {
        if self.order < 2 {
            return Err(GraphError::NoParent);
        }
        Ok(self.prefix(self.order - 1))
    }

    /// The top-left `k x k` intermediate matrix.
    pub fn prefix(&self, k: usize) -> Graph {
        assert!(k >= 1 && k <= self.order);
        let m = low_mask(k);
        Graph {
            order: k,
            rows: self.rows[..k].iter().map(|r| r & m).collect(),
        }
    }

    /// Subgraph induced on all vertices except `v`, relabelled in order.
    pub fn delete_vertex(&self, v: usize) -> Result<Graph, GraphError> {
        if self.order < 2 {
            return Err(GraphError::BadOrder(0));
        }
        let keep: Vec<usize> = (0..self.order).filter(|&u| u != v).collect();
        Ok(self.induced(&keep))
    }

    /// Subgraph induced on `keep`, vertex `keep[t]` becoming `t`.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut h = Graph {
            order: keep.len(),
            rows: vec![0; keep.len()],
        };
        for (a, &u) in keep.iter().enumerate() {
            for (b, &w) in keep.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, w) {
                    h.add_edge(a, b);
                }
            }
        }
        h
    }

    /// True when no 4-cycle (not necessarily induced) exists.
    pub fn is_squarefree(&self) -> bool {
        for u in 0..self.order {
            for w in (u + 1)..self.order {
                if (self.rows[u] & self.rows[w]).count_ones() >= 2 {
                    return false;
                }
            }
        }
        true
    }

    /// True when every vertex lies on a triangle.
    pub fn every_vertex_in_triangle(&self) -> bool {
        (0..self.order).all(|v| {
            let nb = self.rows[v];
            let mut it = nb;
            while it != 0 {
                let u = it.trailing_zeros() as usize;
                if self.rows[u] & nb != 0 {
                    return true;
                }
                it &= it - 1;
            }
            false
        })
    }

    pub fn to_graph6(&self) -> String {
        graph6::encode(self)
    }

    pub fn from_graph6(text: &str) -> Result<Graph, GraphError> {
        graph6::decode(text)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph({} {:?})", self.order, self.edges())
    }
}

/// Orders two column masks (bit `a` = entry in row `a`) as lex strings read
/// top to bottom.
#[inline]
pub(crate) fn column_cmp(a: u64, b: u64) -> Ordering {
    let d = a ^ b;
    if d == 0 {
        Ordering::Equal
    } else if (a >> d.trailing_zeros()) & 1 == 1 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// A bijection on `{0, .., k-1}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, GraphError> {
        let k = image.len();
        let mut seen = vec![false; k];
        for &v in &image {
            if v >= k || seen[v] {
                return Err(GraphError::BadPermutation(format!("{image:?}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(k: usize) -> Self {
        Permutation {
            image: (0..k).collect(),
        }
    }

    pub fn transposition(k: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(k);
        p.image.swap(a, b);
        p
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Permutation) -> Permutation {
        Permutation {
            image: first.image.iter().map(|&i| self.image[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }
}

/// Text form `k p(1) p(2) ... p(k)`, 1-based.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.image.len())?;
        for v in &self.image {
            write!(f, " {}", v + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::BadPermutation(s.to_string());
        let mut it = s.split_whitespace();
        let k: usize = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let image = it
            .map(|t| {
                t.parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1)
                    .map(|v| v - 1)
                    .ok_or_else(bad)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if image.len() != k {
            return Err(bad());
        }
        Permutation::new(image)
    }
}

/// Ternary edge assignment over the `n(n-1)/2` slots: the solver's view of
/// an intermediate matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PartialGraph {
    order: usize,
    slots: Vec<Option<bool>>,
}

impl PartialGraph {
    pub fn new(order: usize) -> Self {
        PartialGraph {
            order,
            slots: vec![None; pair_count(order)],
        }
    }

    pub fn from_graph(g: &Graph) -> Self {
        PartialGraph {
            order: g.order(),
            slots: g.lex_bits().into_iter().map(Some).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<bool> {
        self.slots[slot_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Option<bool>) {
        self.slots[slot_index(i, j)] = value;
    }

    pub fn slots(&self) -> &[Option<bool>] {
        &self.slots
    }

    pub fn slots_mut(&mut self) -> &mut [Option<bool>] {
        &mut self.slots
    }

    /// All `C(k,2)` slots among vertices `0..k` assigned.
    pub fn is_complete_at(&self, k: usize) -> bool {
        self.slots[..pair_count(k)].iter().all(Option::is_some)
    }

    /// Largest `k` such that the prefix on `0..k` is complete.
    pub fn complete_prefix(&self) -> usize {
        let mut k = 1;
        while k < self.order && self.slots[pair_count(k)..pair_count(k + 1)].iter().all(Option::is_some) {
            k += 1;
        }
        k.min(self.order)
    }

    /// The order-`k` intermediate matrix; requires completeness at `k`.
    pub fn prefix_graph(&self, k: usize) -> Option<Graph> {
        if k == 0 || k > self.order || !self.is_complete_at(k) {
            return None;
        }
        let mut g = Graph::empty(k).ok()?;
        for (slot, v) in self.slots[..pair_count(k)].iter().enumerate() {
            if *v == Some(true) {
                let (i, j) = slot_pair(slot);
                g.add_edge(i, j);
            }
        }
        Some(g)
    }

    /// Graph formed by the positively assigned slots.
    pub fn present_graph(&self) -> Graph {
        let mut g = Graph::empty(self.order.max(1)).expect("order in range");
        for (slot, v) in self.slots.iter().enumerate() {
            if *v == Some(true) {
                let (i, j) = slot_pair(slot);
                g.add_edge(i, j);
            }
        }
        g
    }
}
