//! Lex canonicity: a matrix is canonical when no vertex relabelling yields a
//! lex-smaller column-major upper triangle.
//!
//! The search picks, position by position, which original vertex `σ(c)` is
//! relabelled to `c`. Column `c` of the relabelled matrix depends only on
//! `σ(0..=c)`, so a strictly smaller column is a witness and a strictly
//! larger one prunes the branch. Interchangeable vertices (twins) are tried
//! once per node.

use std::cmp::Ordering;

use super::{column_cmp, low_mask, Graph, Permutation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Canonicity {
    Canonical,
    /// `g.permute(&witness)` is strictly lex-smaller than `g`.
    Noncanonical(Permutation),
}

impl Canonicity {
    pub fn is_canonical(&self) -> bool {
        matches!(self, Canonicity::Canonical)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BudgetedCanonicity {
    Canonical,
    Noncanonical(Permutation),
    /// Node budget exhausted before a decision.
    Unknown,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CanonStats {
    pub nodes: u64,
}

pub fn is_canonical(g: &Graph) -> Canonicity {
    match check_canonical(g, u64::MAX, &mut CanonStats::default()) {
        BudgetedCanonicity::Canonical => Canonicity::Canonical,
        BudgetedCanonicity::Noncanonical(p) => Canonicity::Noncanonical(p),
        BudgetedCanonicity::Unknown => unreachable!("unbounded search always decides"),
    }
}

/// Canonicity with a search-node budget.
pub fn check_canonical(g: &Graph, budget: u64, stats: &mut CanonStats) -> BudgetedCanonicity {
    let n = g.order();
    if n <= 1 {
        return BudgetedCanonicity::Canonical;
    }
    let mut s = Search {
        g,
        n,
        sigma: vec![usize::MAX; n],
        used: 0,
        cols: vec![0; n * (n + 1)],
        gcol: (0..n).map(|c| g.row(c) & low_mask(c)).collect(),
        budget,
        nodes: 0,
    };
    let out = s.dfs(0);
    stats.nodes += s.nodes;
    match out {
        Step::Witness => {
            let p = Permutation::new(s.sigma.clone())
                .expect("completed relabelling is a bijection")
                .inverse();
            debug_assert_eq!(g.permute(&p).unwrap().lex_cmp(g), Ordering::Less);
            BudgetedCanonicity::Noncanonical(p)
        }
        Step::Exhausted => BudgetedCanonicity::Canonical,
        Step::OutOfBudget => BudgetedCanonicity::Unknown,
    }
}

enum Step {
    Witness,
    Exhausted,
    OutOfBudget,
}

#[inline]
fn twins(g: &Graph, v: usize, w: usize) -> bool {
    (g.row(v) & !(1u64 << w)) == (g.row(w) & !(1u64 << v))
}

struct Search<'a> {
    g: &'a Graph,
    n: usize,
    sigma: Vec<usize>,
    used: u64,
    /// level-`c` block: for each vertex `v`, bit `a` set iff `g(σ(a), v)`
    cols: Vec<u64>,
    gcol: Vec<u64>,
    budget: u64,
    nodes: u64,
}

impl Search<'_> {
    fn complete_sigma(&mut self, from: usize) {
        let mut free = !self.used & low_mask(self.n);
        for c in from..self.n {
            let v = free.trailing_zeros() as usize;
            self.sigma[c] = v;
            free &= free - 1;
        }
    }

    fn place(&mut self, c: usize, v: usize) {
        let n = self.n;
        let (head, tail) = self.cols.split_at_mut((c + 1) * n);
        let cur = &head[c * n..];
        let next = &mut tail[..n];
        let row = self.g.row(v);
        for w in 0..n {
            next[w] = cur[w] | (((row >> w) & 1) << c);
        }
        self.sigma[c] = v;
        self.used |= 1u64 << v;
    }

    fn dfs(&mut self, c: usize) -> Step {
        let n = self.n;
        if c == n {
            return Step::Exhausted;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Step::OutOfBudget;
        }
        let target = self.gcol[c];
        let base = c * n;
        let free = !self.used & low_mask(n);

        // a strictly smaller column anywhere decides immediately
        let mut it = free;
        while it != 0 {
            let v = it.trailing_zeros() as usize;
            it &= it - 1;
            if column_cmp(self.cols[base + v], target) == Ordering::Less {
                self.sigma[c] = v;
                self.used |= 1u64 << v;
                self.complete_sigma(c + 1);
                return Step::Witness;
            }
        }

        let mut tried: u64 = 0;
        let mut it = free;
        while it != 0 {
            let v = it.trailing_zeros() as usize;
            it &= it - 1;
            if self.cols[base + v] != target {
                continue;
            }
            let mut t = tried;
            let mut skip = false;
            while t != 0 {
                let w = t.trailing_zeros() as usize;
                t &= t - 1;
                if twins(self.g, v, w) {
                    skip = true;
                    break;
                }
            }
            if skip {
                continue;
            }
            tried |= 1u64 << v;
            self.place(c, v);
            match self.dfs(c + 1) {
                Step::Exhausted => {}
                other => return other,
            }
            self.used &= !(1u64 << v);
        }
        Step::Exhausted
    }
}

/// The lex-minimal relabelling of `g` and a permutation producing it
/// (`g.permute(&p) == form`).
pub fn canonical_form(g: &Graph) -> (Graph, Permutation) {
    let n = g.order();
    if n <= 1 {
        return (g.clone(), Permutation::identity(n));
    }
    let mut s = MinSearch {
        g,
        n,
        sigma: vec![0; n],
        used: 0,
        cols: vec![0; n * (n + 1)],
        best: vec![u64::MAX; n],
        best_sigma: Vec::new(),
    };
    s.dfs(0);
    let p = Permutation::new(s.best_sigma).unwrap().inverse();
    let form = g.permute(&p).unwrap();
    (form, p)
}

struct MinSearch<'a> {
    g: &'a Graph,
    n: usize,
    sigma: Vec<usize>,
    used: u64,
    cols: Vec<u64>,
    /// best column found so far at each position; `u64::MAX` means unset
    best: Vec<u64>,
    best_sigma: Vec<usize>,
}

impl MinSearch<'_> {
    fn dfs(&mut self, c: usize) {
        let n = self.n;
        if c == n {
            self.best_sigma = self.sigma.clone();
            return;
        }
        let base = c * n;
        let free = !self.used & low_mask(n);
        let mut cands: Vec<usize> = Vec::new();
        let mut it = free;
        while it != 0 {
            cands.push(it.trailing_zeros() as usize);
            it &= it - 1;
        }
        cands.sort_by(|&a, &b| column_cmp(self.cols[base + a], self.cols[base + b]).then(a.cmp(&b)));
        let mut tried: Vec<usize> = Vec::new();
        for v in cands {
            let col = self.cols[base + v];
            if self.best[c] != u64::MAX {
                match column_cmp(col, self.best[c]) {
                    Ordering::Greater => continue,
                    Ordering::Less => {
                        for b in &mut self.best[c..] {
                            *b = u64::MAX;
                        }
                        self.best[c] = col;
                    }
                    Ordering::Equal => {}
                }
            } else {
                self.best[c] = col;
            }
            if tried.iter().any(|&w| twins(self.g, v, w)) {
                continue;
            }
            tried.push(v);
            {
                let (head, tail) = self.cols.split_at_mut((c + 1) * n);
                let cur = &head[base..];
                let next = &mut tail[..n];
                let row = self.g.row(v);
                for w in 0..n {
                    next[w] = cur[w] | (((row >> w) & 1) << c);
                }
            }
            self.sigma[c] = v;
            self.used |= 1u64 << v;
            self.dfs(c + 1);
            self.used &= !(1u64 << v);
        }
    }
}
