//! CNF instances for the search: variable numbering, clause families and
//! DIMACS text I/O.
//!
//! Variable layout for order `n` (1-based DIMACS indices):
//! edge variables `1..=C(n,2)` in lex-string order, then triangle variables
//! `{i<j<k}` in colex order, then one block of `n-3` lex auxiliaries per
//! symmetry-breaking row pair `(i<j)` (pairs also in colex order).

mod encode;

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

pub use encode::{
    assemble, encode_lex_symmetry, encode_min_degree, encode_noncolorability, encode_squarefree,
    encode_triangle_defs, encode_triangle_membership, EncodeOptions, Family, Instance,
};

use crate::graph::{pair_count, slot_pair, Graph, PartialGraph, MAX_ORDER};

#[derive(Debug, thiserror::Error)]
pub enum CnfError {
    #[error("order {0} unsupported")]
    BadOrder(usize),
    #[error("invalid options: {0}")]
    Options(String),
    #[error("DIMACS parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Lit = i32;

#[inline]
fn choose(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for t in 0..k {
        r = r * (n - t) as u128 / (t + 1) as u128;
    }
    r as usize
}

pub fn binomial(n: usize, k: usize) -> usize {
    choose(n, k)
}

/// Bijection between graph objects and DIMACS variables for one order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    order: usize,
    with_aux: bool,
}

impl VarMap {
    pub fn new(order: usize, with_aux: bool) -> Result<Self, CnfError> {
        if order == 0 || order > MAX_ORDER {
            return Err(CnfError::BadOrder(order));
        }
        Ok(VarMap { order, with_aux })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edge_count(&self) -> usize {
        pair_count(self.order)
    }

    pub fn triangle_count(&self) -> usize {
        choose(self.order, 3)
    }

    pub fn aux_per_pair(&self) -> usize {
        self.order.saturating_sub(3)
    }

    pub fn aux_count(&self) -> usize {
        if self.with_aux {
            pair_count(self.order) * self.aux_per_pair()
        } else {
            0
        }
    }

    pub fn var_count(&self) -> usize {
        self.edge_count() + self.triangle_count() + self.aux_count()
    }

    /// Edge variable for `{i, j}` (0-based vertices, either order).
    #[inline]
    pub fn edge_var(&self, i: usize, j: usize) -> Lit {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(j < self.order && i != j);
        (j * (j - 1) / 2 + i + 1) as Lit
    }

    /// Triangle variable for distinct `i, j, k` in any order.
    pub fn triangle_var(&self, i: usize, j: usize, k: usize) -> Lit {
        let mut t = [i, j, k];
        t.sort_unstable();
        let rank = choose(t[2], 3) + choose(t[1], 2) + t[0];
        (self.edge_count() + rank + 1) as Lit
    }

    /// The `t`-th auxiliary (0-based) of the row pair `(i < j)`.
    pub fn aux_var(&self, i: usize, j: usize, t: usize) -> Lit {
        debug_assert!(self.with_aux && i < j && t < self.aux_per_pair());
        let pair = j * (j - 1) / 2 + i;
        (self.edge_count() + self.triangle_count() + pair * self.aux_per_pair() + t + 1) as Lit
    }

    pub fn is_edge_var(&self, v: Lit) -> bool {
        v >= 1 && (v as usize) <= self.edge_count()
    }

    pub fn edge_of_var(&self, v: Lit) -> Option<(usize, usize)> {
        if self.is_edge_var(v) {
            Some(slot_pair(v as usize - 1))
        } else {
            None
        }
    }

    /// Decodes the edge variables of a full assignment (`model[v]` for DIMACS `v`).
    pub fn decode_graph(&self, value: impl Fn(Lit) -> bool) -> Graph {
        let mut g = Graph::empty(self.order).expect("order validated");
        for v in 1..=self.edge_count() as Lit {
            if value(v) {
                let (i, j) = slot_pair(v as usize - 1);
                g.add_edge(i, j);
            }
        }
        g
    }

    /// Clause falsified exactly by the edge assignment of `g`.
    pub fn blocking_clause(&self, g: &Graph) -> Vec<Lit> {
        (1..=self.edge_count() as Lit)
            .map(|v| {
                let (i, j) = slot_pair(v as usize - 1);
                if g.has_edge(i, j) {
                    -v
                } else {
                    v
                }
            })
            .collect()
    }

    /// Clause that blocks the order-`k` prefix of `pg` and every extension.
    pub fn prefix_blocking_clause(&self, pg: &PartialGraph, k: usize) -> Option<Vec<Lit>> {
        let mut out = Vec::with_capacity(pair_count(k));
        for slot in 0..pair_count(k) {
            let v = (slot + 1) as Lit;
            match pg.slots()[slot]? {
                true => out.push(-v),
                false => out.push(v),
            }
        }
        Some(out)
    }

    /// Sidecar listing of the variable ranges, one object per line.
    pub fn write_map(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "c order {}", self.order)?;
        let n = self.order;
        for j in 1..n {
            for i in 0..j {
                writeln!(out, "e {} {} -> {}", i + 1, j + 1, self.edge_var(i, j))?;
            }
        }
        for k in 2..n {
            for j in 1..k {
                for i in 0..j {
                    writeln!(out, "t {} {} {} -> {}", i + 1, j + 1, k + 1, self.triangle_var(i, j, k))?;
                }
            }
        }
        if self.with_aux {
            for j in 1..n {
                for i in 0..j {
                    for t in 0..self.aux_per_pair() {
                        writeln!(out, "a {} {} {} -> {}", i + 1, j + 1, t + 1, self.aux_var(i, j, t))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Clause database in DIMACS convention.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    pub var_count: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(var_count: usize) -> Self {
        CnfFormula {
            var_count,
            clauses: Vec::new(),
        }
    }

    pub fn push(&mut self, clause: Vec<Lit>) {
        debug_assert!(clause.iter().all(|l| *l != 0 && l.unsigned_abs() as usize <= self.var_count));
        self.clauses.push(clause);
    }

    pub fn extend(&mut self, other: CnfFormula) {
        self.var_count = self.var_count.max(other.var_count);
        self.clauses.extend(other.clauses);
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Evaluates the formula under `value(var)`.
    pub fn satisfied_by(&self, value: impl Fn(Lit) -> bool) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| value(l.abs()) == (l > 0)))
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = String::new();
        writeln!(s, "p cnf {} {}", self.var_count, self.clauses.len()).unwrap();
        for c in &self.clauses {
            for l in c {
                write!(s, "{l} ").unwrap();
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn write_dimacs(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "p cnf {} {}", self.var_count, self.clauses.len())?;
        let mut line = String::new();
        for c in &self.clauses {
            line.clear();
            for l in c {
                write!(line, "{l} ").unwrap();
            }
            line.push_str("0\n");
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Parses DIMACS CNF. Comment lines start with `c`.
    pub fn read_dimacs(input: impl BufRead) -> Result<Self, CnfError> {
        let mut header: Option<(usize, usize)> = None;
        let mut f = CnfFormula::default();
        let mut cur = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
                continue;
            }
            if t.starts_with('p') {
                let parts: Vec<&str> = t.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(CnfError::Parse {
                        line: idx + 1,
                        reason: "bad header".into(),
                    });
                }
                let parse = |s: &str| {
                    s.parse::<usize>().map_err(|_| CnfError::Parse {
                        line: idx + 1,
                        reason: format!("bad number {s:?}"),
                    })
                };
                header = Some((parse(parts[2])?, parse(parts[3])?));
                f.var_count = header.unwrap().0;
                continue;
            }
            if header.is_none() {
                return Err(CnfError::Parse {
                    line: idx + 1,
                    reason: "clause before header".into(),
                });
            }
            for tok in t.split_whitespace() {
                let l: Lit = tok.parse().map_err(|_| CnfError::Parse {
                    line: idx + 1,
                    reason: format!("bad literal {tok:?}"),
                })?;
                if l == 0 {
                    f.clauses.push(std::mem::take(&mut cur));
                } else {
                    if l.unsigned_abs() as usize > f.var_count {
                        return Err(CnfError::Parse {
                            line: idx + 1,
                            reason: format!("literal {l} exceeds variable count"),
                        });
                    }
                    cur.push(l);
                }
            }
        }
        if !cur.is_empty() {
            f.clauses.push(cur);
        }
        match header {
            Some((_, m)) if m != f.clauses.len() => Err(CnfError::Parse {
                line: 0,
                reason: format!("header declares {m} clauses, found {}", f.clauses.len()),
            }),
            Some(_) => Ok(f),
            None => Err(CnfError::Parse {
                line: 0,
                reason: "missing header".into(),
            }),
        }
    }
}

/// Parses iCNF cube lines `a <lits> 0`; other lines are ignored.
pub fn read_cubes(input: impl BufRead) -> Result<Vec<Vec<Lit>>, CnfError> {
    let mut cubes = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        let Some(rest) = t.strip_prefix("a ").or_else(|| (t == "a").then_some("")) else {
            continue;
        };
        let mut cube = Vec::new();
        let mut closed = false;
        for tok in rest.split_whitespace() {
            let l: Lit = tok.parse().map_err(|_| CnfError::Parse {
                line: idx + 1,
                reason: format!("bad literal {tok:?}"),
            })?;
            if l == 0 {
                closed = true;
                break;
            }
            cube.push(l);
        }
        if !closed {
            return Err(CnfError::Parse {
                line: idx + 1,
                reason: "cube not terminated by 0".into(),
            });
        }
        cubes.push(cube);
    }
    Ok(cubes)
}

pub fn write_cube(out: &mut impl Write, cube: &[Lit]) -> io::Result<()> {
    write!(out, "a")?;
    for l in cube {
        write!(out, " {l}")?;
    }
    writeln!(out, " 0")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varmap_layout() {
        let m = VarMap::new(5, true).unwrap();
        assert_eq!(m.edge_var(0, 1), 1);
        assert_eq!(m.edge_var(0, 2), 2);
        assert_eq!(m.edge_var(2, 1), 3);
        assert_eq!(m.edge_var(3, 4), 10);
        assert_eq!(m.triangle_var(0, 1, 2), 11);
        assert_eq!(m.triangle_var(2, 3, 4), 20);
        assert_eq!(m.aux_var(0, 1, 0), 21);
        assert_eq!(m.var_count(), 10 + 10 + 20);
        let mut seen = std::collections::HashSet::new();
        for k in 2..5 {
            for j in 1..k {
                for i in 0..j {
                    assert!(seen.insert(m.triangle_var(i, j, k)));
                    assert_eq!(m.triangle_var(i, j, k), m.triangle_var(k, i, j));
                }
            }
        }
        assert_eq!(seen.len(), 10);
        assert_eq!(m.edge_of_var(3), Some((1, 2)));
        assert_eq!(m.edge_of_var(11), None);
    }

    #[test]
    fn dimacs_roundtrip() {
        let mut f = CnfFormula::new(3);
        f.push(vec![1, -2]);
        f.push(vec![]);
        f.push(vec![3]);
        let text = f.to_dimacs();
        assert_eq!(text, "p cnf 3 3\n1 -2 0\n0\n3 0\n");
        let g = CnfFormula::read_dimacs(text.as_bytes()).unwrap();
        assert_eq!(f, g);
        assert!(CnfFormula::read_dimacs("p cnf 1 1\n2 0\n".as_bytes()).is_err());
        assert!(CnfFormula::read_dimacs("1 0\n".as_bytes()).is_err());
    }

    #[test]
    fn cube_lines() {
        let cubes = read_cubes("c x\na 1 -2 0\na 0\n".as_bytes()).unwrap();
        assert_eq!(cubes, vec![vec![1, -2], vec![]]);
        assert!(read_cubes("a 1 2\n".as_bytes()).is_err());
    }
}
