use super::{CnfError, CnfFormula, VarMap};

/// Calls `f` on every `k`-subset of `0..n` in colex order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        f(&c);
        // colex successor: bump the first position that can move
        let mut i = 0;
        loop {
            if i == k {
                return;
            }
            let limit = if i + 1 < k { c[i + 1] } else { n };
            if c[i] + 1 < limit {
                c[i] += 1;
                for (t, slot) in c.iter_mut().enumerate().take(i) {
                    *slot = t;
                }
                break;
            }
            i += 1;
        }
    }
}

/// `t ↔ e_ij ∧ e_ik ∧ e_jk` for every triple.
pub fn encode_triangle_defs(map: &VarMap) -> CnfFormula {
    let mut f = CnfFormula::new(map.var_count());
    if map.order() < 3 {
        return f;
    }
    for_each_subset(map.order(), 3, |s| {
        let (i, j, k) = (s[0], s[1], s[2]);
        let t = map.triangle_var(i, j, k);
        let (a, b, c) = (map.edge_var(i, j), map.edge_var(i, k), map.edge_var(j, k));
        f.push(vec![-t, a]);
        f.push(vec![-t, b]);
        f.push(vec![-t, c]);
        f.push(vec![-a, -b, -c, t]);
    });
    f
}

/// Three clauses per 4-subset forbidding each of its 4-cycles.
pub fn encode_squarefree(map: &VarMap) -> CnfFormula {
    let mut f = CnfFormula::new(map.var_count());
    if map.order() < 4 {
        return f;
    }
    let e = |a: usize, b: usize| map.edge_var(a, b);
    for_each_subset(map.order(), 4, |s| {
        let (i, j, k, l) = (s[0], s[1], s[2], s[3]);
        f.push(vec![-e(i, j), -e(j, k), -e(k, l), -e(l, i)]);
        f.push(vec![-e(i, j), -e(j, l), -e(l, k), -e(k, i)]);
        f.push(vec![-e(i, l), -e(l, j), -e(j, k), -e(k, i)]);
    });
    f
}

/// Every vertex has at least `d` neighbours: each `(n-d)`-subset of the
/// other vertices contains a neighbour.
pub fn encode_min_degree(map: &VarMap, d: usize) -> Result<CnfFormula, CnfError> {
    let n = map.order();
    if d == 0 || d >= n {
        return Err(CnfError::Options(format!("minimum degree {d} needs 1 <= d < n = {n}")));
    }
    let mut f = CnfFormula::new(map.var_count());
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&v| v != i).collect();
        for_each_subset(n - 1, n - d, |s| {
            f.push(s.iter().map(|&t| map.edge_var(i, others[t])).collect());
        });
    }
    Ok(f)
}

/// One clause per vertex: some triangle through it.
pub fn encode_triangle_membership(map: &VarMap) -> CnfFormula {
    let n = map.order();
    let mut f = CnfFormula::new(map.var_count());
    if n < 3 {
        return f;
    }
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&v| v != i).collect();
        let mut clause = Vec::new();
        for_each_subset(n - 1, 2, |s| {
            clause.push(map.triangle_var(i, others[s[0]], others[s[1]]));
        });
        f.push(clause);
    }
    f
}

/// One clause per 0/1 coloring forbidding it from being a 010-coloring.
/// With `truncate`, only colorings with fewer than `ceil(n/2)` ones are kept.
pub fn encode_noncolorability(map: &VarMap, truncate: bool) -> CnfFormula {
    let n = map.order();
    let mut f = CnfFormula::new(map.var_count());
    let limit = n.div_ceil(2);
    for ones in 0u64..(1u64 << n) {
        if truncate && ones.count_ones() as usize >= limit {
            continue;
        }
        let mut clause = Vec::new();
        for j in 1..n {
            for i in 0..j {
                if (ones >> i) & 1 == 1 && (ones >> j) & 1 == 1 {
                    clause.push(map.edge_var(i, j));
                }
            }
        }
        if n >= 3 {
            for_each_subset(n, 3, |s| {
                if s.iter().all(|&v| (ones >> v) & 1 == 0) {
                    clause.push(map.triangle_var(s[0], s[1], s[2]));
                }
            });
        }
        f.push(clause);
    }
    f
}

/// Row `i` without columns `i, j` is lex ≤ row `j` without columns `i, j`,
/// for every pair `i < j`.
pub fn encode_lex_symmetry(map: &VarMap) -> CnfFormula {
    let n = map.order();
    let mut f = CnfFormula::new(map.var_count());
    if n < 3 {
        return f;
    }
    for j in 1..n {
        for i in 0..j {
            let cols: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
            let m = cols.len();
            let x = |t: usize| map.edge_var(i, cols[t]);
            let y = |t: usize| map.edge_var(j, cols[t]);
            let a = |t: usize| map.aux_var(i, j, t);
            for t in 0..m - 1 {
                // a(t) means positions 0..=t are equal
                let mut c1 = vec![-x(t), y(t)];
                let mut c2 = vec![-x(t), a(t)];
                let mut c3 = vec![y(t), a(t)];
                if t > 0 {
                    for c in [&mut c1, &mut c2, &mut c3] {
                        c.push(-a(t - 1));
                    }
                }
                f.push(c1);
                f.push(c2);
                f.push(c3);
            }
            let mut last = vec![-x(m - 1), y(m - 1)];
            if m > 1 {
                last.push(-a(m - 2));
            }
            f.push(last);
        }
    }
    f
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    TriangleDefs,
    Squarefree,
    MinDegree,
    TriangleMembership,
    Noncolorability,
    LexSymmetry,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::TriangleDefs => "triangle-defs",
            Family::Squarefree => "squarefree",
            Family::MinDegree => "min-degree",
            Family::TriangleMembership => "triangle-membership",
            Family::Noncolorability => "noncolorability",
            Family::LexSymmetry => "lex-symmetry",
        }
    }
}

/// Which constraint families to emit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeOptions {
    pub squarefree: bool,
    pub min_degree: Option<usize>,
    pub triangle_membership: bool,
    pub noncolorability: bool,
    pub truncate: bool,
    pub lex_symmetry: bool,
}

impl EncodeOptions {
    /// Full candidate search: squarefree, degree ≥ 3, triangles, noncolorable.
    pub fn ks() -> Self {
        EncodeOptions {
            squarefree: true,
            min_degree: Some(3),
            triangle_membership: true,
            noncolorability: true,
            truncate: true,
            lex_symmetry: true,
        }
    }

    /// Squarefree graphs of minimum degree 2.
    pub fn table3() -> Self {
        EncodeOptions {
            squarefree: true,
            min_degree: Some(2),
            triangle_membership: false,
            noncolorability: false,
            truncate: false,
            lex_symmetry: true,
        }
    }

    /// The full instance without noncolorability, used for splitting.
    pub fn cubing() -> Self {
        EncodeOptions {
            noncolorability: false,
            truncate: false,
            ..Self::ks()
        }
    }

    pub fn uses_triangles(&self) -> bool {
        self.triangle_membership || self.noncolorability
    }
}

/// An encoded instance with its variable map and per-family clause counts.
#[derive(Debug, Clone)]
pub struct Instance {
    pub formula: CnfFormula,
    pub map: VarMap,
    pub families: Vec<(Family, usize)>,
}

impl Instance {
    pub fn family_count(&self, family: Family) -> Option<usize> {
        self.families.iter().find(|(f, _)| *f == family).map(|(_, c)| *c)
    }
}

/// Concatenates the selected families over one variable map.
pub fn assemble(n: usize, opts: &EncodeOptions) -> Result<Instance, CnfError> {
    if opts.truncate && !opts.noncolorability {
        return Err(CnfError::Options("truncation requires the noncolorability family".into()));
    }
    if n < 2 {
        return Err(CnfError::BadOrder(n));
    }
    let map = VarMap::new(n, opts.lex_symmetry)?;
    let mut formula = CnfFormula::new(map.var_count());
    let mut families = Vec::new();
    let mut add = |fam: Family, part: CnfFormula| {
        families.push((fam, part.len()));
        formula.extend(part);
    };
    if opts.uses_triangles() {
        add(Family::TriangleDefs, encode_triangle_defs(&map));
    }
    if opts.squarefree {
        add(Family::Squarefree, encode_squarefree(&map));
    }
    if let Some(d) = opts.min_degree {
        add(Family::MinDegree, encode_min_degree(&map, d)?);
    }
    if opts.triangle_membership {
        add(Family::TriangleMembership, encode_triangle_membership(&map));
    }
    if opts.noncolorability {
        add(Family::Noncolorability, encode_noncolorability(&map, opts.truncate));
    }
    if opts.lex_symmetry {
        add(Family::LexSymmetry, encode_lex_symmetry(&map));
    }
    formula.var_count = map.var_count();
    Ok(Instance {
        formula,
        map,
        families,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Lit;
    use crate::cnf::binomial;

    fn map(n: usize) -> VarMap {
        VarMap::new(n, true).unwrap()
    }

    #[test]
    fn colex_subsets() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]);
        let mut count = 0;
        for_each_subset(10, 4, |_| count += 1);
        assert_eq!(count, 210);
        let mut empty = 0;
        for_each_subset(3, 0, |s| {
            assert!(s.is_empty());
            empty += 1
        });
        assert_eq!(empty, 1);
    }

    #[test]
    fn family_counts() {
        assert_eq!(encode_triangle_defs(&map(3)).len(), 4);
        assert_eq!(encode_triangle_defs(&map(10)).len(), 480);
        assert_eq!(encode_squarefree(&map(6)).len(), 45);
        assert_eq!(encode_squarefree(&map(10)).len(), 630);
        assert_eq!(encode_min_degree(&map(10), 3).unwrap().len(), 360);
        assert_eq!(encode_min_degree(&map(4), 3).unwrap().len(), 12);
        assert_eq!(encode_min_degree(&map(10), 2).unwrap().len(), 90);
        assert!(encode_min_degree(&map(4), 4).is_err());
        assert_eq!(encode_triangle_membership(&map(10)).len(), 10);
        assert_eq!(encode_noncolorability(&map(5), false).len(), 32);
        assert_eq!(encode_lex_symmetry(&map(4)).len(), 24);
    }

    #[test]
    fn triangle_membership_shape() {
        let m = map(3);
        let f = encode_triangle_membership(&m);
        assert_eq!(f.clauses, vec![vec![m.triangle_var(0, 1, 2)]; 3]);
        let f = encode_triangle_membership(&map(7));
        assert!(f.clauses.iter().all(|c| c.len() == binomial(6, 2)));
    }

    #[test]
    fn truncated_noncolorability_small() {
        let m = map(3);
        let f = encode_noncolorability(&m, true);
        assert_eq!(f.len(), 4);
        // V1 = {vertex 0}: no pair inside V1, no triple inside V0
        assert_eq!(f.clauses[1], Vec::<Lit>::new());
        assert_eq!(f.clauses[0], vec![m.triangle_var(0, 1, 2)]);
        let f = encode_noncolorability(&map(6), false);
        assert_eq!(f.clauses[0].len(), binomial(6, 3));
    }

    #[test]
    fn lex_templates_at_position() {
        let m = map(5);
        let f = encode_lex_symmetry(&m);
        // pair (0,1), shared columns 2,3,4
        let (x, y) = (|k| m.edge_var(0, k), |k| m.edge_var(1, k));
        let a = |t| m.aux_var(0, 1, t);
        assert_eq!(f.clauses[0], vec![-x(2), y(2)]);
        assert_eq!(f.clauses[1], vec![-x(2), a(0)]);
        assert_eq!(f.clauses[2], vec![y(2), a(0)]);
        assert_eq!(f.clauses[3], vec![-x(3), y(3), -a(0)]);
        assert_eq!(f.clauses[4], vec![-x(3), a(1), -a(0)]);
        assert_eq!(f.clauses[5], vec![y(3), a(1), -a(0)]);
        assert_eq!(f.clauses[6], vec![-x(4), y(4), -a(1)]);
        assert_eq!(f.len(), 10 * 7);
    }

    #[test]
    fn squarefree_forbids_c4() {
        let m = map(4);
        let f = encode_squarefree(&m);
        let c4 = crate::graph::Graph::cycle(4).unwrap();
        let violated = f
            .clauses
            .iter()
            .filter(|c| !c.iter().any(|&l| {
                let (i, j) = m.edge_of_var(l.abs()).unwrap();
                c4.has_edge(i, j) == (l > 0)
            }))
            .count();
        assert_eq!(violated, 1);
    }

    #[test]
    fn options_and_determinism() {
        let bad = EncodeOptions {
            noncolorability: false,
            truncate: true,
            ..EncodeOptions::ks()
        };
        assert!(assemble(8, &bad).is_err());
        let a = assemble(9, &EncodeOptions::ks()).unwrap();
        let b = assemble(9, &EncodeOptions::ks()).unwrap();
        assert_eq!(a.formula.to_dimacs(), b.formula.to_dimacs());
        let order: Vec<Family> = a.families.iter().map(|f| f.0).collect();
        assert_eq!(
            order,
            vec![
                Family::TriangleDefs,
                Family::Squarefree,
                Family::MinDegree,
                Family::TriangleMembership,
                Family::Noncolorability,
                Family::LexSymmetry
            ]
        );
        let t3 = assemble(9, &EncodeOptions::table3()).unwrap();
        assert_eq!(t3.family_count(Family::TriangleDefs), None);
        assert_eq!(t3.family_count(Family::MinDegree), Some(9 * 8));
        let cube = assemble(9, &EncodeOptions::cubing()).unwrap();
        assert_eq!(cube.family_count(Family::Noncolorability), None);
    }
}
