//! 010-colorability: color 1 never on both ends of an edge, and no triangle
//! entirely colored 0.

use super::Graph;

/// Color per vertex: `false` = 0, `true` = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub color: Vec<bool>,
}

impl Coloring {
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.color.iter().enumerate().filter(|(_, &c)| c).map(|(v, _)| v)
    }

    /// Direct check of both 010 conditions against `g`.
    pub fn is_010_for(&self, g: &Graph) -> bool {
        let n = g.order();
        if self.color.len() != n {
            return false;
        }
        for (i, j) in g.edges() {
            if self.color[i] && self.color[j] {
                return false;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !g.has_edge(i, j) {
                    continue;
                }
                let mut common = g.row(i) & g.row(j) & !((1u64 << (j + 1)) - 1);
                while common != 0 {
                    let k = common.trailing_zeros() as usize;
                    common &= common - 1;
                    if !self.color[i] && !self.color[j] && !self.color[k] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Colorability {
    Colorable(Coloring),
    Noncolorable,
}

impl Colorability {
    pub fn is_colorable(&self) -> bool {
        matches!(self, Colorability::Colorable(_))
    }
}

const UNSET: u8 = 2;

struct ColorSearch<'a> {
    g: &'a Graph,
    /// triangles as vertex triples, and for each vertex the triangles through it
    triangles: Vec<[usize; 3]>,
    through: Vec<Vec<usize>>,
    color: Vec<u8>,
    trail: Vec<usize>,
}

impl ColorSearch<'_> {
    /// Assigns and propagates; returns false on conflict. Assignments stay on
    /// the trail either way.
    fn assign(&mut self, v: usize, c: u8) -> bool {
        let mut queue = vec![(v, c)];
        while let Some((v, c)) = queue.pop() {
            match self.color[v] {
                x if x == c => continue,
                UNSET => {}
                _ => return false,
            }
            self.color[v] = c;
            self.trail.push(v);
            if c == 1 {
                let mut nb = self.g.row(v);
                while nb != 0 {
                    let u = nb.trailing_zeros() as usize;
                    nb &= nb - 1;
                    match self.color[u] {
                        1 => return false,
                        UNSET => queue.push((u, 0)),
                        _ => {}
                    }
                }
            } else {
                for &t in &self.through[v] {
                    let others: Vec<usize> = self.triangles[t].iter().copied().filter(|&u| u != v).collect();
                    let (a, b) = (others[0], others[1]);
                    match (self.color[a], self.color[b]) {
                        (0, 0) => return false,
                        (0, UNSET) => queue.push((b, 1)),
                        (UNSET, 0) => queue.push((a, 1)),
                        _ => {}
                    }
                }
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.color[v] = UNSET;
        }
    }

    fn solve(&mut self) -> bool {
        let n = self.g.order();
        let pick = (0..n)
            .filter(|&v| self.color[v] == UNSET)
            .max_by_key(|&v| (self.through[v].len(), self.g.degree(v), std::cmp::Reverse(v)));
        let Some(v) = pick else {
            return true;
        };
        for c in [1u8, 0u8] {
            let mark = self.trail.len();
            if self.assign(v, c) && self.solve() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}

/// Decides 010-colorability by backtracking over vertices with propagation
/// (a 1 forces 0 on its neighbours; a triangle with two 0s forces a 1).
pub fn is_010_colorable(g: &Graph) -> Colorability {
    let n = g.order();
    let mut triangles = Vec::new();
    let mut through = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if !g.has_edge(i, j) {
                continue;
            }
            let mut common = g.row(i) & g.row(j) & !((1u64 << (j + 1)) - 1);
            while common != 0 {
                let k = common.trailing_zeros() as usize;
                common &= common - 1;
                let t = triangles.len();
                triangles.push([i, j, k]);
                for v in [i, j, k] {
                    through[v].push(t);
                }
            }
        }
    }
    let mut s = ColorSearch {
        g,
        triangles,
        through,
        color: vec![UNSET; n],
        trail: Vec::new(),
    };
    if s.solve() {
        let coloring = Coloring {
            color: s.color.iter().map(|&c| c == 1).collect(),
        };
        debug_assert!(coloring.is_010_for(g));
        Colorability::Colorable(coloring)
    } else {
        Colorability::Noncolorable
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        match is_010_colorable(&Graph::empty(1).unwrap()) {
            Colorability::Colorable(c) => assert!(c.is_010_for(&Graph::empty(1).unwrap())),
            Colorability::Noncolorable => panic!(),
        }
        let k3 = Graph::complete(3).unwrap();
        match is_010_colorable(&k3) {
            Colorability::Colorable(c) => assert_eq!(c.ones().count(), 1),
            Colorability::Noncolorable => panic!(),
        }
        assert_eq!(is_010_colorable(&Graph::complete(4).unwrap()), Colorability::Noncolorable);
    }
}
