//! Polynomial constraint systems for one vector assignment, and their
//! SMT-LIB2 text.

use std::fmt::Write as _;

use super::assign::{CrossPair, VectorAssignment};
use super::EmbedError;
use crate::graph::Graph;

/// Vertex pinned to a coordinate axis. With `unit`, the vector equals the
/// axis vector; otherwise it is a positive multiple of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchor {
    pub vertex: usize,
    pub axis: usize,
    pub unit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub order: usize,
    pub cross: Vec<CrossPair>,
    pub dots: Vec<(usize, usize)>,
    pub anchors: Vec<Anchor>,
}

/// How noncollinearity is stated to the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separation {
    /// `|V_i × V_j|^2 >= eps`, eps an SMT-LIB real literal such as `(/ 1 100000000)`.
    Margin(String),
    /// `|V_i × V_j|^2 > 0`.
    Strict,
}

pub fn build_constraints(g: &Graph, a: &VectorAssignment) -> Result<ConstraintSystem, EmbedError> {
    let edges = g.edges();
    if edges.is_empty() {
        return Err(EmbedError::NoEdges);
    }
    if !a.is_valid(g) {
        return Err(EmbedError::InvalidAssignment(a.to_string()));
    }
    let covered = a.covered_edges();
    let dots: Vec<(usize, usize)> = edges.iter().copied().filter(|e| covered.binary_search(e).is_err()).collect();
    let is_free = |v: usize| a.definition(v).is_none();
    // lowest edge in lex-string order; a defined endpoint keeps its length
    let (p, q) = edges[0];
    let anchors = vec![
        Anchor {
            vertex: p,
            axis: 0,
            unit: is_free(p),
        },
        Anchor {
            vertex: q,
            axis: 1,
            unit: is_free(q),
        },
    ];
    Ok(ConstraintSystem {
        order: g.order(),
        cross: a.pairs.clone(),
        dots,
        anchors,
    })
}

const AXES: [char; 3] = ['x', 'y', 'z'];

fn var(v: usize, c: usize) -> String {
    format!("{}{}", AXES[c], v)
}

/// Components of `V_i × V_j` as SMT terms.
fn cross_terms(i: usize, j: usize) -> [String; 3] {
    let t = |a: usize, b: usize| format!("(- (* {} {}) (* {} {}))", var(i, a), var(j, b), var(i, b), var(j, a));
    [t(1, 2), t(2, 0), t(0, 1)]
}

impl ConstraintSystem {
    pub fn edge_total(&self) -> usize {
        2 * self.cross.len() + self.dots.len()
    }

    pub fn to_smtlib(&self, sep: &Separation) -> String {
        let mut s = String::new();
        s.push_str("(set-logic QF_NRA)\n");
        for v in 0..self.order {
            for c in 0..3 {
                writeln!(s, "(declare-const {} Real)", var(v, c)).unwrap();
            }
        }
        for a in &self.anchors {
            for c in 0..3 {
                if c != a.axis {
                    writeln!(s, "(assert (= {} 0))", var(a.vertex, c)).unwrap();
                } else if a.unit {
                    writeln!(s, "(assert (= {} 1))", var(a.vertex, c)).unwrap();
                } else {
                    writeln!(s, "(assert (> {} 0))", var(a.vertex, c)).unwrap();
                }
            }
        }
        for p in &self.cross {
            let terms = cross_terms(p.a, p.b);
            for (c, t) in terms.iter().enumerate() {
                writeln!(s, "(assert (= {} {}))", var(p.fixed, c), t).unwrap();
            }
        }
        for &(i, j) in &self.dots {
            writeln!(
                s,
                "(assert (= (+ (* {} {}) (* {} {}) (* {} {})) 0))",
                var(i, 0),
                var(j, 0),
                var(i, 1),
                var(j, 1),
                var(i, 2),
                var(j, 2)
            )
            .unwrap();
        }
        for j in 1..self.order {
            for i in 0..j {
                let [a, b, c] = cross_terms(i, j);
                let norm = format!("(+ (* {a} {a}) (* {b} {b}) (* {c} {c}))");
                match sep {
                    Separation::Margin(eps) => writeln!(s, "(assert (>= {norm} {eps}))").unwrap(),
                    Separation::Strict => writeln!(s, "(assert (> {norm} 0))").unwrap(),
                }
            }
        }
        s.push_str("(check-sat)\n(get-model)\n");
        s
    }
}
