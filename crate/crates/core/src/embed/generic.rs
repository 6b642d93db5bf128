//! Exact decision for systems in which every edge is enforced by a
//! cross-product fixing. Only noncollinearity is then left to satisfy, and
//! it holds at a generic choice of the free vectors unless some pair of
//! vectors is collinear as a polynomial identity.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assign::VectorAssignment;
use super::system::ConstraintSystem;
use super::{verify_embedding, Vec3};
use crate::graph::Graph;

const PRIME: u64 = (1 << 61) - 1;
const POINTS: usize = 8;
const RANGE: i64 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum Determined {
    /// Vectors at an integer point where every pair is exactly noncollinear.
    Embeddable(Vec<Vec3>),
    /// `V_i × V_j` vanishes identically; `i == j` means `V_i` itself does.
    Collinear(usize, usize),
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn submod(a: u64, b: u64) -> u64 {
    (a + PRIME - b) % PRIME
}

fn cross_mod(a: [u64; 3], b: [u64; 3]) -> [u64; 3] {
    [
        submod(mulmod(a[1], b[2]), mulmod(a[2], b[1])),
        submod(mulmod(a[2], b[0]), mulmod(a[0], b[2])),
        submod(mulmod(a[0], b[1]), mulmod(a[1], b[0])),
    ]
}

/// Pairs whose cross product is zero modulo the prime at this point; an
/// integer vector that is nonzero modulo the prime is nonzero.
fn zero_pairs(vs: &[[u64; 3]]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, v) in vs.iter().enumerate() {
        if *v == [0; 3] {
            out.push((i, i));
        }
    }
    for j in 1..vs.len() {
        for i in 0..j {
            if cross_mod(vs[i], vs[j]) == [0; 3] {
                out.push((i, j));
            }
        }
    }
    out
}

/// Polynomial in the free coordinates with exact integer coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
struct Poly(HashMap<Vec<u8>, i128>);

impl Poly {
    fn var(nvars: usize, k: usize) -> Poly {
        let mut e = vec![0u8; nvars];
        e[k] = 1;
        Poly(HashMap::from([(e, 1)]))
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Poly, cap: usize) -> Option<Poly> {
        let mut out: HashMap<Vec<u8>, i128> = HashMap::new();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &other.0 {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x.checked_add(*y)).collect::<Option<_>>()?;
                let c = ca.checked_mul(*cb)?;
                let slot = out.entry(e).or_insert(0);
                *slot = slot.checked_add(c)?;
            }
            if out.len() > cap {
                return None;
            }
        }
        out.retain(|_, c| *c != 0);
        Some(Poly(out))
    }

    fn sub(&self, other: &Poly) -> Option<Poly> {
        let mut out = self.0.clone();
        for (e, c) in &other.0 {
            let slot = out.entry(e.clone()).or_insert(0);
            *slot = slot.checked_sub(*c)?;
        }
        out.retain(|_, c| *c != 0);
        Some(Poly(out))
    }
}

fn cross_poly(a: &[Poly; 3], b: &[Poly; 3], cap: usize) -> Option<[Poly; 3]> {
    let t = |i: usize, j: usize| a[i].mul(&b[j], cap)?.sub(&a[j].mul(&b[i], cap)?);
    Some([t(1, 2)?, t(2, 0)?, t(0, 1)?])
}

/// Symbolic vectors for every vertex, or `None` past `cap` terms.
fn symbolic(order: usize, a: &VectorAssignment, topo: &[usize], cap: usize) -> Option<Vec<[Poly; 3]>> {
    let free: Vec<usize> = (0..order).filter(|&v| a.definition(v).is_none()).collect();
    let nvars = 3 * free.len();
    let mut vs: Vec<Option<[Poly; 3]>> = vec![None; order];
    for (t, &v) in free.iter().enumerate() {
        vs[v] = Some([0, 1, 2].map(|c| Poly::var(nvars, 3 * t + c)));
    }
    for &v in topo {
        if let Some(p) = a.definition(v) {
            let c = cross_poly(vs[p.a].as_ref()?, vs[p.b].as_ref()?, cap)?;
            vs[v] = Some(c);
        }
    }
    vs.into_iter().collect()
}

/// Looks for a pair of vectors that is collinear as a polynomial identity,
/// which rules out every embedding since each fixed vector is determined up
/// to scale. When no orthogonality equations remain, a generic integer point
/// decides the other way. `None` when neither applies or the symbolic check
/// is too large.
pub fn decide_determined(
    core: &Graph,
    sys: &ConstraintSystem,
    a: &VectorAssignment,
    tol: f64,
    seed: u64,
    cap: usize,
) -> Option<Determined> {
    let n = sys.order;
    let topo = a.topo_order(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suspects: Option<Vec<(usize, usize)>> = None;
    for _ in 0..POINTS {
        let point: Vec<[i64; 3]> = (0..n).map(|_| [0; 3].map(|_: i64| rng.gen_range(-RANGE..=RANGE))).collect();
        let mut exact = vec![[0u64; 3]; n];
        let mut float = vec![Vec3::zeros(); n];
        for &v in &topo {
            match a.definition(v) {
                None => {
                    exact[v] = point[v].map(|x| x.rem_euclid(PRIME as i64) as u64);
                    float[v] = Vec3::new(point[v][0] as f64, point[v][1] as f64, point[v][2] as f64);
                }
                Some(p) => {
                    exact[v] = cross_mod(exact[p.a], exact[p.b]);
                    let c = float[p.a].cross(&float[p.b]);
                    float[v] = if c.norm() > 0.0 { c / c.norm() } else { c };
                }
            }
        }
        let zeros = zero_pairs(&exact);
        if zeros.is_empty() && sys.dots.is_empty() && verify_embedding(core, &float, tol) {
            return Some(Determined::Embeddable(float));
        }
        suspects = Some(match suspects {
            None => zeros,
            Some(s) => s.into_iter().filter(|p| zeros.contains(p)).collect(),
        });
    }
    let suspects = suspects.unwrap_or_default();
    if suspects.is_empty() {
        return None;
    }
    let vs = symbolic(n, a, &topo, cap)?;
    for (i, j) in suspects {
        let vanishes = if i == j {
            vs[i].iter().all(Poly::is_zero)
        } else {
            cross_poly(&vs[i], &vs[j], cap)?.iter().all(Poly::is_zero)
        };
        if vanishes {
            return Some(Determined::Collinear(i, j));
        }
    }
    None
}
