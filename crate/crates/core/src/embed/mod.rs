//! Real 3-space embeddability: adjacency must map to orthogonality and
//! distinct vertices to noncollinear vectors.

pub mod assign;
pub mod generic;
pub mod minimal;
pub mod numeric;
pub mod smt;
pub mod system;

use std::collections::HashMap;
use std::fmt;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use generic::Determined;

pub use assign::{enumerate_vector_assignments, select_assignment, CrossPair, VectorAssignment};
pub use minimal::{enumerate_minimal_unembeddable, MinimalConfig, MinimalReport, OrderRow};
pub use numeric::{NumericConfig, NumericResult};
pub use smt::{SmtAnswer, SmtConfig};
pub use system::{build_constraints, Anchor, ConstraintSystem, Separation};

pub type Vec3 = Vector3<f64>;

/// Term limit for the symbolic identity check.
const GENERIC_TERM_CAP: usize = 1 << 20;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("graph has no edges to anchor")]
    NoEdges,
    #[error("invalid vector assignment {0}")]
    InvalidAssignment(String),
    #[error("complex embeddability is not supported")]
    ComplexUnsupported,
    #[error("inconclusive embeddability for {graph6}: {reason}")]
    Inconclusive { graph6: String, reason: String },
    #[error(transparent)]
    Sat(#[from] crate::sat::SatError),
    #[error(transparent)]
    Cnf(#[from] crate::cnf::CnfError),
}

/// Scalar field of the target sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Field {
    #[default]
    Real,
    Complex,
}

#[derive(Debug, Clone)]
pub struct EmbedConfig {
    pub numeric: NumericConfig,
    /// `None` disables the exact phase; numeric failures are then inconclusive.
    pub smt: Option<SmtConfig>,
    pub verify_tol: f64,
    pub field: Field,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            numeric: NumericConfig::default(),
            smt: Some(SmtConfig::default()),
            verify_tol: 1e-6,
            field: Field::Real,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedStatus {
    Embeddable,
    Unembeddable,
    Inconclusive,
}

impl fmt::Display for EmbedStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbedStatus::Embeddable => "embeddable",
            EmbedStatus::Unembeddable => "unembeddable",
            EmbedStatus::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EmbedVerdict {
    pub status: EmbedStatus,
    /// One unit vector per vertex when embeddable.
    pub embedding: Option<Vec<Vec3>>,
    /// Which phase decided, and how.
    pub evidence: String,
}

impl EmbedVerdict {
    fn embeddable(vectors: Vec<Vec3>, evidence: String) -> Self {
        EmbedVerdict {
            status: EmbedStatus::Embeddable,
            embedding: Some(vectors),
            evidence,
        }
    }

    fn other(status: EmbedStatus, evidence: String) -> Self {
        EmbedVerdict {
            status,
            embedding: None,
            evidence,
        }
    }
}

/// True iff adjacent vectors have |cos| ≤ tol and every pair has |sin| ≥ tol.
pub fn verify_embedding(g: &Graph, vectors: &[Vec3], tol: f64) -> bool {
    let n = g.order();
    if vectors.len() != n || vectors.iter().any(|v| !(v.norm() > 0.0) || !v.iter().all(|c| c.is_finite())) {
        return false;
    }
    for j in 1..n {
        for i in 0..j {
            let d = vectors[i].norm() * vectors[j].norm();
            if vectors[i].cross(&vectors[j]).norm() / d < tol {
                return false;
            }
            if g.has_edge(i, j) && vectors[i].dot(&vectors[j]).abs() / d > tol {
                return false;
            }
        }
    }
    true
}

/// Repeatedly removes vertices of degree at most one. Returns the surviving
/// vertices and the removed ones in removal order.
pub fn strip_low_degree(g: &Graph) -> (Vec<usize>, Vec<usize>) {
    let n = g.order();
    let mut alive: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut removed = Vec::new();
    loop {
        let next = (0..n).find(|&v| alive >> v & 1 == 1 && (g.row(v) & alive).count_ones() <= 1);
        match next {
            Some(v) => {
                alive &= !(1 << v);
                removed.push(v);
            }
            None => break,
        }
    }
    ((0..n).filter(|&v| alive >> v & 1 == 1).collect(), removed)
}

/// Places the stripped vertices, latest removed first, each orthogonal to
/// its remaining neighbour and well separated from everything placed.
fn reinsert(g: &Graph, vectors: &mut [Option<Vec3>], removed: &[usize], seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &v in removed.iter().rev() {
        let nb = (0..g.order()).find(|&w| g.has_edge(v, w) && vectors[w].is_some());
        let placed: Vec<Vec3> = vectors.iter().flatten().copied().collect();
        let mut best: Option<(f64, Vec3)> = None;
        for _ in 0..64 {
            let r = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let c = match nb {
                Some(w) => vectors[w].unwrap().normalize().cross(&r),
                None => r,
            };
            if c.norm() < 1e-3 {
                continue;
            }
            let c = c.normalize();
            let sep = placed.iter().map(|p| p.normalize().cross(&c).norm()).fold(1.0, f64::min);
            if best.map_or(true, |(s, _)| sep > s) {
                best = Some((sep, c));
            }
            if sep > 0.1 {
                break;
            }
        }
        match best {
            Some((_, c)) => vectors[v] = Some(c),
            None => return false,
        }
    }
    true
}

fn decode_model(model: &HashMap<String, f64>, order: usize) -> Vec<Vec3> {
    (0..order)
        .map(|v| {
            let get = |a: char| model.get(&format!("{a}{v}")).copied().unwrap_or(0.0);
            Vec3::new(get('x'), get('y'), get('z'))
        })
        .collect()
}

fn unit_or_zero(v: &Vec3) -> Vec3 {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        *v
    }
}

/// Decides embeddability: numeric search first, then the external solver.
pub fn check_embeddable(g: &Graph, cfg: &EmbedConfig) -> Result<EmbedVerdict, EmbedError> {
    if cfg.field == Field::Complex {
        return Err(EmbedError::ComplexUnsupported);
    }
    let (core_vertices, removed) = strip_low_degree(g);
    let core = g.induced(&core_vertices);
    let mut vectors: Vec<Option<Vec3>> = vec![None; g.order()];
    let finish = |mut vectors: Vec<Option<Vec3>>, evidence: String| -> EmbedVerdict {
        if !reinsert(g, &mut vectors, &removed, cfg.numeric.seed) {
            return EmbedVerdict::other(EmbedStatus::Inconclusive, format!("{evidence}; reinsertion failed"));
        }
        let full: Vec<Vec3> = vectors.into_iter().map(|v| v.unwrap()).collect();
        if verify_embedding(g, &full, cfg.verify_tol) {
            EmbedVerdict::embeddable(full, evidence)
        } else {
            EmbedVerdict::other(EmbedStatus::Inconclusive, format!("{evidence}; embedding failed verification"))
        }
    };
    if core.edge_count() == 0 {
        return Ok(finish(vectors, "degree pruning".into()));
    }
    let a = select_assignment(&core);
    let sys = build_constraints(&core, &a)?;
    let place = |vs: &[Vec3], vectors: &mut Vec<Option<Vec3>>| {
        for (t, &v) in core_vertices.iter().enumerate() {
            vectors[v] = Some(unit_or_zero(&vs[t]));
        }
    };
    if let Some(r) = numeric::numeric_search(&sys, &a, &cfg.numeric) {
        place(&r.vectors, &mut vectors);
        return Ok(finish(
            vectors,
            format!("numeric: start {} after {} iterations, residual {:.1e}", r.start, r.iters, r.residual),
        ));
    }
    match generic::decide_determined(&core, &sys, &a, cfg.verify_tol, cfg.numeric.seed, GENERIC_TERM_CAP) {
        Some(Determined::Collinear(i, j)) => {
            let what = if i == j {
                format!("V{} vanishes", core_vertices[i] + 1)
            } else {
                format!("V{} and V{} are collinear", core_vertices[i] + 1, core_vertices[j] + 1)
            };
            return Ok(EmbedVerdict::other(
                EmbedStatus::Unembeddable,
                format!("exact: {what} identically under assignment {a}"),
            ));
        }
        Some(Determined::Embeddable(vs)) => {
            place(&vs, &mut vectors);
            return Ok(finish(vectors, "exact: generic integer point".into()));
        }
        None => {}
    }
    let Some(smt_cfg) = &cfg.smt else {
        return Ok(EmbedVerdict::other(
            EmbedStatus::Inconclusive,
            "numeric search failed and no SMT solver is configured".into(),
        ));
    };
    let name = format!("embed-{}", sanitize(&g.to_graph6()));
    let margin = Separation::Margin(smt_cfg.epsilon.clone());
    let mut answer = smt::run_smt(&sys.to_smtlib(&margin), &name, smt_cfg);
    let mut phase = "smt margin";
    if answer == SmtAnswer::Unsat {
        answer = smt::run_smt(&sys.to_smtlib(&Separation::Strict), &format!("{name}-strict"), smt_cfg);
        phase = "smt strict";
    }
    match answer {
        SmtAnswer::Unsat => Ok(EmbedVerdict::other(
            EmbedStatus::Unembeddable,
            format!("{phase}: unsat under assignment {a}"),
        )),
        SmtAnswer::Unknown(why) => Ok(EmbedVerdict::other(EmbedStatus::Inconclusive, format!("{phase}: {why}"))),
        SmtAnswer::Sat(model) => {
            let raw = decode_model(&model, core.order());
            let unit: Vec<Vec3> = raw.iter().map(unit_or_zero).collect();
            let vs = if verify_embedding(&core, &unit, cfg.verify_tol) {
                Some(unit)
            } else {
                numeric::polish(&sys, &a, &raw, &cfg.numeric).map(|r| r.vectors)
            };
            match vs {
                Some(vs) => {
                    place(&vs, &mut vectors);
                    Ok(finish(vectors, format!("{phase}: sat model")))
                }
                None => Ok(EmbedVerdict::other(
                    EmbedStatus::Inconclusive,
                    format!("{phase}: sat model failed numeric verification"),
                )),
            }
        }
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

#[cfg(test)]
pub(crate) fn z3_available() -> bool {
    std::process::Command::new("z3").arg("-version").output().is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    fn basis() -> Vec<Vec3> {
        vec![Vec3::x(), Vec3::y(), Vec3::z()]
    }

    #[test]
    fn verify_examples() {
        let k3 = Graph::complete(3).unwrap();
        assert!(verify_embedding(&k3, &basis(), 1e-6));
        let mut bad = basis();
        bad[2] = bad[1];
        assert!(!verify_embedding(&k3, &bad, 1e-6));
        let mut zero = basis();
        zero[0] = Vec3::zeros();
        assert!(!verify_embedding(&k3, &zero, 1e-6));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noisy: Vec<Vec3> = basis()
            .into_iter()
            .map(|v| v + Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 1e-12)
            .collect();
        assert!(verify_embedding(&k3, &noisy, 1e-6));
    }

    #[test]
    fn pruning_order() {
        // triangle with a pendant path 2-3-4
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)]).unwrap();
        let (core, removed) = strip_low_degree(&g);
        assert_eq!(core, vec![0, 1, 2]);
        assert_eq!(removed, vec![4, 3]);
    }

    #[test]
    fn numeric_verdicts_without_solver() {
        let cfg = EmbedConfig {
            smt: None,
            ..EmbedConfig::default()
        };
        let k3 = Graph::complete(3).unwrap();
        let v = check_embeddable(&k3, &cfg).unwrap();
        assert_eq!(v.status, EmbedStatus::Embeddable);
        let tree = Graph::from_edges(6, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert_eq!(check_embeddable(&tree, &cfg).unwrap().status, EmbedStatus::Embeddable);
        // every edge of C4 is fixed by a cross product, so no solver is needed
        let c4 = Graph::cycle(4).unwrap();
        let v = check_embeddable(&c4, &cfg).unwrap();
        assert_eq!(v.status, EmbedStatus::Unembeddable);
        assert!(v.evidence.starts_with("exact"), "{}", v.evidence);
        let k4 = Graph::complete(4).unwrap();
        let v = check_embeddable(&k4, &cfg).unwrap();
        assert_eq!(v.status, EmbedStatus::Inconclusive);
        assert!(v.embedding.is_none());
        let complex = EmbedConfig {
            field: Field::Complex,
            ..cfg
        };
        assert!(matches!(check_embeddable(&k3, &complex), Err(EmbedError::ComplexUnsupported)));
    }

    #[test]
    fn solver_verdicts_and_rotation() {
        if !z3_available() {
            eprintln!("z3 not found; skipping");
            return;
        }
        let cfg = EmbedConfig::default();
        let c4 = Graph::cycle(4).unwrap();
        assert_eq!(check_embeddable(&c4, &cfg).unwrap().status, EmbedStatus::Unembeddable);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g6 in ["Bw", "DqK", "Gs?GOK"] {
            let g = Graph::from_graph6(g6).unwrap();
            let v = check_embeddable(&g, &cfg).unwrap();
            if v.status != EmbedStatus::Embeddable {
                continue;
            }
            let e = v.embedding.unwrap();
            assert!(verify_embedding(&g, &e, 1e-6));
            for _ in 0..10 {
                let axis = Vec3::new(rng.gen(), rng.gen(), rng.gen());
                let rot = Rotation3::new(axis * rng.gen_range(0.0..6.0));
                let turned: Vec<Vec3> = e.iter().map(|v| rot * v).collect();
                assert!(verify_embedding(&g, &turned, 1e-6));
            }
        }
    }

    #[test]
    fn solver_only_embedding_is_decoded() {
        if !z3_available() {
            return;
        }
        let k3 = Graph::complete(3).unwrap();
        let cfg = EmbedConfig {
            numeric: NumericConfig {
                starts: 0,
                ..NumericConfig::default()
            },
            ..EmbedConfig::default()
        };
        let v = check_embeddable(&k3, &cfg).unwrap();
        assert_eq!(v.status, EmbedStatus::Embeddable, "{}", v.evidence);
        assert!(v.evidence.starts_with("smt"));
    }
}
