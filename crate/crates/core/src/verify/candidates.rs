//! Independent re-check of a candidate log and the resulting bound.

use std::fmt;

use crate::embed::{check_embeddable, EmbedConfig, EmbedStatus};
use crate::graph::{is_010_colorable, is_canonical, Graph};

#[derive(Debug, Clone)]
pub struct CandidateCheck {
    pub graph6: String,
    /// Encoded properties the candidate fails; empty when valid.
    pub failures: Vec<String>,
    pub embed: Option<EmbedStatus>,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conclusion {
    /// Every candidate is valid and unembeddable.
    NoKsGraph { order: usize },
    /// A valid candidate is embeddable.
    KsGraph { graph6: String },
    /// Some embeddability verdict is inconclusive.
    Unresolved,
    /// Some candidate violates the encoded properties.
    Rejected,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::NoKsGraph { order } => write!(f, "no KS graph of order {order}"),
            Conclusion::KsGraph { graph6 } => write!(f, "KS graph found: {graph6}"),
            Conclusion::Unresolved => f.write_str("unresolved: inconclusive embeddability"),
            Conclusion::Rejected => f.write_str("rejected: invalid candidate in log"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CandidateReport {
    pub checks: Vec<CandidateCheck>,
    pub conclusion: Conclusion,
}

/// Re-checks each graph6 line: squarefree, minimum degree, triangle
/// membership, 010-noncolorability, canonicity and order; then decides
/// embeddability of the valid ones.
pub fn verify_candidates(order: usize, min_degree: usize, log: &[String], embed: &EmbedConfig) -> CandidateReport {
    let mut checks = Vec::new();
    for text in log {
        let mut c = CandidateCheck {
            graph6: text.clone(),
            failures: Vec::new(),
            embed: None,
            evidence: String::new(),
        };
        let g = match Graph::from_graph6(text) {
            Ok(g) => g,
            Err(e) => {
                c.failures.push(format!("unreadable graph6: {e}"));
                checks.push(c);
                continue;
            }
        };
        if g.order() != order {
            c.failures.push(format!("order {} instead of {order}", g.order()));
        }
        if !g.is_squarefree() {
            c.failures.push("contains a 4-cycle".into());
        }
        if g.min_degree() < min_degree {
            c.failures.push(format!("minimum degree {} below {min_degree}", g.min_degree()));
        }
        if !g.every_vertex_in_triangle() {
            c.failures.push("a vertex lies on no triangle".into());
        }
        if is_010_colorable(&g).is_colorable() {
            c.failures.push("010-colorable".into());
        }
        if !is_canonical(&g).is_canonical() {
            c.failures.push("not canonical".into());
        }
        if c.failures.is_empty() {
            match check_embeddable(&g, embed) {
                Ok(v) => {
                    c.embed = Some(v.status);
                    c.evidence = v.evidence;
                }
                Err(e) => {
                    c.embed = Some(EmbedStatus::Inconclusive);
                    c.evidence = e.to_string();
                }
            }
        }
        checks.push(c);
    }
    let conclusion = if checks.iter().any(|c| !c.failures.is_empty()) {
        Conclusion::Rejected
    } else if let Some(c) = checks.iter().find(|c| c.embed == Some(EmbedStatus::Embeddable)) {
        Conclusion::KsGraph {
            graph6: c.graph6.clone(),
        }
    } else if checks.iter().any(|c| c.embed == Some(EmbedStatus::Inconclusive)) {
        Conclusion::Unresolved
    } else {
        Conclusion::NoKsGraph { order }
    };
    CandidateReport { checks, conclusion }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_log_gives_bound() {
        let r = verify_candidates(10, 3, &[], &EmbedConfig::default());
        assert_eq!(r.conclusion, Conclusion::NoKsGraph { order: 10 });
        assert_eq!(r.conclusion.to_string(), "no KS graph of order 10");
    }

    #[test]
    fn fabricated_candidates_rejected() {
        // the triangular prism has 4-cycles and a 010-coloring
        let prism = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]).unwrap();
        let r = verify_candidates(6, 3, &[prism.to_graph6()], &EmbedConfig::default());
        assert_eq!(r.conclusion, Conclusion::Rejected);
        assert!(r.checks[0].failures.iter().any(|f| f == "010-colorable"));
        let r = verify_candidates(6, 3, &["not graph6 ~~".into()], &EmbedConfig::default());
        assert_eq!(r.conclusion, Conclusion::Rejected);
    }
}
