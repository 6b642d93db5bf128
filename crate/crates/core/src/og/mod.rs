//! Propagator that keeps the search to canonical matrices and rejects models
//! containing a known minimal unembeddable graph.

mod library;

pub use library::{LibraryError, UnembeddableLibrary, BUNDLED_LIBRARY, DEFAULT_MAX_LIBRARY_ORDER};

use crate::cnf::VarMap;
use crate::graph::{check_canonical, find_subgraph_injection, BudgetedCanonicity, CanonStats, Graph, PartialGraph};
use crate::sat::{Blocking, Justification, Propagator};

#[derive(Debug, Clone)]
pub struct OgConfig {
    /// Search-node budget for canonicity of proper prefixes; the full order
    /// is always decided exactly.
    pub canon_budget: Option<u64>,
    /// Also test library members against each completed prefix.
    pub prefix_subgraphs: bool,
}

impl Default for OgConfig {
    fn default() -> Self {
        OgConfig {
            canon_budget: Some(100_000),
            prefix_subgraphs: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OgStats {
    pub canon_checks: u64,
    pub canon_nodes: u64,
    pub canon_unknown: u64,
    pub noncanonical: u64,
    pub subgraph_blocks: u64,
}

pub struct OgPropagator<'a> {
    map: VarMap,
    lib: &'a UnembeddableLibrary,
    config: OgConfig,
    pub stats: OgStats,
}

impl<'a> OgPropagator<'a> {
    pub fn new(map: &VarMap, lib: &'a UnembeddableLibrary, config: OgConfig) -> Self {
        OgPropagator {
            map: map.clone(),
            lib,
            config,
            stats: OgStats::default(),
        }
    }

    /// Library injection into `g`, as a blocking clause over the image edges.
    fn library_block(&mut self, g: &Graph) -> Option<Blocking> {
        for id in self.lib.search_order() {
            let h = self.lib.graph(id);
            if h.order() > g.order() || h.edge_count() > g.edge_count() {
                continue;
            }
            if let Some(pi) = find_subgraph_injection(h, g) {
                self.stats.subgraph_blocks += 1;
                let clause = h.edges().iter().map(|&(a, b)| -self.map.edge_var(pi[a], pi[b])).collect();
                return Some(Blocking {
                    clause,
                    why: Justification::Subgraph {
                        id,
                        graph6: self.lib.graph6(id).to_string(),
                        injection: pi,
                    },
                });
            }
        }
        None
    }
}

impl Propagator for OgPropagator<'_> {
    fn on_prefix(&mut self, pg: &PartialGraph, k: usize) -> Option<Blocking> {
        let g = pg.prefix_graph(k)?;
        let budget = if k == self.map.order() {
            u64::MAX
        } else {
            self.config.canon_budget.unwrap_or(u64::MAX)
        };
        let mut cs = CanonStats::default();
        self.stats.canon_checks += 1;
        let verdict = check_canonical(&g, budget, &mut cs);
        self.stats.canon_nodes += cs.nodes;
        match verdict {
            BudgetedCanonicity::Noncanonical(p) => {
                self.stats.noncanonical += 1;
                let clause = self.map.prefix_blocking_clause(pg, k)?;
                Some(Blocking {
                    clause,
                    why: Justification::Noncanonical(p),
                })
            }
            BudgetedCanonicity::Unknown => {
                self.stats.canon_unknown += 1;
                None
            }
            BudgetedCanonicity::Canonical => {
                if self.config.prefix_subgraphs {
                    self.library_block(&g)
                } else {
                    None
                }
            }
        }
    }

    fn on_model(&mut self, g: &Graph) -> Option<Blocking> {
        self.library_block(g)
    }
}
