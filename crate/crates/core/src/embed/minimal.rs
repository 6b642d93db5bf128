//! Enumeration of minimal unembeddable squarefree graphs, order by order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{check_embeddable, EmbedConfig, EmbedError, EmbedStatus};
use crate::cnf::{assemble, EncodeOptions};
use crate::graph::{find_subgraph_injection, Graph};
use crate::og::{OgConfig, OgPropagator, UnembeddableLibrary};
use crate::sat::{solve_all, ProofSink, SolverConfig};

#[derive(Debug, Clone)]
pub struct MinimalConfig {
    pub min_order: usize,
    pub max_order: usize,
    pub embed: EmbedConfig,
    pub jobs: usize,
}

impl Default for MinimalConfig {
    fn default() -> Self {
        MinimalConfig {
            min_order: 4,
            max_order: 10,
            embed: EmbedConfig::default(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderRow {
    pub order: usize,
    /// Canonical squarefree graphs of minimum degree at least two.
    pub enumerated: usize,
    pub unembeddable: usize,
    pub minimal: Vec<Graph>,
}

#[derive(Debug, Clone)]
pub struct MinimalReport {
    pub rows: Vec<OrderRow>,
    pub library: UnembeddableLibrary,
}

/// All canonical squarefree graphs of order `n` with minimum degree ≥ 2.
pub fn enumerate_table_graphs(n: usize) -> Result<Vec<Graph>, EmbedError> {
    let inst = assemble(n, &EncodeOptions::table3())?;
    let lib = UnembeddableLibrary::empty();
    let mut og = OgPropagator::new(&inst.map, &lib, OgConfig::default());
    let mut sink = ProofSink::discard();
    let out = solve_all(&inst.formula, &inst.map, &[], &mut og, &mut sink, &SolverConfig::default())?;
    Ok(out.candidates)
}

fn contains_member(g: &Graph, members: &[Graph]) -> bool {
    members
        .iter()
        .any(|h| h.order() <= g.order() && h.edge_count() <= g.edge_count() && find_subgraph_injection(h, g).is_some())
}

fn inconclusive(g: &Graph, reason: String) -> EmbedError {
    EmbedError::Inconclusive {
        graph6: g.to_graph6(),
        reason,
    }
}

/// `true` when `g` is unembeddable.
fn unembeddable(g: &Graph, members: &[Graph], cfg: &EmbedConfig) -> Result<bool, EmbedError> {
    if contains_member(g, members) {
        return Ok(true);
    }
    let v = check_embeddable(g, cfg)?;
    match v.status {
        EmbedStatus::Embeddable => Ok(false),
        EmbedStatus::Unembeddable => Ok(true),
        EmbedStatus::Inconclusive => Err(inconclusive(g, v.evidence)),
    }
}

/// Every single-edge and single-vertex deletion is embeddable.
fn is_minimal(g: &Graph, members: &[Graph], cfg: &EmbedConfig) -> Result<bool, EmbedError> {
    for (i, j) in g.edges() {
        let mut h = g.clone();
        h.remove_edge(i, j);
        if unembeddable(&h, members, cfg)? {
            return Ok(false);
        }
    }
    for v in 0..g.order() {
        let h = g.delete_vertex(v).expect("vertex in range");
        if h.edge_count() > 0 && unembeddable(&h, members, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Classifies `graphs` on `jobs` threads: `Some(minimal)` for unembeddable
/// ones, `None` for embeddable ones. Stops at the first inconclusive graph.
fn classify(graphs: &[Graph], members: &[Graph], cfg: &EmbedConfig, jobs: usize) -> Result<Vec<Option<bool>>, EmbedError> {
    let next = AtomicUsize::new(0);
    let results = Mutex::new(vec![None; graphs.len()]);
    let failure: Mutex<Option<(usize, EmbedError)>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                if failure.lock().unwrap().is_some() {
                    return;
                }
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(g) = graphs.get(idx) else { return };
                let r = unembeddable(g, members, cfg).and_then(|u| {
                    if u && !contains_member(g, members) {
                        is_minimal(g, members, cfg).map(Some)
                    } else if u {
                        Ok(Some(false))
                    } else {
                        Ok(None)
                    }
                });
                match r {
                    Ok(v) => results.lock().unwrap()[idx] = v,
                    Err(e) => {
                        let mut f = failure.lock().unwrap();
                        // keep the lowest index so the report is deterministic
                        if f.as_ref().map_or(true, |(i, _)| idx < *i) {
                            *f = Some((idx, e));
                        }
                    }
                }
            });
        }
    });
    if let Some((_, e)) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(results.into_inner().unwrap())
}

/// Builds the library of minimal unembeddable graphs for the configured
/// orders, with one report row per order.
pub fn enumerate_minimal_unembeddable(cfg: &MinimalConfig) -> Result<MinimalReport, EmbedError> {
    let mut members: Vec<Graph> = Vec::new();
    let mut rows = Vec::new();
    let mut declared = Vec::new();
    for n in cfg.min_order..=cfg.max_order {
        let graphs = enumerate_table_graphs(n)?;
        let verdicts = classify(&graphs, &members, &cfg.embed, cfg.jobs)?;
        let mut row = OrderRow {
            order: n,
            enumerated: graphs.len(),
            unembeddable: 0,
            minimal: Vec::new(),
        };
        for (g, v) in graphs.iter().zip(&verdicts) {
            if let Some(min) = v {
                row.unembeddable += 1;
                if *min {
                    row.minimal.push(g.clone());
                }
            }
        }
        log::info!(
            "order {n}: {} graphs, {} unembeddable, {} minimal",
            row.enumerated,
            row.unembeddable,
            row.minimal.len()
        );
        members.extend(row.minimal.iter().cloned());
        declared.push(n);
        rows.push(row);
    }
    let mut library = UnembeddableLibrary::from_graphs(members).expect("graphs are valid");
    for n in declared {
        library.declare_order(n);
    }
    Ok(MinimalReport { rows, library })
}
