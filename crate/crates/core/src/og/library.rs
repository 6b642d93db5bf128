//! Library of minimal unembeddable graphs: graph6 lines under a manifest of
//! `c order <k> count <m>` header lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::graph::{Graph, GraphError};

pub const DEFAULT_MAX_LIBRARY_ORDER: usize = 12;

/// Minimal unembeddable graphs shipped with the crate, in library format.
pub const BUNDLED_LIBRARY: &str = include_str!("../../data/unembeddable.txt");

#[derive(Debug, thiserror::Error)]
pub enum LibraryError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("library line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("library line {line}: member of order {order} exceeds the limit {limit}")]
    OrderTooLarge { line: usize, order: usize, limit: usize },
    #[error("manifest declares {declared} members of order {order}, file has {found}")]
    Manifest { order: usize, declared: usize, found: usize },
    #[error("library line {line}: {source}")]
    Graph { line: usize, source: GraphError },
}

#[derive(Debug, Clone, Default)]
pub struct UnembeddableLibrary {
    graphs: Vec<Graph>,
    texts: Vec<String>,
    manifest: BTreeMap<usize, usize>,
    search: Vec<usize>,
    source: Option<PathBuf>,
}

impl UnembeddableLibrary {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_graphs(graphs: Vec<Graph>) -> Result<Self, LibraryError> {
        let mut lib = Self::empty();
        for g in graphs {
            *lib.manifest.entry(g.order()).or_default() += 1;
            lib.texts.push(g.to_graph6());
            lib.graphs.push(g);
        }
        lib.index();
        Ok(lib)
    }

    /// Records that order `k` was searched, so it appears in the manifest
    /// even with no members.
    pub fn declare_order(&mut self, k: usize) {
        self.manifest.entry(k).or_default();
    }

    fn index(&mut self) {
        let mut ids: Vec<usize> = (0..self.graphs.len()).collect();
        ids.sort_by_key(|&i| (self.graphs[i].order(), self.graphs[i].edge_count(), i));
        self.search = ids;
    }

    pub fn parse(text: &str, max_order: usize) -> Result<Self, LibraryError> {
        let mut lib = Self::empty();
        let mut declared = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix('c') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() == 4 && parts[0] == "order" && parts[2] == "count" {
                    let num = |s: &str| {
                        s.parse::<usize>().map_err(|_| LibraryError::Parse {
                            line,
                            reason: format!("bad number {s:?}"),
                        })
                    };
                    let (k, m) = (num(parts[1])?, num(parts[3])?);
                    if lib.manifest.insert(k, m).is_some() {
                        return Err(LibraryError::Parse {
                            line,
                            reason: format!("order {k} declared twice"),
                        });
                    }
                    declared = true;
                }
                continue;
            }
            let g = Graph::from_graph6(t).map_err(|source| LibraryError::Graph { line, source })?;
            if g.order() > max_order {
                return Err(LibraryError::OrderTooLarge {
                    line,
                    order: g.order(),
                    limit: max_order,
                });
            }
            lib.graphs.push(g);
            lib.texts.push(t.to_string());
        }
        if lib.graphs.is_empty() && !declared {
            log::warn!("library is empty");
        } else if !declared {
            return Err(LibraryError::Parse {
                line: 0,
                reason: "missing `c order <k> count <m>` manifest".into(),
            });
        }
        let found = lib.count_by_order();
        for (&order, &m) in &lib.manifest {
            let f = found.get(&order).copied().unwrap_or(0);
            if f != m {
                return Err(LibraryError::Manifest {
                    order,
                    declared: m,
                    found: f,
                });
            }
        }
        for (&order, &f) in &found {
            if !lib.manifest.contains_key(&order) {
                return Err(LibraryError::Manifest {
                    order,
                    declared: 0,
                    found: f,
                });
            }
        }
        lib.index();
        Ok(lib)
    }

    pub fn load(path: &Path, max_order: usize) -> Result<Self, LibraryError> {
        let text = fs::read_to_string(path)?;
        let mut lib = Self::parse(&text, max_order)?;
        lib.source = Some(path.to_path_buf());
        Ok(lib)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, m) in &self.manifest {
            writeln!(s, "c order {k} count {m}").unwrap();
        }
        for &id in &self.search {
            writeln!(s, "{}", self.texts[id]).unwrap();
        }
        s
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_text())
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graph(&self, id: usize) -> &Graph {
        &self.graphs[id]
    }

    /// The member's graph6 text exactly as stored.
    pub fn graph6(&self, id: usize) -> &str {
        &self.texts[id]
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    /// Member ids, smallest graphs first.
    pub fn search_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.search.iter().copied()
    }

    pub fn count_by_order(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for g in &self.graphs {
            *m.entry(g.order()).or_default() += 1;
        }
        m
    }

    pub fn manifest(&self) -> &BTreeMap<usize, usize> {
        &self.manifest
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }
}
