//! Independent checking of search certificates: RUP additions, deletions,
//! trusted lines against their witness records, and candidate logs.

pub mod candidates;
pub mod mutate;
pub mod rup;

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use crate::cnf::{CnfFormula, Lit, VarMap};
use crate::graph::{pair_count, slot_pair, Graph, Permutation};
use crate::og::UnembeddableLibrary;
pub use candidates::{verify_candidates, CandidateCheck, CandidateReport, Conclusion};
pub use mutate::{run_mutation_harness, MutantKind, MutationReport};
use rup::{Deletion, UnitDb};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Cnf(#[from] crate::cnf::CnfError),
    #[error(transparent)]
    Library(#[from] crate::og::LibraryError),
    #[error("{0}")]
    Input(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Add,
    Delete,
    Trusted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub kind: LineKind,
    pub lits: Vec<Lit>,
}

/// Parses one proof line; `None` for blank lines and comments.
pub fn parse_proof_line(text: &str, var_count: usize) -> Result<Option<ProofLine>, String> {
    let t = text.trim();
    if t.is_empty() || t.starts_with('c') {
        return Ok(None);
    }
    let (kind, body) = if let Some(rest) = t.strip_prefix("d ") {
        (LineKind::Delete, rest)
    } else if let Some(rest) = t.strip_prefix("t ") {
        (LineKind::Trusted, rest)
    } else {
        (LineKind::Add, t)
    };
    let mut lits = Vec::new();
    let mut closed = false;
    for tok in body.split_ascii_whitespace() {
        if closed {
            return Err("text after the terminating 0".into());
        }
        let l: Lit = tok.parse().map_err(|_| format!("bad literal {tok:?}"))?;
        if l == 0 {
            closed = true;
        } else if l.unsigned_abs() as usize > var_count {
            return Err(format!("literal {l} exceeds the {var_count} declared variables"));
        } else {
            lits.push(l);
        }
    }
    if !closed {
        return Err("missing terminating 0".into());
    }
    Ok(Some(ProofLine { kind, lits }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessPayload {
    Noncanonical(Permutation),
    Subgraph { id: usize, graph6: String, injection: Vec<usize> },
    Candidate { graph6: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessRecord {
    pub seq: u64,
    pub payload: WitnessPayload,
}

pub fn parse_witness(text: &str) -> Result<WitnessRecord, String> {
    let parts: Vec<&str> = text.split_ascii_whitespace().collect();
    if parts.len() < 3 || parts[0] != "s" {
        return Err(format!("malformed witness record {text:?}"));
    }
    let seq: u64 = parts[1].parse().map_err(|_| format!("bad sequence number {:?}", parts[1]))?;
    let num = |s: &str| s.parse::<usize>().map_err(|_| format!("bad number {s:?}"));
    let payload = match parts[2] {
        "perm" => {
            let p: Permutation = parts[3..].join(" ").parse().map_err(|e| format!("bad permutation: {e}"))?;
            WitnessPayload::Noncanonical(p)
        }
        "subgraph" if parts.len() >= 6 => {
            let m = num(parts[5])?;
            if parts.len() != 6 + m {
                return Err("injection length mismatch".into());
            }
            let mut injection = Vec::with_capacity(m);
            for p in &parts[6..] {
                let v = num(p)?;
                if v == 0 {
                    return Err("injection values are 1-based".into());
                }
                injection.push(v - 1);
            }
            WitnessPayload::Subgraph {
                id: num(parts[3])?,
                graph6: parts[4].to_string(),
                injection,
            }
        }
        "candidate" if parts.len() == 4 => WitnessPayload::Candidate {
            graph6: parts[3].to_string(),
        },
        other => return Err(format!("unknown or malformed witness kind {other:?}")),
    };
    Ok(WitnessRecord { seq, payload })
}

/// Everything a proof is checked against.
pub struct ProofContext<'a> {
    pub formula: &'a CnfFormula,
    pub map: &'a VarMap,
    /// Units the proof may assume in addition to the formula.
    pub cube: &'a [Lit],
    pub library: &'a UnembeddableLibrary,
    /// graph6 lines of the candidate log.
    pub candidates: &'a [String],
}

fn sorted_set(lits: &[Lit]) -> Vec<Lit> {
    let mut v = lits.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Checks one trusted clause against its record; returns the rejection reason.
pub fn verify_trusted(clause: &[Lit], record: &WitnessPayload, ctx: &ProofContext) -> Result<(), String> {
    let map = ctx.map;
    let n = map.order();
    let clause = sorted_set(clause);
    match record {
        WitnessPayload::Noncanonical(p) => {
            let k = p.len();
            if k < 2 || k > n {
                return Err(format!("permutation of order {k} for a graph of order {n}"));
            }
            let mut vars: Vec<Lit> = clause.iter().map(|l| l.abs()).collect();
            vars.sort_unstable();
            let expected: Vec<Lit> = (1..=pair_count(k) as Lit).collect();
            if vars != expected {
                return Err(format!("clause does not assign exactly the order-{k} prefix"));
            }
            let mut g = Graph::empty(k).map_err(|e| e.to_string())?;
            for &l in &clause {
                if l < 0 {
                    let (i, j) = slot_pair(l.unsigned_abs() as usize - 1);
                    g.add_edge(i, j);
                }
            }
            let h = g.permute(p).map_err(|e| e.to_string())?;
            if h.lex_cmp(&g) != std::cmp::Ordering::Less {
                return Err("permutation does not produce a lex-smaller matrix".into());
            }
            Ok(())
        }
        WitnessPayload::Subgraph { id, graph6, injection } => {
            if *id >= ctx.library.len() {
                return Err(format!("library has no member {id}"));
            }
            if ctx.library.graph6(*id) != graph6 {
                return Err(format!("member {id} is {:?}, record cites {graph6:?}", ctx.library.graph6(*id)));
            }
            let h = ctx.library.graph(*id);
            if injection.len() != h.order() {
                return Err("injection length differs from the member order".into());
            }
            let mut seen = 0u64;
            for &v in injection {
                if v >= n || seen >> v & 1 == 1 {
                    return Err("injection is not an injective map into the vertices".into());
                }
                seen |= 1 << v;
            }
            let mut image: Vec<Lit> = h
                .edges()
                .iter()
                .map(|&(a, b)| -map.edge_var(injection[a], injection[b]))
                .collect();
            image.sort_unstable();
            if image != clause {
                return Err("clause differs from the blocked image of the member".into());
            }
            Ok(())
        }
        WitnessPayload::Candidate { graph6 } => {
            let g = Graph::from_graph6(graph6).map_err(|e| format!("bad candidate graph6: {e}"))?;
            if g.order() != n {
                return Err(format!("candidate of order {} in an order-{n} proof", g.order()));
            }
            if sorted_set(&map.blocking_clause(&g)) != clause {
                return Err("clause is not the full blocking clause of the candidate".into());
            }
            if !ctx.candidates.iter().any(|c| c == graph6) {
                return Err(format!("candidate {graph6} is missing from the candidate log"));
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProofSummary {
    pub lines: u64,
    pub additions: u64,
    pub deletions: u64,
    pub trusted: u64,
    pub ignored_deletions: u64,
    pub empty_clause: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based proof line, or 0 for whole-file conditions.
    pub line: u64,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofVerdict {
    pub summary: ProofSummary,
    pub rejection: Option<Rejection>,
}

impl ProofVerdict {
    pub fn accepted(&self) -> bool {
        self.rejection.is_none()
    }
}

fn next_record(witness: &mut impl BufRead, buf: &mut String) -> io::Result<Option<String>> {
    loop {
        buf.clear();
        if witness.read_line(buf)? == 0 {
            return Ok(None);
        }
        let t = buf.trim();
        if !t.is_empty() && !t.starts_with('c') {
            return Ok(Some(t.to_string()));
        }
    }
}

/// Checks a proof line by line; the verdict names the first failing line.
pub fn verify_proof(ctx: &ProofContext, mut proof: impl BufRead, mut witness: impl BufRead) -> io::Result<ProofVerdict> {
    let var_count = ctx.formula.var_count.max(ctx.map.var_count());
    let mut db = UnitDb::new(var_count);
    for c in &ctx.formula.clauses {
        db.add(c);
    }
    for &l in ctx.cube {
        if l == 0 || l.unsigned_abs() as usize > var_count {
            return Ok(ProofVerdict {
                summary: ProofSummary::default(),
                rejection: Some(Rejection {
                    line: 0,
                    reason: format!("cube literal {l} out of range"),
                }),
            });
        }
        db.add(&[l]);
    }
    let mut s = ProofSummary::default();
    let mut cited: HashMap<String, u64> = HashMap::new();
    let mut line = String::new();
    let mut wbuf = String::new();
    let mut lineno = 0u64;
    let reject = |s: ProofSummary, line: u64, reason: String| ProofVerdict {
        summary: s,
        rejection: Some(Rejection { line, reason }),
    };
    loop {
        line.clear();
        if proof.read_line(&mut line)? == 0 {
            break;
        }
        lineno += 1;
        let parsed = match parse_proof_line(&line, var_count) {
            Ok(Some(p)) => p,
            Ok(None) => continue,
            Err(e) => return Ok(reject(s, lineno, e)),
        };
        if s.empty_clause {
            return Ok(reject(s, lineno, "line after the empty clause".into()));
        }
        s.lines += 1;
        match parsed.kind {
            LineKind::Add => {
                if !db.check_rup(&parsed.lits) {
                    return Ok(reject(s, lineno, "clause is not implied by unit propagation".into()));
                }
                s.additions += 1;
                db.add(&parsed.lits);
            }
            LineKind::Delete => {
                match db.delete(&parsed.lits) {
                    Deletion::Missing => return Ok(reject(s, lineno, "deleted clause is not in the database".into())),
                    Deletion::KeptReason => s.ignored_deletions += 1,
                    Deletion::Removed => {}
                }
                s.deletions += 1;
            }
            LineKind::Trusted => {
                s.trusted += 1;
                let Some(text) = next_record(&mut witness, &mut wbuf)? else {
                    let why = format!("no witness record {}", s.trusted);
                    return Ok(reject(s, lineno, why));
                };
                let rec = match parse_witness(&text) {
                    Ok(r) => r,
                    Err(e) => return Ok(reject(s, lineno, e)),
                };
                if rec.seq != s.trusted {
                    let why = format!("witness record {} where {} was expected", rec.seq, s.trusted);
                    return Ok(reject(s, lineno, why));
                }
                if let Err(e) = verify_trusted(&parsed.lits, &rec.payload, ctx) {
                    return Ok(reject(s, lineno, format!("trusted clause {}: {e}", rec.seq)));
                }
                if let WitnessPayload::Candidate { graph6 } = &rec.payload {
                    if let Some(prev) = cited.insert(graph6.clone(), rec.seq) {
                        return Ok(reject(s, lineno, format!("candidate {graph6} already blocked by record {prev}")));
                    }
                }
                db.add(&parsed.lits);
            }
        }
        if parsed.lits.is_empty() && parsed.kind != LineKind::Delete {
            s.empty_clause = true;
        }
    }
    s.ignored_deletions = db.ignored_deletions;
    if next_record(&mut witness, &mut wbuf)?.is_some() {
        return Ok(reject(s, 0, "witness file has records without trusted lines".into()));
    }
    if !s.empty_clause {
        return Ok(reject(
            s,
            lineno + 1,
            "proof ends before the empty clause; search not certified exhaustive".into(),
        ));
    }
    for c in ctx.candidates {
        if !cited.contains_key(c) {
            return Ok(reject(s, 0, format!("logged candidate {c} has no blocking record")));
        }
    }
    Ok(ProofVerdict { summary: s, rejection: None })
}

/// Writes a plain DRAT pair: the formula with the cube units and every
/// trusted clause as axioms, and the proof without trusted lines.
pub fn export_drat(
    formula: &CnfFormula,
    cube: &[Lit],
    mut proof: impl BufRead,
    cnf_out: &mut impl Write,
    drat_out: &mut impl Write,
) -> Result<(), VerifyError> {
    let mut axioms = formula.clone();
    for &l in cube {
        axioms.push(vec![l]);
    }
    let mut line = String::new();
    let mut n = 0;
    loop {
        line.clear();
        if proof.read_line(&mut line)? == 0 {
            break;
        }
        n += 1;
        match parse_proof_line(&line, formula.var_count).map_err(|e| VerifyError::Input(format!("line {n}: {e}")))? {
            Some(ProofLine {
                kind: LineKind::Trusted,
                lits,
            }) => axioms.push(lits),
            Some(_) => drat_out.write_all(line.as_bytes())?,
            None => {}
        }
    }
    axioms.write_dimacs(cnf_out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{assemble, EncodeOptions};
    use crate::og::{OgConfig, OgPropagator};
    use crate::sat::{solve_all, ProofSink, SolverConfig};

    fn ctx<'a>(
        formula: &'a CnfFormula,
        map: &'a VarMap,
        lib: &'a UnembeddableLibrary,
        cands: &'a [String],
    ) -> ProofContext<'a> {
        ProofContext {
            formula,
            map,
            cube: &[],
            library: lib,
            candidates: cands,
        }
    }

    #[test]
    fn trusted_noncanonical_examples() {
        let map = VarMap::new(3, false).unwrap();
        let f = CnfFormula::new(map.var_count());
        let lib = UnembeddableLibrary::empty();
        let c = ctx(&f, &map, &lib, &[]);
        // order-3 matrix with the single edge {1,2}; swapping 2 and 3 is smaller
        let swap = Permutation::new(vec![0, 2, 1]).unwrap();
        assert!(verify_trusted(&[-1, 2, 3], &WitnessPayload::Noncanonical(swap.clone()), &c).is_ok());
        let id = Permutation::identity(3);
        assert!(verify_trusted(&[-1, 2, 3], &WitnessPayload::Noncanonical(id), &c).is_err());
        assert!(verify_trusted(&[-1, 2], &WitnessPayload::Noncanonical(swap), &c).is_err());
        let cand = WitnessPayload::Candidate {
            graph6: Graph::complete(3).unwrap().to_graph6(),
        };
        assert!(verify_trusted(&[-1, -2, -3], &cand, &c).unwrap_err().contains("missing"));
    }

    #[test]
    fn subgraph_records() {
        let map = VarMap::new(5, false).unwrap();
        let f = CnfFormula::new(map.var_count());
        let lib = UnembeddableLibrary::from_graphs(vec![Graph::cycle(4).unwrap()]).unwrap();
        let c = ctx(&f, &map, &lib, &[]);
        let inj = vec![4, 0, 2, 1];
        let clause: Vec<Lit> = [(4, 0), (0, 2), (2, 1), (1, 4)].iter().map(|&(a, b)| -map.edge_var(a, b)).collect();
        let rec = WitnessPayload::Subgraph {
            id: 0,
            graph6: lib.graph6(0).to_string(),
            injection: inj.clone(),
        };
        assert!(verify_trusted(&clause, &rec, &c).is_ok());
        let wrong_text = WitnessPayload::Subgraph {
            id: 0,
            graph6: "Cr".into(),
            injection: inj.clone(),
        };
        assert!(verify_trusted(&clause, &wrong_text, &c).is_err());
        let not_injective = WitnessPayload::Subgraph {
            id: 0,
            graph6: lib.graph6(0).to_string(),
            injection: vec![4, 0, 2, 0],
        };
        assert!(verify_trusted(&clause, &not_injective, &c).is_err());
        assert!(verify_trusted(&clause[1..], &rec, &c).is_err());
    }

    #[test]
    fn witness_grammar() {
        assert_eq!(
            parse_witness("s 3 perm 3 2 1 3").unwrap().payload,
            WitnessPayload::Noncanonical(Permutation::new(vec![1, 0, 2]).unwrap())
        );
        assert!(parse_witness("s 3 subgraph 0 Cr 4 1 2 3").is_err());
        assert!(parse_witness("s x perm 1 1").is_err());
        assert!(parse_witness("s 1 candidate").is_err());
        assert!(parse_proof_line("1 2", 5).is_err());
        assert!(parse_proof_line("1 9 0", 5).is_err());
        assert_eq!(parse_proof_line("d 1 -2 0", 5).unwrap().unwrap().kind, LineKind::Delete);
    }

    fn run(n: usize, opts: &EncodeOptions) -> (CnfFormula, VarMap, String, String, Vec<String>) {
        let inst = assemble(n, opts).unwrap();
        let lib = UnembeddableLibrary::empty();
        let mut og = OgPropagator::new(&inst.map, &lib, OgConfig::default());
        let mut sink = ProofSink::memory();
        let out = solve_all(&inst.formula, &inst.map, &[], &mut og, &mut sink, &SolverConfig::default()).unwrap();
        assert!(out.exhausted());
        let (p, w) = sink.take_memory();
        let cands = out.candidates.iter().map(|g| g.to_graph6()).collect();
        (inst.formula, inst.map, p, w, cands)
    }

    #[test]
    fn solver_proofs_verify() {
        let lib = UnembeddableLibrary::empty();
        for (n, opts) in [(7, EncodeOptions::table3()), (9, EncodeOptions::ks())] {
            let (f, map, p, w, cands) = run(n, &opts);
            let c = ctx(&f, &map, &lib, &cands);
            let v = verify_proof(&c, p.as_bytes(), w.as_bytes()).unwrap();
            assert!(v.accepted(), "n={n}: {:?}", v.rejection);
            assert!(v.summary.empty_clause);
            // truncation before the empty clause
            let cut = &p[..p.trim_end().rfind('\n').map_or(0, |i| i + 1)];
            let v = verify_proof(&c, cut.as_bytes(), w.as_bytes()).unwrap();
            assert!(!v.accepted());
        }
        let (f, map, p, w, mut cands) = run(6, &EncodeOptions::table3());
        assert!(!cands.is_empty());
        let last = cands.pop().unwrap();
        let c = ctx(&f, &map, &lib, &cands);
        let v = verify_proof(&c, p.as_bytes(), w.as_bytes()).unwrap();
        assert!(v.rejection.unwrap().reason.contains(&last));
    }

    #[test]
    fn drat_export_strips_trusted_lines() {
        let (f, _, p, _, _) = run(6, &EncodeOptions::table3());
        let mut cnf = Vec::new();
        let mut drat = Vec::new();
        export_drat(&f, &[], p.as_bytes(), &mut cnf, &mut drat).unwrap();
        let drat = String::from_utf8(drat).unwrap();
        let trusted = p.lines().filter(|l| l.starts_with("t ")).count();
        assert!(trusted > 0 && !drat.contains("t "));
        let axioms = CnfFormula::read_dimacs(cnf.as_slice()).unwrap();
        assert_eq!(axioms.clauses.len(), f.clauses.len() + trusted);
    }
}
