//! CDCL search that enumerates every model of a graph encoding.
//!
//! Each accepted model is recorded as a candidate and blocked by a trusted
//! clause over all edge literals, so the search ends with the empty clause.
//! An external [`Propagator`] sees every newly complete vertex prefix and
//! every full model and may answer with a trusted blocking clause.
//! Learned clauses are written as DRAT additions; every clause that is not
//! unit-propagation derivable is written as a `t` line with a witness record.

mod heap;
mod proof;

pub use proof::{Justification, ProofSink};

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::cnf::{CnfFormula, Lit, VarMap};
use crate::graph::{pair_count, Graph, PartialGraph};
use heap::VarHeap;

#[derive(Debug, thiserror::Error)]
pub enum SatError {
    #[error("propagator clause rejected: {0}")]
    MalformedClause(String),
    #[error("cube literal {0} is not an edge literal")]
    BadCube(Lit),
    #[error("formula has {found} variables, the map needs at least {needed}")]
    VarMismatch { needed: usize, found: usize },
}

/// A clause returned by a propagator with the evidence for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocking {
    pub clause: Vec<Lit>,
    pub why: Justification,
}

pub trait Propagator {
    /// Called once the edges among vertices `0..k` are all assigned; slots
    /// of `pg` inside that prefix hold the current values.
    fn on_prefix(&mut self, pg: &PartialGraph, k: usize) -> Option<Blocking>;
    /// Called on a full model before it is accepted as a candidate.
    fn on_model(&mut self, g: &Graph) -> Option<Blocking>;
}

/// Plain model enumeration.
pub struct NoPropagator;

impl Propagator for NoPropagator {
    fn on_prefix(&mut self, _: &PartialGraph, _: usize) -> Option<Blocking> {
        None
    }
    fn on_model(&mut self, _: &Graph) -> Option<Blocking> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_conflicts: Option<u64>,
    pub max_proof_bytes: Option<u64>,
    /// Conflicts per Luby unit.
    pub restart_unit: u64,
    pub reduce_base: usize,
    pub reduce_step: usize,
    pub var_decay: f64,
    /// Checked between conflicts; when set, the search stops.
    pub interrupt: Option<Arc<AtomicBool>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_conflicts: None,
            max_proof_bytes: None,
            restart_unit: 100,
            reduce_base: 2000,
            reduce_step: 300,
            var_decay: 0.95,
            interrupt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbortReason {
    ConflictBudget,
    ProofBudget,
    Interrupted,
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Exhausted,
    Aborted(AbortReason),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub propagator_calls: u64,
    pub prefix_blocks: u64,
    pub model_blocks: u64,
    pub restarts: u64,
    pub learned: u64,
    pub deleted: u64,
    pub proof_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: Status,
    pub candidates: Vec<Graph>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn exhausted(&self) -> bool {
        self.status == Status::Exhausted
    }
}

/// Enumerates all models of `formula ∧ cube` not blocked by `prop`.
///
/// The cube literals behave as extra unit clauses, so the proof certifies
/// `formula ∧ cube`.
pub fn solve_all(
    formula: &CnfFormula,
    map: &VarMap,
    cube: &[Lit],
    prop: &mut dyn Propagator,
    sink: &mut ProofSink,
    config: &SolverConfig,
) -> Result<SolveOutcome, SatError> {
    let mut s = Solver::new(formula, map, config, sink)?;
    for &l in cube {
        if !map.is_edge_var(l.abs()) {
            return Err(SatError::BadCube(l));
        }
        s.add_input(&[l]);
    }
    s.run(prop)
}

const NONE: u32 = u32::MAX;

#[inline]
fn code(l: Lit) -> u32 {
    ((l.unsigned_abs() - 1) << 1) | (l < 0) as u32
}

#[inline]
fn dimacs(c: u32) -> Lit {
    let v = (c >> 1) as Lit + 1;
    if c & 1 == 1 {
        -v
    } else {
        v
    }
}

#[derive(Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: u32,
}

struct Clause {
    lits: Vec<u32>,
    learnt: bool,
    lbd: u32,
    act: f32,
    deleted: bool,
}

enum Flow {
    Continue,
    Done(Status),
}

struct Solver<'a> {
    order: usize,
    map: VarMap,
    clauses: Vec<Clause>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watch>>,
    val: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    is_edge: Vec<bool>,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    to_clear: Vec<u32>,
    stamp: Vec<u64>,
    stamp_ctr: u64,
    /// `(k, level)`: prefix `k` checked while its deepest edge sat at `level`
    checked: Vec<(usize, u32)>,
    pg: PartialGraph,
    root_unsat: bool,
    candidates: Vec<Graph>,
    stats: SolveStats,
    config: SolverConfig,
    proof: &'a mut ProofSink,
}

impl<'a> Solver<'a> {
    fn new(
        formula: &CnfFormula,
        map: &VarMap,
        config: &SolverConfig,
        proof: &'a mut ProofSink,
    ) -> Result<Self, SatError> {
        if formula.var_count < map.edge_count() {
            return Err(SatError::VarMismatch {
                needed: map.edge_count(),
                found: formula.var_count,
            });
        }
        let nvars = formula.var_count;
        let edges = map.edge_count();
        let mut s = Solver {
            order: map.order(),
            map: map.clone(),
            clauses: Vec::with_capacity(formula.len()),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * nvars],
            val: vec![0; 2 * nvars],
            level: vec![0; nvars],
            reason: vec![NONE; nvars],
            trail: Vec::with_capacity(nvars),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; nvars],
            var_inc: 1.0,
            cla_inc: 1.0,
            is_edge: (0..nvars).map(|v| v < edges).collect(),
            heap: VarHeap::new(nvars),
            phase: vec![false; nvars],
            seen: vec![false; nvars],
            to_clear: Vec::new(),
            stamp: vec![0; nvars + 1],
            stamp_ctr: 0,
            checked: Vec::new(),
            pg: PartialGraph::new(map.order()),
            root_unsat: false,
            candidates: Vec::new(),
            stats: SolveStats::default(),
            config: config.clone(),
            proof,
        };
        for v in 0..nvars as u32 {
            s.heap.insert(v, &s.activity, &s.is_edge);
        }
        for c in &formula.clauses {
            s.add_input(c);
        }
        Ok(s)
    }

    #[inline]
    fn value(&self, lit: u32) -> i8 {
        self.val[lit as usize]
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn assign(&mut self, lit: u32, reason: u32) {
        let v = (lit >> 1) as usize;
        self.val[lit as usize] = 1;
        self.val[(lit ^ 1) as usize] = -1;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    /// Adds an input clause at level 0 before search.
    fn add_input(&mut self, clause: &[Lit]) {
        let mut lits: Vec<u32> = clause.iter().map(|&l| code(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return;
        }
        match lits.len() {
            0 => self.root_unsat = true,
            1 => match self.value(lits[0]) {
                1 => {}
                -1 => self.root_unsat = true,
                _ => self.assign(lits[0], NONE),
            },
            _ => {
                self.attach(lits, false, 0);
            }
        }
    }

    fn attach(&mut self, lits: Vec<u32>, learnt: bool, lbd: u32) -> u32 {
        let cref = self.clauses.len() as u32;
        debug_assert!(lits.len() >= 2);
        self.watches[lits[0] as usize].push(Watch {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1] as usize].push(Watch {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause {
            lits,
            learnt,
            lbd,
            act: 0.0,
            deleted: false,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.val[w.blocker as usize] == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                let lits = &mut self.clauses[cref].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if first != w.blocker && self.val[first as usize] == 1 {
                    ws[j] = Watch {
                        cref: w.cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if self.val[lits[k] as usize] != -1 {
                        lits.swap(1, k);
                        self.watches[lits[1] as usize].push(Watch {
                            cref: w.cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watch {
                    cref: w.cref,
                    blocker: first,
                };
                j += 1;
                if self.val[first as usize] == -1 {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.assign(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl as usize];
        for idx in (start..self.trail.len()).rev() {
            let l = self.trail[idx];
            let v = (l >> 1) as usize;
            self.val[l as usize] = 0;
            self.val[(l ^ 1) as usize] = 0;
            self.reason[v] = NONE;
            self.phase[v] = l & 1 == 0;
            self.heap.insert(v as u32, &self.activity, &self.is_edge);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = self.trail.len();
        while matches!(self.checked.last(), Some(&(_, l)) if l > lvl) {
            self.checked.pop();
        }
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v as u32, &self.activity, &self.is_edge);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.act += self.cla_inc as f32;
        if c.act > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].act *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn abstract_level(&self, v: usize) -> u32 {
        1 << (self.level[v] & 31)
    }

    /// First-UIP learning with recursive minimisation. Returns the clause
    /// (asserting literal first, then the literal of the backjump level).
    fn analyze(&mut self, mut confl: u32) -> (Vec<u32>, u32) {
        let dl = self.decision_level();
        let mut learnt = vec![0u32];
        let mut path = 0usize;
        let mut p: Option<u32> = None;
        let mut idx = self.trail.len();
        loop {
            self.bump_clause(confl);
            let start = usize::from(p.is_some());
            let len = self.clauses[confl as usize].lits.len();
            for k in start..len {
                let q = self.clauses[confl as usize].lits[k];
                let v = (q >> 1) as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] == dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[(self.trail[idx] >> 1) as usize] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[(pl >> 1) as usize] = false;
            path -= 1;
            if path == 0 {
                learnt[0] = pl ^ 1;
                break;
            }
            confl = self.reason[(pl >> 1) as usize];
            debug_assert_ne!(confl, NONE);
        }

        // minimisation
        self.to_clear.clear();
        self.to_clear.extend_from_slice(&learnt[1..]);
        let levels = learnt[1..]
            .iter()
            .fold(0u32, |acc, &l| acc | self.abstract_level((l >> 1) as usize));
        let mut out = vec![learnt[0]];
        for &l in &learnt[1..] {
            let v = (l >> 1) as usize;
            if self.reason[v] == NONE || !self.redundant(l, levels) {
                out.push(l);
            }
        }
        for &l in &self.to_clear {
            self.seen[(l >> 1) as usize] = false;
        }
        self.to_clear.clear();

        let bt = if out.len() == 1 {
            0
        } else {
            let mut best = 1;
            for k in 2..out.len() {
                if self.level[(out[k] >> 1) as usize] > self.level[(out[best] >> 1) as usize] {
                    best = k;
                }
            }
            out.swap(1, best);
            self.level[(out[1] >> 1) as usize]
        };
        (out, bt)
    }

    fn redundant(&mut self, p: u32, levels: u32) -> bool {
        let mut stack = vec![p];
        let top = self.to_clear.len();
        while let Some(q) = stack.pop() {
            let cref = self.reason[(q >> 1) as usize] as usize;
            let len = self.clauses[cref].lits.len();
            for k in 1..len {
                let l = self.clauses[cref].lits[k];
                let v = (l >> 1) as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    if self.reason[v] != NONE && self.abstract_level(v) & levels != 0 {
                        self.seen[v] = true;
                        stack.push(l);
                        self.to_clear.push(l);
                    } else {
                        for &x in &self.to_clear[top..] {
                            self.seen[(x >> 1) as usize] = false;
                        }
                        self.to_clear.truncate(top);
                        return false;
                    }
                }
            }
        }
        true
    }

    fn lbd(&mut self, lits: &[u32]) -> u32 {
        self.stamp_ctr += 1;
        let mut n = 0;
        for &l in lits {
            let lv = self.level[(l >> 1) as usize] as usize;
            if self.stamp[lv] != self.stamp_ctr {
                self.stamp[lv] = self.stamp_ctr;
                n += 1;
            }
        }
        n
    }

    fn io_abort(e: std::io::Error) -> Flow {
        Flow::Done(Status::Aborted(AbortReason::Io(e.to_string())))
    }

    fn finish_unsat(&mut self) -> Flow {
        match self.proof.add([]) {
            Ok(()) => Flow::Done(Status::Exhausted),
            Err(e) => Self::io_abort(e),
        }
    }

    /// Learns from a conflict at the current level and backjumps.
    fn resolve_conflict(&mut self, confl: u32) -> Flow {
        self.stats.conflicts += 1;
        if self.decision_level() == 0 {
            return self.finish_unsat();
        }
        let (learnt, bt) = self.analyze(confl);
        self.stats.learned += 1;
        if let Err(e) = self.proof.add(learnt.iter().map(|&l| dimacs(l))) {
            return Self::io_abort(e);
        }
        self.cancel_until(bt);
        if learnt.len() == 1 {
            self.assign(learnt[0], NONE);
        } else {
            let lbd = self.lbd(&learnt);
            let asserting = learnt[0];
            let cref = self.attach(learnt, true, lbd);
            self.assign(asserting, cref);
        }
        self.var_inc /= self.config.var_decay;
        self.cla_inc /= 0.999;
        Flow::Continue
    }

    /// Installs a trusted clause falsified by the current assignment.
    fn add_trusted(&mut self, b: Blocking) -> Result<Flow, SatError> {
        let mut lits = Vec::with_capacity(b.clause.len());
        for &l in &b.clause {
            if l == 0 || l.unsigned_abs() as usize > self.level.len() {
                return Err(SatError::MalformedClause(format!("literal {l} out of range")));
            }
            let c = code(l);
            if self.value(c) != -1 {
                return Err(SatError::MalformedClause(format!(
                    "literal {l} is not falsified by the current assignment"
                )));
            }
            lits.push(c);
        }
        lits.sort_unstable();
        lits.dedup();
        if let Err(e) = self.proof.trusted(lits.iter().map(|&l| dimacs(l)), &b.why) {
            return Ok(Self::io_abort(e));
        }
        if lits.is_empty() {
            return Ok(Flow::Done(Status::Exhausted));
        }
        lits.sort_by_key(|&l| std::cmp::Reverse(self.level[(l >> 1) as usize]));
        let top = self.level[(lits[0] >> 1) as usize];
        if top == 0 {
            self.stats.conflicts += 1;
            return Ok(self.finish_unsat());
        }
        if lits.len() == 1 {
            self.cancel_until(0);
            self.assign(lits[0], NONE);
            return Ok(Flow::Continue);
        }
        let second = self.level[(lits[1] >> 1) as usize];
        if second < top {
            self.cancel_until(second);
            let asserting = lits[0];
            let cref = self.attach(lits, false, 0);
            self.assign(asserting, cref);
            Ok(Flow::Continue)
        } else {
            self.cancel_until(top);
            let cref = self.attach(lits, false, 0);
            Ok(self.resolve_conflict(cref))
        }
    }

    fn edge_value(&self, slot: usize) -> Option<bool> {
        match self.val[slot << 1] {
            1 => Some(true),
            -1 => Some(false),
            _ => None,
        }
    }

    /// Runs the prefix hook for every newly complete prefix, stopping at the
    /// first block.
    fn check_prefixes(&mut self, prop: &mut dyn Propagator) -> Option<Blocking> {
        let (done, mut lvl) = self.checked.last().copied().unwrap_or((1, 0));
        let mut k = done;
        while k < self.order {
            let (lo, hi) = (pair_count(k), pair_count(k + 1));
            if (lo..hi).any(|s| self.edge_value(s).is_none()) {
                break;
            }
            k += 1;
        }
        if k == done {
            return None;
        }
        for s in 0..pair_count(k) {
            self.pg.slots_mut()[s] = self.edge_value(s);
        }
        for kk in done + 1..=k {
            for s in pair_count(kk - 1)..pair_count(kk) {
                lvl = lvl.max(self.level[s]);
            }
            self.stats.propagator_calls += 1;
            if let Some(b) = prop.on_prefix(&self.pg, kk) {
                self.stats.prefix_blocks += 1;
                return Some(b);
            }
            self.checked.push((kk, lvl));
        }
        None
    }

    fn model_graph(&self) -> Graph {
        self.map.decode_graph(|v| self.val[code(v) as usize] == 1)
    }

    fn on_full_model(&mut self, prop: &mut dyn Propagator) -> Blocking {
        let g = self.model_graph();
        self.stats.propagator_calls += 1;
        if let Some(b) = prop.on_model(&g) {
            self.stats.model_blocks += 1;
            return b;
        }
        let b = Blocking {
            clause: self.map.blocking_clause(&g),
            why: Justification::Candidate { graph6: g.to_graph6() },
        };
        self.candidates.push(g);
        b
    }

    fn pick_branch(&mut self) -> Option<u32> {
        while let Some(v) = self.heap.pop(&self.activity, &self.is_edge) {
            if self.val[(v << 1) as usize] == 0 {
                return Some(if self.phase[v as usize] { v << 1 } else { (v << 1) | 1 });
            }
        }
        None
    }

    fn reduce_db(&mut self) -> Result<(), std::io::Error> {
        let mut cands: Vec<u32> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| {
                let cl = &self.clauses[c as usize];
                let l0 = cl.lits[0];
                let locked = self.val[l0 as usize] == 1 && self.reason[(l0 >> 1) as usize] == c;
                cl.lbd > 2 && !locked
            })
            .collect();
        cands.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            cb.lbd.cmp(&ca.lbd).then(ca.act.total_cmp(&cb.act)).then(a.cmp(&b))
        });
        let drop = self.learnts.len() / 2;
        let mut any = false;
        for &c in cands.iter().take(drop) {
            let lits = std::mem::take(&mut self.clauses[c as usize].lits);
            self.proof.delete(lits.iter().map(|&l| dimacs(l)))?;
            self.clauses[c as usize].deleted = true;
            self.stats.deleted += 1;
            any = true;
        }
        if any {
            let clauses = &self.clauses;
            for ws in &mut self.watches {
                ws.retain(|w| !clauses[w.cref as usize].deleted);
            }
            self.learnts.retain(|&c| !clauses[c as usize].deleted);
        }
        Ok(())
    }

    fn budget_hit(&self) -> Option<AbortReason> {
        if let Some(m) = self.config.max_conflicts {
            if self.stats.conflicts >= m {
                return Some(AbortReason::ConflictBudget);
            }
        }
        if let Some(m) = self.config.max_proof_bytes {
            if self.proof.bytes() > m {
                return Some(AbortReason::ProofBudget);
            }
        }
        if self.config.interrupt.as_ref().map_or(false, |f| f.load(Ordering::Relaxed)) {
            return Some(AbortReason::Interrupted);
        }
        None
    }

    fn run(mut self, prop: &mut dyn Propagator) -> Result<SolveOutcome, SatError> {
        let status = if self.root_unsat {
            match self.finish_unsat() {
                Flow::Done(s) => s,
                Flow::Continue => unreachable!(),
            }
        } else {
            self.search(prop)?
        };
        let status = match (status, self.proof.flush()) {
            (Status::Exhausted, Err(e)) => Status::Aborted(AbortReason::Io(e.to_string())),
            (s, _) => s,
        };
        self.stats.proof_bytes = self.proof.bytes();
        Ok(SolveOutcome {
            status,
            candidates: self.candidates,
            stats: self.stats,
        })
    }

    fn search(&mut self, prop: &mut dyn Propagator) -> Result<Status, SatError> {
        let mut restart_idx = 0u64;
        let mut since_restart = 0u64;
        let mut restart_limit = luby(2.0, 0) as u64 * self.config.restart_unit;
        let mut reductions = 0usize;
        loop {
            if let Some(confl) = self.propagate() {
                if let Flow::Done(s) = self.resolve_conflict(confl) {
                    return Ok(s);
                }
                since_restart += 1;
                if let Some(r) = self.budget_hit() {
                    return Ok(Status::Aborted(r));
                }
                if since_restart >= restart_limit {
                    self.stats.restarts += 1;
                    restart_idx += 1;
                    since_restart = 0;
                    restart_limit = (luby(2.0, restart_idx) as u64) * self.config.restart_unit;
                    self.cancel_until(0);
                }
                if self.learnts.len() >= self.config.reduce_base + reductions * self.config.reduce_step {
                    reductions += 1;
                    if let Err(e) = self.reduce_db() {
                        return Ok(Status::Aborted(AbortReason::Io(e.to_string())));
                    }
                }
                continue;
            }
            if let Some(b) = self.check_prefixes(prop) {
                if let Flow::Done(s) = self.add_trusted(b)? {
                    return Ok(s);
                }
                if let Some(r) = self.budget_hit() {
                    return Ok(Status::Aborted(r));
                }
                continue;
            }
            match self.pick_branch() {
                Some(lit) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.assign(lit, NONE);
                }
                None => {
                    let b = self.on_full_model(prop);
                    if let Flow::Done(s) = self.add_trusted(b)? {
                        return Ok(s);
                    }
                    if let Some(r) = self.budget_hit() {
                        return Ok(Status::Aborted(r));
                    }
                }
            }
        }
    }
}

/// Luby sequence value `y^k` for restart index `x`.
fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{assemble, EncodeOptions};

    fn run(f: &CnfFormula, map: &VarMap, cube: &[Lit]) -> (SolveOutcome, String, String) {
        let mut sink = ProofSink::memory();
        let out = solve_all(f, map, cube, &mut NoPropagator, &mut sink, &SolverConfig::default()).unwrap();
        let (p, w) = sink.take_memory();
        (out, p, w)
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(|i| luby(2.0, i) as u64).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn forced_single_edge() {
        let map = VarMap::new(2, false).unwrap();
        let mut f = CnfFormula::new(map.var_count());
        f.push(vec![1]);
        let (out, proof, wit) = run(&f, &map, &[]);
        assert!(out.exhausted());
        assert_eq!(out.candidates, vec![Graph::complete(2).unwrap()]);
        assert_eq!(proof, "t -1 0\n0\n");
        assert_eq!(wit, format!("s 1 candidate {}\n", Graph::complete(2).unwrap().to_graph6()));
    }

    #[test]
    fn empty_clause_is_immediate() {
        let map = VarMap::new(3, false).unwrap();
        let mut f = CnfFormula::new(map.var_count());
        f.push(vec![1, 2]);
        f.push(vec![]);
        let (out, proof, _) = run(&f, &map, &[]);
        assert!(out.exhausted() && out.candidates.is_empty());
        assert_eq!(proof, "0\n");
    }

    #[test]
    fn enumerates_all_graphs_without_constraints() {
        let map = VarMap::new(4, false).unwrap();
        let f = CnfFormula::new(map.var_count());
        let (out, _, _) = run(&f, &map, &[]);
        assert_eq!(out.candidates.len(), 64);
        let (out, _, _) = run(&f, &map, &[1, -2]);
        assert_eq!(out.candidates.len(), 16);
        assert!(out.candidates.iter().all(|g| g.has_edge(0, 1) && !g.has_edge(0, 2)));
    }

    #[test]
    fn squarefree_degree_two_models_are_valid() {
        let inst = assemble(6, &EncodeOptions::table3()).unwrap();
        let (out, _, _) = run(&inst.formula, &inst.map, &[]);
        assert!(out.exhausted());
        assert!(!out.candidates.is_empty());
        for g in &out.candidates {
            assert!(g.is_squarefree() && g.min_degree() >= 2);
        }
    }

    #[test]
    fn budgets_abort() {
        let inst = assemble(7, &EncodeOptions::table3()).unwrap();
        let mut sink = ProofSink::discard();
        let cfg = SolverConfig {
            max_proof_bytes: Some(1),
            ..SolverConfig::default()
        };
        let out = solve_all(&inst.formula, &inst.map, &[], &mut NoPropagator, &mut sink, &cfg).unwrap();
        assert_eq!(out.status, Status::Aborted(AbortReason::ProofBudget));
    }

    struct Bad;
    impl Propagator for Bad {
        fn on_prefix(&mut self, _: &PartialGraph, _: usize) -> Option<Blocking> {
            None
        }
        fn on_model(&mut self, _: &Graph) -> Option<Blocking> {
            Some(Blocking {
                clause: vec![99],
                why: Justification::Candidate { graph6: String::new() },
            })
        }
    }

    #[test]
    fn malformed_propagator_clause_is_an_error() {
        let map = VarMap::new(2, false).unwrap();
        let f = CnfFormula::new(map.var_count());
        let mut sink = ProofSink::discard();
        let r = solve_all(&f, &map, &[], &mut Bad, &mut sink, &SolverConfig::default());
        assert!(matches!(r, Err(SatError::MalformedClause(_))));
    }
}
