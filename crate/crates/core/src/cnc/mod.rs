//! Cube-and-conquer: lookahead splitting of the reduced instance, parallel
//! conquering with one proof per cube, and resplitting of cubes whose proof
//! outgrows the budget.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc, Mutex};

use crate::cnf::{write_cube, CnfFormula, Instance, Lit, VarMap};
use crate::graph::{canonical_form, Graph};
use crate::og::{OgConfig, OgPropagator, UnembeddableLibrary};
use crate::sat::{solve_all, AbortReason, ProofSink, SolveStats, SolverConfig, Status};
use crate::verify::rup::UnitDb;

#[derive(Debug, thiserror::Error)]
pub enum CncError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Sat(#[from] crate::sat::SatError),
    #[error("cutoff must be at least 1")]
    Cutoff,
    #[error("cube literal {0} is not an edge literal")]
    BadCube(Lit),
    #[error("worker failed twice on cube {0}")]
    WorkerCrash(String),
    #[error("cube {id} aborted: {reason}")]
    Aborted { id: String, reason: String },
}

/// A node of the splitting tree; its literals are the path from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cube {
    pub id: String,
    pub lits: Vec<Lit>,
    pub parent: Option<String>,
    /// Literal added to the parent's path, 0 for roots.
    pub split: Lit,
}

impl Cube {
    pub fn root(id: &str, lits: Vec<Lit>) -> Self {
        Cube {
            id: id.to_string(),
            lits,
            parent: None,
            split: 0,
        }
    }

    fn child(&self, lit: Lit) -> Cube {
        let mut lits = self.lits.clone();
        lits.push(lit);
        Cube {
            id: format!("{}{}", self.id, if lit > 0 { '1' } else { '0' }),
            lits,
            parent: Some(self.id.clone()),
            split: lit,
        }
    }
}

fn check_cube(map: &VarMap, lits: &[Lit]) -> Result<(), CncError> {
    for (i, &l) in lits.iter().enumerate() {
        if l == 0 || !map.is_edge_var(l.abs()) {
            return Err(CncError::BadCube(l));
        }
        if lits[..i].contains(&-l) {
            return Err(CncError::BadCube(l));
        }
    }
    Ok(())
}

/// The edge variable with the largest product of propagation counts under
/// both polarities, preferring variables where neither polarity fails.
fn pick_split(db: &mut UnitDb, map: &VarMap, cube: &[Lit]) -> Option<Lit> {
    let base = db.implied(cube)?;
    let mut assigned = vec![false; db.var_count() + 1];
    for l in &base {
        assigned[l.unsigned_abs() as usize] = true;
    }
    let mut best: Option<(bool, u64, Lit)> = None;
    let mut probe = cube.to_vec();
    for v in 1..=map.edge_count() as Lit {
        if assigned[v as usize] {
            continue;
        }
        let mut count = |l: Lit| {
            probe.push(l);
            let r = db.implied(&probe).map(|t| (t.len() - base.len()) as u64);
            probe.pop();
            r
        };
        let (t, f) = (count(v), count(-v));
        let clean = t.is_some() && f.is_some();
        let score = t.unwrap_or(0) * f.unwrap_or(0);
        if best.map_or(true, |(bc, bs, _)| (clean, score) > (bc, bs)) {
            best = Some((clean, score, v));
        }
    }
    best.map(|b| b.2)
}

/// Grows a splitting tree below `root` until it has `target` leaves or no
/// leaf can be split. Returns the new nodes, parents before children.
pub fn split_cube(reduced: &CnfFormula, map: &VarMap, root: &Cube, target: usize) -> Result<Vec<Cube>, CncError> {
    if target < 1 {
        return Err(CncError::Cutoff);
    }
    check_cube(map, &root.lits)?;
    let mut db = UnitDb::new(reduced.var_count.max(map.var_count()));
    for c in &reduced.clauses {
        db.add(c);
    }
    let mut open = VecDeque::from([root.clone()]);
    let mut leaves = 1;
    let mut nodes = Vec::new();
    while leaves < target {
        let Some(leaf) = open.pop_front() else { break };
        let Some(v) = pick_split(&mut db, map, &leaf.lits) else {
            continue;
        };
        let (pos, neg) = (leaf.child(v), leaf.child(-v));
        nodes.push(pos.clone());
        nodes.push(neg.clone());
        open.push_back(pos);
        open.push_back(neg);
        leaves += 1;
    }
    Ok(nodes)
}

/// Leaf cubes of a fresh tree over the reduced instance, in id order.
pub fn generate_cubes(reduced: &CnfFormula, map: &VarMap, cutoff: usize) -> Result<Vec<Cube>, CncError> {
    let root = Cube::root("r", Vec::new());
    let nodes = split_cube(reduced, map, &root, cutoff)?;
    Ok(leaves_of(&root, &nodes))
}

fn leaves_of(root: &Cube, nodes: &[Cube]) -> Vec<Cube> {
    if nodes.is_empty() {
        return vec![root.clone()];
    }
    let parents: std::collections::HashSet<&str> = nodes.iter().filter_map(|c| c.parent.as_deref()).collect();
    let mut leaves: Vec<Cube> = nodes.iter().filter(|c| !parents.contains(c.id.as_str())).cloned().collect();
    leaves.sort_by(|a, b| a.id.cmp(&b.id));
    leaves
}

/// Checks that every total assignment extends some cube; returns an
/// uncovered partial assignment otherwise.
pub fn check_coverage(cubes: &[Vec<Lit>]) -> Result<(), Vec<Lit>> {
    fn value(asg: &[Lit], l: Lit) -> Option<bool> {
        asg.iter().find(|a| a.abs() == l.abs()).map(|&a| a == l)
    }
    fn go(cubes: &[Vec<Lit>], asg: &mut Vec<Lit>) -> Result<(), Vec<Lit>> {
        let mut branch = None;
        let mut any_open = false;
        for c in cubes {
            let mut falsified = false;
            let mut free = None;
            for &l in c {
                match value(asg, l) {
                    Some(false) => {
                        falsified = true;
                        break;
                    }
                    None if free.is_none() => free = Some(l),
                    _ => {}
                }
            }
            if falsified {
                continue;
            }
            match free {
                None => return Ok(()),
                Some(l) => {
                    any_open = true;
                    branch.get_or_insert(l.abs());
                }
            }
        }
        if !any_open {
            return Err(asg.clone());
        }
        let v = branch.unwrap();
        for l in [v, -v] {
            asg.push(l);
            let r = go(cubes, asg);
            asg.pop();
            r?;
        }
        Ok(())
    }
    go(cubes, &mut Vec::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobStatus {
    Exhausted,
    Resplit,
    Interrupted,
}

impl JobStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            JobStatus::Exhausted => "exhausted",
            JobStatus::Resplit => "resplit",
            JobStatus::Interrupted => "interrupted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobResult {
    pub id: String,
    pub status: JobStatus,
    pub candidates: Vec<Graph>,
    /// Paths relative to the output directory; `None` unless exhausted.
    pub files: Option<(PathBuf, PathBuf, PathBuf)>,
    pub proof_bytes: u64,
    pub stats: SolveStats,
}

pub struct ConquerSetup<'a> {
    pub instance: &'a Instance,
    pub library: &'a UnembeddableLibrary,
    pub og: OgConfig,
    pub solver: SolverConfig,
    pub proof_budget: Option<u64>,
    pub out_dir: &'a Path,
}

pub fn proof_paths(id: &str) -> (PathBuf, PathBuf, PathBuf) {
    let dir = Path::new("proofs");
    (dir.join(format!("{id}.drat")), dir.join(format!("{id}.wit")), dir.join(format!("{id}.cands")))
}

/// Solves the full instance under `cube` with proof logging.
pub fn conquer(cube: &Cube, setup: &ConquerSetup) -> Result<JobResult, CncError> {
    let (proof, witness, cands) = proof_paths(&cube.id);
    let abs = |p: &Path| setup.out_dir.join(p);
    fs::create_dir_all(setup.out_dir.join("proofs"))?;
    let mut sink = ProofSink::files(&abs(&proof), &abs(&witness))?;
    let mut og = OgPropagator::new(&setup.instance.map, setup.library, setup.og.clone());
    let mut cfg = setup.solver.clone();
    cfg.max_proof_bytes = setup.proof_budget;
    let out = solve_all(&setup.instance.formula, &setup.instance.map, &cube.lits, &mut og, &mut sink, &cfg)?;
    sink.flush()?;
    drop(sink);
    let mut result = JobResult {
        id: cube.id.clone(),
        status: JobStatus::Exhausted,
        candidates: Vec::new(),
        files: None,
        proof_bytes: out.stats.proof_bytes,
        stats: out.stats.clone(),
    };
    match out.status {
        Status::Exhausted => {
            let mut text = String::new();
            for g in &out.candidates {
                writeln!(text, "{}", g.to_graph6()).unwrap();
            }
            fs::write(abs(&cands), text)?;
            result.candidates = out.candidates;
            result.files = Some((proof, witness, cands));
        }
        Status::Aborted(reason) => {
            let _ = fs::remove_file(abs(&proof));
            let _ = fs::remove_file(abs(&witness));
            result.status = match reason {
                AbortReason::ProofBudget => JobStatus::Resplit,
                AbortReason::Interrupted => JobStatus::Interrupted,
                other => {
                    return Err(CncError::Aborted {
                        id: cube.id.clone(),
                        reason: format!("{other:?}"),
                    })
                }
            };
        }
    }
    Ok(result)
}

fn conquer_with_retry(cube: &Cube, setup: &ConquerSetup) -> Result<JobResult, CncError> {
    for attempt in 0..2 {
        match catch_unwind(AssertUnwindSafe(|| conquer(cube, setup))) {
            Ok(r) => return r,
            Err(_) => log::warn!("worker crashed on cube {} (attempt {})", cube.id, attempt + 1),
        }
    }
    Err(CncError::WorkerCrash(cube.id.clone()))
}

#[derive(Debug, Clone)]
pub struct CncConfig {
    pub cutoff: usize,
    pub jobs: usize,
    pub proof_budget: Option<u64>,
    /// Extra split depth on the first budget trip; doubled on each repeat.
    pub resplit_depth: usize,
    pub max_resplit_depth: usize,
    pub og: OgConfig,
    pub solver: SolverConfig,
    /// Start from these cubes instead of a fresh lookahead tree.
    pub initial_cubes: Option<Vec<Vec<Lit>>>,
    pub interrupt: Option<Arc<AtomicBool>>,
}

impl Default for CncConfig {
    fn default() -> Self {
        CncConfig {
            cutoff: 1,
            jobs: 1,
            proof_budget: Some(64 << 20),
            resplit_depth: 2,
            max_resplit_depth: 8,
            og: OgConfig::default(),
            solver: SolverConfig::default(),
            initial_cubes: None,
            interrupt: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub id: String,
    pub lits: Vec<Lit>,
    pub status: JobStatus,
    pub files: Option<(PathBuf, PathBuf, PathBuf)>,
    pub candidates: usize,
    pub proof_bytes: u64,
}

impl ManifestEntry {
    pub fn line(&self) -> String {
        let (p, w, c) = match &self.files {
            Some((p, w, c)) => (p.display().to_string(), w.display().to_string(), c.display().to_string()),
            None => ("-".into(), "-".into(), "-".into()),
        };
        format!("cube {} {} {p} {w} {c}", self.id, self.status.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct CncReport {
    /// Every conquered or resplit cube, in id order.
    pub entries: Vec<ManifestEntry>,
    pub nodes: Vec<Cube>,
    /// Union over cubes, one canonical representative each, by graph6.
    pub candidates: Vec<Graph>,
    pub resplits: usize,
    pub stats: SolveStats,
    pub interrupted: bool,
}

impl CncReport {
    pub fn exhausted(&self) -> bool {
        !self.interrupted && self.entries.iter().all(|e| e.status != JobStatus::Interrupted)
    }
}

fn add_stats(total: &mut SolveStats, s: &SolveStats) {
    total.conflicts += s.conflicts;
    total.decisions += s.decisions;
    total.propagations += s.propagations;
    total.propagator_calls += s.propagator_calls;
    total.prefix_blocks += s.prefix_blocks;
    total.model_blocks += s.model_blocks;
    total.restarts += s.restarts;
    total.learned += s.learned;
    total.deleted += s.deleted;
    total.proof_bytes += s.proof_bytes;
}

/// Resplit fan-out in levels for a cube with `trips` budget trips on its path.
fn resplit_levels(cfg: &CncConfig, trips: usize) -> usize {
    (cfg.resplit_depth << trips.saturating_sub(1).min(16)).min(cfg.max_resplit_depth).max(1)
}

/// Runs the whole cube-and-conquer loop and writes `cubes.icnf`,
/// `lineage.txt`, `manifest.txt` and `candidates.txt` under `out_dir`.
pub fn orchestrate(
    reduced: &CnfFormula,
    full: &Instance,
    library: &UnembeddableLibrary,
    cfg: &CncConfig,
    out_dir: &Path,
) -> Result<CncReport, CncError> {
    if cfg.cutoff < 1 {
        return Err(CncError::Cutoff);
    }
    fs::create_dir_all(out_dir)?;
    let map = &full.map;
    let mut nodes: Vec<Cube> = Vec::new();
    let initial: Vec<Cube> = match &cfg.initial_cubes {
        Some(cubes) => {
            let width = cubes.len().to_string().len();
            let mut out = Vec::new();
            for (i, c) in cubes.iter().enumerate() {
                check_cube(map, c)?;
                out.push(Cube::root(&format!("e{i:0width$}"), c.clone()));
            }
            nodes.extend(out.iter().cloned());
            out
        }
        None => {
            let root = Cube::root("r", Vec::new());
            let created = split_cube(reduced, map, &root, cfg.cutoff)?;
            nodes.push(root.clone());
            nodes.extend(created.iter().cloned());
            leaves_of(&root, &created)
        }
    };
    let mut solver = cfg.solver.clone();
    solver.interrupt = cfg.interrupt.clone();
    let setup = ConquerSetup {
        instance: full,
        library,
        og: cfg.og.clone(),
        solver,
        proof_budget: cfg.proof_budget,
        out_dir,
    };
    let stop = cfg.interrupt.clone().unwrap_or_default();
    let mut trips: BTreeMap<String, usize> = BTreeMap::new();
    let mut entries = Vec::new();
    let mut resplits = 0;
    let mut failure = None;
    std::thread::scope(|s| {
        let (job_tx, job_rx) = mpsc::channel::<Cube>();
        let job_rx = Arc::new(Mutex::new(job_rx));
        let (res_tx, res_rx) = mpsc::channel::<(Cube, Result<JobResult, CncError>)>();
        for _ in 0..cfg.jobs.max(1) {
            let rx = Arc::clone(&job_rx);
            let tx = res_tx.clone();
            let setup = &setup;
            let stop = &stop;
            s.spawn(move || loop {
                let job = rx.lock().unwrap().recv();
                let Ok(cube) = job else { return };
                let r = if stop.load(Ordering::Relaxed) {
                    Ok(JobResult {
                        id: cube.id.clone(),
                        status: JobStatus::Interrupted,
                        candidates: Vec::new(),
                        files: None,
                        proof_bytes: 0,
                        stats: SolveStats::default(),
                    })
                } else {
                    conquer_with_retry(&cube, setup)
                };
                if tx.send((cube, r)).is_err() {
                    return;
                }
            });
        }
        drop(res_tx);
        let mut outstanding = 0usize;
        for c in initial {
            job_tx.send(c).expect("workers alive");
            outstanding += 1;
        }
        while outstanding > 0 {
            let Ok((cube, r)) = res_rx.recv() else { break };
            outstanding -= 1;
            let r = match r {
                Ok(r) => r,
                Err(e) => {
                    stop.store(true, Ordering::Relaxed);
                    failure.get_or_insert(e);
                    continue;
                }
            };
            log::info!("cube {} {} ({} bytes)", r.id, r.status.as_str(), r.proof_bytes);
            if r.status == JobStatus::Resplit && failure.is_none() && !stop.load(Ordering::Relaxed) {
                let t = cube.parent.as_ref().and_then(|p| trips.get(p)).copied().unwrap_or(0) + 1;
                let levels = resplit_levels(cfg, t);
                match split_cube(reduced, map, &cube, 1 << levels) {
                    Ok(created) if !created.is_empty() => {
                        resplits += 1;
                        for c in &created {
                            trips.insert(c.id.clone(), t);
                        }
                        trips.insert(cube.id.clone(), t);
                        for leaf in leaves_of(&cube, &created) {
                            job_tx.send(leaf).expect("workers alive");
                            outstanding += 1;
                        }
                        nodes.extend(created);
                    }
                    Ok(_) => {
                        failure.get_or_insert(CncError::Aborted {
                            id: cube.id.clone(),
                            reason: "proof budget exceeded and the cube cannot be split further".into(),
                        });
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                    }
                }
            }
            entries.push((cube, r));
        }
        drop(job_tx);
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let mut total = SolveStats::default();
    let mut seen: BTreeMap<String, Graph> = BTreeMap::new();
    let mut manifest = Vec::new();
    for (cube, r) in entries {
        add_stats(&mut total, &r.stats);
        for g in &r.candidates {
            let c = canonical_form(g).0;
            seen.insert(c.to_graph6(), c);
        }
        manifest.push(ManifestEntry {
            id: r.id,
            lits: cube.lits,
            status: r.status,
            files: r.files,
            candidates: r.candidates.len(),
            proof_bytes: r.proof_bytes,
        });
    }
    manifest.sort_by(|a, b| a.id.cmp(&b.id));
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    let report = CncReport {
        entries: manifest,
        nodes,
        candidates: seen.into_values().collect(),
        resplits,
        stats: total,
        interrupted: stop.load(Ordering::Relaxed),
    };
    write_run_files(&report, out_dir)?;
    Ok(report)
}

fn write_run_files(report: &CncReport, out_dir: &Path) -> io::Result<()> {
    let mut cubes = Vec::new();
    for e in report.entries.iter().filter(|e| e.status != JobStatus::Resplit) {
        write_cube(&mut cubes, &e.lits)?;
    }
    fs::write(out_dir.join("cubes.icnf"), cubes)?;
    let mut lineage = String::new();
    for c in &report.nodes {
        write!(lineage, "node {} {} {}", c.id, c.parent.as_deref().unwrap_or("-"), c.split).unwrap();
        if c.parent.is_none() {
            for l in &c.lits {
                write!(lineage, " {l}").unwrap();
            }
        }
        lineage.push('\n');
    }
    fs::write(out_dir.join("lineage.txt"), lineage)?;
    let mut f = io::BufWriter::new(fs::File::create(out_dir.join("manifest.txt"))?);
    for e in &report.entries {
        writeln!(f, "{}", e.line())?;
    }
    f.flush()?;
    let mut text = String::new();
    for g in &report.candidates {
        writeln!(text, "{}", g.to_graph6()).unwrap();
    }
    fs::write(out_dir.join("candidates.txt"), text)
}

/// Parses `lineage.txt` into nodes with their full literal paths. Lines are
/// `node <id> <parent|-> <split>`, roots followed by their own literals.
pub fn read_lineage(text: &str) -> Result<Vec<Cube>, String> {
    let mut by_id: BTreeMap<String, Cube> = BTreeMap::new();
    let mut order = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let p: Vec<&str> = line.split_whitespace().collect();
        if p.is_empty() {
            continue;
        }
        let bad = || format!("lineage line {}: malformed", i + 1);
        if p.len() < 4 || p[0] != "node" || (p[2] != "-" && p.len() != 4) || by_id.contains_key(p[1]) {
            return Err(bad());
        }
        let split: Lit = p[3].parse().map_err(|_| bad())?;
        let (parent, lits) = if p[2] == "-" {
            let lits = p[4..].iter().map(|t| t.parse()).collect::<Result<Vec<Lit>, _>>().map_err(|_| bad())?;
            (None, lits)
        } else {
            let par = by_id
                .get(p[2])
                .ok_or_else(|| format!("lineage line {}: unknown parent {}", i + 1, p[2]))?;
            let mut lits = par.lits.clone();
            lits.push(split);
            (Some(p[2].to_string()), lits)
        };
        order.push(p[1].to_string());
        by_id.insert(
            p[1].to_string(),
            Cube {
                id: p[1].to_string(),
                lits,
                parent,
                split,
            },
        );
    }
    Ok(order.into_iter().map(|id| by_id[&id].clone()).collect())
}
