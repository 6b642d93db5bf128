//! End-to-end run: encode, cube, conquer, classify candidates, and an
//! independent re-check of everything a run directory contains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::cnc::{check_coverage, orchestrate, read_lineage, CncConfig, CncError, CncReport};
use crate::cnf::{assemble, CnfError, CnfFormula, EncodeOptions, Instance, Lit};
use crate::embed::{check_embeddable, EmbedConfig, EmbedStatus};
use crate::graph::Graph;
use crate::og::{LibraryError, UnembeddableLibrary, DEFAULT_MAX_LIBRARY_ORDER};
use crate::verify::{verify_candidates, verify_proof, CandidateReport, Conclusion, ProofContext, Rejection};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Cnc(#[from] CncError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error("run directory: {0}")]
    Run(String),
}

/// Options recorded in `config.txt` and needed to rebuild the instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub order: usize,
    pub min_degree: usize,
    pub truncate: bool,
}

impl RunOptions {
    pub fn new(order: usize) -> Self {
        RunOptions {
            order,
            min_degree: 3,
            truncate: true,
        }
    }

    pub fn full_options(&self) -> EncodeOptions {
        EncodeOptions {
            min_degree: Some(self.min_degree),
            truncate: self.truncate,
            ..EncodeOptions::ks()
        }
    }

    pub fn reduced_options(&self) -> EncodeOptions {
        EncodeOptions {
            min_degree: Some(self.min_degree),
            ..EncodeOptions::cubing()
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "order={}\nmin_degree={}\ntruncate={}\n",
            self.order, self.min_degree, self.truncate
        )
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut kv = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line.split_once('=').ok_or_else(|| format!("bad config line: {line}"))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| kv.get(k).ok_or_else(|| format!("config lacks {k}"));
        let num = |k: &str| get(k)?.parse::<usize>().map_err(|_| format!("bad value for {k}"));
        Ok(RunOptions {
            order: num("order")?,
            min_degree: num("min_degree")?,
            truncate: get("truncate")?.parse().map_err(|_| "bad value for truncate".to_string())?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub run: RunOptions,
    pub cnc: CncConfig,
    pub embed: EmbedConfig,
    /// Re-check the finished run directory before concluding.
    pub verify: bool,
}

#[derive(Debug, Clone)]
pub struct EmbedRow {
    pub graph6: String,
    pub status: EmbedStatus,
    pub evidence: String,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub cnc: CncReport,
    pub embed: Vec<EmbedRow>,
    pub check: Option<RunCheck>,
    pub conclusion: Conclusion,
    pub peak_rss_kib: Option<u64>,
    pub seconds: f64,
}

/// Peak resident set size of this process, where the platform reports it.
pub fn peak_rss_kib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

struct StageLog {
    start: Instant,
    text: String,
}

impl StageLog {
    fn mark(&mut self, stage: &str) {
        let t = self.start.elapsed().as_secs_f64();
        log::info!("{stage} at {t:.3}s");
        writeln!(self.text, "{t:.3} {stage}").unwrap();
    }
}

pub fn run_pipeline(cfg: &PipelineConfig, library: &UnembeddableLibrary, out_dir: &Path) -> Result<PipelineReport, PipelineError> {
    let mut log = StageLog {
        start: Instant::now(),
        text: String::new(),
    };
    fs::create_dir_all(out_dir)?;
    log.mark("encode");
    let full = assemble(cfg.run.order, &cfg.run.full_options())?;
    let reduced = assemble(cfg.run.order, &cfg.run.reduced_options())?;
    fs::write(out_dir.join("config.txt"), cfg.run.to_text())?;
    fs::write(out_dir.join("formula.cnf"), full.formula.to_dimacs())?;
    let mut map = Vec::new();
    full.map.write_map(&mut map)?;
    fs::write(out_dir.join("varmap.txt"), map)?;
    library.save(&out_dir.join("library.txt"))?;
    log.mark("cube and conquer");
    let cnc = orchestrate(&reduced.formula, &full, library, &cfg.cnc, out_dir)?;
    log.mark("embeddability");
    let mut embed = Vec::new();
    for g in &cnc.candidates {
        let (status, evidence) = match check_embeddable(g, &cfg.embed) {
            Ok(v) => (v.status, v.evidence),
            Err(e) => (EmbedStatus::Inconclusive, e.to_string()),
        };
        embed.push(EmbedRow {
            graph6: g.to_graph6(),
            status,
            evidence,
        });
    }
    let mut text = String::new();
    for r in &embed {
        writeln!(text, "{} {} {}", r.graph6, r.status, r.evidence).unwrap();
    }
    fs::write(out_dir.join("embed.txt"), text)?;
    let mut conclusion = if !cnc.exhausted() {
        Conclusion::Unresolved
    } else if let Some(r) = embed.iter().find(|r| r.status == EmbedStatus::Embeddable) {
        Conclusion::KsGraph {
            graph6: r.graph6.clone(),
        }
    } else if embed.iter().any(|r| r.status == EmbedStatus::Inconclusive) {
        Conclusion::Unresolved
    } else {
        Conclusion::NoKsGraph { order: cfg.run.order }
    };
    let check = if cfg.verify && cnc.exhausted() {
        log.mark("verify");
        let check = verify_run(out_dir, &cfg.embed, cfg.cnc.jobs)?;
        if !check.accepted() {
            conclusion = Conclusion::Rejected;
        } else if check.candidates.conclusion != conclusion {
            conclusion = Conclusion::Unresolved;
        }
        Some(check)
    } else {
        None
    };
    log.mark("done");
    fs::write(out_dir.join("log.txt"), &log.text)?;
    Ok(PipelineReport {
        cnc,
        embed,
        check,
        conclusion,
        peak_rss_kib: peak_rss_kib(),
        seconds: log.start.elapsed().as_secs_f64(),
    })
}

/// Outcome of re-checking a run directory.
#[derive(Debug, Clone)]
pub struct RunCheck {
    pub cubes: usize,
    pub proofs_accepted: usize,
    pub formula_matches: bool,
    /// An uncovered partial assignment, if the leaves leave a gap.
    pub coverage_gap: Option<Vec<Lit>>,
    pub problems: Vec<String>,
    pub rejections: Vec<(String, Rejection)>,
    pub candidates: CandidateReport,
}

impl RunCheck {
    pub fn accepted(&self) -> bool {
        self.formula_matches
            && self.coverage_gap.is_none()
            && self.problems.is_empty()
            && self.rejections.is_empty()
            && self.proofs_accepted == self.cubes
            && self.candidates.conclusion != Conclusion::Rejected
    }
}

struct ManifestLine {
    id: String,
    status: String,
    files: Option<[String; 3]>,
}

fn read_manifest(text: &str) -> Result<Vec<ManifestLine>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let p: Vec<&str> = line.split_whitespace().collect();
        if p.len() != 6 || p[0] != "cube" {
            return Err(PipelineError::Run(format!("manifest line {} malformed", i + 1)));
        }
        let files = (p[3] != "-").then(|| [p[3].to_string(), p[4].to_string(), p[5].to_string()]);
        out.push(ManifestLine {
            id: p[1].to_string(),
            status: p[2].to_string(),
            files,
        });
    }
    Ok(out)
}

fn graph6_lines(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
}

/// Rebuilds the instance from `config.txt`, checks the stored formula,
/// leaf coverage, every cube proof and the merged candidate log.
pub fn verify_run(dir: &Path, embed: &EmbedConfig, jobs: usize) -> Result<RunCheck, PipelineError> {
    let read = |name: &str| fs::read_to_string(dir.join(name)).map_err(|e| PipelineError::Run(format!("{name}: {e}")));
    let run = RunOptions::parse(&read("config.txt")?).map_err(PipelineError::Run)?;
    let full: Instance = assemble(run.order, &run.full_options())?;
    let stored = CnfFormula::read_dimacs(BufReader::new(fs::File::open(dir.join("formula.cnf"))?))?;
    let formula_matches = stored.var_count == full.formula.var_count && stored.clauses == full.formula.clauses;
    let library = UnembeddableLibrary::parse(&read("library.txt")?, DEFAULT_MAX_LIBRARY_ORDER)?;
    let nodes = read_lineage(&read("lineage.txt")?).map_err(PipelineError::Run)?;
    let manifest = read_manifest(&read("manifest.txt")?)?;
    let mut problems = Vec::new();
    let by_id: BTreeMap<&str, &[Lit]> = nodes.iter().map(|c| (c.id.as_str(), c.lits.as_slice())).collect();
    let parents: BTreeSet<&str> = nodes.iter().filter_map(|c| c.parent.as_deref()).collect();
    let mut leaves = Vec::new();
    let mut jobs_list = Vec::new();
    let mut listed = BTreeSet::new();
    for m in &manifest {
        listed.insert(m.id.as_str());
        let Some(&lits) = by_id.get(m.id.as_str()) else {
            problems.push(format!("cube {} missing from lineage", m.id));
            continue;
        };
        match (m.status.as_str(), &m.files) {
            ("exhausted", Some(files)) if !parents.contains(m.id.as_str()) => {
                leaves.push(lits.to_vec());
                jobs_list.push((m.id.clone(), lits.to_vec(), files.clone()));
            }
            ("resplit", None) if parents.contains(m.id.as_str()) => {}
            _ => problems.push(format!("cube {} has inconsistent status {}", m.id, m.status)),
        }
    }
    for c in &nodes {
        if !parents.contains(c.id.as_str()) && !listed.contains(c.id.as_str()) {
            problems.push(format!("leaf {} has no manifest entry", c.id));
        }
    }
    let coverage_gap = check_coverage(&leaves).err();

    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    let merged = Mutex::new(BTreeSet::new());
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(jobs_list.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((id, cube, files)) = jobs_list.get(i) else { return };
                let outcome = (|| -> io::Result<Option<Rejection>> {
                    let cands = graph6_lines(&fs::read_to_string(dir.join(&files[2]))?);
                    let ctx = ProofContext {
                        formula: &full.formula,
                        map: &full.map,
                        cube,
                        library: &library,
                        candidates: &cands,
                    };
                    let proof = BufReader::new(fs::File::open(dir.join(&files[0]))?);
                    let witness = BufReader::new(fs::File::open(dir.join(&files[1]))?);
                    let verdict = verify_proof(&ctx, proof, witness)?;
                    let mut m = merged.lock().unwrap();
                    for c in cands {
                        if let Ok(g) = Graph::from_graph6(&c) {
                            m.insert(crate::graph::canonical_form(&g).0.to_graph6());
                        }
                    }
                    Ok(verdict.rejection)
                })();
                let r = outcome.unwrap_or_else(|e| {
                    Some(Rejection {
                        line: 0,
                        reason: e.to_string(),
                    })
                });
                results.lock().unwrap().push((id.clone(), r));
            });
        }
    });
    let mut rejections = Vec::new();
    let mut proofs_accepted = 0;
    for (id, r) in results.into_inner().unwrap() {
        match r {
            None => proofs_accepted += 1,
            Some(r) => rejections.push((id, r)),
        }
    }
    rejections.sort_by(|a, b| a.0.cmp(&b.0));
    let log = graph6_lines(&read("candidates.txt")?);
    let merged: Vec<String> = merged.into_inner().unwrap().into_iter().collect();
    let mut sorted_log = log.clone();
    sorted_log.sort();
    if sorted_log != merged {
        problems.push("candidates.txt differs from the union of per-cube logs".into());
    }
    let candidates = verify_candidates(run.order, run.min_degree, &log, embed);
    Ok(RunCheck {
        cubes: jobs_list.len(),
        proofs_accepted,
        formula_matches,
        coverage_gap,
        problems,
        rejections,
        candidates,
    })
}
