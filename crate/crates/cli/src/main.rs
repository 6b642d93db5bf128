mod config;

use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use config::{RunArgs, RunConfig};
use ks_core::cnc::{generate_cubes, orchestrate, CncConfig};
use ks_core::cnf::{assemble, read_cubes, write_cube, EncodeOptions, Lit};
use ks_core::embed::minimal::{enumerate_minimal_unembeddable, MinimalConfig};
use ks_core::embed::smt::SmtConfig;
use ks_core::embed::{check_embeddable, EmbedConfig, EmbedStatus};
use ks_core::graph::{is_010_colorable, Colorability, Graph};
use ks_core::og::{OgConfig, OgPropagator, UnembeddableLibrary, BUNDLED_LIBRARY, DEFAULT_MAX_LIBRARY_ORDER};
use ks_core::pipeline::{run_pipeline, verify_run, PipelineConfig, RunOptions};
use ks_core::sat::{solve_all, ProofSink, SolverConfig, Status};
use ks_core::verify::{verify_candidates, verify_proof, Conclusion, ProofContext};

/// Failure classes with their exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Failure {
    Encode = 2,
    Solve = 3,
    Verify = 4,
    Inconclusive = 5,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Failure::Encode => "encoding failed",
            Failure::Solve => "solving failed",
            Failure::Verify => "verification failed",
            Failure::Inconclusive => "inconclusive",
        })
    }
}

trait Classify<T> {
    fn class(self, f: Failure) -> Result<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn class(self, f: Failure) -> Result<T> {
        self.map_err(|e| e.into().context(f))
    }
}

#[derive(Parser)]
#[command(name = "kssearch", version, about = "Exhaustive SAT search for Kochen-Specker graphs with checkable certificates")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    /// Log progress to stderr
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Full candidate constraints
    Ks,
    /// Squarefree graphs of minimum degree 2
    Table3,
    /// Candidate constraints without noncolorability
    Cubing,
}

#[derive(Subcommand)]
enum Command {
    /// Write the DIMACS formula and variable map
    Encode {
        #[arg(long, value_enum, default_value = "ks")]
        mode: Mode,
    },
    /// Solve the whole instance sequentially with proof logging
    Solve {
        #[arg(long, value_enum, default_value = "ks")]
        mode: Mode,
    },
    /// Split the instance into cubes
    Cube,
    /// Solve every cube in parallel with one proof per cube
    Conquer,
    /// Encode, cube, conquer, check candidates and verify the run
    Pipeline {
        /// Skip the final re-check of the run directory
        #[arg(long)]
        no_verify: bool,
    },
    /// Compute minimal unembeddable graphs and write them as a library
    EnumerateUnembeddable {
        #[arg(long, default_value_t = 4)]
        min_order: usize,
        #[arg(long, default_value_t = 10)]
        max_order: usize,
    },
    /// Decide embeddability of graph6 graphs
    EmbedCheck {
        /// graph6 strings, or a file of them
        graphs: Vec<String>,
    },
    /// Decide 010-colorability of graph6 graphs
    Colorability { graphs: Vec<String> },
    /// Check a proof with its witness and candidate files, or a whole run directory
    VerifyProof {
        /// Proof file or run directory
        path: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        candidates: Option<PathBuf>,
        /// Cube the proof was produced under, as literals
        #[arg(long, allow_hyphen_values = true, value_delimiter = ' ')]
        cube: Vec<Lit>,
        #[arg(long, value_enum, default_value = "ks")]
        mode: Mode,
    },
    /// Re-check a candidate log and state the resulting bound
    VerifyCandidates { file: PathBuf },
    /// Regenerate a results table (2: lower bound by order, 3: minimal unembeddable counts)
    ReproduceTable {
        table: u8,
        #[arg(long)]
        max_order: Option<usize>,
        /// Allow orders beyond the desk-scale range
        #[arg(long)]
        stretch: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Failure>().map_or(1, |f| *f as u8);
            ExitCode::from(code)
        }
    }
}

fn interrupt_flag() -> Arc<AtomicBool> {
    let flag = Arc::new(AtomicBool::new(false));
    let f = Arc::clone(&flag);
    if let Err(e) = ctrlc::set_handler(move || f.store(true, Ordering::Relaxed)) {
        log::warn!("cannot install interrupt handler: {e}");
    }
    flag
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = RunConfig::resolve(&cli.run)?;
    match cli.command {
        Command::Encode { mode } => cmd_encode(&cfg, mode),
        Command::Solve { mode } => cmd_solve(&cfg, mode),
        Command::Cube => cmd_cube(&cfg),
        Command::Conquer => cmd_conquer(&cfg),
        Command::Pipeline { no_verify } => cmd_pipeline(&cfg, !no_verify),
        Command::EnumerateUnembeddable { min_order, max_order } => cmd_enumerate(&cfg, min_order, max_order),
        Command::EmbedCheck { graphs } => cmd_embed_check(&cfg, &graphs),
        Command::Colorability { graphs } => cmd_colorability(&graphs),
        Command::VerifyProof {
            path,
            witness,
            candidates,
            cube,
            mode,
        } => cmd_verify_proof(&cfg, &path, witness, candidates, &cube, mode),
        Command::VerifyCandidates { file } => cmd_verify_candidates(&cfg, &file),
        Command::ReproduceTable {
            table,
            max_order,
            stretch,
        } => cmd_reproduce_table(&cfg, table, max_order, stretch),
    }
}

fn encode_options(cfg: &RunConfig, mode: Mode) -> EncodeOptions {
    let run = run_options(cfg, 0);
    match mode {
        Mode::Ks => run.full_options(),
        Mode::Cubing => run.reduced_options(),
        Mode::Table3 => EncodeOptions::table3(),
    }
}

fn run_options(cfg: &RunConfig, order: usize) -> RunOptions {
    RunOptions {
        order,
        min_degree: cfg.min_degree,
        truncate: cfg.truncate,
    }
}

fn mode_order(cfg: &RunConfig, mode: Mode) -> Result<usize> {
    match mode {
        Mode::Table3 => cfg.order(),
        _ => cfg.ks_order(),
    }
}

fn embed_config(cfg: &RunConfig) -> EmbedConfig {
    let mut e = EmbedConfig {
        smt: Some(SmtConfig::with_command(&cfg.smt_cmd)),
        ..EmbedConfig::default()
    };
    e.numeric.seed = cfg.seed;
    e
}

fn solver_config(cfg: &RunConfig, interrupt: Option<Arc<AtomicBool>>) -> SolverConfig {
    SolverConfig {
        max_conflicts: cfg.conflict_budget,
        interrupt,
        ..SolverConfig::default()
    }
}

fn load_library(cfg: &RunConfig) -> Result<UnembeddableLibrary> {
    Ok(match &cfg.library {
        Some(p) => UnembeddableLibrary::load(p, DEFAULT_MAX_LIBRARY_ORDER).with_context(|| format!("loading {}", p.display()))?,
        None => UnembeddableLibrary::parse(BUNDLED_LIBRARY, DEFAULT_MAX_LIBRARY_ORDER)?,
    })
}

fn cnc_config(cfg: &RunConfig, interrupt: Arc<AtomicBool>) -> Result<CncConfig> {
    let initial_cubes = match &cfg.cubes {
        Some(p) => Some(read_cubes(BufReader::new(fs::File::open(p).with_context(|| format!("opening {}", p.display()))?))?),
        None => None,
    };
    Ok(CncConfig {
        cutoff: cfg.cutoff,
        jobs: cfg.jobs,
        proof_budget: Some(cfg.proof_budget),
        solver: solver_config(cfg, None),
        initial_cubes,
        interrupt: Some(interrupt),
        ..CncConfig::default()
    })
}

fn cmd_encode(cfg: &RunConfig, mode: Mode) -> Result<u8> {
    let n = mode_order(cfg, mode).class(Failure::Encode)?;
    let inst = assemble(n, &encode_options(cfg, mode)).class(Failure::Encode)?;
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out_path("formula.cnf"), inst.formula.to_dimacs())?;
    let mut map = Vec::new();
    inst.map.write_map(&mut map)?;
    fs::write(cfg.out_path("varmap.txt"), map)?;
    for (family, count) in &inst.families {
        println!("{} {count}", family.name());
    }
    println!("{} variables, {} clauses", inst.formula.var_count, inst.formula.len());
    Ok(0)
}

fn write_graph6_file(path: &Path, graphs: &[Graph]) -> io::Result<()> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    for g in graphs {
        writeln!(f, "{}", g.to_graph6())?;
    }
    f.flush()
}

fn cmd_solve(cfg: &RunConfig, mode: Mode) -> Result<u8> {
    let n = mode_order(cfg, mode)?;
    let inst = assemble(n, &encode_options(cfg, mode)).class(Failure::Encode)?;
    let lib = match mode {
        Mode::Ks => load_library(cfg)?,
        _ => UnembeddableLibrary::empty(),
    };
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out_path("formula.cnf"), inst.formula.to_dimacs())?;
    let mut sink = ProofSink::files(&cfg.out_path("proof.drat"), &cfg.out_path("proof.wit"))?;
    let mut og = OgPropagator::new(&inst.map, &lib, OgConfig::default());
    let start = Instant::now();
    let out = solve_all(&inst.formula, &inst.map, &[], &mut og, &mut sink, &solver_config(cfg, Some(interrupt_flag())))
        .class(Failure::Solve)?;
    sink.flush()?;
    write_graph6_file(&cfg.out_path("candidates.txt"), &out.candidates)?;
    println!(
        "{} candidates; {} conflicts; {} proof bytes; {:.2}s",
        out.candidates.len(),
        out.stats.conflicts,
        out.stats.proof_bytes,
        start.elapsed().as_secs_f64()
    );
    match out.status {
        Status::Exhausted => Ok(0),
        Status::Aborted(r) => Err(anyhow::anyhow!("search aborted: {r:?}")).class(Failure::Solve),
    }
}

fn cmd_cube(cfg: &RunConfig) -> Result<u8> {
    let n = cfg.ks_order()?;
    let inst = assemble(n, &run_options(cfg, n).reduced_options()).class(Failure::Encode)?;
    let cubes = generate_cubes(&inst.formula, &inst.map, cfg.cutoff).class(Failure::Solve)?;
    fs::create_dir_all(&cfg.out)?;
    let mut buf = Vec::new();
    for c in &cubes {
        write_cube(&mut buf, &c.lits)?;
    }
    fs::write(cfg.out_path("cubes.icnf"), buf)?;
    for c in &cubes {
        println!("{} {}", c.id, c.lits.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "));
    }
    println!("{} cubes", cubes.len());
    Ok(0)
}

fn cmd_conquer(cfg: &RunConfig) -> Result<u8> {
    let n = cfg.ks_order()?;
    let run = run_options(cfg, n);
    let full = assemble(n, &run.full_options()).class(Failure::Encode)?;
    let reduced = assemble(n, &run.reduced_options()).class(Failure::Encode)?;
    let lib = load_library(cfg)?;
    let cnc = cnc_config(cfg, interrupt_flag())?;
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out_path("config.txt"), run.to_text())?;
    fs::write(cfg.out_path("formula.cnf"), full.formula.to_dimacs())?;
    lib.save(&cfg.out_path("library.txt"))?;
    let rep = orchestrate(&reduced.formula, &full, &lib, &cnc, &cfg.out).class(Failure::Solve)?;
    println!(
        "{} cubes; {} resplits; {} candidates",
        rep.entries.len(),
        rep.resplits,
        rep.candidates.len()
    );
    if !rep.exhausted() {
        println!("interrupted; manifest written for the finished cubes");
        return Ok(Failure::Inconclusive as u8);
    }
    Ok(0)
}

fn conclusion_code(c: &Conclusion) -> u8 {
    match c {
        Conclusion::NoKsGraph { .. } | Conclusion::KsGraph { .. } => 0,
        Conclusion::Rejected => Failure::Verify as u8,
        Conclusion::Unresolved => Failure::Inconclusive as u8,
    }
}

fn cmd_pipeline(cfg: &RunConfig, verify: bool) -> Result<u8> {
    let n = cfg.ks_order()?;
    let lib = load_library(cfg)?;
    let pc = PipelineConfig {
        run: run_options(cfg, n),
        cnc: cnc_config(cfg, interrupt_flag())?,
        embed: embed_config(cfg),
        verify,
    };
    let rep = run_pipeline(&pc, &lib, &cfg.out).class(Failure::Solve)?;
    for r in &rep.embed {
        println!("candidate {} {} ({})", r.graph6, r.status, r.evidence);
    }
    if let Some(check) = &rep.check {
        println!("verified {}/{} cube proofs", check.proofs_accepted, check.cubes);
        for p in &check.problems {
            println!("problem: {p}");
        }
        for (id, r) in &check.rejections {
            println!("cube {id}: {r}");
        }
    }
    let rss = rep.peak_rss_kib.map_or("unknown".to_string(), |k| format!("{} MiB", k / 1024));
    log::info!("{:.2}s, peak memory {rss}", rep.seconds);
    println!("{} candidates; {}", rep.cnc.candidates.len(), rep.conclusion);
    Ok(conclusion_code(&rep.conclusion))
}

fn cmd_enumerate(cfg: &RunConfig, min_order: usize, max_order: usize) -> Result<u8> {
    if max_order > DEFAULT_MAX_LIBRARY_ORDER {
        bail!("library orders are limited to {DEFAULT_MAX_LIBRARY_ORDER}");
    }
    let mc = MinimalConfig {
        min_order,
        max_order,
        embed: embed_config(cfg),
        jobs: cfg.jobs,
    };
    let rep = enumerate_minimal_unembeddable(&mc).class(Failure::Inconclusive)?;
    for r in &rep.rows {
        println!("{}: {}/{}", r.order, r.enumerated, r.minimal.len());
    }
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out_path("library.txt");
    rep.library.save(&path)?;
    println!("library written to {}", path.display());
    Ok(0)
}

/// graph6 arguments, where an argument naming a file contributes its lines.
fn graph_args(args: &[String]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for a in args {
        if Path::new(a).is_file() {
            for line in BufReader::new(fs::File::open(a)?).lines() {
                let line = line?;
                let t = line.trim();
                if !t.is_empty() && !t.starts_with('c') {
                    out.push(t.to_string());
                }
            }
        } else {
            out.push(a.clone());
        }
    }
    if out.is_empty() {
        bail!("no graphs given");
    }
    Ok(out)
}

fn cmd_embed_check(cfg: &RunConfig, args: &[String]) -> Result<u8> {
    let ecfg = embed_config(cfg);
    let mut code = 0;
    for text in graph_args(args)? {
        let g = Graph::from_graph6(&text).with_context(|| format!("reading {text:?}"))?;
        let v = check_embeddable(&g, &ecfg).class(Failure::Inconclusive)?;
        println!("{text} {} ({})", v.status, v.evidence);
        if let Some(e) = &v.embedding {
            for (i, x) in e.iter().enumerate() {
                println!("  {i}: {:.9} {:.9} {:.9}", x[0], x[1], x[2]);
            }
        }
        if v.status == EmbedStatus::Inconclusive {
            code = Failure::Inconclusive as u8;
        }
    }
    Ok(code)
}

fn cmd_colorability(args: &[String]) -> Result<u8> {
    for text in graph_args(args)? {
        let g = Graph::from_graph6(&text).with_context(|| format!("reading {text:?}"))?;
        match is_010_colorable(&g) {
            Colorability::Colorable(c) => {
                let ones: Vec<String> = c.ones().map(|v| v.to_string()).collect();
                println!("{text} colorable ones={}", ones.join(","));
            }
            Colorability::Noncolorable => println!("{text} noncolorable"),
        }
    }
    Ok(0)
}

fn with_ext(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn cmd_verify_proof(
    cfg: &RunConfig,
    path: &Path,
    witness: Option<PathBuf>,
    candidates: Option<PathBuf>,
    cube: &[Lit],
    mode: Mode,
) -> Result<u8> {
    if path.is_dir() {
        let check = verify_run(path, &embed_config(cfg), cfg.jobs).class(Failure::Verify)?;
        for p in &check.problems {
            println!("problem: {p}");
        }
        if let Some(gap) = &check.coverage_gap {
            println!("uncovered assignment: {gap:?}");
        }
        for (id, r) in &check.rejections {
            println!("cube {id}: {r}");
        }
        println!("{}/{} cube proofs accepted; {}", check.proofs_accepted, check.cubes, check.candidates.conclusion);
        if !check.accepted() {
            bail!(Failure::Verify);
        }
        return Ok(conclusion_code(&check.candidates.conclusion));
    }
    let n = mode_order(cfg, mode)?;
    let inst = assemble(n, &encode_options(cfg, mode)).class(Failure::Encode)?;
    let lib = match mode {
        Mode::Ks => load_library(cfg)?,
        _ => UnembeddableLibrary::empty(),
    };
    let witness = witness.unwrap_or_else(|| with_ext(path, "wit"));
    let cands_path = candidates.unwrap_or_else(|| {
        let c = with_ext(path, "cands");
        if c.exists() {
            c
        } else {
            path.with_file_name("candidates.txt")
        }
    });
    let cands: Vec<String> = match fs::read_to_string(&cands_path) {
        Ok(t) => t.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect(),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    let ctx = ProofContext {
        formula: &inst.formula,
        map: &inst.map,
        cube,
        library: &lib,
        candidates: &cands,
    };
    let open = |p: &Path| fs::File::open(p).map(BufReader::new).with_context(|| format!("opening {}", p.display()));
    let verdict = verify_proof(&ctx, open(path)?, open(&witness)?).class(Failure::Verify)?;
    let s = &verdict.summary;
    println!(
        "{} lines: {} additions, {} deletions, {} trusted",
        s.lines, s.additions, s.deletions, s.trusted
    );
    match &verdict.rejection {
        None => {
            println!("accepted");
            Ok(0)
        }
        Some(r) => {
            println!("rejected: {r}");
            Err(anyhow::anyhow!("{}: {r}", path.display())).class(Failure::Verify)
        }
    }
}

fn cmd_verify_candidates(cfg: &RunConfig, file: &Path) -> Result<u8> {
    let n = cfg.ks_order()?;
    let log: Vec<String> = fs::read_to_string(file)
        .with_context(|| format!("reading {}", file.display()))?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    let rep = verify_candidates(n, cfg.min_degree, &log, &embed_config(cfg));
    for c in &rep.checks {
        match &c.embed {
            Some(status) => println!("{} {status} ({})", c.graph6, c.evidence),
            None => println!("{} invalid: {}", c.graph6, c.failures.join("; ")),
        }
    }
    println!("{} candidates; {}", rep.checks.len(), rep.conclusion);
    Ok(conclusion_code(&rep.conclusion))
}

fn cmd_reproduce_table(cfg: &RunConfig, table: u8, max_order: Option<usize>, stretch: bool) -> Result<u8> {
    match table {
        3 => {
            let max = max_order.unwrap_or(10);
            if max > 10 && !stretch {
                bail!("orders above 10 need --stretch");
            }
            if max < 10 {
                bail!("the table starts with the combined orders 4 to 9; use --max-order 10 or more");
            }
            let mc = MinimalConfig {
                min_order: 4,
                max_order: max,
                embed: embed_config(cfg),
                jobs: cfg.jobs,
            };
            let rep = enumerate_minimal_unembeddable(&mc).class(Failure::Inconclusive)?;
            let (low, high): (Vec<_>, Vec<_>) = rep.rows.iter().partition(|r| r.order <= 9);
            let sum = |f: fn(&&ks_core::embed::minimal::OrderRow) -> usize| low.iter().map(f).sum::<usize>();
            println!("4–9: {}/{}", sum(|r| r.enumerated), sum(|r| r.minimal.len()));
            for r in high {
                println!("{}: {}/{}", r.order, r.enumerated, r.minimal.len());
            }
            Ok(0)
        }
        2 => {
            let max = max_order.unwrap_or(17);
            if max > 17 && !stretch {
                bail!("orders above 17 need --stretch");
            }
            let lib = load_library(cfg)?;
            let interrupt = interrupt_flag();
            let mut worst = 0;
            for n in 4..=max {
                let pc = PipelineConfig {
                    run: run_options(cfg, n),
                    cnc: cnc_config(cfg, Arc::clone(&interrupt))?,
                    embed: embed_config(cfg),
                    verify: true,
                };
                let rep = run_pipeline(&pc, &lib, &cfg.out.join(format!("n{n}"))).class(Failure::Solve)?;
                println!("{n}: {} candidates; {} ({:.2}s)", rep.cnc.candidates.len(), rep.conclusion, rep.seconds);
                let code = conclusion_code(&rep.conclusion);
                if code != 0 || matches!(rep.conclusion, Conclusion::KsGraph { .. }) {
                    worst = worst.max(code);
                    break;
                }
                if n == max {
                    println!("minimum KS graph order ≥ {}", max + 1);
                }
            }
            Ok(worst)
        }
        t => bail!("no table {t}; choose 2 or 3"),
    }
}
