//! Acceptance suite: one pass/fail line per criterion.
//!
//! Exits zero after reporting unless `KS_ACCEPTANCE_STRICT=1`, in which case
//! any failed criterion makes the process fail. `KS_ACCEPTANCE_ORDER11=1`
//! adds the order-11 enumeration.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{all_perms, brute_colorable, brute_min_key, graph_from_code, lex_key};
use ks_core::cnc::CncConfig;
use ks_core::cnf::{assemble, binomial, EncodeOptions, Family};
use ks_core::embed::minimal::{enumerate_minimal_unembeddable, enumerate_table_graphs, MinimalConfig};
use ks_core::embed::{check_embeddable, verify_embedding, EmbedConfig, EmbedStatus, Vec3};
use ks_core::graph::{canonical_form, is_010_colorable, is_canonical, pair_count, Graph};
use ks_core::og::{OgConfig, OgPropagator, UnembeddableLibrary, BUNDLED_LIBRARY, DEFAULT_MAX_LIBRARY_ORDER};
use ks_core::pipeline::{peak_rss_kib, run_pipeline, verify_run, PipelineConfig, PipelineReport, RunOptions};
use ks_core::sat::{solve_all, ProofSink, SolverConfig};
use ks_core::verify::{run_mutation_harness, verify_proof, Conclusion, ProofContext};
use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ENCODER_ORDERS: [usize; 3] = [6, 10, 15];
const ORACLE_MAX_ORDER: usize = 6;
const ISO_CLASSES: [usize; 6] = [1, 2, 4, 11, 34, 156];
const TABLE3_LOW: (usize, usize) = (164, 0);
const TABLE3_ORDER10: (usize, usize) = (563, 2);
const TABLE3_ORDER11: (usize, usize) = (3257, 5);
const BOUND_ORDERS: std::ops::RangeInclusive<usize> = 4..=17;
const PROOF_ROUNDTRIP_MAX_ORDER: usize = 15;
const MUTANTS: usize = 600;
const MUTATION_SEED: u64 = 0xbad5eed;
const CNC_ORDER: usize = 14;
const CNC_CUTOFF: usize = 16;
const CNC_JOBS: usize = 4;
const RESPLIT_BUDGET: u64 = 1 << 20;
const VERIFIER_RSS_CAP_KIB: u64 = 4 << 20;
const EMBED_TOL: f64 = 1e-6;
const ROTATIONS: usize = 10;
const RANDOM_COLOR_GRAPHS: usize = 1000;
const COLOR_SEED: u64 = 7;

const CHILD_VERIFY: &str = "KS_ACCEPTANCE_VERIFY_DIR";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    });
    println!(
        "criterion {id} {} {name}: {} [{:.1}s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        start.elapsed().as_secs_f64()
    );
    o.pass
}

fn bundled_library() -> UnembeddableLibrary {
    UnembeddableLibrary::parse(BUNDLED_LIBRARY, DEFAULT_MAX_LIBRARY_ORDER).expect("bundled library parses")
}

fn encoder_counts() -> Outcome {
    let mut bad = Vec::new();
    for n in ENCODER_ORDERS {
        let opts = EncodeOptions {
            truncate: false,
            ..EncodeOptions::ks()
        };
        let inst = assemble(n, &opts).unwrap();
        let expect = [
            (Family::TriangleDefs, 4 * binomial(n, 3)),
            (Family::Squarefree, 3 * binomial(n, 4)),
            (Family::MinDegree, n * binomial(n - 1, 2)),
            (Family::TriangleMembership, n),
            (Family::Noncolorability, 1 << n),
        ];
        for (fam, want) in expect {
            let got = inst.family_count(fam).unwrap_or(0);
            if got != want {
                bad.push(format!("n={n} {}: {got} != {want}", fam.name()));
            }
        }
    }
    if bad.is_empty() {
        outcome(true, format!("all five families exact for n in {ENCODER_ORDERS:?}"))
    } else {
        outcome(false, bad.join("; "))
    }
}

fn canonicity_oracle() -> Outcome {
    let mut counts = Vec::new();
    for n in 1..=ORACLE_MAX_ORDER {
        let perms = all_perms(n);
        let mut reps = BTreeSet::new();
        for code in 0..(1u64 << pair_count(n)) {
            let g = graph_from_code(n, code);
            let brute = brute_min_key(&g, &perms) == lex_key(&g);
            if is_canonical(&g).is_canonical() != brute {
                return outcome(false, format!("disagreement at {}", g.to_graph6()));
            }
            if brute {
                reps.insert(code);
                if n >= 2 && !is_canonical(&g.parent().unwrap()).is_canonical() {
                    return outcome(false, format!("parent of {} not canonical", g.to_graph6()));
                }
            }
        }
        counts.push(reps.len());
    }
    let want = &ISO_CLASSES[..ORACLE_MAX_ORDER];
    outcome(counts == want, format!("canonical counts {counts:?}, isomorphism classes {want:?}"))
}

fn isomorphic(a: &Graph, b: &Graph) -> bool {
    canonical_form(a).0 == canonical_form(b).0
}

fn table3(max_order: usize, jobs: usize) -> Outcome {
    let cfg = MinimalConfig {
        min_order: 4,
        max_order,
        jobs,
        ..MinimalConfig::default()
    };
    let rep = match enumerate_minimal_unembeddable(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let low_rows: Vec<_> = rep.rows.iter().filter(|r| r.order <= 9).collect();
    let low = (
        low_rows.iter().map(|r| r.enumerated).sum::<usize>(),
        low_rows.iter().map(|r| r.minimal.len()).sum::<usize>(),
    );
    let row = |k: usize| rep.rows.iter().find(|r| r.order == k).unwrap();
    let r10 = row(10);
    let got10 = (r10.enumerated, r10.minimal.len());
    let pair_distinct = r10.minimal.len() == 2 && !isomorphic(&r10.minimal[0], &r10.minimal[1]);
    let bundled = bundled_library();
    let pair_matches = r10
        .minimal
        .iter()
        .all(|g| bundled.graphs().iter().any(|h| h.order() == 10 && isomorphic(g, h)));
    let mut detail = format!(
        "4-9: {}/{} (want {}/{}), 10: {}/{} (want {}/{}); order-10 pair {}",
        low.0,
        low.1,
        TABLE3_LOW.0,
        TABLE3_LOW.1,
        got10.0,
        got10.1,
        TABLE3_ORDER10.0,
        TABLE3_ORDER10.1,
        r10.minimal.iter().map(|g| g.to_graph6()).collect::<Vec<_>>().join(" ")
    );
    let mut pass = low == TABLE3_LOW && got10 == TABLE3_ORDER10 && pair_distinct && pair_matches;
    if max_order >= 11 {
        let r11 = row(11);
        let got11 = (r11.enumerated, r11.minimal.len());
        detail.push_str(&format!("; 11: {}/{} (want {}/{})", got11.0, got11.1, TABLE3_ORDER11.0, TABLE3_ORDER11.1));
        pass &= got11 == TABLE3_ORDER11;
    }
    outcome(pass, detail)
}

fn pipeline_config(n: usize, cutoff: usize, jobs: usize, budget: Option<u64>, verify: bool) -> PipelineConfig {
    PipelineConfig {
        run: RunOptions::new(n),
        cnc: CncConfig {
            cutoff,
            jobs,
            proof_budget: budget,
            ..CncConfig::default()
        },
        embed: EmbedConfig::default(),
        verify,
    }
}

struct BoundRun {
    order: usize,
    report: PipelineReport,
}

fn lower_bound(root: &Path, runs: &mut Vec<BoundRun>) -> Outcome {
    let lib = bundled_library();
    let mut notes = Vec::new();
    let mut pass = true;
    for n in BOUND_ORDERS {
        let rep = match run_pipeline(&pipeline_config(n, 1, 1, None, true), &lib, &root.join(format!("n{n}"))) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("n={n}: {e}")),
        };
        let embeddable = rep.embed.iter().filter(|r| r.status == EmbedStatus::Embeddable).count();
        let check_ok = rep.check.as_ref().is_some_and(|c| {
            c.accepted() && c.candidates.conclusion == Conclusion::NoKsGraph { order: n }
        });
        pass &= embeddable == 0 && check_ok && rep.conclusion == Conclusion::NoKsGraph { order: n };
        notes.push(format!("{n}:{}c/{:.1}s", rep.cnc.candidates.len(), rep.seconds));
        runs.push(BoundRun { order: n, report: rep });
        if !pass {
            break;
        }
    }
    let last = *BOUND_ORDERS.end();
    let head = if pass {
        format!("no embeddable candidate for n <= {last}, so order >= {}", last + 1)
    } else {
        "bound not established".to_string()
    };
    outcome(pass, format!("{head}; {}", notes.join(" ")))
}

fn proof_roundtrip(runs: &[BoundRun]) -> Outcome {
    let small: Vec<&BoundRun> = runs.iter().filter(|r| r.order <= PROOF_ROUNDTRIP_MAX_ORDER).collect();
    let expected = BOUND_ORDERS.filter(|&n| n <= PROOF_ROUNDTRIP_MAX_ORDER).count();
    let accepted = small
        .iter()
        .filter(|r| r.report.check.as_ref().is_some_and(|c| c.accepted() && c.proofs_accepted == c.cubes))
        .count();
    // a fixture with all three witness kinds: orderly generation, a
    // triangle-only library and unblocked candidates
    let inst = assemble(8, &EncodeOptions::table3()).unwrap();
    let lib = UnembeddableLibrary::from_graphs(vec![Graph::complete(3).unwrap()]).unwrap();
    let mut og = OgPropagator::new(&inst.map, &lib, OgConfig::default());
    let mut sink = ProofSink::memory();
    let out = solve_all(&inst.formula, &inst.map, &[], &mut og, &mut sink, &SolverConfig::default()).unwrap();
    let (proof, witness) = sink.take_memory();
    let cands: Vec<String> = out.candidates.iter().map(|g| g.to_graph6()).collect();
    let ctx = ProofContext {
        formula: &inst.formula,
        map: &inst.map,
        cube: &[],
        library: &lib,
        candidates: &cands,
    };
    let base = verify_proof(&ctx, proof.as_bytes(), witness.as_bytes()).unwrap();
    let kinds: BTreeSet<&str> = witness.lines().filter_map(|l| l.split_whitespace().nth(2)).collect();
    let rep = run_mutation_harness(&ctx, &proof, &witness, MUTANTS, MUTATION_SEED);
    let per_kind: Vec<String> = rep
        .counts
        .iter()
        .map(|(k, (g, r))| format!("{k:?} {r}/{g}"))
        .collect();
    let pass = small.len() == expected
        && accepted == expected
        && base.accepted()
        && kinds.len() == 3
        && rep.generated() >= 500
        && rep.rejected() == rep.generated();
    outcome(
        pass,
        format!(
            "{accepted}/{expected} runs with n <= {PROOF_ROUNDTRIP_MAX_ORDER} certified; fixture {} with records {kinds:?}; \
             mutants rejected {}/{} ({:.1}%): {}",
            if base.accepted() { "accepted" } else { "rejected" },
            rep.rejected(),
            rep.generated(),
            100.0 * rep.rejected() as f64 / rep.generated().max(1) as f64,
            per_kind.join(", ")
        ),
    )
}

/// Verifies a run directory in a fresh process and returns (accepted, peak RSS).
fn verify_in_child(dir: &Path) -> Result<(bool, u64), String> {
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let out = Command::new(exe)
        .env(CHILD_VERIFY, dir)
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text
        .lines()
        .find(|l| l.starts_with("verify "))
        .ok_or_else(|| format!("no verdict from child: {}", String::from_utf8_lossy(&out.stderr)))?;
    let p: Vec<&str> = line.split_whitespace().collect();
    Ok((p[1] == "accepted", p[2].parse().map_err(|_| "bad rss".to_string())?))
}

fn child_verify(dir: &str) {
    let check = verify_run(Path::new(dir), &EmbedConfig::default(), 1);
    let accepted = check.as_ref().is_ok_and(|c| c.accepted());
    if let Err(e) = &check {
        eprintln!("{e}");
    }
    println!(
        "verify {} {}",
        if accepted { "accepted" } else { "rejected" },
        peak_rss_kib().unwrap_or(u64::MAX)
    );
}

fn cnc_equivalence(root: &Path) -> Outcome {
    let lib = bundled_library();
    let run = |name: &str, cutoff, jobs, budget| {
        let dir = root.join(name);
        run_pipeline(&pipeline_config(CNC_ORDER, cutoff, jobs, budget, false), &lib, &dir).map(|r| (dir, r))
    };
    let runs = (|| {
        Ok::<_, ks_core::pipeline::PipelineError>([
            run("seq", 1, 1, None)?,
            run("cubes-seq", CNC_CUTOFF, 1, None)?,
            run("cubes-par", CNC_CUTOFF, CNC_JOBS, None)?,
            run("resplit", 1, CNC_JOBS, Some(RESPLIT_BUDGET))?,
        ])
    })();
    let [seq, cseq, cpar, split] = match runs {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let read = |dir: &Path, f: &str| fs::read(dir.join(f)).unwrap_or_default();
    let same_candidates = [&cseq, &cpar, &split].iter().all(|r| r.1.cnc.candidates == seq.1.cnc.candidates);
    let same_manifest = read(&cseq.0, "manifest.txt") == read(&cpar.0, "manifest.txt");
    let same_proofs = cpar.1.cnc.entries.iter().all(|e| {
        e.files
            .as_ref()
            .is_some_and(|(p, w, c)| [p, w, c].iter().all(|f| read(&cseq.0, &f.to_string_lossy()) == read(&cpar.0, &f.to_string_lossy())))
    });
    let leaves = cpar.1.cnc.entries.len();
    let mut verdicts = Vec::new();
    let mut verified = true;
    for dir in [&cpar.0, &split.0] {
        match verify_in_child(dir) {
            Ok((ok, rss)) => {
                verified &= ok && rss <= VERIFIER_RSS_CAP_KIB;
                verdicts.push(format!("{} {} at {} MiB", dir.file_name().unwrap().to_string_lossy(), if ok { "verified" } else { "rejected" }, rss / 1024));
            }
            Err(e) => {
                verified = false;
                verdicts.push(e);
            }
        }
    }
    let resplits = split.1.cnc.resplits;
    let pass = same_candidates && same_manifest && same_proofs && leaves == CNC_CUTOFF && resplits >= 1 && verified;
    outcome(
        pass,
        format!(
            "{leaves} cubes; candidates equal {same_candidates}; manifests equal {same_manifest}; proofs equal {same_proofs}; \
             {resplits} resplits under {RESPLIT_BUDGET} bytes ({} cubes); {}",
            split.1.cnc.entries.len(),
            verdicts.join(", ")
        ),
    )
}

fn rotation_stable(g: &Graph, e: &[Vec3], rng: &mut ChaCha8Rng) -> bool {
    (0..ROTATIONS).all(|_| {
        let axis = Vec3::new(rng.gen(), rng.gen(), rng.gen());
        let rot = Rotation3::new(axis * rng.gen_range(0.0..6.0));
        let turned: Vec<Vec3> = e.iter().map(|v| rot * v).collect();
        verify_embedding(g, &turned, EMBED_TOL)
    })
}

fn embeddability_truths() -> Outcome {
    let cfg = EmbedConfig::default();
    let status = |g: &Graph| check_embeddable(g, &cfg).map(|v| v.status).ok();
    let k3 = Graph::complete(3).unwrap();
    let c4 = Graph::cycle(4).unwrap();
    let lib = bundled_library();
    let tens: Vec<&Graph> = lib.graphs().iter().filter(|g| g.order() == 10).collect();
    let mut notes = vec![
        format!("K3 {:?}", status(&k3)),
        format!("C4 {:?}", status(&c4)),
    ];
    let mut pass = status(&k3) == Some(EmbedStatus::Embeddable) && status(&c4) == Some(EmbedStatus::Unembeddable);
    for g in &tens {
        let s = status(g);
        pass &= s == Some(EmbedStatus::Unembeddable);
        notes.push(format!("{} {s:?}", g.to_graph6()));
    }
    pass &= tens.len() == 2;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut samples = vec![k3];
    for n in 5..=7 {
        samples.extend(enumerate_table_graphs(n).unwrap());
    }
    let mut found = 0;
    for g in &samples {
        if let Ok(v) = check_embeddable(g, &cfg) {
            if let Some(e) = v.embedding {
                found += 1;
                if !(verify_embedding(g, &e, EMBED_TOL) && rotation_stable(g, &e, &mut rng)) {
                    pass = false;
                    notes.push(format!("embedding of {} fails", g.to_graph6()));
                }
            }
        }
    }
    notes.push(format!("{found} embeddings verified at tol {EMBED_TOL:e} under {ROTATIONS} rotations each"));
    outcome(pass, notes.join("; "))
}

fn colorability_oracle() -> Outcome {
    let mut checked = 0;
    for n in 1..=ORACLE_MAX_ORDER {
        for code in 0..(1u64 << pair_count(n)) {
            let g = graph_from_code(n, code);
            if is_010_colorable(&g).is_colorable() != brute_colorable(&g) {
                return outcome(false, format!("disagreement at {}", g.to_graph6()));
            }
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(COLOR_SEED);
    for _ in 0..RANDOM_COLOR_GRAPHS {
        let n = rng.gen_range(7..=12);
        let p = rng.gen_range(0.2..0.9);
        let mut g = Graph::empty(n).unwrap();
        for j in 1..n {
            for i in 0..j {
                if rng.gen_bool(p) {
                    g.add_edge(i, j);
                }
            }
        }
        if is_010_colorable(&g).is_colorable() != brute_colorable(&g) {
            return outcome(false, format!("disagreement at {}", g.to_graph6()));
        }
    }
    let k4 = !is_010_colorable(&Graph::complete(4).unwrap()).is_colorable();
    let k3 = is_010_colorable(&Graph::complete(3).unwrap()).is_colorable();
    outcome(
        k4 && k3,
        format!("{checked} exhaustive and {RANDOM_COLOR_GRAPHS} random graphs agree; K4 noncolorable {k4}; K3 colorable {k3}"),
    )
}

fn main() {
    if let Ok(dir) = std::env::var(CHILD_VERIFY) {
        child_verify(&dir);
        return;
    }
    let root = tempfile::tempdir().expect("temporary directory");
    let mut results = HashMap::new();
    results.insert(1, criterion(1, "encoder clause counts", encoder_counts));
    results.insert(2, criterion(2, "canonicity oracle", canonicity_oracle));
    results.insert(3, criterion(3, "minimal unembeddable table", || table3(10, 1)));
    if std::env::var("KS_ACCEPTANCE_ORDER11").is_ok_and(|v| v == "1") {
        criterion(3, "minimal unembeddable table, order 11", || table3(11, 1));
    }
    let mut runs = Vec::new();
    results.insert(4, criterion(4, "lower bound by exhaustion", || lower_bound(&root.path().join("bound"), &mut runs)));
    results.insert(5, criterion(5, "proof round trip and mutation", || proof_roundtrip(&runs)));
    drop(runs);
    let _ = fs::remove_dir_all(root.path().join("bound"));
    results.insert(6, criterion(6, "cube-and-conquer equivalence and resplit", || cnc_equivalence(&root.path().join("cnc"))));
    results.insert(7, criterion(7, "embeddability truths", embeddability_truths));
    results.insert(8, criterion(8, "colorability oracle", colorability_oracle));
    let passed = results.values().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed < results.len() && std::env::var("KS_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
