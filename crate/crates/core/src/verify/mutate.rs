//! Mutation harness: corrupts a certificate in small ways and counts how
//! many corruptions the verifier rejects.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{verify_proof, ProofContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutantKind {
    /// Negates one literal of one proof line.
    FlipLiteral,
    /// Removes one proof line.
    DropLine,
    /// Exchanges the payloads of two witness records with different content.
    SwapWitness,
}

impl fmt::Display for MutantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MutantKind::FlipLiteral => "flip",
            MutantKind::DropLine => "drop",
            MutantKind::SwapWitness => "swap",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct MutationReport {
    /// Per kind: (generated, rejected).
    pub counts: std::collections::BTreeMap<MutantKind, (usize, usize)>,
    /// Descriptions of accepted mutants.
    pub survivors: Vec<String>,
}

impl MutationReport {
    pub fn generated(&self) -> usize {
        self.counts.values().map(|c| c.0).sum()
    }

    pub fn rejected(&self) -> usize {
        self.counts.values().map(|c| c.1).sum()
    }

    pub fn merge(&mut self, other: MutationReport) {
        for (k, (g, r)) in other.counts {
            let e = self.counts.entry(k).or_default();
            e.0 += g;
            e.1 += r;
        }
        self.survivors.extend(other.survivors);
    }
}

fn flip(line: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let toks: Vec<&str> = line.split_ascii_whitespace().collect();
    let lit_pos: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| t.parse::<i64>().map_or(false, |v| v != 0))
        .map(|(i, _)| i)
        .collect();
    let &pos = lit_pos.choose(rng)?;
    let v: i64 = toks[pos].parse().unwrap();
    let neg = (-v).to_string();
    let out: Vec<&str> = toks.iter().enumerate().map(|(i, t)| if i == pos { neg.as_str() } else { t }).collect();
    Some(out.join(" "))
}

fn payload(rec: &str) -> (&str, &str) {
    let mut it = rec.splitn(3, ' ');
    let s = it.next().unwrap_or("");
    let seq = it.next().unwrap_or("");
    let head = &rec[..s.len() + 1 + seq.len()];
    (head, it.next().unwrap_or(""))
}

/// Generates `count` mutants round-robin over the kinds (swaps only when two
/// distinct records exist) and verifies each one.
pub fn run_mutation_harness(ctx: &ProofContext, proof: &str, witness: &str, count: usize, seed: u64) -> MutationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines: Vec<&str> = proof.lines().collect();
    let records: Vec<&str> = witness.lines().collect();
    let with_lits: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].trim() != "0").collect();
    let distinct = records.iter().map(|r| payload(r).1).collect::<std::collections::HashSet<_>>().len();
    let kinds: Vec<MutantKind> = if distinct >= 2 {
        vec![MutantKind::FlipLiteral, MutantKind::DropLine, MutantKind::SwapWitness]
    } else {
        vec![MutantKind::FlipLiteral, MutantKind::DropLine]
    };
    let mut report = MutationReport::default();
    for m in 0..count {
        let kind = kinds[m % kinds.len()];
        let (p, w, what) = match kind {
            MutantKind::FlipLiteral => {
                let Some(&i) = with_lits.choose(&mut rng) else { continue };
                let Some(new) = flip(lines[i], &mut rng) else { continue };
                let mut l = lines.clone();
                l[i] = &new;
                (l.join("\n") + "\n", witness.to_string(), format!("flip in line {}: {new}", i + 1))
            }
            MutantKind::DropLine => {
                if lines.is_empty() {
                    continue;
                }
                let i = rng.gen_range(0..lines.len());
                let mut l = lines.clone();
                l.remove(i);
                (l.join("\n") + "\n", witness.to_string(), format!("drop line {}: {}", i + 1, lines[i]))
            }
            MutantKind::SwapWitness => {
                let (a, b) = loop {
                    let a = rng.gen_range(0..records.len());
                    let b = rng.gen_range(0..records.len());
                    if payload(records[a]).1 != payload(records[b]).1 {
                        break (a, b);
                    }
                };
                let mut r: Vec<String> = records.iter().map(|s| s.to_string()).collect();
                r[a] = format!("{} {}", payload(records[a]).0, payload(records[b]).1);
                r[b] = format!("{} {}", payload(records[b]).0, payload(records[a]).1);
                (proof.to_string(), r.join("\n") + "\n", format!("swap records {} and {}", a + 1, b + 1))
            }
        };
        let accepted = verify_proof(ctx, p.as_bytes(), w.as_bytes()).map_or(false, |v| v.accepted());
        let e = report.counts.entry(kind).or_default();
        e.0 += 1;
        if accepted {
            report.survivors.push(what);
        } else {
            e.1 += 1;
        }
    }
    report
}
