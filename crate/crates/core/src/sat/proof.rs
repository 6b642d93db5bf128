//! DRAT text output with trusted lines and the witness sidecar.
//!
//! Proof lines: `l1 .. lk 0` (RUP addition), `d l1 .. lk 0` (deletion),
//! `t l1 .. lk 0` (trusted addition). The `s`-th trusted line (1-based) is
//! justified by the sidecar record starting with `s <s>`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::cnf::Lit;
use crate::graph::Permutation;

/// Evidence for a clause that is not derivable by unit propagation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// The clause blocks an order-`k` prefix; the permutation (of order `k`)
    /// maps it to a lex-smaller matrix.
    Noncanonical(Permutation),
    /// Library member `id` (given by its graph6 text) embeds via `injection`.
    Subgraph {
        id: usize,
        graph6: String,
        injection: Vec<usize>,
    },
    /// The clause blocks exactly this candidate.
    Candidate { graph6: String },
}

impl Justification {
    pub fn record(&self, seq: u64) -> String {
        match self {
            Justification::Noncanonical(p) => format!("s {seq} perm {p}"),
            Justification::Subgraph { id, graph6, injection } => {
                let mut s = format!("s {seq} subgraph {id} {graph6} {}", injection.len());
                for v in injection {
                    write!(s, " {}", v + 1).unwrap();
                }
                s
            }
            Justification::Candidate { graph6 } => format!("s {seq} candidate {graph6}"),
        }
    }
}

enum Target {
    Discard,
    Memory(Vec<u8>),
    Stream(BufWriter<Box<dyn Write + Send>>),
}

impl Target {
    fn write(&mut self, bytes: &[u8]) -> io::Result<()> {
        match self {
            Target::Discard => Ok(()),
            Target::Memory(v) => {
                v.extend_from_slice(bytes);
                Ok(())
            }
            Target::Stream(w) => w.write_all(bytes),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Target::Stream(w) => w.flush(),
            _ => Ok(()),
        }
    }

    fn take(&mut self) -> Vec<u8> {
        match self {
            Target::Memory(v) => std::mem::take(v),
            _ => Vec::new(),
        }
    }
}

pub struct ProofSink {
    proof: Target,
    witness: Target,
    bytes: u64,
    seq: u64,
    line: String,
}

impl ProofSink {
    /// Counts bytes but writes nothing.
    pub fn discard() -> Self {
        Self::with(Target::Discard, Target::Discard)
    }

    pub fn memory() -> Self {
        Self::with(Target::Memory(Vec::new()), Target::Memory(Vec::new()))
    }

    pub fn streams(proof: Box<dyn Write + Send>, witness: Box<dyn Write + Send>) -> Self {
        Self::with(
            Target::Stream(BufWriter::with_capacity(1 << 16, proof)),
            Target::Stream(BufWriter::new(witness)),
        )
    }

    pub fn files(proof: &Path, witness: &Path) -> io::Result<Self> {
        Ok(Self::streams(Box::new(File::create(proof)?), Box::new(File::create(witness)?)))
    }

    fn with(proof: Target, witness: Target) -> Self {
        ProofSink {
            proof,
            witness,
            bytes: 0,
            seq: 0,
            line: String::new(),
        }
    }

    /// Proof bytes emitted so far.
    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn trusted_count(&self) -> u64 {
        self.seq
    }

    fn emit(&mut self, prefix: &str, lits: impl IntoIterator<Item = Lit>) -> io::Result<()> {
        self.line.clear();
        self.line.push_str(prefix);
        for l in lits {
            write!(self.line, "{l} ").unwrap();
        }
        self.line.push_str("0\n");
        self.bytes += self.line.len() as u64;
        self.proof.write(self.line.as_bytes())
    }

    pub fn add(&mut self, lits: impl IntoIterator<Item = Lit>) -> io::Result<()> {
        self.emit("", lits)
    }

    pub fn delete(&mut self, lits: impl IntoIterator<Item = Lit>) -> io::Result<()> {
        self.emit("d ", lits)
    }

    /// Writes a trusted line and its sidecar record; returns the sequence number.
    pub fn trusted(&mut self, lits: impl IntoIterator<Item = Lit>, why: &Justification) -> io::Result<u64> {
        self.emit("t ", lits)?;
        self.seq += 1;
        let mut rec = why.record(self.seq);
        rec.push('\n');
        self.witness.write(rec.as_bytes())?;
        Ok(self.seq)
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.proof.flush()?;
        self.witness.flush()
    }

    /// Proof and witness text of a memory sink.
    pub fn take_memory(&mut self) -> (String, String) {
        let p = String::from_utf8(self.proof.take()).expect("ASCII proof");
        let w = String::from_utf8(self.witness.take()).expect("ASCII witness");
        (p, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_formats() {
        let mut s = ProofSink::memory();
        s.add([-1, 2]).unwrap();
        s.delete([3]).unwrap();
        let p = Permutation::new(vec![2, 1, 0]).unwrap();
        assert_eq!(s.trusted([1, 2, 3], &Justification::Noncanonical(p)).unwrap(), 1);
        let sub = Justification::Subgraph {
            id: 4,
            graph6: "Bw".into(),
            injection: vec![0, 2, 5],
        };
        s.trusted([-1], &sub).unwrap();
        s.add([]).unwrap();
        let bytes = s.bytes();
        let (proof, wit) = s.take_memory();
        assert_eq!(proof, "-1 2 0\nd 3 0\nt 1 2 3 0\nt -1 0\n0\n");
        assert_eq!(bytes, proof.len() as u64);
        assert_eq!(wit, "s 1 perm 3 3 2 1\ns 2 subgraph 4 Bw 3 1 3 6\n");
    }
}
