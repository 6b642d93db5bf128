//! Run configuration: a flat `key=value` file whose keys mirror the long
//! flags, with flags taking precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Graph order
    #[arg(short = 'n', long = "order", global = true)]
    pub n: Option<usize>,
    /// Minimum vertex degree
    #[arg(long, global = true)]
    pub min_degree: Option<usize>,
    /// Emit the noncolorability family over all vertex subsets
    #[arg(long, global = true)]
    pub no_truncate: bool,
    /// Cube file (one "a <lits> 0" line per cube)
    #[arg(long, global = true, value_name = "FILE")]
    pub cubes: Option<PathBuf>,
    /// Number of cubes to split into
    #[arg(long, global = true, value_name = "K")]
    pub cutoff: Option<usize>,
    /// Worker threads
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Proof size per cube before it is resplit
    #[arg(long, global = true, value_name = "BYTES")]
    pub proof_budget: Option<u64>,
    /// Conflict limit per solver call
    #[arg(long, global = true, value_name = "N")]
    pub conflict_budget: Option<u64>,
    /// External SMT solver command line
    #[arg(long, global = true, value_name = "CMD")]
    pub smt_cmd: Option<String>,
    /// Unembeddable-subgraph library
    #[arg(long, global = true, value_name = "FILE")]
    pub library: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for the numeric embedding search
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
    /// Configuration file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub order: Option<usize>,
    pub min_degree: usize,
    pub truncate: bool,
    pub cubes: Option<PathBuf>,
    pub cutoff: usize,
    pub jobs: usize,
    pub proof_budget: u64,
    pub conflict_budget: Option<u64>,
    pub smt_cmd: String,
    pub library: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            order: None,
            min_degree: 3,
            truncate: true,
            cubes: None,
            cutoff: 1,
            jobs: 1,
            proof_budget: 256 << 20,
            conflict_budget: None,
            smt_cmd: "z3 -smt2".into(),
            library: None,
            out: PathBuf::from("run"),
            seed: 0x5eed,
        }
    }
}

const KEYS: &[&str] = &[
    "n",
    "min-degree",
    "truncate",
    "cubes",
    "cutoff",
    "jobs",
    "proof-budget",
    "conflict-budget",
    "smt-cmd",
    "library",
    "out",
    "seed",
];

fn parse_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut kv = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').with_context(|| format!("config line {}: expected key=value", i + 1))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            bail!("config line {}: unknown key {k}", i + 1);
        }
        kv.insert(k, v.trim().to_string());
    }
    Ok(kv)
}

fn value<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    kv.get(key)
        .map(|v| v.parse::<T>().map_err(|_| anyhow::anyhow!("config: bad value {v:?} for {key}")))
        .transpose()
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let kv = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                parse_file(&text)?
            }
            None => BTreeMap::new(),
        };
        Self::merge(args, &kv)
    }

    fn merge(args: &RunArgs, kv: &BTreeMap<String, String>) -> Result<Self> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            order: args.n.or(value(kv, "n")?),
            min_degree: args.min_degree.or(value(kv, "min-degree")?).unwrap_or(d.min_degree),
            truncate: if args.no_truncate {
                false
            } else {
                value(kv, "truncate")?.unwrap_or(d.truncate)
            },
            cubes: args.cubes.clone().or(value(kv, "cubes")?),
            cutoff: args.cutoff.or(value(kv, "cutoff")?).unwrap_or(d.cutoff),
            jobs: args.jobs.or(value(kv, "jobs")?).unwrap_or(d.jobs),
            proof_budget: args.proof_budget.or(value(kv, "proof-budget")?).unwrap_or(d.proof_budget),
            conflict_budget: args.conflict_budget.or(value(kv, "conflict-budget")?),
            smt_cmd: args.smt_cmd.clone().or(value(kv, "smt-cmd")?).unwrap_or(d.smt_cmd),
            library: args.library.clone().or(value(kv, "library")?),
            out: args.out.clone().or(value(kv, "out")?).unwrap_or(d.out),
            seed: args.seed.or(value(kv, "seed")?).unwrap_or(d.seed),
        };
        if cfg.cutoff == 0 || cfg.jobs == 0 || cfg.proof_budget == 0 || cfg.conflict_budget == Some(0) {
            bail!("cutoff, jobs and budgets must be positive");
        }
        if cfg.smt_cmd.split_whitespace().next().is_none() {
            bail!("empty SMT solver command");
        }
        Ok(cfg)
    }

    pub fn order(&self) -> Result<usize> {
        self.order.context("the graph order is required (-n)")
    }

    /// Order for the candidate search, which needs at least 4 vertices.
    pub fn ks_order(&self) -> Result<usize> {
        let n = self.order()?;
        if n < 4 {
            bail!("order {n} is below 4");
        }
        Ok(n)
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        Path::new(&self.out).join(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let kv = parse_file("# run\nn = 12\njobs=4\ntruncate=false\nsmt_cmd=cvc5 --lang smt2\n").unwrap();
        let args = RunArgs {
            jobs: Some(2),
            ..RunArgs::default()
        };
        let cfg = RunConfig::merge(&args, &kv).unwrap();
        assert_eq!(cfg.order, Some(12));
        assert_eq!(cfg.jobs, 2);
        assert!(!cfg.truncate);
        assert_eq!(cfg.smt_cmd, "cvc5 --lang smt2");
        assert_eq!(cfg.cutoff, 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_file("colour=red\n").is_err());
        assert!(parse_file("n\n").is_err());
        let kv = parse_file("n=ten\n").unwrap();
        assert!(RunConfig::merge(&RunArgs::default(), &kv).is_err());
        let zero = RunArgs {
            proof_budget: Some(0),
            ..RunArgs::default()
        };
        assert!(RunConfig::merge(&zero, &BTreeMap::new()).is_err());
        let small = RunConfig {
            order: Some(3),
            ..RunConfig::default()
        };
        assert!(small.ks_order().is_err());
    }
}
