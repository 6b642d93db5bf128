//! External SMT solver process client and model decoding.
//!
//! Model values may be decimals, rationals, negations or `root-obj` terms
//! (the k-th real root of a univariate polynomial in `x`).

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct SmtConfig {
    /// Program and leading arguments; the script path is appended.
    pub command: Vec<String>,
    pub timeout: Duration,
    /// SMT-LIB real literal used as the squared-separation margin.
    pub epsilon: String,
    /// Keep scripts here instead of a temporary directory.
    pub keep_dir: Option<PathBuf>,
}

impl Default for SmtConfig {
    fn default() -> Self {
        SmtConfig {
            command: vec!["z3".into(), "-smt2".into()],
            timeout: Duration::from_secs(600),
            epsilon: "(/ 1 100000000)".into(),
            keep_dir: None,
        }
    }
}

impl SmtConfig {
    /// Parses a whitespace-separated command line.
    pub fn with_command(cmd: &str) -> Self {
        SmtConfig {
            command: cmd.split_whitespace().map(String::from).collect(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SmtAnswer {
    Sat(HashMap<String, f64>),
    Unsat,
    /// Timeout, `unknown`, a crash or unparsable output.
    Unknown(String),
}

/// Writes `script` to a file, runs the solver on it and parses the answer.
pub fn run_smt(script: &str, name: &str, cfg: &SmtConfig) -> SmtAnswer {
    let Some((prog, args)) = cfg.command.split_first() else {
        return SmtAnswer::Unknown("empty solver command".into());
    };
    let tmp;
    let dir = match &cfg.keep_dir {
        Some(d) => {
            if let Err(e) = std::fs::create_dir_all(d) {
                return SmtAnswer::Unknown(format!("cannot create {}: {e}", d.display()));
            }
            d.clone()
        }
        None => match tempfile::tempdir() {
            Ok(t) => {
                tmp = t;
                tmp.path().to_path_buf()
            }
            Err(e) => return SmtAnswer::Unknown(format!("temporary directory: {e}")),
        },
    };
    let path = dir.join(format!("{name}.smt2"));
    if let Err(e) = std::fs::File::create(&path).and_then(|mut f| f.write_all(script.as_bytes())) {
        return SmtAnswer::Unknown(format!("cannot write {}: {e}", path.display()));
    }
    let mut child = match Command::new(prog)
        .args(args)
        .arg(&path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return SmtAnswer::Unknown(format!("cannot start {prog}: {e}")),
    };
    let mut stdout = child.stdout.take().expect("piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + cfg.timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(st)) => break Some(st),
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return SmtAnswer::Unknown(format!("waiting for solver: {e}")),
        }
    };
    let out = reader.join().unwrap_or_default();
    match status {
        None => SmtAnswer::Unknown(format!("timeout after {:?}", cfg.timeout)),
        Some(_) => parse_answer(&out),
    }
}

pub fn parse_answer(out: &str) -> SmtAnswer {
    let mut lines = out.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => SmtAnswer::Unsat,
        Some("sat") => {
            let rest: Vec<&str> = lines.collect();
            match parse_model(&rest.join("\n")) {
                Ok(m) => SmtAnswer::Sat(m),
                Err(e) => SmtAnswer::Unknown(format!("unreadable model: {e}")),
            }
        }
        Some(other) => SmtAnswer::Unknown(other.to_string()),
        None => SmtAnswer::Unknown("no output".into()),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut atom = String::new();
    let flush = |atom: &mut String, stack: &mut Vec<Vec<Sexp>>| {
        if !atom.is_empty() {
            stack.last_mut().unwrap().push(Sexp::Atom(std::mem::take(atom)));
        }
    };
    for ch in text.chars() {
        match ch {
            '(' => {
                flush(&mut atom, &mut stack);
                stack.push(Vec::new());
            }
            ')' => {
                flush(&mut atom, &mut stack);
                let done = stack.pop().ok_or("unbalanced")?;
                stack.last_mut().ok_or("unbalanced ')'")?.push(Sexp::List(done));
            }
            c if c.is_whitespace() => flush(&mut atom, &mut stack),
            c => atom.push(c),
        }
    }
    flush(&mut atom, &mut stack);
    if stack.len() != 1 {
        return Err("unbalanced '('".into());
    }
    Ok(stack.pop().unwrap())
}

fn collect_defs(e: &Sexp, out: &mut HashMap<String, f64>) -> Result<(), String> {
    if let Sexp::List(items) = e {
        if let [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(sort), body] = items.as_slice() {
            if kw == "define-fun" && args.is_empty() && sort == "Real" {
                out.insert(name.clone(), eval_const(body)?);
                return Ok(());
            }
        }
        for it in items {
            collect_defs(it, out)?;
        }
    }
    Ok(())
}

pub fn parse_model(text: &str) -> Result<HashMap<String, f64>, String> {
    let mut out = HashMap::new();
    for e in parse_sexps(text)? {
        collect_defs(&e, &mut out)?;
    }
    Ok(out)
}

/// Univariate polynomial, coefficient of `x^k` at index `k`.
#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<f64>);

impl Poly {
    fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    fn trim(mut self) -> Self {
        while self.0.len() > 1 && *self.0.last().unwrap() == 0.0 {
            self.0.pop();
        }
        self
    }

    fn add(&self, o: &Poly) -> Poly {
        let mut c = vec![0.0; self.0.len().max(o.0.len())];
        for (i, v) in self.0.iter().enumerate() {
            c[i] += v;
        }
        for (i, v) in o.0.iter().enumerate() {
            c[i] += v;
        }
        Poly(c).trim()
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut c = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly(c).trim()
    }

    fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|v| v * s).collect()).trim()
    }

    fn as_const(&self) -> Option<f64> {
        (self.0.len() == 1).then(|| self.0[0])
    }

    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()).trim()
    }

    fn degree(&self) -> usize {
        self.0.len() - 1
    }

    /// Real roots in ascending order, located between the critical points.
    fn real_roots(&self) -> Vec<f64> {
        let d = self.degree();
        if d == 0 {
            return Vec::new();
        }
        let lead = *self.0.last().unwrap();
        if d == 1 {
            return vec![-self.0[0] / lead];
        }
        let bound = 1.0 + self.0[..d].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
        let mut pts = vec![-bound];
        pts.extend(self.derivative().real_roots().into_iter().filter(|r| r.abs() < bound));
        pts.push(bound);
        let mut roots = Vec::new();
        for w in pts.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let (flo, fhi) = (self.eval(lo), self.eval(hi));
            if flo == 0.0 {
                if roots.last().map_or(true, |&r: &f64| (r - lo).abs() > 1e-12) {
                    roots.push(lo);
                }
                continue;
            }
            if fhi == 0.0 || (flo < 0.0) == (fhi < 0.0) {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = self.eval(mid);
                if fm == 0.0 || mid == lo || mid == hi {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        if self.eval(bound) == 0.0 {
            roots.push(bound);
        }
        roots
    }
}

fn eval_poly(e: &Sexp) -> Result<Poly, String> {
    match e {
        Sexp::Atom(a) if a == "x" => Ok(Poly(vec![0.0, 1.0])),
        Sexp::Atom(a) => a.parse::<f64>().map(Poly::constant).map_err(|_| format!("bad number {a:?}")),
        Sexp::List(items) => {
            let (op, args) = match items.split_first() {
                Some((Sexp::Atom(op), args)) => (op.as_str(), args),
                _ => return Err("expected operator".into()),
            };
            if op == "root-obj" {
                let [p, Sexp::Atom(k)] = args else {
                    return Err("malformed root-obj".into());
                };
                let p = eval_poly(p)?;
                let k: usize = k.parse().map_err(|_| format!("bad root index {k:?}"))?;
                let roots = p.real_roots();
                let r = *roots
                    .get(k.wrapping_sub(1))
                    .ok_or_else(|| format!("root {k} of a polynomial with {} real roots", roots.len()))?;
                return Ok(Poly::constant(r));
            }
            let vals = args.iter().map(eval_poly).collect::<Result<Vec<_>, _>>()?;
            match (op, vals.as_slice()) {
                ("-", [a]) => Ok(a.scale(-1.0)),
                ("-", [a, rest @ ..]) => Ok(rest.iter().fold(a.clone(), |acc, b| acc.add(&b.scale(-1.0)))),
                ("+", vs) => Ok(vs.iter().fold(Poly::constant(0.0), |acc, b| acc.add(b))),
                ("*", vs) => Ok(vs.iter().fold(Poly::constant(1.0), |acc, b| acc.mul(b))),
                ("/", [a, b]) => {
                    let d = b.as_const().ok_or("division by a polynomial")?;
                    Ok(a.scale(1.0 / d))
                }
                ("^", [a, b]) => {
                    let k = b.as_const().ok_or("non-constant exponent")?;
                    let mut out = Poly::constant(1.0);
                    for _ in 0..k as usize {
                        out = out.mul(a);
                    }
                    Ok(out)
                }
                _ => Err(format!("unsupported term ({op} ...)")),
            }
        }
    }
}

fn eval_const(e: &Sexp) -> Result<f64, String> {
    eval_poly(e)?.as_const().ok_or_else(|| "value mentions x".into())
}
