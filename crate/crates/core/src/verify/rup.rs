//! Clause database with unit propagation for reverse-unit-propagation checks.
//!
//! Written separately from the search solver so the checker does not share
//! its propagation code.

use std::collections::HashMap;

use crate::cnf::Lit;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Meta {
    start: u32,
    len: u32,
    live: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deletion {
    Removed,
    /// The clause is the reason for a top-level assignment and is kept.
    KeptReason,
    Missing,
}

/// Literal encoding local to this module: `2*(v-1) + negative`.
fn enc(l: Lit) -> u32 {
    ((l.unsigned_abs() - 1) << 1) | (l < 0) as u32
}

fn clause_hash(sorted: &[u32]) -> u64 {
    sorted.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &l| {
        (h ^ l as u64).wrapping_mul(0x0000_0100_0000_01b3).rotate_left(7)
    })
}

#[derive(Debug, Default)]
pub struct UnitDb {
    arena: Vec<u32>,
    clauses: Vec<Meta>,
    free_ids: Vec<u32>,
    watches: Vec<Vec<u32>>,
    index: HashMap<u64, Vec<u32>>,
    /// Per variable: 1 true, -1 false, 0 unassigned.
    vals: Vec<i8>,
    reason: Vec<u32>,
    trail: Vec<u32>,
    qhead: usize,
    inconsistent: bool,
    dead_words: usize,
    live_words: usize,
    compact_threshold: usize,
    pub ignored_deletions: u64,
}

impl UnitDb {
    pub fn new(var_count: usize) -> Self {
        UnitDb {
            watches: vec![Vec::new(); 2 * var_count],
            vals: vec![0; var_count],
            reason: vec![NONE; var_count],
            compact_threshold: 1 << 20,
            ..Self::default()
        }
    }

    pub fn var_count(&self) -> usize {
        self.vals.len()
    }

    /// True once the database propagates to a conflict on its own.
    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    pub fn live_clauses(&self) -> usize {
        self.clauses.iter().filter(|m| m.live).count()
    }

    fn value(&self, l: u32) -> i8 {
        let v = self.vals[(l >> 1) as usize];
        if l & 1 == 1 {
            -v
        } else {
            v
        }
    }

    fn assign(&mut self, l: u32, reason: u32) {
        let var = (l >> 1) as usize;
        self.vals[var] = if l & 1 == 1 { -1 } else { 1 };
        self.reason[var] = reason;
        self.trail.push(l);
    }

    fn lits(&self, id: u32) -> &[u32] {
        let m = self.clauses[id as usize];
        &self.arena[m.start as usize..(m.start + m.len) as usize]
    }

    /// Propagates the trail; returns true on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let falsified = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[falsified as usize]);
            let mut i = 0;
            let mut conflict = false;
            while i < ws.len() {
                let id = ws[i];
                let m = self.clauses[id as usize];
                if !m.live {
                    ws.swap_remove(i);
                    continue;
                }
                let s = m.start as usize;
                if self.arena[s] == falsified {
                    self.arena.swap(s, s + 1);
                }
                let first = self.arena[s];
                if self.value(first) == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..m.len as usize {
                    let l = self.arena[s + k];
                    if self.value(l) != -1 {
                        self.arena.swap(s + 1, s + k);
                        self.watches[l as usize].push(id);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if self.value(first) == 0 {
                    self.assign(first, id);
                    i += 1;
                } else {
                    conflict = true;
                    break;
                }
            }
            let stash = std::mem::replace(&mut self.watches[falsified as usize], ws);
            self.watches[falsified as usize].extend(stash);
            if conflict {
                return true;
            }
        }
        false
    }

    fn backtrack(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().unwrap();
            let var = (l >> 1) as usize;
            self.vals[var] = 0;
            self.reason[var] = NONE;
        }
        self.qhead = self.qhead.min(len);
    }

    /// True iff assuming the negation of `clause` propagates to a conflict.
    pub fn check_rup(&mut self, clause: &[Lit]) -> bool {
        if self.inconsistent {
            return true;
        }
        let top = self.trail.len();
        let mut conflict = false;
        for &l in clause {
            let c = enc(l);
            match self.value(c) {
                1 => {
                    conflict = true;
                    break;
                }
                0 => self.assign(c ^ 1, NONE),
                _ => {}
            }
        }
        if !conflict {
            conflict = self.propagate();
        }
        self.backtrack(top);
        self.qhead = top;
        conflict
    }

    /// Literals true after assuming `assumptions` and propagating, or `None`
    /// on conflict. The database is left unchanged.
    pub fn implied(&mut self, assumptions: &[Lit]) -> Option<Vec<Lit>> {
        if self.inconsistent {
            return None;
        }
        let top = self.trail.len();
        let mut conflict = false;
        for &l in assumptions {
            let c = enc(l);
            match self.value(c) {
                -1 => {
                    conflict = true;
                    break;
                }
                0 => self.assign(c, NONE),
                _ => {}
            }
        }
        if !conflict {
            conflict = self.propagate();
        }
        let out = (!conflict).then(|| {
            self.trail
                .iter()
                .map(|&c| {
                    let v = (c >> 1) as Lit + 1;
                    if c & 1 == 1 {
                        -v
                    } else {
                        v
                    }
                })
                .collect()
        });
        self.backtrack(top);
        self.qhead = top;
        out
    }

    /// Inserts a clause (literals in range) and propagates at top level.
    pub fn add(&mut self, clause: &[Lit]) {
        let mut lits: Vec<u32> = clause.iter().map(|&l| enc(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        let tautology = lits.windows(2).any(|w| w[0] ^ 1 == w[1]);
        let id = self.store(&lits);
        if tautology || self.inconsistent {
            return;
        }
        if lits.is_empty() {
            self.inconsistent = true;
            return;
        }
        // non-false literals first, true before unassigned
        let s = self.clauses[id as usize].start as usize;
        let len = lits.len();
        let rank = |db: &UnitDb, l: u32| match db.value(l) {
            1 => 0,
            0 => 1,
            _ => 2,
        };
        for slot in 0..len.min(2) {
            let best = (slot..len).min_by_key(|&k| rank(self, self.arena[s + k])).unwrap();
            self.arena.swap(s + slot, s + best);
        }
        let (w0, w1) = (self.arena[s], if len > 1 { self.arena[s + 1] } else { NONE });
        if len > 1 {
            self.watches[w0 as usize].push(id);
            self.watches[w1 as usize].push(id);
        }
        match self.value(w0) {
            1 => {}
            -1 => self.inconsistent = true,
            _ => {
                if len == 1 || self.value(w1) == -1 {
                    self.assign(w0, id);
                    if self.propagate() {
                        self.inconsistent = true;
                    }
                }
            }
        }
    }

    fn store(&mut self, lits: &[u32]) -> u32 {
        let start = self.arena.len() as u32;
        self.arena.extend_from_slice(lits);
        self.live_words += lits.len();
        let meta = Meta {
            start,
            len: lits.len() as u32,
            live: true,
        };
        let id = match self.free_ids.pop() {
            Some(id) => {
                self.clauses[id as usize] = meta;
                id
            }
            None => {
                self.clauses.push(meta);
                (self.clauses.len() - 1) as u32
            }
        };
        self.index.entry(clause_hash(lits)).or_default().push(id);
        id
    }

    /// Removes one copy of `clause`.
    pub fn delete(&mut self, clause: &[Lit]) -> Deletion {
        let mut lits: Vec<u32> = clause.iter().map(|&l| enc(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        let h = clause_hash(&lits);
        let Some(ids) = self.index.get(&h) else {
            return Deletion::Missing;
        };
        let found = ids.iter().position(|&id| {
            let mut have = self.lits(id).to_vec();
            have.sort_unstable();
            have == lits
        });
        let Some(pos) = found else {
            return Deletion::Missing;
        };
        let id = ids[pos];
        let is_reason = self.lits(id).iter().any(|&l| {
            let var = (l >> 1) as usize;
            self.reason[var] == id && self.value(l) == 1
        });
        if is_reason {
            self.ignored_deletions += 1;
            return Deletion::KeptReason;
        }
        let ids = self.index.get_mut(&h).unwrap();
        ids.swap_remove(pos);
        if ids.is_empty() {
            self.index.remove(&h);
        }
        let m = &mut self.clauses[id as usize];
        m.live = false;
        self.dead_words += m.len as usize;
        self.live_words -= m.len as usize;
        if self.dead_words > self.live_words && self.dead_words > self.compact_threshold {
            self.compact();
        }
        Deletion::Removed
    }

    /// Drops deleted clauses from the arena and rebuilds the watch lists.
    fn compact(&mut self) {
        let mut arena = Vec::with_capacity(self.live_words);
        for w in &mut self.watches {
            w.clear();
        }
        for id in 0..self.clauses.len() {
            let m = self.clauses[id];
            if !m.live {
                if m.len != u32::MAX {
                    self.free_ids.push(id as u32);
                    self.clauses[id].len = u32::MAX;
                }
                continue;
            }
            let start = arena.len() as u32;
            arena.extend_from_slice(&self.arena[m.start as usize..(m.start + m.len) as usize]);
            self.clauses[id].start = start;
            let lits = &arena[start as usize..];
            let tautology = {
                let mut s = lits.to_vec();
                s.sort_unstable();
                s.windows(2).any(|w| w[0] ^ 1 == w[1])
            };
            if m.len > 1 && !tautology {
                self.watches[lits[0] as usize].push(id as u32);
                self.watches[lits[1] as usize].push(id as u32);
            }
        }
        self.arena = arena;
        self.dead_words = 0;
    }
}
