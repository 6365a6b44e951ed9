//! Backtracking search for structure-preserving maps.
//!
//! Variables are the elements of the source structure, values the elements
//! of the target. Before branching every domain is narrowed by node
//! consistency: an element occurring at position `i` of a source tuple may
//! only go to values occurring at position `i` of a target tuple with the
//! same equality pattern. During the search, assigning a variable
//! forward-checks every source tuple through it: fully assigned tuples are
//! tested, tuples with a single open variable prune that variable's domain.
//! Injective searches remove the chosen value from all open domains, and
//! relation-reflecting searches test every target tuple through the new
//! value whose entries all have preimages.
//!
//! Variable order is static: pinned variables first, then by descending
//! Gaifman degree, ties broken by carrier position. Values are tried in
//! carrier order, so the first solution found is deterministic.

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::structure::Structure;

const UNSET: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Requirements {
    pub injective: bool,
    pub reflect: bool,
    pub bijective: bool,
}

impl Requirements {
    pub const HOM: Self = Requirements {
        injective: false,
        reflect: false,
        bijective: false,
    };
    pub const MONO: Self = Requirements {
        injective: true,
        reflect: false,
        bijective: false,
    };
    pub const EMBEDDING: Self = Requirements {
        injective: true,
        reflect: true,
        bijective: false,
    };
    pub const ISO: Self = Requirements {
        injective: true,
        reflect: true,
        bijective: true,
    };
}

#[derive(Clone)]
struct Domains {
    words: usize,
    bits: Vec<u64>,
}

impl Domains {
    fn full(vars: usize, values: usize) -> Self {
        let words = values.div_ceil(64).max(1);
        let mut bits = vec![0u64; vars * words];
        for v in 0..vars {
            for x in 0..values {
                bits[v * words + x / 64] |= 1 << (x % 64);
            }
        }
        Domains { words, bits }
    }

    #[inline]
    fn row(&self, var: usize) -> &[u64] {
        &self.bits[var * self.words..(var + 1) * self.words]
    }

    #[inline]
    fn row_mut(&mut self, var: usize) -> &mut [u64] {
        &mut self.bits[var * self.words..(var + 1) * self.words]
    }

    #[inline]
    fn contains(&self, var: usize, x: usize) -> bool {
        self.bits[var * self.words + x / 64] >> (x % 64) & 1 == 1
    }

    #[inline]
    fn remove(&mut self, var: usize, x: usize) {
        self.bits[var * self.words + x / 64] &= !(1 << (x % 64));
    }

    fn is_empty(&self, var: usize) -> bool {
        self.row(var).iter().all(|&w| w == 0)
    }

    fn set_single(&mut self, var: usize, x: usize) {
        let row = self.row_mut(var);
        row.iter_mut().for_each(|w| *w = 0);
        row[x / 64] |= 1 << (x % 64);
    }

    fn values(&self, var: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.row(var).iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let bit = word.trailing_zeros() as usize;
                out.push(w * 64 + bit);
                word &= word - 1;
            }
        }
        out
    }
}

pub(crate) struct Search<'a> {
    a: &'a Structure,
    b: &'a Structure,
    req: Requirements,
    budget: &'a Budget,
    order: Vec<usize>,
    values: Vec<usize>,
    preimage: Vec<usize>,
    scratch: Vec<usize>,
}

impl<'a> Search<'a> {
    pub fn new(a: &'a Structure, b: &'a Structure, req: Requirements, budget: &'a Budget) -> Self {
        Search {
            a,
            b,
            req,
            budget,
            order: Vec::new(),
            values: vec![UNSET; a.len()],
            preimage: vec![UNSET; b.len()],
            scratch: Vec::new(),
        }
    }

    /// Calls `visit` on every solution extending `fixed` until it returns
    /// `false`. Returns `Ok(true)` if the enumeration was stopped by `visit`.
    pub fn run(
        &mut self,
        fixed: &[(usize, usize)],
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool> {
        self.a.check_signature(self.b)?;
        let (na, nb) = (self.a.len(), self.b.len());
        if self.req.injective && na > nb {
            return Ok(false);
        }
        if self.req.bijective {
            if na != nb {
                return Ok(false);
            }
            for sym in 0..self.a.signature().len() {
                if self.a.tuples(sym).len() != self.b.tuples(sym).len() {
                    return Ok(false);
                }
            }
        }
        if na == 0 {
            return Ok(!visit(&[]));
        }
        if nb == 0 {
            return Ok(false);
        }

        let mut doms = Domains::full(na, nb);
        let mut pinned = vec![false; na];
        for &(x, y) in fixed {
            if x >= na || y >= nb {
                return Err(Error::InvalidMap(format!("pair ({x}, {y}) out of range")));
            }
            if pinned[x] && !doms.contains(x, y) {
                return Ok(false);
            }
            pinned[x] = true;
            doms.set_single(x, y);
        }
        if !self.node_consistency(&mut doms) {
            return Ok(false);
        }
        self.order = self.variable_order(&pinned);
        self.values.iter_mut().for_each(|v| *v = UNSET);
        self.preimage.iter_mut().for_each(|v| *v = UNSET);
        self.descend(0, &doms, visit)
    }

    fn variable_order(&self, pinned: &[bool]) -> Vec<usize> {
        let degree = self.a.gaifman_degrees();
        let mut order: Vec<usize> = (0..self.a.len()).collect();
        order.sort_by_key(|&x| (!pinned[x], std::cmp::Reverse(degree[x]), x));
        order
    }

    fn node_consistency(&self, doms: &mut Domains) -> bool {
        let nb = self.b.len();
        for sym in 0..self.a.signature().len() {
            let arity = self.a.arity(sym);
            for t in self.a.tuples(sym) {
                let mut allowed = vec![vec![false; nb]; arity];
                for s in self.b.tuples(sym) {
                    let same_pattern = (0..arity)
                        .all(|i| (0..i).all(|j| t[i] != t[j] || s[i] == s[j]));
                    if same_pattern {
                        for i in 0..arity {
                            allowed[i][s[i]] = true;
                        }
                    }
                }
                for (i, &x) in t.iter().enumerate() {
                    for (y, &ok) in allowed[i].iter().enumerate() {
                        if !ok {
                            doms.remove(x, y);
                        }
                    }
                    if doms.is_empty(x) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn descend(
        &mut self,
        level: usize,
        doms: &Domains,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool> {
        if level == self.order.len() {
            return Ok(!visit(&self.values));
        }
        let x = self.order[level];
        for v in doms.values(x) {
            self.budget.charge(1)?;
            if self.req.injective && self.preimage[v] != UNSET {
                continue;
            }
            self.values[x] = v;
            if self.req.injective {
                self.preimage[v] = x;
            }
            let mut next = doms.clone();
            next.set_single(x, v);
            let ok = self.propagate(x, v, &mut next);
            let stopped = if ok {
                self.descend(level + 1, &next, visit)?
            } else {
                false
            };
            self.values[x] = UNSET;
            if self.req.injective {
                self.preimage[v] = UNSET;
            }
            if stopped {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn propagate(&mut self, x: usize, v: usize, doms: &mut Domains) -> bool {
        if self.req.injective {
            for y in 0..self.a.len() {
                if self.values[y] == UNSET {
                    doms.remove(y, v);
                    if doms.is_empty(y) {
                        return false;
                    }
                }
            }
        }
        for sym in 0..self.a.signature().len() {
            for &ti in self.a.incident(sym, x) {
                let t = &self.a.tuples(sym)[ti];
                let mut open = UNSET;
                let mut several = false;
                for &y in t {
                    if self.values[y] == UNSET {
                        if open == UNSET {
                            open = y;
                        } else if open != y {
                            several = true;
                            break;
                        }
                    }
                }
                if several {
                    continue;
                }
                self.scratch.clear();
                self.scratch.extend(t.iter().map(|&y| self.values[y]));
                if open == UNSET {
                    if !self.b.holds(sym, &self.scratch) {
                        return false;
                    }
                } else {
                    for w in doms.values(open) {
                        for (i, &y) in t.iter().enumerate() {
                            if y == open {
                                self.scratch[i] = w;
                            }
                        }
                        if !self.b.holds(sym, &self.scratch) {
                            doms.remove(open, w);
                        }
                    }
                    if doms.is_empty(open) {
                        return false;
                    }
                }
            }
        }
        if self.req.reflect {
            for sym in 0..self.b.signature().len() {
                for &si in self.b.incident(sym, v) {
                    let s = &self.b.tuples(sym)[si];
                    if s.iter().any(|&w| self.preimage[w] == UNSET) {
                        continue;
                    }
                    self.scratch.clear();
                    self.scratch.extend(s.iter().map(|&w| self.preimage[w]));
                    if !self.a.holds(sym, &self.scratch) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

pub(crate) fn first(
    a: &Structure,
    b: &Structure,
    req: Requirements,
    fixed: &[(usize, usize)],
    budget: &Budget,
) -> Result<Option<Vec<usize>>> {
    let mut found = None;
    Search::new(a, b, req, budget).run(fixed, &mut |m| {
        found = Some(m.to_vec());
        false
    })?;
    Ok(found)
}

pub(crate) fn exists(
    a: &Structure,
    b: &Structure,
    req: Requirements,
    fixed: &[(usize, usize)],
    budget: &Budget,
) -> Result<bool> {
    Ok(first(a, b, req, fixed, budget)?.is_some())
}

pub(crate) fn all(
    a: &Structure,
    b: &Structure,
    req: Requirements,
    fixed: &[(usize, usize)],
    budget: &Budget,
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    Search::new(a, b, req, budget).run(fixed, &mut |m| {
        out.push(m.to_vec());
        true
    })?;
    Ok(out)
}

pub(crate) fn count(
    a: &Structure,
    b: &Structure,
    req: Requirements,
    fixed: &[(usize, usize)],
    budget: &Budget,
) -> Result<u64> {
    let mut n = 0u64;
    Search::new(a, b, req, budget).run(fixed, &mut |_| {
        n += 1;
        true
    })?;
    Ok(n)
}
