//! Signatures and finite relational structures.
//!
//! A [`Structure`] is immutable once built. Internally elements are addressed
//! by their position in the carrier; the string ids only matter at the
//! boundaries (parsing, serialization, reports). Relations are kept as sorted,
//! deduplicated tuple lists plus a lookup table for membership tests, so two
//! structures compare equal exactly when they have the same ids and the same
//! tuples.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Symbol {
            name: name.into(),
            arity,
        }
    }
}

/// An ordered list of relation symbols with pairwise distinct names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &symbols {
            if s.arity == 0 {
                return Err(Error::InvalidSignature(format!(
                    "symbol `{}` has arity 0",
                    s.name
                )));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::InvalidSignature(format!(
                    "symbol `{}` declared twice",
                    s.name
                )));
            }
        }
        Ok(Signature { symbols })
    }

    /// A signature with one binary symbol.
    pub fn binary(name: &str) -> Self {
        Signature {
            symbols: vec![Symbol::new(name, 2)],
        }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arity(&self, sym: usize) -> usize {
        self.symbols[sym].arity
    }

    /// Appends symbols, failing on a name clash.
    pub fn extended(&self, extra: impl IntoIterator<Item = Symbol>) -> Result<Signature> {
        let mut symbols = self.symbols.clone();
        symbols.extend(extra);
        Signature::new(symbols)
    }

    /// `base`, or `base` with primes appended until it does not clash.
    pub fn fresh_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.index_of(&name).is_some() {
            name.push('\'');
        }
        name
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}/{}", s.name, s.arity)?;
        }
        write!(f, "}}")
    }
}

const DENSE_LIMIT: u128 = 1 << 22;

#[derive(Clone, Debug)]
enum Lookup {
    Dense(Vec<u64>),
    Hashed(HashSet<Vec<usize>>),
}

#[derive(Clone, Debug)]
pub(crate) struct Relation {
    arity: usize,
    tuples: Vec<Vec<usize>>,
    lookup: Lookup,
    /// For every element, indices of the tuples mentioning it.
    incidence: Vec<Vec<usize>>,
}

fn tuple_code(t: &[usize], n: usize) -> usize {
    t.iter().rev().fold(0usize, |acc, &x| acc * n + x)
}

impl Relation {
    fn new(arity: usize, n: usize, mut tuples: Vec<Vec<usize>>) -> Self {
        tuples.sort_unstable();
        tuples.dedup();
        let space = (n as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
        let lookup = if space <= DENSE_LIMIT {
            let mut bits = vec![0u64; (space as usize).div_ceil(64)];
            for t in &tuples {
                let c = tuple_code(t, n);
                bits[c / 64] |= 1 << (c % 64);
            }
            Lookup::Dense(bits)
        } else {
            Lookup::Hashed(tuples.iter().cloned().collect())
        };
        let mut incidence = vec![Vec::new(); n];
        for (i, t) in tuples.iter().enumerate() {
            for (pos, &x) in t.iter().enumerate() {
                if !t[..pos].contains(&x) {
                    incidence[x].push(i);
                }
            }
        }
        Relation {
            arity,
            tuples,
            lookup,
            incidence,
        }
    }

    #[inline]
    fn contains(&self, t: &[usize], n: usize) -> bool {
        match &self.lookup {
            Lookup::Dense(bits) => {
                let c = tuple_code(t, n);
                bits[c / 64] >> (c % 64) & 1 == 1
            }
            Lookup::Hashed(set) => set.contains(t),
        }
    }
}

struct Inner {
    signature: Signature,
    elements: Vec<String>,
    index: HashMap<String, usize>,
    relations: Vec<Relation>,
    degrees: Vec<usize>,
}

/// A finite relational structure over an explicit signature.
///
/// Cloning is cheap (shared, immutable storage).
#[derive(Clone)]
pub struct Structure {
    inner: Arc<Inner>,
}

impl Structure {
    /// Builds a structure from element ids and per-symbol tuples of ids.
    /// Symbols missing from `relations` are interpreted as empty.
    pub fn new<S: AsRef<str>>(
        signature: Signature,
        elements: Vec<String>,
        relations: &[(S, Vec<Vec<String>>)],
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::DuplicateElement(e.clone()));
            }
        }
        let mut rels: Vec<Vec<Vec<usize>>> = vec![Vec::new(); signature.len()];
        for (name, tuples) in relations {
            let name = name.as_ref();
            let sym = signature
                .index_of(name)
                .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
            let arity = signature.arity(sym);
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::ArityMismatch {
                        symbol: name.to_string(),
                        expected: arity,
                        found: t.len(),
                    });
                }
                let mut idx = Vec::with_capacity(arity);
                for e in t {
                    let i = index.get(e).ok_or_else(|| Error::UnknownElement {
                        element: e.clone(),
                        context: format!("a tuple of `{name}`"),
                    })?;
                    idx.push(*i);
                }
                rels[sym].push(idx);
            }
        }
        Self::assemble(signature, elements, index, rels)
    }

    /// Builds a structure whose tuples are given by carrier positions.
    pub fn from_indices(
        signature: Signature,
        elements: Vec<String>,
        relations: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if relations.len() > signature.len() {
            return Err(Error::SignatureMismatch(format!(
                "{} relations given for a signature with {} symbols",
                relations.len(),
                signature.len()
            )));
        }
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return Err(Error::DuplicateElement(e.clone()));
            }
        }
        let mut rels = relations;
        rels.resize(signature.len(), Vec::new());
        for (sym, tuples) in rels.iter().enumerate() {
            let s = &signature.symbols()[sym];
            for t in tuples {
                if t.len() != s.arity {
                    return Err(Error::ArityMismatch {
                        symbol: s.name.clone(),
                        expected: s.arity,
                        found: t.len(),
                    });
                }
                if let Some(&bad) = t.iter().find(|&&x| x >= elements.len()) {
                    return Err(Error::UnknownElement {
                        element: format!("#{bad}"),
                        context: format!("a tuple of `{}`", s.name),
                    });
                }
            }
        }
        Self::assemble(signature, elements, index, rels)
    }

    /// Elements named `"0"`, `"1"`, ... `"n-1"`.
    pub fn with_size(signature: Signature, n: usize, relations: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        Self::from_indices(signature, numbered(n), relations)
    }

    pub fn empty(signature: Signature) -> Self {
        Self::assemble(signature, Vec::new(), HashMap::new(), Vec::new())
            .expect("the empty structure is valid")
    }

    fn assemble(
        signature: Signature,
        elements: Vec<String>,
        index: HashMap<String, usize>,
        mut rels: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        rels.resize(signature.len(), Vec::new());
        let n = elements.len();
        let relations = rels
            .into_iter()
            .enumerate()
            .map(|(sym, tuples)| Relation::new(signature.arity(sym), n, tuples))
            .collect::<Vec<_>>();
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n];
        for r in &relations {
            for t in &r.tuples {
                for &x in t {
                    for &y in t {
                        if x != y {
                            neighbours[x].push(y);
                        }
                    }
                }
            }
        }
        let degrees = neighbours
            .into_iter()
            .map(|mut ns| {
                ns.sort_unstable();
                ns.dedup();
                ns.len()
            })
            .collect();
        Ok(Structure {
            inner: Arc::new(Inner {
                signature,
                elements,
                index,
                relations,
                degrees,
            }),
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.inner.signature
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.inner.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.inner.elements
    }

    pub fn element(&self, i: usize) -> &str {
        &self.inner.elements[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.inner.index.get(id).copied()
    }

    pub(crate) fn require_index(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownElement {
            element: id.to_string(),
            context: "the carrier".into(),
        })
    }

    /// Tuples of symbol `sym`, sorted, as carrier positions.
    pub fn tuples(&self, sym: usize) -> &[Vec<usize>] {
        &self.inner.relations[sym].tuples
    }

    pub fn tuple_count(&self) -> usize {
        self.inner.relations.iter().map(|r| r.tuples.len()).sum()
    }

    #[inline]
    pub fn holds(&self, sym: usize, t: &[usize]) -> bool {
        self.inner.relations[sym].contains(t, self.len())
    }

    /// Indices (into [`Structure::tuples`]) of the `sym`-tuples mentioning `x`.
    pub(crate) fn incident(&self, sym: usize, x: usize) -> &[usize] {
        &self.inner.relations[sym].incidence[x]
    }

    /// Degree of every element in the Gaifman graph.
    pub fn gaifman_degrees(&self) -> &[usize] {
        &self.inner.degrees
    }

    pub(crate) fn arity(&self, sym: usize) -> usize {
        self.inner.relations[sym].arity
    }

    pub fn same_signature(&self, other: &Structure) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.signature() == other.signature()
    }

    pub(crate) fn check_signature(&self, other: &Structure) -> Result<()> {
        if self.same_signature(other) {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!(
                "{} vs {}",
                self.signature(),
                other.signature()
            )))
        }
    }

    /// Tuples of `sym` as element ids.
    pub fn named_tuples(&self, sym: usize) -> Vec<Vec<&str>> {
        self.tuples(sym)
            .iter()
            .map(|t| t.iter().map(|&x| self.element(x)).collect())
            .collect()
    }

    /// The relations as nested position vectors, one entry per symbol.
    pub fn relation_lists(&self) -> Vec<Vec<Vec<usize>>> {
        self.inner
            .relations
            .iter()
            .map(|r| r.tuples.clone())
            .collect()
    }

    /// Same relations, new element ids.
    pub fn renamed(&self, elements: Vec<String>) -> Result<Structure> {
        if elements.len() != self.len() {
            return Err(Error::InvalidMap(format!(
                "{} ids given for {} elements",
                elements.len(),
                self.len()
            )));
        }
        Structure::from_indices(self.signature().clone(), elements, self.relation_lists())
    }

    /// Adds the given symbols (and their tuples) to the signature.
    pub fn expanded(&self, extra: Vec<(Symbol, Vec<Vec<usize>>)>) -> Result<Structure> {
        let mut rels = self.relation_lists();
        let mut symbols = Vec::with_capacity(extra.len());
        for (s, tuples) in extra {
            symbols.push(s);
            rels.push(tuples);
        }
        let sig = self.signature().extended(symbols)?;
        Structure::from_indices(sig, self.elements().to_vec(), rels)
    }

    /// The reduct to the symbols listed in `keep` (by name).
    pub fn reduct(&self, keep: &[&str]) -> Result<Structure> {
        let mut symbols = Vec::new();
        let mut rels = Vec::new();
        for name in keep {
            let sym = self
                .signature()
                .index_of(name)
                .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
            symbols.push(self.signature().symbols()[sym].clone());
            rels.push(self.tuples(sym).to_vec());
        }
        Structure::from_indices(Signature::new(symbols)?, self.elements().to_vec(), rels)
    }

    /// The substructure induced on the given element ids, in carrier order.
    pub fn induced_substructure<S: AsRef<str>>(&self, subset: &[S]) -> Result<Structure> {
        let mut keep = vec![false; self.len()];
        for id in subset {
            keep[self.require_index(id.as_ref())?] = true;
        }
        let positions: Vec<usize> = (0..self.len()).filter(|&i| keep[i]).collect();
        Ok(self.induced(&positions))
    }

    /// The substructure induced on the given positions, listed in the given order.
    pub fn induced(&self, positions: &[usize]) -> Structure {
        let mut new_index = vec![usize::MAX; self.len()];
        for (j, &i) in positions.iter().enumerate() {
            new_index[i] = j;
        }
        let rels = (0..self.signature().len())
            .map(|sym| {
                self.tuples(sym)
                    .iter()
                    .filter(|t| t.iter().all(|&x| new_index[x] != usize::MAX))
                    .map(|t| t.iter().map(|&x| new_index[x]).collect())
                    .collect()
            })
            .collect();
        let elements = positions.iter().map(|&i| self.element(i).to_string()).collect();
        Structure::from_indices(self.signature().clone(), elements, rels)
            .expect("restriction of a valid structure is valid")
    }

    /// Disjoint union; element ids are tagged `1.<id>` and `2.<id>`.
    pub fn disjoint_union(&self, other: &Structure) -> Result<Structure> {
        self.check_signature(other)?;
        let n = self.len();
        let elements = self
            .elements()
            .iter()
            .map(|e| format!("1.{e}"))
            .chain(other.elements().iter().map(|e| format!("2.{e}")))
            .collect();
        let rels = (0..self.signature().len())
            .map(|sym| {
                self.tuples(sym)
                    .iter()
                    .cloned()
                    .chain(
                        other
                            .tuples(sym)
                            .iter()
                            .map(|t| t.iter().map(|&x| x + n).collect()),
                    )
                    .collect()
            })
            .collect();
        Structure::from_indices(self.signature().clone(), elements, rels)
    }

    pub fn gaifman_graph(&self) -> Graph {
        let mut edges = BTreeSet::new();
        for sym in 0..self.signature().len() {
            for t in self.tuples(sym) {
                for (i, &x) in t.iter().enumerate() {
                    for &y in &t[i + 1..] {
                        if x != y {
                            edges.insert((x.min(y), x.max(y)));
                        }
                    }
                }
            }
        }
        Graph {
            vertices: self.elements().to_vec(),
            edges,
        }
    }

    pub fn is_connected(&self) -> bool {
        self.gaifman_graph().component_count() <= 1
    }

    pub fn is_tight(&self) -> bool {
        self.gaifman_graph().is_complete()
    }

    /// Any two distinct elements share a tuple. Same predicate as [`Structure::is_tight`].
    pub fn is_packed(&self) -> bool {
        self.is_tight()
    }

    /// One element, or some single tuple covers the whole carrier.
    pub fn is_link_structure(&self) -> bool {
        if self.len() == 1 {
            return true;
        }
        if self.is_empty() {
            return false;
        }
        (0..self.signature().len()).any(|sym| {
            self.tuples(sym).iter().any(|t| {
                let mut seen = vec![false; self.len()];
                t.iter().for_each(|&x| seen[x] = true);
                seen.iter().all(|&b| b)
            })
        })
    }

    /// Symbols with a nonempty interpretation.
    pub fn active_signature(&self) -> Vec<Symbol> {
        self.signature()
            .symbols()
            .iter()
            .enumerate()
            .filter(|&(sym, _)| !self.tuples(sym).is_empty())
            .map(|(_, s)| s.clone())
            .collect()
    }

    /// Always true: only declared symbols are stored, so every stored
    /// structure interprets all but finitely many symbols as empty.
    pub fn is_sparse(&self) -> bool {
        true
    }
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.signature() == other.signature()
                && self.elements() == other.elements()
                && self
                    .inner
                    .relations
                    .iter()
                    .zip(&other.inner.relations)
                    .all(|(a, b)| a.tuples == b.tuples))
    }
}

impl Eq for Structure {}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Structure");
        d.field("elements", &self.elements());
        for (sym, s) in self.signature().symbols().iter().enumerate() {
            d.field(&s.name, &self.named_tuples(sym));
        }
        d.finish()
    }
}

pub(crate) fn numbered(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// A simple graph: no loops, unordered edges stored as `(min, max)` positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub vertices: Vec<String>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.edges.contains(&(x.min(y), x.max(y)))
    }

    pub fn is_complete(&self) -> bool {
        let n = self.vertices.len();
        self.edges.len() == n * n.saturating_sub(1) / 2
    }

    /// Component label for every vertex; labels are `0..component_count`.
    pub fn components(&self) -> Vec<usize> {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &(x, y) in &self.edges {
            adj[x].push(y);
            adj[y].push(x);
        }
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(x, y)| x == v || y == v).count()
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph gaifman {\n");
        for v in &self.vertices {
            out.push_str(&format!("  {v:?};\n"));
        }
        for &(x, y) in &self.edges {
            out.push_str(&format!(
                "  {:?} -- {:?};\n",
                self.vertices[x], self.vertices[y]
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Disjoint union, vertex ids untouched.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let n = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(x, y)| (x + n, y + n)));
        Graph { vertices, edges }
    }
}
