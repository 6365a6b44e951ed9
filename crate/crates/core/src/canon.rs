//! Isomorphism-class bookkeeping: canonical forms for small structures,
//! isomorphism-deduplicating sets, and enumeration of all structures of
//! bounded size up to isomorphism.
//!
//! The canonical form is the lexicographically least relabelled tuple list
//! over all labellings compatible with a sorted element invariant. It is only
//! computed when the number of such labellings is small; larger structures
//! are deduplicated by invariant buckets plus isomorphism search.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::morphism::is_isomorphic;
use crate::structure::{Signature, Structure, Symbol};

/// Labellings tried before falling back to isomorphism search.
const LABELLING_LIMIT: u64 = 40_320;

/// Largest number of candidate tuples per new element during enumeration.
const EXTENSION_BITS_LIMIT: usize = 22;

/// Tuple lists per symbol, by position.
type Relations = Vec<Vec<Vec<usize>>>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    size: usize,
    relations: Vec<Vec<Vec<usize>>>,
}

type Invariant = Vec<usize>;

fn element_invariants(s: &Structure) -> Vec<Invariant> {
    let mut inv = vec![Vec::new(); s.len()];
    let mut base = 0;
    for sym in 0..s.signature().len() {
        let arity = s.signature().arity(sym);
        for v in inv.iter_mut() {
            v.resize(base + arity + 1, 0);
        }
        for t in s.tuples(sym) {
            let repeated = (1..t.len()).any(|i| t[..i].contains(&t[i]));
            for (i, &x) in t.iter().enumerate() {
                inv[x][base + i] += 1;
                if repeated && !t[..i].contains(&x) {
                    inv[x][base + arity] += 1;
                }
            }
        }
        base += arity + 1;
    }
    // One refinement round: append the sorted invariants of Gaifman neighbours.
    let g = s.gaifman_graph();
    let mut refined = inv.clone();
    for (x, r) in refined.iter_mut().enumerate() {
        let mut around: Vec<&Invariant> = (0..s.len())
            .filter(|&y| g.has_edge(x, y))
            .map(|y| &inv[y])
            .collect();
        around.sort();
        r.push(usize::MAX);
        for v in around {
            r.extend_from_slice(v);
            r.push(usize::MAX);
        }
    }
    refined
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k)).unwrap_or(u64::MAX)
}

/// Elements sorted by invariant, with the runs of equal invariants.
fn invariant_classes(s: &Structure) -> (Vec<Invariant>, Vec<Vec<usize>>) {
    let inv = element_invariants(s);
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&x, &y| inv[x].cmp(&inv[y]));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &x in &order {
        match classes.last_mut() {
            Some(c) if inv[c[0]] == inv[x] => c.push(x),
            _ => classes.push(vec![x]),
        }
    }
    let sorted = order.iter().map(|&x| inv[x].clone()).collect();
    (sorted, classes)
}

fn labellings(classes: &[Vec<usize>]) -> u64 {
    classes
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(factorial(c.len())))
        .unwrap_or(u64::MAX)
}

fn encode(s: &Structure, label: &[usize]) -> Vec<Vec<Vec<usize>>> {
    (0..s.signature().len())
        .map(|sym| {
            let mut ts: Vec<Vec<usize>> = s
                .tuples(sym)
                .iter()
                .map(|t| t.iter().map(|&x| label[x]).collect())
                .collect();
            ts.sort_unstable();
            ts
        })
        .collect()
}

/// Canonical form and a labelling realizing it (`label[x]` is the canonical
/// position of element `x`), or `None` if too many labellings would be needed.
pub fn canonical_labelling(s: &Structure) -> Option<(CanonicalForm, Vec<usize>)> {
    let (_, classes) = invariant_classes(s);
    if labellings(&classes) > LABELLING_LIMIT {
        return None;
    }
    let n = s.len();
    let slot_class: Vec<usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(c, members)| std::iter::repeat_n(c, members.len()))
        .collect();
    let mut best: Option<(Relations, Vec<usize>)> = None;
    let mut label = vec![usize::MAX; n];
    fn place(
        slot: usize,
        s: &Structure,
        classes: &[Vec<usize>],
        slot_class: &[usize],
        label: &mut [usize],
        best: &mut Option<(Relations, Vec<usize>)>,
    ) {
        if slot == label.len() {
            let code = encode(s, label);
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                *best = Some((code, label.to_vec()));
            }
            return;
        }
        for &x in &classes[slot_class[slot]] {
            if label[x] == usize::MAX {
                label[x] = slot;
                place(slot + 1, s, classes, slot_class, label, best);
                label[x] = usize::MAX;
            }
        }
    }
    place(0, s, &classes, &slot_class, &mut label, &mut best);
    let (relations, label) = best.unwrap_or_default();
    Some((CanonicalForm { size: n, relations }, label))
}

pub fn canonical_form(s: &Structure) -> Option<CanonicalForm> {
    canonical_labelling(s).map(|(c, _)| c)
}

/// The canonically relabelled copy with ids `"0".."n-1"`.
pub fn canonical_structure(s: &Structure) -> Option<Structure> {
    let (form, _) = canonical_labelling(s)?;
    Some(
        Structure::with_size(s.signature().clone(), form.size, form.relations)
            .expect("relabelling preserves validity"),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Canonical(CanonicalForm),
    Bucket(usize, Vec<usize>, Vec<Invariant>),
}

/// A list of structures kept pairwise non-isomorphic.
#[derive(Clone, Debug, Default)]
pub struct IsoSet {
    items: Vec<Structure>,
    keys: HashMap<Key, Vec<usize>>,
}

impl IsoSet {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(s: &Structure) -> Key {
        match canonical_form(s) {
            Some(c) => Key::Canonical(c),
            None => {
                let counts = (0..s.signature().len()).map(|i| s.tuples(i).len()).collect();
                Key::Bucket(s.len(), counts, invariant_classes(s).0)
            }
        }
    }

    /// Position of a stored structure isomorphic to `s`, if any.
    pub fn find(&self, s: &Structure, budget: &Budget) -> Result<Option<usize>> {
        self.find_keyed(s, &Self::key(s), budget)
    }

    fn find_keyed(&self, s: &Structure, key: &Key, budget: &Budget) -> Result<Option<usize>> {
        let Some(bucket) = self.keys.get(key) else {
            return Ok(None);
        };
        if matches!(key, Key::Canonical(_)) {
            return Ok(bucket.first().copied());
        }
        for &i in bucket {
            if is_isomorphic(&self.items[i], s, budget)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Adds `s` unless an isomorphic copy is present; returns whether it was added.
    pub fn insert(&mut self, s: Structure, budget: &Budget) -> Result<bool> {
        let key = Self::key(&s);
        if self.find_keyed(&s, &key, budget)?.is_some() {
            return Ok(false);
        }
        self.keys.entry(key).or_default().push(self.items.len());
        self.items.push(s);
        Ok(true)
    }

    pub fn contains(&self, s: &Structure, budget: &Budget) -> Result<bool> {
        Ok(self.find(s, budget)?.is_some())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Structure] {
        &self.items
    }

    pub fn into_items(self) -> Vec<Structure> {
        self.items
    }
}

/// All tuples over `0..=n` that mention the new element `n`, per symbol.
fn tuples_through_new(sig: &Signature, n: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for sym in 0..sig.len() {
        let arity = sig.arity(sym);
        let mut t = vec![0usize; arity];
        loop {
            if t.contains(&n) {
                out.push((sym, t.clone()));
            }
            let mut i = 0;
            while i < arity && t[i] == n {
                t[i] = 0;
                i += 1;
            }
            if i == arity {
                break;
            }
            t[i] += 1;
        }
    }
    out
}

/// Every structure obtained from `base` by adding one element `"<n>"` and any
/// set of tuples through it. The old elements keep their ids.
pub fn one_point_extensions(base: &Structure, budget: &Budget) -> Result<Vec<Structure>> {
    let n = base.len();
    let sig = base.signature().clone();
    let candidates = tuples_through_new(&sig, n);
    if candidates.len() > EXTENSION_BITS_LIMIT {
        return Err(Error::InvalidClass(format!(
            "{} candidate tuples per new element exceeds the enumeration limit of {}",
            candidates.len(),
            EXTENSION_BITS_LIMIT
        )));
    }
    let mut ids = base.elements().to_vec();
    ids.push(fresh_id(base));
    let rels = base.relation_lists();
    let mut out = Vec::with_capacity(1 << candidates.len());
    for mask in 0u64..(1u64 << candidates.len()) {
        budget.charge(1)?;
        let mut r = rels.clone();
        for (bit, (sym, t)) in candidates.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                r[*sym].push(t.clone());
            }
        }
        out.push(Structure::from_indices(sig.clone(), ids.clone(), r)?);
    }
    Ok(out)
}

/// An id not used in `s`: its size, primed until fresh.
pub fn fresh_id(s: &Structure) -> String {
    let mut id = s.len().to_string();
    while s.index_of(&id).is_some() {
        id.push('\'');
    }
    id
}

/// Representatives of all structures with at most `max_size` elements that
/// pass `keep`, grouped by size. `keep` must be closed under induced
/// substructures: candidates are only grown from kept structures.
pub fn enumerate_hereditary(
    sig: &Signature,
    max_size: usize,
    keep: &mut dyn FnMut(&Structure) -> Result<bool>,
    budget: &Budget,
) -> Result<Vec<Vec<Structure>>> {
    let mut levels: Vec<Vec<Structure>> = Vec::with_capacity(max_size + 1);
    let empty = Structure::empty(sig.clone());
    levels.push(if keep(&empty)? { vec![empty] } else { Vec::new() });
    for _ in 0..max_size {
        let mut next = IsoSet::new();
        for base in levels.last().expect("nonempty") {
            for ext in one_point_extensions(base, budget)? {
                let ext = canonical_structure(&ext).unwrap_or(ext);
                if !next.contains(&ext, budget)? && keep(&ext)? {
                    next.insert(ext, budget)?;
                }
            }
        }
        levels.push(next.into_items());
    }
    Ok(levels)
}

/// `b` with its first `k` elements individually marked by fresh unary
/// symbols, so that isomorphism of the result is isomorphism over them.
pub fn pinned(b: &Structure, k: usize) -> Result<Structure> {
    let mut sig = b.signature().clone();
    let mut extra = Vec::with_capacity(k);
    for i in 0..k {
        let sym = Symbol::new(sig.fresh_name(&format!("pin{i}")), 1);
        sig = sig.extended([sym.clone()])?;
        extra.push((sym, vec![vec![i]]));
    }
    b.expanded(extra)
}

type CatalogKey = (String, usize);
type Catalogs = Mutex<HashMap<CatalogKey, Arc<Vec<Vec<Structure>>>>>;

fn catalog_cache() -> &'static Catalogs {
    static CACHE: OnceLock<Catalogs> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// All structures over `sig` with at most `max_size` elements up to
/// isomorphism, grouped by size. Results are cached per process.
pub fn all_structures(sig: &Signature, max_size: usize) -> Result<Arc<Vec<Vec<Structure>>>> {
    let key = (sig.to_string(), max_size);
    if let Some(hit) = catalog_cache().lock().expect("cache lock").get(&key) {
        return Ok(hit.clone());
    }
    let levels = Arc::new(enumerate_hereditary(sig, max_size, &mut |_| Ok(true), &Budget::unlimited())?);
    catalog_cache()
        .lock()
        .expect("cache lock")
        .insert(key, levels.clone());
    Ok(levels)
}
