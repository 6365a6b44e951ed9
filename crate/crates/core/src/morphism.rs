//! Homomorphisms, embeddings and isomorphisms between finite structures, and
//! what is computed from them: endomorphism monoids, automorphism groups,
//! cores, hom-equivalence and homomorphism-homogeneity.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::search::{self, Requirements};
use crate::structure::Structure;

/// Kinds ordered by strength: every iso is an embedding, every embedding a
/// mono, every mono a hom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphismKind {
    Hom,
    Mono,
    Embedding,
    Iso,
}

impl MorphismKind {
    pub(crate) fn requirements(self) -> Requirements {
        match self {
            MorphismKind::Hom => Requirements::HOM,
            MorphismKind::Mono => Requirements::MONO,
            MorphismKind::Embedding => Requirements::EMBEDDING,
            MorphismKind::Iso => Requirements::ISO,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MorphismKind::Hom => "hom",
            MorphismKind::Mono => "mono",
            MorphismKind::Embedding => "embedding",
            MorphismKind::Iso => "iso",
        }
    }
}

impl fmt::Display for MorphismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finite functional set of `(source id, target id)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialMap {
    pairs: Vec<(String, String)>,
}

impl PartialMap {
    pub fn new<S: Into<String>, T: Into<String>>(pairs: impl IntoIterator<Item = (S, T)>) -> Result<Self> {
        let pairs: Vec<(String, String)> =
            pairs.into_iter().map(|(s, t)| (s.into(), t.into())).collect();
        for (i, (s, t)) in pairs.iter().enumerate() {
            if let Some((_, t2)) = pairs[..i].iter().find(|(s2, _)| s2 == s) {
                if t2 != t {
                    return Err(Error::InvalidMap(format!(
                        "`{s}` is mapped to both `{t2}` and `{t}`"
                    )));
                }
            }
        }
        let mut dedup: Vec<(String, String)> = Vec::with_capacity(pairs.len());
        for p in pairs {
            if !dedup.contains(&p) {
                dedup.push(p);
            }
        }
        Ok(PartialMap { pairs: dedup })
    }

    pub fn empty() -> Self {
        PartialMap::default()
    }

    pub fn identity(s: &Structure) -> Self {
        PartialMap {
            pairs: s.elements().iter().map(|e| (e.clone(), e.clone())).collect(),
        }
    }

    pub(crate) fn from_positions(a: &Structure, b: &Structure, pairs: &[(usize, usize)]) -> Self {
        PartialMap {
            pairs: pairs
                .iter()
                .map(|&(x, y)| (a.element(x).to_string(), b.element(y).to_string()))
                .collect(),
        }
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub(crate) fn positions(&self, a: &Structure, b: &Structure) -> Result<Vec<(usize, usize)>> {
        self.pairs
            .iter()
            .map(|(s, t)| Ok((a.require_index(s)?, b.require_index(t)?)))
            .collect()
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        for (s, t) in &self.pairs {
            m.insert(s.clone(), Value::String(t.clone()));
        }
        Value::Object(m)
    }
}

/// Checks `map` against `kind` directly from the definitions, without the
/// search engine.
pub fn verify_kind(a: &Structure, b: &Structure, map: &[usize], kind: MorphismKind) -> Result<()> {
    let fail = |reason: String| Error::KindViolation {
        kind: kind.to_string(),
        reason,
    };
    a.check_signature(b)?;
    if map.len() != a.len() {
        return Err(fail(format!("map has {} entries for {} elements", map.len(), a.len())));
    }
    if let Some(&y) = map.iter().find(|&&y| y >= b.len()) {
        return Err(fail(format!("target position {y} out of range")));
    }
    for sym in 0..a.signature().len() {
        for t in a.tuples(sym) {
            let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
            if !b.holds(sym, &image) {
                return Err(fail(format!(
                    "tuple {:?} of `{}` is not preserved",
                    t.iter().map(|&x| a.element(x)).collect::<Vec<_>>(),
                    a.signature().symbols()[sym].name
                )));
            }
        }
    }
    if kind >= MorphismKind::Mono {
        let mut seen = vec![false; b.len()];
        for &y in map {
            if std::mem::replace(&mut seen[y], true) {
                return Err(fail(format!("`{}` is hit twice", b.element(y))));
            }
        }
    }
    if kind >= MorphismKind::Embedding {
        let mut pre = vec![usize::MAX; b.len()];
        for (x, &y) in map.iter().enumerate() {
            pre[y] = x;
        }
        for sym in 0..b.signature().len() {
            for s in b.tuples(sym) {
                if s.iter().all(|&y| pre[y] != usize::MAX) {
                    let back: Vec<usize> = s.iter().map(|&y| pre[y]).collect();
                    if !a.holds(sym, &back) {
                        return Err(fail(format!(
                            "tuple {:?} of `{}` is not reflected",
                            s.iter().map(|&y| b.element(y)).collect::<Vec<_>>(),
                            b.signature().symbols()[sym].name
                        )));
                    }
                }
            }
        }
    }
    if kind == MorphismKind::Iso && a.len() != b.len() {
        return Err(fail("not surjective".into()));
    }
    Ok(())
}

/// The strongest kind `map` satisfies, if it is a homomorphism at all.
pub fn classify(a: &Structure, b: &Structure, map: &[usize]) -> Option<MorphismKind> {
    [
        MorphismKind::Iso,
        MorphismKind::Embedding,
        MorphismKind::Mono,
        MorphismKind::Hom,
    ]
    .into_iter()
    .find(|&k| verify_kind(a, b, map, k).is_ok())
}

/// A verified structure map. `map[x]` is the carrier position of the image of
/// the element at position `x`.
#[derive(Clone, PartialEq, Eq)]
pub struct Morphism {
    domain: Structure,
    codomain: Structure,
    map: Vec<usize>,
    kind: MorphismKind,
}

impl Morphism {
    pub fn new(domain: Structure, codomain: Structure, map: Vec<usize>, kind: MorphismKind) -> Result<Self> {
        verify_kind(&domain, &codomain, &map, kind)?;
        Ok(Morphism {
            domain,
            codomain,
            map,
            kind,
        })
    }

    /// Builds from `(source id, target id)` pairs covering the whole domain.
    pub fn from_pairs(domain: Structure, codomain: Structure, pairs: &PartialMap, kind: MorphismKind) -> Result<Self> {
        let mut map = vec![usize::MAX; domain.len()];
        for (x, y) in pairs.positions(&domain, &codomain)? {
            map[x] = y;
        }
        if let Some(x) = map.iter().position(|&y| y == usize::MAX) {
            return Err(Error::InvalidMap(format!("`{}` is not mapped", domain.element(x))));
        }
        Self::new(domain, codomain, map, kind)
    }

    pub(crate) fn trusted(domain: &Structure, codomain: &Structure, map: Vec<usize>, kind: MorphismKind) -> Self {
        debug_assert!(verify_kind(domain, codomain, &map, kind).is_ok());
        Morphism {
            domain: domain.clone(),
            codomain: codomain.clone(),
            map,
            kind,
        }
    }

    pub fn identity(s: &Structure) -> Self {
        Morphism::trusted(s, s, (0..s.len()).collect(), MorphismKind::Iso)
    }

    pub fn domain(&self) -> &Structure {
        &self.domain
    }

    pub fn codomain(&self) -> &Structure {
        &self.codomain
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn kind(&self) -> MorphismKind {
        self.kind
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// Image of an element id.
    pub fn apply_id(&self, id: &str) -> Option<&str> {
        self.domain
            .index_of(id)
            .map(|x| self.codomain.element(self.map[x]))
    }

    /// Re-runs the independent check for the recorded kind.
    pub fn verify(&self) -> Result<()> {
        verify_kind(&self.domain, &self.codomain, &self.map, self.kind)
    }

    pub fn is_identity(&self) -> bool {
        self.domain == self.codomain && self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `then ∘ self`. The result carries the weaker of the two kinds and is
    /// re-verified.
    pub fn then(&self, then: &Morphism) -> Result<Morphism> {
        if self.codomain != then.domain {
            return Err(Error::InvalidMap("codomain and domain differ".into()));
        }
        let map = self.map.iter().map(|&y| then.map[y]).collect();
        Morphism::new(
            self.domain.clone(),
            then.codomain.clone(),
            map,
            self.kind.min(then.kind),
        )
    }

    pub fn inverse(&self) -> Option<Morphism> {
        if self.kind != MorphismKind::Iso {
            return None;
        }
        let mut inv = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y] = x;
        }
        Morphism::new(self.codomain.clone(), self.domain.clone(), inv, MorphismKind::Iso).ok()
    }

    /// `{"map":{"a":"x",...},"kind":"hom"}`, keys in domain order.
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        for (x, &y) in self.map.iter().enumerate() {
            m.insert(
                self.domain.element(x).to_string(),
                Value::String(self.codomain.element(y).to_string()),
            );
        }
        json!({"map": Value::Object(m), "kind": self.kind.as_str()})
    }

    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }

    pub fn as_partial_map(&self) -> PartialMap {
        let pairs: Vec<(usize, usize)> = self.map.iter().copied().enumerate().collect();
        PartialMap::from_positions(&self.domain, &self.codomain, &pairs)
    }
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Morphism<{}>{}", self.kind, self.to_value()["map"])
    }
}

/// Parses `{"map":{...},"kind":...}` against given domain and codomain.
pub fn parse_morphism(text: &str, domain: &Structure, codomain: &Structure) -> Result<Morphism> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    let kind: MorphismKind = serde_json::from_value(v.get("kind").cloned().unwrap_or(json!("hom")))
        .map_err(|e| Error::parse("$.kind", e.to_string()))?;
    let map = v
        .get("map")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::parse("$", "missing object field `map`"))?;
    let pairs = map
        .iter()
        .map(|(k, t)| Ok((k.clone(), crate::io::element_id(t, &format!("$.map.{k}"))?)))
        .collect::<Result<Vec<_>>>()?;
    Morphism::from_pairs(domain.clone(), codomain.clone(), &PartialMap::new(pairs)?, kind)
}

fn find_kind(
    a: &Structure,
    b: &Structure,
    fixed: &PartialMap,
    kind: MorphismKind,
    budget: &Budget,
) -> Result<Option<Morphism>> {
    a.check_signature(b)?;
    let fixed = fixed.positions(a, b)?;
    Ok(search::first(a, b, kind.requirements(), &fixed, budget)?
        .map(|m| Morphism::trusted(a, b, m, kind)))
}

/// A homomorphism `a → b` extending `fixed`, if one exists.
pub fn find_homomorphism(a: &Structure, b: &Structure, fixed: &PartialMap, budget: &Budget) -> Result<Option<Morphism>> {
    find_kind(a, b, fixed, MorphismKind::Hom, budget)
}

pub fn find_embedding(a: &Structure, b: &Structure, fixed: &PartialMap, budget: &Budget) -> Result<Option<Morphism>> {
    find_kind(a, b, fixed, MorphismKind::Embedding, budget)
}

pub fn find_isomorphism(a: &Structure, b: &Structure, budget: &Budget) -> Result<Option<Morphism>> {
    find_kind(a, b, &PartialMap::empty(), MorphismKind::Iso, budget)
}

pub fn is_isomorphic(a: &Structure, b: &Structure, budget: &Budget) -> Result<bool> {
    Ok(find_isomorphism(a, b, budget)?.is_some())
}

pub fn has_homomorphism(a: &Structure, b: &Structure, budget: &Budget) -> Result<bool> {
    search::exists(a, b, Requirements::HOM, &[], budget)
}

pub fn has_embedding(a: &Structure, b: &Structure, budget: &Budget) -> Result<bool> {
    search::exists(a, b, Requirements::EMBEDDING, &[], budget)
}

pub fn enumerate_morphisms(a: &Structure, b: &Structure, kind: MorphismKind, budget: &Budget) -> Result<Vec<Morphism>> {
    Ok(search::all(a, b, kind.requirements(), &[], budget)?
        .into_iter()
        .map(|m| Morphism::trusted(a, b, m, kind))
        .collect())
}

pub fn enumerate_homomorphisms(a: &Structure, b: &Structure, budget: &Budget) -> Result<Vec<Morphism>> {
    enumerate_morphisms(a, b, MorphismKind::Hom, budget)
}

pub fn count_homomorphisms(a: &Structure, b: &Structure, budget: &Budget) -> Result<u64> {
    search::count(a, b, Requirements::HOM, &[], budget)
}

pub fn endomorphisms(a: &Structure, budget: &Budget) -> Result<Vec<Morphism>> {
    enumerate_morphisms(a, a, MorphismKind::Hom, budget)
}

/// All automorphisms, identity first.
pub fn automorphism_group(a: &Structure, budget: &Budget) -> Result<Vec<Morphism>> {
    enumerate_morphisms(a, a, MorphismKind::Iso, budget)
}

pub fn is_hom_equivalent(a: &Structure, b: &Structure, budget: &Budget) -> Result<bool> {
    Ok(has_homomorphism(a, b, budget)? && has_homomorphism(b, a, budget)?)
}

/// The core of a structure together with a retraction onto it.
#[derive(Clone, Debug)]
pub struct Core {
    /// The core as an induced substructure of the input.
    pub structure: Structure,
    /// Carrier positions (in the input) of the core's elements.
    pub positions: Vec<usize>,
    /// A homomorphism input → core that is the identity on the core.
    pub retraction: Morphism,
}

/// Shrinks `a` one element at a time: whenever the current substructure maps
/// homomorphically into itself minus one element, that element is dropped.
/// When no element can be dropped every endomorphism is surjective, so the
/// remaining substructure is a core; it is also a minimum-size retract.
pub fn core(a: &Structure, budget: &Budget) -> Result<Core> {
    let mut kept: Vec<usize> = (0..a.len()).collect();
    // to_kept[x] = position in `kept` of the image of x
    let mut to_kept: Vec<usize> = (0..a.len()).collect();
    'shrink: loop {
        let current = a.induced(&kept);
        for drop in 0..kept.len() {
            let rest: Vec<usize> = (0..kept.len()).filter(|&i| i != drop).collect();
            let target = current.induced(&rest);
            if let Some(h) = search::first(&current, &target, Requirements::HOM, &[], budget)? {
                for img in to_kept.iter_mut() {
                    *img = h[*img];
                }
                kept = rest.iter().map(|&i| kept[i]).collect();
                continue 'shrink;
            }
        }
        break;
    }
    let structure = a.induced(&kept);
    // restricted to the core the map is an automorphism; undo it
    let sigma: Vec<usize> = kept
        .iter()
        .map(|&x| to_kept[x])
        .collect();
    let mut sigma_inv = vec![0; sigma.len()];
    for (i, &j) in sigma.iter().enumerate() {
        sigma_inv[j] = i;
    }
    let map: Vec<usize> = to_kept.iter().map(|&i| sigma_inv[i]).collect();
    let retraction = Morphism::new(a.clone(), structure.clone(), map, MorphismKind::Hom)?;
    Ok(Core {
        structure,
        positions: kept,
        retraction,
    })
}

/// Every endomorphism is an embedding.
pub fn is_core(a: &Structure, budget: &Budget) -> Result<bool> {
    let mut all_injective = true;
    search::Search::new(a, a, Requirements::HOM, budget).run(&[], &mut |m| {
        let mut seen = vec![false; m.len()];
        all_injective = m.iter().all(|&y| !std::mem::replace(&mut seen[y], true));
        all_injective
    })?;
    Ok(all_injective)
}

/// Outcome of the homomorphism-homogeneity check.
#[derive(Clone, Debug)]
pub struct HomogeneityVerdict {
    pub holds: bool,
    /// A local homomorphism that does not extend to an endomorphism.
    pub counterexample: Option<PartialMap>,
    pub local_maps_checked: u64,
}

/// Checks every homomorphism from an induced substructure of `a` into `a`
/// for an extension to an endomorphism.
pub fn is_homomorphism_homogeneous(a: &Structure, budget: &Budget) -> Result<HomogeneityVerdict> {
    let n = a.len();
    if n > 20 {
        return Err(Error::BudgetExceeded { nodes: budget.used() });
    }
    let mut checked = 0u64;
    for mask in 0u32..(1u32 << n) {
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let sub = a.induced(&subset);
        for local in search::all(&sub, a, Requirements::HOM, &[], budget)? {
            checked += 1;
            let fixed: Vec<(usize, usize)> = subset.iter().copied().zip(local.iter().copied()).collect();
            if !search::exists(a, a, Requirements::HOM, &fixed, budget)? {
                return Ok(HomogeneityVerdict {
                    holds: false,
                    counterexample: Some(PartialMap::from_positions(a, a, &fixed)),
                    local_maps_checked: checked,
                });
            }
        }
    }
    Ok(HomogeneityVerdict {
        holds: true,
        counterexample: None,
        local_maps_checked: checked,
    })
}
