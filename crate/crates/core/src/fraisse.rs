//! Finite approximants of Fraïssé limits.
//!
//! The builder grows a structure `U` inside a class until every demand is
//! met: for each induced substructure `A ≤ U` with fewer than `demand_size`
//! elements and each one-point extension `B ⊇ A` in the class, some embedding
//! of `B` into `U` fixes `A`. Demands are processed breadth first. A demand
//! already met by an existing embedding costs nothing; otherwise a fresh
//! element is adjoined carrying exactly the tuples `B` prescribes (the free
//! amalgam of `U` and `B` over `A`).
//!
//! Free amalgamation alone reaches a fixpoint only for small demand sizes:
//! from size 3 on, each fresh element raises new unmet demands. In seeded
//! mode the fresh element is also linked to the other elements at random
//! (one element at a time, keeping class membership), which lets the
//! construction close up the way large random structures do.
//!
//! Homogeneity is verified by the back-and-forth game: a partial isomorphism
//! `ā ↦ b̄` survives `d` rounds iff the `d`-round types of `ā` and `b̄`
//! agree, where the 0-round type is the quantifier-free type and the
//! `d`-round type of `ā` records the set of `(d−1)`-round types of `āx` over
//! all elements `x`.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::canon::{one_point_extensions, pinned, IsoSet};
use crate::classes::{check_property, member, subsets_up_to, ClassSpec, Property};
use crate::error::{Error, Result};
use crate::io::structure_to_value;
use crate::morphism::{verify_kind, MorphismKind, PartialMap};
use crate::search::{self, Requirements};
use crate::structure::{Signature, Structure};

/// One-point extension types keyed by substructure size and tuples.
type ExtensionCache = HashMap<(usize, Vec<Vec<Vec<usize>>>), Vec<Structure>>;

/// A membership test for a class of finite structures.
pub trait ClassOracle {
    fn signature(&self) -> &Signature;
    fn admits(&self, s: &Structure, budget: &Budget) -> Result<bool>;
}

impl ClassOracle for ClassSpec {
    fn signature(&self) -> &Signature {
        ClassSpec::signature(self)
    }

    fn admits(&self, s: &Structure, budget: &Budget) -> Result<bool> {
        member(self, s, budget)
    }
}

/// One-point extensions of `a` inside the class, up to isomorphism over `a`.
/// In each, the elements of `a` keep their positions and the new element is
/// last.
pub fn extension_types(a: &Structure, class: &dyn ClassOracle, budget: &Budget) -> Result<Vec<Structure>> {
    let mut seen = IsoSet::new();
    let mut out = Vec::new();
    for ext in one_point_extensions(a, budget)? {
        if class.admits(&ext, budget)? && seen.insert(pinned(&ext, a.len())?, budget)? {
            out.push(ext);
        }
    }
    Ok(out)
}

/// A demand: the extension `extension` of the substructure on `base`.
#[derive(Clone, Debug)]
pub struct Demand {
    /// Ids in `U` of the substructure, in the order of the extension's first
    /// elements.
    pub base: Vec<String>,
    pub extension: Structure,
    /// Ids in `U` of the extension's elements, when realized.
    pub witness: Option<Vec<String>>,
    /// The witness used an element adjoined for this demand.
    pub fresh: bool,
}

impl Demand {
    /// Re-checks that the witness is an embedding fixing the base.
    pub fn verify(&self, u: &Structure) -> Result<bool> {
        let Some(w) = &self.witness else {
            return Ok(false);
        };
        let map = w.iter().map(|id| u.require_index(id)).collect::<Result<Vec<_>>>()?;
        let fixes_base = self.base.iter().zip(w).all(|(b, x)| b == x);
        Ok(fixes_base && verify_kind(&self.extension, u, &map, MorphismKind::Embedding).is_ok())
    }

    pub fn to_value(&self) -> Value {
        json!({
            "base": self.base,
            "extension": structure_to_value(&self.extension),
            "witness": self.witness,
            "fresh": self.fresh,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub demand_size: usize,
    /// Maximum number of elements the builder may adjoin.
    pub stage_budget: usize,
    /// Seeded mode: random links for fresh elements.
    pub seed: Option<u64>,
}

impl BuildOptions {
    pub fn new(demand_size: usize, stage_budget: usize) -> Self {
        BuildOptions {
            demand_size,
            stage_budget,
            seed: None,
        }
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BuildOutcome {
    pub structure: Structure,
    pub stages: usize,
    pub realized: Vec<Demand>,
    pub unmet: Vec<Demand>,
}

/// Largest number of alternative tuple sets tried for a fresh element.
const ALTERNATIVE_BITS_LIMIT: usize = 16;

pub(crate) fn build_in(class: &dyn ClassOracle, opts: BuildOptions, budget: &Budget) -> Result<BuildOutcome> {
    let sig = class.signature().clone();
    let mut u = Structure::empty(sig.clone());
    if !class.admits(&u, budget)? {
        return Err(Error::ConstructionRefused("the empty structure is not a member".into()));
    }
    let mut rng = opts.seed.map(ChaCha8Rng::seed_from_u64);
    let mut cache: ExtensionCache = HashMap::new();
    let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
    if opts.demand_size > 0 {
        queue.push_back(Vec::new());
    }
    let mut out = BuildOutcome {
        structure: u.clone(),
        stages: 0,
        realized: Vec::new(),
        unmet: Vec::new(),
    };
    let ids = |u: &Structure, pos: &[usize]| -> Vec<String> {
        pos.iter().map(|&x| u.element(x).to_string()).collect()
    };

    while let Some(base) = queue.pop_front() {
        let a = u.induced(&base);
        let key = (a.len(), a.relation_lists());
        if !cache.contains_key(&key) {
            let numbered = Structure::with_size(sig.clone(), a.len(), key.1.clone())?;
            cache.insert(key.clone(), extension_types(&numbered, class, budget)?);
        }
        let mut types = cache[&key].clone();
        if let Some(rng) = rng.as_mut() {
            types.shuffle(rng);
        }
        for b in types {
            let fixed: Vec<(usize, usize)> = base.iter().copied().enumerate().collect();
            if let Some(m) = search::first(&b, &u, Requirements::EMBEDDING, &fixed, budget)? {
                out.realized.push(Demand {
                    base: ids(&u, &base),
                    extension: b,
                    witness: Some(ids(&u, &m)),
                    fresh: false,
                });
                continue;
            }
            if out.stages == opts.stage_budget {
                out.unmet.push(Demand {
                    base: ids(&u, &base),
                    extension: b,
                    witness: None,
                    fresh: false,
                });
                continue;
            }
            let next = adjoin(class, &u, &base, &b, rng.as_mut(), budget)?;
            u = next;
            out.stages += 1;
            let z = u.len() - 1;
            let mut witness = base.clone();
            witness.push(z);
            out.realized.push(Demand {
                base: ids(&u, &base),
                extension: b,
                witness: Some(ids(&u, &witness)),
                fresh: true,
            });
            for mut s in subsets_up_to(z, opts.demand_size.saturating_sub(2)) {
                if s.len() + 1 < opts.demand_size {
                    s.push(z);
                    queue.push_back(s);
                }
            }
        }
    }
    out.structure = u;
    Ok(out)
}

/// `u` plus a fresh element `z` such that `base ∪ {z}` induces `b` (base at
/// `b`'s first positions, `z` last).
fn adjoin(
    class: &dyn ClassOracle,
    u: &Structure,
    base: &[usize],
    b: &Structure,
    rng: Option<&mut ChaCha8Rng>,
    budget: &Budget,
) -> Result<Structure> {
    let n = u.len();
    let k = base.len();
    let mut to_u: Vec<usize> = base.to_vec();
    to_u.push(n);
    let mut rels = u.relation_lists();
    for (sym, r) in rels.iter_mut().enumerate() {
        for t in b.tuples(sym) {
            if t.contains(&k) {
                r.push(t.iter().map(|&x| to_u[x]).collect());
            }
        }
    }
    let mut elements = u.elements().to_vec();
    elements.push(crate::canon::fresh_id(u));
    let sig = u.signature().clone();
    let build = |rels: Vec<Vec<Vec<usize>>>| Structure::from_indices(sig.clone(), elements.clone(), rels);

    let outside: Vec<usize> = (0..n).filter(|x| !base.contains(x)).collect();
    if let Some(rng) = rng {
        let mut order = outside.clone();
        order.shuffle(rng);
        let mut current = rels.clone();
        for w in order {
            let mut patterns = link_patterns(&sig, n, w);
            patterns.shuffle(rng);
            for p in patterns {
                let mut trial = current.clone();
                for (sym, t) in p {
                    trial[sym].push(t);
                }
                let s = build(trial.clone())?;
                if class.admits(&s, budget)? {
                    current = trial;
                    break;
                }
            }
        }
        let s = build(current)?;
        if class.admits(&s, budget)? {
            return Ok(s);
        }
    }

    let free = build(rels.clone())?;
    if class.admits(&free, budget)? {
        return Ok(free);
    }
    // other tuple choices between the fresh element and the rest of U
    let mut candidates: Vec<(usize, Vec<usize>)> = Vec::new();
    for w in &outside {
        candidates.extend(link_patterns(&sig, n, *w).into_iter().flatten().filter(|(_, t)| t.len() > 1));
    }
    candidates.sort();
    candidates.dedup();
    if candidates.len() > ALTERNATIVE_BITS_LIMIT {
        return Err(Error::ConstructionRefused(format!(
            "the free amalgam leaves the class and {} candidate tuples are too many to search",
            candidates.len()
        )));
    }
    let mut masks: Vec<u32> = (1..1u32 << candidates.len()).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        budget.charge(1)?;
        let mut trial = rels.clone();
        for (bit, (sym, t)) in candidates.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                trial[*sym].push(t.clone());
            }
        }
        let s = build(trial)?;
        if class.admits(&s, budget)? {
            return Ok(s);
        }
    }
    Err(Error::ConstructionRefused(
        "no placement of the fresh element keeps the structure in the class".into(),
    ))
}

/// All nonempty sets of tuples whose entries are exactly the fresh element
/// `z` and `w` (both occurring), plus the empty set.
fn link_patterns(sig: &Signature, z: usize, w: usize) -> Vec<Vec<(usize, Vec<usize>)>> {
    let mut tuples = Vec::new();
    for sym in 0..sig.len() {
        let arity = sig.arity(sym);
        for code in 0..(1usize << arity) {
            let t: Vec<usize> = (0..arity).map(|i| if code >> i & 1 == 1 { z } else { w }).collect();
            if t.contains(&z) && t.contains(&w) {
                tuples.push((sym, t));
            }
        }
    }
    let count = tuples.len().min(ALTERNATIVE_BITS_LIMIT);
    (0..1usize << count)
        .map(|mask| {
            (0..count)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| tuples[i].clone())
                .collect()
        })
        .collect()
}

/// A finite stage of the Fraïssé limit of a class.
#[derive(Clone, Debug)]
pub struct GenericApproximant {
    pub structure: Structure,
    /// Number of elements adjoined.
    pub stage: usize,
    pub spec: ClassSpec,
    pub demand_size: usize,
    pub realized_extensions: Vec<Demand>,
    /// Demands left open because the stage budget ran out.
    pub unmet: Vec<Demand>,
}

impl GenericApproximant {
    pub fn complete(&self) -> bool {
        self.unmet.is_empty()
    }

    /// Membership of the structure and every logged witness.
    pub fn verify(&self, budget: &Budget) -> Result<bool> {
        if !member(&self.spec, &self.structure, budget)? {
            return Ok(false);
        }
        for d in &self.realized_extensions {
            if !d.verify(&self.structure)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_value(&self) -> Value {
        json!({
            "structure": structure_to_value(&self.structure),
            "stage": self.stage,
            "demand_size": self.demand_size,
            "complete": self.complete(),
            "demands_realized": self.realized_extensions.len(),
            "demands_by_fresh_element": self.realized_extensions.iter().filter(|d| d.fresh).count(),
            "unmet": self.unmet.iter().map(Demand::to_value).collect::<Vec<_>>(),
        })
    }
}

/// Refuses classes failing HP, JEP or AP up to `bound`.
pub(crate) fn require_amalgamation_class(spec: &ClassSpec, bound: usize, budget: &Budget) -> Result<()> {
    for p in [Property::Hereditary, Property::JointEmbedding, Property::Amalgamation] {
        let r = check_property(spec, p, bound, budget)?;
        if !r.holds_up_to_bound {
            return Err(Error::ConstructionRefused(format!(
                "{spec} fails {p} at size bound {bound}"
            )));
        }
    }
    Ok(())
}

pub fn build_generic(spec: &ClassSpec, demand_size: usize, stage_budget: usize, budget: &Budget) -> Result<GenericApproximant> {
    build_generic_with(spec, BuildOptions::new(demand_size, stage_budget), budget)
}

pub fn build_generic_with(spec: &ClassSpec, opts: BuildOptions, budget: &Budget) -> Result<GenericApproximant> {
    require_amalgamation_class(spec, opts.demand_size, budget)?;
    let out = build_in(spec, opts, budget)?;
    Ok(GenericApproximant {
        structure: out.structure,
        stage: out.stages,
        spec: spec.clone(),
        demand_size: opts.demand_size,
        realized_extensions: out.realized,
        unmet: out.unmet,
    })
}

#[derive(Clone, Debug)]
pub struct ExtensionReport {
    pub holds: bool,
    pub satisfied: usize,
    pub unsatisfied: Vec<Demand>,
}

impl ExtensionReport {
    pub fn to_value(&self) -> Value {
        json!({
            "holds": self.holds,
            "satisfied": self.satisfied,
            "unsatisfied": self.unsatisfied.iter().map(Demand::to_value).collect::<Vec<_>>(),
        })
    }
}

/// Every one-point extension in the class of every induced substructure with
/// fewer than `k` elements embeds over it.
pub fn verify_extension_property(u: &Structure, class: &dyn ClassOracle, k: usize, budget: &Budget) -> Result<ExtensionReport> {
    if !class.admits(u, budget)? {
        return Err(Error::InvalidClass("the structure is not a member of the class".into()));
    }
    let mut report = ExtensionReport {
        holds: true,
        satisfied: 0,
        unsatisfied: Vec::new(),
    };
    let mut cache: ExtensionCache = HashMap::new();
    for base in subsets_up_to(u.len(), k.saturating_sub(1)).into_iter().filter(|s| s.len() < k) {
        let a = u.induced(&base);
        let key = (a.len(), a.relation_lists());
        if !cache.contains_key(&key) {
            let numbered = Structure::with_size(u.signature().clone(), a.len(), key.1.clone())?;
            cache.insert(key.clone(), extension_types(&numbered, class, budget)?);
        }
        for b in &cache[&key] {
            let fixed: Vec<(usize, usize)> = base.iter().copied().enumerate().collect();
            let base_ids: Vec<String> = base.iter().map(|&x| u.element(x).to_string()).collect();
            match search::first(b, u, Requirements::EMBEDDING, &fixed, budget)? {
                Some(_) => report.satisfied += 1,
                None => {
                    report.holds = false;
                    report.unsatisfied.push(Demand {
                        base: base_ids,
                        extension: b.clone(),
                        witness: None,
                        fresh: false,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct HomogeneityReport {
    pub holds: bool,
    pub maps_checked: u64,
    pub stuck_count: u64,
    /// The first few stuck partial isomorphisms.
    pub stuck: Vec<PartialMap>,
}

impl HomogeneityReport {
    pub fn to_value(&self) -> Value {
        json!({
            "holds": self.holds,
            "maps_checked": self.maps_checked,
            "stuck_count": self.stuck_count,
            "stuck": self.stuck.iter().map(PartialMap::to_value).collect::<Vec<_>>(),
        })
    }
}

const STUCK_SAMPLES: usize = 20;

/// Interned back-and-forth types of tuples of one structure, optionally with
/// a coloring that is part of the quantifier-free type.
pub(crate) struct Typer<'a> {
    s: &'a Structure,
    interner: HashMap<Vec<usize>, usize>,
    budget: &'a Budget,
}

impl<'a> Typer<'a> {
    pub fn new(s: &'a Structure, budget: &'a Budget) -> Self {
        Typer {
            s,
            interner: HashMap::new(),
            budget,
        }
    }

    fn intern(&mut self, key: Vec<usize>) -> usize {
        let next = self.interner.len();
        *self.interner.entry(key).or_insert(next)
    }

    pub fn qf_type(&mut self, t: &[usize], colors: Option<&[usize]>) -> Result<usize> {
        self.budget.charge(1)?;
        let len = t.len();
        let mut key = vec![0, len];
        for i in 0..len {
            key.push((0..=i).find(|&j| t[j] == t[i]).expect("i itself"));
        }
        if let Some(c) = colors {
            key.extend(t.iter().map(|&x| c[x]));
        }
        let sig = self.s.signature();
        let mut probe = Vec::new();
        for sym in 0..sig.len() {
            let arity = sig.arity(sym);
            let combos = len.checked_pow(arity as u32).unwrap_or(0);
            let mut bits = 0usize;
            let mut word = 0;
            for code in 0..combos {
                probe.clear();
                let mut c = code;
                for _ in 0..arity {
                    probe.push(t[c % len]);
                    c /= len;
                }
                if self.s.holds(sym, &probe) {
                    word |= 1 << bits;
                }
                bits += 1;
                if bits == usize::BITS as usize {
                    key.push(word);
                    word = 0;
                    bits = 0;
                }
            }
            key.push(word);
        }
        Ok(self.intern(key))
    }

    /// The `depth`-round back-and-forth type of `t`.
    pub fn game_type(&mut self, t: &mut Vec<usize>, depth: usize, colors: Option<&[usize]>) -> Result<usize> {
        let qf = self.qf_type(t, colors)?;
        if depth == 0 {
            return Ok(qf);
        }
        let mut children = Vec::with_capacity(self.s.len());
        for x in 0..self.s.len() {
            t.push(x);
            children.push(self.game_type(t, depth - 1, colors)?);
            t.pop();
        }
        children.sort_unstable();
        children.dedup();
        let mut key = vec![1, depth, qf];
        key.extend(children);
        Ok(self.intern(key))
    }
}

/// Injective tuples of length `k` over `0..n`, in lexicographic order.
pub(crate) fn injective_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &out {
            for x in (0..n).filter(|x| !t.contains(x)) {
                let mut t = t.clone();
                t.push(x);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Back-and-forth check of all partial maps `ā ↦ b̄` (|ā| ≤ `part_size`)
/// that are isomorphisms when `ā` is colored by `source_colors` and `b̄` by
/// `target_colors`.
pub(crate) fn back_and_forth(
    u: &Structure,
    source_colors: Option<&[usize]>,
    target_colors: Option<&[usize]>,
    part_size: usize,
    depth: usize,
    budget: &Budget,
) -> Result<HomogeneityReport> {
    let mut typer = Typer::new(u, budget);
    let mut report = HomogeneityReport {
        holds: true,
        maps_checked: 0,
        stuck_count: 0,
        stuck: Vec::new(),
    };
    for k in 0..=part_size.min(u.len()) {
        // targets grouped by quantifier-free type
        let mut by_qf: HashMap<usize, Vec<(Vec<usize>, usize)>> = HashMap::new();
        for b in injective_tuples(u.len(), k) {
            let qf = typer.qf_type(&b, target_colors)?;
            let ty = typer.game_type(&mut b.clone(), depth, target_colors)?;
            by_qf.entry(qf).or_default().push((b, ty));
        }
        for a in subsets_up_to(u.len(), k).into_iter().filter(|s| s.len() == k) {
            let qf = typer.qf_type(&a, source_colors)?;
            let Some(targets) = by_qf.get(&qf) else { continue };
            let ty = typer.game_type(&mut a.clone(), depth, source_colors)?;
            for (b, tb) in targets {
                report.maps_checked += 1;
                if *tb != ty {
                    report.holds = false;
                    report.stuck_count += 1;
                    if report.stuck.len() < STUCK_SAMPLES {
                        let pairs: Vec<(usize, usize)> = a.iter().copied().zip(b.iter().copied()).collect();
                        report.stuck.push(PartialMap::from_positions(u, u, &pairs));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Every partial isomorphism between induced substructures with at most
/// `part_size` elements survives `depth` rounds of back-and-forth in `u`.
pub fn verify_homogeneity(u: &Structure, part_size: usize, depth: usize, budget: &Budget) -> Result<HomogeneityReport> {
    back_and_forth(u, None, None, part_size, depth, budget)
}
