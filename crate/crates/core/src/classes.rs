//! Classes of finite structures and their closure properties.
//!
//! A [`ClassSpec`] describes a class by one of five recipes. Membership,
//! ages, the hereditary / joint-embedding / amalgamation properties and the
//! extension property for partial isomorphisms are decided up to explicit
//! size bounds.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::canon::{all_structures, enumerate_hereditary, one_point_extensions, pinned, IsoSet};
use crate::error::{Error, Result};
use crate::families;
use crate::io::{signature_from_value, signature_to_value, structure_from_value, structure_to_value};
use crate::morphism::{has_homomorphism, is_isomorphic, Morphism, MorphismKind};
use crate::search::{self, Requirements};
use crate::structure::{Signature, Structure};

/// A class of finite structures over one signature.
#[derive(Clone, Debug)]
pub enum ClassSpec {
    /// Every finite structure.
    AllFinite { signature: Signature },
    /// Structures all of whose link substructures are isomorphic to a member
    /// of `links` and into which no member of `forbidden` maps.
    Klf {
        signature: Signature,
        links: Vec<Structure>,
        forbidden: Vec<Structure>,
    },
    /// Structures with a homomorphism into `template`.
    Csp { template: Structure },
    /// Structures into which no member of `forbidden` maps.
    ForbHom {
        signature: Signature,
        forbidden: Vec<Structure>,
    },
    /// Structures isomorphic to a listed one.
    Explicit {
        signature: Signature,
        members: Vec<Structure>,
    },
}

fn same_signature(sig: &Signature, list: &[Structure], what: &str) -> Result<()> {
    match list.iter().find(|s| s.signature() != sig) {
        Some(s) => Err(Error::InvalidClass(format!(
            "{what} structure over {} in a class over {sig}",
            s.signature()
        ))),
        None => Ok(()),
    }
}

impl ClassSpec {
    pub fn all_finite(signature: Signature) -> Self {
        ClassSpec::AllFinite { signature }
    }

    /// Checks that links are link-structures and forbidden structures are packed.
    pub fn klf(signature: Signature, links: Vec<Structure>, forbidden: Vec<Structure>) -> Result<Self> {
        same_signature(&signature, &links, "link")?;
        same_signature(&signature, &forbidden, "forbidden")?;
        if let Some(l) = links.iter().find(|l| !l.is_link_structure()) {
            return Err(Error::InvalidClass(format!("{l:?} is not a link-structure")));
        }
        if let Some(f) = forbidden.iter().find(|f| !f.is_packed()) {
            return Err(Error::InvalidClass(format!("forbidden {f:?} is not packed")));
        }
        Ok(ClassSpec::Klf {
            signature,
            links,
            forbidden,
        })
    }

    pub fn csp(template: Structure) -> Self {
        ClassSpec::Csp { template }
    }

    pub fn forb_hom(signature: Signature, forbidden: Vec<Structure>) -> Result<Self> {
        same_signature(&signature, &forbidden, "forbidden")?;
        Ok(ClassSpec::ForbHom {
            signature,
            forbidden,
        })
    }

    pub fn explicit(signature: Signature, members: Vec<Structure>) -> Result<Self> {
        same_signature(&signature, &members, "member")?;
        Ok(ClassSpec::Explicit { signature, members })
    }

    pub fn signature(&self) -> &Signature {
        match self {
            ClassSpec::AllFinite { signature }
            | ClassSpec::Klf { signature, .. }
            | ClassSpec::ForbHom { signature, .. }
            | ClassSpec::Explicit { signature, .. } => signature,
            ClassSpec::Csp { template } => template.signature(),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            ClassSpec::AllFinite { .. } => "AllFinite",
            ClassSpec::Klf { .. } => "KLF",
            ClassSpec::Csp { .. } => "CSP",
            ClassSpec::ForbHom { .. } => "ForbHom",
            ClassSpec::Explicit { .. } => "Explicit",
        }
    }

    /// Closed under inverse homomorphisms: if `A → B` and `B` is a member,
    /// so is `A`.
    pub fn is_hom_closed(&self) -> bool {
        matches!(
            self,
            ClassSpec::AllFinite { .. } | ClassSpec::Csp { .. } | ClassSpec::ForbHom { .. }
        )
    }

    /// Closed under induced substructures by construction.
    pub fn is_hereditary_by_construction(&self) -> bool {
        !matches!(self, ClassSpec::Explicit { .. })
    }

    pub fn to_value(&self) -> Value {
        let list = |v: &[Structure]| Value::Array(v.iter().map(structure_to_value).collect());
        let sig = signature_to_value(self.signature());
        match self {
            ClassSpec::AllFinite { .. } => json!({"variant": "AllFinite", "signature": sig}),
            ClassSpec::Klf { links, forbidden, .. } => json!({
                "variant": "KLF", "signature": sig, "links": list(links), "forbidden": list(forbidden)
            }),
            ClassSpec::Csp { template } => {
                json!({"variant": "CSP", "template": structure_to_value(template)})
            }
            ClassSpec::ForbHom { forbidden, .. } => {
                json!({"variant": "ForbHom", "signature": sig, "forbidden": list(forbidden)})
            }
            ClassSpec::Explicit { members, .. } => {
                json!({"variant": "Explicit", "signature": sig, "members": list(members)})
            }
        }
    }

    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self.variant_name(), self.signature())
    }
}

pub fn parse_class_spec(text: &str) -> Result<ClassSpec> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    class_spec_from_value(&v, "$")
}

fn structure_list(v: &Value, key: &str, at: &str) -> Result<Vec<Structure>> {
    match v.get(key) {
        None => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, s)| structure_from_value(s, &format!("{at}.{key}[{i}]")))
            .collect(),
        Some(_) => Err(Error::parse(format!("{at}.{key}"), "must be an array of structures")),
    }
}

/// The explicit `"signature"`, or the signature of the first listed structure.
fn declared_signature(v: &Value, lists: &[&[Structure]], at: &str) -> Result<Signature> {
    if let Some(sig) = v.get("signature") {
        return signature_from_value(sig, &format!("{at}.signature"));
    }
    lists
        .iter()
        .flat_map(|l| l.iter())
        .next()
        .map(|s| s.signature().clone())
        .ok_or_else(|| Error::parse(at, "missing `signature` and no structure to infer it from"))
}

pub fn class_spec_from_value(v: &Value, at: &str) -> Result<ClassSpec> {
    let variant = v
        .get("variant")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse(at, "missing string field `variant`"))?;
    match variant {
        "AllFinite" => {
            let sig = v
                .get("signature")
                .ok_or_else(|| Error::parse(at, "missing field `signature`"))?;
            Ok(ClassSpec::all_finite(signature_from_value(sig, &format!("{at}.signature"))?))
        }
        "KLF" => {
            let links = structure_list(v, "links", at)?;
            let forbidden = structure_list(v, "forbidden", at)?;
            let sig = declared_signature(v, &[&links, &forbidden], at)?;
            ClassSpec::klf(sig, links, forbidden)
        }
        "CSP" => {
            let t = v
                .get("template")
                .ok_or_else(|| Error::parse(at, "missing field `template`"))?;
            Ok(ClassSpec::csp(structure_from_value(t, &format!("{at}.template"))?))
        }
        "ForbHom" => {
            let forbidden = structure_list(v, "forbidden", at)?;
            let sig = declared_signature(v, &[&forbidden], at)?;
            ClassSpec::forb_hom(sig, forbidden)
        }
        "Explicit" => {
            let members = structure_list(v, "members", at)?;
            let sig = declared_signature(v, &[&members], at)?;
            ClassSpec::explicit(sig, members)
        }
        other => Err(Error::parse(
            format!("{at}.variant"),
            format!("unknown variant `{other}`"),
        )),
    }
}

/// All digraphs: every structure over one binary symbol `E`.
pub fn digraphs() -> ClassSpec {
    ClassSpec::all_finite(families::graph_signature())
}

fn graph_links() -> Vec<Structure> {
    vec![families::edgeless(1), families::complete_graph(2)]
}

/// Simple graphs: symmetric, loopless `E`-structures.
pub fn graphs() -> ClassSpec {
    ClassSpec::klf(families::graph_signature(), graph_links(), Vec::new()).expect("valid links")
}

/// Simple graphs without a triangle.
pub fn triangle_free_graphs() -> ClassSpec {
    ClassSpec::klf(
        families::graph_signature(),
        graph_links(),
        vec![families::complete_graph(3)],
    )
    .expect("valid links")
}

/// Induced substructures on single points and on the entry sets of tuples.
pub fn link_substructures(a: &Structure) -> Vec<Structure> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |mut set: Vec<usize>, out: &mut Vec<Structure>| {
        set.sort_unstable();
        set.dedup();
        if seen.insert(set.clone()) {
            out.push(a.induced(&set));
        }
    };
    for x in 0..a.len() {
        push(vec![x], &mut out);
    }
    for sym in 0..a.signature().len() {
        for t in a.tuples(sym) {
            push(t.clone(), &mut out);
        }
    }
    out
}

pub fn member(spec: &ClassSpec, a: &Structure, budget: &Budget) -> Result<bool> {
    if a.signature() != spec.signature() {
        return Err(Error::SignatureMismatch(format!(
            "structure over {} tested against a class over {}",
            a.signature(),
            spec.signature()
        )));
    }
    let avoids = |forbidden: &[Structure]| -> Result<bool> {
        for f in forbidden {
            if has_homomorphism(f, a, budget)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    match spec {
        ClassSpec::AllFinite { .. } => Ok(true),
        ClassSpec::Csp { template } => has_homomorphism(a, template, budget),
        ClassSpec::ForbHom { forbidden, .. } => avoids(forbidden),
        ClassSpec::Klf { links, forbidden, .. } => {
            for l in link_substructures(a) {
                let mut typed = false;
                for candidate in links {
                    if is_isomorphic(&l, candidate, budget)? {
                        typed = true;
                        break;
                    }
                }
                if !typed {
                    return Ok(false);
                }
            }
            avoids(forbidden)
        }
        ClassSpec::Explicit { members, .. } => {
            for m in members {
                if is_isomorphic(a, m, budget)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Representatives of the members with at most `max_size` elements, grouped
/// by size.
pub fn members(spec: &ClassSpec, max_size: usize, budget: &Budget) -> Result<Vec<Vec<Structure>>> {
    match spec {
        ClassSpec::AllFinite { signature } => Ok(all_structures(signature, max_size)?.as_ref().clone()),
        ClassSpec::Explicit { members, .. } => {
            let mut set = IsoSet::new();
            for m in members.iter().filter(|m| m.len() <= max_size) {
                set.insert(m.clone(), budget)?;
            }
            let mut levels = vec![Vec::new(); max_size + 1];
            for m in set.into_items() {
                levels[m.len()].push(m);
            }
            Ok(levels)
        }
        _ => enumerate_hereditary(
            spec.signature(),
            max_size,
            &mut |s| member(spec, s, budget),
            budget,
        ),
    }
}

/// Subsets of `0..n` with at most `max` elements, by size then lexicographically.
pub(crate) fn subsets_up_to(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max.min(n) {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&x: &usize| x + 1);
            for x in start..n {
                let mut t: Vec<usize> = s.clone();
                t.push(x);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// One representative per isomorphism class of induced substructures with
/// at most `max_size` elements, ordered by size.
pub fn age(a: &Structure, max_size: usize, budget: &Budget) -> Result<Vec<Structure>> {
    let mut set = IsoSet::new();
    for subset in subsets_up_to(a.len(), max_size) {
        set.insert(a.induced(&subset), budget)?;
    }
    Ok(set.into_items())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "HP")]
    Hereditary,
    #[serde(rename = "JEP")]
    JointEmbedding,
    #[serde(rename = "AP")]
    Amalgamation,
    #[serde(rename = "HAP")]
    HomoAmalgamation,
    /// Every amalgamation instance is witnessed by its free amalgam.
    #[serde(rename = "FreeAP")]
    FreeAmalgamation,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::Hereditary => "HP",
            Property::JointEmbedding => "JEP",
            Property::Amalgamation => "AP",
            Property::HomoAmalgamation => "HAP",
            Property::FreeAmalgamation => "FreeAP",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "HP" => Property::Hereditary,
            "JEP" => Property::JointEmbedding,
            "AP" => Property::Amalgamation,
            "HAP" => Property::HomoAmalgamation,
            "FREEAP" => Property::FreeAmalgamation,
            _ => return Err(Error::parse("property", format!("unknown property `{s}`"))),
        })
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The structures and maps of a failed instance, by role name.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub structures: Vec<(String, Structure)>,
    pub morphisms: Vec<(String, Morphism)>,
    pub reason: String,
}

impl Counterexample {
    pub fn to_value(&self) -> Value {
        let mut structures = serde_json::Map::new();
        for (name, s) in &self.structures {
            structures.insert(name.clone(), structure_to_value(s));
        }
        let mut morphisms = serde_json::Map::new();
        for (name, m) in &self.morphisms {
            morphisms.insert(name.clone(), m.to_value());
        }
        json!({"structures": structures, "morphisms": morphisms, "reason": self.reason})
    }

    /// Re-checks every recorded morphism.
    pub fn verify(&self) -> Result<()> {
        self.morphisms.iter().try_for_each(|(_, m)| m.verify())
    }
}

#[derive(Clone, Debug)]
pub struct AmalgamReport {
    pub property: Property,
    pub size_bound: usize,
    /// Largest witness searched; `None` means `|B1| + |B2| − |A|` per instance.
    pub witness_bound: Option<usize>,
    pub holds_up_to_bound: bool,
    pub counterexample: Option<Counterexample>,
    /// Instances examined (each with a verified witness unless it is the
    /// counterexample).
    pub witnesses_checked: u64,
}

impl AmalgamReport {
    pub fn to_value(&self) -> Value {
        json!({
            "property": self.property.as_str(),
            "size_bound": self.size_bound,
            "witness_bound": self.witness_bound,
            "holds_up_to_bound": self.holds_up_to_bound,
            "witnesses_checked": self.witnesses_checked,
            "counterexample": self.counterexample.as_ref().map(Counterexample::to_value),
        })
    }
}

/// An amalgam `C` of `f1: A → B1` and `f2: A → B2` with `g1 ∘ f1 = g2 ∘ f2`.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub structure: Structure,
    pub g1: Morphism,
    pub g2: Morphism,
}

impl Amalgam {
    pub fn to_value(&self) -> Value {
        json!({
            "amalgam": structure_to_value(&self.structure),
            "g1": self.g1.to_value(),
            "g2": self.g2.to_value(),
        })
    }
}

fn check_span(f1: &Morphism, f2: &Morphism) -> Result<()> {
    if f1.domain() != f2.domain() {
        return Err(Error::InvalidMap("f1 and f2 have different domains".into()));
    }
    f1.verify()?;
    f2.verify()
}

fn commutes(f1: &Morphism, f2: &Morphism, g1: &Morphism, g2: &Morphism) -> bool {
    (0..f1.domain().len()).all(|a| g1.apply(f1.apply(a)) == g2.apply(f2.apply(a)))
}

/// `C = B1 ⊔ (B2 ∖ f2(A))` with `f2(a)` glued to `f1(a)`; the tuples of `B2`
/// are transported along the gluing. Elements are tagged `1.<id>` and
/// `2.<id>`. Requires `f2` injective.
fn glue(f1: &Morphism, f2: &Morphism) -> Result<(Structure, Vec<usize>, Vec<usize>)> {
    let (b1, b2) = (f1.codomain(), f2.codomain());
    let n1 = b1.len();
    let mut g2 = vec![usize::MAX; b2.len()];
    for a in 0..f1.domain().len() {
        g2[f2.apply(a)] = f1.apply(a);
    }
    let mut elements: Vec<String> = b1.elements().iter().map(|e| format!("1.{e}")).collect();
    for (y, img) in g2.iter_mut().enumerate() {
        if *img == usize::MAX {
            *img = elements.len();
            elements.push(format!("2.{}", b2.element(y)));
        }
    }
    let rels = (0..b1.signature().len())
        .map(|sym| {
            b1.tuples(sym)
                .iter()
                .cloned()
                .chain(b2.tuples(sym).iter().map(|t| t.iter().map(|&y| g2[y]).collect()))
                .collect()
        })
        .collect();
    let c = Structure::from_indices(b1.signature().clone(), elements, rels)?;
    Ok((c, (0..n1).collect(), g2))
}

/// The free amalgam of two embeddings: no tuples beyond the images of those
/// of `B1` and `B2`.
pub fn free_amalgam(f1: &Morphism, f2: &Morphism) -> Result<Amalgam> {
    check_span(f1, f2)?;
    for f in [f1, f2] {
        if f.kind() < MorphismKind::Embedding {
            return Err(Error::KindViolation {
                kind: "embedding".into(),
                reason: format!("free amalgam needs embeddings, got a {}", f.kind()),
            });
        }
    }
    let (c, g1, g2) = glue(f1, f2)?;
    Ok(Amalgam {
        g1: Morphism::new(f1.codomain().clone(), c.clone(), g1, MorphismKind::Embedding)?,
        g2: Morphism::new(f2.codomain().clone(), c.clone(), g2, MorphismKind::Embedding)?,
        structure: c,
    })
}

/// Amalgam of a homomorphism `f1` and an embedding `f2`: `g1` is an
/// embedding and `g2` a homomorphism. With `f1` an embedding this is the free
/// amalgam.
pub fn hom_amalgam(f1: &Morphism, f2: &Morphism) -> Result<Amalgam> {
    check_span(f1, f2)?;
    if f2.kind() < MorphismKind::Embedding {
        return Err(Error::KindViolation {
            kind: "embedding".into(),
            reason: format!("second leg must be an embedding, got a {}", f2.kind()),
        });
    }
    let (c, g1, g2) = glue(f1, f2)?;
    Ok(Amalgam {
        g1: Morphism::new(f1.codomain().clone(), c.clone(), g1, MorphismKind::Embedding)?,
        g2: Morphism::new(f2.codomain().clone(), c.clone(), g2, MorphismKind::Hom)?,
        structure: c,
    })
}

#[derive(Clone, Debug)]
pub struct PushoutReport {
    pub holds: bool,
    pub probes_checked: usize,
    pub failing_probe: Option<Structure>,
    pub reason: Option<String>,
}

impl PushoutReport {
    pub fn to_value(&self) -> Value {
        json!({
            "holds": self.holds,
            "probes_checked": self.probes_checked,
            "failing_probe": self.failing_probe.as_ref().map(structure_to_value),
            "reason": self.reason,
        })
    }
}

/// Union-find quotient of `B1 ⊔ B2` by `f1(a) ~ f2(a)`, carrying the union of
/// the transported tuples. Returns the quotient and the two quotient maps.
fn set_pushout(f1: &Morphism, f2: &Morphism) -> Result<(Structure, Vec<usize>, Vec<usize>)> {
    let (b1, b2) = (f1.codomain(), f2.codomain());
    let n1 = b1.len();
    let mut parent: Vec<usize> = (0..n1 + b2.len()).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for a in 0..f1.domain().len() {
        let (x, y) = (root(&mut parent, f1.apply(a)), root(&mut parent, n1 + f2.apply(a)));
        if x != y {
            parent[x.max(y)] = x.min(y);
        }
    }
    let mut class = vec![usize::MAX; parent.len()];
    let mut count = 0;
    for x in 0..parent.len() {
        let r = root(&mut parent, x);
        if class[r] == usize::MAX {
            class[r] = count;
            count += 1;
        }
        class[x] = class[r];
    }
    let q1: Vec<usize> = class[..n1].to_vec();
    let q2: Vec<usize> = class[n1..].to_vec();
    let rels = (0..b1.signature().len())
        .map(|sym| {
            b1.tuples(sym)
                .iter()
                .map(|t| t.iter().map(|&x| q1[x]).collect())
                .chain(b2.tuples(sym).iter().map(|t| t.iter().map(|&y| q2[y]).collect()))
                .collect()
        })
        .collect();
    let p = Structure::with_size(b1.signature().clone(), count, rels)?;
    Ok((p, q1, q2))
}

/// Checks the universal property of the square `g1 ∘ f1 = g2 ∘ f2` against
/// every structure `D` with at most `probe_bound` elements (up to
/// isomorphism): each pair `h1: B1 → D`, `h2: B2 → D` with
/// `h1 ∘ f1 = h2 ∘ f2` must factor as `m ∘ g1, m ∘ g2` for exactly one
/// homomorphism `m: C → D`.
///
/// Such pairs are exactly the homomorphisms from the set-pushout `P` of the
/// span into `D`, and `m ∘ g_i = h_i` says `m ∘ q = h` for the induced map
/// `q: P → C`. When `q` is a bijection, `m` is forced to be `h ∘ q⁻¹` and
/// only its preservation of `C`'s tuples needs checking; otherwise the
/// mediating maps are counted by search.
pub fn verify_pushout(
    g1: &Morphism,
    g2: &Morphism,
    f1: &Morphism,
    f2: &Morphism,
    probe_bound: usize,
    budget: &Budget,
) -> Result<PushoutReport> {
    check_span(f1, f2)?;
    g1.verify()?;
    g2.verify()?;
    if g1.domain() != f1.codomain() || g2.domain() != f2.codomain() || g1.codomain() != g2.codomain() {
        return Err(Error::InvalidMap("the square's objects do not match".into()));
    }
    if !commutes(f1, f2, g1, g2) {
        return Err(Error::InvalidMap("g1 ∘ f1 differs from g2 ∘ f2".into()));
    }
    let c = g1.codomain();
    let (p, q1, q2) = set_pushout(f1, f2)?;
    // q: P → C, well defined because the square commutes
    let mut q = vec![usize::MAX; p.len()];
    for (x, &cls) in q1.iter().enumerate() {
        q[cls] = g1.apply(x);
    }
    for (y, &cls) in q2.iter().enumerate() {
        q[cls] = g2.apply(y);
    }
    let mut q_inv = vec![usize::MAX; c.len()];
    let mut bijective = p.len() == c.len();
    for (cls, &z) in q.iter().enumerate() {
        if q_inv[z] != usize::MAX {
            bijective = false;
        }
        q_inv[z] = cls;
    }
    // tuples of C that are not images of tuples of P
    let mut extra: Vec<(usize, Vec<usize>)> = Vec::new();
    if bijective {
        for sym in 0..c.signature().len() {
            for t in c.tuples(sym) {
                let back: Vec<usize> = t.iter().map(|&z| q_inv[z]).collect();
                if !p.holds(sym, &back) {
                    extra.push((sym, back));
                }
            }
        }
    }

    let mut probes: Vec<Structure> = all_structures(c.signature(), probe_bound)?
        .iter()
        .flatten()
        .cloned()
        .collect();
    probes.sort_by_key(|d| std::cmp::Reverse(d.tuple_count()));
    let mut checked = 0;
    for d in &probes {
        checked += 1;
        let failure = if bijective {
            if extra.is_empty() {
                None
            } else {
                let mut bad = None;
                search::Search::new(&p, d, Requirements::HOM, budget).run(&[], &mut |h| {
                    for (sym, t) in &extra {
                        let image: Vec<usize> = t.iter().map(|&x| h[x]).collect();
                        if !d.holds(*sym, &image) {
                            bad = Some(format!(
                                "a compatible pair sends a tuple of the amalgam outside `{}`",
                                c.signature().symbols()[*sym].name
                            ));
                            return false;
                        }
                    }
                    true
                })?;
                bad
            }
        } else {
            let mut bad = None;
            let mut inner: Result<()> = Ok(());
            search::Search::new(&p, d, Requirements::HOM, budget).run(&[], &mut |h| {
                let fixed: Vec<(usize, usize)> =
                    q.iter().enumerate().map(|(cls, &z)| (z, h[cls])).collect();
                let mut mediating = 0;
                let run = search::Search::new(c, d, Requirements::HOM, budget).run(&fixed, &mut |_| {
                    mediating += 1;
                    mediating < 2
                });
                if let Err(e) = run {
                    inner = Err(e);
                    return false;
                }
                if mediating != 1 {
                    bad = Some(format!("a compatible pair has {mediating} mediating maps"));
                    return false;
                }
                true
            })?;
            inner?;
            bad
        };
        if let Some(reason) = failure {
            return Ok(PushoutReport {
                holds: false,
                probes_checked: checked,
                failing_probe: Some(d.clone()),
                reason: Some(reason),
            });
        }
    }
    Ok(PushoutReport {
        holds: true,
        probes_checked: checked,
        failing_probe: None,
        reason: None,
    })
}

/// Keeps one map per orbit under post-composition with automorphisms.
fn orbit_representatives(maps: Vec<Vec<usize>>, auts: &[Vec<usize>]) -> Vec<Vec<usize>> {
    maps.into_iter()
        .filter(|m| {
            auts.iter().all(|s| {
                let moved: Vec<usize> = m.iter().map(|&y| s[y]).collect();
                moved >= *m
            })
        })
        .collect()
}

struct WitnessSearch<'a> {
    spec: &'a ClassSpec,
    witness_bound: Option<usize>,
    catalog_size: usize,
    catalog: Vec<Structure>,
}

impl WitnessSearch<'_> {
    /// Looks for `C` in the class with an embedding `g1: B1 → C` and a
    /// `g2_kind` map `g2: B2 → C` closing the square. The glued amalgam is
    /// tried first; for classes closed under inverse homomorphisms it maps
    /// into every other witness, so it is the only candidate needed.
    fn find(
        &mut self,
        f1: &Morphism,
        f2: &Morphism,
        g2_kind: MorphismKind,
        free_only: bool,
        budget: &Budget,
    ) -> Result<Option<Amalgam>> {
        let (b1, b2) = (f1.codomain(), f2.codomain());
        let bound = self
            .witness_bound
            .unwrap_or(b1.len() + b2.len() - f1.domain().len());
        let glued = hom_amalgam(f1, f2)?;
        if glued.structure.len() <= bound && member(self.spec, &glued.structure, budget)? {
            return Ok(Some(glued));
        }
        if free_only || (self.spec.is_hom_closed() && glued.structure.len() <= bound) {
            return Ok(None);
        }
        if self.catalog_size < bound || self.catalog.is_empty() {
            let levels = members(self.spec, bound, budget)?;
            self.catalog = levels.into_iter().flatten().collect();
            self.catalog_size = bound;
        }
        for c in &self.catalog {
            if c.len() < b1.len().max(b2.len()) || c.len() > bound {
                continue;
            }
            for g1 in search::all(b1, c, Requirements::EMBEDDING, &[], budget)? {
                let fixed: Vec<(usize, usize)> = (0..f1.domain().len())
                    .map(|a| (f2.apply(a), g1[f1.apply(a)]))
                    .collect();
                if let Some(g2) = search::first(b2, c, g2_kind.requirements(), &fixed, budget)? {
                    return Ok(Some(Amalgam {
                        g1: Morphism::new(b1.clone(), c.clone(), g1, MorphismKind::Embedding)?,
                        g2: Morphism::new(b2.clone(), c.clone(), g2, g2_kind)?,
                        structure: c.clone(),
                    }));
                }
            }
        }
        Ok(None)
    }
}

/// Checks `property` over all members with at most `size_bound` elements;
/// witnesses are searched up to `|B1| + |B2| − |A|` elements.
pub fn check_property(spec: &ClassSpec, property: Property, size_bound: usize, budget: &Budget) -> Result<AmalgamReport> {
    check_property_with(spec, property, size_bound, None, budget)
}

/// As [`check_property`], with an explicit witness size bound.
pub fn check_property_with(
    spec: &ClassSpec,
    property: Property,
    size_bound: usize,
    witness_bound: Option<usize>,
    budget: &Budget,
) -> Result<AmalgamReport> {
    let levels = members(spec, size_bound, budget)?;
    let all: Vec<&Structure> = levels.iter().flatten().collect();
    let mut report = AmalgamReport {
        property,
        size_bound,
        witness_bound,
        holds_up_to_bound: true,
        counterexample: None,
        witnesses_checked: 0,
    };
    let mut search = WitnessSearch {
        spec,
        witness_bound,
        catalog_size: 0,
        catalog: Vec::new(),
    };

    if property == Property::Hereditary {
        for &b in &all {
            for subset in subsets_up_to(b.len(), b.len()) {
                report.witnesses_checked += 1;
                let sub = b.induced(&subset);
                if !member(spec, &sub, budget)? {
                    let inclusion = Morphism::new(sub.clone(), b.clone(), subset, MorphismKind::Embedding)?;
                    report.holds_up_to_bound = false;
                    report.counterexample = Some(Counterexample {
                        structures: vec![("B".into(), b.clone()), ("A".into(), sub)],
                        morphisms: vec![("inclusion".into(), inclusion)],
                        reason: "an induced substructure of a member is not a member".into(),
                    });
                    return Ok(report);
                }
            }
        }
        return Ok(report);
    }

    let (f1_kind, g2_kind) = match property {
        Property::HomoAmalgamation => (MorphismKind::Hom, MorphismKind::Hom),
        _ => (MorphismKind::Embedding, MorphismKind::Embedding),
    };
    let free_only = property == Property::FreeAmalgamation;
    let bases: Vec<Structure> = if property == Property::JointEmbedding {
        vec![Structure::empty(spec.signature().clone())]
    } else {
        all.iter().map(|&s| s.clone()).collect()
    };
    for a in &bases {
        for (i1, &b1) in all.iter().enumerate() {
            if b1.len() < a.len() {
                continue;
            }
            let auts1: Vec<Vec<usize>> = search::all(b1, b1, Requirements::ISO, &[], budget)?;
            let f1s = orbit_representatives(search::all(a, b1, f1_kind.requirements(), &[], budget)?, &auts1);
            if f1s.is_empty() {
                continue;
            }
            for (i2, &b2) in all.iter().enumerate() {
                // the embedding-only properties are symmetric in B1, B2
                if b2.len() < a.len() || (f1_kind == MorphismKind::Embedding && i2 < i1) {
                    continue;
                }
                let f2s = search::all(a, b2, Requirements::EMBEDDING, &[], budget)?;
                for f1 in &f1s {
                    let f1 = Morphism::new(a.clone(), b1.clone(), f1.clone(), f1_kind)?;
                    for f2 in &f2s {
                        let f2 = Morphism::new(a.clone(), b2.clone(), f2.clone(), MorphismKind::Embedding)?;
                        report.witnesses_checked += 1;
                        match search.find(&f1, &f2, g2_kind, free_only, budget)? {
                            Some(w) => {
                                debug_assert!(commutes(&f1, &f2, &w.g1, &w.g2));
                            }
                            None => {
                                report.holds_up_to_bound = false;
                                report.counterexample = Some(Counterexample {
                                    structures: vec![
                                        ("A".into(), a.clone()),
                                        ("B1".into(), b1.clone()),
                                        ("B2".into(), b2.clone()),
                                    ],
                                    morphisms: vec![("f1".into(), f1), ("f2".into(), f2)],
                                    reason: format!(
                                        "no witness with at most {} elements",
                                        witness_bound.unwrap_or(b1.len() + b2.len() - a.len())
                                    ),
                                });
                                return Ok(report);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// All partial isomorphisms between induced substructures of `a`, as
/// position pairs.
pub fn partial_isomorphisms(a: &Structure, budget: &Budget) -> Result<Vec<Vec<(usize, usize)>>> {
    let subsets = subsets_up_to(a.len(), a.len());
    let mut out = Vec::new();
    for s in &subsets {
        let sub = a.induced(s);
        for t in subsets.iter().filter(|t| t.len() == s.len()) {
            let target = a.induced(t);
            for m in search::all(&sub, &target, Requirements::ISO, &[], budget)? {
                out.push(s.iter().zip(&m).map(|(&x, &y)| (x, t[y])).collect());
            }
        }
    }
    Ok(out)
}

/// `true` if every partial isomorphism of `a` extends to an automorphism of
/// `b`, where `a` sits at the first `|a|` positions of `b`.
fn extends_all(b: &Structure, partials: &[Vec<(usize, usize)>], budget: &Budget) -> Result<bool> {
    for p in partials {
        if !search::exists(b, b, Requirements::ISO, p, budget)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Searches for a member `B ⊇ A` with at most `size_bound` elements in which
/// every partial isomorphism of `A` extends to an automorphism, growing `A`
/// one element at a time (breadth first, up to isomorphism over `A`).
pub fn eppa_witness(a: &Structure, spec: &ClassSpec, size_bound: usize, budget: &Budget) -> Result<Option<Structure>> {
    if !member(spec, a, budget)? {
        return Err(Error::InvalidClass(format!("{a:?} is not a member of {spec}")));
    }
    let partials = partial_isomorphisms(a, budget)?;
    let mut level = vec![a.clone()];
    for size in a.len()..=size_bound {
        for b in &level {
            if extends_all(b, &partials, budget)? {
                return Ok(Some(b.clone()));
            }
        }
        if size == size_bound {
            break;
        }
        let mut next = Vec::new();
        let mut seen = IsoSet::new();
        for b in &level {
            for ext in one_point_extensions(b, budget)? {
                if member(spec, &ext, budget)? && seen.insert(pinned(&ext, a.len())?, budget)? {
                    next.push(ext);
                }
            }
        }
        level = next;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;
    use crate::morphism::find_embedding;
    use crate::morphism::PartialMap;

    fn budget() -> Budget {
        Budget::default()
    }

    fn emb(a: &Structure, b: &Structure, pairs: &[(&str, &str)]) -> Morphism {
        let fixed = PartialMap::new(pairs.iter().copied()).unwrap();
        find_embedding(a, b, &fixed, &budget()).unwrap().unwrap()
    }

    #[test]
    fn csp_membership() {
        let spec = ClassSpec::csp(complete_graph(2));
        assert!(member(&spec, &cycle_graph(4), &budget()).unwrap());
        assert!(!member(&spec, &complete_graph(3), &budget()).unwrap());
    }

    #[test]
    fn forbidden_triangle() {
        let spec = ClassSpec::forb_hom(graph_signature(), vec![complete_graph(3)]).unwrap();
        assert!(!member(&spec, &complete_graph(3), &budget()).unwrap());
        assert!(member(&spec, &cycle_graph(5), &budget()).unwrap());
    }

    #[test]
    fn simple_graphs_are_klf_members() {
        let spec = graphs();
        for g in [cycle_graph(5), complete_graph(4), edgeless(3), path_graph(4)] {
            assert!(member(&spec, &g, &budget()).unwrap());
        }
        assert!(!member(&spec, &directed_edge(), &budget()).unwrap());
        assert!(!member(&spec, &loop_point(), &budget()).unwrap());
    }

    #[test]
    fn klf_validation() {
        let err = ClassSpec::klf(graph_signature(), vec![edgeless(2)], vec![]).unwrap_err();
        assert!(matches!(err, Error::InvalidClass(_)));
        let err = ClassSpec::klf(graph_signature(), vec![], vec![edgeless(2)]).unwrap_err();
        assert!(matches!(err, Error::InvalidClass(_)));
    }

    #[test]
    fn ages() {
        assert_eq!(age(&complete_graph(3), 3, &budget()).unwrap().len(), 4);
        assert_eq!(age(&edgeless(2), 2, &budget()).unwrap().len(), 3);
        let a0 = age(&cycle_graph(5), 0, &budget()).unwrap();
        assert_eq!(a0.len(), 1);
        assert!(a0[0].is_empty());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = triangle_free_graphs();
        let back = parse_class_spec(&spec.to_json()).unwrap();
        assert_eq!(back.to_json(), spec.to_json());
        let csp = parse_class_spec(&ClassSpec::csp(complete_graph(2)).to_json()).unwrap();
        assert_eq!(csp.variant_name(), "CSP");
        assert!(parse_class_spec(r#"{"variant":"Nope"}"#).is_err());
        assert!(parse_class_spec(r#"{"variant":"KLF","links":[]}"#).is_err());
    }

    #[test]
    fn free_amalgam_of_edges_over_point() {
        let p = edgeless(1);
        let k2 = complete_graph(2);
        let f = emb(&p, &k2, &[("0", "0")]);
        let am = free_amalgam(&f, &f).unwrap();
        assert_eq!(am.structure.len(), 3);
        assert!(is_isomorphic(&am.structure, &path_graph(3), &budget()).unwrap());
        assert!(commutes(&f, &f, &am.g1, &am.g2));
    }

    #[test]
    fn free_amalgam_over_empty_is_union() {
        let e = Structure::empty(graph_signature());
        let f1 = emb(&e, &complete_graph(2), &[]);
        let f2 = emb(&e, &cycle_graph(3), &[]);
        let am = free_amalgam(&f1, &f2).unwrap();
        assert_eq!(am.structure, complete_graph(2).disjoint_union(&cycle_graph(3)).unwrap());
    }

    #[test]
    fn triangles_over_edge() {
        let k2 = complete_graph(2);
        let k3 = complete_graph(3);
        let f = emb(&k2, &k3, &[("0", "0"), ("1", "1")]);
        let am = free_amalgam(&f, &f).unwrap();
        assert_eq!(am.structure.len(), 4);
        assert_eq!(am.structure.tuples(0).len(), 10);
        let apexes = (am.structure.index_of("1.2").unwrap(), am.structure.index_of("2.2").unwrap());
        assert!(!am.structure.holds(0, &[apexes.0, apexes.1]));
        let report = verify_pushout(&am.g1, &am.g2, &f, &f, 3, &budget()).unwrap();
        assert!(report.holds);
        assert_eq!(report.probes_checked, 117);

        // an extra apex–apex edge breaks the universal property
        let mut rels = am.structure.relation_lists();
        rels[0].push(vec![apexes.0, apexes.1]);
        rels[0].push(vec![apexes.1, apexes.0]);
        let c = Structure::from_indices(graph_signature(), am.structure.elements().to_vec(), rels).unwrap();
        let g1 = Morphism::new(k3.clone(), c.clone(), am.g1.map().to_vec(), MorphismKind::Hom).unwrap();
        let g2 = Morphism::new(k3.clone(), c.clone(), am.g2.map().to_vec(), MorphismKind::Hom).unwrap();
        let report = verify_pushout(&g1, &g2, &f, &f, 3, &budget()).unwrap();
        assert!(!report.holds);
    }

    #[test]
    fn coproduct_pushout() {
        let e = Structure::empty(graph_signature());
        let f1 = emb(&e, &complete_graph(2), &[]);
        let f2 = emb(&e, &directed_edge(), &[]);
        let am = free_amalgam(&f1, &f2).unwrap();
        assert!(verify_pushout(&am.g1, &am.g2, &f1, &f2, 2, &budget()).unwrap().holds);
    }

    #[test]
    fn non_surjective_square_fails_uniqueness() {
        // C has an extra isolated element: two mediating maps into a 2-element probe
        let e = Structure::empty(graph_signature());
        let p = edgeless(1);
        let f = emb(&e, &p, &[]);
        let c = edgeless(3);
        let g1 = Morphism::new(p.clone(), c.clone(), vec![0], MorphismKind::Embedding).unwrap();
        let g2 = Morphism::new(p.clone(), c.clone(), vec![1], MorphismKind::Embedding).unwrap();
        let report = verify_pushout(&g1, &g2, &f, &f, 2, &budget()).unwrap();
        assert!(!report.holds);
    }

    #[test]
    fn hereditary_property() {
        let b = budget();
        let explicit = |ms: Vec<Structure>| ClassSpec::explicit(graph_signature(), ms).unwrap();
        let listed = explicit(vec![edgeless(1), complete_graph(2), complete_graph(3)]);
        let r = check_property(&listed, Property::Hereditary, 3, &b).unwrap();
        assert!(!r.holds_up_to_bound);
        // the failing substructure is the empty one
        assert!(r.counterexample.unwrap().structures[1].1.is_empty());
        let with_empty = explicit(vec![
            Structure::empty(graph_signature()),
            edgeless(1),
            complete_graph(2),
            complete_graph(3),
        ]);
        assert!(check_property(&with_empty, Property::Hereditary, 3, &b).unwrap().holds_up_to_bound);
    }

    #[test]
    fn graphs_amalgamate() {
        let b = budget();
        let r = check_property(&graphs(), Property::Amalgamation, 3, &b).unwrap();
        assert!(r.holds_up_to_bound);
        assert!(r.witnesses_checked > 0);
        assert!(check_property(&graphs(), Property::JointEmbedding, 3, &b).unwrap().holds_up_to_bound);
        assert!(check_property(&triangle_free_graphs(), Property::FreeAmalgamation, 3, &b)
            .unwrap()
            .holds_up_to_bound);
    }

    #[test]
    fn explicit_class_amalgamates_by_identification() {
        // {∅, point, K2}: two edges over a point amalgamate into one edge,
        // while their free amalgam (a path) is not listed
        let spec = ClassSpec::explicit(
            graph_signature(),
            vec![Structure::empty(graph_signature()), edgeless(1), complete_graph(2)],
        )
        .unwrap();
        let b = Budget::default();
        assert!(check_property(&spec, Property::Amalgamation, 2, &b).unwrap().holds_up_to_bound);
        let r = check_property(&spec, Property::FreeAmalgamation, 2, &b).unwrap();
        assert!(!r.holds_up_to_bound);
        let ce = r.counterexample.unwrap();
        ce.verify().unwrap();
    }

    #[test]
    fn eppa_small_cases() {
        let b = budget();
        let w = eppa_witness(&edgeless(1), &graphs(), 3, &b).unwrap().unwrap();
        assert_eq!(w.len(), 1);
        let w = eppa_witness(&complete_graph(2), &graphs(), 4, &b).unwrap().unwrap();
        assert_eq!(w.len(), 2);
        let w = eppa_witness(&directed_edge(), &digraphs(), 6, &b).unwrap().unwrap();
        assert_eq!(w.len(), 3);
        assert!(member(&digraphs(), &w, &b).unwrap());
        assert!(eppa_witness(&directed_edge(), &digraphs(), 2, &b).unwrap().is_none());
    }
}
