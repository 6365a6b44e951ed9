//! Structures colored by a homomorphism into a fixed finite template.
//!
//! A colored structure `(A, a)` pairs a structure with a homomorphism
//! `a: A → T`. Strong morphisms `f` satisfy `b∘f = a`; weak morphisms are
//! pairs `(f, g)` with `g ∈ Aut(T)` and `b∘f = g∘a`.
//!
//! Most computations go through the unary encoding `S(A, a)`: the signature
//! gains one unary symbol `M_t` per template element, interpreted as the
//! color class `a⁻¹(t)`. Strong homomorphisms and embeddings of colored
//! structures are exactly the homomorphisms and embeddings of their
//! encodings.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde_json::{json, Map, Value};

use crate::budget::Budget;
use crate::classes::{member, ClassSpec};
use crate::error::{Error, Result};
use crate::fraisse::{
    back_and_forth, build_in, require_amalgamation_class, verify_extension_property, BuildOptions, ClassOracle,
    Demand, ExtensionReport, HomogeneityReport,
};
use crate::io::{element_id, structure_from_value, structure_to_value};
use crate::morphism::{automorphism_group, Morphism, MorphismKind, PartialMap};
use crate::search::{self, Requirements};
use crate::structure::{Signature, Structure, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredStructure {
    base: Structure,
    template: Structure,
    color: Vec<usize>,
}

/// Validates that `color` (by element id) is a homomorphism `base → template`.
pub fn make_colored(base: Structure, template: Structure, color: &BTreeMap<String, String>) -> Result<ColoredStructure> {
    let mut map = Vec::with_capacity(base.len());
    for id in base.elements() {
        let t = color
            .get(id)
            .ok_or_else(|| Error::InvalidMap(format!("element {id} has no color")))?;
        map.push(template.require_index(t)?);
    }
    for id in color.keys() {
        base.require_index(id)?;
    }
    ColoredStructure::new(base, template, map)
}

impl ColoredStructure {
    /// `color[i]` is the template position of base element `i`.
    pub fn new(base: Structure, template: Structure, color: Vec<usize>) -> Result<Self> {
        base.check_signature(&template)?;
        if color.len() != base.len() {
            return Err(Error::InvalidMap(format!(
                "color map has {} entries for {} elements",
                color.len(),
                base.len()
            )));
        }
        if let Some(&t) = color.iter().find(|&&t| t >= template.len()) {
            return Err(Error::InvalidMap(format!("color position {t} outside the template")));
        }
        if let Some(reason) = color_violation(&base, &template, &color) {
            return Err(Error::ColorNotHomomorphism(reason));
        }
        Ok(ColoredStructure { base, template, color })
    }

    /// `(T, id)`.
    pub fn identity_colored(template: &Structure) -> Self {
        ColoredStructure {
            base: template.clone(),
            template: template.clone(),
            color: (0..template.len()).collect(),
        }
    }

    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn template(&self) -> &Structure {
        &self.template
    }

    pub fn color(&self) -> &[usize] {
        &self.color
    }

    pub fn color_of(&self, id: &str) -> Option<&str> {
        let i = self.base.index_of(id)?;
        Some(self.template.element(self.color[i]))
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn is_surjective(&self) -> bool {
        let hit: HashSet<usize> = self.color.iter().copied().collect();
        hit.len() == self.template.len()
    }

    /// The same base recolored by `g∘a`, for a template map `g` given by positions.
    pub fn recolored(&self, g: &[usize]) -> Result<Self> {
        ColoredStructure::new(
            self.base.clone(),
            self.template.clone(),
            self.color.iter().map(|&t| g[t]).collect(),
        )
    }

    pub fn color_map(&self) -> BTreeMap<String, String> {
        self.base
            .elements()
            .iter()
            .zip(&self.color)
            .map(|(x, &t)| (x.clone(), self.template.element(t).to_string()))
            .collect()
    }

    pub fn to_value(&self) -> Value {
        let mut v = structure_to_value(&self.base);
        let obj = v.as_object_mut().expect("structures encode as objects");
        obj.insert("template".into(), structure_to_value(&self.template));
        let color: Map<String, Value> = self
            .color_map()
            .into_iter()
            .map(|(k, t)| (k, Value::from(t)))
            .collect();
        obj.insert("color".into(), Value::Object(color));
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_value()).expect("json values serialize")
    }
}

fn color_violation(base: &Structure, template: &Structure, color: &[usize]) -> Option<String> {
    let sig = base.signature();
    for sym in 0..sig.len() {
        for t in base.tuples(sym) {
            let image: Vec<usize> = t.iter().map(|&x| color[x]).collect();
            if !template.holds(sym, &image) {
                let names: Vec<&str> = t.iter().map(|&x| base.element(x)).collect();
                let colors: Vec<&str> = image.iter().map(|&x| template.element(x)).collect();
                return Some(format!(
                    "{}({}) is colored {}({}), which the template lacks",
                    sig.symbols()[sym].name,
                    names.join(","),
                    sig.symbols()[sym].name,
                    colors.join(",")
                ));
            }
        }
    }
    None
}

pub fn parse_colored(text: &str) -> Result<ColoredStructure> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    colored_from_value(&value, "$")
}

pub fn colored_from_value(v: &Value, at: &str) -> Result<ColoredStructure> {
    let base = structure_from_value(v, at)?;
    let template = structure_from_value(
        v.get("template")
            .ok_or_else(|| Error::parse(at, "missing field `template`"))?,
        &format!("{at}.template"),
    )?;
    let color = v
        .get("color")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::parse(at, "missing object field `color`"))?
        .iter()
        .map(|(k, t)| Ok((k.clone(), element_id(t, &format!("{at}.color.{k}"))?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    make_colored(base, template, &color)
}

/// A pair `(f, g)` with `g ∈ Aut(T)` and `b∘f = g∘a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakMorphism {
    pub f: Morphism,
    pub g: Morphism,
}

impl WeakMorphism {
    pub fn new(source: &ColoredStructure, target: &ColoredStructure, f: Morphism, g: Morphism) -> Result<Self> {
        let w = WeakMorphism { f, g };
        w.verify(source, target)?;
        Ok(w)
    }

    /// Re-checks the color equation pointwise.
    pub fn verify(&self, source: &ColoredStructure, target: &ColoredStructure) -> Result<()> {
        self.f.verify()?;
        self.g.verify()?;
        if self.g.kind() != MorphismKind::Iso || self.g.domain() != source.template() || self.g.codomain() != target.template() {
            return Err(Error::InvalidMap("the template part must be an automorphism of the template".into()));
        }
        if self.f.domain() != source.base() || self.f.codomain() != target.base() {
            return Err(Error::InvalidMap("the base part has the wrong domain or codomain".into()));
        }
        for x in 0..source.len() {
            if target.color[self.f.apply(x)] != self.g.apply(source.color[x]) {
                return Err(Error::InvalidMap(format!(
                    "color equation fails at {}",
                    source.base.element(x)
                )));
            }
        }
        Ok(())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &WeakMorphism) -> Result<WeakMorphism> {
        Ok(WeakMorphism {
            f: other.f.then(&self.f)?,
            g: other.g.then(&self.g)?,
        })
    }

    pub fn to_value(&self) -> Value {
        json!({"f": self.f.to_value(), "g": self.g.to_value()})
    }
}

fn same_template(a: &ColoredStructure, b: &ColoredStructure) -> Result<()> {
    if a.template != b.template {
        return Err(Error::SignatureMismatch(
            "colored structures over different templates".into(),
        ));
    }
    Ok(())
}

fn find_strong(a: &ColoredStructure, b: &ColoredStructure, fixed: &PartialMap, kind: MorphismKind, budget: &Budget) -> Result<Option<Morphism>> {
    same_template(a, b)?;
    let fixed = fixed.positions(&a.base, &b.base)?;
    let (ea, eb) = (encode_s(a), encode_s(b));
    Ok(search::first(&ea, &eb, kind.requirements(), &fixed, budget)?
        .map(|m| Morphism::trusted(&a.base, &b.base, m, kind)))
}

/// A homomorphism `f` with `b∘f = a` extending `fixed`.
pub fn find_strong_hom(a: &ColoredStructure, b: &ColoredStructure, fixed: &PartialMap, budget: &Budget) -> Result<Option<Morphism>> {
    find_strong(a, b, fixed, MorphismKind::Hom, budget)
}

/// An embedding `f` with `b∘f = a` extending `fixed`.
pub fn find_strong_embedding(a: &ColoredStructure, b: &ColoredStructure, fixed: &PartialMap, budget: &Budget) -> Result<Option<Morphism>> {
    find_strong(a, b, fixed, MorphismKind::Embedding, budget)
}

/// Automorphisms `f` of the base with `a∘f = a`, identity first.
pub fn strong_automorphisms(a: &ColoredStructure, budget: &Budget) -> Result<Vec<Morphism>> {
    let e = encode_s(a);
    Ok(search::all(&e, &e, Requirements::ISO, &[], budget)?
        .into_iter()
        .map(|m| Morphism::trusted(&a.base, &a.base, m, MorphismKind::Iso))
        .collect())
}

/// Pairs `(f, g)` with `f ∈ Aut(A)`, `g ∈ Aut(T)` and `a∘f = g∘a`.
pub fn weak_automorphisms(a: &ColoredStructure, budget: &Budget) -> Result<Vec<WeakMorphism>> {
    let ea = encode_s(a);
    let mut out = Vec::new();
    for g in automorphism_group(&a.template, budget)? {
        let target = encode_s(&a.recolored(g.map())?);
        for m in search::all(&ea, &target, Requirements::ISO, &[], budget)? {
            out.push(WeakMorphism {
                f: Morphism::trusted(&a.base, &a.base, m, MorphismKind::Iso),
                g: g.clone(),
            });
        }
    }
    Ok(out)
}

/// The base parts of the weak automorphisms, without repetition.
pub fn color_automorphisms(a: &ColoredStructure, budget: &Budget) -> Result<Vec<Morphism>> {
    let mut seen = HashSet::new();
    Ok(weak_automorphisms(a, budget)?
        .into_iter()
        .filter(|w| seen.insert(w.f.map().to_vec()))
        .map(|w| w.f)
        .collect())
}

/// Signature of `S(A, a)`: the base symbols, then `M_t` for each template
/// element `t` in template order.
pub fn encoded_signature(template: &Structure) -> Result<Signature> {
    let mut sig = template.signature().clone();
    for t in template.elements() {
        let sym = Symbol::new(sig.fresh_name(&format!("M_{t}")), 1);
        sig = sig.extended([sym])?;
    }
    Ok(sig)
}

/// `S(A, a)`: the base expanded by the color classes `M_t = a⁻¹(t)`.
pub fn encode_s(a: &ColoredStructure) -> Structure {
    let sig = encoded_signature(&a.template).expect("fresh names keep the signature valid");
    let r = a.base.signature().len();
    let mut rels = a.base.relation_lists();
    rels.resize(r + a.template.len(), Vec::new());
    for (x, &t) in a.color.iter().enumerate() {
        rels[r + t].push(vec![x]);
    }
    Structure::from_indices(sig, a.base.elements().to_vec(), rels).expect("valid expansion")
}

/// Inverse of [`encode_s`].
pub fn decode_s(encoded: &Structure, template: &Structure) -> Result<ColoredStructure> {
    let sig = encoded_signature(template)?;
    if encoded.signature() != &sig {
        return Err(Error::Decode(format!(
            "expected signature {sig}, found {}",
            encoded.signature()
        )));
    }
    let r = template.signature().len();
    let mut color = vec![usize::MAX; encoded.len()];
    for t in 0..template.len() {
        for tuple in encoded.tuples(r + t) {
            let x = tuple[0];
            if color[x] != usize::MAX {
                return Err(Error::Decode(format!(
                    "element {} lies in both {} and {}",
                    encoded.element(x),
                    sig.symbols()[r + color[x]].name,
                    sig.symbols()[r + t].name
                )));
            }
            color[x] = t;
        }
    }
    if let Some(x) = color.iter().position(|&t| t == usize::MAX) {
        return Err(Error::Decode(format!(
            "element {} lies in no color class",
            encoded.element(x)
        )));
    }
    let mut rels = encoded.relation_lists();
    rels.truncate(r);
    let base = Structure::from_indices(template.signature().clone(), encoded.elements().to_vec(), rels)?;
    if let Some(reason) = color_violation(&base, template, &color) {
        return Err(Error::Decode(format!("the induced coloring is not a homomorphism: {reason}")));
    }
    Ok(ColoredStructure { base, template: template.clone(), color })
}

fn kernel_tuples(a: &ColoredStructure) -> Vec<Vec<usize>> {
    let n = a.len();
    (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .filter(|&(x, y)| a.color[x] == a.color[y])
        .map(|(x, y)| vec![x, y])
        .collect()
}

/// The base expanded by the binary kernel `κ` of the coloring.
pub fn tilde_expansion(a: &ColoredStructure) -> Structure {
    let kappa = Symbol::new(a.base.signature().fresh_name("kappa"), 2);
    a.base.expanded(vec![(kappa, kernel_tuples(a))]).expect("fresh symbol")
}

/// The tuples of `U^n` whose colors form a tuple of `ρ_T`.
fn pulled_back(a: &ColoredStructure, sym: usize) -> Vec<Vec<usize>> {
    let arity = a.base.signature().arity(sym);
    all_tuples(a.len(), arity)
        .into_iter()
        .filter(|t| {
            let image: Vec<usize> = t.iter().map(|&x| a.color[x]).collect();
            a.template.holds(sym, &image)
        })
        .collect()
}

fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for x in 0..n {
                let mut t: Vec<usize> = t.clone();
                t.push(x);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// The kernel expansion further expanded by `ρ̂ = {ā | a(ā) ∈ ρ_T}` for
/// every base symbol `ρ`.
pub fn hat_expansion(a: &ColoredStructure) -> Structure {
    let tilde = tilde_expansion(a);
    let mut sig = tilde.signature().clone();
    let mut extra = Vec::new();
    for (sym, s) in a.base.signature().symbols().iter().enumerate() {
        let hat = Symbol::new(sig.fresh_name(&format!("hat_{}", s.name)), s.arity);
        sig = sig.extended([hat.clone()]).expect("fresh symbol");
        extra.push((hat, pulled_back(a, sym)));
    }
    tilde.expanded(extra).expect("fresh symbols")
}

/// Interpretation in the kernel expansion of
/// `φ_ρ(x̄) ≡ ∃ȳ (⋀ κ(x_i, y_i) ∧ ρ(ȳ))`, by exhaustive witness search.
pub fn phi_interpretation(a: &ColoredStructure, sym: usize) -> Vec<Vec<usize>> {
    let arity = a.base.signature().arity(sym);
    let witnesses = a.base.tuples(sym);
    all_tuples(a.len(), arity)
        .into_iter()
        .filter(|x| {
            witnesses
                .iter()
                .any(|y| x.iter().zip(y).all(|(&xi, &yi)| a.color[xi] == a.color[yi]))
        })
        .collect()
}

/// A co-retraction `ι: T ↪ U` with `u∘ι = id`, if one exists.
pub fn is_retraction(u: &ColoredStructure, budget: &Budget) -> Result<Option<Morphism>> {
    let t = ColoredStructure::identity_colored(&u.template);
    find_strong_embedding(&t, u, &PartialMap::empty(), budget)
}

#[derive(Clone, Debug)]
pub struct SymbolCheck {
    pub symbol: String,
    pub phi_equals_hat: bool,
}

#[derive(Clone, Debug)]
pub struct CautReport {
    pub surjective: bool,
    pub co_retraction: Option<Morphism>,
    pub caut_order: usize,
    pub aut_hat_order: usize,
    pub aut_tilde_order: usize,
    /// `cAut ⊆ Aut(hat)`, which holds for every colored structure.
    pub inclusion: bool,
    pub caut_equals_aut_hat: bool,
    pub aut_hat_equals_aut_tilde: bool,
    pub symbols: Vec<SymbolCheck>,
    /// The inclusion, plus every equality when the coloring is a retraction.
    pub holds: bool,
}

impl CautReport {
    pub fn to_value(&self) -> Value {
        json!({
            "holds": self.holds,
            "surjective": self.surjective,
            "retraction": self.co_retraction.is_some(),
            "co_retraction": self.co_retraction.as_ref().map(Morphism::to_value),
            "caut_order": self.caut_order,
            "aut_hat_order": self.aut_hat_order,
            "aut_tilde_order": self.aut_tilde_order,
            "inclusion": self.inclusion,
            "caut_equals_aut_hat": self.caut_equals_aut_hat,
            "aut_hat_equals_aut_tilde": self.aut_hat_equals_aut_tilde,
            "phi_equals_hat": self.symbols.iter().map(|s| (s.symbol.clone(), Value::from(s.phi_equals_hat))).collect::<Map<_, _>>(),
        })
    }
}

fn map_set(ms: &[Morphism]) -> BTreeSet<Vec<usize>> {
    ms.iter().map(|m| m.map().to_vec()).collect()
}

/// Compares the color automorphism group with the automorphism groups of
/// the kernel expansions.
pub fn check_caut_identity(u: &ColoredStructure, budget: &Budget) -> Result<CautReport> {
    let caut = map_set(&color_automorphisms(u, budget)?);
    let hat = map_set(&automorphism_group(&hat_expansion(u), budget)?);
    let tilde = map_set(&automorphism_group(&tilde_expansion(u), budget)?);
    let surjective = u.is_surjective();
    let co_retraction = is_retraction(u, budget)?;
    let symbols: Vec<SymbolCheck> = u
        .base
        .signature()
        .symbols()
        .iter()
        .enumerate()
        .map(|(sym, s)| {
            let mut phi = phi_interpretation(u, sym);
            let mut hat = pulled_back(u, sym);
            phi.sort();
            hat.sort();
            SymbolCheck {
                symbol: s.name.clone(),
                phi_equals_hat: phi == hat,
            }
        })
        .collect();
    let inclusion = caut.is_subset(&hat);
    let caut_equals_aut_hat = caut == hat;
    let aut_hat_equals_aut_tilde = hat == tilde;
    let holds = inclusion
        && (co_retraction.is_none()
            || (caut_equals_aut_hat && aut_hat_equals_aut_tilde && symbols.iter().all(|s| s.phi_equals_hat)));
    Ok(CautReport {
        surjective,
        co_retraction,
        caut_order: caut.len(),
        aut_hat_order: hat.len(),
        aut_tilde_order: tilde.len(),
        inclusion,
        caut_equals_aut_hat,
        aut_hat_equals_aut_tilde,
        symbols,
        holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitMode {
    Strong,
    Color,
}

impl OrbitMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(OrbitMode::Strong),
            "color" => Ok(OrbitMode::Color),
            _ => Err(Error::parse("mode", format!("unknown orbit mode `{s}` (expected strong or color)"))),
        }
    }
}

/// Orbits of a permutation group (given by all its elements) on `U^n`.
pub(crate) fn count_tuple_orbits(n_elements: usize, group: &[Vec<usize>], n: usize, budget: &Budget) -> Result<u64> {
    let total = n_elements.checked_pow(n as u32).ok_or_else(|| Error::BudgetExceeded { nodes: budget.used() })?;
    budget.charge(total as u64)?;
    let index = |t: &[usize]| t.iter().fold(0usize, |acc, &x| acc * n_elements + x);
    let mut seen = vec![false; total];
    let mut orbits = 0;
    for (i, t) in all_tuples(n_elements, n).into_iter().enumerate() {
        if seen[i] {
            continue;
        }
        orbits += 1;
        budget.charge(group.len() as u64)?;
        for g in group {
            let image: Vec<usize> = t.iter().map(|&x| g[x]).collect();
            seen[index(&image)] = true;
        }
    }
    Ok(orbits)
}

/// Number of orbits of `sAut` (strong) or `cAut` (color) on `n`-tuples.
pub fn count_colored_orbits(u: &ColoredStructure, n: usize, mode: OrbitMode, budget: &Budget) -> Result<u64> {
    let group = match mode {
        OrbitMode::Strong => strong_automorphisms(u, budget)?,
        OrbitMode::Color => color_automorphisms(u, budget)?,
    };
    let group: Vec<Vec<usize>> = group.iter().map(|m| m.map().to_vec()).collect();
    count_tuple_orbits(u.len(), &group, n, budget)
}

/// The class of encodings `S(B, b)` of members `B` of a class colored by a
/// fixed template.
pub struct EncodedClass<'a> {
    spec: &'a ClassSpec,
    template: &'a Structure,
    signature: Signature,
}

impl<'a> EncodedClass<'a> {
    pub fn new(spec: &'a ClassSpec, template: &'a Structure) -> Result<Self> {
        if spec.signature() != template.signature() {
            return Err(Error::SignatureMismatch(format!(
                "class over {} but template over {}",
                spec.signature(),
                template.signature()
            )));
        }
        Ok(EncodedClass {
            spec,
            template,
            signature: encoded_signature(template)?,
        })
    }
}

impl ClassOracle for EncodedClass<'_> {
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn admits(&self, s: &Structure, budget: &Budget) -> Result<bool> {
        match decode_s(s, self.template) {
            Ok(c) => member(self.spec, &c.base, budget),
            Err(Error::Decode(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

/// A finite stage of the universal homogeneous colored structure.
#[derive(Clone, Debug)]
pub struct ColoredApproximant {
    pub colored: ColoredStructure,
    pub stage: usize,
    pub demand_size: usize,
    /// Demands over the unary encoding.
    pub realized_extensions: Vec<Demand>,
    pub unmet: Vec<Demand>,
}

impl ColoredApproximant {
    pub fn complete(&self) -> bool {
        self.unmet.is_empty()
    }

    pub fn to_value(&self) -> Value {
        json!({
            "colored": self.colored.to_value(),
            "stage": self.stage,
            "demand_size": self.demand_size,
            "complete": self.complete(),
            "demands_realized": self.realized_extensions.len(),
            "demands_by_fresh_element": self.realized_extensions.iter().filter(|d| d.fresh).count(),
            "unmet": self.unmet.iter().map(Demand::to_value).collect::<Vec<_>>(),
        })
    }
}

pub fn build_universal_colored(
    spec: &ClassSpec,
    template: &Structure,
    demand_size: usize,
    stage_budget: usize,
    budget: &Budget,
) -> Result<ColoredApproximant> {
    build_universal_colored_with(spec, template, BuildOptions::new(demand_size, stage_budget), budget)
}

pub fn build_universal_colored_with(
    spec: &ClassSpec,
    template: &Structure,
    opts: BuildOptions,
    budget: &Budget,
) -> Result<ColoredApproximant> {
    let class = EncodedClass::new(spec, template)?;
    require_amalgamation_class(spec, opts.demand_size, budget)?;
    let out = build_in(&class, opts, budget)?;
    Ok(ColoredApproximant {
        colored: decode_s(&out.structure, template)?,
        stage: out.stages,
        demand_size: opts.demand_size,
        realized_extensions: out.realized,
        unmet: out.unmet,
    })
}

/// The extension property of the encoding: every colored one-point
/// extension in the class of every colored substructure with fewer than `k`
/// elements embeds over it.
pub fn verify_colored_extension_property(
    spec: &ClassSpec,
    u: &ColoredStructure,
    k: usize,
    budget: &Budget,
) -> Result<ExtensionReport> {
    let class = EncodedClass::new(spec, &u.template)?;
    verify_extension_property(&encode_s(u), &class, k, budget)
}

/// Back-and-forth for color-preserving partial isomorphisms.
pub fn verify_colored_homogeneity(u: &ColoredStructure, part_size: usize, depth: usize, budget: &Budget) -> Result<HomogeneityReport> {
    back_and_forth(&u.base, Some(&u.color), Some(&u.color), part_size, depth, budget)
}

/// All elements of the subgroup of `Aut(T)` generated by `generators`
/// (as position maps), identity first.
pub fn group_closure(template: &Structure, generators: &[Morphism]) -> Result<Vec<Vec<usize>>> {
    for g in generators {
        if g.domain() != template || g.codomain() != template || g.kind() != MorphismKind::Iso {
            return Err(Error::InvalidMap("generators must be automorphisms of the template".into()));
        }
    }
    let id: Vec<usize> = (0..template.len()).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([id.clone()]);
    let mut out = vec![id];
    let mut i = 0;
    while i < out.len() {
        let current = out[i].clone();
        for g in generators {
            let next: Vec<usize> = current.iter().map(|&x| g.apply(x)).collect();
            if seen.insert(next.clone()) {
                out.push(next);
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Back-and-forth for partial isomorphisms `p` with `u∘p = g∘u` on the
/// domain, for some `g` in the group generated by `generators` (all of
/// `Aut(T)` when `None`); `g` stays fixed through the game.
pub fn verify_w_homogeneity(
    u: &ColoredStructure,
    part_size: usize,
    depth: usize,
    generators: Option<&[Morphism]>,
    budget: &Budget,
) -> Result<HomogeneityReport> {
    let group: Vec<Vec<usize>> = match generators {
        Some(gens) => group_closure(&u.template, gens)?,
        None => automorphism_group(&u.template, budget)?
            .iter()
            .map(|m| m.map().to_vec())
            .collect(),
    };
    let mut total = HomogeneityReport {
        holds: true,
        maps_checked: 0,
        stuck_count: 0,
        stuck: Vec::new(),
    };
    for g in group {
        let source: Vec<usize> = u.color.iter().map(|&t| g[t]).collect();
        let r = back_and_forth(&u.base, Some(&source), Some(&u.color), part_size, depth, budget)?;
        total.holds &= r.holds;
        total.maps_checked += r.maps_checked;
        total.stuck_count += r.stuck_count;
        total.stuck.extend(r.stuck);
    }
    Ok(total)
}
