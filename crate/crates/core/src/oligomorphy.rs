//! Positive-existential types, orbits and the equivalence of hom-existence
//! with its finite traces.
//!
//! On finite structures, the positive existential type of `ā` in `A` is
//! contained in that of `b̄` in `B` exactly when some homomorphism `A → B`
//! sends `ā` to `b̄`: such formulas are preserved by homomorphisms, and the
//! canonical query of `(A, ā)` is one of them. Types are therefore compared
//! through pointed homomorphisms and never written out as formulas.

use serde_json::{json, Value};

use crate::budget::Budget;
use crate::canon::{all_structures, enumerate_hereditary, IsoSet};
use crate::classes::age;
use crate::colored::count_tuple_orbits;
use crate::error::{Error, Result};
use crate::morphism::automorphism_group;
use crate::search::{self, Requirements};
use crate::structure::{Signature, Structure};

/// A structure with a distinguished tuple of elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedStructure {
    pub structure: Structure,
    /// Positions in the carrier.
    pub point: Vec<usize>,
}

impl PointedStructure {
    pub fn new<S: AsRef<str>>(structure: Structure, point: &[S]) -> Result<Self> {
        let point = point
            .iter()
            .map(|id| structure.require_index(id.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(PointedStructure { structure, point })
    }

    pub fn from_positions(structure: Structure, point: Vec<usize>) -> Result<Self> {
        if let Some(&x) = point.iter().find(|&&x| x >= structure.len()) {
            return Err(Error::UnknownElement {
                element: format!("#{x}"),
                context: "pointed tuple".into(),
            });
        }
        Ok(PointedStructure { structure, point })
    }

    pub fn point_ids(&self) -> Vec<&str> {
        self.point.iter().map(|&x| self.structure.element(x)).collect()
    }
}

/// A homomorphism `A → B` sending `ā` to `b̄` pointwise, with consistent
/// repeated entries.
fn pointed_hom(a: &Structure, pa: &[usize], b: &Structure, pb: &[usize], budget: &Budget) -> Result<bool> {
    let mut fixed: Vec<(usize, usize)> = Vec::with_capacity(pa.len());
    for (&x, &y) in pa.iter().zip(pb) {
        match fixed.iter().find(|(fx, _)| *fx == x) {
            Some(&(_, fy)) if fy != y => return Ok(false),
            Some(_) => {}
            None => fixed.push((x, y)),
        }
    }
    search::exists(a, b, Requirements::HOM, &fixed, budget)
}

/// Positive existential type of `(A, ā)` contained in that of `(B, b̄)`.
pub fn pe_type_leq(a: &PointedStructure, b: &PointedStructure, budget: &Budget) -> Result<bool> {
    a.structure.check_signature(&b.structure)?;
    if a.point.len() != b.point.len() {
        return Err(Error::InvalidMap(format!(
            "tuples of lengths {} and {}",
            a.point.len(),
            b.point.len()
        )));
    }
    pointed_hom(&a.structure, &a.point, &b.structure, &b.point, budget)
}

/// All tuples of `0..n` of length `k`, lexicographically.
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

/// Classes of `Aⁿ` under mutual pointed homomorphisms within `A`.
pub fn pe_type_classes(a: &Structure, n: usize, budget: &Budget) -> Result<Vec<Vec<Vec<usize>>>> {
    let mut classes: Vec<Vec<Vec<usize>>> = Vec::new();
    'tuples: for t in all_tuples(a.len(), n) {
        for class in classes.iter_mut() {
            let rep = &class[0];
            if pointed_hom(a, &t, a, rep, budget)? && pointed_hom(a, rep, a, &t, budget)? {
                class.push(t);
                continue 'tuples;
            }
        }
        classes.push(vec![t]);
    }
    Ok(classes)
}

pub fn count_pe_types(a: &Structure, n: usize, budget: &Budget) -> Result<u64> {
    Ok(pe_type_classes(a, n, budget)?.len() as u64)
}

/// Orbits of `Aut(A)` on `Aⁿ`.
pub fn count_orbits(a: &Structure, n: usize, budget: &Budget) -> Result<u64> {
    let group: Vec<Vec<usize>> = automorphism_group(a, budget)?
        .iter()
        .map(|m| m.map().to_vec())
        .collect();
    count_tuple_orbits(a.len(), &group, n, budget)
}

#[derive(Clone, Debug)]
pub struct WornReport {
    pub age_bound: usize,
    /// `A → B`.
    pub hom: bool,
    /// Every member of the age of `A` up to the bound maps into `B`.
    pub age_maps: bool,
    /// `CSP(A) ⊆ CSP(B)` among structures up to the bound.
    pub csp_contained: bool,
    /// A structure witnessing failure of (3) or (4), when one exists.
    pub witness: Option<Structure>,
    /// The bound is below `|A|`, so (3) and (4) may hold while (1) fails.
    pub bound_insufficient: bool,
}

impl WornReport {
    pub fn agree(&self) -> bool {
        self.hom == self.age_maps && self.hom == self.csp_contained
    }

    pub fn to_value(&self) -> Value {
        json!({
            "age_bound": self.age_bound,
            "hom": self.hom,
            "positive_existential_theory": {
                "contained": self.csp_contained,
                "evaluated": false,
                "note": "equivalent to CSP containment",
            },
            "age_maps": self.age_maps,
            "csp_contained": self.csp_contained,
            "agree": self.agree(),
            "bound_insufficient": self.bound_insufficient,
            "witness": self.witness.as_ref().map(crate::io::structure_to_value),
        })
    }
}

/// Evaluates hom-existence, age-to-age maps and CSP containment separately.
pub fn check_worn(a: &Structure, b: &Structure, age_bound: usize, budget: &Budget) -> Result<WornReport> {
    a.check_signature(b)?;
    let hom = search::exists(a, b, Requirements::HOM, &[], budget)?;
    let mut witness = None;

    let mut age_maps = true;
    for c in age(a, age_bound, budget)? {
        if !search::exists(&c, b, Requirements::HOM, &[], budget)? {
            age_maps = false;
            witness = Some(c);
            break;
        }
    }

    let mut in_a = |c: &Structure| search::exists(c, a, Requirements::HOM, &[], budget);
    let csp_a = enumerate_hereditary(a.signature(), age_bound, &mut in_a, budget)?;
    let mut csp_contained = true;
    'levels: for level in csp_a {
        for c in level {
            if !search::exists(&c, b, Requirements::HOM, &[], budget)? {
                csp_contained = false;
                if witness.is_none() {
                    witness = Some(c);
                }
                break 'levels;
            }
        }
    }

    Ok(WornReport {
        age_bound,
        hom,
        age_maps,
        csp_contained,
        witness,
        bound_insufficient: age_bound < a.len(),
    })
}

/// Conditions of [`check_worn`] for all pairs from the catalog of
/// structures with at most `max_size` elements, computed from one
/// homomorphism matrix.
#[derive(Clone, Debug)]
pub struct WornSweep {
    pub structures: usize,
    pub pairs: u64,
    pub hom_pairs: u64,
    /// Pairs (by catalog index) on which the conditions disagree.
    pub disagreements: Vec<(usize, usize)>,
}

impl WornSweep {
    pub fn to_value(&self) -> Value {
        json!({
            "structures": self.structures,
            "pairs": self.pairs,
            "hom_pairs": self.hom_pairs,
            "disagreements": self.disagreements,
        })
    }
}

type Bits = Vec<u64>;

fn bit_set(bits: &mut Bits, i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn bit_get(bits: &Bits, i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn subset(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Catalog sweep: pairs range over structures of at most `max_size`
/// elements and ages and CSPs are cut at `age_bound ≥ max_size`.
pub fn worn_sweep(sig: &Signature, max_size: usize, age_bound: usize, budget: &Budget) -> Result<WornSweep> {
    let catalog: Vec<Structure> = all_structures(sig, age_bound.max(max_size))?
        .iter()
        .flatten()
        .cloned()
        .collect();
    let n = catalog.len();
    let words = n.div_ceil(64);
    let bounded: Vec<usize> = (0..n).filter(|&i| catalog[i].len() <= age_bound).collect();
    let pairs: Vec<usize> = (0..n).filter(|&i| catalog[i].len() <= max_size).collect();

    // down[d] = catalog members within the bound mapping into d
    let mut down: Vec<Bits> = vec![vec![0; words]; n];
    for &d in &pairs {
        for &c in &bounded {
            if search::exists(&catalog[c], &catalog[d], Requirements::HOM, &[], budget)? {
                bit_set(&mut down[d], c);
            }
        }
    }
    // ages: induced substructures up to the bound, as catalog indices
    let mut index = IsoSet::new();
    for s in &catalog {
        index.insert(s.clone(), budget)?;
    }
    let mut ages: Vec<Bits> = vec![vec![0; words]; n];
    for &a in &pairs {
        for sub in age(&catalog[a], age_bound, budget)? {
            let i = index.find(&sub, budget)?.expect("catalog is closed under substructures");
            bit_set(&mut ages[a], i);
        }
    }

    let mut sweep = WornSweep {
        structures: pairs.len(),
        pairs: 0,
        hom_pairs: 0,
        disagreements: Vec::new(),
    };
    for &a in &pairs {
        for &b in &pairs {
            sweep.pairs += 1;
            let hom = bit_get(&down[b], a);
            let age_maps = subset(&ages[a], &down[b]);
            let csp = subset(&down[a], &down[b]);
            sweep.hom_pairs += hom as u64;
            if hom != age_maps || hom != csp {
                sweep.disagreements.push((a, b));
            }
        }
    }
    Ok(sweep)
}

#[derive(Clone, Debug)]
pub struct OligomorphyRow {
    pub n: usize,
    pub pe_types: u64,
    pub orbits: u64,
}

/// Type and orbit counts for `n = 1..=max_n`.
#[derive(Clone, Debug)]
pub struct OligomorphyReport {
    pub rows: Vec<OligomorphyRow>,
    /// `pe_types ≤ orbits` in every row.
    pub coarsening_holds: bool,
}

impl OligomorphyReport {
    pub fn to_value(&self) -> Value {
        json!({
            "rows": self.rows.iter().map(|r| json!({"n": r.n, "pe_types": r.pe_types, "orbits": r.orbits})).collect::<Vec<_>>(),
            "coarsening_holds": self.coarsening_holds,
        })
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("n\tpe_types\torbits\n");
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\t{}\n", r.n, r.pe_types, r.orbits));
        }
        out
    }
}

pub fn oligomorphy_report(a: &Structure, max_n: usize, budget: &Budget) -> Result<OligomorphyReport> {
    let mut rows = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        rows.push(OligomorphyRow {
            n,
            pe_types: count_pe_types(a, n, budget)?,
            orbits: count_orbits(a, n, budget)?,
        });
    }
    let coarsening_holds = rows.iter().all(|r| r.pe_types <= r.orbits);
    Ok(OligomorphyReport { rows, coarsening_holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;
    use crate::morphism::{core, is_hom_equivalent, is_isomorphic};

    fn budget() -> Budget {
        Budget::default()
    }

    fn pointed(s: Structure, p: &[usize]) -> PointedStructure {
        PointedStructure::from_positions(s, p.to_vec()).unwrap()
    }

    #[test]
    fn pe_leq_examples() {
        let b = budget();
        let k2 = complete_graph(2);
        assert!(pe_type_leq(&pointed(k2.clone(), &[0]), &pointed(k2.clone(), &[1]), &b).unwrap());
        assert!(pe_type_leq(&pointed(k2.clone(), &[1]), &pointed(k2.clone(), &[0]), &b).unwrap());
        assert!(!pe_type_leq(&pointed(complete_graph(3), &[0]), &pointed(k2.clone(), &[0]), &b).unwrap());
        let p = pointed(directed_path(3), &[0, 2]);
        assert!(pe_type_leq(&p, &p, &b).unwrap());
        // a repeated entry must go to a repeated entry
        let e = directed_edge();
        assert!(!pe_type_leq(&pointed(e.clone(), &[0, 0]), &pointed(e.clone(), &[0, 1]), &b).unwrap());
        assert!(pe_type_leq(&pointed(e.clone(), &[0, 1]), &pointed(loop_point(), &[0, 0]), &b).unwrap());
        assert!(pe_type_leq(&pointed(e.clone(), &[0]), &pointed(e, &[1]), &b).is_ok());
    }

    #[test]
    fn type_counts() {
        let b = budget();
        assert_eq!(count_pe_types(&complete_graph(3), 1, &b).unwrap(), 1);
        assert_eq!(count_pe_types(&complete_graph(3), 2, &b).unwrap(), 2);
        assert_eq!(count_pe_types(&complete_graph(3), 0, &b).unwrap(), 1);
        let k2_plus_point = complete_graph(2).disjoint_union(&edgeless(1)).unwrap();
        assert_eq!(count_pe_types(&k2_plus_point, 1, &b).unwrap(), 2);
        assert_eq!(count_pe_types(&directed_edge(), 1, &b).unwrap(), 2);
    }

    #[test]
    fn orbit_counts() {
        let b = budget();
        assert_eq!(count_orbits(&complete_graph(3), 2, &b).unwrap(), 2);
        assert_eq!(count_orbits(&edgeless(2), 1, &b).unwrap(), 1);
        assert_eq!(count_orbits(&directed_edge(), 1, &b).unwrap(), 2);
        assert_eq!(count_orbits(&directed_edge(), 0, &b).unwrap(), 1);
    }

    #[test]
    fn report_profiles() {
        let b = budget();
        let r = oligomorphy_report(&complete_graph(3), 2, &b).unwrap();
        let profile: Vec<(u64, u64)> = r.rows.iter().map(|r| (r.pe_types, r.orbits)).collect();
        assert_eq!(profile, vec![(1, 1), (2, 2)]);
        // on an edgeless set both count equality patterns: 1, 2, 5
        let r = oligomorphy_report(&edgeless(3), 3, &b).unwrap();
        let profile: Vec<(u64, u64)> = r.rows.iter().map(|r| (r.pe_types, r.orbits)).collect();
        assert_eq!(profile, vec![(1, 1), (2, 2), (5, 5)]);
        // a path has fewer pe types than orbits: ends and middles are hom-linked
        let r = oligomorphy_report(&path_graph(4), 1, &b).unwrap();
        assert_eq!((r.rows[0].pe_types, r.rows[0].orbits), (1, 2));
        assert!(r.coarsening_holds);
    }

    #[test]
    fn worn_examples() {
        let b = budget();
        let r = check_worn(&cycle_graph(4), &complete_graph(2), 3, &b).unwrap();
        assert!(r.hom && r.age_maps && r.csp_contained && r.agree());
        let r = check_worn(&complete_graph(3), &complete_graph(2), 3, &b).unwrap();
        assert!(!r.hom && !r.age_maps && !r.csp_contained);
        let r = check_worn(&complete_graph(3), &complete_graph(2), 2, &b).unwrap();
        assert!(r.bound_insufficient && !r.agree());
        let c5 = cycle_graph(5);
        assert!(check_worn(&c5, &c5, 3, &b).unwrap().agree());
    }

    #[test]
    fn sweep_small() {
        let b = budget();
        let s = worn_sweep(&graph_signature(), 2, 2, &b).unwrap();
        assert_eq!(s.structures, 13);
        assert_eq!(s.pairs, 169);
        assert!(s.disagreements.is_empty());
    }

    #[test]
    fn hom_equivalent_structures_share_core_profiles() {
        let b = budget();
        let a = cycle_graph(4);
        let c = complete_graph(2).disjoint_union(&path_graph(3)).unwrap();
        assert!(is_hom_equivalent(&a, &c, &b).unwrap());
        let (ca, cc) = (core(&a, &b).unwrap().structure, core(&c, &b).unwrap().structure);
        assert!(is_isomorphic(&ca, &cc, &b).unwrap());
        for n in 0..=2 {
            assert_eq!(count_pe_types(&ca, n, &b).unwrap(), count_pe_types(&cc, n, &b).unwrap());
        }
    }
}
