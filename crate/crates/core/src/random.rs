//! Seeded random structures.

use rand::Rng;

use crate::colored::ColoredStructure;
use crate::structure::{Signature, Structure};

/// Each tuple of each symbol present independently with probability `p`.
pub fn random_structure<R: Rng>(sig: &Signature, n: usize, p: f64, rng: &mut R) -> Structure {
    let rels = (0..sig.len())
        .map(|sym| {
            tuples(n, sig.arity(sym))
                .into_iter()
                .filter(|_| rng.random_bool(p))
                .collect()
        })
        .collect();
    Structure::with_size(sig.clone(), n, rels).expect("tuples stay in range")
}

/// A simple graph with each edge present with probability `p`.
pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Structure {
    let mut edges = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if rng.random_bool(p) {
                edges.push((x, y));
            }
        }
    }
    crate::families::graph(n, &edges)
}

/// A uniformly random coloring, then each tuple the coloring allows present
/// with probability `p`.
pub fn random_colored<R: Rng>(template: &Structure, n: usize, p: f64, rng: &mut R) -> ColoredStructure {
    let sig = template.signature();
    let color: Vec<usize> = if template.is_empty() {
        Vec::new()
    } else {
        (0..n).map(|_| rng.random_range(0..template.len())).collect()
    };
    let n = color.len();
    let rels = (0..sig.len())
        .map(|sym| {
            tuples(n, sig.arity(sym))
                .into_iter()
                .filter(|t| {
                    let image: Vec<usize> = t.iter().map(|&x| color[x]).collect();
                    template.holds(sym, &image)
                })
                .filter(|_| rng.random_bool(p))
                .collect()
        })
        .collect();
    let base = Structure::with_size(sig.clone(), n, rels).expect("tuples stay in range");
    ColoredStructure::new(base, template.clone(), color).expect("tuples follow the template")
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
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
