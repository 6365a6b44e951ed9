//! Brute-force oracles shared by the integration tests. Everything here
//! enumerates maps or permutations directly and uses no search code from the
//! library; only `Structure::holds` and the accessors are trusted.

#![allow(dead_code)]

use std::collections::BTreeSet;

use relwork::families::digraph;
use relwork::Structure;

/// All maps `0..n → 0..m`, in lexicographic order.
pub fn all_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n > 0 && m == 0 {
        return out;
    }
    let mut f = vec![0; n];
    loop {
        out.push(f.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            f[i] += 1;
            if f[i] < m {
                break;
            }
            f[i] = 0;
        }
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    all_maps(n, n).into_iter().filter(|f| injective(f)).collect()
}

pub fn injective(f: &[usize]) -> bool {
    (0..f.len()).all(|i| (0..i).all(|j| f[i] != f[j]))
}

/// All tuples of length `k` over `0..n`.
pub fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    all_maps(k, n)
}

pub fn is_hom(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    (0..a.signature().len()).all(|sym| {
        a.tuples(sym).iter().all(|t| {
            let image: Vec<usize> = t.iter().map(|&x| f[x]).collect();
            b.holds(sym, &image)
        })
    })
}

/// Injective, and every tuple over `a` holds iff its image holds in `b`.
pub fn is_embedding(a: &Structure, b: &Structure, f: &[usize]) -> bool {
    injective(f)
        && (0..a.signature().len()).all(|sym| {
            all_tuples(a.len(), a.signature().arity(sym)).iter().all(|t| {
                let image: Vec<usize> = t.iter().map(|&x| f[x]).collect();
                a.holds(sym, t) == b.holds(sym, &image)
            })
        })
}

pub fn homs(a: &Structure, b: &Structure) -> Vec<Vec<usize>> {
    all_maps(a.len(), b.len()).into_iter().filter(|f| is_hom(a, b, f)).collect()
}

pub fn has_hom(a: &Structure, b: &Structure) -> bool {
    all_maps(a.len(), b.len()).iter().any(|f| is_hom(a, b, f))
}

pub fn embeddings(a: &Structure, b: &Structure) -> Vec<Vec<usize>> {
    all_maps(a.len(), b.len())
        .into_iter()
        .filter(|f| is_embedding(a, b, f))
        .collect()
}

pub fn isomorphic(a: &Structure, b: &Structure) -> bool {
    a.len() == b.len() && permutations(a.len()).iter().any(|f| is_embedding(a, b, f))
}

pub fn automorphisms(a: &Structure) -> Vec<Vec<usize>> {
    permutations(a.len())
        .into_iter()
        .filter(|f| is_embedding(a, a, f))
        .collect()
}

/// A digraph on at most four vertices as an arc bitmask (bit `4x + y`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SmallDigraph {
    pub n: usize,
    pub mask: u16,
}

impl SmallDigraph {
    pub fn arc(&self, x: usize, y: usize) -> bool {
        self.mask >> (4 * x + y) & 1 == 1
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in 0..self.n {
                if self.arc(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn relabel(&self, p: &[usize]) -> SmallDigraph {
        let mut mask = 0;
        for (x, y) in self.arcs() {
            mask |= 1 << (4 * p[x] + p[y]);
        }
        SmallDigraph { n: self.n, mask }
    }

    /// Least relabelling over all permutations.
    pub fn canonical(&self) -> SmallDigraph {
        permutations(self.n)
            .iter()
            .map(|p| self.relabel(p))
            .min()
            .expect("at least the identity")
    }

    pub fn structure(&self) -> Structure {
        digraph(self.n, &self.arcs())
    }

    /// True if some map `f: 0..n → 0..b.n` passes `accept`, trying all
    /// `b.n^n` of them.
    fn any_map(&self, b: &SmallDigraph, accept: impl Fn(&[usize; 4]) -> bool) -> bool {
        let n = self.n;
        if n > 0 && b.n == 0 {
            return false;
        }
        let mut f = [0usize; 4];
        loop {
            if accept(&f) {
                return true;
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return false;
                }
                i -= 1;
                f[i] += 1;
                if f[i] < b.n {
                    break;
                }
                f[i] = 0;
            }
        }
    }

    /// Naive homomorphism test over all `|b|^|a|` maps.
    pub fn hom_to(&self, b: &SmallDigraph) -> bool {
        let arcs = self.arcs();
        self.any_map(b, |f| arcs.iter().all(|&(x, y)| b.arc(f[x], f[y])))
    }

    /// Naive embedding test over all injective maps.
    pub fn embeds_in(&self, b: &SmallDigraph) -> bool {
        let n = self.n;
        self.any_map(b, |f| {
            injective(&f[..n]) && (0..n).all(|x| (0..n).all(|y| self.arc(x, y) == b.arc(f[x], f[y])))
        })
    }
}

/// One digraph (loops allowed) per isomorphism class with at most `max`
/// vertices, ordered by size.
pub fn digraph_classes(max: usize) -> Vec<SmallDigraph> {
    assert!(max <= 4);
    let mut out = Vec::new();
    for n in 0..=max {
        let cells: Vec<u16> = (0..n).flat_map(|x| (0..n).map(move |y| 1u16 << (4 * x + y))).collect();
        let mut seen = BTreeSet::new();
        for bits in 0u32..1 << cells.len() {
            let mask = cells
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .fold(0, |m, (_, &c)| m | c);
            seen.insert(SmallDigraph { n, mask }.canonical());
        }
        out.extend(seen);
    }
    out
}

/// A colored structure as base, template and color vector, checked by hand.
pub struct NaiveColored<'a> {
    pub base: &'a Structure,
    pub template: &'a Structure,
    pub color: &'a [usize],
}

impl NaiveColored<'_> {
    /// Pairs `(f, g)` of base and template automorphisms with `c∘f = g∘c`.
    pub fn weak_automorphisms(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let tauts = automorphisms(self.template);
        let mut out = Vec::new();
        for f in automorphisms(self.base) {
            for g in &tauts {
                if (0..self.base.len()).all(|x| self.color[f[x]] == g[self.color[x]]) {
                    out.push((f.clone(), g.clone()));
                }
            }
        }
        out
    }

    pub fn strong_automorphisms(&self) -> BTreeSet<Vec<usize>> {
        automorphisms(self.base)
            .into_iter()
            .filter(|f| (0..f.len()).all(|x| self.color[f[x]] == self.color[x]))
            .collect()
    }

    pub fn color_automorphisms(&self) -> BTreeSet<Vec<usize>> {
        self.weak_automorphisms().into_iter().map(|(f, _)| f).collect()
    }

    fn same_color(&self, x: usize, y: usize) -> bool {
        self.color[x] == self.color[y]
    }

    /// Base automorphisms preserving the kernel of the coloring.
    pub fn kernel_automorphisms(&self) -> BTreeSet<Vec<usize>> {
        let n = self.base.len();
        automorphisms(self.base)
            .into_iter()
            .filter(|f| (0..n).all(|x| (0..n).all(|y| self.same_color(x, y) == self.same_color(f[x], f[y]))))
            .collect()
    }

    /// Tuples whose colors form a tuple of the template.
    pub fn pulled_back(&self, sym: usize) -> BTreeSet<Vec<usize>> {
        all_tuples(self.base.len(), self.base.signature().arity(sym))
            .into_iter()
            .filter(|t| {
                let c: Vec<usize> = t.iter().map(|&x| self.color[x]).collect();
                self.template.holds(sym, &c)
            })
            .collect()
    }

    /// Tuples with the same colors as some tuple of the base.
    pub fn colorwise_images(&self, sym: usize) -> BTreeSet<Vec<usize>> {
        all_tuples(self.base.len(), self.base.signature().arity(sym))
            .into_iter()
            .filter(|t| {
                self.base
                    .tuples(sym)
                    .iter()
                    .any(|w| t.iter().zip(w).all(|(&x, &y)| self.same_color(x, y)))
            })
            .collect()
    }

    /// Kernel automorphisms that also preserve every pulled-back relation.
    pub fn hat_automorphisms(&self) -> BTreeSet<Vec<usize>> {
        let pulled: Vec<_> = (0..self.base.signature().len()).map(|s| self.pulled_back(s)).collect();
        self.kernel_automorphisms()
            .into_iter()
            .filter(|f| {
                pulled.iter().all(|rel| {
                    rel.iter()
                        .all(|t| rel.contains(&t.iter().map(|&x| f[x]).collect::<Vec<_>>()))
                })
            })
            .collect()
    }

    pub fn surjective(&self) -> bool {
        let hit: BTreeSet<_> = self.color.iter().collect();
        hit.len() == self.template.len()
    }

    /// Embeddings `ι: T → base` with `c∘ι = id`.
    pub fn co_retractions(&self) -> Vec<Vec<usize>> {
        embeddings(self.template, self.base)
            .into_iter()
            .filter(|i| (0..i.len()).all(|t| self.color[i[t]] == t))
            .collect()
    }

    /// Color-preserving embeddings of `self` into `other`.
    pub fn strong_embedding_exists(&self, other: &NaiveColored<'_>) -> bool {
        all_maps(self.base.len(), other.base.len())
            .iter()
            .any(|f| (0..f.len()).all(|x| other.color[f[x]] == self.color[x]) && is_embedding(self.base, other.base, f))
    }
}
