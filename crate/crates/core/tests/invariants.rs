mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use relwork::canon::canonical_form;
use relwork::colored::{decode_s, encode_s};
use relwork::families::{complete_graph, directed_edge, graph_signature};
use relwork::io::{parse_structure, structure_to_json};
use relwork::oligomorphy::{pe_type_leq, PointedStructure};
use relwork::random::{random_colored, random_structure};
use relwork::{core, find_homomorphism, Budget, PartialMap, Structure};

fn digraph(seed: u64, n: usize) -> Structure {
    random_structure(&graph_signature(), n, 0.4, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn relabelled(s: &Structure, perm: &[usize]) -> Structure {
    let tuples = s.tuples(0).iter().map(|t| t.iter().map(|&x| perm[x]).collect()).collect();
    Structure::with_size(s.signature().clone(), s.len(), vec![tuples]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_ignores_labelling(seed: u64, n in 0usize..6, shift in 0usize..6) {
        let s = digraph(seed, n);
        let perm: Vec<usize> = (0..n).map(|x| (x + shift) % n.max(1)).rev().collect();
        let t = relabelled(&s, &perm);
        prop_assert_eq!(canonical_form(&s), canonical_form(&t));
    }

    #[test]
    fn canonical_form_separates_non_isomorphic(s1: u64, s2: u64, n in 0usize..5) {
        let (a, b) = (digraph(s1, n), digraph(s2, n));
        prop_assert_eq!(canonical_form(&a) == canonical_form(&b), isomorphic(&a, &b));
    }

    #[test]
    fn pe_type_order_is_a_preorder(s1: u64, s2: u64, s3: u64, n in 1usize..4) {
        let budget = Budget::default();
        let mut rng = ChaCha8Rng::seed_from_u64(s1 ^ s2);
        let pointed: Vec<PointedStructure> = [s1, s2, s3]
            .iter()
            .map(|&s| {
                let a = digraph(s, n);
                let p = vec![rand::Rng::random_range(&mut rng, 0..n), rand::Rng::random_range(&mut rng, 0..n)];
                PointedStructure::from_positions(a, p).unwrap()
            })
            .collect();
        let leq = |i: usize, j: usize| pe_type_leq(&pointed[i], &pointed[j], &budget).unwrap();
        for i in 0..3 {
            prop_assert!(leq(i, i));
        }
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if leq(i, j) && leq(j, k) {
                        prop_assert!(leq(i, k));
                    }
                }
            }
        }
    }

    #[test]
    fn encoding_round_trips(seed: u64, n in 0usize..7, which in 0usize..2) {
        let t = if which == 0 { complete_graph(2) } else { directed_edge() };
        let a = random_colored(&t, n, 0.5, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(decode_s(&encode_s(&a), &t).unwrap(), a);
    }

    #[test]
    fn json_round_trips(seed: u64, n in 0usize..6) {
        let s = digraph(seed, n);
        prop_assert_eq!(parse_structure(&structure_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn homomorphisms_compose(s1: u64, s2: u64, s3: u64, n in 1usize..5) {
        let budget = Budget::default();
        let (a, b, c) = (digraph(s1, n), digraph(s2, n), digraph(s3, n));
        let f = find_homomorphism(&a, &b, &PartialMap::empty(), &budget).unwrap();
        let g = find_homomorphism(&b, &c, &PartialMap::empty(), &budget).unwrap();
        prop_assert_eq!(f.is_some(), has_hom(&a, &b));
        if let (Some(f), Some(g)) = (f, g) {
            let h = f.then(&g).unwrap();
            prop_assert!(is_hom(&a, &c, h.map()));
        }
    }

    #[test]
    fn core_is_a_retract(seed: u64, n in 1usize..6) {
        let a = digraph(seed, n);
        let c = core(&a, &Budget::default()).unwrap();
        prop_assert!(has_hom(&a, &c.structure) && has_hom(&c.structure, &a));
        // a core has no proper endomorphic image
        prop_assert!(homs(&c.structure, &c.structure).iter().all(|f| injective(f)));
    }
}
