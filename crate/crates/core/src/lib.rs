//! Finite relational structures and the machinery around them: homomorphism
//! search, cores, ages and amalgamation, Fraïssé-style approximants, colored
//! structures over a template, and positive-existential type comparison.

pub mod budget;
pub mod canon;
pub mod classes;
pub mod colored;
pub mod error;
pub mod families;
pub mod fraisse;
pub mod io;
pub mod morphism;
pub mod oligomorphy;
pub mod random;
mod search;
pub mod structure;

pub use budget::Budget;
pub use classes::{ClassSpec, Property};
pub use colored::ColoredStructure;
pub use error::{Error, Result};
pub use morphism::{
    automorphism_group, core, count_homomorphisms, endomorphisms, enumerate_homomorphisms,
    find_embedding, find_homomorphism, find_isomorphism, is_hom_equivalent,
    is_homomorphism_homogeneous, is_isomorphic, Core, Morphism, MorphismKind, PartialMap,
};
pub use structure::{Graph, Signature, Structure, Symbol};
