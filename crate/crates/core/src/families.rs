//! Small named structures over the single binary symbol `E`.
//!
//! Undirected graphs are symmetric, loopless `E`-structures. Sizes count
//! vertices, so `path_graph(3)` is the path a−b−c with two edges.

use crate::structure::{Signature, Structure};

pub fn graph_signature() -> Signature {
    Signature::binary("E")
}

/// Directed graph on `0..n` with the given arcs.
pub fn digraph(n: usize, arcs: &[(usize, usize)]) -> Structure {
    let tuples = arcs.iter().map(|&(x, y)| vec![x, y]).collect();
    Structure::with_size(graph_signature(), n, vec![tuples]).expect("arcs within 0..n")
}

/// Undirected graph on `0..n`; each edge is stored in both directions.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let arcs: Vec<_> = edges.iter().flat_map(|&(x, y)| [(x, y), (y, x)]).collect();
    digraph(n, &arcs)
}

pub fn edgeless(n: usize) -> Structure {
    digraph(n, &[])
}

pub fn complete_graph(n: usize) -> Structure {
    let edges: Vec<_> = (0..n)
        .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
        .collect();
    graph(n, &edges)
}

pub fn cycle_graph(n: usize) -> Structure {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph(n, &edges)
}

pub fn path_graph(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    graph(n, &edges)
}

pub fn directed_path(n: usize) -> Structure {
    let arcs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    digraph(n, &arcs)
}

pub fn directed_cycle(n: usize) -> Structure {
    let arcs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    digraph(n, &arcs)
}

/// The single arc `0 → 1`.
pub fn directed_edge() -> Structure {
    digraph(2, &[(0, 1)])
}

/// One vertex carrying a loop.
pub fn loop_point() -> Structure {
    digraph(1, &[(0, 0)])
}
