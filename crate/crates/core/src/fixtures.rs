//! Small named instances and decompositions used by the CLI, the tests and
//! the documentation.

use std::sync::Arc;

use crate::cset::{Hom, Instance};
use crate::decomposition::{ShapeGraph, StructuredDecomposition};
use crate::schema::{shared_builtin, Builtin, Schema};

pub fn grph() -> Arc<Schema> {
    shared_builtin(Builtin::Grph).expect("builtin schema")
}

pub fn rgrph() -> Arc<Schema> {
    shared_builtin(Builtin::RGrph).expect("builtin schema")
}

/// A directed multigraph from a vertex count and `(src, tgt)` edges.
///
/// # Panics
/// If an endpoint is out of range.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Instance {
    Instance::new(
        grph(),
        vec![n, edges.len()],
        vec![
            edges.iter().map(|e| e.0).collect(),
            edges.iter().map(|e| e.1).collect(),
        ],
    )
    .expect("endpoints in range")
}

/// A reflexive graph: edges `0..n` are the distinguished loops, then `extra`.
///
/// # Panics
/// If an endpoint is out of range.
pub fn rgraph(n: usize, extra: &[(usize, usize)]) -> Instance {
    let src: Vec<usize> = (0..n).chain(extra.iter().map(|e| e.0)).collect();
    let tgt: Vec<usize> = (0..n).chain(extra.iter().map(|e| e.1)).collect();
    Instance::new(
        rgrph(),
        vec![n, n + extra.len()],
        vec![src, tgt, (0..n).collect()],
    )
    .expect("endpoints in range")
}

/// The path `x -> y -> z`.
pub fn path3() -> Instance {
    graph(3, &[(0, 1), (1, 2)])
}

/// The path `x -> y -> z` cut into bags `{x, y}` and `{y, z}` along `{y}`.
pub fn path_decomposition() -> StructuredDecomposition {
    let bag = graph(2, &[(0, 1)]);
    let adh = graph(1, &[]);
    let l = Hom::new(adh.clone(), bag.clone(), vec![vec![1], vec![]]).expect("valid leg");
    let r = Hom::new(adh.clone(), bag.clone(), vec![vec![0], vec![]]).expect("valid leg");
    StructuredDecomposition::new(
        grph(),
        ShapeGraph::new(2, vec![(0, 1)]),
        vec![bag.clone(), bag],
        vec![adh],
        vec![(l, r)],
    )
    .expect("valid decomposition")
}

/// The edge `x -> y` as a subgraph of [`path3`].
pub fn path_first_edge() -> Hom {
    Hom::new(graph(2, &[(0, 1)]), path3(), vec![vec![0, 1], vec![0]]).expect("valid inclusion")
}

/// A non-injective map onto [`path3`]: vertices `x1, x2, y, z` with edges
/// `x1 -> y`, `x2 -> y`, `y -> z`, sending `x1` and `x2` to `x`.
pub fn folding_map() -> Hom {
    let g = graph(4, &[(0, 2), (1, 2), (2, 3)]);
    Hom::new(g, path3(), vec![vec![0, 0, 1, 2], vec![0, 0, 1]]).expect("valid hom")
}
