//! Seeded random graphs, tree decompositions, subobjects and homs.
//!
//! Everything is driven by a caller-supplied `ChaCha8Rng`, so a seed fully
//! determines every case.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cset::{enumerate_homs, Hom, Instance};
use crate::decomposition::{decomposition_colimit, ShapeGraph, StructuredDecomposition};
use crate::schema::Schema;
use crate::universe::{closure, subobject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RandomError {
    #[error("random generation supports Grph and RGrph only")]
    UnsupportedSchema,
    #[error("no hom found after {0} attempts")]
    NoHom(usize),
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Plain,
    Reflexive,
}

fn kind(schema: &Schema) -> Result<Kind, RandomError> {
    match schema.builtin_name().as_deref() {
        Some("Grph") => Ok(Kind::Plain),
        Some("RGrph") => Ok(Kind::Reflexive),
        _ => Err(RandomError::UnsupportedSchema),
    }
}

/// Adds `vertices` fresh vertices and the given edges to a graph-like
/// instance. Old elements keep their indices; the inclusion is returned.
fn extend(x: &Instance, vertices: usize, edges: &[(usize, usize)]) -> Hom {
    let schema = x.schema().clone();
    let reflexive = kind(&schema) == Ok(Kind::Reflexive);
    let n = x.carrier(0) + vertices;
    let mut src = x.action(0).to_vec();
    let mut tgt = x.action(1).to_vec();
    let mut actions = Vec::new();
    if reflexive {
        let mut loops = x.action(2).to_vec();
        for v in x.carrier(0)..n {
            loops.push(src.len());
            src.push(v);
            tgt.push(v);
        }
        src.extend(edges.iter().map(|e| e.0));
        tgt.extend(edges.iter().map(|e| e.1));
        actions.extend([src, tgt, loops]);
    } else {
        src.extend(edges.iter().map(|e| e.0));
        tgt.extend(edges.iter().map(|e| e.1));
        actions.extend([src, tgt]);
    }
    let carriers = vec![n, actions[0].len()];
    let y = Instance::new(schema, carriers, actions).expect("extension is well formed");
    Hom::new(
        x.clone(),
        y,
        vec![(0..x.carrier(0)).collect(), (0..x.carrier(1)).collect()],
    )
    .expect("prefix inclusion")
}

fn random_edges<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<(usize, usize)> {
    if n == 0 {
        return Vec::new();
    }
    (0..count)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect()
}

/// A graph with `1..=max_vertices` vertices and `0..=max_edges` edges
/// besides any distinguished loops.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    schema: &Arc<Schema>,
    max_vertices: usize,
    max_edges: usize,
) -> Result<Instance, RandomError> {
    kind(schema)?;
    let n = rng.gen_range(1..=max_vertices.max(1));
    let m = rng.gen_range(0..=max_edges);
    let edges = random_edges(rng, n, m);
    Ok(extend(&Instance::empty(schema.clone()), n, &edges).cod().clone())
}

/// Limits for [`random_tree_decomposition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeBounds {
    pub max_bags: usize,
    pub max_vertices: usize,
    pub max_edges: usize,
}

impl Default for TreeBounds {
    fn default() -> Self {
        Self {
            max_bags: 4,
            max_vertices: 3,
            max_edges: 3,
        }
    }
}

/// A random sub-instance: each element is kept with probability one half and
/// the selection is closed under the actions.
pub fn random_subobject<R: Rng>(rng: &mut R, y: &Instance) -> Hom {
    let mut keep: Vec<Vec<bool>> = y
        .carriers()
        .iter()
        .map(|&n| (0..n).map(|_| rng.gen_bool(0.5)).collect())
        .collect();
    closure(y, &mut keep);
    subobject(y, &keep).expect("closed selection")
}

/// A tree-shaped decomposition built bag by bag: each new bag hangs off a
/// random earlier one, shares a random sub-instance of it, and adds fresh
/// vertices and edges. Returns the decomposition and its colimit.
pub fn random_tree_decomposition<R: Rng>(
    rng: &mut R,
    schema: &Arc<Schema>,
    bounds: TreeBounds,
) -> Result<(StructuredDecomposition, Instance), RandomError> {
    kind(schema)?;
    let bags_wanted = rng.gen_range(1..=bounds.max_bags.max(1));
    let mut bags = vec![random_graph(rng, schema, bounds.max_vertices, bounds.max_edges)?];
    let mut edges = Vec::new();
    let mut adhesions = Vec::new();
    let mut legs = Vec::new();
    for i in 1..bags_wanted {
        let parent = rng.gen_range(0..i);
        let shared = random_subobject(rng, &bags[parent]);
        let adh = shared.dom().clone();
        let room = bounds.max_vertices.saturating_sub(adh.carrier(0));
        let fresh = rng.gen_range(0..=room);
        let n = adh.carrier(0) + fresh;
        let old_edges = adh.carrier(1) - if kind(schema)? == Kind::Reflexive { adh.carrier(0) } else { 0 };
        let m = rng.gen_range(0..=bounds.max_edges.saturating_sub(old_edges));
        let child = extend(&adh, fresh, &random_edges(rng, n, m));
        bags.push(child.cod().clone());
        edges.push((parent, i));
        adhesions.push(adh);
        legs.push((shared, child));
    }
    let d = StructuredDecomposition::new(
        schema.clone(),
        ShapeGraph::new(bags_wanted, edges),
        bags,
        adhesions,
        legs,
    )
    .expect("generated decomposition is valid");
    let y = decomposition_colimit(&d).apex;
    Ok((d, y))
}

/// A hom chosen uniformly among all homs `a -> b`.
pub fn random_hom<R: Rng>(rng: &mut R, a: &Instance, b: &Instance) -> Option<Hom> {
    enumerate_homs(a, b).ok()?.choose(rng).cloned()
}

/// A random graph together with a uniformly chosen hom into `y`, retrying
/// until some hom exists.
pub fn random_hom_into<R: Rng>(
    rng: &mut R,
    y: &Instance,
    max_vertices: usize,
    max_edges: usize,
) -> Result<Hom, RandomError> {
    const ATTEMPTS: usize = 200;
    for _ in 0..ATTEMPTS {
        let g = random_graph(rng, y.schema(), max_vertices, max_edges)?;
        if let Some(h) = random_hom(rng, &g, y) {
            return Ok(h);
        }
    }
    Err(RandomError::NoHom(ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cset::{are_isomorphic, check_hom, is_mono};
    use crate::decomposition::validate_decomposition;
    use crate::fixtures::{grph, rgrph};

    #[test]
    fn same_seed_same_cases() {
        let g = grph();
        let a = random_tree_decomposition(&mut rng(7), &g, TreeBounds::default()).unwrap();
        let b = random_tree_decomposition(&mut rng(7), &g, TreeBounds::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_decompositions_are_valid_trees() {
        for schema in [grph(), rgrph()] {
            let mut r = rng(11);
            for _ in 0..50 {
                let (d, y) = random_tree_decomposition(&mut r, &schema, TreeBounds::default()).unwrap();
                assert_eq!(validate_decomposition(&d), Ok(()));
                assert!(d.shape.is_forest());
                assert!(d.bags.iter().all(|b| b.carrier(0) <= 3));
                assert!(are_isomorphic(&decomposition_colimit(&d).apex, &y));
                let f = random_subobject(&mut r, &y);
                assert!(is_mono(&f));
                assert_eq!(check_hom(&f), Ok(()));
            }
        }
    }

    #[test]
    fn random_homs_are_homs() {
        let mut r = rng(3);
        let y = crate::fixtures::path3();
        for _ in 0..20 {
            let h = random_hom_into(&mut r, &y, 3, 2).unwrap();
            assert_eq!(check_hom(&h), Ok(()));
        }
    }
}
