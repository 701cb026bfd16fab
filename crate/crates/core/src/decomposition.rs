//! Structured decompositions: bags on the vertices of a shape graph, glued
//! along adhesions by monic spans.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::colimits::{
    colimit, diagram_of_images, pullback, Cocone, DiagramArrow, FiniteDiagram, ImagesDiagram,
};
use crate::cset::{find_isomorphism, is_mono, Hom, Instance};
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("invalid decomposition: {}", join(.0))]
    Invalid(Vec<DecompositionViolation>),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("colimit of the decomposition is not isomorphic to the codomain")]
    ColimitMismatch,
}

fn join(v: &[DecompositionViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum DecompositionViolation {
    EndpointOutOfRange { edge: usize },
    BagCount { expected: usize, got: usize },
    AdhesionCount { expected: usize, got: usize },
    LegCount { expected: usize, got: usize },
    LegEndpoints { edge: usize, side: Side },
    NonMonicLeg { edge: usize, side: Side },
    SchemaMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Source,
    Target,
}

impl fmt::Display for DecompositionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EndpointOutOfRange { edge } => write!(f, "edge {edge} has an endpoint out of range"),
            Self::BagCount { expected, got } => write!(f, "expected {expected} bags, got {got}"),
            Self::AdhesionCount { expected, got } => {
                write!(f, "expected {expected} adhesions, got {got}")
            }
            Self::LegCount { expected, got } => write!(f, "expected {expected} leg pairs, got {got}"),
            Self::LegEndpoints { edge, side } => {
                write!(f, "{side:?} leg of edge {edge} does not connect adhesion to bag")
            }
            Self::NonMonicLeg { edge, side } => write!(f, "{side:?} leg of edge {edge} is not monic"),
            Self::SchemaMismatch => write!(f, "bags and adhesions use different schemas"),
        }
    }
}

/// A directed multigraph indexing a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ShapeGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl ShapeGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Self {
        Self { vertices, edges }
    }

    /// Whether the underlying undirected multigraph has no cycle (loops and
    /// parallel edges count as cycles).
    pub fn is_forest(&self) -> bool {
        let mut uf = crate::colimits::UnionFind::new(self.vertices);
        self.edges.iter().all(|&(s, t)| uf.union(s, t))
    }
}

/// Bags, adhesions and the monic spans between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredDecomposition {
    pub schema: Arc<Schema>,
    pub shape: ShapeGraph,
    pub bags: Vec<Instance>,
    pub adhesions: Vec<Instance>,
    /// Per shape edge: (adhesion -> source bag, adhesion -> target bag).
    pub legs: Vec<(Hom, Hom)>,
}

impl StructuredDecomposition {
    /// Builds and validates.
    pub fn new(
        schema: Arc<Schema>,
        shape: ShapeGraph,
        bags: Vec<Instance>,
        adhesions: Vec<Instance>,
        legs: Vec<(Hom, Hom)>,
    ) -> Result<Self, DecompositionError> {
        let d = Self {
            schema,
            shape,
            bags,
            adhesions,
            legs,
        };
        validate_decomposition(&d).map_err(DecompositionError::Invalid)?;
        Ok(d)
    }

    /// The decomposition with a single bag and no edges.
    pub fn trivial(x: &Instance) -> Self {
        Self {
            schema: x.schema().clone(),
            shape: ShapeGraph::new(1, Vec::new()),
            bags: vec![x.clone()],
            adhesions: Vec::new(),
            legs: Vec::new(),
        }
    }

    /// Number of diagram nodes (bags, then adhesions).
    pub fn node_count(&self) -> usize {
        self.bags.len() + self.adhesions.len()
    }

    /// Node `i` of the diagram: bags first, then adhesions.
    pub fn node(&self, i: usize) -> &Instance {
        if i < self.bags.len() {
            &self.bags[i]
        } else {
            &self.adhesions[i - self.bags.len()]
        }
    }
}

pub fn validate_decomposition(d: &StructuredDecomposition) -> Result<(), Vec<DecompositionViolation>> {
    use DecompositionViolation::*;
    let mut v = Vec::new();
    let (nv, ne) = (d.shape.vertices, d.shape.edges.len());
    for (edge, &(s, t)) in d.shape.edges.iter().enumerate() {
        if s >= nv || t >= nv {
            v.push(EndpointOutOfRange { edge });
        }
    }
    if d.bags.len() != nv {
        v.push(BagCount { expected: nv, got: d.bags.len() });
    }
    if d.adhesions.len() != ne {
        v.push(AdhesionCount { expected: ne, got: d.adhesions.len() });
    }
    if d.legs.len() != ne {
        v.push(LegCount { expected: ne, got: d.legs.len() });
    }
    if d.bags.iter().chain(&d.adhesions).any(|x| x.schema().as_ref() != d.schema.as_ref()) {
        v.push(SchemaMismatch);
    }
    if !v.is_empty() {
        return Err(v);
    }
    for (edge, ((s, t), (l, r))) in d.shape.edges.iter().zip(&d.legs).enumerate() {
        for (side, leg, bag) in [(Side::Source, l, *s), (Side::Target, r, *t)] {
            if leg.dom() != &d.adhesions[edge] || leg.cod() != &d.bags[bag] {
                v.push(LegEndpoints { edge, side });
            } else if !is_mono(leg) {
                v.push(NonMonicLeg { edge, side });
            }
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Nodes are the bags followed by the adhesions; each edge contributes its
/// two legs as arrows.
pub fn to_diagram(d: &StructuredDecomposition) -> FiniteDiagram {
    let nb = d.bags.len();
    let nodes = d.bags.iter().chain(&d.adhesions).cloned().collect();
    let arrows = d
        .shape
        .edges
        .iter()
        .zip(&d.legs)
        .enumerate()
        .flat_map(|(e, (&(s, t), (l, r)))| {
            [
                DiagramArrow { src: nb + e, dst: s, hom: l.clone() },
                DiagramArrow { src: nb + e, dst: t, hom: r.clone() },
            ]
        })
        .collect();
    FiniteDiagram::new(d.schema.clone(), nodes, arrows).expect("validated decomposition")
}

pub fn decomposition_colimit(d: &StructuredDecomposition) -> Cocone {
    colimit(&to_diagram(d))
}

/// Rebuilds a decomposition from a diagram laid out by [`to_diagram`].
pub fn from_diagram(shape: &ShapeGraph, diagram: &FiniteDiagram) -> StructuredDecomposition {
    let nb = shape.vertices;
    let nodes = diagram.nodes();
    let arrows = diagram.arrows();
    StructuredDecomposition {
        schema: diagram.schema().clone(),
        shape: shape.clone(),
        bags: nodes[..nb].to_vec(),
        adhesions: nodes[nb..].to_vec(),
        legs: (0..shape.edges.len())
            .map(|e| (arrows[2 * e].hom.clone(), arrows[2 * e + 1].hom.clone()))
            .collect(),
    }
}

/// Per-sort maximum bag size.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct WidthVector(pub Vec<usize>);

impl WidthVector {
    /// Componentwise comparison.
    pub fn le(&self, other: &WidthVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

pub fn width_vector(d: &StructuredDecomposition) -> WidthVector {
    let mut w = vec![0; d.schema.sort_count()];
    for bag in &d.bags {
        for (m, &n) in w.iter_mut().zip(bag.carriers()) {
            *m = (*m).max(n);
        }
    }
    WidthVector(w)
}

/// Scalar width measures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WidthMeasure {
    /// Largest carrier of one sort over all bags.
    Sort(String),
    /// Largest total size of a bag.
    Total,
}

pub fn width(d: &StructuredDecomposition, measure: &WidthMeasure) -> Result<usize, DecompositionError> {
    match measure {
        WidthMeasure::Sort(name) => {
            let s = d
                .schema
                .sort_index(name)
                .ok_or_else(|| DecompositionError::UnknownSort(name.clone()))?;
            Ok(width_vector(d).0[s])
        }
        WidthMeasure::Total => Ok(d.bags.iter().map(Instance::total_size).max().unwrap_or(0)),
    }
}

/// Width by the first sort (the vertex sort of the graph schemas).
pub fn default_width(d: &StructuredDecomposition) -> usize {
    width_vector(d).0.first().copied().unwrap_or(0)
}

/// Legs of the colimit cocone of `d`, retargeted to `y` through the least
/// isomorphism from the colimit apex.
pub fn aligned_legs(d: &StructuredDecomposition, y: &Instance) -> Result<Vec<Hom>, DecompositionError> {
    let cocone = decomposition_colimit(d);
    let iso = find_isomorphism(&cocone.apex, y).ok_or(DecompositionError::ColimitMismatch)?;
    Ok(cocone.legs.iter().map(|l| l.then(&iso)).collect())
}

/// A decomposition pulled back along `δ: X -> Y`, with the projections of
/// every node (bags then adhesions) onto `X` and onto the original node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PulledBack {
    pub decomposition: StructuredDecomposition,
    pub to_dom: Vec<Hom>,
    pub to_nodes: Vec<Hom>,
}

/// Pointwise pullback of every bag and adhesion against `delta`.
pub fn pullback_decomposition(
    d: &StructuredDecomposition,
    delta: &Hom,
) -> Result<PulledBack, DecompositionError> {
    let legs = aligned_legs(d, delta.cod())?;
    let pbs: Vec<_> = legs
        .iter()
        .map(|l| pullback(delta, l).expect("legs share the codomain of delta"))
        .collect();
    let nb = d.bags.len();
    let mut arrows = Vec::with_capacity(2 * d.shape.edges.len());
    for (e, ((s, t), (l, r))) in d.shape.edges.iter().zip(&d.legs).enumerate() {
        let from = &pbs[nb + e];
        for (bag, leg) in [(*s, l), (*t, r)] {
            let to = &pbs[bag];
            // (x, a) in X ×_Y d(e) goes to (x, leg(a)) in X ×_Y d(bag).
            let components = (0..d.schema.sort_count())
                .map(|sort| {
                    let pairs: Vec<(usize, usize)> = to
                        .left
                        .component(sort)
                        .iter()
                        .copied()
                        .zip(to.right.component(sort).iter().copied())
                        .collect();
                    from.left
                        .component(sort)
                        .iter()
                        .zip(from.right.component(sort))
                        .map(|(&x, &a)| {
                            pairs
                                .binary_search(&(x, leg.apply(sort, a)))
                                .expect("induced pullback arrow")
                        })
                        .collect()
                })
                .collect();
            arrows.push(DiagramArrow {
                src: nb + e,
                dst: bag,
                hom: Hom::from_parts_unchecked(from.apex.clone(), to.apex.clone(), components),
            });
        }
    }
    let diagram = FiniteDiagram::new(
        d.schema.clone(),
        pbs.iter().map(|p| p.apex.clone()).collect(),
        arrows,
    )
    .expect("pullback diagram is well formed");
    Ok(PulledBack {
        decomposition: from_diagram(&d.shape, &diagram),
        to_dom: pbs.iter().map(|p| p.left.clone()).collect(),
        to_nodes: pbs.into_iter().map(|p| p.right).collect(),
    })
}

/// Images of a family of node legs (bags then adhesions) as a decomposition of
/// the same shape.
pub fn images_decomposition(
    d: &StructuredDecomposition,
    legs: &[Hom],
) -> (StructuredDecomposition, ImagesDiagram) {
    let images = diagram_of_images(&to_diagram(d), legs);
    (from_diagram(&d.shape, &images.diagram), images)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::cset::fixtures::*;

    /// x -> y -> z with bags {x, y} and {y, z} glued along {y}.
    pub fn path_decomposition() -> (StructuredDecomposition, Instance) {
        let h = graph(3, &[(0, 1), (1, 2)]);
        let bag = graph(2, &[(0, 1)]);
        let adh = graph(1, &[]);
        let l = Hom::new(adh.clone(), bag.clone(), vec![vec![1], vec![]]).unwrap();
        let r = Hom::new(adh.clone(), bag.clone(), vec![vec![0], vec![]]).unwrap();
        let d = StructuredDecomposition::new(
            grph(),
            ShapeGraph::new(2, vec![(0, 1)]),
            vec![bag.clone(), bag],
            vec![adh],
            vec![(l, r)],
        )
        .unwrap();
        (d, h)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::cset::fixtures::*;
    use crate::cset::are_isomorphic;

    #[test]
    fn path_decomposition_is_valid_and_glues_back() {
        let (d, h) = path_decomposition();
        assert_eq!(validate_decomposition(&d), Ok(()));
        let diagram = to_diagram(&d);
        assert_eq!((diagram.nodes().len(), diagram.arrows().len()), (3, 2));
        assert!(are_isomorphic(&decomposition_colimit(&d).apex, &h));
        assert_eq!(width(&d, &WidthMeasure::Sort("V".into())), Ok(2));
        assert_eq!(
            width(&d, &WidthMeasure::Sort("W".into())),
            Err(DecompositionError::UnknownSort("W".into()))
        );
    }

    #[test]
    fn non_injective_leg_is_reported() {
        let bag = graph(1, &[]);
        let adh = graph(2, &[]);
        let l = Hom::new(adh.clone(), bag.clone(), vec![vec![0, 0], vec![]]).unwrap();
        let d = StructuredDecomposition {
            schema: grph(),
            shape: ShapeGraph::new(1, vec![(0, 0)]),
            bags: vec![bag],
            adhesions: vec![adh],
            legs: vec![(l.clone(), l)],
        };
        let v = validate_decomposition(&d).unwrap_err();
        assert!(v.contains(&DecompositionViolation::NonMonicLeg { edge: 0, side: Side::Source }));
    }

    #[test]
    fn empty_shape_decomposes_the_initial_object() {
        let d = StructuredDecomposition::new(grph(), ShapeGraph::new(0, vec![]), vec![], vec![], vec![])
            .unwrap();
        assert_eq!(decomposition_colimit(&d).apex.total_size(), 0);
        assert_eq!(default_width(&d), 0);
    }

    #[test]
    fn empty_adhesion_gives_coproduct() {
        let bag = graph(2, &[(0, 1)]);
        let empty = graph(0, &[]);
        let d = StructuredDecomposition::new(
            grph(),
            ShapeGraph::new(2, vec![(0, 1)]),
            vec![bag.clone(), bag.clone()],
            vec![empty],
            vec![(Hom::from_empty(&bag), Hom::from_empty(&bag))],
        )
        .unwrap();
        assert_eq!(decomposition_colimit(&d).apex.carriers(), &[4, 2]);
    }

    #[test]
    fn triangle_shape_diagram_counts() {
        let v = graph(1, &[]);
        let bag = graph(2, &[(0, 1)]);
        let leg = |x: usize| Hom::new(v.clone(), bag.clone(), vec![vec![x], vec![]]).unwrap();
        let d = StructuredDecomposition::new(
            grph(),
            ShapeGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]),
            vec![bag.clone(); 3],
            vec![v.clone(); 3],
            vec![(leg(1), leg(0)); 3],
        )
        .unwrap();
        let diagram = to_diagram(&d);
        assert_eq!((diagram.nodes().len(), diagram.arrows().len()), (6, 6));
        assert!(!d.shape.is_forest());
        assert!(are_isomorphic(
            &decomposition_colimit(&d).apex,
            &graph(3, &[(0, 1), (1, 2), (2, 0)])
        ));
    }

    #[test]
    fn folding_map_pullback() {
        let (d, h) = path_decomposition();
        let g = graph(4, &[(0, 2), (1, 2), (2, 3)]);
        let f = Hom::new(g.clone(), h, vec![vec![0, 0, 1, 2], vec![0, 0, 1]]).unwrap();
        let pb = pullback_decomposition(&d, &f).unwrap();
        let x = &pb.decomposition;
        assert_eq!(x.shape, d.shape);
        assert_eq!(validate_decomposition(x), Ok(()));
        // Vertices of G in each bag: {x1, x2, y} and {y, z}.
        assert_eq!(pb.to_dom[0].component(0), &[0, 1, 2]);
        assert_eq!(pb.to_dom[1].component(0), &[2, 3]);
        assert_eq!(pb.to_dom[2].component(0), &[2]);
        assert!(are_isomorphic(&decomposition_colimit(x).apex, &g));
    }

    #[test]
    fn pullback_along_identity_and_inclusion() {
        let (d, h) = path_decomposition();
        let pb = pullback_decomposition(&d, &Hom::identity(&h)).unwrap();
        for i in 0..d.node_count() {
            assert!(are_isomorphic(pb.decomposition.node(i), d.node(i)));
        }
        // Along the inclusion of the first bag: the second bag shrinks to {y}.
        let bag = graph(2, &[(0, 1)]);
        let incl = Hom::new(bag, h, vec![vec![0, 1], vec![0]]).unwrap();
        let pb = pullback_decomposition(&d, &incl).unwrap();
        assert_eq!(pb.decomposition.bags[0].carriers(), &[2, 1]);
        assert_eq!(pb.decomposition.bags[1].carriers(), &[1, 0]);
    }

    #[test]
    fn mismatched_codomain_is_rejected() {
        let (d, _) = path_decomposition();
        let other = graph(1, &[]);
        let res = pullback_decomposition(&d, &Hom::identity(&other));
        assert_eq!(res.unwrap_err(), DecompositionError::ColimitMismatch);
    }
}
