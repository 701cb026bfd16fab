//! Pointwise finite colimits, pullbacks and image factorizations.

use std::sync::Arc;

use thiserror::Error;

use crate::cset::{is_iso, is_mono, Hom, Instance};
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("node {0} belongs to another schema")]
    SchemaMismatch(usize),
    #[error("arrow {arrow} references missing node {node}")]
    MissingNode { arrow: usize, node: usize },
    #[error("arrow {0} does not match its endpoint instances")]
    EndpointMismatch(usize),
}

/// Union-find whose class representative is always the least member.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Merges two classes; returns whether they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    /// Dense class labels, numbered in order of each class's least member.
    pub fn labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        for x in 0..n {
            let r = self.find(x);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            label[x] = label[r];
        }
        (label, count)
    }
}

/// An arrow of a finite diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramArrow {
    pub src: usize,
    pub dst: usize,
    pub hom: Hom,
}

/// A finite diagram of instances over one schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDiagram {
    schema: Arc<Schema>,
    nodes: Vec<Instance>,
    arrows: Vec<DiagramArrow>,
}

impl FiniteDiagram {
    pub fn new(
        schema: Arc<Schema>,
        nodes: Vec<Instance>,
        arrows: Vec<DiagramArrow>,
    ) -> Result<Self, DiagramError> {
        for (i, n) in nodes.iter().enumerate() {
            if n.schema().as_ref() != schema.as_ref() {
                return Err(DiagramError::SchemaMismatch(i));
            }
        }
        for (ai, a) in arrows.iter().enumerate() {
            for node in [a.src, a.dst] {
                if node >= nodes.len() {
                    return Err(DiagramError::MissingNode { arrow: ai, node });
                }
            }
            if a.hom.dom() != &nodes[a.src] || a.hom.cod() != &nodes[a.dst] {
                return Err(DiagramError::EndpointMismatch(ai));
            }
        }
        Ok(Self {
            schema,
            nodes,
            arrows,
        })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn nodes(&self) -> &[Instance] {
        &self.nodes
    }

    pub fn arrows(&self) -> &[DiagramArrow] {
        &self.arrows
    }

    pub fn is_monic(&self) -> bool {
        self.arrows.iter().all(|a| is_mono(&a.hom))
    }
}

/// A cocone over a diagram: an apex and one leg per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocone {
    pub diagram: FiniteDiagram,
    pub apex: Instance,
    pub legs: Vec<Hom>,
}

impl Cocone {
    /// Whether every leg ends at the apex and every arrow triangle commutes.
    pub fn commutes(&self) -> bool {
        self.legs.len() == self.diagram.nodes.len()
            && self
                .legs
                .iter()
                .zip(&self.diagram.nodes)
                .all(|(l, n)| l.dom() == n && l.cod() == &self.apex)
            && self
                .diagram
                .arrows
                .iter()
                .all(|a| a.hom.then(&self.legs[a.dst]).components() == self.legs[a.src].components())
    }

    /// The map from this cocone's apex to `apex` that turns these legs into `legs`.
    ///
    /// Requires this cocone's legs to be jointly surjective, which holds for
    /// computed colimits. Returns `None` when no such map exists.
    pub fn mediate(&self, apex: &Instance, legs: &[Hom]) -> Option<Hom> {
        let schema = self.apex.schema();
        let mut components = Vec::with_capacity(schema.sort_count());
        for s in 0..schema.sort_count() {
            let mut comp = vec![usize::MAX; self.apex.carrier(s)];
            for (own, other) in self.legs.iter().zip(legs) {
                for (x, &y) in own.component(s).iter().enumerate() {
                    let want = other.component(s)[x];
                    if comp[y] == usize::MAX {
                        comp[y] = want;
                    } else if comp[y] != want {
                        return None;
                    }
                }
            }
            if comp.contains(&usize::MAX) {
                return None;
            }
            components.push(comp);
        }
        Some(Hom::from_parts_unchecked(self.apex.clone(), apex.clone(), components))
    }
}

/// Colimit of a finite diagram: coproduct of the nodes, quotiented per sort by
/// the identifications the arrows induce.
pub fn colimit(d: &FiniteDiagram) -> Cocone {
    let schema = d.schema.clone();
    let sorts = schema.sort_count();
    let mut offsets = vec![vec![0usize; sorts]; d.nodes.len() + 1];
    for (i, n) in d.nodes.iter().enumerate() {
        offsets[i + 1] = (0..sorts).map(|s| offsets[i][s] + n.carrier(s)).collect();
    }
    let total = &offsets[d.nodes.len()];
    let mut labels = Vec::with_capacity(sorts);
    let mut carriers = Vec::with_capacity(sorts);
    for s in 0..sorts {
        let mut uf = UnionFind::new(total[s]);
        for a in &d.arrows {
            for (x, &y) in a.hom.component(s).iter().enumerate() {
                uf.union(offsets[a.src][s] + x, offsets[a.dst][s] + y);
            }
        }
        let (label, count) = uf.labels();
        labels.push(label);
        carriers.push(count);
    }
    let mut actions = Vec::with_capacity(schema.generators().len());
    for (gi, g) in schema.generators().iter().enumerate() {
        let mut act = vec![usize::MAX; carriers[g.dom]];
        for (i, n) in d.nodes.iter().enumerate() {
            for (x, &y) in n.action(gi).iter().enumerate() {
                let class = labels[g.dom][offsets[i][g.dom] + x];
                let image = labels[g.cod][offsets[i][g.cod] + y];
                debug_assert!(
                    act[class] == usize::MAX || act[class] == image,
                    "induced action of `{}` is ill-defined",
                    g.name
                );
                act[class] = image;
            }
        }
        actions.push(act);
    }
    let apex = Instance::from_parts_unchecked(schema, carriers, actions);
    let legs = d
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let components = (0..sorts)
                .map(|s| {
                    (0..n.carrier(s))
                        .map(|x| labels[s][offsets[i][s] + x])
                        .collect()
                })
                .collect();
            Hom::from_parts_unchecked(n.clone(), apex.clone(), components)
        })
        .collect();
    Cocone {
        diagram: d.clone(),
        apex,
        legs,
    }
}

/// A span `left.cod() <- apex -> right.cod()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub left: Hom,
    pub right: Hom,
}

impl Span {
    pub fn new(left: Hom, right: Hom) -> Option<Self> {
        (left.dom() == right.dom()).then_some(Self { left, right })
    }

    pub fn apex(&self) -> &Instance {
        self.left.dom()
    }

    pub fn is_monic(&self) -> bool {
        is_mono(&self.left) && is_mono(&self.right)
    }

    /// Diagram with nodes `[left foot, right foot, apex]`.
    pub fn to_diagram(&self) -> FiniteDiagram {
        FiniteDiagram {
            schema: self.apex().schema().clone(),
            nodes: vec![
                self.left.cod().clone(),
                self.right.cod().clone(),
                self.apex().clone(),
            ],
            arrows: vec![
                DiagramArrow {
                    src: 2,
                    dst: 0,
                    hom: self.left.clone(),
                },
                DiagramArrow {
                    src: 2,
                    dst: 1,
                    hom: self.right.clone(),
                },
            ],
        }
    }
}

/// The cospan completing a pushout square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pushout {
    pub apex: Instance,
    pub left: Hom,
    pub right: Hom,
}

pub fn pushout(span: &Span) -> Pushout {
    let mut cocone = colimit(&span.to_diagram());
    let right = cocone.legs.swap_remove(1);
    let left = cocone.legs.swap_remove(0);
    if span.is_monic() {
        assert!(
            is_mono(&left) && is_mono(&right),
            "pushout of a monic span produced a non-monic leg"
        );
    }
    Pushout {
        apex: cocone.apex,
        left,
        right,
    }
}

/// Coequalizer of a parallel pair, as a quotient of the common codomain.
pub fn coequalizer(a: &Hom, b: &Hom) -> Option<(Instance, Hom)> {
    if a.dom() != b.dom() || a.cod() != b.cod() {
        return None;
    }
    let d = FiniteDiagram {
        schema: a.dom().schema().clone(),
        nodes: vec![a.cod().clone(), a.dom().clone()],
        arrows: vec![
            DiagramArrow {
                src: 1,
                dst: 0,
                hom: a.clone(),
            },
            DiagramArrow {
                src: 1,
                dst: 0,
                hom: b.clone(),
            },
        ],
    };
    let mut cocone = colimit(&d);
    let q = cocone.legs.swap_remove(0);
    Some((cocone.apex, q))
}

/// The span completing a pullback square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pullback {
    pub apex: Instance,
    pub left: Hom,
    pub right: Hom,
}

/// Fiber product of `f: A -> Z` and `g: B -> Z`; elements are the pairs
/// `(a, b)` with `f(a) = g(b)`, listed lexicographically.
pub fn pullback(f: &Hom, g: &Hom) -> Option<Pullback> {
    if f.cod() != g.cod() {
        return None;
    }
    let (a, b) = (f.dom(), g.dom());
    let schema = a.schema().clone();
    let sorts = schema.sort_count();
    let mut pairs: Vec<Vec<(usize, usize)>> = Vec::with_capacity(sorts);
    let mut index: Vec<Vec<usize>> = Vec::with_capacity(sorts);
    for s in 0..sorts {
        let mut ps = Vec::new();
        let mut idx = vec![usize::MAX; a.carrier(s) * b.carrier(s)];
        for x in 0..a.carrier(s) {
            for y in 0..b.carrier(s) {
                if f.apply(s, x) == g.apply(s, y) {
                    idx[x * b.carrier(s) + y] = ps.len();
                    ps.push((x, y));
                }
            }
        }
        pairs.push(ps);
        index.push(idx);
    }
    let actions = schema
        .generators()
        .iter()
        .enumerate()
        .map(|(gi, gen)| {
            pairs[gen.dom]
                .iter()
                .map(|&(x, y)| {
                    let (x2, y2) = (a.apply(gi, x), b.apply(gi, y));
                    index[gen.cod][x2 * b.carrier(gen.cod) + y2]
                })
                .collect()
        })
        .collect();
    let carriers = pairs.iter().map(Vec::len).collect();
    let apex = Instance::from_parts_unchecked(schema, carriers, actions);
    let left = Hom::from_parts_unchecked(
        apex.clone(),
        a.clone(),
        pairs.iter().map(|ps| ps.iter().map(|p| p.0).collect()).collect(),
    );
    let right = Hom::from_parts_unchecked(
        apex.clone(),
        b.clone(),
        pairs.iter().map(|ps| ps.iter().map(|p| p.1).collect()).collect(),
    );
    Some(Pullback { apex, left, right })
}

/// Epi-mono factorization through the pointwise image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageFactorization {
    pub epi: Hom,
    pub image: Instance,
    pub mono: Hom,
}

pub fn image_factorization(h: &Hom) -> ImageFactorization {
    let (dom, cod) = (h.dom(), h.cod());
    let schema = dom.schema().clone();
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(schema.sort_count());
    let mut position: Vec<Vec<usize>> = Vec::with_capacity(schema.sort_count());
    for s in 0..schema.sort_count() {
        let mut hit = vec![false; cod.carrier(s)];
        h.component(s).iter().for_each(|&y| hit[y] = true);
        let mut pos = vec![usize::MAX; cod.carrier(s)];
        let mut mem = Vec::new();
        for (y, _) in hit.iter().enumerate().filter(|(_, &b)| b) {
            pos[y] = mem.len();
            mem.push(y);
        }
        members.push(mem);
        position.push(pos);
    }
    let actions = schema
        .generators()
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            members[g.dom]
                .iter()
                .map(|&y| position[g.cod][cod.apply(gi, y)])
                .collect()
        })
        .collect();
    let carriers = members.iter().map(Vec::len).collect();
    let image = Instance::from_parts_unchecked(schema.clone(), carriers, actions);
    let epi = Hom::from_parts_unchecked(
        dom.clone(),
        image.clone(),
        (0..schema.sort_count())
            .map(|s| h.component(s).iter().map(|&y| position[s][y]).collect())
            .collect(),
    );
    let mono = Hom::from_parts_unchecked(image.clone(), cod.clone(), members);
    ImageFactorization { epi, image, mono }
}

/// Whether `c` is a colimit cocone: the canonical colimit mediates to it by an iso.
pub fn is_colimit_cocone(c: &Cocone) -> bool {
    if !c.commutes() {
        return false;
    }
    let canonical = colimit(&c.diagram);
    canonical
        .mediate(&c.apex, &c.legs)
        .is_some_and(|u| is_iso(&u))
}

/// Images of the legs of a cocone, with the monos induced between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagesDiagram {
    pub diagram: FiniteDiagram,
    /// `node i -> image i`.
    pub epis: Vec<Hom>,
    /// `image i -> apex`.
    pub monos: Vec<Hom>,
}

/// Replaces each node by the image of its leg; each arrow becomes the unique
/// mono between images that commutes with the inclusions into the apex.
pub fn diagram_of_images(d: &FiniteDiagram, legs: &[Hom]) -> ImagesDiagram {
    let factors: Vec<ImageFactorization> = legs.iter().map(image_factorization).collect();
    let sorts = d.schema.sort_count();
    let arrows = d
        .arrows
        .iter()
        .map(|a| {
            let (from, to) = (&factors[a.src], &factors[a.dst]);
            let components = (0..sorts)
                .map(|s| {
                    let target = to.mono.component(s);
                    from.mono
                        .component(s)
                        .iter()
                        .map(|y| {
                            target
                                .binary_search(y)
                                .expect("cocone leg images are not nested")
                        })
                        .collect()
                })
                .collect();
            DiagramArrow {
                src: a.src,
                dst: a.dst,
                hom: Hom::from_parts_unchecked(from.image.clone(), to.image.clone(), components),
            }
        })
        .collect();
    let diagram = FiniteDiagram {
        schema: d.schema.clone(),
        nodes: factors.iter().map(|f| f.image.clone()).collect(),
        arrows,
    };
    ImagesDiagram {
        diagram,
        epis: factors.iter().map(|f| f.epi.clone()).collect(),
        monos: factors.into_iter().map(|f| f.mono).collect(),
    }
}
