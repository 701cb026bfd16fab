//! Lasso contractions of instances along subobjects, and the two ways of
//! pushing a structured decomposition forward along such a contraction.

use serde::Serialize;
use thiserror::Error;

use crate::colimits::{
    colimit, diagram_of_images, is_colimit_cocone, pushout, Cocone, DiagramArrow, FiniteDiagram,
    Span,
};
use crate::cset::{are_isomorphic, find_isomorphism, is_epi, is_mono, kernel_refines, Hom, Instance};
use crate::decomposition::{
    aligned_legs, decomposition_colimit, from_diagram, images_decomposition, pullback_decomposition,
    to_diagram, validate_decomposition, width_vector, DecompositionError, StructuredDecomposition,
    WidthVector,
};
use crate::lasso::{Lasso, LassoError};
use crate::universe::{enumerate_subobjects, UniverseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractionError {
    #[error("subobject map is not monic on sort `{0}`")]
    NotMono(String),
    #[error("schema mismatch between the instances and lasso `{0}`")]
    SchemaMismatch(String),
    #[error("decomposition does not glue to the base instance")]
    ColimitMisalignment,
    #[error("lasso `{0}` is not strong and the decomposition shape has a cycle")]
    ShapeGate(String),
    #[error("invalid decomposition: {0}")]
    Decomposition(DecompositionError),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
    #[error(transparent)]
    Lasso(#[from] LassoError),
    #[error(transparent)]
    Universe(#[from] UniverseError),
}

impl From<DecompositionError> for ContractionError {
    fn from(e: DecompositionError) -> Self {
        match e {
            DecompositionError::ColimitMismatch => ContractionError::ColimitMisalignment,
            other => ContractionError::Decomposition(other),
        }
    }
}

/// The pushout square `X -> Y`, `X -> ΛX`, `Y -> Y/f`, `ΛX -> Y/f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contraction {
    pub lasso: String,
    pub base: Instance,
    pub sub: Hom,
    pub eta: Hom,
    pub result: Instance,
    /// `Y -> Y/f`.
    pub quotient: Hom,
    /// `ΛX -> Y/f`.
    pub co_leg: Hom,
}

impl Contraction {
    /// The square as a cocone over the span `Y <- X -> ΛX`.
    pub fn cocone(&self) -> Cocone {
        let span = Span::new(self.sub.clone(), self.eta.clone()).expect("shared apex");
        Cocone {
            diagram: span.to_diagram(),
            apex: self.result.clone(),
            legs: vec![
                self.quotient.clone(),
                self.co_leg.clone(),
                self.sub.then(&self.quotient),
            ],
        }
    }
}

fn first_non_mono_sort(f: &Hom) -> Option<String> {
    let schema = f.dom().schema();
    (0..schema.sort_count()).find_map(|s| {
        let mut seen = vec![false; f.cod().carrier(s)];
        f.component(s)
            .iter()
            .any(|&y| std::mem::replace(&mut seen[y], true))
            .then(|| schema.sort_name(s).to_string())
    })
}

/// Contracts `f.cod()` along the mono `f` with `lasso`.
pub fn contract(f: &Hom, lasso: &Lasso) -> Result<Contraction, ContractionError> {
    if f.dom().schema().as_ref() != lasso.schema().as_ref() {
        return Err(ContractionError::SchemaMismatch(lasso.name().to_string()));
    }
    if let Some(sort) = first_non_mono_sort(f) {
        return Err(ContractionError::NotMono(sort));
    }
    let eta = lasso.eta(f.dom());
    let square = pushout(&Span::new(f.clone(), eta.clone()).expect("shared apex"));
    Ok(Contraction {
        lasso: lasso.name().to_string(),
        base: f.cod().clone(),
        sub: f.clone(),
        eta,
        result: square.apex,
        quotient: square.left,
        co_leg: square.right,
    })
}

/// Intermediate diagrams of the span construction, bags then adhesions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanIntermediates {
    /// The decomposition pulled back along the subobject.
    pub pulled_back: StructuredDecomposition,
    /// Images of the pulled-back pieces in `ΛX`.
    pub images: StructuredDecomposition,
    /// Pointwise pushouts of images and original pieces.
    pub glued: StructuredDecomposition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushforwardResult {
    pub input: StructuredDecomposition,
    pub contraction: Contraction,
    pub output: StructuredDecomposition,
    /// `d(i) -> (d/f)(i)` for every node, bags then adhesions.
    pub epis: Vec<Hom>,
    pub intermediates: Option<SpanIntermediates>,
}

impl PushforwardResult {
    /// Same shape, no wider, every piece map epi, and gluing back to `Y/f`.
    pub fn verify(&self) -> Result<(), ContractionError> {
        let fail = |m: &str| Err(ContractionError::Postcondition(m.to_string()));
        if self.output.shape != self.input.shape {
            return fail("shape changed");
        }
        if validate_decomposition(&self.output).is_err() {
            return fail("output legs are not monic");
        }
        if !width_vector(&self.output).le(&width_vector(&self.input)) {
            return fail("width increased");
        }
        if !self.epis.iter().all(is_epi) {
            return fail("a piece map is not epi");
        }
        if !are_isomorphic(&decomposition_colimit(&self.output).apex, &self.contraction.result) {
            return fail("output does not glue to the contraction");
        }
        Ok(())
    }

    pub fn widths(&self) -> (WidthVector, WidthVector) {
        (width_vector(&self.input), width_vector(&self.output))
    }
}

fn check_inputs(d: &StructuredDecomposition, f: &Hom, lasso: &Lasso) -> Result<(), ContractionError> {
    validate_decomposition(d).map_err(DecompositionError::Invalid)?;
    if d.schema.as_ref() != lasso.schema().as_ref() {
        return Err(ContractionError::SchemaMismatch(lasso.name().to_string()));
    }
    if !is_mono(f) {
        return Err(ContractionError::NotMono(
            first_non_mono_sort(f).unwrap_or_default(),
        ));
    }
    Ok(())
}

/// Pushforward as the images of `Y/f`'s quotient composed with the cocone
/// legs of `d`.
pub fn pushforward_images(
    d: &StructuredDecomposition,
    f: &Hom,
    lasso: &Lasso,
) -> Result<PushforwardResult, ContractionError> {
    check_inputs(d, f, lasso)?;
    let legs = aligned_legs(d, f.cod())?;
    let contraction = contract(f, lasso)?;
    let composed: Vec<Hom> = legs.iter().map(|l| l.then(&contraction.quotient)).collect();
    let (output, images) = images_decomposition(d, &composed);
    let result = PushforwardResult {
        input: d.clone(),
        contraction,
        output,
        epis: images.epis,
        intermediates: None,
    };
    result.verify()?;
    Ok(result)
}

/// Pushforward through the span of pulled-back pieces: the pieces of `X`
/// are replaced by their images in `ΛX`, glued pointwise to the pieces of
/// `d`, and the result is cut down to images in its colimit.
pub fn pushforward_span(
    d: &StructuredDecomposition,
    f: &Hom,
    lasso: &Lasso,
) -> Result<PushforwardResult, ContractionError> {
    check_inputs(d, f, lasso)?;
    if !lasso.is_strong() && !d.shape.is_forest() {
        return Err(ContractionError::ShapeGate(lasso.name().to_string()));
    }
    let legs = aligned_legs(d, f.cod())?;
    let contraction = contract(f, lasso)?;
    let pulled = pullback_decomposition(d, f)?;
    let x = &pulled.decomposition;
    let nodes = x.node_count();

    // Pieces of X, imaged in ΛX.
    let into_lx: Vec<Hom> = pulled.to_dom.iter().map(|p| p.then(&contraction.eta)).collect();
    let q = diagram_of_images(&to_diagram(x), &into_lx);
    let q_colimit = colimit(&q.diagram);
    if !are_isomorphic(&q_colimit.apex, contraction.eta.cod()) {
        return Err(ContractionError::Postcondition(
            "images of the pulled-back pieces do not glue to ΛX".into(),
        ));
    }

    // h(i) = q(i) +_{x(i)} d(i).
    let squares: Vec<_> = (0..nodes)
        .map(|i| {
            let span = Span::new(q.epis[i].clone(), pulled.to_nodes[i].clone()).expect("shared apex");
            (span.clone(), pushout(&span))
        })
        .collect();
    let x_diagram = to_diagram(x);
    let d_diagram = to_diagram(d);
    let mut h_arrows = Vec::with_capacity(x_diagram.arrows().len());
    for (k, arrow) in x_diagram.arrows().iter().enumerate() {
        let (src, dst) = (arrow.src, arrow.dst);
        let (span, from) = &squares[src];
        let to = &squares[dst].1;
        let q_arrow = &q.diagram.arrows()[k].hom;
        let d_arrow = &d_diagram.arrows()[k].hom;
        let legs = [
            q_arrow.then(&to.left),
            d_arrow.then(&to.right),
            arrow.hom.then(&pulled.to_nodes[dst]).then(&to.right),
        ];
        let canonical = colimit(&span.to_diagram());
        debug_assert_eq!(canonical.apex, from.apex);
        let induced = canonical
            .mediate(&to.apex, &legs)
            .ok_or_else(|| ContractionError::Postcondition("glued pieces do not map".into()))?;
        h_arrows.push(DiagramArrow {
            src,
            dst,
            hom: induced.with_ends(from.apex.clone(), to.apex.clone()),
        });
    }
    let h = FiniteDiagram::new(
        d.schema.clone(),
        squares.iter().map(|(_, p)| p.apex.clone()).collect(),
        h_arrows,
    )
    .expect("glued diagram is well formed");

    // Ω_i: h(i) -> Y/f, induced by ΛX -> Y/f and Y -> Y/f.
    let omegas = (0..nodes)
        .map(|i| {
            let (span, sq) = &squares[i];
            let canonical = colimit(&span.to_diagram());
            let via_lx = q.monos[i].then(&contraction.co_leg);
            let via_y = legs[i].then(&contraction.quotient);
            let apex_leg = span.left.then(&via_lx);
            canonical
                .mediate(&contraction.result, &[via_lx, via_y, apex_leg])
                .map(|u| u.with_ends(sq.apex.clone(), contraction.result.clone()))
                .ok_or_else(|| ContractionError::Postcondition("no map from a glued piece to Y/f".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let omega = Cocone {
        diagram: h.clone(),
        apex: contraction.result.clone(),
        legs: omegas,
    };
    if !is_colimit_cocone(&omega) {
        return Err(ContractionError::Postcondition(
            "glued pieces do not form a colimit cocone over Y/f".into(),
        ));
    }

    let h_colimit = colimit(&h);
    let images = diagram_of_images(&h, &h_colimit.legs);
    let epis = (0..nodes)
        .map(|i| squares[i].1.right.then(&images.epis[i]))
        .collect();
    let result = PushforwardResult {
        input: d.clone(),
        contraction,
        output: from_diagram(&d.shape, &images.diagram),
        epis,
        intermediates: Some(SpanIntermediates {
            pulled_back: x.clone(),
            images: from_diagram(&d.shape, &q.diagram),
            glued: from_diagram(&d.shape, &h),
        }),
    };
    result.verify()?;
    Ok(result)
}

/// Outcome of comparing the two pushforward constructions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub equivalent: bool,
    /// Human-readable reasons when not equivalent.
    pub witnesses: Vec<String>,
}

/// Runs both constructions and searches for an isomorphism of the outputs
/// as diagrams: piecewise isos commuting with every leg.
pub fn equivalence_check(
    d: &StructuredDecomposition,
    f: &Hom,
    lasso: &Lasso,
) -> Result<Equivalence, ContractionError> {
    let a = pushforward_images(d, f, lasso)?;
    let b = pushforward_span(d, f, lasso)?;
    Ok(diagram_isomorphism(&a.output, &b.output))
}

/// Whether two decompositions of the same shape are isomorphic as diagrams.
pub fn diagram_isomorphism(a: &StructuredDecomposition, b: &StructuredDecomposition) -> Equivalence {
    if a.shape != b.shape {
        return Equivalence {
            equivalent: false,
            witnesses: vec!["shapes differ".into()],
        };
    }
    let (da, db) = (to_diagram(a), to_diagram(b));
    let n = da.nodes().len();
    let mut isos: Vec<Vec<Hom>> = Vec::with_capacity(n);
    let mut witnesses = Vec::new();
    for i in 0..n {
        let (x, y) = (&da.nodes()[i], &db.nodes()[i]);
        match find_isomorphism(x, y) {
            None => witnesses.push(format!("piece {i} differs")),
            Some(first) => {
                let auts = crate::cset::automorphisms(y);
                isos.push(auts.iter().map(|aut| first.then(aut)).collect());
            }
        }
    }
    if !witnesses.is_empty() {
        return Equivalence {
            equivalent: false,
            witnesses,
        };
    }
    // Assign bags first; each adhesion is checked once its endpoints are fixed.
    let mut chosen: Vec<usize> = vec![usize::MAX; n];
    let equivalent = assign(0, &da, &db, &isos, &mut chosen);
    if !equivalent {
        witnesses.push("no piecewise isomorphism commutes with the legs".into());
    }
    Equivalence {
        equivalent,
        witnesses,
    }
}

fn assign(
    i: usize,
    da: &FiniteDiagram,
    db: &FiniteDiagram,
    isos: &[Vec<Hom>],
    chosen: &mut Vec<usize>,
) -> bool {
    if i == isos.len() {
        return true;
    }
    for k in 0..isos[i].len() {
        chosen[i] = k;
        let consistent = da.arrows().iter().zip(db.arrows()).all(|(aa, ab)| {
            if chosen[aa.src] == usize::MAX || chosen[aa.dst] == usize::MAX || aa.src.max(aa.dst) != i {
                return true;
            }
            let lhs = aa.hom.then(&isos[aa.dst][chosen[aa.dst]]);
            let rhs = isos[aa.src][chosen[aa.src]].then(&ab.hom);
            lhs.components() == rhs.components()
        });
        if consistent && assign(i + 1, da, db, isos, chosen) {
            return true;
        }
    }
    chosen[i] = usize::MAX;
    false
}

/// Outcome of searching for one subobject whose contraction equals two
/// successive contractions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComposedContraction {
    /// A subobject of `Y` whose contraction quotient identifies exactly what
    /// the composite quotient does.
    Witness { sub: Hom, checked: usize },
    NoWitness { checked: usize },
}

/// Contracts `Y` along `f1`, the result along `f2`, and searches all
/// subobjects of `Y` for a single contraction with the same quotient.
pub fn composed_contraction_probe(
    f1: &Hom,
    f2: &Hom,
    lasso: &Lasso,
) -> Result<ComposedContraction, ContractionError> {
    let first = contract(f1, lasso)?;
    if f2.cod() != &first.result {
        return Err(ContractionError::Postcondition(
            "second subobject must land in the first contraction".into(),
        ));
    }
    let second = contract(f2, lasso)?;
    let composite = first.quotient.then(&second.quotient);
    let subs = enumerate_subobjects(f1.cod())?;
    let checked = subs.len();
    for sub in subs {
        let c = contract(&sub, lasso)?;
        if kernel_refines(&c.quotient, &composite) && kernel_refines(&composite, &c.quotient) {
            return Ok(ComposedContraction::Witness { sub, checked });
        }
    }
    Ok(ComposedContraction::NoWitness { checked })
}
