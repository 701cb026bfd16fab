//! JSON file formats for schemas, instances, homs and decompositions.
//!
//! Carriers, actions and components are keyed by sort or generator name and
//! emitted in schema order. An instance names its schema when it is a builtin
//! and inlines the presentation otherwise.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contraction::{Contraction, PushforwardResult};
use crate::cset::{check_hom, CsetError, Hom, Instance};
use crate::decomposition::{
    validate_decomposition, DecompositionError, ShapeGraph, StructuredDecomposition,
};
use crate::schema::{shared_builtin, Builtin, Schema, SchemaError, SchemaPresentation};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("missing entry for `{0}`")]
    Missing(String),
    #[error(transparent)]
    Cset(#[from] CsetError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error("instances use different schemas")]
    SchemaMismatch,
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
}

/// A schema given by builtin name or inline presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemaRef {
    Name(String),
    Inline(SchemaPresentation),
}

impl SchemaRef {
    pub fn resolve(&self) -> Result<Arc<Schema>, IoError> {
        match self {
            SchemaRef::Name(n) => Ok(shared_builtin(n.parse::<Builtin>()?)?),
            SchemaRef::Inline(p) => {
                let s = Schema::new(p.clone())?;
                // Share the pooled handle when the presentation is a builtin.
                match s.builtin_name() {
                    Some(name) => Ok(shared_builtin(name.parse::<Builtin>()?)?),
                    None => Ok(Arc::new(s)),
                }
            }
        }
    }

    pub fn of(schema: &Schema) -> Self {
        match schema.builtin_name() {
            Some(n) => SchemaRef::Name(n),
            None => SchemaRef::Inline(schema.presentation().clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub schema: SchemaRef,
    pub carriers: IndexMap<String, usize>,
    pub actions: IndexMap<String, Vec<usize>>,
}

/// A hom whose endpoints may be implied by context (decomposition legs).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dom: Option<InstanceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cod: Option<InstanceDoc>,
    pub components: IndexMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeDoc {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionDoc {
    pub shape: ShapeDoc,
    pub bags: Vec<InstanceDoc>,
    pub adhesions: Vec<InstanceDoc>,
    pub legs: Vec<[HomDoc; 2]>,
}

pub fn instance_doc(x: &Instance) -> InstanceDoc {
    let s = x.schema();
    InstanceDoc {
        schema: SchemaRef::of(s),
        carriers: (0..s.sort_count())
            .map(|i| (s.sort_name(i).to_string(), x.carrier(i)))
            .collect(),
        actions: s
            .generators()
            .iter()
            .zip(x.actions())
            .map(|(g, a)| (g.name.clone(), a.clone()))
            .collect(),
    }
}

fn keyed_components(h: &Hom) -> IndexMap<String, Vec<usize>> {
    let s = h.dom().schema();
    (0..s.sort_count())
        .map(|i| (s.sort_name(i).to_string(), h.component(i).to_vec()))
        .collect()
}

pub fn hom_doc(h: &Hom) -> HomDoc {
    HomDoc {
        dom: Some(instance_doc(h.dom())),
        cod: Some(instance_doc(h.cod())),
        components: keyed_components(h),
    }
}

fn leg_doc(h: &Hom) -> HomDoc {
    HomDoc {
        dom: None,
        cod: None,
        components: keyed_components(h),
    }
}

pub fn decomposition_doc(d: &StructuredDecomposition) -> DecompositionDoc {
    DecompositionDoc {
        shape: ShapeDoc {
            vertices: d.shape.vertices,
            edges: d.shape.edges.iter().map(|&(s, t)| [s, t]).collect(),
        },
        bags: d.bags.iter().map(instance_doc).collect(),
        adhesions: d.adhesions.iter().map(instance_doc).collect(),
        legs: d.legs.iter().map(|(l, r)| [leg_doc(l), leg_doc(r)]).collect(),
    }
}

fn check_keys<'a>(
    keys: impl Iterator<Item = &'a String>,
    known: impl Fn(&str) -> bool,
    err: fn(String) -> IoError,
) -> Result<(), IoError> {
    for k in keys {
        if !known(k) {
            return Err(err(k.clone()));
        }
    }
    Ok(())
}

pub fn instance_from_doc(doc: &InstanceDoc) -> Result<Instance, IoError> {
    let schema = doc.schema.resolve()?;
    check_keys(doc.carriers.keys(), |k| schema.sort_index(k).is_some(), IoError::UnknownSort)?;
    check_keys(
        doc.actions.keys(),
        |k| schema.generator_index(k).is_some(),
        IoError::UnknownGenerator,
    )?;
    let carriers = (0..schema.sort_count())
        .map(|i| {
            let name = schema.sort_name(i);
            doc.carriers
                .get(name)
                .copied()
                .ok_or_else(|| IoError::Missing(name.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let actions = schema
        .generators()
        .iter()
        .map(|g| {
            // A generator out of an empty sort may be omitted.
            match doc.actions.get(&g.name) {
                Some(a) => Ok(a.clone()),
                None if carriers[g.dom] == 0 => Ok(Vec::new()),
                None => Err(IoError::Missing(g.name.clone())),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Instance::new(schema, carriers, actions)?)
}

fn components_from_doc(
    schema: &Schema,
    dom: &Instance,
    components: &IndexMap<String, Vec<usize>>,
) -> Result<Vec<Vec<usize>>, IoError> {
    check_keys(components.keys(), |k| schema.sort_index(k).is_some(), IoError::UnknownSort)?;
    (0..schema.sort_count())
        .map(|i| {
            let name = schema.sort_name(i);
            match components.get(name) {
                Some(c) => Ok(c.clone()),
                None if dom.carrier(i) == 0 => Ok(Vec::new()),
                None => Err(IoError::Missing(name.to_string())),
            }
        })
        .collect()
}

/// Parses a hom, taking missing endpoints from `dom`/`cod` when given.
pub fn hom_from_doc(
    doc: &HomDoc,
    dom: Option<&Instance>,
    cod: Option<&Instance>,
) -> Result<Hom, IoError> {
    let resolve = |own: &Option<InstanceDoc>, ctx: Option<&Instance>, what: &str| match (own, ctx) {
        (Some(d), _) => instance_from_doc(d),
        (None, Some(x)) => Ok(x.clone()),
        (None, None) => Err(IoError::Missing(what.to_string())),
    };
    let d = resolve(&doc.dom, dom, "dom")?;
    let c = resolve(&doc.cod, cod, "cod")?;
    if let Some(ctx) = dom {
        if ctx != &d {
            return Err(IoError::Cset(CsetError::MalformedHom(
                "domain differs from its context".into(),
            )));
        }
    }
    if let Some(ctx) = cod {
        if ctx != &c {
            return Err(IoError::Cset(CsetError::MalformedHom(
                "codomain differs from its context".into(),
            )));
        }
    }
    if !d.same_schema(&c) {
        return Err(IoError::SchemaMismatch);
    }
    let components = components_from_doc(d.schema(), &d, &doc.components)?;
    let h = Hom::from_parts_unchecked(d, c, components);
    check_hom(&h)?;
    Ok(h)
}

pub fn decomposition_from_doc(doc: &DecompositionDoc) -> Result<StructuredDecomposition, IoError> {
    let bags = doc.bags.iter().map(instance_from_doc).collect::<Result<Vec<_>, _>>()?;
    let adhesions = doc
        .adhesions
        .iter()
        .map(instance_from_doc)
        .collect::<Result<Vec<_>, _>>()?;
    let schema = match bags.first().or(adhesions.first()) {
        Some(x) => x.schema().clone(),
        None => {
            return Err(IoError::Missing("bags".into()));
        }
    };
    if bags.iter().chain(&adhesions).any(|x| !x.same_schema(&bags[0])) {
        return Err(IoError::SchemaMismatch);
    }
    let shape = ShapeGraph::new(
        doc.shape.vertices,
        doc.shape.edges.iter().map(|e| (e[0], e[1])).collect(),
    );
    let mut legs = Vec::with_capacity(doc.legs.len());
    for (e, pair) in doc.legs.iter().enumerate() {
        let adh = adhesions.get(e);
        let ends = shape.edges.get(e).copied();
        let bag = |i: usize| ends.and_then(|(s, t)| bags.get(if i == 0 { s } else { t }));
        let l = hom_from_doc(&pair[0], adh, bag(0))?;
        let r = hom_from_doc(&pair[1], adh, bag(1))?;
        legs.push((l, r));
    }
    let d = StructuredDecomposition {
        schema,
        shape,
        bags,
        adhesions,
        legs,
    };
    validate_decomposition(&d).map_err(DecompositionError::Invalid)?;
    Ok(d)
}

pub fn parse_schema(text: &str) -> Result<Schema, IoError> {
    let p: SchemaPresentation = serde_json::from_str(text)?;
    Ok(Schema::new(p)?)
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    instance_from_doc(&serde_json::from_str(text)?)
}

pub fn parse_hom(text: &str) -> Result<Hom, IoError> {
    hom_from_doc(&serde_json::from_str(text)?, None, None)
}

pub fn parse_decomposition(text: &str) -> Result<StructuredDecomposition, IoError> {
    decomposition_from_doc(&serde_json::from_str(text)?)
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents always serialize")
}

pub fn schema_to_json(s: &Schema) -> String {
    pretty(s.presentation())
}

pub fn instance_to_json(x: &Instance) -> String {
    pretty(&instance_doc(x))
}

pub fn hom_to_json(h: &Hom) -> String {
    pretty(&hom_doc(h))
}

pub fn decomposition_to_json(d: &StructuredDecomposition) -> String {
    pretty(&decomposition_doc(d))
}

/// A contraction square: base, subobject, unit, result and both legs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionDoc {
    pub lasso: String,
    pub base: InstanceDoc,
    pub sub: HomDoc,
    pub eta: HomDoc,
    pub result: InstanceDoc,
    pub quotient: HomDoc,
    pub co_leg: HomDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermediatesDoc {
    pub pulled_back: DecompositionDoc,
    pub images: DecompositionDoc,
    pub glued: DecompositionDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushforwardDoc {
    pub method: String,
    pub contraction: ContractionDoc,
    pub decomposition: DecompositionDoc,
    pub epis: Vec<HomDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intermediates: Option<IntermediatesDoc>,
}

pub fn contraction_doc(c: &Contraction) -> ContractionDoc {
    ContractionDoc {
        lasso: c.lasso.clone(),
        base: instance_doc(&c.base),
        sub: hom_doc(&c.sub),
        eta: hom_doc(&c.eta),
        result: instance_doc(&c.result),
        quotient: hom_doc(&c.quotient),
        co_leg: hom_doc(&c.co_leg),
    }
}

pub fn contraction_from_doc(doc: &ContractionDoc) -> Result<Contraction, IoError> {
    let base = instance_from_doc(&doc.base)?;
    let result = instance_from_doc(&doc.result)?;
    let sub = hom_from_doc(&doc.sub, None, Some(&base))?;
    let eta = hom_from_doc(&doc.eta, Some(sub.dom()), None)?;
    let quotient = hom_from_doc(&doc.quotient, Some(&base), Some(&result))?;
    let co_leg = hom_from_doc(&doc.co_leg, Some(eta.cod()), Some(&result))?;
    Ok(Contraction {
        lasso: doc.lasso.clone(),
        base,
        sub,
        eta,
        result,
        quotient,
        co_leg,
    })
}

pub fn pushforward_doc(method: &str, r: &PushforwardResult) -> PushforwardDoc {
    PushforwardDoc {
        method: method.to_string(),
        contraction: contraction_doc(&r.contraction),
        decomposition: decomposition_doc(&r.output),
        epis: r.epis.iter().map(hom_doc).collect(),
        intermediates: r.intermediates.as_ref().map(|i| IntermediatesDoc {
            pulled_back: decomposition_doc(&i.pulled_back),
            images: decomposition_doc(&i.images),
            glued: decomposition_doc(&i.glued),
        }),
    }
}

pub fn contraction_to_json(c: &Contraction) -> String {
    pretty(&contraction_doc(c))
}

pub fn parse_contraction(text: &str) -> Result<Contraction, IoError> {
    contraction_from_doc(&serde_json::from_str(text)?)
}

pub fn read_file(path: &str) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_string(),
        source,
    })
}

pub fn write_file(path: &str, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::File {
        path: path.to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cset::fixtures::*;
    use crate::decomposition::fixtures::path_decomposition;

    #[test]
    fn instance_round_trip() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let text = instance_to_json(&g);
        assert!(text.contains("\"schema\": \"Grph\""));
        assert_eq!(parse_instance(&text).unwrap(), g);
    }

    #[test]
    fn inline_schema_instance() {
        let text = r#"{
            "schema": {"objects": ["A"], "morphisms": [{"name": "f", "dom": "A", "cod": "A"}],
                       "equations": [[["f", "f"], ["f"]]]},
            "carriers": {"A": 2},
            "actions": {"f": [1, 1]}
        }"#;
        let x = parse_instance(text).unwrap();
        assert_eq!(x.carriers(), &[2]);
        assert_eq!(parse_instance(&instance_to_json(&x)).unwrap(), x);
        let bad = text.replace("[1, 1]", "[1, 0]");
        assert!(matches!(parse_instance(&bad), Err(IoError::Cset(_))));
    }

    #[test]
    fn hom_round_trip_and_errors() {
        let g = graph(2, &[(0, 1)]);
        let h = Hom::identity(&g);
        assert_eq!(parse_hom(&hom_to_json(&h)).unwrap(), h);
        let broken = hom_to_json(&h).replace("\"V\": [\n      0,\n      1\n    ]", "\"V\": [1, 1]");
        assert!(matches!(parse_hom(&broken), Err(IoError::Cset(CsetError::NotNatural(_)))));
        assert!(matches!(parse_instance("{"), Err(IoError::Json(_))));
        let unknown = instance_to_json(&g).replace("\"E\"", "\"Q\"");
        assert!(matches!(parse_instance(&unknown), Err(IoError::UnknownSort(_))));
    }

    #[test]
    fn contraction_round_trip() {
        let c = crate::contraction::contract(
            &crate::fixtures::path_first_edge(),
            &crate::lasso::grph_cc(),
        )
        .unwrap();
        assert_eq!(parse_contraction(&contraction_to_json(&c)).unwrap(), c);
    }

    #[test]
    fn decomposition_round_trip() {
        let (d, _) = path_decomposition();
        let text = decomposition_to_json(&d);
        assert_eq!(parse_decomposition(&text).unwrap(), d);
    }
}
