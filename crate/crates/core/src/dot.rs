//! Graphviz output for instances, decompositions and contractions.
//!
//! Graph-like schemas (edge sorts with two generators into the vertex sort)
//! are drawn as graphs; anything else is drawn as its category of elements.

use std::fmt::Write;

use crate::contraction::Contraction;
use crate::cset::Instance;
use crate::decomposition::StructuredDecomposition;
use crate::schema::Schema;

/// Endpoint generators of each edge sort, or `None` if the schema is not
/// graph-like. Index 0 is the vertex sort.
fn edge_sorts(schema: &Schema) -> Option<Vec<(usize, usize, usize)>> {
    let mut out = Vec::new();
    for sort in 1..schema.sort_count() {
        let gens: Vec<usize> = schema.outgoing(sort).collect();
        if gens.len() != 2 || gens.iter().any(|&g| schema.generators()[g].cod != 0) {
            return None;
        }
        out.push((sort, gens[0], gens[1]));
    }
    let stray = schema
        .generators()
        .iter()
        .any(|g| g.dom == 0 && g.cod == 0);
    (!stray && schema.sort_count() > 1).then_some(out)
}

/// Distinguished loops, as `(edge sort, edge)`, picked out by generators
/// from the vertex sort.
fn distinguished(x: &Instance) -> Vec<(usize, usize)> {
    let schema = x.schema();
    schema
        .outgoing(0)
        .flat_map(|g| {
            let cod = schema.generators()[g].cod;
            (0..x.carrier(0)).map(move |v| (cod, x.apply(g, v)))
        })
        .collect()
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Writes the body of one instance: nodes prefixed with `prefix`, labelled
/// by `label(sort, element)`.
fn body(out: &mut String, x: &Instance, prefix: &str, indent: &str, label: &dyn Fn(usize, usize) -> String) {
    let schema = x.schema();
    match edge_sorts(schema) {
        Some(edges) => {
            let loops = distinguished(x);
            for v in 0..x.carrier(0) {
                let _ = writeln!(out, "{indent}{} [label={}];", quote(&format!("{prefix}v{v}")), quote(&label(0, v)));
            }
            let colored = edges.len() > 1;
            for (sort, s, t) in edges {
                for e in 0..x.carrier(sort) {
                    let mut attrs = vec![format!("label={}", quote(&label(sort, e)))];
                    if loops.contains(&(sort, e)) {
                        attrs.push("style=dotted".into());
                    }
                    if colored {
                        attrs.push(format!("colorscheme=set19, color={}", (sort - 1) % 9 + 1));
                    }
                    let _ = writeln!(
                        out,
                        "{indent}{} -> {} [{}];",
                        quote(&format!("{prefix}v{}", x.apply(s, e))),
                        quote(&format!("{prefix}v{}", x.apply(t, e))),
                        attrs.join(", ")
                    );
                }
            }
        }
        None => {
            for sort in 0..schema.sort_count() {
                for e in 0..x.carrier(sort) {
                    let _ = writeln!(
                        out,
                        "{indent}{} [label={}];",
                        quote(&format!("{prefix}{}{e}", schema.sort_name(sort))),
                        quote(&format!("{}:{}", schema.sort_name(sort), label(sort, e)))
                    );
                }
            }
            for (gi, g) in schema.generators().iter().enumerate() {
                for e in 0..x.carrier(g.dom) {
                    let _ = writeln!(
                        out,
                        "{indent}{} -> {} [label={}];",
                        quote(&format!("{prefix}{}{e}", schema.sort_name(g.dom))),
                        quote(&format!("{prefix}{}{}", schema.sort_name(g.cod), x.apply(gi, e))),
                        quote(&g.name)
                    );
                }
            }
        }
    }
}

fn node_id(x: &Instance, prefix: &str, sort: usize, e: usize) -> String {
    if edge_sorts(x.schema()).is_some() {
        format!("{prefix}v{e}")
    } else {
        format!("{prefix}{}{e}", x.schema().sort_name(sort))
    }
}

pub fn instance_to_dot(x: &Instance) -> String {
    let mut out = String::from("digraph instance {\n");
    body(&mut out, x, "", "  ", &|_, e| e.to_string());
    out.push_str("}\n");
    out
}

/// Bags as clusters; each adhesion vertex becomes a dashed undirected link
/// between its two images.
pub fn decomposition_to_dot(d: &StructuredDecomposition) -> String {
    let mut out = String::from("digraph decomposition {\n  compound=true;\n");
    for (i, bag) in d.bags.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{i} {{\n    label=\"bag {i}\";");
        body(&mut out, bag, &format!("b{i}_"), "    ", &|_, e| e.to_string());
        out.push_str("  }\n");
    }
    let graph_like = edge_sorts(&d.schema).is_some();
    for (k, ((s, t), (l, r))) in d.shape.edges.iter().zip(&d.legs).enumerate() {
        let adh = &d.adhesions[k];
        let sorts: Vec<usize> = if graph_like { vec![0] } else { (0..d.schema.sort_count()).collect() };
        for sort in sorts {
            for e in 0..adh.carrier(sort) {
                let _ = writeln!(
                    out,
                    "  {} -> {} [style=dashed, dir=none, constraint=false, label={}];",
                    quote(&node_id(&d.bags[*s], &format!("b{s}_"), sort, l.apply(sort, e))),
                    quote(&node_id(&d.bags[*t], &format!("b{t}_"), sort, r.apply(sort, e))),
                    quote(&format!("a{k}"))
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

/// The contracted instance, each element labelled by the elements of the
/// base instance that were merged into it.
pub fn contraction_to_dot(c: &Contraction) -> String {
    let sorts = c.result.schema().sort_count();
    let mut preimages: Vec<Vec<Vec<usize>>> = (0..sorts).map(|s| vec![Vec::new(); c.result.carrier(s)]).collect();
    for (s, pre) in preimages.iter_mut().enumerate() {
        for (y, &q) in c.quotient.component(s).iter().enumerate() {
            pre[q].push(y);
        }
    }
    let label = |sort: usize, e: usize| {
        let ids: Vec<String> = preimages[sort][e].iter().map(usize::to_string).collect();
        format!("{{{}}}", ids.join(","))
    };
    let mut out = format!("digraph contraction {{\n  label={};\n", quote(&c.lasso));
    body(&mut out, &c.result, "", "  ", &label);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::contract;
    use crate::fixtures::*;
    use crate::lasso::grph_cc;
    use crate::schema::{shared_builtin, Builtin};

    #[test]
    fn graph_output_lists_every_edge() {
        let dot = instance_to_dot(&path3());
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("->").count(), 2);
        assert!(dot.contains("\"v0\" -> \"v1\""));
    }

    #[test]
    fn reflexive_loops_are_dotted() {
        let dot = instance_to_dot(&rgraph(2, &[(0, 1)]));
        assert_eq!(dot.matches("style=dotted").count(), 2);
    }

    #[test]
    fn petri_nets_fall_back_to_elements() {
        let schema = shared_builtin(Builtin::Petri).unwrap();
        let x = Instance::terminal(schema);
        let dot = instance_to_dot(&x);
        assert!(dot.contains("Species:0"));
    }

    #[test]
    fn decomposition_has_clusters_and_dashed_links() {
        let dot = decomposition_to_dot(&path_decomposition());
        assert_eq!(dot.matches("subgraph cluster_").count(), 2);
        assert!(dot.contains("\"b0_v1\" -> \"b1_v0\" [style=dashed"));
    }

    #[test]
    fn contraction_labels_list_preimages() {
        let c = contract(&path_first_edge(), &grph_cc()).unwrap();
        let dot = contraction_to_dot(&c);
        assert!(dot.contains("label=\"{0,1}\""));
        assert!(dot.contains("label=\"{2}\""));
    }
}
