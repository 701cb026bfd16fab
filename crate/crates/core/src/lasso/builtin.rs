//! The shipped lassos and the name resolver used by the command line.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{compose_functors, compose_lassos, Lasso, LassoError, Pair, PointedEndofunctor};
use crate::cset::Instance;
use crate::schema::{shared_builtin, Builtin, Schema};

fn builtin(b: Builtin) -> Arc<Schema> {
    shared_builtin(b).expect("builtin schemas are valid")
}

fn generator(x: &Instance, name: &str) -> usize {
    x.schema().generator_index(name).expect("builtin generator")
}

/// Identifies the endpoints of every edge of the given source/target generators.
fn endpoint_pairs(x: &Instance, edge_sort: usize, s: usize, t: usize) -> impl Iterator<Item = Pair> + '_ {
    (0..x.carrier(edge_sort)).map(move |e| (0, x.apply(s, e), x.apply(t, e)))
}

pub fn lasso_trivial(schema: Arc<Schema>) -> Lasso {
    Lasso::known(PointedEndofunctor::quotient("trivial", schema, |_| Vec::new()), true)
}

/// Connected components on directed multigraphs; edges survive as loops.
pub fn grph_cc() -> Lasso {
    let f = PointedEndofunctor::quotient("cc", builtin(Builtin::Grph), |x| {
        let (s, t) = (generator(x, "s"), generator(x, "t"));
        endpoint_pairs(x, 1, s, t).collect()
    });
    Lasso::known(f, true)
}

/// The lassos on reflexive graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RGrphKind {
    Cc,
    Deloop,
    Source,
    Target,
    Gather,
    /// `cc ∘ deloop`.
    CcThenDeloop,
    /// `deloop ∘ cc`, the terminal lasso.
    DeloopThenCc,
}

impl RGrphKind {
    pub const ALL: [RGrphKind; 7] = [
        RGrphKind::Cc,
        RGrphKind::Deloop,
        RGrphKind::Source,
        RGrphKind::Target,
        RGrphKind::Gather,
        RGrphKind::CcThenDeloop,
        RGrphKind::DeloopThenCc,
    ];
}

impl fmt::Display for RGrphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RGrphKind::Cc => "cc",
            RGrphKind::Deloop => "deloop",
            RGrphKind::Source => "source",
            RGrphKind::Target => "target",
            RGrphKind::Gather => "gather",
            RGrphKind::CcThenDeloop => "cc_then_deloop",
            RGrphKind::DeloopThenCc => "deloop_then_cc",
        })
    }
}

impl FromStr for RGrphKind {
    type Err = LassoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RGrphKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .or((s == "terminal").then_some(RGrphKind::DeloopThenCc))
            .ok_or_else(|| LassoError::UnknownKind(s.to_string()))
    }
}

#[derive(Clone, Copy)]
enum EdgeRule {
    None,
    Loops,
    All,
    BySource,
    ByTarget,
}

fn rgrph_quotient(name: &str, collapse_components: bool, edges: EdgeRule) -> PointedEndofunctor {
    PointedEndofunctor::quotient(name, builtin(Builtin::RGrph), move |x| {
        let (s, t, l) = (generator(x, "s"), generator(x, "t"), generator(x, "l"));
        let mut pairs: Vec<Pair> = Vec::new();
        if collapse_components {
            pairs.extend(endpoint_pairs(x, 1, s, t));
        }
        for e in 0..x.carrier(1) {
            let (u, v) = (x.apply(s, e), x.apply(t, e));
            let anchor = match edges {
                EdgeRule::None => None,
                EdgeRule::Loops | EdgeRule::All if u == v => Some(u),
                EdgeRule::Loops => None,
                // Every edge of a component, once its vertices are collapsed.
                EdgeRule::All => Some(u),
                EdgeRule::BySource => Some(u),
                EdgeRule::ByTarget => Some(v),
            };
            if let Some(w) = anchor {
                pairs.push((1, e, x.apply(l, w)));
            }
        }
        pairs
    })
}

/// A named lasso on reflexive graphs. The distinguished loop of a vertex
/// follows the vertex, so collapsing vertices always merges their loops.
pub fn rgrph_lasso(kind: RGrphKind) -> Lasso {
    let name = format!("rgrph:{kind}");
    match kind {
        RGrphKind::Cc => Lasso::known(rgrph_quotient(&name, true, EdgeRule::None), false),
        RGrphKind::Deloop => Lasso::known(rgrph_quotient(&name, false, EdgeRule::Loops), false),
        RGrphKind::Source => Lasso::known(rgrph_quotient(&name, true, EdgeRule::BySource), false),
        RGrphKind::Target => Lasso::known(rgrph_quotient(&name, true, EdgeRule::ByTarget), false),
        RGrphKind::Gather => Lasso::known(rgrph_quotient(&name, true, EdgeRule::Loops), false),
        RGrphKind::CcThenDeloop => {
            compose_lassos(&rgrph_lasso(RGrphKind::Cc), &rgrph_lasso(RGrphKind::Deloop))
                .expect("same schema")
                .renamed(name)
        }
        RGrphKind::DeloopThenCc => {
            compose_lassos(&rgrph_lasso(RGrphKind::Deloop), &rgrph_lasso(RGrphKind::Cc))
                .expect("same schema")
                .renamed(name)
        }
    }
}

/// The terminal lasso on reflexive graphs computed in one step: each
/// component becomes a single vertex with a single loop.
pub fn rgrph_terminal_direct() -> PointedEndofunctor {
    rgrph_quotient("rgrph:terminal", true, EdgeRule::All)
}

/// The eight lassos on reflexive graphs: trivial and the seven kinds.
pub fn rgrph_lassos() -> Vec<Lasso> {
    std::iter::once(lasso_trivial(builtin(Builtin::RGrph)))
        .chain(RGrphKind::ALL.into_iter().map(rgrph_lasso))
        .collect()
}

/// Identifies parallel edges (loops included). Not a lasso: it fails to
/// preserve some pushouts of monic spans.
pub fn smoothing() -> PointedEndofunctor {
    PointedEndofunctor::quotient("smoothing", builtin(Builtin::RGrph), |x| {
        let (s, t) = (generator(x, "s"), generator(x, "t"));
        let mut first = std::collections::HashMap::new();
        (0..x.carrier(1))
            .filter_map(|e| {
                let key = (x.apply(s, e), x.apply(t, e));
                let rep = *first.entry(key).or_insert(e);
                (rep != e).then_some((1, rep, e))
            })
            .collect()
    })
}

/// On `CGr_k`: identifies the endpoints of every edge whose color is selected.
pub fn lasso_color(k: usize, colors: &BTreeSet<usize>) -> Result<Lasso, LassoError> {
    if colors.is_empty() {
        return Err(LassoError::NoColors);
    }
    if let Some(&c) = colors.iter().find(|&&c| c == 0 || c > k) {
        return Err(LassoError::ColorOutOfRange { color: c, k });
    }
    let schema = shared_builtin(Builtin::Colored(k)).map_err(|_| LassoError::NoColors)?;
    let list: Vec<usize> = colors.iter().copied().collect();
    let name = format!(
        "color:{{{}}}",
        list.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    );
    let f = PointedEndofunctor::quotient(name, schema, move |x| {
        list.iter()
            .flat_map(|&c| {
                let (s, t) = (generator(x, &format!("s{c}")), generator(x, &format!("t{c}")));
                endpoint_pairs(x, c, s, t).collect::<Vec<_>>()
            })
            .collect()
    });
    Ok(Lasso::known(f, true))
}

/// Every shipped lasso on `schema`, in a fixed order.
pub fn builtin_lassos(schema: &Arc<Schema>) -> Vec<Lasso> {
    match schema.builtin_name().and_then(|n| n.parse::<Builtin>().ok()) {
        Some(Builtin::Grph) => vec![lasso_trivial(schema.clone()), grph_cc()],
        Some(Builtin::RGrph) => rgrph_lassos(),
        Some(Builtin::Colored(k)) if k <= 4 => {
            let mut out = vec![lasso_trivial(schema.clone())];
            for mask in 1usize..(1 << k) {
                let set = (1..=k).filter(|c| mask >> (c - 1) & 1 == 1).collect();
                out.push(lasso_color(k, &set).expect("colors in range"));
            }
            out
        }
        _ => vec![lasso_trivial(schema.clone())],
    }
}

/// What a command-line name resolves to.
#[derive(Clone, Debug)]
pub enum Named {
    Lasso(Lasso),
    /// A pointed endofunctor kept as a negative fixture.
    Fixture(PointedEndofunctor),
}

impl Named {
    pub fn functor(&self) -> &PointedEndofunctor {
        match self {
            Named::Lasso(l) => l.functor(),
            Named::Fixture(f) => f,
        }
    }

    pub fn into_lasso(self) -> Result<Lasso, LassoError> {
        match self {
            Named::Lasso(l) => Ok(l),
            Named::Fixture(f) => Err(LassoError::NotALasso(f.name().to_string())),
        }
    }
}

/// Resolves a name such as `cc`, `rgrph:deloop`, `color:{1,2}` or a
/// composite `A∘B` (ASCII `A.B`) against `schema`.
pub fn resolve_name(name: &str, schema: &Arc<Schema>) -> Result<Named, LassoError> {
    let name = name.trim();
    // Split on the first top-level composition sign outside braces.
    let mut depth = 0usize;
    for (i, ch) in name.char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => depth = depth.saturating_sub(1),
            '∘' | '.' if depth == 0 => {
                let outer = resolve_name(&name[..i], schema)?;
                let inner = resolve_name(&name[i + ch.len_utf8()..], schema)?;
                return Ok(match (outer, inner) {
                    (Named::Lasso(a), Named::Lasso(b)) => Named::Lasso(compose_lassos(&a, &b)?),
                    (a, b) => Named::Fixture(compose_functors(a.functor(), b.functor())?),
                });
            }
            _ => {}
        }
    }
    let found = match name {
        "trivial" => Named::Lasso(lasso_trivial(schema.clone())),
        "cc" if schema.builtin_name().as_deref() == Some("RGrph") => {
            Named::Lasso(rgrph_lasso(RGrphKind::Cc))
        }
        "cc" => Named::Lasso(grph_cc()),
        "smoothing" => Named::Fixture(smoothing()),
        _ => {
            if let Some(kind) = name.strip_prefix("rgrph:") {
                Named::Lasso(rgrph_lasso(kind.parse()?))
            } else if let Some(set) = name.strip_prefix("color:") {
                let k = match schema.builtin_name().and_then(|n| n.parse::<Builtin>().ok()) {
                    Some(Builtin::Colored(k)) => k,
                    _ => {
                        return Err(LassoError::SchemaMismatch {
                            lasso: name.to_string(),
                            expected: "CGr_k".into(),
                        })
                    }
                };
                let colors = set
                    .trim_start_matches('{')
                    .trim_end_matches('}')
                    .split(',')
                    .filter(|c| !c.trim().is_empty())
                    .map(|c| c.trim().parse::<usize>())
                    .collect::<Result<BTreeSet<_>, _>>()
                    .map_err(|_| LassoError::UnknownName(name.to_string()))?;
                Named::Lasso(lasso_color(k, &colors)?)
            } else {
                return Err(LassoError::UnknownName(name.to_string()));
            }
        }
    };
    if found.functor().schema().as_ref() != schema.as_ref() {
        return Err(LassoError::SchemaMismatch {
            lasso: name.to_string(),
            expected: found
                .functor()
                .schema()
                .builtin_name()
                .unwrap_or_else(|| "a custom schema".into()),
        });
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cset::fixtures::*;
    use crate::cset::{are_isomorphic, Hom};
    use crate::schema::Builtin;

    fn colored(k: usize, n: usize, edges: &[(usize, usize, usize)]) -> Instance {
        let schema = shared_builtin(Builtin::Colored(k)).unwrap();
        let mut carriers = vec![n];
        let mut actions = Vec::new();
        for c in 1..=k {
            let es: Vec<_> = edges.iter().filter(|e| e.0 == c).collect();
            carriers.push(es.len());
            actions.push(es.iter().map(|e| e.1).collect());
            actions.push(es.iter().map(|e| e.2).collect());
        }
        Instance::new(schema, carriers, actions).unwrap()
    }

    #[test]
    fn cc_on_small_graphs() {
        let cc = grph_cc();
        let discrete = graph(2, &[]);
        assert_eq!(cc.on_object(&discrete).carriers(), &[2, 0]);
        assert_eq!(cc.on_object(&graph(2, &[(0, 1)])).carriers(), &[1, 1]);
        assert_eq!(cc.on_object(&graph(3, &[(0, 1), (1, 2)])).carriers(), &[1, 2]);
        // Edges are never merged.
        assert_eq!(cc.eta(&graph(3, &[(0, 1), (2, 1)])).component(1), &[0, 1]);
    }

    #[test]
    fn trivial_is_identity() {
        let t = lasso_trivial(grph());
        let g = graph(2, &[(0, 1), (1, 1)]);
        assert_eq!(t.eta(&g), Hom::identity(&g));
        let tt = compose_lassos(&t, &t).unwrap();
        assert_eq!(tt.eta(&g).components(), Hom::identity(&g).components());
    }

    #[test]
    fn reflexive_fixtures() {
        // One vertex: distinguished loop plus one extra loop.
        let x = rgraph(1, &[(0, 0)]);
        assert_eq!(rgrph_lasso(RGrphKind::Deloop).on_object(&x).carriers(), &[1, 1]);
        // u -> v, u -> w with three distinguished loops: every edge of the
        // component is forced into the class of the single distinguished loop.
        let y = rgraph(3, &[(0, 1), (0, 2)]);
        assert_eq!(rgrph_lasso(RGrphKind::Source).on_object(&y).carriers(), &[1, 1]);
        // u -> v: gather merges the loops and keeps the edge.
        let z = rgraph(2, &[(0, 1)]);
        assert_eq!(rgrph_lasso(RGrphKind::Gather).on_object(&z).carriers(), &[1, 2]);
        assert_eq!(rgrph_lasso(RGrphKind::Cc).on_object(&z).carriers(), &[1, 2]);
        assert_eq!(rgrph_lasso(RGrphKind::DeloopThenCc).on_object(&z).carriers(), &[1, 1]);
        assert_eq!(rgrph_lasso(RGrphKind::CcThenDeloop).on_object(&z).carriers(), &[1, 2]);
    }

    #[test]
    fn terminal_composite_matches_direct_quotient() {
        let term = rgrph_lasso(RGrphKind::DeloopThenCc);
        let direct = rgrph_terminal_direct();
        for x in [rgraph(3, &[(0, 1), (2, 2), (1, 0)]), rgraph(2, &[]), rgraph(1, &[(0, 0)])] {
            assert!(are_isomorphic(&term.on_object(&x), &direct.on_object(&x)));
        }
    }

    #[test]
    fn smoothing_merges_parallel_edges() {
        let x = rgraph(2, &[(0, 1), (0, 1), (0, 0)]);
        assert_eq!(smoothing().on_object(&x).carriers(), &[2, 3]);
    }

    #[test]
    fn color_lassos() {
        let x = colored(2, 3, &[(1, 0, 1), (2, 1, 2)]);
        let one = lasso_color(2, &BTreeSet::from([1])).unwrap();
        assert_eq!(one.on_object(&x).carriers(), &[2, 1, 1]);
        assert_eq!(one.eta(&x).component(0), &[0, 0, 1]);
        assert!(matches!(
            lasso_color(2, &BTreeSet::from([3])),
            Err(LassoError::ColorOutOfRange { color: 3, k: 2 })
        ));
        assert!(matches!(lasso_color(2, &BTreeSet::new()), Err(LassoError::NoColors)));
    }

    #[test]
    fn name_resolution() {
        let g = grph();
        assert_eq!(resolve_name("cc", &g).unwrap().functor().name(), "cc");
        assert_eq!(resolve_name("cc.trivial", &g).unwrap().functor().name(), "cc∘trivial");
        assert_eq!(resolve_name("cc∘cc", &g).unwrap().functor().name(), "cc∘cc");
        let r = rgrph();
        assert_eq!(
            resolve_name("rgrph:terminal", &r).unwrap().functor().name(),
            "rgrph:deloop_then_cc"
        );
        assert!(matches!(resolve_name("smoothing", &r), Ok(Named::Fixture(_))));
        assert!(resolve_name("smoothing", &r).unwrap().into_lasso().is_err());
        assert!(matches!(resolve_name("rgrph:cc", &g), Err(LassoError::SchemaMismatch { .. })));
        assert!(matches!(resolve_name("bogus", &g), Err(LassoError::UnknownName(_))));
        let c3 = shared_builtin(Builtin::Colored(3)).unwrap();
        assert_eq!(resolve_name("color:{1,3}", &c3).unwrap().functor().name(), "color:{1,3}");
        assert_eq!(
            resolve_name("color:{1}.color:{2}", &c3).unwrap().functor().name(),
            "color:{1}∘color:{2}"
        );
    }
}
