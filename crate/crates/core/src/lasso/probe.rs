//! Search for every family of quotients on a finite universe that behaves
//! like a lasso there: natural against every hom between members, and
//! preserving every monic pushout whose result is again a member.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::Serialize;

use super::{builtin_lassos, quotient_by, LassoError, NECESSARY_CONDITION};
use crate::colimits::{colimit, pushout, Span};
use crate::cset::{
    enumerate_homs, enumerate_monos, factor_through_epi, find_isomorphism, is_iso, Hom, Instance,
};
use crate::schema::Schema;
use crate::universe::{Bounds, Universe, UniverseError};

/// A family that survived every constraint, with the shipped lassos whose
/// restriction to the universe it equals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Survivor {
    pub matches: Vec<String>,
    /// Carrier sizes of each member's quotient, in universe order.
    pub quotient_carriers: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub schema: String,
    pub label: &'static str,
    pub bounds: IndexMap<String, usize>,
    pub universe_size: usize,
    pub hom_constraints: usize,
    pub pushout_constraints: usize,
    pub nodes_explored: u64,
    pub survivors: Vec<Survivor>,
}

impl ProbeReport {
    /// Names of matched shipped lassos, one entry per survivor; unmatched
    /// survivors appear as `None`.
    pub fn survivor_names(&self) -> Vec<Option<String>> {
        self.survivors
            .iter()
            .map(|s| s.matches.first().cloned())
            .collect()
    }
}

/// Restricted growth form of a function: classes numbered by first occurrence.
fn rgs(v: &[usize]) -> Vec<usize> {
    let mut seen = IndexMap::new();
    v.iter()
        .map(|x| {
            let next = seen.len();
            *seen.entry(*x).or_insert(next)
        })
        .collect()
}

/// Every set partition of `0..n` in restricted growth form.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let max = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for c in 0..=max {
            prefix.push(c);
            go(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

/// Every quotient map out of `x`, one per congruence.
pub fn congruences(x: &Instance) -> Vec<Hom> {
    let schema = x.schema();
    let per_sort: Vec<Vec<Vec<usize>>> = x.carriers().iter().map(|&n| partitions(n)).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; per_sort.len()];
    loop {
        let labels: Vec<&Vec<usize>> = choice.iter().enumerate().map(|(s, &c)| &per_sort[s][c]).collect();
        let closed = schema.generators().iter().enumerate().all(|(gi, g)| {
            let n = x.carrier(g.dom);
            (0..n).all(|a| {
                (a + 1..n).all(|b| {
                    labels[g.dom][a] != labels[g.dom][b]
                        || labels[g.cod][x.apply(gi, a)] == labels[g.cod][x.apply(gi, b)]
                })
            })
        });
        if closed {
            let pairs: Vec<_> = labels
                .iter()
                .enumerate()
                .flat_map(|(s, l)| {
                    (0..l.len()).filter_map(move |e| {
                        let first = l.iter().position(|&c| c == l[e]).expect("present");
                        (first != e).then_some((s, first, e))
                    })
                })
                .collect();
            out.push(quotient_by(x, &pairs));
        }
        let mut s = 0;
        loop {
            if s == choice.len() {
                return out;
            }
            choice[s] += 1;
            if choice[s] < per_sort[s].len() {
                break;
            }
            choice[s] = 0;
            s += 1;
        }
    }
}

struct HomConstraint {
    from: usize,
    to: usize,
    hom: Hom,
}

struct PushoutConstraint {
    c: usize,
    a: usize,
    b: usize,
    p: usize,
    left: Hom,
    right: Hom,
    /// Pushout legs composed with the iso onto member `p`.
    into_left: Hom,
    into_right: Hom,
}

enum Constraint {
    Hom(HomConstraint),
    Pushout(PushoutConstraint),
}

fn lifted(qs: &[Hom], from: usize, to: usize, h: &Hom) -> Option<Hom> {
    factor_through_epi(&qs[from], &h.then(&qs[to]))
}

impl Constraint {
    fn holds(&self, qs: &[Hom]) -> bool {
        match self {
            Constraint::Hom(h) => lifted(qs, h.from, h.to, &h.hom).is_some(),
            Constraint::Pushout(p) => {
                let lifts = (|| {
                    Some((
                        lifted(qs, p.c, p.a, &p.left)?,
                        lifted(qs, p.c, p.b, &p.right)?,
                        lifted(qs, p.a, p.p, &p.into_left)?,
                        lifted(qs, p.b, p.p, &p.into_right)?,
                    ))
                })();
                let Some((l, r, il, ir)) = lifts else {
                    return false;
                };
                let cocone = colimit(&Span::new(l.clone(), r).expect("shared apex").to_diagram());
                cocone
                    .mediate(qs[p.p].cod(), &[il.clone(), ir, l.then(&il)])
                    .is_some_and(|u| is_iso(&u))
            }
        }
    }

    fn last_index(&self) -> usize {
        match self {
            Constraint::Hom(h) => h.from.max(h.to),
            Constraint::Pushout(p) => p.c.max(p.a).max(p.b).max(p.p),
        }
    }
}

fn bound_error(e: crate::cset::CsetError) -> LassoError {
    LassoError::Universe(UniverseError::BoundExceeded(e.to_string()))
}

/// Enumerates every surviving quotient family on the universe within `bounds`.
pub fn canonicity_probe(schema: &Arc<Schema>, bounds: &Bounds) -> Result<ProbeReport, LassoError> {
    let universe = Universe::get(schema, bounds)?;
    let xs = &universe.instances;
    let n = xs.len();
    let candidates: Vec<Vec<Hom>> = xs.iter().map(congruences).collect();

    let mut buckets: Vec<Vec<Constraint>> = (0..n).map(|_| Vec::new()).collect();
    let (mut hom_count, mut pushout_count) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            for hom in enumerate_homs(&xs[i], &xs[j]).map_err(bound_error)? {
                let c = Constraint::Hom(HomConstraint { from: i, to: j, hom });
                buckets[c.last_index()].push(c);
                hom_count += 1;
            }
        }
    }
    for c in 0..n {
        for a in 0..n {
            let ma = enumerate_monos(&xs[c], &xs[a]).map_err(bound_error)?;
            for b in a..n {
                let mb = enumerate_monos(&xs[c], &xs[b]).map_err(bound_error)?;
                for (i, m1) in ma.iter().enumerate() {
                    let start = if a == b { i } else { 0 };
                    for m2 in &mb[start..] {
                        let po = pushout(&Span::new(m1.clone(), m2.clone()).expect("shared apex"));
                        let Some(p) = universe.position(&po.apex) else {
                            continue;
                        };
                        let iso = find_isomorphism(&po.apex, &xs[p]).expect("member is isomorphic");
                        let con = Constraint::Pushout(PushoutConstraint {
                            c,
                            a,
                            b,
                            p,
                            left: m1.clone(),
                            right: m2.clone(),
                            into_left: po.left.then(&iso),
                            into_right: po.right.then(&iso),
                        });
                        buckets[con.last_index()].push(con);
                        pushout_count += 1;
                    }
                }
            }
        }
    }

    let mut chosen: Vec<Hom> = Vec::with_capacity(n);
    let mut survivors_raw: Vec<Vec<Hom>> = Vec::new();
    let mut explored = 0u64;
    search(0, &candidates, &buckets, &mut chosen, &mut survivors_raw, &mut explored);

    let shipped = builtin_lassos(schema);
    let shipped_kernels: Vec<(String, Vec<Vec<Vec<usize>>>)> = shipped
        .iter()
        .map(|l| {
            let k = xs
                .iter()
                .map(|x| l.eta(x).components().iter().map(|c| rgs(c)).collect())
                .collect();
            (l.name().to_string(), k)
        })
        .collect();
    let survivors = survivors_raw
        .into_iter()
        .map(|qs| {
            let kernel: Vec<Vec<Vec<usize>>> = qs
                .iter()
                .map(|q| q.components().iter().map(|c| rgs(c)).collect())
                .collect();
            Survivor {
                matches: shipped_kernels
                    .iter()
                    .filter(|(_, k)| *k == kernel)
                    .map(|(name, _)| name.clone())
                    .collect(),
                quotient_carriers: qs.iter().map(|q| q.cod().carriers().to_vec()).collect(),
            }
        })
        .collect();
    Ok(ProbeReport {
        schema: schema.builtin_name().unwrap_or_else(|| "custom".into()),
        label: NECESSARY_CONDITION,
        bounds: bounds.named(schema).into_iter().collect(),
        universe_size: n,
        hom_constraints: hom_count,
        pushout_constraints: pushout_count,
        nodes_explored: explored,
        survivors,
    })
}

fn search(
    k: usize,
    candidates: &[Vec<Hom>],
    buckets: &[Vec<Constraint>],
    chosen: &mut Vec<Hom>,
    out: &mut Vec<Vec<Hom>>,
    explored: &mut u64,
) {
    if k == candidates.len() {
        out.push(chosen.clone());
        return;
    }
    for q in &candidates[k] {
        *explored += 1;
        chosen.push(q.clone());
        if buckets[k].iter().all(|c| c.holds(chosen)) {
            search(k + 1, candidates, buckets, chosen, out, explored);
        }
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cset::fixtures::*;

    #[test]
    fn partition_counts_are_bell_numbers() {
        let bell: Vec<usize> = (0..6).map(|n| partitions(n).len()).collect();
        assert_eq!(bell, vec![1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn congruences_of_an_edge() {
        // Vertices split or merged; one edge. Both are congruences.
        assert_eq!(congruences(&graph(2, &[(0, 1)])).len(), 2);
        // Two parallel edges: merging the edges is always allowed.
        assert_eq!(congruences(&graph(2, &[(0, 1), (0, 1)])).len(), 4);
        // Edges 0 -> 1 and 1 -> 0 may merge only when the vertices do.
        assert_eq!(congruences(&graph(2, &[(0, 1), (1, 0)])).len(), 3);
    }

    #[test]
    fn tiny_probe_on_directed_graphs() {
        let g = grph();
        let report = canonicity_probe(&g, &Bounds::graph_like(&g, 2, 1)).unwrap();
        assert_eq!(report.label, NECESSARY_CONDITION);
        assert!(report.survivors.iter().any(|s| s.matches == vec!["trivial".to_string()]));
        assert!(report.survivors.iter().any(|s| s.matches == vec!["cc".to_string()]));
    }
}
