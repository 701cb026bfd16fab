//! Exhaustive enumeration of small instances up to isomorphism, and of the
//! subobjects of an instance.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::cset::{are_isomorphic, Hom, Instance};
use crate::schema::Schema;

/// Largest number of raw action tables examined while building a universe.
pub const MAX_RAW_CANDIDATES: u64 = 20_000_000;

/// Largest instance whose subobjects may be enumerated exhaustively.
pub const MAX_SUBOBJECT_ELEMENTS: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UniverseError {
    #[error("expected {expected} per-sort bounds, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("enumeration bound exceeded: {0}")]
    BoundExceeded(String),
}

/// Per-sort carrier ceilings for universe enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Bounds {
    pub max: Vec<usize>,
}

impl Bounds {
    pub fn new(max: Vec<usize>) -> Self {
        Self { max }
    }

    /// The first sort gets `max_vertices`, every other sort `max_edges`.
    pub fn graph_like(schema: &Schema, max_vertices: usize, max_edges: usize) -> Self {
        let max = (0..schema.sort_count())
            .map(|s| if s == 0 { max_vertices } else { max_edges })
            .collect();
        Self { max }
    }

    /// Named view, for reports.
    pub fn named(&self, schema: &Schema) -> Vec<(String, usize)> {
        self.max
            .iter()
            .enumerate()
            .map(|(s, &m)| (schema.sort_name(s).to_string(), m))
            .collect()
    }
}

/// All instances within some bounds, one per isomorphism class, in
/// enumeration order (by carrier sizes, then by action tables).
#[derive(Debug, Clone)]
pub struct Universe {
    pub schema: Arc<Schema>,
    pub bounds: Bounds,
    pub instances: Vec<Instance>,
}

type CacheKey = (Schema, Bounds);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<Universe>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Universe>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Universe {
    /// Enumerates (or fetches from the process-wide cache) a universe.
    pub fn get(schema: &Arc<Schema>, bounds: &Bounds) -> Result<Arc<Universe>, UniverseError> {
        let key = (schema.as_ref().clone(), bounds.clone());
        if let Some(u) = cache().lock().expect("universe cache poisoned").get(&key) {
            return Ok(u.clone());
        }
        let u = Arc::new(Self::enumerate(schema, bounds)?);
        cache()
            .lock()
            .expect("universe cache poisoned")
            .insert(key, u.clone());
        Ok(u)
    }

    pub fn enumerate(schema: &Arc<Schema>, bounds: &Bounds) -> Result<Universe, UniverseError> {
        let sorts = schema.sort_count();
        if bounds.max.len() != sorts {
            return Err(UniverseError::Arity {
                expected: sorts,
                got: bounds.max.len(),
            });
        }
        let raw = raw_candidate_count(schema, bounds);
        if raw > MAX_RAW_CANDIDATES {
            return Err(UniverseError::BoundExceeded(format!(
                "{raw} raw candidates exceed {MAX_RAW_CANDIDATES}"
            )));
        }
        // Sorts nothing maps into: their elements can be permuted freely, so
        // only nondecreasing rows of outgoing images need to be generated.
        let free: Vec<bool> = (0..sorts)
            .map(|s| schema.generators().iter().all(|g| g.cod != s))
            .collect();
        let mut buckets: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        let mut instances: Vec<Instance> = Vec::new();
        let mut carriers = vec![0; sorts];
        loop {
            enumerate_actions(schema, &carriers, &free, &mut |inst| {
                let key = invariant(&inst);
                let bucket = buckets.entry(key).or_default();
                if !bucket.iter().any(|&i| are_isomorphic(&instances[i], &inst)) {
                    bucket.push(instances.len());
                    instances.push(inst);
                }
            });
            if !advance(&mut carriers, &bounds.max) {
                break;
            }
        }
        Ok(Universe {
            schema: schema.clone(),
            bounds: bounds.clone(),
            instances,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Index of the member isomorphic to `x`, if any.
    pub fn position(&self, x: &Instance) -> Option<usize> {
        self.instances.iter().position(|u| are_isomorphic(u, x))
    }
}

fn advance(counter: &mut [usize], max: &[usize]) -> bool {
    for (c, &m) in counter.iter_mut().zip(max) {
        if *c < m {
            *c += 1;
            return true;
        }
        *c = 0;
    }
    false
}

fn raw_candidate_count(schema: &Schema, bounds: &Bounds) -> u64 {
    let mut total = 0u64;
    let mut carriers = vec![0; schema.sort_count()];
    loop {
        let mut n = 1u64;
        for g in schema.generators() {
            let (d, c) = (carriers[g.dom] as u32, carriers[g.cod] as u64);
            n = n.saturating_mul(c.saturating_pow(d));
        }
        total = total.saturating_add(n);
        if !advance(&mut carriers, &bounds.max) {
            return total;
        }
    }
}

fn enumerate_actions(
    schema: &Arc<Schema>,
    carriers: &[usize],
    free: &[bool],
    emit: &mut dyn FnMut(Instance),
) {
    let gens = schema.generators();
    // Slots are (generator, element); a missing codomain kills the table.
    if gens.iter().any(|g| carriers[g.dom] > 0 && carriers[g.cod] == 0) {
        return;
    }
    let mut actions: Vec<Vec<usize>> = gens.iter().map(|g| vec![0; carriers[g.dom]]).collect();
    let slots: Vec<(usize, usize)> = gens
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| (0..carriers[g.dom]).map(move |x| (gi, x)))
        .collect();
    loop {
        if rows_sorted(schema, carriers, free, &actions) {
            let inst =
                Instance::from_parts_unchecked(schema.clone(), carriers.to_vec(), actions.clone());
            if satisfies_equations(&inst) {
                emit(inst);
            }
        }
        let mut carried = true;
        for &(gi, x) in &slots {
            let cod = carriers[gens[gi].cod];
            if actions[gi][x] + 1 < cod {
                actions[gi][x] += 1;
                carried = false;
                break;
            }
            actions[gi][x] = 0;
        }
        if carried {
            return;
        }
    }
}

fn rows_sorted(schema: &Schema, carriers: &[usize], free: &[bool], actions: &[Vec<usize>]) -> bool {
    (0..schema.sort_count()).filter(|&s| free[s]).all(|s| {
        let out: Vec<usize> = schema.outgoing(s).collect();
        (1..carriers[s]).all(|x| {
            let row = |y: usize| out.iter().map(move |&g| actions[g][y]);
            row(x - 1).le(row(x))
        })
    })
}

fn satisfies_equations(inst: &Instance) -> bool {
    inst.schema().equations().iter().all(|eq| {
        (0..inst.carrier(eq.dom)).all(|x| inst.apply_path(&eq.lhs, x) == inst.apply_path(&eq.rhs, x))
    })
}

/// An isomorphism invariant: carriers plus sorted fiber sizes per generator.
fn invariant(inst: &Instance) -> Vec<usize> {
    let mut key = inst.carriers().to_vec();
    for (gi, g) in inst.schema().generators().iter().enumerate() {
        let mut fibers = vec![0; inst.carrier(g.cod)];
        inst.action(gi).iter().for_each(|&y| fibers[y] += 1);
        fibers.sort_unstable();
        key.push(usize::MAX);
        key.extend(fibers);
    }
    key
}

/// The inclusion of the sub-instance on the marked elements, or `None` if the
/// marked set is not closed under the actions.
pub fn subobject(y: &Instance, keep: &[Vec<bool>]) -> Option<Hom> {
    let schema = y.schema().clone();
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(schema.sort_count());
    let mut position: Vec<Vec<usize>> = Vec::with_capacity(schema.sort_count());
    for k in keep {
        let mut pos = vec![usize::MAX; k.len()];
        let mut mem = Vec::new();
        for (x, _) in k.iter().enumerate().filter(|(_, &b)| b) {
            pos[x] = mem.len();
            mem.push(x);
        }
        members.push(mem);
        position.push(pos);
    }
    let mut actions = Vec::with_capacity(schema.generators().len());
    for (gi, g) in schema.generators().iter().enumerate() {
        let mut act = Vec::with_capacity(members[g.dom].len());
        for &x in &members[g.dom] {
            let p = position[g.cod][y.apply(gi, x)];
            if p == usize::MAX {
                return None;
            }
            act.push(p);
        }
        actions.push(act);
    }
    let carriers = members.iter().map(Vec::len).collect();
    let sub = Instance::from_parts_unchecked(schema, carriers, actions);
    Some(Hom::from_parts_unchecked(sub, y.clone(), members))
}

/// Every subobject of `y` as an inclusion, starting from the empty one.
pub fn enumerate_subobjects(y: &Instance) -> Result<Vec<Hom>, UniverseError> {
    let total = y.total_size();
    if total > MAX_SUBOBJECT_ELEMENTS {
        return Err(UniverseError::BoundExceeded(format!(
            "{total} elements exceed {MAX_SUBOBJECT_ELEMENTS}"
        )));
    }
    let elements: Vec<(usize, usize)> = (0..y.schema().sort_count())
        .flat_map(|s| (0..y.carrier(s)).map(move |x| (s, x)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << total) {
        let mut keep: Vec<Vec<bool>> = y.carriers().iter().map(|&n| vec![false; n]).collect();
        for (bit, &(s, x)) in elements.iter().enumerate() {
            keep[s][x] = mask >> bit & 1 == 1;
        }
        if let Some(h) = subobject(y, &keep) {
            out.push(h);
        }
    }
    Ok(out)
}

/// Smallest sub-instance containing the marked elements.
pub fn closure(y: &Instance, keep: &mut [Vec<bool>]) {
    let schema = y.schema();
    let mut changed = true;
    while changed {
        changed = false;
        for (gi, g) in schema.generators().iter().enumerate() {
            for x in 0..y.carrier(g.dom) {
                if keep[g.dom][x] {
                    let gx = y.apply(gi, x);
                    if !keep[g.cod][gx] {
                        keep[g.cod][gx] = true;
                        changed = true;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cset::fixtures::*;
    use crate::cset::{check_hom, is_mono};
    use crate::schema::Builtin;

    #[test]
    fn small_graph_universes() {
        // Oracle counts of directed multigraphs up to iso, by (vertices, edges).
        let g = grph();
        let u = Universe::enumerate(&g, &Bounds::graph_like(&g, 1, 2)).unwrap();
        // (0,0), (1,0), (1,1), (1,2).
        assert_eq!(u.len(), 4);
        let u = Universe::enumerate(&g, &Bounds::graph_like(&g, 2, 1)).unwrap();
        // 0v; 1v: 0e,1e; 2v: 0e, edge, loop.
        assert_eq!(u.len(), 6);
        let u = Universe::enumerate(&g, &Bounds::graph_like(&g, 2, 2)).unwrap();
        assert_eq!(u.len(), 13);
    }

    #[test]
    fn universe_members_are_pairwise_non_isomorphic() {
        let g = grph();
        let u = Universe::enumerate(&g, &Bounds::graph_like(&g, 3, 2)).unwrap();
        for (i, a) in u.instances.iter().enumerate() {
            for b in &u.instances[i + 1..] {
                assert!(!are_isomorphic(a, b));
            }
        }
    }

    #[test]
    fn reflexive_universe_respects_equations() {
        let r = rgrph();
        let u = Universe::enumerate(&r, &Bounds::graph_like(&r, 2, 3)).unwrap();
        // 0v; 1v with 1,2,3 loops; 2v with 2 loops, +1 edge (one iso class),
        // and +1 loop (one class), so 1 + 3 + 3.
        assert_eq!(u.len(), 7);
        for x in &u.instances {
            assert!(Instance::new(r.clone(), x.carriers().to_vec(), x.actions().to_vec()).is_ok());
        }
    }

    #[test]
    fn colored_universe_counts() {
        let c = Arc::new(Builtin::Colored(1).schema().unwrap());
        let u = Universe::enumerate(&c, &Bounds::graph_like(&c, 2, 1)).unwrap();
        assert_eq!(u.len(), 6);
    }

    #[test]
    fn subobjects_of_an_edge() {
        let e = graph(2, &[(0, 1)]);
        let subs = enumerate_subobjects(&e).unwrap();
        // {}, {a}, {b}, {a,b}, {a,b,e}.
        assert_eq!(subs.len(), 5);
        assert_eq!(subs[0].dom().total_size(), 0);
        for s in &subs {
            assert!(is_mono(s));
            assert_eq!(check_hom(s), Ok(()));
        }
    }

    #[test]
    fn closure_adds_endpoints() {
        let e = graph(3, &[(0, 2)]);
        let mut keep = vec![vec![false; 3], vec![true]];
        closure(&e, &mut keep);
        assert_eq!(keep[0], vec![true, false, true]);
    }
}
