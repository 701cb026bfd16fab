//! Finite copresheaf instances over a schema and their homomorphisms.
//!
//! Every carrier is a dense range `0..n`; an action is stored as the vector of
//! images, so `action(g)[i]` is the image of element `i` under `g`.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use thiserror::Error;

use crate::schema::Schema;

/// Largest carrier the exhaustive hom search accepts by default.
pub const DEFAULT_SEARCH_CARRIER: usize = 16;

/// Largest number of homs `enumerate_homs` will materialise.
pub const MAX_ENUMERATED_HOMS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsetError {
    #[error("schema mismatch")]
    SchemaMismatch,
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("naturality fails at {} square(s), first: {}", .0.len(), .0[0])]
    NotNatural(Vec<NaturalityViolation>),
    #[error("malformed hom: {0}")]
    MalformedHom(String),
    #[error("enumeration bound exceeded: {0}")]
    BoundExceeded(String),
}

/// A non-commuting naturality square, witnessed by a generator and an element
/// of its domain sort in the hom's domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NaturalityViolation {
    pub generator: String,
    pub element: usize,
}

impl fmt::Display for NaturalityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "generator `{}` at element {}", self.generator, self.element)
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct InstanceData {
    schema: Arc<Schema>,
    carriers: Vec<usize>,
    actions: Vec<Vec<usize>>,
}

/// A finite copresheaf. Cheap to clone; immutable.
#[derive(Clone, Eq)]
pub struct Instance {
    inner: Arc<InstanceData>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl std::hash::Hash for Instance {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.hash(state)
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.inner.schema;
        let mut d = f.debug_struct("Instance");
        for (i, n) in self.inner.carriers.iter().enumerate() {
            d.field(s.sort_name(i), n);
        }
        for (g, a) in s.generators().iter().zip(&self.inner.actions) {
            d.field(&g.name, a);
        }
        d.finish()
    }
}

impl Instance {
    /// Builds an instance, checking ranges and every schema equation.
    pub fn new(
        schema: Arc<Schema>,
        carriers: Vec<usize>,
        actions: Vec<Vec<usize>>,
    ) -> Result<Self, CsetError> {
        if carriers.len() != schema.sort_count() {
            return Err(CsetError::InvalidInstance(format!(
                "expected {} carriers, got {}",
                schema.sort_count(),
                carriers.len()
            )));
        }
        if actions.len() != schema.generators().len() {
            return Err(CsetError::InvalidInstance(format!(
                "expected {} actions, got {}",
                schema.generators().len(),
                actions.len()
            )));
        }
        for (g, act) in schema.generators().iter().zip(&actions) {
            if act.len() != carriers[g.dom] {
                return Err(CsetError::InvalidInstance(format!(
                    "action `{}` has {} entries for a carrier of size {}",
                    g.name,
                    act.len(),
                    carriers[g.dom]
                )));
            }
            if let Some(&bad) = act.iter().find(|&&y| y >= carriers[g.cod]) {
                return Err(CsetError::InvalidInstance(format!(
                    "action `{}` maps to {bad}, outside {}",
                    g.name,
                    schema.sort_name(g.cod)
                )));
            }
        }
        let inst = Self::from_parts_unchecked(schema, carriers, actions);
        for (ei, eq) in inst.schema().equations().iter().enumerate() {
            for x in 0..inst.carrier(eq.dom) {
                if inst.apply_path(&eq.lhs, x) != inst.apply_path(&eq.rhs, x) {
                    return Err(CsetError::InvalidInstance(format!(
                        "equation {ei} fails at element {x} of {}",
                        inst.schema().sort_name(eq.dom)
                    )));
                }
            }
        }
        Ok(inst)
    }

    pub(crate) fn from_parts_unchecked(
        schema: Arc<Schema>,
        carriers: Vec<usize>,
        actions: Vec<Vec<usize>>,
    ) -> Self {
        Self {
            inner: Arc::new(InstanceData {
                schema,
                carriers,
                actions,
            }),
        }
    }

    /// The initial (empty) instance.
    pub fn empty(schema: Arc<Schema>) -> Self {
        let n = schema.sort_count();
        let m = schema.generators().len();
        Self::from_parts_unchecked(schema, vec![0; n], vec![Vec::new(); m])
    }

    /// The terminal instance: one element per sort.
    pub fn terminal(schema: Arc<Schema>) -> Self {
        let n = schema.sort_count();
        let m = schema.generators().len();
        Self::from_parts_unchecked(schema, vec![1; n], vec![vec![0]; m])
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.inner.schema
    }

    pub fn carriers(&self) -> &[usize] {
        &self.inner.carriers
    }

    pub fn carrier(&self, sort: usize) -> usize {
        self.inner.carriers[sort]
    }

    pub fn actions(&self) -> &[Vec<usize>] {
        &self.inner.actions
    }

    pub fn action(&self, generator: usize) -> &[usize] {
        &self.inner.actions[generator]
    }

    pub fn apply(&self, generator: usize, x: usize) -> usize {
        self.inner.actions[generator][x]
    }

    /// Applies a path given in application order.
    pub fn apply_path(&self, path: &[usize], x: usize) -> usize {
        path.iter().fold(x, |y, &g| self.apply(g, y))
    }

    pub fn total_size(&self) -> usize {
        self.inner.carriers.iter().sum()
    }

    pub fn same_schema(&self, other: &Instance) -> bool {
        Arc::ptr_eq(self.schema(), other.schema()) || self.schema() == other.schema()
    }

    /// Sort-by-sort renaming of elements: `perms[s][x]` is the new name of `x`.
    pub fn permuted(&self, perms: &[Vec<usize>]) -> Instance {
        let schema = self.schema().clone();
        let mut actions = Vec::with_capacity(self.actions().len());
        for (gi, g) in schema.generators().iter().enumerate() {
            let mut act = vec![0; self.carrier(g.dom)];
            for (x, &y) in self.action(gi).iter().enumerate() {
                act[perms[g.dom][x]] = perms[g.cod][y];
            }
            actions.push(act);
        }
        Instance::from_parts_unchecked(schema, self.carriers().to_vec(), actions)
    }
}

/// A homomorphism of instances, one function per sort.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hom {
    dom: Instance,
    cod: Instance,
    components: Vec<Vec<usize>>,
}

impl fmt::Debug for Hom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hom")
            .field("dom", &self.dom)
            .field("cod", &self.cod)
            .field("components", &self.components)
            .finish()
    }
}

impl Hom {
    /// Builds a hom and checks shape, ranges and naturality.
    pub fn new(dom: Instance, cod: Instance, components: Vec<Vec<usize>>) -> Result<Self, CsetError> {
        let h = Self::from_parts_unchecked(dom, cod, components);
        check_hom(&h)?;
        Ok(h)
    }

    /// Builds a hom without any check; use [`check_hom`] to validate.
    pub fn from_parts_unchecked(dom: Instance, cod: Instance, components: Vec<Vec<usize>>) -> Self {
        Self {
            dom,
            cod,
            components,
        }
    }

    pub fn identity(x: &Instance) -> Self {
        let components = x.carriers().iter().map(|&n| (0..n).collect()).collect();
        Self::from_parts_unchecked(x.clone(), x.clone(), components)
    }

    /// The unique hom out of the empty instance.
    pub fn from_empty(cod: &Instance) -> Self {
        let dom = Instance::empty(cod.schema().clone());
        let n = cod.schema().sort_count();
        Self::from_parts_unchecked(dom, cod.clone(), vec![Vec::new(); n])
    }

    pub fn dom(&self) -> &Instance {
        &self.dom
    }

    pub fn cod(&self) -> &Instance {
        &self.cod
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component(&self, sort: usize) -> &[usize] {
        &self.components[sort]
    }

    pub fn apply(&self, sort: usize, x: usize) -> usize {
        self.components[sort][x]
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Hom) -> Hom {
        debug_assert!(self.cod == next.dom, "composing non-composable homs");
        let components = self
            .components
            .iter()
            .zip(&next.components)
            .map(|(f, g)| f.iter().map(|&y| g[y]).collect())
            .collect();
        Hom::from_parts_unchecked(self.dom.clone(), next.cod.clone(), components)
    }

    /// Same components, re-targeted to an equal codomain (or re-sourced from an equal domain).
    pub(crate) fn with_ends(&self, dom: Instance, cod: Instance) -> Hom {
        Hom::from_parts_unchecked(dom, cod, self.components.clone())
    }
}

/// `g ∘ f`, checking composability.
pub fn compose(g: &Hom, f: &Hom) -> Result<Hom, CsetError> {
    if f.cod != g.dom {
        return Err(CsetError::MalformedHom("codomain and domain differ".into()));
    }
    Ok(f.then(g))
}

/// Verifies shape and every naturality square of `h`.
pub fn check_hom(h: &Hom) -> Result<(), CsetError> {
    let (dom, cod) = (&h.dom, &h.cod);
    if !dom.same_schema(cod) {
        return Err(CsetError::SchemaMismatch);
    }
    let schema = dom.schema();
    if h.components.len() != schema.sort_count() {
        return Err(CsetError::MalformedHom(format!(
            "expected {} components, got {}",
            schema.sort_count(),
            h.components.len()
        )));
    }
    for (s, comp) in h.components.iter().enumerate() {
        if comp.len() != dom.carrier(s) {
            return Err(CsetError::MalformedHom(format!(
                "component `{}` has {} entries for a carrier of size {}",
                schema.sort_name(s),
                comp.len(),
                dom.carrier(s)
            )));
        }
        if comp.iter().any(|&y| y >= cod.carrier(s)) {
            return Err(CsetError::MalformedHom(format!(
                "component `{}` leaves its codomain",
                schema.sort_name(s)
            )));
        }
    }
    let mut violations = Vec::new();
    for (gi, g) in schema.generators().iter().enumerate() {
        for x in 0..dom.carrier(g.dom) {
            if h.components[g.cod][dom.apply(gi, x)] != cod.apply(gi, h.components[g.dom][x]) {
                violations.push(NaturalityViolation {
                    generator: g.name.clone(),
                    element: x,
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CsetError::NotNatural(violations))
    }
}

pub fn is_mono(h: &Hom) -> bool {
    h.components.iter().enumerate().all(|(s, comp)| {
        let mut seen = vec![false; h.cod.carrier(s)];
        comp.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    })
}

pub fn is_epi(h: &Hom) -> bool {
    h.components.iter().enumerate().all(|(s, comp)| {
        let mut seen = vec![false; h.cod.carrier(s)];
        comp.iter().for_each(|&y| seen[y] = true);
        seen.into_iter().all(|b| b)
    })
}

pub fn is_iso(h: &Hom) -> bool {
    h.dom.carriers() == h.cod.carriers() && is_mono(h)
}

/// Whether `a` identifies no more than `b` does: `a(x) = a(y)` implies `b(x) = b(y)`.
/// Both homs must share a domain.
pub fn kernel_refines(a: &Hom, b: &Hom) -> bool {
    a.components.iter().zip(&b.components).enumerate().all(|(s, (ca, cb))| {
        let mut image = vec![usize::MAX; a.cod.carrier(s)];
        ca.iter().zip(cb).all(|(&ya, &yb)| {
            let slot = &mut image[ya];
            if *slot == usize::MAX {
                *slot = yb;
                true
            } else {
                *slot == yb
            }
        })
    })
}

/// The unique `u` with `u ∘ epi = target`, if `epi` is epi and its kernel refines
/// `target`'s. Both homs must share a domain.
pub fn factor_through_epi(epi: &Hom, target: &Hom) -> Option<Hom> {
    let schema = epi.dom.schema();
    let mut components = Vec::with_capacity(schema.sort_count());
    for s in 0..schema.sort_count() {
        let mut comp = vec![usize::MAX; epi.cod.carrier(s)];
        for (x, &y) in epi.components[s].iter().enumerate() {
            let want = target.components[s][x];
            if comp[y] == usize::MAX {
                comp[y] = want;
            } else if comp[y] != want {
                return None;
            }
        }
        if comp.contains(&usize::MAX) {
            return None;
        }
        components.push(comp);
    }
    Some(Hom::from_parts_unchecked(
        epi.cod.clone(),
        target.cod.clone(),
        components,
    ))
}

/// Backtracking search over natural families `dom -> cod`.
///
/// Sorts with fewer outgoing generators are assigned first, and elements in
/// ascending order within a sort; candidate images are tried in ascending
/// order, so families are visited in lexicographic order of that layout.
pub(crate) struct HomSearch<'a> {
    dom: &'a Instance,
    cod: &'a Instance,
    injective: bool,
    order: Vec<(usize, usize)>,
    position: Vec<Vec<usize>>,
    // preimages[g][y]: elements z of dom(g) with g(z) = y in `dom`.
    preimages: Vec<Vec<Vec<usize>>>,
}

impl<'a> HomSearch<'a> {
    pub(crate) fn new(dom: &'a Instance, cod: &'a Instance, injective: bool) -> Self {
        let schema = dom.schema();
        let mut sorts: Vec<usize> = (0..schema.sort_count()).collect();
        sorts.sort_by_key(|&s| (schema.outgoing(s).count(), s));
        let mut order = Vec::new();
        let mut position = vec![Vec::new(); schema.sort_count()];
        for &s in &sorts {
            position[s] = (0..dom.carrier(s)).map(|x| order.len() + x).collect();
            order.extend((0..dom.carrier(s)).map(|x| (s, x)));
        }
        let preimages = schema
            .generators()
            .iter()
            .enumerate()
            .map(|(gi, g)| {
                let mut pre = vec![Vec::new(); dom.carrier(g.cod)];
                for (z, &y) in dom.action(gi).iter().enumerate() {
                    pre[y].push(z);
                }
                pre
            })
            .collect();
        Self {
            dom,
            cod,
            injective,
            order,
            position,
            preimages,
        }
    }

    pub(crate) fn run<F>(&self, mut visit: F)
    where
        F: FnMut(&[Vec<usize>]) -> ControlFlow<()>,
    {
        let schema = self.dom.schema();
        if self.injective
            && (0..schema.sort_count()).any(|s| self.dom.carrier(s) > self.cod.carrier(s))
        {
            return;
        }
        let mut comps: Vec<Vec<usize>> = self
            .dom
            .carriers()
            .iter()
            .map(|&n| vec![usize::MAX; n])
            .collect();
        let mut used: Vec<Vec<bool>> = self
            .cod
            .carriers()
            .iter()
            .map(|&n| vec![false; n])
            .collect();
        let _ = self.step(0, &mut comps, &mut used, &mut visit);
    }

    fn step<F>(
        &self,
        depth: usize,
        comps: &mut [Vec<usize>],
        used: &mut [Vec<bool>],
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[Vec<usize>]) -> ControlFlow<()>,
    {
        if depth == self.order.len() {
            return visit(comps);
        }
        let (sort, x) = self.order[depth];
        let schema = self.dom.schema();
        // An assigned preimage z with g(z) = x forces the image of x.
        let mut forced = None;
        for (gi, g) in schema.generators().iter().enumerate() {
            if g.cod != sort {
                continue;
            }
            for &z in &self.preimages[gi][x] {
                if self.position[g.dom][z] < depth {
                    let want = self.cod.apply(gi, comps[g.dom][z]);
                    match forced {
                        None => forced = Some(want),
                        Some(f) if f != want => return ControlFlow::Continue(()),
                        Some(_) => {}
                    }
                }
            }
        }
        let candidates = match forced {
            Some(y) => y..y + 1,
            None => 0..self.cod.carrier(sort),
        };
        'cand: for y in candidates {
            if self.injective && used[sort][y] {
                continue;
            }
            for gi in schema.outgoing(sort) {
                let g = &schema.generators()[gi];
                let gx = self.dom.apply(gi, x);
                let assigned = self.position[g.cod][gx] < depth
                    || (g.cod == sort && gx == x);
                if assigned {
                    let image = if g.cod == sort && gx == x { y } else { comps[g.cod][gx] };
                    if self.cod.apply(gi, y) != image {
                        continue 'cand;
                    }
                }
            }
            comps[sort][x] = y;
            if self.injective {
                used[sort][y] = true;
            }
            let flow = self.step(depth + 1, comps, used, visit);
            if self.injective {
                used[sort][y] = false;
            }
            comps[sort][x] = usize::MAX;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

fn check_search_bounds(a: &Instance, b: &Instance) -> Result<(), CsetError> {
    if !a.same_schema(b) {
        return Err(CsetError::SchemaMismatch);
    }
    let biggest = a.carriers().iter().chain(b.carriers()).copied().max().unwrap_or(0);
    if biggest > DEFAULT_SEARCH_CARRIER {
        return Err(CsetError::BoundExceeded(format!(
            "carrier of size {biggest} exceeds {DEFAULT_SEARCH_CARRIER}"
        )));
    }
    Ok(())
}

/// Calls `visit` on every hom `a -> b`, in the search's lexicographic order.
pub fn for_each_hom<F>(a: &Instance, b: &Instance, mut visit: F) -> Result<(), CsetError>
where
    F: FnMut(&[Vec<usize>]) -> ControlFlow<()>,
{
    check_search_bounds(a, b)?;
    HomSearch::new(a, b, false).run(|c| visit(c));
    Ok(())
}

/// Every hom `a -> b`, duplicate-free.
pub fn enumerate_homs(a: &Instance, b: &Instance) -> Result<Vec<Hom>, CsetError> {
    let mut out = Vec::new();
    let mut overflow = false;
    for_each_hom(a, b, |c| {
        if out.len() == MAX_ENUMERATED_HOMS {
            overflow = true;
            return ControlFlow::Break(());
        }
        out.push(Hom::from_parts_unchecked(a.clone(), b.clone(), c.to_vec()));
        ControlFlow::Continue(())
    })?;
    if overflow {
        return Err(CsetError::BoundExceeded(format!(
            "more than {MAX_ENUMERATED_HOMS} homs"
        )));
    }
    Ok(out)
}

/// Every monomorphism `a -> b`.
pub fn enumerate_monos(a: &Instance, b: &Instance) -> Result<Vec<Hom>, CsetError> {
    check_search_bounds(a, b)?;
    let mut out = Vec::new();
    HomSearch::new(a, b, true).run(|c| {
        out.push(Hom::from_parts_unchecked(a.clone(), b.clone(), c.to_vec()));
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// The first isomorphism `a -> b` in search order, if any.
pub fn find_isomorphism(a: &Instance, b: &Instance) -> Option<Hom> {
    if !a.same_schema(b) || a.carriers() != b.carriers() {
        return None;
    }
    let mut found = None;
    HomSearch::new(a, b, true).run(|c| {
        found = Some(Hom::from_parts_unchecked(a.clone(), b.clone(), c.to_vec()));
        ControlFlow::Break(())
    });
    found
}

pub fn are_isomorphic(a: &Instance, b: &Instance) -> bool {
    find_isomorphism(a, b).is_some()
}

/// All automorphisms of `a`.
pub fn automorphisms(a: &Instance) -> Vec<Hom> {
    let mut out = Vec::new();
    HomSearch::new(a, a, true).run(|c| {
        out.push(Hom::from_parts_unchecked(a.clone(), a.clone(), c.to_vec()));
        ControlFlow::Continue(())
    });
    out
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub use crate::fixtures::{graph, grph, rgraph, rgrph};
}
