//! Exhaustive axiom checks over a finite universe. Passing is a necessary
//! condition only: the universe is bounded.

use std::ops::ControlFlow;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use super::{Lasso, LassoError, PointedEndofunctor};
use crate::colimits::{colimit, coequalizer, pushout, FiniteDiagram, DiagramArrow, Span};
use crate::cset::{enumerate_monos, for_each_hom, is_epi, is_iso, Hom, Instance};
use crate::io::{hom_doc, instance_doc, HomDoc, InstanceDoc};
use crate::universe::{Bounds, Universe, UniverseError};

/// Label carried by every bounded report.
pub const NECESSARY_CONDITION: &str = "necessary-condition";

/// Witnesses kept per section; failures beyond this are only counted.
pub const MAX_WITNESSES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    NotEpi {
        instance: InstanceDoc,
    },
    NotNatural {
        hom: HomDoc,
    },
    PushoutNotPreserved {
        left: HomDoc,
        right: HomDoc,
        pushout_of_images: InstanceDoc,
        image_of_pushout: InstanceDoc,
    },
    CoequalizerNotPreserved {
        first: HomDoc,
        second: HomDoc,
        coequalizer_of_images: InstanceDoc,
        image_of_coequalizer: InstanceDoc,
    },
    InitialNotPreserved {
        image: InstanceDoc,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Section {
    pub checked: u64,
    pub failures: u64,
    pub witnesses: Vec<Witness>,
}

impl Section {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn absorb(&mut self, other: Section) {
        self.checked += other.checked;
        self.failures += other.failures;
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses.extend(other.witnesses.into_iter().take(room));
    }

    fn record(&mut self, failure: Option<Witness>) {
        self.checked += 1;
        if let Some(w) = failure {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub functor: String,
    pub schema: String,
    pub label: &'static str,
    pub bounds: IndexMap<String, usize>,
    pub universe_size: usize,
    pub l2_epi: Section,
    pub naturality: Section,
    pub l1: Section,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong: Option<Section>,
}

impl AxiomReport {
    /// Unit epi, unit natural, and monic pushouts preserved.
    pub fn lasso_axioms_hold(&self) -> bool {
        self.l2_epi.passed() && self.naturality.passed() && self.l1.passed()
    }

    /// Every section present passed.
    pub fn passed(&self) -> bool {
        self.lasso_axioms_hold() && self.strong.as_ref().is_none_or(Section::passed)
    }
}

fn bound_error(e: crate::cset::CsetError) -> LassoError {
    LassoError::Universe(UniverseError::BoundExceeded(e.to_string()))
}

struct Prepared<'a> {
    f: &'a PointedEndofunctor,
    universe: std::sync::Arc<Universe>,
    etas: Vec<Hom>,
    /// monos[c][a]: every mono from member c into member a.
    monos: Vec<Vec<Vec<Hom>>>,
}

impl<'a> Prepared<'a> {
    fn new(f: &'a PointedEndofunctor, bounds: &Bounds) -> Result<Self, LassoError> {
        let universe = Universe::get(f.schema(), bounds)?;
        let xs = &universe.instances;
        let etas: Vec<Hom> = xs.par_iter().map(|x| f.eta(x)).collect();
        let monos = xs
            .par_iter()
            .map(|c| {
                xs.iter()
                    .map(|a| enumerate_monos(c, a))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(bound_error)?;
        Ok(Self {
            f,
            universe,
            etas,
            monos,
        })
    }

    fn n(&self) -> usize {
        self.universe.instances.len()
    }

    fn l2(&self) -> Section {
        let mut s = Section::default();
        for (x, eta) in self.universe.instances.iter().zip(&self.etas) {
            let ok = is_epi(eta) && eta.dom() == x;
            s.record((!ok).then(|| Witness::NotEpi {
                instance: instance_doc(x),
            }));
        }
        s
    }

    fn naturality(&self) -> Result<Section, LassoError> {
        let n = self.n();
        let xs = &self.universe.instances;
        let parts = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let (ea, eb) = (&self.etas[i], &self.etas[j]);
                let mut s = Section::default();
                for_each_hom(&xs[i], &xs[j], |c| {
                    let ok = factors(ea, eb, c);
                    s.record((!ok).then(|| Witness::NotNatural {
                        hom: hom_doc(&Hom::from_parts_unchecked(
                            xs[i].clone(),
                            xs[j].clone(),
                            c.to_vec(),
                        )),
                    }));
                    ControlFlow::Continue(())
                })
                .map(|_| s)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(bound_error)?;
        Ok(merge(parts))
    }

    fn l1(&self) -> Section {
        let n = self.n();
        let items: Vec<(usize, usize, usize)> = (0..n)
            .flat_map(|c| (0..n).flat_map(move |a| (a..n).map(move |b| (c, a, b))))
            .collect();
        let parts = items
            .par_iter()
            .map(|&(c, a, b)| {
                let mut s = Section::default();
                let (la, lb) = (&self.monos[c][a], &self.monos[c][b]);
                for (i, m1) in la.iter().enumerate() {
                    let start = if a == b { i } else { 0 };
                    for m2 in &lb[start..] {
                        s.record(self.span_failure(c, a, b, m1, m2));
                    }
                }
                s
            })
            .collect();
        merge(parts)
    }

    fn span_failure(&self, c: usize, a: usize, b: usize, m1: &Hom, m2: &Hom) -> Option<Witness> {
        let f = self.f;
        let (ec, ea, eb) = (&self.etas[c], &self.etas[a], &self.etas[b]);
        let p = pushout(&Span::new(m1.clone(), m2.clone()).expect("shared apex"));
        let ep = f.eta(&p.apex);
        let natural = (|| {
            Some((
                f.on_hom_with(ec, ea, m1).ok()?,
                f.on_hom_with(ec, eb, m2).ok()?,
                f.on_hom_with(ea, &ep, &p.left).ok()?,
                f.on_hom_with(eb, &ep, &p.right).ok()?,
            ))
        })();
        let Some((lm1, lm2, lia, lib)) = natural else {
            return Some(Witness::NotNatural { hom: hom_doc(m1) });
        };
        let image_span = Span::new(lm1.clone(), lm2).expect("shared apex");
        let cocone = colimit(&image_span.to_diagram());
        let apex_legs = [lia.clone(), lib, lm1.then(&lia)];
        let preserved = cocone
            .mediate(ep.cod(), &apex_legs)
            .is_some_and(|u| is_iso(&u));
        (!preserved).then(|| Witness::PushoutNotPreserved {
            left: hom_doc(m1),
            right: hom_doc(m2),
            pushout_of_images: instance_doc(&cocone.apex),
            image_of_pushout: instance_doc(ep.cod()),
        })
    }

    fn strong(&self) -> Section {
        let n = self.n();
        let f = self.f;
        let mut s = Section::default();
        let empty = Instance::empty(f.schema().clone());
        let image = f.on_object(&empty);
        s.record((image.total_size() != 0).then(|| Witness::InitialNotPreserved {
            image: instance_doc(&image),
        }));
        let parts = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (c, a) = (k / n, k % n);
                let mut s = Section::default();
                let monos = &self.monos[c][a];
                for (i, m1) in monos.iter().enumerate() {
                    for m2 in &monos[i + 1..] {
                        s.record(self.coequalizer_failure(c, a, m1, m2));
                    }
                }
                s
            })
            .collect();
        s.absorb(merge(parts));
        s
    }

    fn coequalizer_failure(&self, c: usize, a: usize, m1: &Hom, m2: &Hom) -> Option<Witness> {
        let f = self.f;
        let (ec, ea) = (&self.etas[c], &self.etas[a]);
        let (q, leg) = coequalizer(m1, m2).expect("parallel pair");
        let eq = f.eta(&q);
        let natural = (|| {
            Some((
                f.on_hom_with(ec, ea, m1).ok()?,
                f.on_hom_with(ec, ea, m2).ok()?,
                f.on_hom_with(ea, &eq, &leg).ok()?,
            ))
        })();
        let Some((l1, l2, lq)) = natural else {
            return Some(Witness::NotNatural { hom: hom_doc(m1) });
        };
        let diagram = FiniteDiagram::new(
            f.schema().clone(),
            vec![l1.cod().clone(), l1.dom().clone()],
            vec![
                DiagramArrow { src: 1, dst: 0, hom: l1.clone() },
                DiagramArrow { src: 1, dst: 0, hom: l2 },
            ],
        )
        .expect("parallel pair diagram");
        let cocone = colimit(&diagram);
        let preserved = cocone
            .mediate(eq.cod(), &[lq.clone(), l1.then(&lq)])
            .is_some_and(|u| is_iso(&u));
        (!preserved).then(|| Witness::CoequalizerNotPreserved {
            first: hom_doc(m1),
            second: hom_doc(m2),
            coequalizer_of_images: instance_doc(&cocone.apex),
            image_of_coequalizer: instance_doc(eq.cod()),
        })
    }

    fn report(&self, strong: bool) -> Result<AxiomReport, LassoError> {
        let schema = self.universe.schema.clone();
        Ok(AxiomReport {
            functor: self.f.name().to_string(),
            schema: schema.builtin_name().unwrap_or_else(|| "custom".into()),
            label: NECESSARY_CONDITION,
            bounds: self.universe.bounds.named(&schema).into_iter().collect(),
            universe_size: self.n(),
            l2_epi: self.l2(),
            naturality: self.naturality()?,
            l1: self.l1(),
            strong: strong.then(|| self.strong()),
        })
    }
}

/// Whether `η_B ∘ f` factors through `η_A`, with `f` given by components.
fn factors(ea: &Hom, eb: &Hom, f: &[Vec<usize>]) -> bool {
    f.iter().enumerate().all(|(s, comp)| {
        let mut table = vec![usize::MAX; ea.cod().carrier(s)];
        comp.iter().enumerate().all(|(x, &y)| {
            let (k, v) = (ea.apply(s, x), eb.apply(s, y));
            let slot = &mut table[k];
            if *slot == usize::MAX {
                *slot = v;
            }
            *slot == v
        })
    })
}

fn merge(parts: Vec<Section>) -> Section {
    let mut s = Section::default();
    for p in parts {
        s.absorb(p);
    }
    s
}

/// Checks the unit is epi and natural, and that monic pushouts are preserved,
/// over every instance within `bounds`.
pub fn check_lasso_axioms(
    f: &PointedEndofunctor,
    bounds: &Bounds,
) -> Result<AxiomReport, LassoError> {
    Prepared::new(f, bounds)?.report(false)
}

/// As [`check_lasso_axioms`], plus preservation of the initial object and of
/// coequalizers of parallel monos.
pub fn check_strong(f: &PointedEndofunctor, bounds: &Bounds) -> Result<AxiomReport, LassoError> {
    Prepared::new(f, bounds)?.report(true)
}

/// A family `ΛA -> Λ'A` over a universe, commuting with the units.
#[derive(Debug, Clone)]
pub struct LassoMorphism {
    pub from: String,
    pub to: String,
    pub universe: std::sync::Arc<Universe>,
    pub components: Vec<Hom>,
}

#[derive(Debug, Clone)]
pub enum MorphismSearch {
    Exists(LassoMorphism),
    /// `to` identifies less than `from` on this instance.
    Absent { witness: Instance },
}

impl MorphismSearch {
    pub fn exists(&self) -> bool {
        matches!(self, MorphismSearch::Exists(_))
    }
}

/// Factors `to`'s unit through `from`'s on every universe member.
pub fn lasso_morphism_exists(
    from: &Lasso,
    to: &Lasso,
    bounds: &Bounds,
) -> Result<MorphismSearch, LassoError> {
    if from.schema().as_ref() != to.schema().as_ref() {
        return Err(LassoError::SchemaMismatch {
            lasso: to.name().to_string(),
            expected: from.schema().builtin_name().unwrap_or_else(|| "a custom schema".into()),
        });
    }
    let universe = Universe::get(from.schema(), bounds)?;
    let mut components = Vec::with_capacity(universe.len());
    for x in &universe.instances {
        match crate::cset::factor_through_epi(&from.eta(x), &to.eta(x)) {
            Some(u) => components.push(u),
            None => return Ok(MorphismSearch::Absent { witness: x.clone() }),
        }
    }
    Ok(MorphismSearch::Exists(LassoMorphism {
        from: from.name().to_string(),
        to: to.name().to_string(),
        universe,
        components,
    }))
}

/// `matrix[i][j]`: whether a morphism `lassos[i] -> lassos[j]` exists.
pub fn morphism_matrix(lassos: &[Lasso], bounds: &Bounds) -> Result<Vec<Vec<bool>>, LassoError> {
    lassos
        .iter()
        .map(|a| {
            lassos
                .iter()
                .map(|b| lasso_morphism_exists(a, b, bounds).map(|m| m.exists()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::cset::fixtures::*;
    use crate::cset::is_epi;

    fn small(schema: &std::sync::Arc<crate::schema::Schema>, v: usize, e: usize) -> Bounds {
        Bounds::graph_like(schema, v, e)
    }

    #[test]
    fn trivial_and_cc_pass_on_small_graphs() {
        let g = grph();
        for l in [lasso_trivial(g.clone()), grph_cc()] {
            let r = check_strong(l.functor(), &small(&g, 2, 2)).unwrap();
            assert!(r.passed(), "{} failed: {r:?}", l.name());
            assert_eq!(r.label, NECESSARY_CONDITION);
            assert!(r.l1.checked > 0 && r.naturality.checked > 0);
        }
    }

    #[test]
    fn smoothing_breaks_a_monic_pushout() {
        let r = rgrph();
        let report = check_lasso_axioms(&smoothing(), &small(&r, 2, 3)).unwrap();
        assert!(report.l2_epi.passed());
        assert!(report.naturality.passed());
        assert!(!report.l1.passed());
        assert!(matches!(report.l1.witnesses[0], Witness::PushoutNotPreserved { .. }));
    }

    #[test]
    fn deloop_is_a_lasso_but_not_strong() {
        let r = rgrph();
        let report = check_strong(rgrph_lasso(RGrphKind::Deloop).functor(), &small(&r, 2, 3)).unwrap();
        assert!(report.lasso_axioms_hold());
        let strong = report.strong.unwrap();
        assert!(!strong.passed());
        assert!(strong
            .witnesses
            .iter()
            .any(|w| matches!(w, Witness::CoequalizerNotPreserved { .. })));
    }

    #[test]
    fn morphisms_from_trivial_and_into_terminal() {
        let r = rgrph();
        let b = small(&r, 2, 3);
        let lassos = rgrph_lassos();
        let m = morphism_matrix(&lassos, &b).unwrap();
        for j in 0..lassos.len() {
            assert!(m[0][j], "trivial -> {}", lassos[j].name());
            assert!(m[j][lassos.len() - 1], "{} -> terminal", lassos[j].name());
        }
        match lasso_morphism_exists(&lassos[1], &lassos[0], &b).unwrap() {
            MorphismSearch::Absent { witness } => assert!(witness.total_size() > 0),
            MorphismSearch::Exists(_) => panic!("cc does not map to trivial"),
        }
        if let MorphismSearch::Exists(m) = lasso_morphism_exists(&lassos[0], &lassos[1], &b).unwrap() {
            assert!(m.components.iter().all(is_epi));
        }
    }

    #[test]
    fn grph_lassos_map_to_cc() {
        let g = grph();
        let b = small(&g, 3, 2);
        let t = lasso_trivial(g.clone());
        assert!(lasso_morphism_exists(&t, &grph_cc(), &b).unwrap().exists());
        assert!(lasso_morphism_exists(&grph_cc(), &grph_cc(), &b).unwrap().exists());
        assert!(!lasso_morphism_exists(&grph_cc(), &t, &b).unwrap().exists());
    }
}
