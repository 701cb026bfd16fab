//! Pointed endofunctors given as quotients, lassos, and their composition.
//!
//! Every shipped functor sends an instance to a quotient of itself: a rule
//! proposes pairs of elements to identify, the pairs are closed to a
//! congruence, and the unit is the quotient map. The action on homs is the
//! unique map making the unit natural, when it exists.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::colimits::UnionFind;
use crate::cset::{factor_through_epi, Hom, Instance};
use crate::schema::Schema;
use crate::universe::UniverseError;

mod builtin;
mod check;
mod probe;

pub use builtin::*;
pub use check::*;
pub use probe::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LassoError {
    #[error("schema mismatch: `{lasso}` is defined on {expected}")]
    SchemaMismatch { lasso: String, expected: String },
    #[error("unknown lasso `{0}`")]
    UnknownName(String),
    #[error("unknown reflexive-graph lasso kind `{0}`")]
    UnknownKind(String),
    #[error("color {color} outside 1..={k}")]
    ColorOutOfRange { color: usize, k: usize },
    #[error("empty color set")]
    NoColors,
    #[error("`{0}` is a pointed endofunctor that fails the lasso axioms")]
    NotALasso(String),
    #[error("`{functor}` has no natural action on a hom: its unit identifies more on the domain than the codomain allows")]
    NotNatural { functor: String },
    #[error("axiom check failed for `{0}`")]
    AxiomsFailed(String),
    #[error(transparent)]
    Universe(#[from] UniverseError),
}

/// A triple `(sort, a, b)` asking for `a` and `b` to be identified.
pub type Pair = (usize, usize, usize);

/// The generating identifications of a quotient functor.
pub type PairRule = Arc<dyn Fn(&Instance) -> Vec<Pair> + Send + Sync>;

#[derive(Clone)]
enum Action {
    Quotient(PairRule),
    Composite {
        outer: Box<PointedEndofunctor>,
        inner: Box<PointedEndofunctor>,
    },
}

/// An endofunctor with a unit `η: id => Λ` whose components are quotient maps.
#[derive(Clone)]
pub struct PointedEndofunctor {
    name: String,
    schema: Arc<Schema>,
    action: Action,
}

impl fmt::Debug for PointedEndofunctor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointedEndofunctor").field("name", &self.name).finish()
    }
}

impl PointedEndofunctor {
    /// The quotient by the congruence generated by `rule`.
    pub fn quotient<F>(name: impl Into<String>, schema: Arc<Schema>, rule: F) -> Self
    where
        F: Fn(&Instance) -> Vec<Pair> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            schema,
            action: Action::Quotient(Arc::new(rule)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    /// The unit component `η_X: X -> ΛX`.
    pub fn eta(&self, x: &Instance) -> Hom {
        match &self.action {
            Action::Quotient(rule) => quotient_by(x, &rule(x)),
            Action::Composite { outer, inner } => {
                let first = inner.eta(x);
                let second = outer.eta(first.cod());
                first.then(&second)
            }
        }
    }

    pub fn on_object(&self, x: &Instance) -> Instance {
        self.eta(x).cod().clone()
    }

    /// `Λf`: the unique `u` with `u ∘ η_A = η_B ∘ f`.
    pub fn on_hom(&self, f: &Hom) -> Result<Hom, LassoError> {
        let ea = self.eta(f.dom());
        let eb = self.eta(f.cod());
        self.on_hom_with(&ea, &eb, f)
    }

    /// `Λf` from precomputed units of its endpoints.
    pub fn on_hom_with(&self, eta_dom: &Hom, eta_cod: &Hom, f: &Hom) -> Result<Hom, LassoError> {
        factor_through_epi(eta_dom, &f.then(eta_cod)).ok_or_else(|| LassoError::NotNatural {
            functor: self.name.clone(),
        })
    }

    fn ensure_schema(&self, x: &Instance) -> Result<(), LassoError> {
        if x.schema().as_ref() == self.schema.as_ref() {
            Ok(())
        } else {
            Err(LassoError::SchemaMismatch {
                lasso: self.name.clone(),
                expected: self.schema.builtin_name().unwrap_or_else(|| "a custom schema".into()),
            })
        }
    }

    /// `η_X`, after checking that `X` lives over this functor's schema.
    pub fn try_eta(&self, x: &Instance) -> Result<Hom, LassoError> {
        self.ensure_schema(x)?;
        Ok(self.eta(x))
    }
}

/// Quotient of `x` by the congruence generated by `pairs`: identifications
/// propagate forward along every generator.
pub fn quotient_by(x: &Instance, pairs: &[Pair]) -> Hom {
    let schema = x.schema().clone();
    let mut ufs: Vec<UnionFind> = x.carriers().iter().map(|&n| UnionFind::new(n)).collect();
    for &(s, a, b) in pairs {
        ufs[s].union(a, b);
    }
    let mut changed = true;
    while changed {
        changed = false;
        for (gi, g) in schema.generators().iter().enumerate() {
            for e in 0..x.carrier(g.dom) {
                let r = ufs[g.dom].find(e);
                if r != e {
                    let (ge, gr) = (x.apply(gi, e), x.apply(gi, r));
                    changed |= ufs[g.cod].union(ge, gr);
                }
            }
        }
    }
    let (labels, counts): (Vec<Vec<usize>>, Vec<usize>) = ufs.iter_mut().map(UnionFind::labels).unzip();
    let actions = schema
        .generators()
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            let mut act = vec![0; counts[g.dom]];
            for e in 0..x.carrier(g.dom) {
                act[labels[g.dom][e]] = labels[g.cod][x.apply(gi, e)];
            }
            act
        })
        .collect();
    let q = Instance::from_parts_unchecked(schema, counts, actions);
    Hom::from_parts_unchecked(x.clone(), q, labels)
}

/// A lasso: a pointed endofunctor with epi unit that preserves pushouts of
/// monic spans. `strong` records preservation of all monic colimits; it is
/// only set where that property is known.
#[derive(Clone, Debug)]
pub struct Lasso {
    functor: PointedEndofunctor,
    strong: bool,
}

impl Lasso {
    /// Wraps a functor known to satisfy the lasso axioms.
    pub(crate) fn known(functor: PointedEndofunctor, strong: bool) -> Self {
        Self { functor, strong }
    }

    /// Promotes a functor to a lasso after checking the axioms on a universe;
    /// the strong flag is set when the strong check also passes.
    pub fn certify(
        functor: PointedEndofunctor,
        bounds: &crate::universe::Bounds,
    ) -> Result<Self, LassoError> {
        let report = check_strong(&functor, bounds)?;
        if !report.lasso_axioms_hold() {
            return Err(LassoError::AxiomsFailed(functor.name.clone()));
        }
        let strong = report.passed();
        Ok(Self { functor, strong })
    }

    pub fn functor(&self) -> &PointedEndofunctor {
        &self.functor
    }

    pub fn name(&self) -> &str {
        &self.functor.name
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.functor.schema
    }

    pub fn is_strong(&self) -> bool {
        self.strong
    }

    pub fn eta(&self, x: &Instance) -> Hom {
        self.functor.eta(x)
    }

    pub fn try_eta(&self, x: &Instance) -> Result<Hom, LassoError> {
        self.functor.try_eta(x)
    }

    pub fn on_object(&self, x: &Instance) -> Instance {
        self.functor.on_object(x)
    }

    pub fn on_hom(&self, f: &Hom) -> Result<Hom, LassoError> {
        self.functor.on_hom(f)
    }

    fn renamed(mut self, name: impl Into<String>) -> Self {
        self.functor.name = name.into();
        self
    }
}

/// Composite functor `outer ∘ inner` with unit `η'_{ΛX} ∘ η_X`.
pub fn compose_functors(
    outer: &PointedEndofunctor,
    inner: &PointedEndofunctor,
) -> Result<PointedEndofunctor, LassoError> {
    if outer.schema.as_ref() != inner.schema.as_ref() {
        return Err(LassoError::SchemaMismatch {
            lasso: outer.name.clone(),
            expected: inner.schema.builtin_name().unwrap_or_else(|| "a custom schema".into()),
        });
    }
    Ok(PointedEndofunctor {
        name: format!("{}∘{}", outer.name, inner.name),
        schema: outer.schema.clone(),
        action: Action::Composite {
            outer: Box::new(outer.clone()),
            inner: Box::new(inner.clone()),
        },
    })
}

/// Composite lasso; strong when both factors are.
pub fn compose_lassos(outer: &Lasso, inner: &Lasso) -> Result<Lasso, LassoError> {
    Ok(Lasso {
        functor: compose_functors(&outer.functor, &inner.functor)?,
        strong: outer.strong && inner.strong,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cset::fixtures::*;
    use crate::cset::{are_isomorphic, check_hom, is_epi};

    #[test]
    fn congruence_closure_propagates_forward() {
        // Identifying the two distinguished loops' vertices forces the loops together.
        let x = rgraph(2, &[]);
        let q = quotient_by(&x, &[(0, 0, 1)]);
        assert_eq!(q.cod().carriers(), &[1, 1]);
        assert!(is_epi(&q));
        assert_eq!(check_hom(&q), Ok(()));
    }

    #[test]
    fn composite_unit_is_the_composite_of_units() {
        let cc = grph_cc();
        let twice = compose_lassos(&cc, &cc).unwrap();
        let g = graph(3, &[(0, 1)]);
        assert!(are_isomorphic(&twice.on_object(&g), &cc.on_object(&g)));
        assert_eq!(twice.name(), "cc∘cc");
        assert!(twice.is_strong());
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let cc = grph_cc();
        let d = rgrph_lasso(RGrphKind::Deloop);
        assert!(matches!(compose_lassos(&cc, &d), Err(LassoError::SchemaMismatch { .. })));
        assert!(cc.try_eta(&rgraph(1, &[])).is_err());
    }

    #[test]
    fn on_hom_is_functorial() {
        let cc = grph_cc();
        let a = graph(2, &[(0, 1)]);
        let b = graph(3, &[(0, 1), (2, 2)]);
        let c = graph(1, &[(0, 0), (0, 0)]);
        let f = Hom::new(a.clone(), b.clone(), vec![vec![0, 1], vec![0]]).unwrap();
        let g = Hom::new(b, c, vec![vec![0, 0, 0], vec![0, 1]]).unwrap();
        let lhs = cc.on_hom(&f.then(&g)).unwrap();
        let rhs = cc.on_hom(&f).unwrap().then(&cc.on_hom(&g).unwrap());
        assert_eq!(lhs.components(), rhs.components());
        assert_eq!(cc.on_hom(&Hom::identity(&a)).unwrap(), Hom::identity(&cc.on_object(&a)));
    }
}
