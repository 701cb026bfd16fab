//! Finite schema presentations: sorts, generating morphisms and path equations.
//!
//! A path is a list of generator names in application order, so the path
//! `["l", "s"]` denotes `s ∘ l`. The empty path is an identity.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A generating morphism `name: dom -> cod`, by sort name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorDecl {
    pub name: String,
    pub dom: String,
    pub cod: String,
}

/// The raw, unvalidated form of a schema, mirroring the schema file format.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemaPresentation {
    pub objects: Vec<String>,
    pub morphisms: Vec<GeneratorDecl>,
    #[serde(default)]
    pub equations: Vec<[Vec<String>; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaViolation {
    #[error("duplicate sort `{0}`")]
    DuplicateSort(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("generator `{generator}` refers to unknown sort `{sort}`")]
    DanglingSort { generator: String, sort: String },
    #[error("equation {equation}: unknown generator `{generator}`")]
    UnknownGenerator { equation: usize, generator: String },
    #[error("equation {equation}: path {side} is not composable at position {position}")]
    NonComposable {
        equation: usize,
        side: usize,
        position: usize,
    },
    #[error("equation {equation}: paths are not parallel")]
    NotParallel { equation: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("invalid schema: {}", join_violations(.0))]
    Invalid(Vec<SchemaViolation>),
    #[error("unknown builtin schema `{0}`")]
    UnknownBuiltin(String),
    #[error("CGr_k requires k >= 1")]
    ZeroColors,
}

fn join_violations(v: &[SchemaViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Checks every invariant of a presentation and reports all violations at once.
pub fn validate_schema(p: &SchemaPresentation) -> Result<(), Vec<SchemaViolation>> {
    let mut violations = Vec::new();
    for (i, o) in p.objects.iter().enumerate() {
        if p.objects[..i].contains(o) {
            violations.push(SchemaViolation::DuplicateSort(o.clone()));
        }
    }
    for (i, g) in p.morphisms.iter().enumerate() {
        if p.morphisms[..i].iter().any(|h| h.name == g.name) {
            violations.push(SchemaViolation::DuplicateGenerator(g.name.clone()));
        }
        for sort in [&g.dom, &g.cod] {
            if !p.objects.contains(sort) {
                violations.push(SchemaViolation::DanglingSort {
                    generator: g.name.clone(),
                    sort: sort.clone(),
                });
            }
        }
    }
    for (ei, eq) in p.equations.iter().enumerate() {
        let mut ends: [Option<(String, String)>; 2] = [None, None];
        let mut ok = true;
        for (side, path) in eq.iter().enumerate() {
            let mut cur: Option<(String, String)> = None;
            for (pos, name) in path.iter().enumerate() {
                let Some(g) = p.morphisms.iter().find(|g| &g.name == name) else {
                    violations.push(SchemaViolation::UnknownGenerator {
                        equation: ei,
                        generator: name.clone(),
                    });
                    ok = false;
                    break;
                };
                cur = match cur {
                    None => Some((g.dom.clone(), g.cod.clone())),
                    Some((d, c)) if c == g.dom => Some((d, g.cod.clone())),
                    Some(_) => {
                        violations.push(SchemaViolation::NonComposable {
                            equation: ei,
                            side,
                            position: pos,
                        });
                        ok = false;
                        break;
                    }
                };
            }
            ends[side] = cur;
        }
        if !ok {
            continue;
        }
        let parallel = match (&ends[0], &ends[1]) {
            (Some(a), Some(b)) => a == b,
            (Some((d, c)), None) | (None, Some((d, c))) => d == c,
            (None, None) => true,
        };
        if !parallel {
            violations.push(SchemaViolation::NotParallel { equation: ei });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub dom: usize,
    pub cod: usize,
}

/// A path equation between two parallel generator paths, by generator index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    pub dom: usize,
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
}

/// A validated schema. Immutable; equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schema {
    presentation: SchemaPresentation,
    generators: Vec<Generator>,
    equations: Vec<Equation>,
}

impl Schema {
    pub fn new(presentation: SchemaPresentation) -> Result<Self, SchemaError> {
        validate_schema(&presentation).map_err(SchemaError::Invalid)?;
        let sort = |name: &str| presentation.objects.iter().position(|o| o == name).unwrap();
        let generators: Vec<Generator> = presentation
            .morphisms
            .iter()
            .map(|g| Generator {
                name: g.name.clone(),
                dom: sort(&g.dom),
                cod: sort(&g.cod),
            })
            .collect();
        let gen_index =
            |name: &str| generators.iter().position(|g| g.name == name).unwrap();
        let equations = presentation
            .equations
            .iter()
            .filter_map(|[l, r]| {
                let lhs: Vec<usize> = l.iter().map(|n| gen_index(n)).collect();
                let rhs: Vec<usize> = r.iter().map(|n| gen_index(n)).collect();
                // Two empty paths carry no constraint.
                let dom = lhs.first().or(rhs.first()).map(|&g| generators[g].dom)?;
                Some(Equation { dom, lhs, rhs })
            })
            .collect();
        Ok(Self {
            presentation,
            generators,
            equations,
        })
    }

    pub fn presentation(&self) -> &SchemaPresentation {
        &self.presentation
    }

    pub fn sort_count(&self) -> usize {
        self.presentation.objects.len()
    }

    pub fn sort_name(&self, sort: usize) -> &str {
        &self.presentation.objects[sort]
    }

    pub fn sort_index(&self, name: &str) -> Option<usize> {
        self.presentation.objects.iter().position(|o| o == name)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    /// Generators leaving `sort`.
    pub fn outgoing(&self, sort: usize) -> impl Iterator<Item = usize> + '_ {
        self.generators
            .iter()
            .enumerate()
            .filter(move |(_, g)| g.dom == sort)
            .map(|(i, _)| i)
    }

    /// Name of the builtin this schema is structurally equal to, if any.
    pub fn builtin_name(&self) -> Option<String> {
        let candidates = [Builtin::Grph, Builtin::RGrph, Builtin::Petri]
            .into_iter()
            .chain((1..self.sort_count()).map(Builtin::Colored));
        candidates
            .filter_map(|b| b.schema().ok().filter(|s| s == self).map(|_| b.to_string()))
            .next()
    }
}

/// The builtin schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Directed multigraphs: `s, t: E -> V`.
    Grph,
    /// Reflexive graphs: `s, t: E -> V`, `l: V -> E`, `s∘l = t∘l = id`.
    RGrph,
    /// `k`-edge-coloured graphs: one edge sort per colour.
    Colored(usize),
    /// Petri nets with tokens.
    Petri,
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Grph => write!(f, "Grph"),
            Builtin::RGrph => write!(f, "RGrph"),
            Builtin::Colored(k) => write!(f, "CGr_{k}"),
            Builtin::Petri => write!(f, "Petri"),
        }
    }
}

impl std::str::FromStr for Builtin {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Grph" => Ok(Builtin::Grph),
            "RGrph" => Ok(Builtin::RGrph),
            "Petri" => Ok(Builtin::Petri),
            _ => s
                .strip_prefix("CGr_")
                .and_then(|k| k.parse::<usize>().ok())
                .map(Builtin::Colored)
                .ok_or_else(|| SchemaError::UnknownBuiltin(s.to_string())),
        }
    }
}

fn decl(name: &str, dom: &str, cod: &str) -> GeneratorDecl {
    GeneratorDecl {
        name: name.into(),
        dom: dom.into(),
        cod: cod.into(),
    }
}

impl Builtin {
    pub fn presentation(self) -> Result<SchemaPresentation, SchemaError> {
        let strings = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        Ok(match self {
            Builtin::Grph => SchemaPresentation {
                objects: strings(&["V", "E"]),
                morphisms: vec![decl("s", "E", "V"), decl("t", "E", "V")],
                equations: vec![],
            },
            Builtin::RGrph => SchemaPresentation {
                objects: strings(&["V", "E"]),
                morphisms: vec![decl("s", "E", "V"), decl("t", "E", "V"), decl("l", "V", "E")],
                equations: vec![
                    [strings(&["l", "s"]), vec![]],
                    [strings(&["l", "t"]), vec![]],
                ],
            },
            Builtin::Colored(0) => return Err(SchemaError::ZeroColors),
            Builtin::Colored(k) => {
                let mut objects = vec!["V".to_string()];
                let mut morphisms = Vec::new();
                for i in 1..=k {
                    let e = format!("E{i}");
                    morphisms.push(decl(&format!("s{i}"), &e, "V"));
                    morphisms.push(decl(&format!("t{i}"), &e, "V"));
                    objects.push(e);
                }
                SchemaPresentation {
                    objects,
                    morphisms,
                    equations: vec![],
                }
            }
            Builtin::Petri => SchemaPresentation {
                objects: strings(&["Species", "Transition", "Input", "Output", "Token"]),
                morphisms: vec![
                    decl("is", "Input", "Species"),
                    decl("it", "Input", "Transition"),
                    decl("os", "Output", "Species"),
                    decl("ot", "Output", "Transition"),
                    decl("token", "Token", "Species"),
                ],
                equations: vec![],
            },
        })
    }

    pub fn schema(self) -> Result<Schema, SchemaError> {
        Schema::new(self.presentation()?)
    }
}

/// Looks up a builtin schema by name (`Grph`, `RGrph`, `CGr_<k>`, `Petri`).
pub fn builtin_schema(name: &str) -> Result<Schema, SchemaError> {
    name.parse::<Builtin>()?.schema()
}

/// A process-wide shared handle to a builtin schema.
pub fn shared_builtin(builtin: Builtin) -> Result<Arc<Schema>, SchemaError> {
    static POOL: OnceLock<Mutex<HashMap<Builtin, Arc<Schema>>>> = OnceLock::new();
    let pool = POOL.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = pool.lock().expect("schema pool poisoned");
    if let Some(s) = guard.get(&builtin) {
        return Ok(s.clone());
    }
    let s = Arc::new(builtin.schema()?);
    guard.insert(builtin, s.clone());
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grph_shape() {
        let s = builtin_schema("Grph").unwrap();
        assert_eq!(s.sort_count(), 2);
        assert_eq!(s.generators().len(), 2);
        assert!(s.equations().is_empty());
    }

    #[test]
    fn rgrph_has_reflexivity_equations() {
        let p = Builtin::RGrph.presentation().unwrap();
        assert_eq!(validate_schema(&p), Ok(()));
        let s = Schema::new(p).unwrap();
        assert_eq!(s.equations().len(), 2);
        assert_eq!(s.equations()[0].dom, s.sort_index("V").unwrap());
    }

    #[test]
    fn colored_and_petri_counts() {
        let c3 = builtin_schema("CGr_3").unwrap();
        assert_eq!(c3.sort_count(), 4);
        assert_eq!(c3.generators().len(), 6);
        let petri = builtin_schema("Petri").unwrap();
        assert_eq!(petri.sort_count(), 5);
        assert_eq!(petri.generators().len(), 5);
        assert_eq!(builtin_schema("CGr_0"), Err(SchemaError::ZeroColors));
        assert!(matches!(builtin_schema("Hyper"), Err(SchemaError::UnknownBuiltin(_))));
    }

    #[test]
    fn dangling_sort_is_reported() {
        let mut p = Builtin::Grph.presentation().unwrap();
        p.morphisms.push(decl("w", "W", "V"));
        let err = validate_schema(&p).unwrap_err();
        assert_eq!(
            err,
            vec![SchemaViolation::DanglingSort {
                generator: "w".into(),
                sort: "W".into()
            }]
        );
    }

    #[test]
    fn every_violation_is_listed() {
        let p = SchemaPresentation {
            objects: vec!["V".into(), "E".into()],
            morphisms: vec![decl("s", "E", "V"), decl("s", "E", "X")],
            equations: vec![[vec!["s".into(), "s".into()], vec![]], [vec!["q".into()], vec![]]],
        };
        let err = validate_schema(&p).unwrap_err();
        assert!(err.contains(&SchemaViolation::DuplicateGenerator("s".into())));
        assert!(err.iter().any(|v| matches!(v, SchemaViolation::DanglingSort { .. })));
        assert!(err.iter().any(|v| matches!(v, SchemaViolation::NonComposable { .. })));
        assert!(err.iter().any(|v| matches!(v, SchemaViolation::UnknownGenerator { .. })));
    }

    #[test]
    fn non_parallel_equation() {
        let mut p = Builtin::Grph.presentation().unwrap();
        // s: E -> V is not an endomorphism, so it cannot equal an identity.
        p.equations.push([vec!["s".into()], vec![]]);
        assert_eq!(
            validate_schema(&p),
            Err(vec![SchemaViolation::NotParallel { equation: 0 }])
        );
    }

    #[test]
    fn builtins_validate_and_are_recognised() {
        for name in ["Grph", "RGrph", "CGr_1", "CGr_3", "Petri"] {
            let s = builtin_schema(name).unwrap();
            assert_eq!(validate_schema(s.presentation()), Ok(()));
            // Re-validation of the stored presentation is idempotent.
            assert_eq!(Schema::new(s.presentation().clone()).unwrap(), s);
            assert_eq!(s.builtin_name().as_deref(), Some(name));
        }
    }
}
