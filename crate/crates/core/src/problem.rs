//! The on-disk problem description and its conversion into library objects.
//!
//! Complex numbers are two-element arrays `[re, im]`.

use serde::{Deserialize, Serialize};

use crate::bundle::{vtilde_system, DeformedBundle, QscSystem};
use crate::classes::{class_data, q_vector_of_z, ClassData};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::linalg::C64;
use crate::poly::{LinearForm, MultiPoly};

pub type Complex = [f64; 2];

fn to_c(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Deformation {
    Tangent,
    Random { seed: u64, norm: f64 },
    /// Per class, an `n_c × n_c` matrix whose entries are linear forms on `W^∨`
    /// given as `r`-tuples of complex coefficients.
    Classes(Vec<Vec<Vec<Vec<Complex>>>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exponent: Vec<u32>,
    pub coeff: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Query {
    Exponent(Vec<u32>),
    Terms(Vec<Term>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub fan: Fan,
    #[serde(default = "tangent")]
    pub deformation: Deformation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<Query>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<Complex>>,
    #[serde(default)]
    pub options: Options,
}

fn tangent() -> Deformation {
    Deformation::Tangent
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// A validated problem: fan, class data and bundle.
#[derive(Debug, Clone)]
pub struct Model {
    pub fan: Fan,
    pub cd: ClassData,
    pub bundle: DeformedBundle,
}

impl Model {
    pub fn new(fan: Fan, deformation: &Deformation) -> Result<Self> {
        fan.validate()?;
        let cd = class_data(&fan)?;
        let bundle = match deformation {
            Deformation::Tangent => DeformedBundle::tangent(&cd),
            Deformation::Random { seed, norm } => DeformedBundle::random(&cd, *seed, *norm),
            Deformation::Classes(mats) => {
                let forms = mats
                    .iter()
                    .map(|m| {
                        m.iter()
                            .map(|row| {
                                row.iter()
                                    .map(|e| LinearForm(e.iter().map(to_c).collect()))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect();
                DeformedBundle::new(&cd, forms)?
            }
        };
        Ok(Model { fan, cd, bundle })
    }

    /// Builds the model, applying a seed override to random deformations.
    pub fn from_spec(spec: &ProblemSpec, seed: Option<u64>) -> Result<Self> {
        let deformation = match (&spec.deformation, seed) {
            (Deformation::Random { norm, .. }, Some(s)) => Deformation::Random { seed: s, norm: *norm },
            (d, _) => d.clone(),
        };
        Model::new(spec.fan.clone(), &deformation)
    }

    pub fn euler(&self) -> usize {
        self.fan.euler_characteristic()
    }

    pub fn system(&self, q: &[C64]) -> Result<QscSystem> {
        vtilde_system(&self.cd, &self.bundle, q, self.euler())
    }

    /// The `q` of the problem, converting from `z` when needed.
    pub fn q_of(&self, spec: &ProblemSpec) -> Result<Vec<C64>> {
        match (&spec.q, &spec.z) {
            (Some(q), _) => {
                if q.len() != self.cd.r {
                    return Err(Error::ArityMismatch {
                        expected: self.cd.r,
                        got: q.len(),
                    });
                }
                Ok(q.iter().map(to_c).collect())
            }
            (None, Some(z)) => q_vector_of_z(&self.cd, &z.iter().map(to_c).collect::<Vec<_>>()),
            (None, None) => Err(Error::Parse("problem file needs q or z".into())),
        }
    }

    /// The insertion polynomial of a query.
    pub fn sigma(&self, query: &Query) -> Result<MultiPoly> {
        let r = self.cd.r;
        match query {
            Query::Exponent(e) => {
                if e.len() != r {
                    return Err(Error::ArityMismatch { expected: r, got: e.len() });
                }
                Ok(MultiPoly::monomial(e.clone(), C64::new(1.0, 0.0)))
            }
            Query::Terms(ts) => MultiPoly::from_terms(r, ts.iter().map(|t| (t.exponent.clone(), to_c(&t.coeff)))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::examples::p1xp1;
    use proptest::prelude::*;

    #[test]
    fn parses_minimal_spec() {
        let s = ProblemSpec::from_json(
            r#"{"fan": {"rays": [[1], [-1]], "max_cones": [[0], [1]]}, "query": {"exponent": [3]}, "q": [[0.1, 0.0]]}"#,
        )
        .unwrap();
        assert_eq!(s.deformation, Deformation::Tangent);
        let m = Model::from_spec(&s, None).unwrap();
        assert_eq!(m.q_of(&s).unwrap(), vec![C64::new(0.1, 0.0)]);
        assert!(ProblemSpec::from_json("{").is_err());
    }

    #[test]
    fn z_coordinates() {
        let s = ProblemSpec {
            fan: p1xp1(),
            deformation: Deformation::Tangent,
            query: None,
            q: None,
            z: Some(vec![[0.5, 0.0], [0.2, 0.0], [0.5, 0.0], [0.1, 0.0]]),
            options: Options::default(),
        };
        let m = Model::from_spec(&s, None).unwrap();
        let q = m.q_of(&s).unwrap();
        assert_eq!(q.len(), 2);
        assert!(q.iter().all(|x| x.norm() > 0.0));
    }

    fn arb_spec() -> impl Strategy<Value = ProblemSpec> {
        let c = (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| [a, b]);
        (
            prop::collection::vec(c.clone(), 2),
            prop::option::of(0.01f64..0.5),
            prop::option::of(any::<u64>()),
            prop::collection::vec(0u32..4, 2),
            any::<bool>(),
        )
            .prop_map(|(q, eps, seed, e, random)| ProblemSpec {
                fan: p1xp1(),
                deformation: if random {
                    Deformation::Random { seed: 7, norm: 0.25 }
                } else {
                    Deformation::Tangent
                },
                query: Some(Query::Exponent(e)),
                q: Some(q),
                z: None,
                options: Options {
                    eps_max: eps,
                    seed,
                    ..Options::default()
                },
            })
    }

    proptest! {
        #[test]
        fn round_trip(s in arb_spec()) {
            prop_assert_eq!(ProblemSpec::from_json(&s.to_json()).unwrap(), s);
        }
    }
}
