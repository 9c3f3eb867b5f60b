//! TOML description of a heterogeneity space and its parameter fields, read
//! by the `steady` and `r0` commands.
//!
//! ```toml
//! space.kind = "discrete"   # or "quadrature" (with m) or "explicit"
//! space.n = 4
//! fields.beta = 0.6         # one value for every node ...
//! fields.gamma = [0.4, 0.4, 0.5, 0.5]   # ... or one per node
//! fields.f = { mean = 0.5, theta = 0.2 }  # truncated normal density
//! ```
//!
//! `q` defaults to one and is rescaled so that `<q f> = 1` unless
//! `fields.normalize_q = false`; `eta` and `sigma` default to zero and `f`
//! to one.

use std::path::Path;

use serde::Deserialize;

use crate::error::{HetsisError, Result};
use crate::hetspace::{
    make_discrete_space, make_quadrature_space, normalize_q, truncated_normal_density,
    HeterogeneitySpace, ModelFields, SpaceKind, DEFAULT_RATE_FLOOR,
};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SpaceDef {
    Discrete { n: usize },
    Quadrature { m: usize },
    Explicit { nodes: Vec<f64>, weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Values {
    Scalar(f64),
    PerNode(Vec<f64>),
    TruncatedNormal { mean: f64, theta: f64 },
}

impl Values {
    fn resolve(&self, key: &str, space: &HeterogeneitySpace) -> Result<Vec<f64>> {
        match self {
            Values::Scalar(v) => Ok(vec![*v; space.len()]),
            Values::PerNode(v) if v.len() == space.len() => Ok(v.clone()),
            Values::PerNode(v) => Err(HetsisError::Config(format!(
                "fields.{key} has {} values for {} nodes",
                v.len(),
                space.len()
            ))),
            Values::TruncatedNormal { .. } if key != "f" => Err(HetsisError::Config(format!(
                "fields.{key}: only f may be given as a density"
            ))),
            Values::TruncatedNormal { mean, theta } => {
                Ok(truncated_normal_density(space, *mean, *theta)?.f)
            }
        }
    }
}

fn one() -> Values {
    Values::Scalar(1.0)
}

fn zero() -> Values {
    Values::Scalar(0.0)
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDefs {
    beta: Values,
    gamma: Values,
    #[serde(default = "one")]
    q: Values,
    #[serde(default = "zero")]
    eta: Values,
    #[serde(default = "zero")]
    sigma: Values,
    #[serde(default = "one")]
    f: Values,
    #[serde(default = "yes")]
    normalize_q: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsFile {
    space: SpaceDef,
    fields: FieldDefs,
}

impl FieldsFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HetsisError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HetsisError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Builds and validates the space and fields.
    pub fn resolve(&self) -> Result<(HeterogeneitySpace, ModelFields)> {
        let space = match &self.space {
            SpaceDef::Discrete { n } => make_discrete_space(*n)?,
            SpaceDef::Quadrature { m } => make_quadrature_space(*m)?,
            SpaceDef::Explicit { nodes, weights } => {
                HeterogeneitySpace::from_parts(nodes.clone(), weights.clone(), SpaceKind::DiscreteCounting)?
            }
        };
        let d = &self.fields;
        let f = d.f.resolve("f", &space)?;
        let mut q = d.q.resolve("q", &space)?;
        if d.normalize_q {
            q = normalize_q(&space, &q, &f)?;
        }
        let fields = ModelFields {
            beta: d.beta.resolve("beta", &space)?,
            gamma: d.gamma.resolve("gamma", &space)?,
            q,
            eta: d.eta.resolve("eta", &space)?,
            sigma: d.sigma.resolve("sigma", &space)?,
            f,
        };
        fields.validate(&space, DEFAULT_RATE_FLOOR)?;
        Ok((space, fields))
    }
}
