//! JSON scenario files.
//!
//! ```json
//! {
//!   "n": 3, "k": 3,
//!   "marginals": [{"family": "pareto", "params": {"alpha": 2.0, "scale": 1.0}}],
//!   "correlation": "independent",
//!   "weights": [{"kind": "uniform", "params": {"omega": 1.0}}],
//!   "diagnostics": {"t_grid": {"from": 30, "to": 3e4, "points": 7}, "L": {"default": 1.0}}
//! }
//! ```
//!
//! A single marginal or weight entry is repeated `n` or `k` times.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dependence::{CorrelationMatrix, Dependence, Scenario};
use crate::error::{validation, Error, Result};
use crate::grid::GeometricGrid;
use crate::marginals::MarginalModel;
use crate::montecarlo::diagnostics::DiagnosticsConfig;
use crate::weights::{Coupling, WeightModel, WeightVectorSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n: usize,
    pub k: usize,
    pub marginals: Vec<MarginalSpec>,
    pub correlation: CorrelationSpec,
    pub weights: Vec<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_coupling: Option<CouplingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase", deny_unknown_fields)]
pub enum MarginalSpec {
    Pareto { alpha: f64, scale: f64 },
    #[serde(alias = "log-normal")]
    Lognormal { mu: f64, sigma: f64 },
    Weibullian { rate: f64, shape: f64 },
    Exponential { rate: f64 },
}

impl MarginalSpec {
    pub fn build(&self) -> Result<MarginalModel> {
        match *self {
            MarginalSpec::Pareto { alpha, scale } => MarginalModel::pareto(alpha, scale),
            MarginalSpec::Lognormal { mu, sigma } => MarginalModel::lognormal(mu, sigma),
            MarginalSpec::Weibullian { rate, shape } => MarginalModel::weibullian(rate, shape),
            MarginalSpec::Exponential { rate } => MarginalModel::exponential(rate),
        }
    }
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Degenerate { c: f64 },
    Uniform {
        #[serde(default = "unit")]
        omega: f64,
    },
    Beta {
        a: f64,
        b: f64,
        #[serde(default = "unit")]
        omega: f64,
    },
    /// Atom `p` at `omega`, otherwise `sub` (default Uniform(0, eta)).
    ModelA {
        omega: f64,
        p: f64,
        eta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sub: Option<Box<WeightSpec>>,
    },
}

impl WeightSpec {
    pub fn build(&self) -> Result<WeightModel> {
        match self {
            WeightSpec::Degenerate { c } => WeightModel::degenerate(*c),
            WeightSpec::Uniform { omega } => WeightModel::uniform(*omega),
            WeightSpec::Beta { a, b, omega } => WeightModel::beta(*a, *b, *omega),
            WeightSpec::ModelA { omega, p, eta, sub: None } => WeightModel::model_a(*omega, *p, *eta),
            WeightSpec::ModelA { omega, p, eta, sub: Some(sub) } => WeightModel::model_a_with(*omega, *p, *eta, sub.build()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorrelationSpec {
    /// Only `"independent"` is accepted.
    Keyword(String),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingSpec {
    Independent,
    Comonotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<GeometricGrid>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<PairThresholds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decrease_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairThresholds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<f64>,
    /// One-based pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairThreshold>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairThreshold {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// A validated scenario together with its diagnostics settings.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub diagnostics: DiagnosticsConfig,
}

fn expand<T: Clone>(items: &[T], len: usize, what: &str) -> Result<Vec<T>> {
    match items.len() {
        l if l == len => Ok(items.to_vec()),
        1 => Ok(vec![items[0].clone(); len]),
        l => validation(format!("{l} {what} entries given, expected 1 or {len}")),
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("scenario file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files serialize")
    }

    pub fn build(&self) -> Result<LoadedScenario> {
        if self.n == 0 {
            return validation("n must be at least 1");
        }
        if self.k == 0 || self.k > self.n {
            return validation(format!("k must lie in 1..={}, got {}", self.n, self.k));
        }
        let marginals = expand(&self.marginals, self.n, "marginal")?.iter().map(MarginalSpec::build).collect::<Result<Vec<_>>>()?;
        let weights = expand(&self.weights, self.k, "weight")?.iter().map(WeightSpec::build).collect::<Result<Vec<_>>>()?;
        let coupling = match self.weight_coupling.unwrap_or(CouplingSpec::Independent) {
            CouplingSpec::Independent => Coupling::Independent,
            CouplingSpec::Comonotone => Coupling::Comonotone,
        };
        let dependence = match &self.correlation {
            CorrelationSpec::Keyword(s) if s == "independent" => Dependence::Independent,
            CorrelationSpec::Keyword(s) => return validation(format!("correlation must be \"independent\" or a matrix, got {s:?}")),
            CorrelationSpec::Matrix(rows) => Dependence::Gaussian(CorrelationMatrix::new(rows)?),
        };
        let scenario = Scenario::new(marginals, dependence, WeightVectorSpec::new(weights, coupling)?)?;
        let mut diagnostics = DiagnosticsConfig::default_for(&scenario)?;
        if let Some(d) = &self.diagnostics {
            if let Some(g) = d.t_grid {
                diagnostics.t_grid = g;
            }
            if let Some(x) = &d.x_values {
                diagnostics.x_values = x.clone();
            }
            if let Some(f) = d.decrease_factor {
                diagnostics.decrease_factor = f;
            }
            if let Some(l) = &d.l {
                if let Some(v) = l.default {
                    diagnostics.l_default = v;
                }
                let mut pairs = BTreeMap::new();
                for p in &l.pairs {
                    if p.i == 0 || p.j == 0 || p.i > self.n || p.j > self.n || p.i == p.j {
                        return validation(format!("pair ({}, {}) must name two distinct risks in 1..={}", p.i, p.j, self.n));
                    }
                    pairs.insert(((p.i.min(p.j)) - 1, p.i.max(p.j) - 1), p.value);
                }
                diagnostics.l_pairs = pairs;
            }
        }
        diagnostics.check()?;
        Ok(LoadedScenario { scenario, diagnostics })
    }
}

pub fn load(path: &Path) -> Result<LoadedScenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    ScenarioFile::parse(&text)?.build()
}
