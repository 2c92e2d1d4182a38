//! Laws of the random deflators `C_i` on a bounded support `[0, omega]`.
//!
//! Besides sampling and moments, each law is classified by its behaviour at the upper
//! endpoint: an atom at `omega` (Model A) or a regularly varying near-endpoint tail
//! `P(C > omega - x/t) / P(C > omega - 1/t) -> x^gamma` (Model B).

use rand::Rng;
use rand_distr::{Distribution, Open01};
use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, validation, Error, Result};

/// Largest tolerated relative gap between the analytic Model B index and its numeric check.
const GAMMA_CHECK_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `C = c` almost surely.
    Degenerate { c: f64 },
    /// Uniform on `[0, omega]`.
    Uniform { omega: f64 },
    /// `omega * B` with `B ~ Beta(a, b)`.
    Beta { a: f64, b: f64, omega: f64 },
    /// Atom of mass `p` at `omega`; with probability `1 - p` a draw from `sub`, supported
    /// on `[0, eta]`.
    ModelA { omega: f64, p: f64, eta: f64, sub: Box<WeightModel> },
}

/// Endpoint behaviour of a weight law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointClass {
    ModelA { p: f64, eta: f64 },
    ModelB { gamma: f64 },
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightModel {
    kind: WeightKind,
    sampler: Option<rand_distr::Beta<f64>>,
}

impl WeightModel {
    pub fn degenerate(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return validation(format!("degenerate weight must be finite and nonnegative, got {c}"));
        }
        Ok(Self { kind: WeightKind::Degenerate { c }, sampler: None })
    }

    pub fn uniform(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return validation(format!("uniform endpoint must be positive, got {omega}"));
        }
        Ok(Self { kind: WeightKind::Uniform { omega }, sampler: None })
    }

    pub fn beta(a: f64, b: f64, omega: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("omega", omega)] {
            if !(v.is_finite() && v > 0.0) {
                return validation(format!("beta weight {name} must be positive, got {v}"));
            }
        }
        let sampler = rand_distr::Beta::new(a, b).map_err(|e| Error::Validation(e.to_string()))?;
        Ok(Self { kind: WeightKind::Beta { a, b, omega }, sampler: Some(sampler) })
    }

    /// Model A law with the default `Uniform(0, eta)` sub-law.
    pub fn model_a(omega: f64, p: f64, eta: f64) -> Result<Self> {
        Self::model_a_with(omega, p, eta, WeightModel::uniform(eta)?)
    }

    pub fn model_a_with(omega: f64, p: f64, eta: f64, sub: WeightModel) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return validation(format!("model A endpoint must be positive, got {omega}"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return validation(format!("model A atom mass must lie in (0, 1], got {p}"));
        }
        if !(eta > 0.0 && eta < omega) {
            return validation(format!("model A eta must lie in (0, omega), got {eta}"));
        }
        if matches!(sub.kind, WeightKind::ModelA { .. }) {
            return validation("model A sub-law cannot itself be a model A law");
        }
        if sub.endpoint() > eta {
            return validation(format!(
                "model A sub-law must live on [0, eta]; its endpoint {} exceeds eta = {eta}",
                sub.endpoint()
            ));
        }
        Ok(Self { kind: WeightKind::ModelA { omega, p, eta, sub: Box::new(sub) }, sampler: None })
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            WeightKind::Degenerate { c } => format!("Degenerate({c})"),
            WeightKind::Uniform { omega } => format!("Uniform(0, {omega})"),
            WeightKind::Beta { a, b, omega } => format!("Beta({a}, {b}) on [0, {omega}]"),
            WeightKind::ModelA { omega, p, eta, sub } => {
                format!("ModelA(omega={omega}, p={p}, eta={eta}, sub={})", sub.name())
            }
        }
    }

    /// Upper endpoint `omega` of the support.
    pub fn endpoint(&self) -> f64 {
        match &self.kind {
            WeightKind::Degenerate { c } => *c,
            WeightKind::Uniform { omega } | WeightKind::Beta { omega, .. } | WeightKind::ModelA { omega, .. } => *omega,
        }
    }

    /// `P(C = 0)`.
    pub fn mass_at_zero(&self) -> f64 {
        match &self.kind {
            WeightKind::Degenerate { c } => (*c == 0.0) as u8 as f64,
            WeightKind::Uniform { .. } | WeightKind::Beta { .. } => 0.0,
            WeightKind::ModelA { p, sub, .. } => (1.0 - p) * sub.mass_at_zero(),
        }
    }

    /// `P(C = omega)`.
    pub fn upper_atom(&self) -> f64 {
        match &self.kind {
            WeightKind::Degenerate { .. } => 1.0,
            WeightKind::Uniform { .. } | WeightKind::Beta { .. } => 0.0,
            WeightKind::ModelA { p, .. } => *p,
        }
    }

    /// Whether the law has no atoms at all.
    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, WeightKind::Uniform { .. } | WeightKind::Beta { .. })
    }

    /// `P(C > c)`.
    pub fn survival(&self, c: f64) -> f64 {
        match &self.kind {
            WeightKind::Degenerate { c: v } => (*v > c) as u8 as f64,
            WeightKind::Uniform { omega } => ((omega - c) / omega).clamp(0.0, 1.0),
            WeightKind::Beta { a, b, omega } => {
                if c <= 0.0 {
                    1.0
                } else if c >= *omega {
                    0.0
                } else {
                    // P(B > x) = I_{1-x}(b, a), accurate near the upper endpoint
                    beta_reg(*b, *a, 1.0 - c / omega)
                }
            }
            WeightKind::ModelA { omega, p, sub, .. } => {
                if c >= *omega {
                    0.0
                } else {
                    p + (1.0 - p) * sub.survival(c)
                }
            }
        }
    }

    pub fn cdf(&self, c: f64) -> f64 {
        1.0 - self.survival(c)
    }

    /// `P(C > omega - x)` for `x > 0`.
    pub fn near_endpoint_tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return domain(format!("distance to the endpoint must be positive, got {x}"));
        }
        Ok(match &self.kind {
            WeightKind::Uniform { omega } => (x / omega).min(1.0),
            WeightKind::Beta { a, b, omega } => {
                if x >= *omega {
                    1.0
                } else {
                    beta_reg(*b, *a, x / omega)
                }
            }
            _ => self.survival(self.endpoint() - x),
        })
    }

    /// `E[C^beta]` for `beta >= 0`.
    pub fn moment(&self, beta: f64) -> Result<f64> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return domain(format!("moment order must be finite and nonnegative, got {beta}"));
        }
        if beta == 0.0 {
            return Ok(1.0);
        }
        Ok(match &self.kind {
            WeightKind::Degenerate { c } => c.powf(beta),
            WeightKind::Uniform { omega } => omega.powf(beta) / (1.0 + beta),
            WeightKind::Beta { a, b, omega } => {
                let ln_ratio = ln_gamma(a + beta) + ln_gamma(a + b) - ln_gamma(*a) - ln_gamma(a + b + beta);
                omega.powf(beta) * ln_ratio.exp()
            }
            WeightKind::ModelA { omega, p, sub, .. } => p * omega.powf(beta) + (1.0 - p) * sub.moment(beta)?,
        })
    }

    /// Endpoint classification. The Model B index of Beta laws is checked numerically
    /// against the analytic value.
    pub fn classify_endpoint(&self) -> Result<EndpointClass> {
        Ok(match &self.kind {
            WeightKind::Degenerate { c } if *c > 0.0 => EndpointClass::ModelA { p: 1.0, eta: c / 2.0 },
            WeightKind::Degenerate { .. } => EndpointClass::Other,
            WeightKind::ModelA { p, eta, .. } => EndpointClass::ModelA { p: *p, eta: *eta },
            WeightKind::Uniform { .. } => EndpointClass::ModelB { gamma: 1.0 },
            WeightKind::Beta { b, omega, .. } => {
                let t = 1e6 / omega;
                let numeric = (self.near_endpoint_tail(2.0 / t)? / self.near_endpoint_tail(1.0 / t)?).log2();
                if ((numeric - b) / b).abs() > GAMMA_CHECK_TOL {
                    return Err(Error::ModelConsistency(format!(
                        "near-endpoint index of {} is {numeric:.4}, expected {b}",
                        self.name()
                    )));
                }
                EndpointClass::ModelB { gamma: *b }
            }
        })
    }

    /// The `u`-quantile (generalised inverse of the distribution function).
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.kind {
            WeightKind::Degenerate { c } => *c,
            WeightKind::Uniform { omega } => omega * u,
            WeightKind::Beta { a, b, omega } => omega * inv_beta_reg(*a, *b, u),
            WeightKind::ModelA { omega, p, sub, .. } => {
                if u > 1.0 - p {
                    *omega
                } else {
                    sub.quantile(u / (1.0 - p))
                }
            }
        }
    }

    /// Point `c` with `P(C > c) = s` for a continuous law, `s` in `(0, 1]`.
    pub fn survival_quantile(&self, s: f64) -> f64 {
        match &self.kind {
            WeightKind::Uniform { omega } => omega * (1.0 - s),
            _ => self.endpoint() - self.survival_quantile_gap(s),
        }
    }

    /// Distance `omega - c` from the endpoint to the point with `P(C > c) = s`.
    ///
    /// Kept separate from [`Self::survival_quantile`] so that points extremely close to
    /// `omega` stay resolved; for Beta laws the gap is found by bisection on a log scale.
    pub fn survival_quantile_gap(&self, s: f64) -> f64 {
        match &self.kind {
            WeightKind::Uniform { omega } => omega * s.min(1.0),
            WeightKind::Beta { a, b, omega } => {
                if s >= 1.0 {
                    return *omega;
                }
                let target = s.ln();
                let ln_tail = |ln_y: f64| beta_reg(*b, *a, ln_y.exp()).ln();
                let (mut lo, mut hi) = (-745.0f64, 0.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if ln_tail(mid) > target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                omega * (0.5 * (lo + hi)).exp()
            }
            _ => {
                // generalised inverse by bisection on c
                let (mut lo, mut hi) = (0.0, self.endpoint());
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.survival(mid) > s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                self.endpoint() - hi
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            WeightKind::Degenerate { c } => *c,
            WeightKind::Uniform { omega } => omega * rng.random::<f64>(),
            WeightKind::Beta { omega, .. } => {
                omega * self.sampler.as_ref().expect("beta sampler is built with the model").sample(rng)
            }
            WeightKind::ModelA { omega, p, sub, .. } => {
                let u: f64 = rng.sample(Open01);
                if u < *p {
                    *omega
                } else {
                    sub.sample(rng)
                }
            }
        }
    }
}

/// How the components of the weight vector relate to each other. Weights are always
/// independent of the risks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Mutually independent components.
    Independent,
    /// All components are quantile transforms of one common uniform.
    Comonotone,
}

/// Laws of `C_1, ..., C_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVectorSpec {
    components: Vec<WeightModel>,
    coupling: Coupling,
}

impl WeightVectorSpec {
    pub fn new(components: Vec<WeightModel>, coupling: Coupling) -> Result<Self> {
        let Some(first) = components.first() else {
            return validation("the weight vector needs at least one component");
        };
        if first.mass_at_zero() > 0.0 || first.endpoint() <= 0.0 {
            return validation(format!("C1 must be strictly positive almost surely, got {}", first.name()));
        }
        Ok(Self { components, coupling })
    }

    pub fn independent(components: Vec<WeightModel>) -> Result<Self> {
        Self::new(components, Coupling::Independent)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[WeightModel] {
        &self.components
    }

    pub fn first(&self) -> &WeightModel {
        &self.components[0]
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn is_independent(&self) -> bool {
        self.coupling == Coupling::Independent
    }

    /// Draws `(C_1, ..., C_k)` into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self.coupling {
            Coupling::Independent => {
                for (o, w) in out.iter_mut().zip(&self.components) {
                    *o = w.sample(rng);
                }
            }
            Coupling::Comonotone => {
                let u: f64 = rng.sample(Open01);
                for (o, w) in out.iter_mut().zip(&self.components) {
                    *o = w.quantile(u);
                }
            }
        }
    }

    pub fn sample_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.sample_into(rng, &mut out);
        out
    }
}
