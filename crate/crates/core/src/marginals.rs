//! Parametric marginal laws of the risks.
//!
//! Every family has an unbounded upper endpoint and sits either in the Fréchet
//! max-domain of attraction (regularly varying tail with index `alpha`) or in the
//! Gumbel max-domain (tail expansion `P(X > t + a(t)x) / P(X > t) -> exp(-x)` with an
//! auxiliary function `a`). Tails are computed in log space; plain probabilities are
//! derived from the logs at the API boundary.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};

use crate::error::{domain, validation, Error, Result};
use crate::special::{normal_isf_ln, normal_ln_sf};

/// Parametric family of a risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `P(X > t) = (scale / t)^alpha` for `t >= scale`.
    Pareto { alpha: f64, scale: f64 },
    /// `X = exp(mu + sigma Z)` with `Z` standard normal.
    LogNormal { mu: f64, sigma: f64 },
    /// Stretched exponential `P(X > t) = exp(-rate t^shape)`, `shape` in `(0, 1]`.
    Weibullian { rate: f64, shape: f64 },
    /// `P(X > t) = exp(-rate t)`.
    Exponential { rate: f64 },
}

/// Max-domain of attraction of a marginal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MdaClass {
    Frechet { alpha: f64 },
    Gumbel,
}

impl MdaClass {
    pub fn same_kind(&self, other: &MdaClass) -> bool {
        matches!(
            (self, other),
            (MdaClass::Frechet { .. }, MdaClass::Frechet { .. }) | (MdaClass::Gumbel, MdaClass::Gumbel)
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            MdaClass::Frechet { .. } => "frechet",
            MdaClass::Gumbel => "gumbel",
        }
    }
}

/// A validated marginal law. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalModel {
    family: Family,
}

fn positive_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        validation(format!("{name} must be positive and finite, got {v}"))
    }
}

impl MarginalModel {
    pub fn pareto(alpha: f64, scale: f64) -> Result<Self> {
        positive_finite("pareto alpha", alpha)?;
        positive_finite("pareto scale", scale)?;
        Ok(Self { family: Family::Pareto { alpha, scale } })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return validation(format!("lognormal mu must be finite, got {mu}"));
        }
        positive_finite("lognormal sigma", sigma)?;
        Ok(Self { family: Family::LogNormal { mu, sigma } })
    }

    pub fn weibullian(rate: f64, shape: f64) -> Result<Self> {
        positive_finite("weibullian rate", rate)?;
        if !(shape > 0.0 && shape <= 1.0) {
            return validation(format!(
                "weibullian shape must lie in (0, 1] to stay in the Gumbel domain, got {shape}"
            ));
        }
        Ok(Self { family: Family::Weibullian { rate, shape } })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        positive_finite("exponential rate", rate)?;
        Ok(Self { family: Family::Exponential { rate } })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn name(&self) -> String {
        match self.family {
            Family::Pareto { alpha, scale } => format!("Pareto(alpha={alpha}, scale={scale})"),
            Family::LogNormal { mu, sigma } => format!("LogNormal(mu={mu}, sigma={sigma})"),
            Family::Weibullian { rate, shape } => format!("Weibullian(rate={rate}, shape={shape})"),
            Family::Exponential { rate } => format!("Exponential(rate={rate})"),
        }
    }

    /// Left end of the support.
    pub fn lower_endpoint(&self) -> f64 {
        match self.family {
            Family::Pareto { scale, .. } => scale,
            _ => 0.0,
        }
    }

    /// `ln P(X > t)`.
    pub fn ln_tail(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        if t <= self.lower_endpoint() {
            return 0.0;
        }
        if t == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        match self.family {
            Family::Pareto { alpha, scale } => -alpha * (t / scale).ln(),
            Family::LogNormal { mu, sigma } => normal_ln_sf((t.ln() - mu) / sigma),
            Family::Weibullian { rate, shape } => -rate * t.powf(shape),
            Family::Exponential { rate } => -rate * t,
        }
    }

    /// `P(X > t)`. Values below the lower endpoint give 1.
    pub fn tail(&self, t: f64) -> f64 {
        self.ln_tail(t).exp()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        -self.ln_tail(t).exp_m1()
    }

    /// The `t` with `ln P(X > t) = ln_q`; `ln_q = 0` maps to the lower endpoint.
    pub fn tail_quantile_ln(&self, ln_q: f64) -> f64 {
        if ln_q >= 0.0 {
            return self.lower_endpoint();
        }
        let e = -ln_q;
        match self.family {
            Family::Pareto { alpha, scale } => scale * (e / alpha).exp(),
            Family::LogNormal { mu, sigma } => (mu + sigma * normal_isf_ln(ln_q)).exp(),
            Family::Weibullian { rate, shape } => (e / rate).powf(1.0 / shape),
            Family::Exponential { rate } => e / rate,
        }
    }

    /// Inverse survival function: the `t` with `P(X > t) = q`, `q` in `(0, 1]`.
    pub fn tail_quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return domain(format!("tail probability must lie in (0, 1], got {q}"));
        }
        Ok(self.tail_quantile_ln(q.ln()))
    }

    /// The `p`-quantile, `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("probability must lie in (0, 1), got {p}"));
        }
        Ok(self.tail_quantile_ln((-p).ln_1p()))
    }

    pub fn mda_class(&self) -> MdaClass {
        match self.family {
            Family::Pareto { alpha, .. } => MdaClass::Frechet { alpha },
            _ => MdaClass::Gumbel,
        }
    }

    /// Regular-variation index of the tail; `None` for Gumbel-domain laws.
    pub fn rv_index(&self) -> Option<f64> {
        match self.mda_class() {
            MdaClass::Frechet { alpha } => Some(alpha),
            MdaClass::Gumbel => None,
        }
    }

    /// Smallest `t` (exclusive) at which [`auxiliary`](Self::auxiliary) is defined.
    pub fn auxiliary_threshold(&self) -> f64 {
        match self.family {
            Family::LogNormal { mu, .. } => mu.exp(),
            Family::Exponential { .. } => f64::NEG_INFINITY,
            _ => 0.0,
        }
    }

    /// Auxiliary function `a(t)` of a Gumbel-domain law.
    ///
    /// LogNormal uses `sigma^2 t / (ln t - mu)`, Weibullian `t^(1-shape) / (rate shape)`,
    /// Exponential the constant `1 / rate`.
    pub fn auxiliary(&self, t: f64) -> Result<f64> {
        if let Family::Pareto { .. } = self.family {
            return Err(Error::Unsupported(
                "auxiliary function is only defined for Gumbel-domain laws".into(),
            ));
        }
        if !(t > self.auxiliary_threshold()) || !t.is_finite() {
            return domain(format!(
                "auxiliary function of {} needs t > {}, got {t}",
                self.name(),
                self.auxiliary_threshold()
            ));
        }
        Ok(match self.family {
            Family::LogNormal { mu, sigma } => sigma * sigma * t / (t.ln() - mu),
            Family::Weibullian { rate, shape } => t.powf(1.0 - shape) / (rate * shape),
            Family::Exponential { rate } => 1.0 / rate,
            Family::Pareto { .. } => unreachable!(),
        })
    }

    /// Maps a standard normal variate to this law through the Gaussian copula.
    pub fn from_normal(&self, z: f64) -> f64 {
        match self.family {
            Family::LogNormal { mu, sigma } => (mu + sigma * z).exp(),
            _ => self.tail_quantile_ln(normal_ln_sf(z)),
        }
    }

    /// One draw, independent of everything else.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            Family::LogNormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
            _ => {
                let u: f64 = rng.sample(Open01);
                self.tail_quantile_ln(u.ln())
            }
        }
    }

    /// Limit of `P(self > t) / P(reference > t)` as `t -> infinity`.
    ///
    /// Returns an error when `self` is strictly heavier than `reference`, i.e. when the
    /// limit is infinite.
    pub(crate) fn tail_ratio_to(&self, reference: &MarginalModel) -> std::result::Result<f64, String> {
        use std::cmp::Ordering::*;
        // (rank, then a heaviness key: larger key = heavier) for the generic case
        fn rank(f: &Family) -> u8 {
            match f {
                Family::Pareto { .. } => 0,
                Family::LogNormal { .. } => 1,
                Family::Weibullian { .. } | Family::Exponential { .. } => 2,
            }
        }
        fn stretched(f: &Family) -> (f64, f64) {
            match *f {
                Family::Weibullian { rate, shape } => (rate, shape),
                Family::Exponential { rate } => (rate, 1.0),
                _ => unreachable!(),
            }
        }
        let (me, re) = (&self.family, &reference.family);
        match rank(me).cmp(&rank(re)) {
            Greater => return Ok(0.0),
            Less => return Err(format!("{} has a heavier tail family than {}", self.name(), reference.name())),
            Equal => {}
        }
        match (*me, *re) {
            (Family::Pareto { alpha: a, scale: s }, Family::Pareto { alpha: a1, scale: s1 }) => {
                if a > a1 {
                    Ok(0.0)
                } else if a < a1 {
                    Err(format!("tail index {a} < reference index {a1}"))
                } else {
                    Ok((s / s1).powf(a))
                }
            }
            (Family::LogNormal { mu, sigma }, Family::LogNormal { mu: mu1, sigma: sigma1 }) => {
                if sigma < sigma1 || (sigma == sigma1 && mu < mu1) {
                    Ok(0.0)
                } else if sigma == sigma1 && mu == mu1 {
                    Ok(1.0)
                } else {
                    Err(format!("(mu, sigma) = ({mu}, {sigma}) dominates the reference ({mu1}, {sigma1})"))
                }
            }
            _ => {
                let (rate, shape) = stretched(me);
                let (rate1, shape1) = stretched(re);
                if shape > shape1 || (shape == shape1 && rate > rate1) {
                    Ok(0.0)
                } else if shape == shape1 && rate == rate1 {
                    Ok(1.0)
                } else {
                    Err(format!("(rate, shape) = ({rate}, {shape}) dominates the reference ({rate1}, {shape1})"))
                }
            }
        }
    }
}

/// Tail-equivalence constants `lambda_i = lim P(X_i > t) / P(X_1 > t)` and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaWeights {
    pub lambda: Vec<f64>,
    pub lambda_tilde: f64,
}

/// Computes `lambda_i` for every risk against the reference `models[0]`.
pub fn lambda_weights(models: &[MarginalModel]) -> Result<LambdaWeights> {
    let Some(reference) = models.first() else {
        return validation("at least one marginal is required");
    };
    let mut lambda = Vec::with_capacity(models.len());
    for (index, m) in models.iter().enumerate() {
        let l = m
            .tail_ratio_to(reference)
            .map_err(|reason| Error::InvalidOrdering { index, reason })?;
        lambda.push(l);
    }
    let lambda_tilde = lambda.iter().sum();
    Ok(LambdaWeights { lambda, lambda_tilde })
}
