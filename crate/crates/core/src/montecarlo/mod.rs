//! Monte Carlo estimators of `P(L(C) > t)`: crude indicators, smoothing over `C_1`, and
//! Pareto importance sampling. All estimators are bit-reproducible for a fixed
//! `(seed, workers, samples)`.

pub mod diagnostics;
mod stream;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Open01;
use statrs::function::beta::inv_beta_reg;

use crate::aggregation::{sort_descending, LcSampler};
use crate::dependence::Scenario;
use crate::error::{domain, Error, Result};
use crate::marginals::Family;

pub(crate) use stream::run_workers;

/// Smallest sample size accepted by [`crude`].
pub const MIN_CRUDE_SAMPLES: usize = 1000;
/// Below this many exceedances the crude interval is exact binomial.
const EXACT_CI_BELOW: u64 = 10;
pub(crate) const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, workers: default_workers() }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Crude,
    ConditionalC1,
    ImportancePareto,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Crude => "crude",
            Method::ConditionalC1 => "conditional",
            Method::ImportancePareto => "is",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crude" => Ok(Method::Crude),
            "conditional" => Ok(Method::ConditionalC1),
            "is" => Ok(Method::ImportancePareto),
            other => Err(Error::Validation(format!("unknown method {other:?}; expected crude, conditional or is"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub point: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n_samples: usize,
    pub method: Method,
    pub seed: u64,
    pub workers: usize,
    /// Effective sample size of the importance weights, when they are used.
    pub ess: Option<f64>,
}

/// Running sums of a per-replicate statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
    pub nonzero: u64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, y: f64) {
        self.n += 1;
        self.sum += y;
        self.sum_sq += y * y;
        self.nonzero += u64::from(y != 0.0);
    }

    pub fn merge(parts: impl IntoIterator<Item = Moments>) -> Moments {
        parts.into_iter().fold(Moments::default(), |a, b| Moments {
            n: a.n + b.n,
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
            nonzero: a.nonzero + b.nonzero,
        })
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Exact binomial (Clopper-Pearson) interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> (f64, f64) {
    let a = 0.5 * (1.0 - level);
    let (kf, nf) = (k as f64, n as f64);
    let lo = match k {
        0 => 0.0,
        k if k == n => a.powf(1.0 / nf),
        _ => inv_beta_reg(kf, nf - kf + 1.0, a),
    };
    let hi = match k {
        k if k == n => 1.0,
        0 => 1.0 - a.powf(1.0 / nf),
        _ => inv_beta_reg(kf + 1.0, nf - kf, 1.0 - a),
    };
    (lo, hi)
}

fn clt_interval(point: f64, stderr: f64) -> (f64, f64) {
    ((point - Z95 * stderr).max(0.0), (point + Z95 * stderr).min(1.0))
}

fn check_t(t: f64) -> Result<()> {
    if t.is_nan() {
        return domain("threshold is NaN");
    }
    Ok(())
}

fn finish(m: Moments, method: Method, cfg: &McConfig, ci95: (f64, f64), ess: Option<f64>) -> TailEstimate {
    let point = m.mean();
    TailEstimate { point, stderr: m.stderr(), ci95, n_samples: m.n as usize, method, seed: cfg.seed, workers: cfg.workers, ess }
}

/// Mean of the indicators `1{L(C) > t}`.
pub fn crude(scenario: &Scenario, t: f64, cfg: &McConfig) -> Result<TailEstimate> {
    check_t(t)?;
    if cfg.samples < MIN_CRUDE_SAMPLES {
        return Err(Error::SampleSize { needed: MIN_CRUDE_SAMPLES, got: cfg.samples });
    }
    let parts = run_workers(cfg, Moments::default, |rng, count, acc| {
        let mut s = LcSampler::new(scenario);
        for _ in 0..count {
            acc.push(f64::from(u8::from(s.draw(rng) > t)));
        }
    });
    let m = Moments::merge(parts);
    let ci = if m.nonzero < EXACT_CI_BELOW {
        clopper_pearson(m.nonzero, m.n, 0.95)
    } else {
        clt_interval(m.mean(), m.stderr())
    };
    Ok(finish(m, Method::Crude, cfg, ci, None))
}

/// `P(C_1 > (t - sum_{i >= 2} C_i X_(i)) / X_(1))` given everything but `C_1`.
#[inline]
pub(crate) fn smoothed_indicator(scenario: &Scenario, ordered: &[f64], weights: &[f64], t: f64) -> f64 {
    let rest: f64 = ordered[1..].iter().zip(&weights[1..]).map(|(x, c)| x * c).sum();
    let r = (t - rest) / ordered[0];
    if r <= 0.0 {
        1.0
    } else {
        scenario.weights().first().survival(r).clamp(0.0, 1.0)
    }
}

fn require_independent_weights(scenario: &Scenario, what: &str) -> Result<()> {
    if !scenario.weights().is_independent() {
        return Err(Error::Unsupported(format!("{what} needs mutually independent weights")));
    }
    Ok(())
}

/// Crude estimator smoothed over `C_1`. The stream is consumed exactly as by [`crude`],
/// so the two are paired on matched seeds.
pub fn conditional_c1(scenario: &Scenario, t: f64, cfg: &McConfig) -> Result<TailEstimate> {
    check_t(t)?;
    require_independent_weights(scenario, "the conditional estimator")?;
    if cfg.samples < 2 {
        return Err(Error::SampleSize { needed: 2, got: cfg.samples });
    }
    let parts = run_workers(cfg, Moments::default, |rng, count, acc| {
        let mut s = LcSampler::new(scenario);
        for _ in 0..count {
            s.draw_parts(rng);
            acc.push(smoothed_indicator(scenario, s.ordered(), s.weights(), t));
        }
    });
    let m = Moments::merge(parts);
    let ci = if m.sum == 0.0 {
        clopper_pearson(0, m.n, 0.95)
    } else {
        clt_interval(m.mean(), m.stderr())
    };
    Ok(finish(m, Method::ConditionalC1, cfg, ci, None))
}

/// Importance sampling with every `X_i` drawn from a Pareto law of index `proposal`
/// (default: half the smallest index) and reweighted by the exact likelihood ratio.
pub fn importance_pareto(scenario: &Scenario, t: f64, cfg: &McConfig, proposal: Option<f64>) -> Result<TailEstimate> {
    check_t(t)?;
    if !scenario.has_independent_risks() {
        return Err(Error::Unsupported("Pareto importance sampling needs independent risks".into()));
    }
    let params: Vec<(f64, f64)> = scenario
        .marginals()
        .iter()
        .map(|m| match m.family() {
            Family::Pareto { alpha, scale } => Ok((*alpha, *scale)),
            _ => Err(Error::Unsupported(format!("Pareto importance sampling needs Pareto risks, got {}", m.name()))),
        })
        .collect::<Result<_>>()?;
    let alpha_min = params.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let a_prop = proposal.unwrap_or(0.5 * alpha_min);
    if !(a_prop > 0.0 && a_prop < alpha_min) {
        return domain(format!("proposal index must lie in (0, {alpha_min}), got {a_prop}"));
    }
    if cfg.samples < 2 {
        return Err(Error::SampleSize { needed: 2, got: cfg.samples });
    }
    let ln_const: f64 = params.iter().map(|(a, _)| (a / a_prop).ln()).sum();
    let parts = run_workers(cfg, Moments::default, |rng, count, acc| {
        let n = params.len();
        let mut x = vec![0.0; n];
        let mut c = vec![0.0; scenario.k()];
        for _ in 0..count {
            let mut ln_lr = ln_const;
            for (xi, (a, s)) in x.iter_mut().zip(&params) {
                let u: f64 = rng.sample(Open01);
                let ln_ratio = -u.ln() / a_prop;
                *xi = s * ln_ratio.exp();
                ln_lr -= (a - a_prop) * ln_ratio;
            }
            sort_descending(&mut x);
            scenario.weights().sample_into(rng, &mut c);
            let l: f64 = x.iter().zip(&c).map(|(x, c)| x * c).sum();
            acc.push(if l > t { ln_lr.exp() } else { 0.0 });
        }
    });
    let m = Moments::merge(parts);
    let ess = if m.sum_sq > 0.0 { m.sum * m.sum / m.sum_sq } else { 0.0 };
    let point = m.mean();
    let se = m.stderr();
    let ci = ((point - Z95 * se).max(0.0), point + Z95 * se);
    Ok(finish(m, Method::ImportancePareto, cfg, ci, Some(ess)))
}

pub fn estimate(scenario: &Scenario, t: f64, method: Method, cfg: &McConfig) -> Result<TailEstimate> {
    match method {
        Method::Crude => crude(scenario, t, cfg),
        Method::ConditionalC1 => conditional_c1(scenario, t, cfg),
        Method::ImportancePareto => importance_pareto(scenario, t, cfg, None),
    }
}

/// `cfg.samples` realisations of `L(C)`, concatenated in worker order.
pub fn sample_lc_parallel(scenario: &Scenario, cfg: &McConfig) -> Vec<f64> {
    run_workers(cfg, Vec::new, |rng, count, out: &mut Vec<f64>| {
        let mut s = LcSampler::new(scenario);
        out.reserve_exact(count);
        out.extend((0..count).map(|_| s.draw(rng)));
    })
    .concat()
}
