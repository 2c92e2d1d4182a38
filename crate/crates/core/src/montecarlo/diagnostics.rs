//! Asymptotic-independence checks, simulated tail curves against the approximations, and
//! the one-big-jump sum decomposition.

use std::collections::BTreeMap;
use std::fmt;

use crate::aggregation::LcSampler;
use crate::asymptotics::{approx, ApproxReport};
use crate::dependence::{Dependence, Scenario};
use crate::error::{validation, Error, Result};
use crate::grid::GeometricGrid;
use crate::marginals::{Family, MarginalModel};
use crate::oracles::{bivariate_normal_ln_sf, max_expectation_ln, scale_mixture_tail_with, MaxLaw};
use crate::special::normal_isf_ln;

use super::{estimate, run_workers, smoothed_indicator, McConfig, Method, TailEstimate, Z95};

/// Quadrature tolerance of the condition ratios.
const CONDITION_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub t_grid: GeometricGrid,
    /// Threshold multiplier used for pairs without an entry in `l_pairs`.
    pub l_default: f64,
    /// Per-pair multipliers keyed by zero-based `(i, j)` with `i < j`.
    pub l_pairs: BTreeMap<(usize, usize), f64>,
    /// Offsets `x` in the shifted joint exceedance `C* X_j > a_1(t) x`.
    pub x_values: Vec<f64>,
    /// A ratio sequence is taken to vanish when it decreases and ends below this fraction
    /// of its first value.
    pub decrease_factor: f64,
}

impl DiagnosticsConfig {
    /// Grid from the `1e-3` to the `1e-9` tail quantile of the reference risk.
    pub fn default_for(scenario: &Scenario) -> Result<Self> {
        let x1 = scenario.reference();
        Ok(Self {
            t_grid: GeometricGrid::new(x1.tail_quantile(1e-3)?, x1.tail_quantile(1e-9)?, 7)?,
            l_default: 1.0,
            l_pairs: BTreeMap::new(),
            x_values: vec![0.5, 1.0, 2.0],
            decrease_factor: 0.1,
        })
    }

    pub fn check(&self) -> Result<()> {
        self.t_grid.check()?;
        let ls = std::iter::once(&self.l_default).chain(self.l_pairs.values());
        if let Some(l) = ls.into_iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return validation(format!("pair threshold multipliers must be positive, got {l}"));
        }
        if let Some((i, j)) = self.l_pairs.keys().find(|(i, j)| i >= j) {
            return validation(format!("pair ({}, {}) must have i < j", i + 1, j + 1));
        }
        if let Some(x) = self.x_values.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return validation(format!("x values must be positive, got {x}"));
        }
        if !(self.decrease_factor > 0.0 && self.decrease_factor < 1.0) {
            return validation(format!("decrease factor must lie in (0, 1), got {}", self.decrease_factor));
        }
        Ok(())
    }

    pub fn l(&self, i: usize, j: usize) -> f64 {
        self.l_pairs.get(&(i.min(j), i.max(j))).copied().unwrap_or(self.l_default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `P(C~ X_i > t, C~ X_j > t) / P(X_1 > t)`, `C~ = max(C_2..C_k)`.
    JointTail,
    /// `P(C* X_i > t, C* X_j > a_1(t) x) / P(C_1 X_1 > t)`, `C* = max(C_1..C_k)`.
    ShiftedJointTail,
    /// `P(C* X_i > L a_1(t), C* X_j > L a_1(t)) / P(C_1 X_1 > t)`.
    AuxScaledJointTail,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::JointTail => "joint-tail",
            Condition::ShiftedJointTail => "shifted-joint-tail",
            Condition::AuxScaledJointTail => "aux-scaled-joint-tail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConsistentWithZero,
    NonVanishing,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ConsistentWithZero => "consistent-with-→0",
            Verdict::NonVanishing => "non-vanishing",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRow {
    pub condition: Condition,
    /// One-based risk indices.
    pub i: usize,
    pub j: usize,
    pub x: Option<f64>,
    pub l: Option<f64>,
    pub t: Vec<f64>,
    pub ratios: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub rows: Vec<ConditionRow>,
    /// One-based pairs left out because a risk has `lambda = 0`.
    pub excluded_pairs: Vec<(usize, usize)>,
    /// No pair to check (a single risk).
    pub vacuous: bool,
}

impl ConditionReport {
    pub fn all_consistent(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == Verdict::ConsistentWithZero)
    }
}

pub fn verdict(ratios: &[f64], decrease_factor: f64) -> Verdict {
    let decreasing = ratios.windows(2).all(|w| w[1] <= w[0]);
    match (decreasing, ratios.first(), ratios.last()) {
        (true, Some(first), Some(last)) if *last <= decrease_factor * first => Verdict::ConsistentWithZero,
        _ => Verdict::NonVanishing,
    }
}

/// Standard normal score of the event `X > u` under the Gaussian copula.
fn normal_score(m: &MarginalModel, u: f64) -> f64 {
    match m.family() {
        Family::LogNormal { mu, sigma } if u > 0.0 => (u.ln() - mu) / sigma,
        _ => normal_isf_ln(m.ln_tail(u)),
    }
}

/// `ln P(X_i > u, X_j > v)`.
fn ln_joint_exceedance(scenario: &Scenario, i: usize, j: usize, u: f64, v: f64) -> f64 {
    let (mi, mj) = (&scenario.marginals()[i], &scenario.marginals()[j]);
    let (li, lj) = (mi.ln_tail(u), mj.ln_tail(v));
    if li == f64::NEG_INFINITY || lj == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    match scenario.dependence() {
        Dependence::Independent => li + lj,
        Dependence::Gaussian(corr) => {
            if li == 0.0 {
                return lj;
            }
            if lj == 0.0 {
                return li;
            }
            bivariate_normal_ln_sf(normal_score(mi, u), normal_score(mj, v), corr.get(i, j))
                .expect("validated correlations lie in (-1, 1)")
        }
    }
}

/// `ln P(W X_i > u, W X_j > v)` for a weight maximum `W` independent of the risks.
fn ln_mixed_joint(scenario: &Scenario, law: Option<&MaxLaw<'_>>, i: usize, j: usize, u: f64, v: f64) -> Result<f64> {
    let Some(law) = law else {
        return Ok(f64::NEG_INFINITY);
    };
    let ln_g = |c: f64| if c > 0.0 { ln_joint_exceedance(scenario, i, j, u / c, v / c) } else { f64::NEG_INFINITY };
    let mut kinks = Vec::new();
    for (idx, y) in [(i, u), (j, v)] {
        if let Family::Pareto { scale, .. } = scenario.marginals()[idx].family() {
            kinks.push(y / scale);
        }
    }
    Ok(max_expectation_ln(law, &ln_g, &kinks, CONDITION_REL_TOL)?.0)
}

fn ratios_from_ln(num: &[f64], den: &[f64]) -> Vec<f64> {
    num.iter().zip(den).map(|(n, d)| (n - d).exp()).collect()
}

/// Evaluates the asymptotic-independence ratios on the configured grid, by quadrature
/// over the weight maxima.
pub fn check_conditions(scenario: &Scenario, cfg: &DiagnosticsConfig) -> Result<ConditionReport> {
    cfg.check()?;
    let n = scenario.n();
    let lambda = &scenario.lambda().lambda;
    let ts = cfg.t_grid.values();
    let comps = scenario.weights().components();
    let coupling = scenario.weights().coupling();
    let mut report = ConditionReport { rows: Vec::new(), excluded_pairs: Vec::new(), vacuous: n < 2 };
    if report.vacuous {
        return Ok(report);
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let row = |condition, i: usize, j: usize, x, l, ratios: Vec<f64>| ConditionRow {
        condition,
        i: i + 1,
        j: j + 1,
        x,
        l,
        t: ts.clone(),
        verdict: verdict(&ratios, cfg.decrease_factor),
        ratios,
    };

    if scenario.is_frechet() {
        // weights beyond k are zero, so C~ vanishes when k = 1
        let tilde = if comps.len() > 1 { Some(MaxLaw::new(comps[1..].iter().collect(), coupling)?) } else { None };
        let den: Vec<f64> = ts.iter().map(|&t| scenario.reference().ln_tail(t)).collect();
        for (i, j) in pairs {
            if lambda[i] == 0.0 || lambda[j] == 0.0 {
                report.excluded_pairs.push((i + 1, j + 1));
                continue;
            }
            let num = ts.iter().map(|&t| ln_mixed_joint(scenario, tilde.as_ref(), i, j, t, t)).collect::<Result<Vec<_>>>()?;
            report.rows.push(row(Condition::JointTail, i, j, None, None, ratios_from_ln(&num, &den)));
        }
        return Ok(report);
    }

    let c1 = scenario.weights().first();
    let x1 = scenario.reference();
    let star = MaxLaw::new(comps.iter().collect(), coupling)?;
    let omega = c1.endpoint();
    let den = ts.iter().map(|&t| Ok(scale_mixture_tail_with(c1, x1, t, CONDITION_REL_TOL)?.ln_value)).collect::<Result<Vec<_>>>()?;
    let a1 = ts.iter().map(|&t| Ok(omega * x1.auxiliary(t / omega)?)).collect::<Result<Vec<f64>>>()?;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for &x in &cfg.x_values {
                let num = ts
                    .iter()
                    .zip(&a1)
                    .map(|(&t, &a)| ln_mixed_joint(scenario, Some(&star), i, j, t, a * x))
                    .collect::<Result<Vec<_>>>()?;
                report.rows.push(row(Condition::ShiftedJointTail, i, j, Some(x), None, ratios_from_ln(&num, &den)));
            }
        }
    }
    for (i, j) in pairs {
        let l = cfg.l(i, j);
        let num = a1.iter().map(|&a| ln_mixed_joint(scenario, Some(&star), i, j, l * a, l * a)).collect::<Result<Vec<_>>>()?;
        report.rows.push(row(Condition::AuxScaledJointTail, i, j, None, Some(l), ratios_from_ln(&num, &den)));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub t: f64,
    pub estimate: TailEstimate,
    pub approx: Option<ApproxReport>,
    pub ratio: Option<f64>,
    pub ratio_ci: Option<(f64, f64)>,
    pub caveats: Vec<String>,
}

/// Simulated `P(L(C) > t)` against the first-order approximation along the grid. Every
/// point reuses the same seed, so neighbouring rows share their noise.
pub fn tail_curve(scenario: &Scenario, t_values: &[f64], method: Method, mc: &McConfig) -> Result<Vec<CurveRow>> {
    t_values
        .iter()
        .map(|&t| {
            let est = estimate(scenario, t, method, mc)?;
            let mut caveats = Vec::new();
            let approx = match approx(scenario, t) {
                Ok(r) => {
                    caveats.extend(r.caveats.iter().cloned());
                    Some(r)
                }
                Err(Error::Domain(msg)) => {
                    caveats.push(format!("no approximation: {msg}"));
                    None
                }
                Err(e) => return Err(e),
            };
            let (ratio, ratio_ci) = match &approx {
                Some(r) if r.value > 0.0 => (Some(est.point / r.value), Some((est.ci95.0 / r.value, est.ci95.1 / r.value))),
                _ => (None, None),
            };
            Ok(CurveRow { t, estimate: est, approx, ratio, ratio_ci, caveats })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub point: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumFormReport {
    pub t: f64,
    /// Estimates of `P(C_i X_(i) > t)` for `i = 1..k`.
    pub terms: Vec<PointEstimate>,
    pub sum: PointEstimate,
    /// Estimate of `P(L(C) > t)`.
    pub lc: PointEstimate,
    /// `sum / lc` with a delta-method interval.
    pub ratio: f64,
    pub ratio_ci: (f64, f64),
    /// Each term's share of the sum.
    pub shares: Vec<f64>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Default)]
struct SumAcc {
    n: u64,
    terms: Vec<(f64, f64)>,
    s: f64,
    ss: f64,
    l: f64,
    ll: f64,
    sl: f64,
}

/// Compares `sum_i P(C_i X_(i) > t)` with `P(L(C) > t)` on one stream, conditioning on the
/// risks for the per-index terms and on everything but `C_1` for `L(C)`.
pub fn sum_form_check(scenario: &Scenario, t: f64, mc: &McConfig) -> Result<SumFormReport> {
    if !scenario.weights().is_independent() {
        return Err(Error::Unsupported("the sum-form check needs mutually independent weights".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return validation(format!("threshold must be positive and finite, got {t}"));
    }
    if mc.samples < 2 {
        return Err(Error::SampleSize { needed: 2, got: mc.samples });
    }
    let k = scenario.k();
    let comps = scenario.weights().components();
    let parts = run_workers(mc, || SumAcc { terms: vec![(0.0, 0.0); k], ..Default::default() }, |rng, count, acc| {
        let mut s = LcSampler::new(scenario);
        for _ in 0..count {
            s.draw_parts(rng);
            let x = s.ordered();
            let mut sum = 0.0;
            for (i, term) in acc.terms.iter_mut().enumerate() {
                let z = comps[i].survival(t / x[i]);
                term.0 += z;
                term.1 += z * z;
                sum += z;
            }
            let l = smoothed_indicator(scenario, x, s.weights(), t);
            acc.n += 1;
            acc.s += sum;
            acc.ss += sum * sum;
            acc.l += l;
            acc.ll += l * l;
            acc.sl += sum * l;
        }
    });
    let mut tot = SumAcc { terms: vec![(0.0, 0.0); k], ..Default::default() };
    for p in parts {
        tot.n += p.n;
        for (a, b) in tot.terms.iter_mut().zip(&p.terms) {
            a.0 += b.0;
            a.1 += b.1;
        }
        tot.s += p.s;
        tot.ss += p.ss;
        tot.l += p.l;
        tot.ll += p.ll;
        tot.sl += p.sl;
    }
    let nf = tot.n as f64;
    let est = |sum: f64, sq: f64| {
        let mean = sum / nf;
        let var = ((sq - sum * mean) / (nf - 1.0)).max(0.0);
        PointEstimate { point: mean, stderr: (var / nf).sqrt() }
    };
    let terms: Vec<PointEstimate> = tot.terms.iter().map(|&(a, b)| est(a, b)).collect();
    let sum = est(tot.s, tot.ss);
    let lc = est(tot.l, tot.ll);
    let ratio = sum.point / lc.point;
    let cov = (tot.sl - tot.s * tot.l / nf) / (nf - 1.0) / nf;
    let var_ratio = (sum.stderr.powi(2) - 2.0 * ratio * cov + ratio * ratio * lc.stderr.powi(2)) / lc.point.powi(2);
    let half = Z95 * var_ratio.max(0.0).sqrt();
    let shares = terms.iter().map(|e| e.point / sum.point).collect();
    Ok(SumFormReport { t, terms, sum, lc, ratio, ratio_ci: (ratio - half, ratio + half), shares, n_samples: tot.n as usize })
}
