//! Value-at-Risk and Expected Shortfall: asymptotic values obtained by inverting the tail
//! approximations, and empirical values from samples.

use crate::asymptotics::approx_unguarded;
use crate::dependence::Scenario;
use crate::error::{domain, Error, Result};
use crate::oracles::scale_mixture_quantile;

/// Levels below this are outside the asymptotic regime and get a warning.
pub const DEFAULT_P_GUARD: f64 = 0.99;
/// Empirical estimates need at least this many expected exceedances, `N (1 - p)`.
pub const MIN_EXCEEDANCES: f64 = 5.0;
pub const ES_TAG: &str = "first-order ES≈VaR (Gumbel MDA)";

#[derive(Debug, Clone, PartialEq)]
pub struct VarReport {
    pub p: f64,
    /// The headline value: the quantile of `C_1 X_1` for Gumbel scenarios, the root of
    /// the approximation otherwise.
    pub value: f64,
    /// `t` with `approx(t) = 1 - p`.
    pub approx_root: f64,
    /// `t` with `P(C_1 X_1 > t) = 1 - p`, by quadrature (Gumbel scenarios only).
    pub c1x1_quantile: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsReport {
    pub value: f64,
    pub var: VarReport,
    pub tag: &'static str,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("level p must lie in (0, 1), got {p}"));
    }
    Ok(())
}

/// `ln approx(e^x)`, or `+inf` where the approximation is undefined (small thresholds).
fn ln_approx_at(scenario: &Scenario, ln_t: f64) -> Result<f64> {
    match approx_unguarded(scenario, ln_t.exp()) {
        Ok(r) => Ok(r.ln_value),
        Err(Error::Domain(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Root of `approx(t) = q` by bisection in `ln t`.
fn invert_approx(scenario: &Scenario, q: f64) -> Result<f64> {
    let target = q.ln();
    let start = scenario.reference().tail_quantile(q)?.max(f64::MIN_POSITIVE).ln();
    let (mut lo, mut hi) = (start - 1.0, start + 1.0);
    let mut step = 1.0;
    while ln_approx_at(scenario, lo)? < target {
        step *= 2.0;
        lo -= step;
        if lo < -700.0 {
            return Err(Error::Numeric { what: "bracketing the approximation root from below".into(), achieved: lo });
        }
    }
    step = 1.0;
    while ln_approx_at(scenario, hi)? > target {
        step *= 2.0;
        hi += step;
        if hi > 700.0 {
            return Err(Error::Numeric { what: "bracketing the approximation root from above".into(), achieved: hi });
        }
    }
    while hi - lo > 1e-14 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if ln_approx_at(scenario, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

pub fn var_asymptotic(scenario: &Scenario, p: f64) -> Result<VarReport> {
    var_asymptotic_with(scenario, p, DEFAULT_P_GUARD)
}

/// VaR from the approximation, with a warning when `p` is below `guard`.
pub fn var_asymptotic_with(scenario: &Scenario, p: f64, guard: f64) -> Result<VarReport> {
    check_p(p)?;
    let q = 1.0 - p;
    let mut warnings = Vec::new();
    if p < guard {
        warnings.push(format!("p = {p} is below {guard}: outside the asymptotic regime"));
    }
    let approx_root = invert_approx(scenario, q)?;
    let c1x1_quantile = if scenario.is_frechet() {
        None
    } else {
        Some(scale_mixture_quantile(scenario.weights().first(), scenario.reference(), q)?)
    };
    Ok(VarReport { p, value: c1x1_quantile.unwrap_or(approx_root), approx_root, c1x1_quantile, warnings })
}

/// `ES_p ~ VaR_p` for Gumbel scenarios; regularly varying tails have `ES/VaR -> alpha/(alpha-1)`.
pub fn es_asymptotic(scenario: &Scenario, p: f64) -> Result<EsReport> {
    if scenario.is_frechet() {
        return Err(Error::Unsupported(
            "asymptotic ES is only available for Gumbel scenarios; use the empirical estimator".into(),
        ));
    }
    let var = var_asymptotic(scenario, p)?;
    Ok(EsReport { value: var.value, var, tag: ES_TAG })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalTail {
    pub p: f64,
    pub var: f64,
    pub es: f64,
    pub n: usize,
}

/// Empirical VaR (higher order statistic, index `ceil((N-1) p)`) and ES (mean strictly
/// above VaR, or VaR itself when nothing lies above).
pub fn empirical_tail(samples: &[f64], p: f64) -> Result<EmpiricalTail> {
    check_p(p)?;
    let n = samples.len();
    let needed = (MIN_EXCEEDANCES / (1.0 - p) - 1e-9).ceil() as usize;
    if n < needed {
        return Err(Error::SampleSize { needed, got: n });
    }
    if samples.iter().any(|x| x.is_nan()) {
        return domain("samples contain NaN");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let idx = (((n - 1) as f64) * p).ceil() as usize;
    let var = sorted[idx.min(n - 1)];
    let above = &sorted[sorted.partition_point(|&x| x <= var)..];
    let es = if above.is_empty() { var } else { above.iter().sum::<f64>() / above.len() as f64 };
    Ok(EmpiricalTail { p, var, es, n })
}

pub fn var_empirical(samples: &[f64], p: f64) -> Result<f64> {
    Ok(empirical_tail(samples, p)?.var)
}

pub fn es_empirical(samples: &[f64], p: f64) -> Result<f64> {
    Ok(empirical_tail(samples, p)?.es)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::approx;
    use crate::dependence::{CorrelationMatrix, Dependence};
    use crate::marginals::MarginalModel;
    use crate::weights::{WeightModel, WeightVectorSpec};
    use proptest::prelude::*;

    fn single(m: MarginalModel) -> Scenario {
        Scenario::new(vec![m], Dependence::Independent, WeightVectorSpec::independent(vec![WeightModel::degenerate(1.0).unwrap()]).unwrap()).unwrap()
    }

    fn lcr() -> Scenario {
        let ln = MarginalModel::lognormal(0.0, 1.0).unwrap();
        let corr = CorrelationMatrix::equicorrelated(5, 0.3).unwrap();
        let w = WeightVectorSpec::independent(vec![WeightModel::beta(2.0, 3.0, 1.0).unwrap(); 3]).unwrap();
        Scenario::new(vec![ln; 5], Dependence::Gaussian(corr), w).unwrap()
    }

    #[test]
    fn empirical_examples() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        let e = empirical_tail(&xs, 0.95).unwrap();
        assert_eq!((e.var, e.es), (96.0, 98.5));
        let c = vec![3.5; 1000];
        assert_eq!((var_empirical(&c, 0.99).unwrap(), es_empirical(&c, 0.99).unwrap()), (3.5, 3.5));
        assert!(matches!(var_empirical(&xs, 0.99), Err(Error::SampleSize { needed: 500, got: 100 })));
        assert!(var_empirical(&xs, 1.0).is_err());
    }

    #[test]
    fn pareto_var_example() {
        let s = single(MarginalModel::pareto(2.0, 1.0).unwrap());
        let r = var_asymptotic(&s, 0.9999).unwrap();
        assert!((r.value - 100.0).abs() < 1e-9, "{}", r.value);
        assert!(r.c1x1_quantile.is_none() && r.warnings.is_empty());
        assert_eq!(var_asymptotic(&s, 0.9).unwrap().warnings.len(), 1);
        assert!(matches!(es_asymptotic(&s, 0.999), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lcr_var_is_the_c1x1_quantile_and_es_matches() {
        let s = lcr();
        let r = var_asymptotic(&s, 0.999).unwrap();
        let q = r.c1x1_quantile.unwrap();
        assert_eq!(r.value, q);
        let p = crate::oracles::scale_mixture_tail(s.weights().first(), s.reference(), q).unwrap();
        assert!((p / 1e-3 - 1.0).abs() < 1e-8, "{p}");
        // the approximation carries lambda~ = 5, so its root sits further out
        assert!(r.approx_root > q);
        let e = es_asymptotic(&s, 0.9999).unwrap();
        assert_eq!(e.value, var_asymptotic(&s, 0.9999).unwrap().value);
        assert_eq!(e.tag, ES_TAG);
    }

    #[test]
    fn bisection_residual() {
        for s in [single(MarginalModel::pareto(1.5, 2.0).unwrap()), lcr()] {
            for p in [0.99, 0.999, 0.99999] {
                let r = var_asymptotic(&s, p).unwrap();
                let v = approx_unguarded(&s, r.approx_root).unwrap().value;
                assert!((v - (1.0 - p)).abs() <= 1e-8 * (1.0 - p), "p={p}: {v}");
            }
        }
        assert!(approx(&lcr(), var_asymptotic(&lcr(), 0.9999).unwrap().approx_root).is_ok());
    }

    #[test]
    fn var_is_nondecreasing_in_p() {
        let s = lcr();
        let ps = [0.99, 0.995, 0.999, 0.9995, 0.9999];
        let v: Vec<f64> = ps.iter().map(|&p| var_asymptotic(&s, p).unwrap().value).collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn single_risk_reduces_to_the_marginal_quantile(family in 0usize..4, a in 0.5f64..3.0, b in 0.5f64..2.0, lp in 2.0f64..8.0) {
            let m = match family {
                0 => MarginalModel::pareto(a, b).unwrap(),
                1 => MarginalModel::lognormal(a - 1.0, b).unwrap(),
                2 => MarginalModel::weibullian(a, b / 2.0).unwrap(),
                _ => MarginalModel::exponential(a).unwrap(),
            };
            let p = 1.0 - 10f64.powf(-lp);
            let v = var_asymptotic(&single(m), p).unwrap().value;
            let q = m.quantile(p).unwrap();
            prop_assert!((v / q - 1.0).abs() < 1e-8, "{} vs {q}", v);
        }

        #[test]
        fn es_dominates_var(xs in prop::collection::vec(-1e3f64..1e3, 100..400), p in 0.5f64..0.95) {
            let e = empirical_tail(&xs, p).unwrap();
            prop_assert!(e.es >= e.var);
        }
    }
}
