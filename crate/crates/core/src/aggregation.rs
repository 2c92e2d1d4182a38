//! Upper order statistics and the weighted functional `L(C)`.

use rand::Rng;

use crate::dependence::Scenario;
use crate::error::{domain, Result};

/// Values sorted in descending order, `x_(1) >= ... >= x_(n) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSample {
    values: Vec<f64>,
}

impl OrderedSample {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }
}

pub fn order_stats(x: &[f64]) -> Result<OrderedSample> {
    if x.is_empty() {
        return domain("cannot order an empty sample");
    }
    if let Some(v) = x.iter().find(|v| !(**v > 0.0)) {
        return domain(format!("order statistics need positive entries, got {v}"));
    }
    let mut values = x.to_vec();
    sort_descending(&mut values);
    Ok(OrderedSample { values })
}

pub(crate) fn sort_descending(x: &mut [f64]) {
    x.sort_by(|a, b| b.total_cmp(a));
}

/// `sum_{i <= k} c_i x_(i)`. Negative weights are allowed.
pub fn lc(x: &OrderedSample, c: &[f64], k: usize) -> Result<f64> {
    if k > x.len() {
        return domain(format!("k = {k} exceeds the sample size {}", x.len()));
    }
    if c.len() < k {
        return domain(format!("{} weights given for k = {k}", c.len()));
    }
    Ok(lc_sorted(&x.values[..k], &c[..k]))
}

#[inline]
pub(crate) fn lc_sorted(desc: &[f64], c: &[f64]) -> f64 {
    desc.iter().zip(c).map(|(x, c)| x * c).sum()
}

/// Draws `L(C)` for a scenario, reusing its buffers between replicates.
#[derive(Debug, Clone)]
pub struct LcSampler<'a> {
    scenario: &'a Scenario,
    z: Vec<f64>,
    x: Vec<f64>,
    c: Vec<f64>,
}

impl<'a> LcSampler<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self { scenario, z: vec![0.0; scenario.n()], x: vec![0.0; scenario.n()], c: vec![0.0; scenario.k()] }
    }

    /// Draws risks (sorted descending) and weights, without forming `L(C)`.
    pub fn draw_parts<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.scenario.sample_risks_into(rng, &mut self.z, &mut self.x);
        sort_descending(&mut self.x);
        self.scenario.weights().sample_into(rng, &mut self.c);
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        self.draw_parts(rng);
        self.value()
    }

    /// `L(C)` for the last draw.
    pub fn value(&self) -> f64 {
        lc_sorted(&self.x, &self.c)
    }

    /// Order statistics of the last draw.
    pub fn ordered(&self) -> &[f64] {
        &self.x
    }

    /// Weights of the last draw.
    pub fn weights(&self) -> &[f64] {
        &self.c
    }
}

/// `count` independent realisations of `L(C)`.
pub fn sample_lc<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R, count: usize) -> Vec<f64> {
    let mut s = LcSampler::new(scenario);
    (0..count).map(|_| s.draw(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::Dependence;
    use crate::marginals::MarginalModel;
    use crate::weights::{WeightModel, WeightVectorSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn order_stats_examples() {
        assert_eq!(order_stats(&[1.0, 3.0, 2.0]).unwrap().as_slice(), &[3.0, 2.0, 1.0]);
        assert_eq!(order_stats(&[5.0, 5.0, 5.0]).unwrap().as_slice(), &[5.0, 5.0, 5.0]);
        assert_eq!(order_stats(&[7.0]).unwrap().as_slice(), &[7.0]);
        assert!(order_stats(&[1.0, 0.0]).is_err());
        assert!(order_stats(&[]).is_err());
    }

    #[test]
    fn lc_examples() {
        let x = order_stats(&[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(lc(&x, &[1.0, 1.0], 2).unwrap(), 5.0);
        assert_eq!(lc(&x, &[1.0, 0.0, 0.0], 3).unwrap(), 3.0);
        assert!((lc(&x, &[0.5, 0.25, 0.1], 3).unwrap() - 2.1).abs() < 1e-15);
        assert!(lc(&x, &[1.0; 4], 4).is_err());
        assert_eq!(lc(&x, &[1.0, -1.0], 2).unwrap(), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn lc_is_monotone(
            xs in prop::collection::vec(0.01f64..100.0, 1..8),
            cs in prop::collection::vec(0.0f64..2.0, 8),
            bump in 0.0f64..5.0,
            pick in 0usize..8,
        ) {
            let n = xs.len();
            let x = order_stats(&xs).unwrap();
            let base = lc(&x, &cs, n).unwrap();
            let i = pick % n;
            let mut c2 = cs.clone();
            c2[i] += bump;
            prop_assert!(lc(&x, &c2, n).unwrap() >= base);
            let mut xs2 = xs.clone();
            xs2[i] += bump;
            prop_assert!(lc(&order_stats(&xs2).unwrap(), &cs, n).unwrap() >= base - 1e-12 * base.abs());
        }

        #[test]
        fn unit_weights_sum_the_k_largest(xs in prop::collection::vec(0.01f64..1e3, 1..20), kk in 1usize..20) {
            let k = kk.min(xs.len());
            let mut sorted = xs.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let oracle: f64 = sorted.iter().take(k).sum();
            let v = lc(&order_stats(&xs).unwrap(), &vec![1.0; k], k).unwrap();
            prop_assert!((v - oracle).abs() <= 1e-12 * oracle);
        }
    }

    fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn single_risk_unit_weight_reproduces_marginal() {
        let m = MarginalModel::lognormal(0.0, 1.0).unwrap();
        let s = Scenario::new(
            vec![m],
            Dependence::Independent,
            WeightVectorSpec::independent(vec![WeightModel::degenerate(1.0).unwrap()]).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = ks_statistic(sample_lc(&s, &mut rng, 1_000_000), |x| m.cdf(x));
        assert!(d < 0.002, "KS {d}");
    }

    #[test]
    fn first_weight_only_gives_the_maximum() {
        let m = MarginalModel::pareto(2.0, 1.0).unwrap();
        let w = vec![WeightModel::degenerate(1.0).unwrap(), WeightModel::degenerate(0.0).unwrap(), WeightModel::degenerate(0.0).unwrap()];
        let s = Scenario::new(vec![m; 4], Dependence::Independent, WeightVectorSpec::independent(w).unwrap()).unwrap();
        let mut sampler = LcSampler::new(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let v = sampler.draw(&mut rng);
            assert_eq!(v, sampler.ordered().iter().copied().fold(0.0, f64::max));
        }
    }

    #[test]
    fn exponential_pair_mean() {
        let m = MarginalModel::exponential(1.0).unwrap();
        let w = WeightVectorSpec::independent(vec![WeightModel::degenerate(1.0).unwrap(); 2]).unwrap();
        let s = Scenario::new(vec![m, m], Dependence::Independent, w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xs = sample_lc(&s, &mut rng, 1_000_000);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 2.0).abs() < 3.0 * (var / n).sqrt(), "mean {mean}");
    }

    #[test]
    fn bonferroni_sandwich_for_the_maximum() {
        let ms = vec![MarginalModel::pareto(2.0, 2.0).unwrap(), MarginalModel::pareto(2.0, 1.5).unwrap(), MarginalModel::pareto(2.0, 1.0).unwrap()];
        let w = vec![WeightModel::degenerate(1.0).unwrap(), WeightModel::degenerate(0.0).unwrap(), WeightModel::degenerate(0.0).unwrap()];
        let s = Scenario::new(ms.clone(), Dependence::Independent, WeightVectorSpec::independent(w).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let xs = sample_lc(&s, &mut rng, 400_000);
        for t in [3.0, 5.0, 10.0] {
            let tails: Vec<f64> = ms.iter().map(|m| m.tail(t)).collect();
            let upper: f64 = tails.iter().sum();
            let pairs: f64 = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).map(|(i, j)| tails[i] * tails[j]).sum();
            let p = xs.iter().filter(|&&x| x > t).count() as f64 / xs.len() as f64;
            let se = (p * (1.0 - p) / xs.len() as f64).sqrt();
            assert!(p <= upper + 3.0 * se && p >= upper - pairs - 3.0 * se, "t={t}");
        }
    }
}
