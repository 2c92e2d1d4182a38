//! Joint law of the risk vector: Gaussian copula over the marginals, the scenario
//! container, and the bivariate constant `eta(rho)` governing log-scale joint tails of
//! correlated lognormal pairs.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, validation, Error, Result};
use crate::marginals::{lambda_weights, LambdaWeights, MarginalModel, MdaClass};
use crate::weights::WeightVectorSpec;

const SYMMETRY_TOL: f64 = 1e-12;

/// Validated correlation matrix together with its lower Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    entries: Vec<f64>,
    factor: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return validation("correlation matrix is empty");
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return validation(format!("correlation matrix is not square: row {i} has {} entries, expected {n}", rows[i].len()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return validation("correlation matrix has non-finite entries");
        }
        for i in 0..n {
            for j in 0..i {
                if (rows[i][j] - rows[j][i]).abs() > SYMMETRY_TOL {
                    return validation(format!("correlation matrix is not symmetric at ({i}, {j})"));
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| (rows[i][i] - 1.0).abs() > SYMMETRY_TOL) {
            return validation(format!("correlation matrix diagonal entry ({i}, {i}) is {}, expected 1", rows[i][i]));
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j].abs() >= 1.0 {
                    return validation(format!("correlation ({i}, {j}) = {} must lie in (-1, 1)", rows[i][j]));
                }
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let chol = m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Validation("correlation matrix is not positive definite".into()))?;
        let l = chol.l();
        let factor = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| l[(i, j)]).collect();
        let entries = rows.iter().flatten().copied().collect();
        Ok(Self { n, entries, factor })
    }

    /// All off-diagonal entries equal to `rho`.
    pub fn equicorrelated(n: usize, rho: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { rho }).collect()).collect();
        Self::new(&rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Lower-triangular factor `L` with `L L^T` equal to the matrix.
    pub fn factor_rows(&self) -> Vec<Vec<f64>> {
        self.factor.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// `out = L z`.
    pub fn correlate(&self, z: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.factor[i * self.n..i * self.n + i + 1];
            out[i] = row.iter().zip(z).map(|(l, z)| l * z).sum();
        }
    }
}

/// Checks a correlation matrix and returns its lower Cholesky factor.
pub fn validate(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    Ok(CorrelationMatrix::new(rows)?.factor_rows())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dependence {
    Independent,
    Gaussian(CorrelationMatrix),
}

/// A complete experiment: risks, their dependence and the weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    marginals: Vec<MarginalModel>,
    dependence: Dependence,
    weights: WeightVectorSpec,
    lambda: LambdaWeights,
    mda: MdaClass,
}

impl Scenario {
    pub fn new(marginals: Vec<MarginalModel>, dependence: Dependence, weights: WeightVectorSpec) -> Result<Self> {
        let n = marginals.len();
        if n == 0 {
            return validation("a scenario needs at least one risk");
        }
        let k = weights.len();
        if k > n {
            return validation(format!("k = {k} weights exceed n = {n} risks"));
        }
        if let Dependence::Gaussian(corr) = &dependence {
            if corr.dim() != n {
                return validation(format!("correlation matrix is {0}x{0} but there are {n} risks", corr.dim()));
            }
        }
        let mda = marginals[0].mda_class();
        if let Some(i) = marginals.iter().position(|m| !m.mda_class().same_kind(&mda)) {
            return validation(format!(
                "mixed max-domains: risk 0 is {} but risk {i} is {}",
                mda.name(),
                marginals[i].mda_class().name()
            ));
        }
        let lambda = lambda_weights(&marginals)?;
        Ok(Self { marginals, dependence, weights, lambda, mda })
    }

    pub fn n(&self) -> usize {
        self.marginals.len()
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn marginals(&self) -> &[MarginalModel] {
        &self.marginals
    }

    /// The reference (heaviest) risk `X_1`.
    pub fn reference(&self) -> &MarginalModel {
        &self.marginals[0]
    }

    pub fn dependence(&self) -> &Dependence {
        &self.dependence
    }

    pub fn weights(&self) -> &WeightVectorSpec {
        &self.weights
    }

    pub fn lambda(&self) -> &LambdaWeights {
        &self.lambda
    }

    pub fn mda_class(&self) -> MdaClass {
        self.mda
    }

    pub fn is_frechet(&self) -> bool {
        matches!(self.mda, MdaClass::Frechet { .. })
    }

    pub fn has_independent_risks(&self) -> bool {
        matches!(self.dependence, Dependence::Independent)
    }

    /// One joint draw of the risks into `out`; `z` is scratch space of length `n`.
    pub fn sample_risks_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        match &self.dependence {
            Dependence::Independent => {
                for (o, m) in out.iter_mut().zip(&self.marginals) {
                    *o = m.sample(rng);
                }
            }
            Dependence::Gaussian(corr) => {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                corr.correlate(z, out);
                for (o, m) in out.iter_mut().zip(&self.marginals) {
                    *o = m.from_normal(*o);
                }
            }
        }
    }

    pub fn sample_risks<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut z = vec![0.0; self.n()];
        let mut out = vec![0.0; self.n()];
        self.sample_risks_into(rng, &mut z, &mut out);
        out
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho.abs() < 1.0) {
        return domain(format!("correlation must lie in (-1, 1), got {rho}"));
    }
    Ok(())
}

fn max_min_objective(rho: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    s.min(rho * s + (1.0 - rho * rho).sqrt() * c)
}

/// `max over theta of min(sin theta, rho sin theta + sqrt(1 - rho^2) cos theta)`.
///
/// Coarse grid of 10^4 points on `[0, 2 pi]`, then golden-section refinement of the best
/// cell to an absolute tolerance of 1e-9.
pub fn eta(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    const GRID: usize = 10_000;
    let h = std::f64::consts::TAU / GRID as f64;
    let best = (0..=GRID)
        .map(|i| (i, max_min_objective(rho, i as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let f = |th: f64| max_min_objective(rho, th);
    let (mut a, mut b) = ((best.0 as f64 - 1.0) * h, (best.0 as f64 + 1.0) * h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-9 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    Ok(best.1.max(f(0.5 * (a + b))).max(f1).max(f2))
}

/// `sqrt((1 + rho) / 2)`: the two sinusoids cross at `theta = pi/2 - arccos(rho)/2`,
/// where both equal this value.
pub fn eta_closed_form(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok((0.5 * (1.0 + rho)).sqrt())
}
