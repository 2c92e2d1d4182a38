//! First-order tail approximations for `P(L(C) > t)`: the Breiman product tail, the
//! regularly varying case `tail_1(t) E[C_1^alpha] lambda~_n`, and the Gumbel case
//! `lambda~_n P(C_1 X_1 > t)` with the endpoint Models A and B.

use statrs::function::gamma::ln_gamma;

use crate::dependence::Scenario;
use crate::error::{domain, Error, Result};
use crate::marginals::{MarginalModel, MdaClass};
use crate::weights::{EndpointClass, WeightModel};

/// Approximations are refused above this tail level.
pub const REFUSE_ABOVE: f64 = 1e-2;
/// Approximations carry a caveat above this tail level.
pub const CAVEAT_ABOVE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    FrechetMain,
    GumbelModelA,
    GumbelModelB,
    Breiman,
}

impl Formula {
    pub fn name(&self) -> &'static str {
        match self {
            Formula::FrechetMain => "frechet-main",
            Formula::GumbelModelA => "gumbel-model-a",
            Formula::GumbelModelB => "gumbel-model-b",
            Formula::Breiman => "breiman",
        }
    }
}

/// Quantities that entered an approximation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ApproxInputs {
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub omega: f64,
    pub p: Option<f64>,
    pub lambda_tilde: f64,
    /// `E[C_1^alpha]`.
    pub moment: Option<f64>,
    /// Auxiliary function at the rescaled threshold.
    pub aux: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    pub t: f64,
    pub value: f64,
    pub ln_value: f64,
    pub formula: Formula,
    pub inputs: ApproxInputs,
    pub caveats: Vec<String>,
}

impl ApproxReport {
    fn new(t: f64, ln_value: f64, formula: Formula, inputs: ApproxInputs) -> Self {
        Self { t, value: ln_value.exp(), ln_value, formula, inputs, caveats: Vec::new() }
    }

    /// Applies the bulk-region thresholds.
    fn guarded(mut self) -> Result<Self> {
        if self.value > REFUSE_ABOVE {
            return domain(format!(
                "approximation at t = {} is {:.3e}, above {REFUSE_ABOVE:e}; first-order asymptotics do not apply in the bulk",
                self.t, self.value
            ));
        }
        if self.value > CAVEAT_ABOVE {
            self.caveats.push(format!("tail level {:.3e} above {CAVEAT_ABOVE:e}: approximation may be inaccurate", self.value));
        }
        Ok(self)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("threshold must be positive and finite, got {t}"));
    }
    Ok(())
}

fn rv_index(marginal: &MarginalModel) -> Result<f64> {
    marginal
        .rv_index()
        .ok_or_else(|| Error::Unsupported(format!("{} is not regularly varying; use the endpoint models", marginal.name())))
}

/// `E[C^alpha] P(X > t)`.
pub fn breiman_tail(weight: &WeightModel, marginal: &MarginalModel, t: f64) -> Result<f64> {
    let alpha = rv_index(marginal)?;
    Ok(weight.moment(alpha)? * marginal.tail(t))
}

fn frechet_raw(scenario: &Scenario, t: f64) -> Result<ApproxReport> {
    check_t(t)?;
    let MdaClass::Frechet { alpha } = scenario.mda_class() else {
        return Err(Error::Dispatch("the regularly varying approximation needs Frechet marginals".into()));
    };
    let c1 = scenario.weights().first();
    let moment = c1.moment(alpha)?;
    let lt = scenario.lambda().lambda_tilde;
    let ln_value = scenario.reference().ln_tail(t) + moment.ln() + lt.ln();
    let inputs = ApproxInputs { alpha: Some(alpha), omega: c1.endpoint(), lambda_tilde: lt, moment: Some(moment), ..Default::default() };
    Ok(ApproxReport::new(t, ln_value, Formula::FrechetMain, inputs))
}

/// `P(L(C) > t) ~ tail_1(t) E[C_1^alpha] lambda~_n` for regularly varying risks.
pub fn frechet_lc_approx(scenario: &Scenario, t: f64) -> Result<ApproxReport> {
    frechet_raw(scenario, t)?.guarded()
}

fn gumbel_marginal(marginal: &MarginalModel) -> Result<()> {
    if marginal.rv_index().is_some() {
        return Err(Error::Unsupported(format!("{} is regularly varying; use the Breiman tail", marginal.name())));
    }
    Ok(())
}

/// `Gamma(gamma + 1)`, the Model B constant.
pub fn model_b_constant(gamma: f64) -> f64 {
    ln_gamma(gamma + 1.0).exp()
}

fn model_a_ln(weight: &WeightModel, marginal: &MarginalModel, s: f64) -> Result<(f64, f64)> {
    gumbel_marginal(marginal)?;
    let EndpointClass::ModelA { p, .. } = weight.classify_endpoint()? else {
        return Err(Error::Dispatch(format!("{} is not a Model A weight", weight.name())));
    };
    let t = s / weight.endpoint();
    if !(t > marginal.auxiliary_threshold()) {
        return domain(format!("s / omega = {t} is below the auxiliary-function threshold of {}", marginal.name()));
    }
    Ok((p.ln() + marginal.ln_tail(t), p))
}

fn model_b_ln(weight: &WeightModel, marginal: &MarginalModel, s: f64) -> Result<(f64, f64, f64)> {
    gumbel_marginal(marginal)?;
    let EndpointClass::ModelB { gamma } = weight.classify_endpoint()? else {
        return Err(Error::Dispatch(format!("{} is not a Model B weight", weight.name())));
    };
    let omega = weight.endpoint();
    let t = s / omega;
    let a = marginal.auxiliary(t)?;
    let near = weight.near_endpoint_tail(omega * a / t)?;
    Ok((ln_gamma(gamma + 1.0) + near.ln() + marginal.ln_tail(t), gamma, a))
}

/// `p P(X > s / omega)`, the leading term of `P(C X > s)` for a Model A weight.
pub fn scaled_tail_model_a(weight: &WeightModel, marginal: &MarginalModel, s: f64) -> Result<f64> {
    Ok(model_a_ln(weight, marginal, s)?.0.exp())
}

/// `Gamma(gamma + 1) P(C > omega - omega a(t)/t) P(X > t)` with `t = s / omega`, the leading
/// term of `P(C X > s)` for a Model B weight.
pub fn scaled_tail_model_b(weight: &WeightModel, marginal: &MarginalModel, s: f64) -> Result<f64> {
    Ok(model_b_ln(weight, marginal, s)?.0.exp())
}

fn gumbel_raw(scenario: &Scenario, t: f64) -> Result<ApproxReport> {
    check_t(t)?;
    if scenario.is_frechet() {
        return Err(Error::Dispatch("the endpoint-model approximation needs Gumbel marginals".into()));
    }
    let c1 = scenario.weights().first();
    let x1 = scenario.reference();
    let lt = scenario.lambda().lambda_tilde;
    let omega = c1.endpoint();
    let mut report = match c1.classify_endpoint()? {
        EndpointClass::ModelA { .. } => {
            let (ln_v, p) = model_a_ln(c1, x1, t)?;
            let inputs = ApproxInputs { omega, p: Some(p), lambda_tilde: lt, ..Default::default() };
            ApproxReport::new(t, ln_v + lt.ln(), Formula::GumbelModelA, inputs)
        }
        EndpointClass::ModelB { .. } => {
            let (ln_v, gamma, a) = model_b_ln(c1, x1, t)?;
            let inputs = ApproxInputs { gamma: Some(gamma), omega, lambda_tilde: lt, aux: Some(a), ..Default::default() };
            ApproxReport::new(t, ln_v + lt.ln(), Formula::GumbelModelB, inputs)
        }
        EndpointClass::Other => {
            return Err(Error::Dispatch(format!("C1 = {} has neither an endpoint atom nor a regularly varying endpoint tail", c1.name())));
        }
    };
    if omega != 1.0 {
        report.caveats.push(format!(
            "endpoint omega = {omega}: threshold rescaled to t/omega, auxiliary function a1(t) = omega a(t/omega) (interpretation)"
        ));
    }
    Ok(report)
}

/// `P(L(C) > t) ~ lambda~_n P(C_1 X_1 > t)` with `P(C_1 X_1 > t)` from Model A or B.
pub fn gumbel_lc_approx(scenario: &Scenario, t: f64) -> Result<ApproxReport> {
    gumbel_raw(scenario, t)?.guarded()
}

/// Dispatches on the max-domain of the scenario.
pub fn approx(scenario: &Scenario, t: f64) -> Result<ApproxReport> {
    approx_unguarded(scenario, t)?.guarded()
}

/// [`approx`] without the bulk-region thresholds; used when inverting the approximation.
pub fn approx_unguarded(scenario: &Scenario, t: f64) -> Result<ApproxReport> {
    if scenario.is_frechet() {
        frechet_raw(scenario, t)
    } else {
        gumbel_raw(scenario, t)
    }
}
