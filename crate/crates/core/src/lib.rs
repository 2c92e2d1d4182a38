//! Tail asymptotics for randomly weighted sums of the largest order statistics,
//! `L(C) = C_1 X_{1,n} + ... + C_k X_{k,n}`, with quadrature and Monte Carlo checks.

pub mod aggregation;
pub mod asymptotics;
pub mod cli;
pub mod dependence;
pub mod error;
pub mod grid;
pub mod marginals;
pub mod montecarlo;
pub mod oracles;
pub mod riskmeasures;
pub mod weights;

mod special;

pub use error::{Error, Result};
pub use marginals::{lambda_weights, Family, LambdaWeights, MarginalModel, MdaClass};
pub use weights::{Coupling, EndpointClass, WeightKind, WeightModel, WeightVectorSpec};
pub use dependence::{eta, eta_closed_form, CorrelationMatrix, Dependence, Scenario};
pub use aggregation::{lc, order_stats, sample_lc, LcSampler, OrderedSample};
pub use grid::GeometricGrid;
pub use oracles::{scale_mixture_tail, QuadEstimate, RatioTrend};
pub use asymptotics::{approx, breiman_tail, frechet_lc_approx, gumbel_lc_approx, scaled_tail_model_a, scaled_tail_model_b, ApproxReport, Formula};
