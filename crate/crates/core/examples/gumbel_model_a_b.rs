//! Gumbel-domain risks: the endpoint Models A (atom) and B (regularly varying endpoint
//! tail) against exact quadrature of P(C X > s).

use ostail::asymptotics::{scaled_tail_model_a, scaled_tail_model_b};
use ostail::{scale_mixture_tail, MarginalModel, WeightModel};

fn main() -> ostail::Result<()> {
    let ln = MarginalModel::lognormal(0.0, 1.0)?;
    let a = WeightModel::model_a(1.0, 0.5, 0.5)?;
    let b = WeightModel::beta(2.0, 3.0, 1.0)?;
    println!("{:>8} {:>12} {:>14} {:>14}", "tail", "s", "A: exact/appr", "B: exact/appr");
    for q in [1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14] {
        let s = ln.tail_quantile(q)?;
        let ra = scale_mixture_tail(&a, &ln, s)? / scaled_tail_model_a(&a, &ln, s)?;
        let rb = scale_mixture_tail(&b, &ln, s)? / scaled_tail_model_b(&b, &ln, s)?;
        println!("{q:>8.0e} {s:>12.4e} {ra:>14.6} {rb:>14.6}");
    }
    let e = MarginalModel::exponential(1.0)?;
    let u = WeightModel::uniform(1.0)?;
    for t in [10.0, 20.0, 40.0, 80.0] {
        let r = scale_mixture_tail(&u, &e, t)? / scaled_tail_model_b(&u, &e, t)?;
        println!("Uniform x Exponential, t = {t}: exact/approx {r:.6}");
    }
    Ok(())
}
