//! Pareto risks with a Uniform(0,1) weight: the Breiman tail is exact above the scale.

use ostail::{breiman_tail, scale_mixture_tail, MarginalModel, WeightModel};

fn main() -> ostail::Result<()> {
    let x = MarginalModel::pareto(2.0, 1.0)?;
    let c = WeightModel::uniform(1.0)?;
    println!("{:>12} {:>16} {:>16} {:>10}", "t", "breiman", "quadrature", "rel err");
    for i in 0..9 {
        let t = 10f64.powi(i);
        let b = breiman_tail(&c, &x, t)?;
        let q = scale_mixture_tail(&c, &x, t)?;
        println!("{t:>12.3e} {b:>16.9e} {q:>16.9e} {:>10.2e}", ((b - q) / q).abs());
    }
    Ok(())
}
