//! Tails, tail quantiles and auxiliary functions of the marginal families.

use ostail::MarginalModel;

fn main() -> ostail::Result<()> {
    let models = [
        MarginalModel::pareto(2.0, 1.0)?,
        MarginalModel::lognormal(0.0, 1.0)?,
        MarginalModel::weibullian(1.0, 0.5)?,
        MarginalModel::exponential(1.0)?,
    ];
    for m in &models {
        println!("{} ({})", m.name(), m.mda_class().name());
        for q in [1e-3, 1e-6, 1e-9] {
            let t = m.tail_quantile(q)?;
            let aux = m.auxiliary(t).map(|a| format!("{a:.4e}")).unwrap_or_else(|_| "-".into());
            println!("  tail {q:.0e}: t = {t:.6e}, P(X > t) = {:.6e}, a(t) = {aux}", m.tail(t));
        }
    }
    Ok(())
}
