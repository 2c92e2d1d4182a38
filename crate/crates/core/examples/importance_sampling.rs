//! Rare-event estimation for Pareto risks: crude, conditional and importance sampling
//! at a tail level of about 1e-8.

use ostail::montecarlo::{estimate, McConfig, Method};
use ostail::{approx, Dependence, MarginalModel, Scenario, WeightModel, WeightVectorSpec};

fn main() -> ostail::Result<()> {
    let s = Scenario::new(
        vec![MarginalModel::pareto(2.0, 1.0)?; 3],
        Dependence::Independent,
        WeightVectorSpec::independent(vec![WeightModel::uniform(1.0)?; 3])?,
    )?;
    let t = 1e4;
    println!("approximation: {:.4e}", approx(&s, t)?.value);
    let mc = McConfig::new(1_000_000, 11);
    for m in [Method::Crude, Method::ConditionalC1, Method::ImportancePareto] {
        let e = estimate(&s, t, m, &mc)?;
        let ess = e.ess.map(|x| format!(", ESS {x:.0}")).unwrap_or_default();
        println!("{m:>12}: {:.4e} (95% CI {:.3e} .. {:.3e}){ess}", e.point, e.ci95.0, e.ci95.1);
    }
    Ok(())
}
