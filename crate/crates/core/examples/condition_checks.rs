//! Asymptotic-independence diagnostics: independent Pareto risks against strongly
//! correlated LogNormal risks.

use ostail::montecarlo::diagnostics::{check_conditions, DiagnosticsConfig};
use ostail::{CorrelationMatrix, Dependence, MarginalModel, Scenario, WeightModel, WeightVectorSpec};

fn show(label: &str, s: &Scenario) -> ostail::Result<()> {
    let mut cfg = DiagnosticsConfig::default_for(s)?;
    cfg.t_grid.points = 4;
    let report = check_conditions(s, &cfg)?;
    println!("{label}:");
    for r in &report.rows {
        let ratios: Vec<String> = r.ratios.iter().map(|x| format!("{x:.2e}")).collect();
        println!("  {} ({}, {}) x={:?} L={:?}: [{}] {}", r.condition.name(), r.i, r.j, r.x, r.l, ratios.join(", "), r.verdict);
    }
    Ok(())
}

fn main() -> ostail::Result<()> {
    let pareto = Scenario::new(
        vec![MarginalModel::pareto(2.0, 1.0)?; 3],
        Dependence::Independent,
        WeightVectorSpec::independent(vec![WeightModel::uniform(1.0)?; 3])?,
    )?;
    show("independent Pareto", &pareto)?;
    let lognormal = Scenario::new(
        vec![MarginalModel::lognormal(0.0, 1.0)?; 2],
        Dependence::Gaussian(CorrelationMatrix::equicorrelated(2, 0.999)?),
        WeightVectorSpec::independent(vec![WeightModel::beta(2.0, 3.0, 1.0)?])?,
    )?;
    show("LogNormal, rho = 0.999", &lognormal)
}
