//! Large claims reinsurance with default: five correlated LogNormal claims, the three
//! largest ceded, C_1 = 1 - recovery rate ~ Beta(2, 3). Asymptotic VaR/ES against
//! empirical values.

use ostail::montecarlo::{sample_lc_parallel, McConfig};
use ostail::riskmeasures::{empirical_tail, es_asymptotic, var_asymptotic};
use ostail::{CorrelationMatrix, Dependence, MarginalModel, Scenario, WeightModel, WeightVectorSpec};

fn main() -> ostail::Result<()> {
    let s = Scenario::new(
        vec![MarginalModel::lognormal(0.0, 1.0)?; 5],
        Dependence::Gaussian(CorrelationMatrix::equicorrelated(5, 0.3)?),
        WeightVectorSpec::independent(vec![WeightModel::beta(2.0, 3.0, 1.0)?; 3])?,
    )?;
    let xs = sample_lc_parallel(&s, &McConfig::new(2_000_000, 7));
    for p in [0.99, 0.999, 0.9999] {
        let v = var_asymptotic(&s, p)?;
        let es = es_asymptotic(&s, p)?;
        let emp = empirical_tail(&xs, p)?;
        println!(
            "p = {p}: VaR(C1 X1) {:.4}, approximation root {:.4}, ES {:.4} [{}]; empirical VaR {:.4}, ES {:.4}, ES/VaR {:.3}",
            v.value, v.approx_root, es.value, es.tag, emp.var, emp.es, emp.es / emp.var
        );
    }
    Ok(())
}
