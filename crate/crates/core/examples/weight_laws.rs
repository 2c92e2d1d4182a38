//! Weight laws: moments, endpoint classification and sampling.

use ostail::{WeightModel, WeightVectorSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ostail::Result<()> {
    let laws = [
        WeightModel::degenerate(1.0)?,
        WeightModel::uniform(1.0)?,
        WeightModel::beta(2.0, 3.0, 1.0)?,
        WeightModel::model_a(1.0, 0.5, 0.5)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for w in &laws {
        let draws: Vec<f64> = (0..100_000).map(|_| w.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        println!(
            "{}: endpoint {}, E[C^2] = {:.6}, sample mean {mean:.4}, endpoint class {:?}",
            w.name(),
            w.endpoint(),
            w.moment(2.0)?,
            w.classify_endpoint()?
        );
    }
    let spec = WeightVectorSpec::independent(vec![WeightModel::beta(2.0, 3.0, 1.0)?, WeightModel::uniform(0.5)?])?;
    println!("one weight vector: {:?}", spec.sample_weights(&mut rng));
    Ok(())
}
