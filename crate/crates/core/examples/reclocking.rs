//! The nonlocal and semilinear forms trace the same orbit: run the nonlocal
//! equation, then the semilinear one for the elapsed clock `α(t)`.

use attractor_lab::dynamics::{random_field, reclocking_comparison, DynamicsConfig};
use attractor_lab::model::ProblemSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> attractor_lab::Result<()> {
    let spec = ProblemSpec::default_with_lambda(10.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u0 = random_field(64, 2.0, &mut rng);
    let c = reclocking_comparison(&spec, &u0, 2.0, 10, &DynamicsConfig::default())?;
    for ((t, a), d) in c.times.iter().zip(&c.clock).zip(&c.distances) {
        println!("t = {t:4.2}  alpha = {a:8.5}  |u - v| = {d:.2e}");
    }
    Ok(())
}
