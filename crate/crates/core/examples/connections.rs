//! Samples the unstable manifold of every equilibrium at λ = 10 and prints
//! where the departures end up.
//!
//! `cargo run --release --example connections`

use attractor_lab::dynamics::{all_connections, DynamicsConfig};
use attractor_lab::equilibria::enumerate_equilibria;
use attractor_lab::model::ProblemSpec;
use attractor_lab::morse::ConnectionGraph;
use attractor_lab::spectrum::fill_morse_indices;

fn main() -> attractor_lab::Result<()> {
    let spec = ProblemSpec::default_with_lambda(10.0)?;
    let mut eqs = enumerate_equilibria(&spec, 64)?;
    fill_morse_indices(&spec, &mut eqs, 64)?;
    let searches = all_connections(&spec, &eqs, &DynamicsConfig::default())?;
    for s in &searches {
        let targets: Vec<String> = s.targets.iter().map(|t| t.to_string()).collect();
        println!(
            "{} (dim {}) -> {}   [{} runs, {} unresolved, max dE {:.1e}]",
            s.source,
            s.unstable_dim,
            targets.join(", "),
            s.samples.len(),
            s.unresolved,
            s.max_energy_increase()
        );
    }
    print!("{}", ConnectionGraph::from_searches(3, &searches)?.to_dot());
    Ok(())
}
