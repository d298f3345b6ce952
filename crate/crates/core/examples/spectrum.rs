//! Leading eigenvalues of the linearization at each equilibrium, with the
//! coefficient of the rank-one nonlocal term.

use attractor_lab::equilibria::enumerate_equilibria;
use attractor_lab::model::ProblemSpec;
use attractor_lab::spectrum::analyze;

fn main() -> attractor_lab::Result<()> {
    let spec = ProblemSpec::default_with_lambda(10.0)?;
    for e in enumerate_equilibria(&spec, 64)? {
        let r = analyze(&spec, &e, 64)?;
        let top: Vec<String> = r.eigenvalues.iter().take(4).map(|m| format!("{m:9.4}")).collect();
        println!("{:>8}  eps = {:8.4}  unstable = {}  top: {}", r.label.to_string(), r.epsilon, r.positive_count, top.join(" "));
    }
    Ok(())
}
