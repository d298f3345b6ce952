//! Loads a run configuration and builds the problem it describes.

use attractor_lab::config::RunConfig;

const TEXT: &str = r#"
[model]
lambda = 5.0
a = "counterexample"
a_params = { delta = 0.05, J = 2.0 }

[discretization]
K = 32

[search]
samples = 8
seed = 3
"#;

fn main() -> attractor_lab::Result<()> {
    let cfg = RunConfig::from_toml(TEXT)?;
    let spec = cfg.spec()?;
    println!("lambda = {}, a(0) = {}, bounds {:?}", spec.lambda, spec.a.value(0.0), spec.bounds());
    println!("{:?}", cfg.dynamics());
    print!("{}", cfg.to_toml());
    Ok(())
}
