//! Bifurcation sweep: equilibrium count and branch norms along λ.

use attractor_lab::config::RunConfig;
use attractor_lab::pipeline::sweep;

fn main() -> attractor_lab::Result<()> {
    let grid: Vec<f64> = (1..=24).map(|i| 0.5 * i as f64).collect();
    let s = sweep(&RunConfig::default(), &grid)?;
    for (lambda, count) in s.counts() {
        println!("lambda = {lambda:5.1}  equilibria = {count}");
    }
    if !s.skipped.is_empty() {
        println!("skipped {:?}", s.skipped);
    }
    Ok(())
}
