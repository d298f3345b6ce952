//! A non-monotone diffusion with several positive equilibria, one of them
//! unstable.
//!
//! The diffusion follows `a` up to `d*` (the norm of the positive
//! equilibrium), rises, falls with slope `J` and settles at `a(0)`.

use attractor_lab::config::RunConfig;
use attractor_lab::pipeline::{counterexample, default_scan_grid};

fn main() -> attractor_lab::Result<()> {
    let cfg = RunConfig::default();
    let scan = counterexample(&cfg, &default_scan_grid(&cfg)?)?;
    println!("d* = {:.6}  d0 = {:.6}  delta0 = {:.6}", scan.d_star, scan.d0, scan.delta0);
    for p in &scan.points {
        let ds: Vec<String> = p.d.iter().map(|d| format!("{d:.5}")).collect();
        println!("delta {:.4}  J {:7.4}  D = [{}]  unstable {:?}", p.delta, p.slope, ds.join(", "), p.positive_eigenvalues);
    }
    println!("some grid point succeeds: {}", scan.passed);
    Ok(())
}
