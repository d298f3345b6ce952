//! Deforms constant diffusion `a(D_N)` into `a` and tracks every equilibrium
//! and its index along the way.

use attractor_lab::equilibria::homotopy::{continue_in_tau, uniform_tau_grid};
use attractor_lab::equilibria::{BranchLabel, Sign};
use attractor_lab::model::ProblemSpec;

fn main() -> attractor_lab::Result<()> {
    let spec = ProblemSpec::default_with_lambda(10.0)?;
    let cont = continue_in_tau(&spec, BranchLabel::branch(3, Sign::Plus), &uniform_tau_grid(10), 64)?;
    println!("anchor D = {:.8}, continuity constant {:.4}", cont.anchor_d, cont.continuity_constant);
    for row in &cont.rows {
        let idx: Vec<String> = row.conley_dims().iter().map(|(_, d)| d.unwrap_or(0).to_string()).collect();
        println!("tau = {:.1}  a_tau(0) = {:.6}  indices {}", row.tau, row.a_tau_at_zero, idx.join(" "));
    }
    Ok(())
}
