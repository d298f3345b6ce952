//! All equilibria at λ = 10 with their norms, energies and Morse indices.

use attractor_lab::equilibria::enumerate_equilibria;
use attractor_lab::model::ProblemSpec;
use attractor_lab::spectrum::fill_morse_indices;

fn main() -> attractor_lab::Result<()> {
    let spec = ProblemSpec::default_with_lambda(10.0)?;
    let mut eqs = enumerate_equilibria(&spec, 64)?;
    fill_morse_indices(&spec, &mut eqs, 64)?;
    println!("{:>8} {:>14} {:>14} {:>6} {:>6}", "label", "D", "energy", "zeros", "index");
    for e in &eqs {
        println!(
            "{:>8} {:>14.10} {:>14.10} {:>6} {:>6}",
            e.label.to_string(),
            e.d,
            e.energy,
            e.interior_zeros,
            e.morse_index.unwrap()
        );
    }
    Ok(())
}
