//! Connection matrix for N = 3 next to the predicted connection graph.

use attractor_lab::morse::{assemble_connection_matrix, predicted_graph};

fn main() -> attractor_lab::Result<()> {
    let n = 3;
    let delta = assemble_connection_matrix(n)?;
    let names: Vec<String> = delta.labels.iter().map(|l| l.to_string()).collect();
    println!("{:>8} {}", "", names.iter().map(|s| format!("{s:>8}")).collect::<String>());
    for (row, name) in delta.entries.iter().zip(&names) {
        println!("{name:>8} {}", row.iter().map(|v| format!("{v:>8}")).collect::<String>());
    }
    println!("square zero: {}", delta.squares_to_zero());
    println!("degree -1:   {}", delta.has_degree_minus_one());
    let g = predicted_graph(n);
    println!("triangular:  {}", delta.is_triangular_in(&g.transitive_closure()));
    println!("{} predicted edges", g.edges.len());
    Ok(())
}
