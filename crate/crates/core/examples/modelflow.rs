//! The model flow on the n-disk and its connection graph, compared with the
//! predicted one.

use attractor_lab::modelflow::{model_connection_graph, ModelConfig};
use attractor_lab::morse::predicted_graph;

fn main() -> attractor_lab::Result<()> {
    for n in 1..=4 {
        let run = model_connection_graph(n, &ModelConfig::default())?;
        let same = run.graph.diff(&predicted_graph(n)).is_empty();
        println!("n = {n}: {} edges, {} runs, {} unresolved, matches prediction: {same}", run.graph.edges.len(), run.trajectories.len(), run.unresolved);
    }
    Ok(())
}
