//! Runs every check at λ = 10 and prints one line per criterion.
//!
//! `cargo run --release --example verify_paper [lambda]`

use attractor_lab::config::RunConfig;
use attractor_lab::pipeline;

fn main() {
    let mut cfg = RunConfig::default();
    if let Some(l) = std::env::args().nth(1) {
        cfg.model.lambda = l.parse().expect("lambda must be a number");
    }
    match pipeline::verify_paper(&cfg) {
        Ok(report) => {
            print!("{}", report.summary());
            std::process::exit(if report.passed { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
