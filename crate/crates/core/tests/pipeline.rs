use attractor_lab::config::RunConfig;
use attractor_lab::equilibria::BranchLabel;
use attractor_lab::pipeline::{self, Status};
use attractor_lab::sine::Field;

fn small(lambda: f64, modes: usize) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.model.lambda = lambda;
    cfg.discretization.modes = modes;
    cfg
}

#[test]
fn sweep_counts_and_norms_grow_with_lambda() {
    let grid = [0.5, 2.0, 5.0, 10.0];
    let s = pipeline::sweep(&small(10.0, 32), &grid).unwrap();
    let counts: Vec<usize> = s.counts().into_iter().map(|(_, c)| c).collect();
    assert_eq!(counts, vec![1, 3, 5, 7]);

    let fine: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64 + 0.01).collect();
    let s = pipeline::sweep(&small(10.0, 32), &fine).unwrap();
    let counts: Vec<usize> = s.counts().into_iter().map(|(_, c)| c).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    let mut last: std::collections::BTreeMap<BranchLabel, f64> = Default::default();
    for r in &s.rows {
        if let Some(prev) = last.insert(r.label, r.d) {
            assert!(r.d >= prev - 1e-12, "{} shrinks at lambda = {}", r.label, r.lambda);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let cfg = small(2.0, 16);
    let a = pipeline::verify_paper(&cfg).unwrap();
    let b = pipeline::verify_paper(&cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.passed, "{}", a.summary());
    assert_eq!(a.branches, 1);
}

#[test]
fn trivial_problem() {
    let r = pipeline::verify_paper(&small(0.5, 16)).unwrap();
    assert_eq!(r.equilibria, vec!["zero"]);
    assert!(r.passed);
    let graph = r.criteria.iter().find(|c| c.id == 6).unwrap();
    assert_eq!(graph.status, Status::Pass);
    assert_eq!(graph.measured["graph"]["edges"].as_array().unwrap().len(), 0);
}

#[test]
fn morse_check_at_two_branches() {
    let check = pipeline::morse_check(&small(5.0, 32)).unwrap();
    assert!(check.passed);
    assert_eq!(check.graph.edges.len(), 8);
}

#[test]
fn field_json_shape() {
    let f = Field::from_coeffs(vec![1.0, -0.5, 0.25]).unwrap();
    let text = serde_json::to_string(&f).unwrap();
    assert_eq!(text, r#"{"K":3,"coeffs":[1.0,-0.5,0.25]}"#);
    let back: Field = serde_json::from_str(&text).unwrap();
    assert_eq!(back, f);
    assert!(serde_json::from_str::<Field>(r#"{"K":2,"coeffs":[1.0]}"#).is_err());
}

#[test]
fn counterexample_single_point() {
    let cfg = small(10.0, 32);
    let grid = pipeline::default_scan_grid(&cfg).unwrap();
    let scan = pipeline::counterexample(&cfg, &grid[5..6]).unwrap();
    assert!(scan.passed);
    assert!(scan.points[0].d.len() >= 3);
}
