//! Morse labels, connection graphs and the connection matrix.
//!
//! Labels `(j, ±)` for `j = 0..N−1` stand for `φ_{j+1}^±` and have degree `j`;
//! the top label stands for zero and has degree `N`. Matrices are indexed in
//! the order `(0,−), (0,+), …, (N−1,−), (N−1,+), top`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::ConnectionSearch;
use crate::equilibria::{BranchLabel, EquilibriumRecord, Sign};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorseLabel {
    Level { j: usize, sign: Sign },
    Top,
}

impl MorseLabel {
    pub fn degree(&self, n: usize) -> usize {
        match self {
            MorseLabel::Level { j, .. } => *j,
            MorseLabel::Top => n,
        }
    }

    /// Position in the matrix ordering.
    pub fn position(&self, n: usize) -> usize {
        match self {
            MorseLabel::Level { j, sign: Sign::Minus } => 2 * j,
            MorseLabel::Level { j, sign: Sign::Plus } => 2 * j + 1,
            MorseLabel::Top => 2 * n,
        }
    }

    pub fn from_branch(label: BranchLabel) -> Self {
        match label {
            BranchLabel::Zero => MorseLabel::Top,
            BranchLabel::Branch { j, sign } => MorseLabel::Level { j: j - 1, sign },
        }
    }

    pub fn to_branch(self) -> BranchLabel {
        match self {
            MorseLabel::Top => BranchLabel::Zero,
            MorseLabel::Level { j, sign } => BranchLabel::Branch { j: j + 1, sign },
        }
    }
}

impl fmt::Display for MorseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_branch())
    }
}

/// All `2N + 1` labels in matrix order.
pub fn all_labels(n: usize) -> Vec<MorseLabel> {
    let mut v: Vec<MorseLabel> =
        (0..n).flat_map(|j| [MorseLabel::Level { j, sign: Sign::Minus }, MorseLabel::Level { j, sign: Sign::Plus }]).collect();
    v.push(MorseLabel::Top);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseLabels {
    pub n: usize,
    pub labels: Vec<MorseLabel>,
    pub degrees: Vec<usize>,
}

/// Labels for enumerated equilibria; degrees must equal the computed Morse indices.
pub fn build_labels(equilibria: &[EquilibriumRecord]) -> Result<MorseLabels> {
    if equilibria.is_empty() || equilibria.len() % 2 == 0 {
        return Err(LabError::StructuralInconsistency(format!("{} equilibria cannot form 2N+1", equilibria.len())));
    }
    let n = (equilibria.len() - 1) / 2;
    let mut seen = BTreeSet::new();
    for e in equilibria {
        let label = MorseLabel::from_branch(e.label);
        if let MorseLabel::Level { j, .. } = label {
            if j >= n {
                return Err(LabError::StructuralInconsistency(format!("{} beyond N = {n}", e.label)));
            }
        }
        let index = e
            .morse_index
            .ok_or_else(|| LabError::Precondition(format!("Morse index of {} not computed", e.label)))?;
        if index != label.degree(n) {
            return Err(LabError::StructuralInconsistency(format!(
                "{} has Morse index {index}, its label has degree {}",
                e.label,
                label.degree(n)
            )));
        }
        if !seen.insert(label) {
            return Err(LabError::StructuralInconsistency(format!("{} appears twice", e.label)));
        }
    }
    let labels = all_labels(n);
    let degrees = labels.iter().map(|l| l.degree(n)).collect();
    Ok(MorseLabels { n, labels, degrees })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectionGraph {
    pub n: usize,
    /// `(source, target)` pairs.
    pub edges: BTreeSet<(MorseLabel, MorseLabel)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphDiff {
    /// In the reference graph only.
    pub missing: Vec<(MorseLabel, MorseLabel)>,
    /// In the compared graph only.
    pub extra: Vec<(MorseLabel, MorseLabel)>,
}

impl GraphDiff {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }

    /// The first offending edge, missing edges first.
    pub fn first(&self) -> Option<String> {
        if let Some((s, t)) = self.missing.first() {
            return Some(format!("missing {s} -> {t}"));
        }
        self.extra.first().map(|(s, t)| format!("unexpected {s} -> {t}"))
    }
}

impl ConnectionGraph {
    pub fn new(n: usize) -> Self {
        ConnectionGraph { n, edges: BTreeSet::new() }
    }

    pub fn contains(&self, label: MorseLabel) -> bool {
        match label {
            MorseLabel::Top => true,
            MorseLabel::Level { j, .. } => j < self.n,
        }
    }

    pub fn add_edge(&mut self, source: MorseLabel, target: MorseLabel) -> Result<()> {
        if source == target {
            return Err(LabError::StructuralInconsistency(format!("self edge at {source}")));
        }
        if !self.contains(source) || !self.contains(target) {
            return Err(LabError::SizeMismatch(format!("edge {source} -> {target} outside N = {}", self.n)));
        }
        self.edges.insert((source, target));
        Ok(())
    }

    /// Graph of the detected targets of every search.
    pub fn from_searches(n: usize, searches: &[ConnectionSearch]) -> Result<Self> {
        let mut g = ConnectionGraph::new(n);
        for s in searches {
            for t in &s.targets {
                g.add_edge(MorseLabel::from_branch(s.source), MorseLabel::from_branch(*t))?;
            }
        }
        Ok(g)
    }

    /// Violations of the graph invariants; empty when all hold.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for &(s, t) in &self.edges {
            if s == t {
                out.push(format!("self edge at {s}"));
            }
            if let (MorseLabel::Level { j: a, .. }, MorseLabel::Level { j: b, .. }) = (s, t) {
                if a == b {
                    out.push(format!("same-level edge {s} -> {t}"));
                }
            }
            if s.degree(self.n) <= t.degree(self.n) {
                out.push(format!("edge {s} -> {t} does not drop degree"));
            }
        }
        out
    }

    pub fn diff(&self, other: &ConnectionGraph) -> GraphDiff {
        GraphDiff {
            missing: self.edges.difference(&other.edges).copied().collect(),
            extra: other.edges.difference(&self.edges).copied().collect(),
        }
    }

    pub fn transitive_closure(&self) -> ConnectionGraph {
        let labels = all_labels(self.n);
        let m = labels.len();
        let mut reach = vec![vec![false; m]; m];
        for &(s, t) in &self.edges {
            reach[s.position(self.n)][t.position(self.n)] = true;
        }
        for k in 0..m {
            for i in 0..m {
                if reach[i][k] {
                    for j in 0..m {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut g = ConnectionGraph::new(self.n);
        for i in 0..m {
            for j in 0..m {
                if reach[i][j] && i != j {
                    g.edges.insert((labels[i], labels[j]));
                }
            }
        }
        g
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph connections {\n");
        for l in all_labels(self.n).iter().rev() {
            s.push_str(&format!("  \"{l}\" [label=\"{l}\"];\n"));
        }
        for (a, b) in &self.edges {
            s.push_str(&format!("  \"{a}\" -> \"{b}\";\n"));
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "nodes": all_labels(self.n).iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect::<Vec<_>>(),
        })
    }
}

/// Zero connects to every label; `(j, ⋆)` connects to every `(k, •)` with `k < j`.
pub fn predicted_graph(n: usize) -> ConnectionGraph {
    let mut g = ConnectionGraph::new(n);
    let labels = all_labels(n);
    for &s in &labels {
        for &t in &labels {
            if s.degree(n) > t.degree(n) {
                g.edges.insert((s, t));
            }
        }
    }
    g
}

/// Integer matrix `Δ[target][source]` over the labels in matrix order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradedMatrix {
    pub n: usize,
    pub labels: Vec<MorseLabel>,
    pub degrees: Vec<usize>,
    pub entries: Vec<Vec<i64>>,
}

impl GradedMatrix {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, target: MorseLabel, source: MorseLabel) -> i64 {
        self.entries[target.position(self.n)][source.position(self.n)]
    }

    pub fn set(&mut self, target: MorseLabel, source: MorseLabel, v: i64) {
        let (t, s) = (target.position(self.n), source.position(self.n));
        self.entries[t][s] = v;
    }

    pub fn square(&self) -> Vec<Vec<i64>> {
        let m = self.size();
        let mut out = vec![vec![0i64; m]; m];
        for i in 0..m {
            for k in 0..m {
                if self.entries[i][k] != 0 {
                    for j in 0..m {
                        out[i][j] += self.entries[i][k] * self.entries[k][j];
                    }
                }
            }
        }
        out
    }

    pub fn squares_to_zero(&self) -> bool {
        self.square().iter().flatten().all(|&v| v == 0)
    }

    /// Every nonzero entry lowers degree by exactly one.
    pub fn has_degree_minus_one(&self) -> bool {
        self.nonzero().iter().all(|&(t, s, _)| self.degrees[s.position(self.n)] == self.degrees[t.position(self.n)] + 1)
    }

    /// Nonzero entries only where the target lies below the source in `order`.
    pub fn is_triangular_in(&self, order: &ConnectionGraph) -> bool {
        self.nonzero().iter().all(|&(t, s, _)| order.edges.contains(&(s, t)))
    }

    /// `(target, source, value)` of every nonzero entry.
    pub fn nonzero(&self) -> Vec<(MorseLabel, MorseLabel, i64)> {
        let mut out = Vec::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    out.push((self.labels[i], self.labels[j], v));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "labels": self.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "degrees": self.degrees,
            "entries": self.entries,
        })
    }
}

/// Block bidiagonal `Δ` with `D_j = [[1,1],[−1,−1]]` and `D_N = [1,−1]ᵀ`.
pub fn assemble_connection_matrix(n: usize) -> Result<GradedMatrix> {
    if n == 0 {
        return Err(LabError::InvalidInput("connection matrix needs N >= 1".into()));
    }
    let labels = all_labels(n);
    let m = labels.len();
    let mut d = GradedMatrix { n, degrees: labels.iter().map(|l| l.degree(n)).collect(), labels, entries: vec![vec![0; m]; m] };
    let lvl = |j, sign| MorseLabel::Level { j, sign };
    for j in 1..n {
        for src in Sign::BOTH {
            d.set(lvl(j - 1, Sign::Minus), lvl(j, src), 1);
            d.set(lvl(j - 1, Sign::Plus), lvl(j, src), -1);
        }
    }
    d.set(lvl(n - 1, Sign::Minus), MorseLabel::Top, 1);
    d.set(lvl(n - 1, Sign::Plus), MorseLabel::Top, -1);
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    /// Every nonzero adjacent-degree entry has a detected edge.
    pub witnessed: bool,
    pub unwitnessed_entries: Vec<(MorseLabel, MorseLabel)>,
    /// Predicted adjacent-degree edges with no nonzero matrix entry.
    pub completeness_warnings: Vec<(MorseLabel, MorseLabel)>,
    pub graphs_equal: bool,
    pub graph_diff: GraphDiff,
    /// The order generated by the detected graph is the predicted one and puts every level below top.
    pub flow_order_matches: bool,
    pub passed: bool,
}

pub fn check_consistency(
    found: &ConnectionGraph,
    delta: &GradedMatrix,
    predicted: &ConnectionGraph,
) -> Result<ConsistencyReport> {
    if found.n != delta.n || found.n != predicted.n {
        return Err(LabError::SizeMismatch(format!(
            "graph N = {}, matrix N = {}, predicted N = {}",
            found.n, delta.n, predicted.n
        )));
    }
    let n = found.n;
    let unwitnessed_entries: Vec<_> = delta
        .nonzero()
        .into_iter()
        .filter(|&(t, s, _)| s.degree(n) == t.degree(n) + 1 && !found.edges.contains(&(s, t)))
        .map(|(t, s, _)| (s, t))
        .collect();
    let completeness_warnings: Vec<_> = predicted
        .edges
        .iter()
        .filter(|(s, t)| s.degree(n) == t.degree(n) + 1 && delta.get(*t, *s) == 0)
        .copied()
        .collect();
    let graph_diff = predicted.diff(found);
    let closure = found.transitive_closure();
    let below_top = all_labels(n)
        .into_iter()
        .filter(|l| *l != MorseLabel::Top)
        .all(|l| closure.edges.contains(&(MorseLabel::Top, l)));
    let flow_order_matches = below_top && closure == predicted.transitive_closure();
    let witnessed = unwitnessed_entries.is_empty();
    let graphs_equal = graph_diff.is_empty();
    Ok(ConsistencyReport {
        witnessed,
        unwitnessed_entries,
        completeness_warnings,
        graphs_equal,
        graph_diff,
        flow_order_matches,
        passed: witnessed && graphs_equal && flow_order_matches,
    })
}
