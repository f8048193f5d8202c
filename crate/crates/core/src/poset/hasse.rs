//! Cover relations of ⪯ on a universe and their DOT rendering.

use std::fmt::Write;

use super::Universe;
use crate::class::Verdict;
use crate::error::TopologyError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HasseDiagram {
    /// Cover pairs `(lower, upper)` by universe index, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Pairs whose verdict is UNKNOWN; empty unless built in partial mode.
    pub unknown: Vec<(usize, usize)>,
    labels: Vec<String>,
}

/// Transitive reduction of the strict YES relation. Fails on any UNKNOWN.
pub fn build_hasse(u: &Universe) -> Result<HasseDiagram, TopologyError> {
    if let Some(&(lower, upper)) = u.unknown_pairs().iter().find(|(i, j)| i != j) {
        return Err(TopologyError::UnresolvedRelation { lower, upper });
    }
    Ok(build_hasse_partial(u))
}

/// Reduction of the resolved YES pairs, with every UNKNOWN pair kept aside
/// for display. Not a sound Hasse diagram when `unknown` is nonempty.
pub fn build_hasse_partial(u: &Universe) -> HasseDiagram {
    let size = u.len();
    let below = |i: usize, j: usize| i != j && u.relation(i, j) == Verdict::Yes;
    let mut edges = Vec::new();
    for i in 0..size {
        for j in 0..size {
            if below(i, j) && !(0..size).any(|k| k != i && k != j && below(i, k) && below(k, j)) {
                edges.push((i, j));
            }
        }
    }
    let unknown = u.unknown_pairs().into_iter().filter(|(i, j)| i != j).collect();
    HasseDiagram {
        edges,
        unknown,
        labels: u.classes().iter().map(|c| label(&c.hash, &c.seed.matrix().rows())).collect(),
    }
}

fn label(hash: &str, rows: &[Vec<i64>]) -> String {
    let mut out = hash[..8.min(hash.len())].to_string();
    for row in rows {
        let cells: Vec<String> = row.iter().map(i64::to_string).collect();
        out.push_str("\\n");
        out.push_str(&cells.join(" "));
    }
    out
}

impl HasseDiagram {
    pub fn is_partial(&self) -> bool {
        !self.unknown.is_empty()
    }

    /// Graphviz digraph, smaller classes at the bottom.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph mutation_classes {\n  rankdir=BT;\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, l) in self.labels.iter().enumerate() {
            writeln!(out, "  c{i} [label=\"{l}\"];").unwrap();
        }
        for (i, j) in &self.edges {
            writeln!(out, "  c{i} -> c{j};").unwrap();
        }
        for (i, j) in &self.unknown {
            writeln!(out, "  c{i} -> c{j} [style=dashed, label=\"?\"];").unwrap();
        }
        out.push_str("}\n");
        out
    }
}
