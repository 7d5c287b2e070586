//! The lattice of expressively different fragments: distinct closures under
//! inclusion, reduced to cover edges.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::closure::Engine;
use crate::relation::{Relation, RelationSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Node {
    pub id: usize,
    pub closed: RelationSet,
    /// Fewest-element minimal generator, ties broken lexicographically on
    /// canonical order.
    pub label: RelationSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lattice {
    pub universe: RelationSet,
    pub nodes: Vec<Node>,
    /// `(covered, covering)` node ids.
    pub edges: Vec<(usize, usize)>,
}

fn label_key(s: RelationSet) -> (usize, Vec<usize>) {
    (s.len(), s.iter().filter_map(Relation::canonical_index).collect())
}

impl Lattice {
    pub fn build(engine: &Engine) -> Lattice {
        let closed = engine.closed_sets();
        let index: HashMap<RelationSet, usize> = closed.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut label: Vec<Option<RelationSet>> = vec![None; closed.len()];
        for s in engine.universe().subsets() {
            let c = engine.close(s).expect("subset of the universe");
            let i = index[&c];
            let minimal = s.iter().all(|r| engine.close(s.without(r)).expect("subset") != c);
            if minimal && label[i].is_none_or(|l| label_key(s) < label_key(l)) {
                label[i] = Some(s);
            }
        }
        let nodes: Vec<Node> = closed
            .iter()
            .zip(label)
            .enumerate()
            .map(|(id, (c, l))| Node { id, closed: *c, label: l.expect("every closed set has a generator") })
            .collect();
        let below = |a: RelationSet, b: RelationSet| a != b && a.is_subset(b);
        let mut edges = Vec::new();
        for a in &nodes {
            for b in &nodes {
                if below(a.closed, b.closed) && !nodes.iter().any(|c| below(a.closed, c.closed) && below(c.closed, b.closed)) {
                    edges.push((a.id, b.id));
                }
            }
        }
        Lattice { universe: engine.universe(), nodes, edges }
    }

    pub fn node_of(&self, closed: RelationSet) -> Option<&Node> {
        self.nodes.iter().find(|n| n.closed == closed)
    }

    pub fn top(&self) -> &Node {
        self.nodes.last().expect("a lattice has at least one node")
    }

    pub fn bottom(&self) -> &Node {
        &self.nodes[0]
    }

    /// Whether `symmetric` maps nodes to nodes and cover edges to cover edges.
    pub fn symmetric_is_automorphism(&self) -> bool {
        let image = |id: usize| self.node_of(self.nodes[id].closed.symmetric()).map(|n| n.id);
        let Some(map) = (0..self.nodes.len()).map(image).collect::<Option<Vec<usize>>>() else {
            return false;
        };
        let mut mapped: Vec<(usize, usize)> = self.edges.iter().map(|&(a, b)| (map[a], map[b])).collect();
        let mut edges = self.edges.clone();
        mapped.sort();
        edges.sort();
        mapped == edges
    }

    /// DOT digraph, edges pointing from covered to covering node.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lattice {\n  rankdir=BT;\n");
        for n in &self.nodes {
            let closed = n.closed.tokens().join(",");
            writeln!(out, "  n{} [label=\"{}\", tooltip=\"{{{}}}\"];", n.id, n.label, closed).unwrap();
        }
        for (a, b) in &self.edges {
            writeln!(out, "  n{a} -> n{b};").unwrap();
        }
        out.push_str("}\n");
        out
    }
}
