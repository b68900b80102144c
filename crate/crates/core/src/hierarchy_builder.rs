//! Greedy construction of an aspect forest from ranked nucleus/satellite pairs.
//!
//! Pairs are folded in rank order. A nucleus with no node yet starts a new
//! tree; otherwise its canonical (first-inserted) node is the attachment
//! point. A satellite that is the root of another tree is merged in whole.
//! Otherwise the satellite becomes a new child, unless it already labels an
//! ancestor of the attachment point. Labels may repeat across the forest.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tuple_extraction::{RankedPair, RankedPairs};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyNode {
    pub id: usize,
    pub label: String,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    /// Count of the pair that attached this node; `None` for original roots.
    pub count: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkipReason {
    /// The satellite already labels the attachment point's root path.
    Cycle,
    /// The pair relates a label to itself.
    SelfMerge,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::Cycle => "cycle",
            SkipReason::SelfMerge => "self-merge",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SkipReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(SkipReason::Cycle),
            "self-merge" => Ok(SkipReason::SelfMerge),
            other => Err(Error::InvalidInput(format!(
                "unknown skip reason {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedPair {
    pub nucleus: String,
    pub satellite: String,
    pub reason: SkipReason,
}

/// What a single pair did to the forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOutcome {
    Attached {
        parent: usize,
        child: usize,
    },
    /// The tree rooted at `root` now hangs under `parent`.
    Merged {
        parent: usize,
        root: usize,
    },
    /// `parent` already had a child with the satellite's label.
    AlreadyPresent {
        parent: usize,
        child: usize,
    },
    Skipped(SkipReason),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AspectForest {
    nodes: Vec<HierarchyNode>,
    roots: Vec<usize>,
    canonical: HashMap<String, usize>,
    skip_log: Vec<SkippedPair>,
}

impl AspectForest {
    pub fn nodes(&self) -> &[HierarchyNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &HierarchyNode {
        &self.nodes[id]
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// First-inserted node carrying `label`.
    pub fn canonical(&self, label: &str) -> Option<usize> {
        self.canonical.get(label).copied()
    }

    pub fn skip_log(&self) -> &[SkippedPair] {
        &self.skip_log
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `id` followed by its ancestors up to the root.
    pub fn path_to_root(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(id), move |&n| self.nodes[n].parent)
    }

    pub fn root_of(&self, id: usize) -> usize {
        self.path_to_root(id)
            .last()
            .expect("path contains at least the node itself")
    }

    pub fn child_labels(&self, id: usize) -> Vec<&str> {
        self.nodes[id]
            .children
            .iter()
            .map(|&c| self.nodes[c].label.as_str())
            .collect()
    }

    /// Whether some node labeled `parent` has a child labeled `child`.
    pub fn has_edge(&self, parent: &str, child: &str) -> bool {
        self.nodes
            .iter()
            .any(|n| n.label == parent && n.children.iter().any(|&c| self.nodes[c].label == child))
    }

    fn add_node(&mut self, label: &str, parent: Option<usize>, count: Option<u64>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(HierarchyNode {
            id,
            label: label.to_string(),
            children: Vec::new(),
            parent,
            count,
        });
        self.canonical.entry(label.to_string()).or_insert(id);
        match parent {
            Some(p) => self.nodes[p].children.push(id),
            None => self.roots.push(id),
        }
        id
    }

    /// Structural checks: parent/child agreement, acyclicity, full coverage
    /// from the roots and canonical minimality.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for node in &self.nodes {
            if let Some(p) = node.parent {
                if !self.nodes[p].children.contains(&node.id) {
                    return Err(format!(
                        "node {} names parent {p}, which does not list it",
                        node.id
                    ));
                }
            } else if !self.roots.contains(&node.id) {
                return Err(format!("parentless node {} is not a root", node.id));
            }
            if self
                .path_to_root(node.id)
                .take(self.nodes.len() + 1)
                .count()
                > self.nodes.len()
            {
                return Err(format!("node {} lies on a cycle", node.id));
            }
        }
        let mut seen = vec![0usize; self.nodes.len()];
        let mut stack: Vec<usize> = self.roots.clone();
        while let Some(id) = stack.pop() {
            if self.nodes[id].parent.is_some() && self.roots.contains(&id) {
                return Err(format!("root {id} has a parent"));
            }
            seen[id] += 1;
            if seen[id] > 1 {
                return Err(format!("node {id} is reachable more than once"));
            }
            stack.extend(self.nodes[id].children.iter().copied());
        }
        if let Some(id) = seen.iter().position(|&s| s == 0) {
            return Err(format!("node {id} is unreachable from the roots"));
        }
        let mut minimal: HashMap<&str, usize> = HashMap::new();
        for node in &self.nodes {
            minimal.entry(node.label.as_str()).or_insert(node.id);
        }
        if minimal.len() != self.canonical.len() {
            return Err("canonical map and node labels disagree".into());
        }
        for (label, &id) in &minimal {
            if self.canonical.get(*label) != Some(&id) {
                return Err(format!(
                    "canonical[{label:?}] is not the minimal node id {id}"
                ));
            }
        }
        Ok(())
    }

    /// `{"roots": [id], "nodes": {id: {"label": ..., "children": [id]}}}`
    pub fn to_json(&self) -> Value {
        let nodes: BTreeMap<usize, Value> = self
            .nodes
            .iter()
            .map(|n| (n.id, json!({ "label": n.label, "children": n.children })))
            .collect();
        json!({ "roots": self.roots, "nodes": nodes })
    }

    /// Rebuilds a forest from its JSON form. Counts and the skip log are not part of it.
    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidInput(format!("forest JSON: {msg}"));
        let ids = |v: &Value| -> Result<Vec<usize>> {
            v.as_array()
                .ok_or_else(|| bad("expected an array of node ids"))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .map(|x| x as usize)
                        .ok_or_else(|| bad("node ids must be integers"))
                })
                .collect()
        };
        let roots = ids(value.get("roots").ok_or_else(|| bad("missing \"roots\""))?)?;
        let raw = value
            .get("nodes")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing \"nodes\" object"))?;
        let mut nodes = Vec::with_capacity(raw.len());
        for id in 0..raw.len() {
            let entry = raw
                .get(&id.to_string())
                .ok_or_else(|| bad(&format!("node ids must be 0..{}", raw.len())))?;
            let label = entry
                .get("label")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("node without a label"))?;
            let children = ids(entry
                .get("children")
                .ok_or_else(|| bad("node without children"))?)?;
            nodes.push(HierarchyNode {
                id,
                label: label.to_string(),
                children,
                parent: None,
                count: None,
            });
        }
        for id in 0..nodes.len() {
            for c in nodes[id].children.clone() {
                let child = nodes
                    .get_mut(c)
                    .ok_or_else(|| bad(&format!("unknown child id {c}")))?;
                if child.parent.replace(id).is_some() {
                    return Err(bad(&format!("node {c} has two parents")));
                }
            }
        }
        let mut canonical = HashMap::new();
        for n in &nodes {
            canonical.entry(n.label.clone()).or_insert(n.id);
        }
        let forest = AspectForest {
            nodes,
            roots,
            canonical,
            skip_log: Vec::new(),
        };
        forest.check_invariants().map_err(|e| bad(&e))?;
        Ok(forest)
    }

    /// `nucleus<TAB>satellite<TAB>reason` lines.
    pub fn skip_log_tsv(&self) -> String {
        let mut out = String::new();
        for s in &self.skip_log {
            let _ = writeln!(out, "{}\t{}\t{}", s.nucleus, s.satellite, s.reason);
        }
        out
    }
}

/// Left fold over ranked pairs; `build_hierarchy` is `insert` over the whole ranking.
#[derive(Debug, Clone, Default)]
pub struct HierarchyBuilder {
    forest: AspectForest,
}

impl HierarchyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forest(&self) -> &AspectForest {
        &self.forest
    }

    pub fn finish(self) -> AspectForest {
        self.forest
    }

    pub fn insert(&mut self, pair: &RankedPair) -> PairOutcome {
        let outcome = self.apply(&pair.nucleus, &pair.satellite, pair.count);
        if let PairOutcome::Skipped(reason) = outcome {
            self.forest.skip_log.push(SkippedPair {
                nucleus: pair.nucleus.clone(),
                satellite: pair.satellite.clone(),
                reason,
            });
        }
        outcome
    }

    fn apply(&mut self, nucleus: &str, satellite: &str, count: u64) -> PairOutcome {
        if nucleus == satellite {
            return PairOutcome::Skipped(SkipReason::SelfMerge);
        }
        let forest = &mut self.forest;
        let parent = match forest.canonical(nucleus) {
            Some(id) => id,
            None => forest.add_node(nucleus, None, None),
        };

        let sub_root = forest
            .roots
            .iter()
            .copied()
            .find(|&r| forest.nodes[r].label == satellite);
        if let Some(root) = sub_root {
            if forest.root_of(parent) != root {
                forest.roots.retain(|&r| r != root);
                forest.nodes[root].parent = Some(parent);
                forest.nodes[root].count = Some(count);
                forest.nodes[parent].children.push(root);
                return PairOutcome::Merged { parent, root };
            }
            // same tree: the satellite is the root above `parent`, which the cycle guard rejects
        }

        if forest
            .path_to_root(parent)
            .any(|id| forest.nodes[id].label == satellite)
        {
            return PairOutcome::Skipped(SkipReason::Cycle);
        }
        if let Some(&child) = forest.nodes[parent]
            .children
            .iter()
            .find(|&&c| forest.nodes[c].label == satellite)
        {
            return PairOutcome::AlreadyPresent { parent, child };
        }
        let child = forest.add_node(satellite, Some(parent), Some(count));
        PairOutcome::Attached { parent, child }
    }
}

/// Continues folding from an existing forest, skip log included.
impl From<AspectForest> for HierarchyBuilder {
    fn from(forest: AspectForest) -> Self {
        HierarchyBuilder { forest }
    }
}

pub fn build_hierarchy(pairs: &RankedPairs) -> AspectForest {
    let mut builder = HierarchyBuilder::new();
    for pair in pairs {
        builder.insert(pair);
    }
    builder.finish()
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz digraph with one DOT node per forest node, so repeated labels stay distinct.
pub fn export_dot(forest: &AspectForest, annotate_counts: bool) -> String {
    let mut out = String::from("digraph aspects {\n    node [shape=box];\n");
    for n in forest.nodes() {
        let _ = writeln!(out, "    n{} [label=\"{}\"];", n.id, dot_escape(&n.label));
    }
    for n in forest.nodes() {
        for &c in &n.children {
            match forest.node(c).count.filter(|_| annotate_counts) {
                Some(count) => {
                    let _ = writeln!(out, "    n{} -> n{} [label=\"{count}\"];", n.id, c);
                }
                None => {
                    let _ = writeln!(out, "    n{} -> n{};", n.id, c);
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Parent/child label pairs, one per edge, deduplicated.
pub fn hierarchy_pairs(forest: &AspectForest) -> BTreeSet<(String, String)> {
    forest
        .nodes()
        .iter()
        .flat_map(|n| {
            n.children
                .iter()
                .map(move |&c| (n.label.clone(), forest.node(c).label.clone()))
        })
        .collect()
}
