//! Generators and brute-force oracles shared by the integration targets.
//!
//! Oracles here deliberately avoid the library's own traversal code: they
//! recurse where the library iterates and enumerate where it searches.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use aspect_hierarchy::aspect_extraction::FOREST;
use aspect_hierarchy::segmentation::Child;
use aspect_hierarchy::{
    AspectDiscourseTree, AspectForest, AspectLeaf, Node, Nuclearity, RankedPair,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const PHONE_PAIRS: [(&str, &str); 9] = [
    ("phone", "case"),
    ("phone", "battery"),
    ("phone", "headset"),
    ("phone", "bluetooth"),
    ("price", "battery"),
    ("battery", "charge"),
    ("headset", "bluetooth"),
    ("case", "phone"),
    ("phone", "price"),
];

/// Nested `(label, children)` rendering of a forest, roots in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape(pub String, pub Vec<Shape>);

pub fn shape(label: &str, children: Vec<Shape>) -> Shape {
    Shape(label.to_string(), children)
}

pub fn forest_shape(forest: &AspectForest) -> Vec<Shape> {
    fn go(f: &AspectForest, id: usize) -> Shape {
        let n = f.node(id);
        Shape(
            n.label.clone(),
            n.children.iter().map(|&c| go(f, c)).collect(),
        )
    }
    forest.roots().iter().map(|&r| go(forest, r)).collect()
}

// ---------------------------------------------------------------- ADTs

const RELATIONS: [&str; 5] = [
    "Elaboration",
    "Background",
    "Cause",
    "Contrast",
    "Evaluation",
];
const ASPECT_VOCAB: [&str; 7] = [
    "phone",
    "case",
    "battery",
    "screen",
    "price",
    "battery life",
    "charger",
];

/// Random valid ADT with `1..=max_leaves` leaves and `0..=max_aspects`
/// distinct aspects per leaf. Roughly one tree in five gets a forest root.
pub fn random_adt(
    rng: &mut ChaCha8Rng,
    max_leaves: usize,
    max_aspects: usize,
) -> AspectDiscourseTree {
    let n = rng.random_range(1..=max_leaves);
    let mut next_id = 0;
    let root = if n >= 2 && rng.random_bool(0.2) {
        let k = rng.random_range(2..=n.min(4));
        let children = split(rng, n, k)
            .into_iter()
            .map(|size| Child::nucleus(random_subtree(rng, size, max_aspects, &mut next_id)))
            .collect();
        Node::internal(FOREST, children)
    } else {
        random_subtree(rng, n, max_aspects, &mut next_id)
    };
    AspectDiscourseTree::new(root).expect("generator emits valid aspect trees")
}

fn split(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut sizes = vec![1; k];
    for _ in 0..n - k {
        sizes[rng.random_range(0..k)] += 1;
    }
    sizes
}

fn random_subtree(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_aspects: usize,
    next_id: &mut usize,
) -> Node<AspectLeaf> {
    if n == 1 {
        let count = rng.random_range(0..=max_aspects);
        let labels: Vec<&str> = ASPECT_VOCAB.choose_multiple(rng, count).copied().collect();
        let leaf = AspectLeaf::new(*next_id, &labels).unwrap();
        *next_id += 1;
        return Node::Leaf(leaf);
    }
    let k = rng.random_range(2..=n.min(4));
    let nucleus_at = rng.random_range(0..k);
    let mut satellite_at = rng.random_range(0..k - 1);
    if satellite_at >= nucleus_at {
        satellite_at += 1;
    }
    let children = split(rng, n, k)
        .into_iter()
        .enumerate()
        .map(|(i, size)| {
            let nuclearity = if i == nucleus_at {
                Nuclearity::Nucleus
            } else if i == satellite_at || rng.random_bool(0.5) {
                Nuclearity::Satellite
            } else {
                Nuclearity::Nucleus
            };
            Child {
                nuclearity,
                node: random_subtree(rng, size, max_aspects, next_id),
            }
        })
        .collect();
    Node::internal(*RELATIONS.choose(rng).unwrap(), children)
}

/// Per-node enumeration: every internal node crosses the head aspects of its
/// nucleus children with those of its satellite children.
pub fn oracle_tuples(root: &Node<AspectLeaf>) -> Vec<(String, String, String)> {
    fn head(node: &Node<AspectLeaf>) -> Vec<String> {
        match node {
            Node::Leaf(leaf) => leaf.aspects.iter().map(|a| a.label().to_string()).collect(),
            Node::Internal { children, .. } => head(
                &children
                    .iter()
                    .find(|c| c.nuclearity == Nuclearity::Nucleus)
                    .unwrap()
                    .node,
            ),
        }
    }
    fn visit(node: &Node<AspectLeaf>, out: &mut Vec<(String, String, String)>) {
        let Node::Internal { relation, children } = node else {
            return;
        };
        for n in children
            .iter()
            .filter(|c| c.nuclearity == Nuclearity::Nucleus)
        {
            for s in children
                .iter()
                .filter(|c| c.nuclearity == Nuclearity::Satellite)
            {
                for a in head(&n.node) {
                    for b in head(&s.node) {
                        if a != b {
                            out.push((a.clone(), b, relation.clone()));
                        }
                    }
                }
            }
        }
        for c in children {
            visit(&c.node, out);
        }
    }
    let mut out = Vec::new();
    visit(root, &mut out);
    out
}

/// Counts `(nucleus, satellite)` pairs and sorts by count descending, then
/// lexicographically.
pub fn oracle_ranking(tuples: &[(String, String, String)]) -> Vec<(String, String, u64)> {
    let mut counts: HashMap<(String, String), u64> = HashMap::new();
    for (a, b, _) in tuples {
        *counts.entry((a.clone(), b.clone())).or_default() += 1;
    }
    let mut ranked: Vec<_> = counts.into_iter().map(|((a, b), c)| (a, b, c)).collect();
    ranked.sort_by(|x, y| y.2.cmp(&x.2).then_with(|| (&x.0, &x.1).cmp(&(&y.0, &y.1))));
    ranked
}

// ---------------------------------------------------------------- graphs

const KG_RELATIONS: [&str; 9] = [
    "IsA",
    "PartOf",
    "HasA",
    "MadeOf",
    "LocatedNear",
    "Synonym",
    "RelatedTo",
    "Antonym",
    "UsedFor",
];

/// Random `(subject, relation, object)` triples over `c0..c{k}`.
pub fn random_triples(
    rng: &mut ChaCha8Rng,
    max_concepts: usize,
    max_edges: usize,
) -> Vec<(String, String, String)> {
    let concepts = rng.random_range(1..=max_concepts);
    let edges = rng.random_range(0..=max_edges);
    (0..edges)
        .map(|_| {
            let s = format!("c{}", rng.random_range(0..concepts));
            let o = format!("c{}", rng.random_range(0..concepts));
            (s, KG_RELATIONS.choose(rng).unwrap().to_string(), o)
        })
        .collect()
}

/// Hop cost of a relation under the default configuration.
pub fn default_cost(relation: &str) -> Option<u32> {
    match relation {
        "IsA" | "PartOf" | "HasA" | "MadeOf" | "LocatedNear" | "RelatedTo" => Some(1),
        "Synonym" => Some(0),
        _ => None,
    }
}

/// Minimal cost from `source` to every concept reachable within `max_hops`,
/// found by enumerating every simple path whose cost stays in budget.
pub fn oracle_distances(
    triples: &[(String, String, String)],
    cost: impl Fn(&str) -> Option<u32>,
    source: &str,
    max_hops: u32,
) -> BTreeMap<String, u32> {
    let mut adj: BTreeMap<&str, Vec<(&str, u32)>> = BTreeMap::new();
    for (s, r, o) in triples {
        if let Some(w) = cost(r) {
            adj.entry(s).or_default().push((o, w));
            adj.entry(o).or_default().push((s, w));
        }
    }
    let mut best = BTreeMap::new();
    if !adj.contains_key(source) {
        return best;
    }
    fn walk<'a>(
        adj: &BTreeMap<&'a str, Vec<(&'a str, u32)>>,
        at: &'a str,
        spent: u32,
        budget: u32,
        on_path: &mut BTreeSet<&'a str>,
        best: &mut BTreeMap<String, u32>,
    ) {
        let slot = best.entry(at.to_string()).or_insert(u32::MAX);
        *slot = (*slot).min(spent);
        for &(next, w) in &adj[at] {
            if spent + w <= budget && on_path.insert(next) {
                walk(adj, next, spent + w, budget, on_path, best);
                on_path.remove(next);
            }
        }
    }
    let mut on_path = BTreeSet::from([source]);
    walk(&adj, source, 0, max_hops, &mut on_path, &mut best);
    best
}

// ---------------------------------------------------------------- forests

/// Random pair sequence over a small vocabulary with non-increasing counts.
/// Self-pairs and repeats are included on purpose.
pub fn random_ranking(rng: &mut ChaCha8Rng, vocab: usize, max_pairs: usize) -> Vec<RankedPair> {
    let len = rng.random_range(1..=max_pairs);
    let mut counts: Vec<u64> = (0..len).map(|_| rng.random_range(1..=50)).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts
        .into_iter()
        .map(|c| {
            let a = format!("a{}", rng.random_range(0..vocab));
            let b = if rng.random_bool(0.05) {
                a.clone()
            } else {
                format!("a{}", rng.random_range(0..vocab))
            };
            RankedPair::new(a, b, c)
        })
        .collect()
}

/// Structural checks written against the public accessors only: parent links
/// agree with child lists, parents chains terminate at a listed root, every
/// node is reached from exactly one root, and each canonical entry is the
/// smallest id carrying its label.
pub fn oracle_invariants(f: &AspectForest) -> Result<(), String> {
    let n = f.len();
    for node in f.nodes() {
        for &c in &node.children {
            if f.node(c).parent != Some(node.id) {
                return Err(format!("child {c} of {} disagrees on its parent", node.id));
            }
        }
        if let Some(p) = node.parent {
            if !f.node(p).children.contains(&node.id) {
                return Err(format!(
                    "node {} missing from its parent's children",
                    node.id
                ));
            }
        }
        let mut at = node.id;
        let mut steps = 0;
        while let Some(p) = f.node(at).parent {
            at = p;
            steps += 1;
            if steps > n {
                return Err(format!("cycle above node {}", node.id));
            }
        }
        if !f.roots().contains(&at) {
            return Err(format!("node {} climbs to unlisted root {at}", node.id));
        }
    }
    let mut seen = vec![0usize; n];
    let mut stack: Vec<usize> = f.roots().to_vec();
    while let Some(id) = stack.pop() {
        seen[id] += 1;
        if seen[id] > 1 {
            return Err(format!("node {id} reached twice"));
        }
        stack.extend(&f.node(id).children);
    }
    if let Some(id) = seen.iter().position(|&s| s != 1) {
        return Err(format!("node {id} unreachable"));
    }
    let mut first: BTreeMap<&str, usize> = BTreeMap::new();
    for node in f.nodes() {
        first.entry(node.label.as_str()).or_insert(node.id);
    }
    for (label, id) in first {
        if f.canonical(label) != Some(id) {
            return Err(format!(
                "canonical({label}) = {:?}, expected {id}",
                f.canonical(label)
            ));
        }
    }
    Ok(())
}

/// Edge set of a DOT digraph as label pairs.
pub fn parse_dot_edges(dot: &str) -> BTreeSet<(String, String)> {
    let mut labels = HashMap::new();
    let mut edges = Vec::new();
    for line in dot.lines().map(str::trim) {
        if let Some((lhs, rhs)) = line.split_once(" -> ") {
            let rhs = rhs.trim_end_matches(';');
            let rhs = rhs.split_whitespace().next().unwrap();
            edges.push((lhs.to_string(), rhs.to_string()));
        } else if let Some((id, rest)) = line.split_once(" [label=\"") {
            if id.starts_with('n') {
                let label = rest
                    .trim_end_matches("\"];")
                    .replace("\\\"", "\"")
                    .replace("\\\\", "\\");
                labels.insert(id.to_string(), label);
            }
        }
    }
    edges
        .into_iter()
        .map(|(a, b)| (labels[&a].clone(), labels[&b].clone()))
        .collect()
}
