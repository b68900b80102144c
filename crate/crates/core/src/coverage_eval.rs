//! ConceptNet-style knowledge graph, hop-bounded relatedness, and coverage.
//!
//! Hierarchical relations cost one hop in either direction; substitution
//! relations (Synonym by default) cost nothing, so a label and its synonyms
//! are interchangeable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use flate2::read::MultiGzDecoder;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tuple_extraction::{top_n, RankedPairs};

pub const DEFAULT_MAX_HOPS: u32 = 3;

pub const HIERARCHICAL_RELATIONS: [&str; 5] = ["LocatedNear", "HasA", "PartOf", "MadeOf", "IsA"];
pub const SUBSTITUTION_RELATIONS: [&str; 1] = ["Synonym"];
pub const RELATED_TO: &str = "RelatedTo";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RelationClass {
    #[default]
    Hierarchical,
    Substitution,
    Ignore,
}

impl FromStr for RelationClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hierarchical" => Ok(RelationClass::Hierarchical),
            "substitution" => Ok(RelationClass::Substitution),
            "ignore" => Ok(RelationClass::Ignore),
            other => Err(Error::InvalidInput(format!(
                "unknown relation class {other:?}"
            ))),
        }
    }
}

/// Which relation names count as hierarchical hops and which as free substitutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationConfig {
    pub hierarchical: BTreeSet<String>,
    pub substitution: BTreeSet<String>,
}

impl Default for RelationConfig {
    fn default() -> Self {
        Self::with_related_to(RelationClass::Hierarchical)
    }
}

impl RelationConfig {
    pub fn with_related_to(class: RelationClass) -> Self {
        let mut config = RelationConfig {
            hierarchical: HIERARCHICAL_RELATIONS
                .iter()
                .map(|r| r.to_string())
                .collect(),
            substitution: SUBSTITUTION_RELATIONS
                .iter()
                .map(|r| r.to_string())
                .collect(),
        };
        match class {
            RelationClass::Hierarchical => config.hierarchical.insert(RELATED_TO.to_string()),
            RelationClass::Substitution => config.substitution.insert(RELATED_TO.to_string()),
            RelationClass::Ignore => false,
        };
        config
    }

    pub fn class_of(&self, relation: &str) -> RelationClass {
        if self.hierarchical.contains(relation) {
            RelationClass::Hierarchical
        } else if self.substitution.contains(relation) {
            RelationClass::Substitution
        } else {
            RelationClass::Ignore
        }
    }
}

/// Immutable concept graph with typed, undirected-for-search edges.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    config: RelationConfig,
    ids: BTreeMap<String, usize>,
    edges: BTreeSet<(String, String, String)>,
    /// Neighbours with hop cost (1 hierarchical, 0 substitution).
    adjacency: Vec<Vec<(usize, u32)>>,
}

impl KnowledgeGraph {
    /// Builds a graph from `(subject, relation, object)` triples. Labels are
    /// normalized; edges outside both relation classes are dropped.
    pub fn from_edges<I, S>(edges: I, config: RelationConfig) -> Self
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: AsRef<str>,
    {
        let mut kg = KnowledgeGraph {
            config,
            ..Default::default()
        };
        for (s, r, o) in edges {
            kg.insert(s.as_ref(), r.as_ref(), o.as_ref());
        }
        kg
    }

    fn intern(&mut self, label: String) -> usize {
        let next = self.ids.len();
        let id = *self.ids.entry(label).or_insert(next);
        if id == self.adjacency.len() {
            self.adjacency.push(Vec::new());
        }
        id
    }

    fn insert(&mut self, subject: &str, relation: &str, object: &str) {
        let cost = match self.config.class_of(relation) {
            RelationClass::Hierarchical => 1,
            RelationClass::Substitution => 0,
            RelationClass::Ignore => return,
        };
        let (s, o) = (normalize_concept(subject), normalize_concept(object));
        if s.is_empty() || o.is_empty() {
            return;
        }
        if !self
            .edges
            .insert((s.clone(), relation.to_string(), o.clone()))
        {
            return;
        }
        let (a, b) = (self.intern(s), self.intern(o));
        self.adjacency[a].push((b, cost));
        self.adjacency[b].push((a, cost));
    }

    pub fn config(&self) -> &RelationConfig {
        &self.config
    }

    pub fn contains(&self, label: &str) -> bool {
        self.ids.contains_key(label)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.ids.keys().map(String::as_str)
    }

    pub fn concept_count(&self) -> usize {
        self.ids.len()
    }

    /// `(subject, relation, object)` triples in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.edges
            .iter()
            .map(|(s, r, o)| (s.as_str(), r.as_str(), o.as_str()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Minimal hop cost between `a` and `b` if it is at most `max_hops`.
    ///
    /// Layered breadth-first search: layer `k` holds every concept at cost
    /// exactly `k`, closed under zero-cost substitution edges.
    pub fn distance(&self, a: &str, b: &str, max_hops: u32) -> Option<u32> {
        let (&src, &dst) = (self.ids.get(a)?, self.ids.get(b)?);
        let mut visited = vec![false; self.adjacency.len()];
        let mut layer = vec![src];
        visited[src] = true;
        let mut cost = 0;
        loop {
            // zero-cost closure of the current layer
            let mut i = 0;
            while i < layer.len() {
                for &(next, w) in &self.adjacency[layer[i]] {
                    if w == 0 && !visited[next] {
                        visited[next] = true;
                        layer.push(next);
                    }
                }
                i += 1;
            }
            if layer.contains(&dst) {
                return Some(cost);
            }
            if cost == max_hops {
                return None;
            }
            let mut next_layer = Vec::new();
            for &node in &layer {
                for &(next, w) in &self.adjacency[node] {
                    if w == 1 && !visited[next] {
                        visited[next] = true;
                        next_layer.push(next);
                    }
                }
            }
            if next_layer.is_empty() {
                return None;
            }
            layer = next_layer;
            cost += 1;
        }
    }
}

/// Strips a ConceptNet URI (`/c/en/cell_phone/n`) to `cell phone`; bare labels
/// are lowercased and underscore-mapped the same way.
pub fn normalize_concept(raw: &str) -> String {
    let term = match raw.strip_prefix("/c/") {
        Some(rest) => rest.split('/').nth(1).unwrap_or(""),
        None => raw,
    };
    term.replace('_', " ")
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Language code of a ConceptNet URI; bare labels count as English.
fn concept_language(raw: &str) -> Option<&str> {
    match raw.strip_prefix("/c/") {
        Some(rest) => rest.split('/').next(),
        None => Some("en"),
    }
}

fn relation_name(raw: &str) -> &str {
    raw.strip_prefix("/r/").unwrap_or(raw).trim_end_matches('/')
}

/// Reads an assertion dump: TSV rows of `relation, subject, object`, either as
/// ConceptNet URIs or bare names. Rows of the public five-column assertions
/// file (`/a/...` URI first) are accepted too. Gzip input is detected by magic bytes.
pub fn load_kg(path: impl AsRef<Path>, config: RelationConfig) -> Result<KnowledgeGraph> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let gz = reader
        .fill_buf()
        .map_err(|e| Error::io(path, e))?
        .starts_with(&[0x1f, 0x8b]);
    let reader: Box<dyn BufRead> = if gz {
        Box::new(BufReader::new(MultiGzDecoder::new(reader)))
    } else {
        Box::new(reader)
    };
    let kg = read_kg(reader, config).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    if kg.is_empty() {
        log::warn!(
            "{}: knowledge graph is empty after filtering",
            path.display()
        );
    }
    Ok(kg)
}

pub fn read_kg(reader: impl Read, config: RelationConfig) -> Result<KnowledgeGraph> {
    let mut kg = KnowledgeGraph {
        config,
        ..Default::default()
    };
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io("<knowledge graph>", e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols: Vec<&str> = line.split('\t').collect();
        if cols.first().is_some_and(|c| c.starts_with("/a/")) {
            cols.remove(0);
        }
        let [relation, subject, object] = cols[..cols.len().min(3)] else {
            return Err(Error::line(
                i + 1,
                format!(
                    "expected relation, subject and object columns, found {}",
                    cols.len()
                ),
            ));
        };
        if [relation, subject, object]
            .iter()
            .any(|c| c.trim().is_empty())
        {
            return Err(Error::line(i + 1, "empty column"));
        }
        if concept_language(subject) != Some("en") || concept_language(object) != Some("en") {
            continue;
        }
        if normalize_concept(subject).is_empty() || normalize_concept(object).is_empty() {
            return Err(Error::line(i + 1, "concept URI without a term"));
        }
        kg.insert(subject, relation_name(relation), object);
    }
    Ok(kg)
}

pub fn hierarchical_distance(kg: &KnowledgeGraph, a: &str, b: &str, max_hops: u32) -> Option<u32> {
    kg.distance(a, b, max_hops)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairCoverage {
    pub nucleus: String,
    pub satellite: String,
    pub covered: bool,
    pub distance: Option<u32>,
}

/// Coverage of the top `n` ranked pairs: the share confirmed within `max_hops`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub n: usize,
    pub max_hops: u32,
    pub covered: usize,
    pub total: usize,
    pub coverage: f64,
    pub per_pair: Vec<PairCoverage>,
}

impl CoverageReport {
    /// Exact `covered / total`.
    pub fn ratio(&self) -> Ratio<usize> {
        Ratio::new(self.covered, self.total)
    }
}

pub fn coverage(
    kg: &KnowledgeGraph,
    pairs: &RankedPairs,
    n: usize,
    max_hops: u32,
) -> Result<CoverageReport> {
    if max_hops == 0 {
        return Err(Error::InvalidInput("max_hops must be at least 1".into()));
    }
    let evaluated = top_n(pairs, n)?;
    if evaluated.is_empty() {
        return Err(Error::UndefinedCoverage);
    }
    let per_pair: Vec<PairCoverage> = evaluated
        .iter()
        .map(|p| {
            let distance = kg.distance(&p.nucleus, &p.satellite, max_hops);
            PairCoverage {
                nucleus: p.nucleus.clone(),
                satellite: p.satellite.clone(),
                covered: distance.is_some(),
                distance,
            }
        })
        .collect();
    let covered = per_pair.iter().filter(|p| p.covered).count();
    let total = per_pair.len();
    Ok(CoverageReport {
        n,
        max_hops,
        covered,
        total,
        coverage: covered as f64 / total as f64,
        per_pair,
    })
}

/// `top_n<TAB>coverage` rows.
pub fn coverage_tsv(reports: &[CoverageReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "{}\t{:.4}", r.n, r.coverage);
    }
    out
}
