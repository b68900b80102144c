//! Nucleus/satellite aspect tuples and their corpus-level ranking.

use std::borrow::Borrow;
use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::aspect_extraction::{Aspect, AspectDiscourseTree, AspectLeaf};
use crate::error::{Error, Result};
use crate::segmentation::tree::Node;

/// An ordered (nucleus aspect, satellite aspect, relation) triple with distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AspectTuple {
    pub nucleus: Aspect,
    pub satellite: Aspect,
    pub relation: String,
}

impl AspectTuple {
    /// `None` when both aspects carry the same label.
    pub fn new(nucleus: Aspect, satellite: Aspect, relation: impl Into<String>) -> Option<Self> {
        (nucleus != satellite).then(|| AspectTuple {
            nucleus,
            satellite,
            relation: relation.into(),
        })
    }
}

/// Head leaf of a subtree: follow the leftmost nucleus child down to a leaf.
pub fn head_leaf(mut node: &Node<AspectLeaf>) -> &AspectLeaf {
    loop {
        match node {
            Node::Leaf(leaf) => return leaf,
            Node::Internal { children, .. } => {
                node = &children
                    .iter()
                    .find(|c| c.nuclearity.is_nucleus())
                    .unwrap_or(&children[0])
                    .node;
            }
        }
    }
}

/// Breadth-first over internal nodes; at each node with both nuclei and
/// satellites, pairs the head-leaf aspects of every nucleus child with those
/// of every satellite child.
pub fn extract_tuples(adt: &AspectDiscourseTree) -> Vec<AspectTuple> {
    let mut out = Vec::new();
    let mut queue = VecDeque::from([adt.root()]);
    while let Some(node) = queue.pop_front() {
        let Node::Internal { relation, children } = node else {
            continue;
        };
        let (nuclei, satellites): (Vec<_>, Vec<_>) =
            children.iter().partition(|c| c.nuclearity.is_nucleus());
        for n in &nuclei {
            let n_head = head_leaf(&n.node);
            for s in &satellites {
                let s_head = head_leaf(&s.node);
                for a in &n_head.aspects {
                    for b in &s_head.aspects {
                        out.extend(AspectTuple::new(a.clone(), b.clone(), relation.as_str()));
                    }
                }
            }
        }
        queue.extend(children.iter().map(|c| &c.node));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedPair {
    pub nucleus: String,
    pub satellite: String,
    pub count: u64,
}

impl RankedPair {
    pub fn new(nucleus: impl Into<String>, satellite: impl Into<String>, count: u64) -> Self {
        RankedPair {
            nucleus: nucleus.into(),
            satellite: satellite.into(),
            count,
        }
    }

    fn rank_key(&self) -> (std::cmp::Reverse<u64>, &str, &str) {
        (
            std::cmp::Reverse(self.count),
            &self.nucleus,
            &self.satellite,
        )
    }
}

/// Pair counts sorted by count descending, then by (nucleus, satellite) ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankedPairs {
    entries: Vec<RankedPair>,
}

impl RankedPairs {
    /// Accepts entries that already satisfy the ranking order.
    pub fn from_entries(entries: Vec<RankedPair>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.count == 0 {
                return Err(Error::InvalidInput(format!(
                    "entry {i}: count must be positive"
                )));
            }
            if e.nucleus == e.satellite {
                return Err(Error::InvalidInput(format!(
                    "entry {i}: nucleus and satellite are both {:?}",
                    e.nucleus
                )));
            }
        }
        if let Some(i) = entries
            .windows(2)
            .position(|w| w[0].rank_key() >= w[1].rank_key())
        {
            return Err(Error::InvalidInput(format!(
                "entries {i} and {} are out of rank order",
                i + 1
            )));
        }
        Ok(RankedPairs { entries })
    }

    /// Builds a ranking from counts given in rank order, e.g. a listing
    /// `(phone, case), (phone, battery), ...` gets counts `len, len-1, ..., 1`.
    pub fn from_listing<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Self> {
        let n = pairs.len() as u64;
        Self::from_entries(
            pairs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| RankedPair::new(a.as_ref(), b.as_ref(), n - i as u64))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[RankedPair] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RankedPair> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `nucleus<TAB>satellite<TAB>count` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}", e.nucleus, e.satellite, e.count);
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [nucleus, satellite, count] = cols[..] else {
                return Err(Error::line(
                    i + 1,
                    format!("expected 3 tab-separated columns, found {}", cols.len()),
                ));
            };
            let count = count
                .trim()
                .parse()
                .map_err(|_| Error::line(i + 1, format!("bad count {count:?}")))?;
            entries.push(RankedPair::new(nucleus, satellite, count));
        }
        Self::from_entries(entries)
    }
}

impl<'a> IntoIterator for &'a RankedPairs {
    type Item = &'a RankedPair;
    type IntoIter = std::slice::Iter<'a, RankedPair>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Per-shard pair counts. Shards merge by pointwise sum; ranking happens once at the end.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCounts {
    counts: BTreeMap<(String, String), u64>,
}

impl PairCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, tuple: &AspectTuple) {
        *self
            .counts
            .entry((
                tuple.nucleus.label().to_string(),
                tuple.satellite.label().to_string(),
            ))
            .or_default() += 1;
    }

    pub fn merge(mut self, other: PairCounts) -> PairCounts {
        if self.counts.len() < other.counts.len() {
            return other.merge(self);
        }
        for (key, n) in other.counts {
            *self.counts.entry(key).or_default() += n;
        }
        self
    }

    pub fn into_ranked(self) -> RankedPairs {
        let mut entries: Vec<RankedPair> = self
            .counts
            .into_iter()
            .map(|((n, s), c)| RankedPair::new(n, s, c))
            .collect();
        entries.sort_by(|a, b| a.rank_key().cmp(&b.rank_key()));
        RankedPairs { entries }
    }
}

impl<B: Borrow<AspectTuple>> Extend<B> for PairCounts {
    fn extend<I: IntoIterator<Item = B>>(&mut self, iter: I) {
        for t in iter {
            self.add(t.borrow());
        }
    }
}

/// Counts tuples by (nucleus, satellite) label pair, ignoring relations.
pub fn aggregate<I, B>(tuples: I) -> RankedPairs
where
    I: IntoIterator<Item = B>,
    B: Borrow<AspectTuple>,
{
    let mut counts = PairCounts::new();
    counts.extend(tuples);
    counts.into_ranked()
}

/// The first `min(n, len)` entries.
pub fn top_n(pairs: &RankedPairs, n: usize) -> Result<RankedPairs> {
    if n == 0 {
        return Err(Error::InvalidInput("top_n requires n >= 1".into()));
    }
    Ok(RankedPairs {
        entries: pairs.entries.iter().take(n).cloned().collect(),
    })
}

/// Tuple dump rows: `nucleus<TAB>satellite<TAB>relation<TAB>doc_id`.
pub fn tuple_dump<'a, D>(docs: D) -> String
where
    D: IntoIterator<Item = (&'a str, &'a [AspectTuple])>,
{
    let mut out = String::new();
    for (doc, tuples) in docs {
        for t in tuples {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                t.nucleus, t.satellite, t.relation, doc
            );
        }
    }
    out
}
