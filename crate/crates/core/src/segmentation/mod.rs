//! Rule-based discourse segmentation, used when no parsed tree is available.
//!
//! EDU boundaries fall after sentence terminators and before a discourse
//! connective that is followed by at least two more words in its sentence.
//! Trees built from those EDUs are right-branching `Elaboration` chains.

mod tagger;
pub mod tree;

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub use tagger::{tag_tokens, LexiconTagger, Pos, Tagger, Token};
pub use tree::{Child, LeafCodec, Node, Nuclearity};

pub(crate) use tagger::{is_word, token_spans};

const BUILTIN_CONNECTIVES: &str = include_str!("../../data/connectives.txt");

/// Relation label used by [`build_naive_tree`].
pub const NAIVE_RELATION: &str = "Elaboration";

/// Elementary discourse unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Edu {
    pub id: usize,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Edu {
    pub fn new(id: usize, text: impl Into<String>, tagger: &dyn Tagger) -> Result<Self> {
        let text = text.into();
        let tokens = tag_tokens(&text, tagger)?;
        Ok(Edu { id, text, tokens })
    }
}

impl LeafCodec for Edu {
    fn to_json(&self) -> Value {
        json!({ "edu": { "id": self.id, "text": self.text } })
    }

    /// Decodes the id and text only; tokens are filled in by [`DiscourseTree::from_json`].
    fn from_json(obj: &Map<String, Value>, path: &str) -> Result<Option<Self>> {
        let Some(edu) = obj.get("edu") else {
            return Ok(None);
        };
        let path = format!("{path}.edu");
        let edu = edu
            .as_object()
            .ok_or_else(|| Error::schema(&path, "expected a JSON object"))?;
        let id = edu
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::schema(&path, "\"id\" must be a non-negative integer"))?;
        let text = edu
            .get("text")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::schema(&path, "\"text\" must be a string"))?;
        Ok(Some(Edu {
            id: id as usize,
            text: text.to_string(),
            tokens: Vec::new(),
        }))
    }
}

/// A validated discourse tree over EDUs.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscourseTree {
    root: Node<Edu>,
}

impl DiscourseTree {
    /// Checks arity, nuclearity and EDU ordering before accepting `root`.
    pub fn new(root: Node<Edu>) -> Result<Self> {
        validate(&root)?;
        Ok(DiscourseTree { root })
    }

    pub fn root(&self) -> &Node<Edu> {
        &self.root
    }

    pub fn into_root(self) -> Node<Edu> {
        self.root
    }

    pub fn edus(&self) -> Vec<&Edu> {
        self.root.leaves()
    }

    pub fn to_json(&self) -> Value {
        tree::node_to_json(&self.root)
    }

    /// Decodes tree-JSON and tags every EDU with `tagger`.
    pub fn from_json(value: &Value, tagger: &dyn Tagger) -> Result<Self> {
        let root: Node<Edu> = tree::node_from_json(value, "root")?;
        let root = root.try_map(&mut |edu: Edu| {
            if edu.text.trim().is_empty() {
                return Err(Error::InvalidTree {
                    path: format!("edu {}", edu.id),
                    message: "EDU text is empty".into(),
                });
            }
            Edu::new(edu.id, edu.text, tagger)
        })?;
        Self::new(root)
    }
}

fn validate(root: &Node<Edu>) -> Result<()> {
    root.walk_internal(&mut "root".to_string(), &mut |path, _, children| {
        if children.len() < 2 {
            return Err(Error::InvalidTree {
                path: path.into(),
                message: "internal node needs at least 2 children".into(),
            });
        }
        if !children.iter().any(|c| c.nuclearity.is_nucleus()) {
            return Err(Error::InvalidTree {
                path: path.into(),
                message: "internal node has no nucleus child".into(),
            });
        }
        Ok(())
    })?;
    let leaves = root.leaves();
    for pair in leaves.windows(2) {
        if pair[0].id >= pair[1].id {
            return Err(Error::InvalidTree {
                path: format!("edu {}", pair[1].id),
                message: format!(
                    "EDU ids must increase left to right ({} then {})",
                    pair[0].id, pair[1].id
                ),
            });
        }
    }
    Ok(())
}

/// Discourse connectives that open a new EDU. Multi-word entries match token sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectives {
    entries: Vec<Vec<String>>,
}

impl Connectives {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_CONNECTIVES)
    }

    /// One lowercase connective per line; blank lines are ignored.
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .map(|l| {
                l.split_whitespace()
                    .map(str::to_lowercase)
                    .collect::<Vec<_>>()
            })
            .filter(|words| !words.is_empty())
            .collect();
        Connectives { entries }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::parse(
            &words
                .into_iter()
                .map(|w| w.as_ref().to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        )
    }

    /// Length in tokens of the longest connective starting at `at`.
    fn match_at(&self, lowered: &[String], at: usize) -> Option<usize> {
        self.entries
            .iter()
            .filter(|words| {
                lowered
                    .get(at..at + words.len())
                    .is_some_and(|s| s == words.as_slice())
            })
            .map(Vec::len)
            .max()
    }
}

fn is_terminator(surface: &str) -> bool {
    !surface.is_empty()
        && surface
            .chars()
            .all(|c| matches!(c, '.' | '!' | '?' | '\u{2026}'))
}

/// Token indices where a new unit begins (excluding 0).
fn boundaries(surfaces: &[&str], connectives: Option<&Connectives>) -> Vec<usize> {
    let lowered: Vec<String> = surfaces.iter().map(|s| s.to_lowercase()).collect();
    let n = surfaces.len();
    let mut cuts = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < n {
        let has_words = |upto: usize| surfaces[start..upto].iter().any(|s| is_word(s));
        if is_terminator(surfaces[i]) {
            let mut j = i + 1;
            while j < n && is_terminator(surfaces[j]) {
                j += 1;
            }
            if j < n && has_words(j) {
                cuts.push(j);
                start = j;
            }
            i = j;
            continue;
        }
        if let Some(len) = connectives.and_then(|c| c.match_at(&lowered, i)) {
            let following = surfaces[i + len..]
                .iter()
                .take_while(|s| !is_terminator(s))
                .filter(|s| is_word(s))
                .count();
            if following >= 2 && has_words(i) {
                cuts.push(i);
                start = i;
            }
            i += len;
            continue;
        }
        i += 1;
    }
    cuts
}

fn split_units<'t>(text: &'t str, connectives: Option<&Connectives>) -> Vec<&'t str> {
    let spans = token_spans(text);
    if spans.is_empty() {
        return Vec::new();
    }
    let surfaces: Vec<&str> = spans.iter().map(|&(s, e)| &text[s..e]).collect();
    let mut starts = vec![0];
    starts.extend(boundaries(&surfaces, connectives));
    starts
        .iter()
        .enumerate()
        .map(|(k, &first)| {
            let last = starts.get(k + 1).map_or(spans.len(), |&next| next) - 1;
            &text[spans[first].0..spans[last].1]
        })
        .collect()
}

/// Number of sentences, split at terminator runs.
pub fn sentence_count(text: &str) -> usize {
    split_units(text, None).len()
}

/// Splits `text` into EDUs with ids 0, 1, 2, ... in document order.
pub fn segment_edus(
    text: &str,
    tagger: &dyn Tagger,
    connectives: &Connectives,
) -> Result<Vec<Edu>> {
    let units = split_units(text, Some(connectives));
    if units.is_empty() {
        return Err(Error::InvalidInput("cannot segment empty text".into()));
    }
    units
        .into_iter()
        .enumerate()
        .map(|(id, unit)| Edu::new(id, unit, tagger))
        .collect()
}

/// Right-branching `Elaboration` chain: nucleus on the left, satellite on the right.
pub fn build_naive_tree(edus: Vec<Edu>) -> Result<DiscourseTree> {
    let mut rev = edus.into_iter().rev();
    let last = rev
        .next()
        .ok_or_else(|| Error::InvalidInput("cannot build a tree from zero EDUs".into()))?;
    let root = rev.fold(Node::Leaf(last), |acc, edu| {
        Node::internal(
            NAIVE_RELATION,
            vec![Child::nucleus(Node::Leaf(edu)), Child::satellite(acc)],
        )
    });
    DiscourseTree::new(root)
}

/// Bundles a tagger with a connective list.
#[derive(Debug, Clone)]
pub struct Segmenter {
    pub tagger: LexiconTagger,
    pub connectives: Connectives,
}

impl Default for Segmenter {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Segmenter {
    pub fn builtin() -> Self {
        Segmenter {
            tagger: LexiconTagger::builtin(),
            connectives: Connectives::builtin(),
        }
    }

    pub fn tag(&self, text: &str) -> Result<Vec<Token>> {
        tag_tokens(text, &self.tagger)
    }

    pub fn segment(&self, text: &str) -> Result<Vec<Edu>> {
        segment_edus(text, &self.tagger, &self.connectives)
    }

    pub fn naive_tree(&self, text: &str) -> Result<DiscourseTree> {
        build_naive_tree(self.segment(text)?)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn texts(edus: &[Edu]) -> Vec<&str> {
        edus.iter().map(|e| e.text.as_str()).collect()
    }

    fn edu(id: usize, text: &str) -> Edu {
        Edu::new(id, text, &LexiconTagger::builtin()).unwrap()
    }

    #[test]
    fn splits_before_but() {
        let edus = Segmenter::builtin()
            .segment("the wall charger works, but the car one does not")
            .unwrap();
        assert_eq!(
            texts(&edus),
            ["the wall charger works,", "but the car one does not"]
        );
    }

    #[test]
    fn single_sentence_is_one_edu() {
        let edus = Segmenter::builtin().segment("Great phone.").unwrap();
        assert_eq!(texts(&edus), ["Great phone."]);
    }

    #[test]
    fn connective_and_terminator_rules() {
        let edus = Segmenter::builtin()
            .segment("I like it because it is cheap. It broke.")
            .unwrap();
        assert_eq!(
            texts(&edus),
            ["I like it", "because it is cheap.", "It broke."]
        );
        assert_eq!(edus.iter().map(|e| e.id).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn connective_needs_two_following_words() {
        let seg = Segmenter::builtin();
        assert_eq!(seg.segment("I returned it so fast.").unwrap().len(), 1);
        assert_eq!(seg.segment("But the screen is fine.").unwrap().len(), 1);
        assert_eq!(seg.segment("It works but barely. OK").unwrap().len(), 2);
    }

    #[test]
    fn multi_word_connectives() {
        let connectives = Connectives::new(["even though"]);
        let edus = segment_edus(
            "I kept it even though the screen cracked",
            &LexiconTagger::builtin(),
            &connectives,
        )
        .unwrap();
        assert_eq!(
            texts(&edus),
            ["I kept it", "even though the screen cracked"]
        );
    }

    #[test]
    fn terminator_runs_stay_together() {
        let edus = Segmenter::builtin()
            .segment("Love it!!! Battery is good")
            .unwrap();
        assert_eq!(texts(&edus), ["Love it!!!", "Battery is good"]);
    }

    #[test]
    fn sentence_counts() {
        assert_eq!(sentence_count("One. Two! Three?"), 3);
        assert_eq!(sentence_count("no terminator"), 1);
        assert_eq!(sentence_count("... "), 1);
        assert_eq!(sentence_count(""), 0);
    }

    #[test]
    fn empty_text_cannot_be_segmented() {
        assert!(Segmenter::builtin().segment("   ").is_err());
    }

    #[test]
    fn naive_trees() {
        let one = build_naive_tree(vec![edu(0, "a")]).unwrap();
        assert!(one.root().is_leaf());

        let two = build_naive_tree(vec![edu(0, "a"), edu(1, "b")]).unwrap();
        assert_eq!(
            two.root(),
            &Node::internal(
                "Elaboration",
                vec![
                    Child::nucleus(Node::Leaf(edu(0, "a"))),
                    Child::satellite(Node::Leaf(edu(1, "b")))
                ]
            )
        );

        let three = build_naive_tree(vec![edu(0, "a"), edu(1, "b"), edu(2, "c")]).unwrap();
        let expected = Node::internal(
            "Elaboration",
            vec![
                Child::nucleus(Node::Leaf(edu(0, "a"))),
                Child::satellite(Node::internal(
                    "Elaboration",
                    vec![
                        Child::nucleus(Node::Leaf(edu(1, "b"))),
                        Child::satellite(Node::Leaf(edu(2, "c"))),
                    ],
                )),
            ],
        );
        assert_eq!(three.root(), &expected);

        assert!(build_naive_tree(Vec::new()).is_err());
    }

    #[test]
    fn validation_rejects_satellite_only_and_misordered_trees() {
        let all_sat = Node::internal(
            "R",
            vec![
                Child::satellite(Node::Leaf(edu(0, "a"))),
                Child::satellite(Node::Leaf(edu(1, "b"))),
            ],
        );
        assert!(matches!(
            DiscourseTree::new(all_sat),
            Err(Error::InvalidTree { .. })
        ));
        let misordered = Node::internal(
            "R",
            vec![
                Child::nucleus(Node::Leaf(edu(1, "a"))),
                Child::satellite(Node::Leaf(edu(0, "b"))),
            ],
        );
        assert!(DiscourseTree::new(misordered).is_err());
        let unary = Node::internal("R", vec![Child::nucleus(Node::Leaf(edu(0, "a")))]);
        assert!(DiscourseTree::new(unary).is_err());
    }

    // boundaries may fall between two non-space characters ("great.,"), so compare without whitespace
    fn squash(s: &str) -> String {
        s.split_whitespace().collect()
    }

    proptest! {
        #[test]
        fn naive_trees_are_valid(n in 1usize..=50) {
            let edus: Vec<Edu> = (0..n).map(|i| edu(i, &format!("unit {i}"))).collect();
            let tree = build_naive_tree(edus).unwrap();
            prop_assert_eq!(tree.root().leaf_count(), n);
            prop_assert!(validate(tree.root()).is_ok());
        }

        #[test]
        fn edus_partition_the_text(words in proptest::collection::vec(
            prop_oneof![
                Just("but"), Just("because"), Just("so"), Just("phone"), Just("it"), Just("works"),
                Just("."), Just("!"), Just(","), Just("battery"), Just("is"), Just("great"),
            ],
            1..40,
        ), gaps in proptest::collection::vec(prop_oneof![Just(" "), Just("  "), Just("\n"), Just("")], 40)) {
            let text: String = words.iter().zip(&gaps).flat_map(|(w, g)| [*w, *g]).collect();
            let edus = Segmenter::builtin().segment(&text).unwrap();
            let joined = edus.iter().map(|e| e.text.as_str()).collect::<Vec<_>>().join(" ");
            prop_assert_eq!(squash(&joined), squash(&text));
            for e in &edus {
                prop_assert!(e.tokens.iter().enumerate().all(|(i, t)| t.index == i && !t.surface.is_empty()));
            }
        }

        #[test]
        fn tagging_is_idempotent(text in "[a-zA-Z ,.!']{1,60}") {
            let tagger = LexiconTagger::builtin();
            if let Ok(first) = tag_tokens(&text, &tagger) {
                let rejoined = first.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
                let second = tag_tokens(&rejoined, &tagger).unwrap();
                prop_assert_eq!(first, second);
            }
        }
    }
}
