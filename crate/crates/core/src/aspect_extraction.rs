//! Noun-phrase aspects per EDU, and aspect discourse trees.

use std::fmt;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::segmentation::tree::{self, Child, LeafCodec, Node, Nuclearity};
use crate::segmentation::{DiscourseTree, Edu};

/// Relation label of the synthetic root left behind when the real root is multi-nuclear.
pub const FOREST: &str = "FOREST";

/// A lowercased, single-space-normalized noun phrase.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Aspect(String);

impl Aspect {
    /// Lowercases and collapses whitespace; rejects labels that end up empty.
    pub fn new(raw: &str) -> Result<Self> {
        let label = raw
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ");
        if label.is_empty() {
            return Err(Error::InvalidInput("aspect label is empty".into()));
        }
        Ok(Aspect(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }

    pub fn into_label(self) -> String {
        self.0
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Aspect {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Maximal `ADJ* (NOUN|PROPN)+` runs with the adjectives dropped, first occurrence only.
pub fn extract_aspects(edu: &Edu) -> Vec<Aspect> {
    let mut out: Vec<Aspect> = Vec::new();
    let mut nouns: Vec<&str> = Vec::new();
    let flush = |nouns: &mut Vec<&str>, out: &mut Vec<Aspect>| {
        if !nouns.is_empty() {
            let aspect = Aspect::new(&nouns.join(" ")).expect("noun tokens are non-empty");
            if !out.contains(&aspect) {
                out.push(aspect);
            }
            nouns.clear();
        }
    };
    for token in &edu.tokens {
        match token.pos {
            pos if pos.is_nominal() => nouns.push(&token.surface),
            // leading adjectives are dropped; any non-nominal token closes the run
            _ => flush(&mut nouns, &mut out),
        }
    }
    flush(&mut nouns, &mut out);
    out
}

/// Leaf of an aspect discourse tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AspectLeaf {
    pub edu_id: usize,
    pub aspects: Vec<Aspect>,
}

impl AspectLeaf {
    pub fn new<S: AsRef<str>>(edu_id: usize, labels: &[S]) -> Result<Self> {
        let aspects = labels
            .iter()
            .map(|l| Aspect::new(l.as_ref()))
            .collect::<Result<_>>()?;
        Ok(AspectLeaf { edu_id, aspects })
    }
}

impl LeafCodec for AspectLeaf {
    fn to_json(&self) -> Value {
        json!({ "aspects": self.aspects.iter().map(Aspect::label).collect::<Vec<_>>(), "edu_id": self.edu_id })
    }

    fn from_json(obj: &Map<String, Value>, path: &str) -> Result<Option<Self>> {
        let Some(aspects) = obj.get("aspects") else {
            return Ok(None);
        };
        let aspects = aspects
            .as_array()
            .ok_or_else(|| Error::schema(path, "\"aspects\" must be an array"))?
            .iter()
            .map(|a| {
                a.as_str()
                    .ok_or_else(|| Error::schema(path, "aspect labels must be strings"))
                    .and_then(|s| Aspect::new(s).map_err(|e| Error::schema(path, e.to_string())))
            })
            .collect::<Result<_>>()?;
        let edu_id = obj
            .get("edu_id")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::schema(path, "\"edu_id\" must be a non-negative integer"))?;
        Ok(Some(AspectLeaf {
            edu_id: edu_id as usize,
            aspects,
        }))
    }
}

/// Discourse tree with aspect-list leaves and no multi-nuclear relations
/// (apart from a synthetic [`FOREST`] root).
#[derive(Debug, Clone, PartialEq)]
pub struct AspectDiscourseTree {
    root: Node<AspectLeaf>,
}

impl AspectDiscourseTree {
    pub fn new(root: Node<AspectLeaf>) -> Result<Self> {
        let mut depth_zero = true;
        root.walk_internal(&mut "root".to_string(), &mut |path, relation, children| {
            let is_root = std::mem::take(&mut depth_zero);
            if children.len() < 2 {
                return Err(Error::InvalidTree {
                    path: path.into(),
                    message: "internal node needs at least 2 children".into(),
                });
            }
            let nuclei = children
                .iter()
                .filter(|c| c.nuclearity.is_nucleus())
                .count();
            if nuclei == 0 {
                return Err(Error::InvalidTree {
                    path: path.into(),
                    message: "internal node has no nucleus child".into(),
                });
            }
            if nuclei == children.len() && !(is_root && relation == FOREST) {
                return Err(Error::InvalidTree {
                    path: path.into(),
                    message: "multi-nuclear relation in an aspect tree".into(),
                });
            }
            Ok(())
        })?;
        Ok(AspectDiscourseTree { root })
    }

    pub fn root(&self) -> &Node<AspectLeaf> {
        &self.root
    }

    pub fn leaves(&self) -> Vec<&AspectLeaf> {
        self.root.leaves()
    }

    /// Distinct aspect labels over all leaves.
    pub fn distinct_aspects(&self) -> usize {
        let mut labels: Vec<&str> = self
            .leaves()
            .iter()
            .flat_map(|l| l.aspects.iter().map(Aspect::label))
            .collect();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    pub fn to_json(&self) -> Value {
        tree::node_to_json(&self.root)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        Self::new(tree::node_from_json(value, "root")?)
    }
}

enum Rewritten {
    Kept(Node<AspectLeaf>),
    /// Children of a multi-nuclear node, to be spliced into the parent.
    Dissolved(Vec<Node<AspectLeaf>>),
}

fn rewrite(node: &Node<Edu>) -> Rewritten {
    match node {
        Node::Leaf(edu) => Rewritten::Kept(Node::Leaf(AspectLeaf {
            edu_id: edu.id,
            aspects: extract_aspects(edu),
        })),
        Node::Internal { relation, children } => {
            let multi_nuclear = children.iter().all(|c| c.nuclearity.is_nucleus());
            let mut out: Vec<Child<AspectLeaf>> = Vec::with_capacity(children.len());
            for child in children {
                match rewrite(&child.node) {
                    Rewritten::Kept(node) => out.push(Child {
                        nuclearity: child.nuclearity,
                        node,
                    }),
                    Rewritten::Dissolved(nodes) => {
                        out.extend(nodes.into_iter().map(|node| Child {
                            nuclearity: child.nuclearity,
                            node,
                        }))
                    }
                }
            }
            if multi_nuclear {
                Rewritten::Dissolved(out.into_iter().map(|c| c.node).collect())
            } else {
                Rewritten::Kept(Node::Internal {
                    relation: relation.clone(),
                    children: out,
                })
            }
        }
    }
}

/// Replaces EDUs by their aspects and dissolves every nucleus-nucleus relation
/// by splicing its children into the parent under the dissolved node's nuclearity.
pub fn extract_adt(tree: &DiscourseTree) -> AspectDiscourseTree {
    let root = match rewrite(tree.root()) {
        Rewritten::Kept(node) => node,
        Rewritten::Dissolved(nodes) => Node::Internal {
            relation: FOREST.to_string(),
            children: nodes
                .into_iter()
                .map(|node| Child {
                    nuclearity: Nuclearity::Nucleus,
                    node,
                })
                .collect(),
        },
    };
    AspectDiscourseTree { root }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::segmentation::{LexiconTagger, Pos, Token};

    fn edu(id: usize, text: &str) -> Edu {
        Edu::new(id, text, &LexiconTagger::builtin()).unwrap()
    }

    fn labels(edu: &Edu) -> Vec<String> {
        extract_aspects(edu)
            .into_iter()
            .map(Aspect::into_label)
            .collect()
    }

    fn leaf(id: usize, text: &str) -> Node<Edu> {
        Node::Leaf(edu(id, text))
    }

    fn aleaf(id: usize, labels: &[&str]) -> Node<AspectLeaf> {
        Node::Leaf(AspectLeaf::new(id, labels).unwrap())
    }

    #[test]
    fn chunker_examples() {
        assert_eq!(
            labels(&edu(0, "the battery life is great")),
            ["battery life"]
        );
        assert!(labels(&edu(0, "works well")).is_empty());
        assert_eq!(labels(&edu(0, "the wall charger works")), ["wall charger"]);
        assert_eq!(labels(&edu(0, "Great Samsung phone")), ["samsung phone"]);
        assert_eq!(labels(&edu(0, "the case and the case")), ["case"]);
        assert_eq!(labels(&edu(0, "phone, case")), ["phone", "case"]);
    }

    #[test]
    fn elaboration_becomes_aspect_leaves() {
        let dt = DiscourseTree::new(Node::internal(
            "Elaboration",
            vec![
                Child::nucleus(leaf(0, "phone is great")),
                Child::satellite(leaf(1, "battery lasts")),
            ],
        ))
        .unwrap();
        let adt = extract_adt(&dt);
        let expected = Node::internal(
            "Elaboration",
            vec![
                Child::nucleus(aleaf(0, &["phone"])),
                Child::satellite(aleaf(1, &["battery"])),
            ],
        );
        assert_eq!(adt.root(), &expected);
    }

    #[test]
    fn multi_nuclear_root_becomes_forest() {
        let dt = DiscourseTree::new(Node::internal(
            "Joint",
            vec![
                Child::nucleus(leaf(0, "phone")),
                Child::nucleus(leaf(1, "case")),
            ],
        ))
        .unwrap();
        let adt = extract_adt(&dt);
        let expected = Node::internal(
            FOREST,
            vec![
                Child::nucleus(aleaf(0, &["phone"])),
                Child::nucleus(aleaf(1, &["case"])),
            ],
        );
        assert_eq!(adt.root(), &expected);
    }

    #[test]
    fn nested_joint_splices_with_its_own_nuclearity() {
        // Elaboration(N: phone, S: Joint(N: case, N: battery))
        let dt = DiscourseTree::new(Node::internal(
            "Elaboration",
            vec![
                Child::nucleus(leaf(0, "phone")),
                Child::satellite(Node::internal(
                    "Joint",
                    vec![
                        Child::nucleus(leaf(1, "case")),
                        Child::nucleus(leaf(2, "battery")),
                    ],
                )),
            ],
        ))
        .unwrap();
        let adt = extract_adt(&dt);
        let expected = Node::internal(
            "Elaboration",
            vec![
                Child::nucleus(aleaf(0, &["phone"])),
                Child::satellite(aleaf(1, &["case"])),
                Child::satellite(aleaf(2, &["battery"])),
            ],
        );
        assert_eq!(adt.root(), &expected);
        assert!(AspectDiscourseTree::new(adt.root().clone()).is_ok());
    }

    #[test]
    fn empty_leaves_are_kept() {
        let dt = DiscourseTree::new(Node::internal(
            "Contrast",
            vec![
                Child::nucleus(leaf(0, "phone")),
                Child::satellite(leaf(1, "works well")),
            ],
        ))
        .unwrap();
        let adt = extract_adt(&dt);
        assert_eq!(adt.leaves().len(), 2);
        assert!(adt.leaves()[1].aspects.is_empty());
    }

    #[test]
    fn adt_json_round_trip_and_validation() {
        let adt = AspectDiscourseTree::new(Node::internal(
            "Background",
            vec![
                Child::satellite(aleaf(0, &["price"])),
                Child::nucleus(aleaf(1, &["battery life", "case"])),
            ],
        ))
        .unwrap();
        let json = adt.to_json();
        assert_eq!(
            json["children"][1]["node"],
            json!({ "aspects": ["battery life", "case"], "edu_id": 1 })
        );
        assert_eq!(AspectDiscourseTree::from_json(&json).unwrap(), adt);

        let joint = Node::internal(
            "Joint",
            vec![Child::nucleus(aleaf(0, &[])), Child::nucleus(aleaf(1, &[]))],
        );
        assert!(AspectDiscourseTree::new(joint).is_err());
    }

    fn arb_dt() -> impl Strategy<Value = Node<(bool, bool)>> {
        // leaf payload is unused; nuclearity flags drive the shape
        let leaf = Just(Node::Leaf((false, false)));
        leaf.prop_recursive(4, 24, 3, |inner| {
            proptest::collection::vec((any::<bool>(), inner), 2..4).prop_map(|kids| {
                let mut children: Vec<Child<(bool, bool)>> = kids
                    .into_iter()
                    .map(|(n, node)| Child {
                        nuclearity: if n {
                            Nuclearity::Nucleus
                        } else {
                            Nuclearity::Satellite
                        },
                        node,
                    })
                    .collect();
                if !children.iter().any(|c| c.nuclearity.is_nucleus()) {
                    children[0].nuclearity = Nuclearity::Nucleus;
                }
                Node::internal("R", children)
            })
        })
    }

    fn number_leaves(node: Node<(bool, bool)>) -> Node<Edu> {
        let mut next = 0;
        node.try_map::<Edu, Error>(&mut |_| {
            next += 1;
            Ok(edu(
                next - 1,
                if next % 2 == 0 {
                    "the phone"
                } else {
                    "battery"
                },
            ))
        })
        .unwrap()
    }

    proptest! {
        #[test]
        fn dissolving_keeps_leaves_and_removes_multinuclear_nodes(shape in arb_dt()) {
            let dt = DiscourseTree::new(number_leaves(shape)).unwrap();
            let adt = extract_adt(&dt);
            prop_assert_eq!(adt.root().leaf_count(), dt.root().leaf_count());
            let ids: Vec<usize> = adt.leaves().iter().map(|l| l.edu_id).collect();
            prop_assert_eq!(ids, (0..dt.root().leaf_count()).collect::<Vec<_>>());
            prop_assert!(AspectDiscourseTree::new(adt.root().clone()).is_ok());
        }

        #[test]
        fn aspect_labels_are_normalized(tags in proptest::collection::vec(
            (prop_oneof![Just(Pos::Noun), Just(Pos::Propn), Just(Pos::Adj), Just(Pos::Det), Just(Pos::Verb), Just(Pos::Punct)],
             "[A-Za-z][A-Za-z-]{0,8}"),
            0..20,
        )) {
            let tokens: Vec<Token> = tags.iter().enumerate().map(|(index, (pos, s))| Token { surface: s.clone(), pos: *pos, index }).collect();
            let text = tokens.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
            let edu = Edu { id: 0, text, tokens };
            let aspects = extract_aspects(&edu);
            let noun_words: Vec<String> = tags.iter().filter(|(p, _)| p.is_nominal()).map(|(_, s)| s.to_lowercase()).collect();
            for a in &aspects {
                let l = a.label();
                prop_assert!(!l.is_empty());
                prop_assert_eq!(l.trim(), l);
                prop_assert!(!l.contains("  "));
                prop_assert!(!l.chars().any(char::is_uppercase));
                prop_assert!(l.split(' ').all(|w| noun_words.iter().any(|n| n == w)));
            }
        }
    }
}
