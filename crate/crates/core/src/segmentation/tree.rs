//! Nuclearity-annotated n-ary trees and their JSON encoding.
//!
//! The same shape carries discourse trees (leaves are EDUs) and aspect
//! discourse trees (leaves are aspect lists), so the node type is generic
//! over its leaf payload.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Nuclearity {
    Nucleus,
    Satellite,
}

impl Nuclearity {
    pub fn as_str(self) -> &'static str {
        match self {
            Nuclearity::Nucleus => "N",
            Nuclearity::Satellite => "S",
        }
    }

    pub fn is_nucleus(self) -> bool {
        self == Nuclearity::Nucleus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Child<L> {
    pub nuclearity: Nuclearity,
    pub node: Node<L>,
}

impl<L> Child<L> {
    pub fn nucleus(node: Node<L>) -> Self {
        Child {
            nuclearity: Nuclearity::Nucleus,
            node,
        }
    }

    pub fn satellite(node: Node<L>) -> Self {
        Child {
            nuclearity: Nuclearity::Satellite,
            node,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node<L> {
    Leaf(L),
    Internal {
        relation: String,
        children: Vec<Child<L>>,
    },
}

impl<L> Node<L> {
    pub fn internal(relation: impl Into<String>, children: Vec<Child<L>>) -> Self {
        Node::Internal {
            relation: relation.into(),
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf(_))
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a L>) {
        match self {
            Node::Leaf(leaf) => out.push(leaf),
            Node::Internal { children, .. } => {
                for child in children {
                    child.node.collect_leaves(out);
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Internal { children, .. } => children.iter().map(|c| c.node.leaf_count()).sum(),
        }
    }

    /// Rebuilds the tree with every leaf passed through `f`, keeping the skeleton.
    pub fn try_map<M, E>(self, f: &mut impl FnMut(L) -> Result<M, E>) -> Result<Node<M>, E> {
        Ok(match self {
            Node::Leaf(leaf) => Node::Leaf(f(leaf)?),
            Node::Internal { relation, children } => Node::Internal {
                relation,
                children: children
                    .into_iter()
                    .map(|c| {
                        Ok(Child {
                            nuclearity: c.nuclearity,
                            node: c.node.try_map(f)?,
                        })
                    })
                    .collect::<Result<_, E>>()?,
            },
        })
    }

    /// Visits every internal node with its path, depth-first.
    pub(crate) fn walk_internal<'a>(
        &'a self,
        path: &mut String,
        f: &mut impl FnMut(&str, &'a str, &'a [Child<L>]) -> Result<()>,
    ) -> Result<()> {
        if let Node::Internal { relation, children } = self {
            f(path, relation, children)?;
            for (i, child) in children.iter().enumerate() {
                let len = path.len();
                path.push_str(&format!(".children[{i}].node"));
                child.node.walk_internal(path, f)?;
                path.truncate(len);
            }
        }
        Ok(())
    }
}

/// Leaf payloads that know their own tree-JSON encoding.
pub trait LeafCodec: Sized {
    fn to_json(&self) -> Value;

    /// Returns `Ok(None)` when `obj` is not a leaf of this kind.
    fn from_json(obj: &Map<String, Value>, path: &str) -> Result<Option<Self>>;
}

pub fn node_to_json<L: LeafCodec>(node: &Node<L>) -> Value {
    match node {
        Node::Leaf(leaf) => leaf.to_json(),
        Node::Internal { relation, children } => json!({
            "relation": relation,
            "children": children
                .iter()
                .map(|c| json!({ "nuclearity": c.nuclearity.as_str(), "node": node_to_json(&c.node) }))
                .collect::<Vec<_>>(),
        }),
    }
}

pub fn node_from_json<L: LeafCodec>(value: &Value, path: &str) -> Result<Node<L>> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::schema(path, "expected a JSON object"))?;
    if let Some(leaf) = L::from_json(obj, path)? {
        return Ok(Node::Leaf(leaf));
    }
    let relation = match obj.get("relation") {
        Some(Value::String(r)) if !r.is_empty() => r.clone(),
        Some(_) => {
            return Err(Error::schema(
                path,
                "\"relation\" must be a non-empty string",
            ))
        }
        None => {
            return Err(Error::schema(
                path,
                "node is neither a leaf nor an internal node",
            ))
        }
    };
    let items = obj
        .get("children")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::schema(path, "internal node needs a \"children\" array"))?;
    if items.len() < 2 {
        return Err(Error::schema(
            path,
            format!(
                "internal node has {} children, need at least 2",
                items.len()
            ),
        ));
    }
    let mut children = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let child_path = format!("{path}.children[{i}]");
        let item = item
            .as_object()
            .ok_or_else(|| Error::schema(&child_path, "expected a JSON object"))?;
        let nuclearity = match item.get("nuclearity").and_then(Value::as_str) {
            Some("N") => Nuclearity::Nucleus,
            Some("S") => Nuclearity::Satellite,
            _ => {
                return Err(Error::schema(
                    &child_path,
                    "\"nuclearity\" must be \"N\" or \"S\"",
                ))
            }
        };
        let node_value = item
            .get("node")
            .ok_or_else(|| Error::schema(&child_path, "missing \"node\""))?;
        let node = node_from_json(node_value, &format!("{child_path}.node"))?;
        children.push(Child { nuclearity, node });
    }
    Ok(Node::Internal { relation, children })
}
