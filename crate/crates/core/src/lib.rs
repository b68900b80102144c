//! Unsupervised aspect hierarchy extraction from discourse-annotated reviews.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! 1. [`corpus_io`] loads JSON Lines review corpora and tree-JSON discourse trees.
//! 2. [`segmentation`] tags tokens and, when no parsed tree exists, splits text
//!    into elementary discourse units and assembles a right-branching tree.
//! 3. [`aspect_extraction`] turns discourse trees into aspect discourse trees.
//! 4. [`tuple_extraction`] walks those trees breadth-first, emitting
//!    nucleus/satellite aspect tuples, and ranks the aggregated pairs.
//! 5. [`hierarchy_builder`] folds the ranking into an aspect forest.
//! 6. [`coverage_eval`] scores ranked pairs against a ConceptNet-style graph.
//!
//! [`cli`] wires the stages together behind the `aspect-hierarchy` binary.

pub mod aspect_extraction;
pub mod cli;
pub mod corpus_io;
pub mod coverage_eval;
mod error;
pub mod hierarchy_builder;
pub mod segmentation;
pub mod tuple_extraction;

pub use aspect_extraction::{
    extract_adt, extract_aspects, Aspect, AspectDiscourseTree, AspectLeaf,
};
pub use corpus_io::{compute_stats, load_discourse_tree, load_reviews, CorpusStats, Review};
pub use coverage_eval::{
    coverage, hierarchical_distance, load_kg, CoverageReport, KnowledgeGraph, RelationClass,
    RelationConfig,
};
pub use error::{Error, Result};
pub use hierarchy_builder::{
    build_hierarchy, export_dot, hierarchy_pairs, AspectForest, HierarchyBuilder, PairOutcome,
    SkipReason,
};
pub use segmentation::{
    build_naive_tree, segment_edus, tag_tokens, Connectives, DiscourseTree, Edu, LexiconTagger,
    Node, Nuclearity, Pos, Segmenter, Tagger, Token,
};
pub use tuple_extraction::{
    aggregate, extract_tuples, top_n, AspectTuple, PairCounts, RankedPair, RankedPairs,
};
