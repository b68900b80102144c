//! Python bindings. Trees and forests cross the boundary as JSON strings in
//! the same format the command-line tool writes, so files stay interchangeable.

use std::path::PathBuf;

use aspect_hierarchy as core;
use aspect_hierarchy::cli::{run_pipeline, PipelineConfig};
use aspect_hierarchy::coverage_eval::DEFAULT_MAX_HOPS;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(err: core::Error) -> PyErr {
    match err {
        core::Error::Io { .. } => PyOSError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_json(text: &str) -> PyResult<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("invalid JSON: {e}")))
}

fn relation_config(related_to: &str) -> PyResult<core::RelationConfig> {
    let class: core::RelationClass = related_to.parse().map_err(py_err)?;
    Ok(core::RelationConfig::with_related_to(class))
}

/// `(surface, tag)` for every token of `text`.
#[pyfunction]
fn tag(text: &str) -> PyResult<Vec<(String, String)>> {
    let tagger = core::LexiconTagger::builtin();
    let tokens = core::tag_tokens(text, &tagger).map_err(py_err)?;
    Ok(tokens
        .into_iter()
        .map(|t| (t.surface, t.pos.as_str().to_string()))
        .collect())
}

/// Elementary discourse unit texts.
#[pyfunction]
fn segment(text: &str) -> PyResult<Vec<String>> {
    let edus = core::Segmenter::builtin().segment(text).map_err(py_err)?;
    Ok(edus.into_iter().map(|e| e.text).collect())
}

/// Aspect labels of a single unit of text.
#[pyfunction]
fn extract_aspects(text: &str) -> PyResult<Vec<String>> {
    let edu = core::Edu::new(0, text, &core::LexiconTagger::builtin()).map_err(py_err)?;
    Ok(core::extract_aspects(&edu)
        .into_iter()
        .map(core::Aspect::into_label)
        .collect())
}

#[pyclass(name = "DiscourseTree", module = "aspect_hierarchy")]
struct PyDiscourseTree(core::DiscourseTree);

#[pymethods]
impl PyDiscourseTree {
    /// Right-branching tree over the segmented text.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        core::Segmenter::builtin()
            .naive_tree(text)
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let value = parse_json(text)?;
        core::DiscourseTree::from_json(&value, &core::LexiconTagger::builtin())
            .map(Self)
            .map_err(py_err)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    fn edus(&self) -> Vec<String> {
        self.0.edus().into_iter().map(|e| e.text.clone()).collect()
    }

    fn aspect_tree(&self) -> PyAspectTree {
        PyAspectTree(core::extract_adt(&self.0))
    }

    fn __len__(&self) -> usize {
        self.0.edus().len()
    }
}

#[pyclass(name = "AspectTree", module = "aspect_hierarchy")]
struct PyAspectTree(core::AspectDiscourseTree);

#[pymethods]
impl PyAspectTree {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::AspectDiscourseTree::from_json(&parse_json(text)?)
            .map(Self)
            .map_err(py_err)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    /// `(nucleus, satellite, relation)` in breadth-first order.
    fn tuples(&self) -> Vec<(String, String, String)> {
        core::extract_tuples(&self.0)
            .into_iter()
            .map(|t| (t.nucleus.into_label(), t.satellite.into_label(), t.relation))
            .collect()
    }

    fn distinct_aspects(&self) -> usize {
        self.0.distinct_aspects()
    }
}

#[pyclass(name = "RankedPairs", module = "aspect_hierarchy")]
struct PyRankedPairs(core::RankedPairs);

#[pymethods]
impl PyRankedPairs {
    /// From `(nucleus, satellite, count)` entries already in rank order.
    #[new]
    fn new(entries: Vec<(String, String, u64)>) -> PyResult<Self> {
        let entries = entries
            .into_iter()
            .map(|(n, s, c)| core::RankedPair::new(n, s, c))
            .collect();
        core::RankedPairs::from_entries(entries)
            .map(Self)
            .map_err(py_err)
    }

    /// From an ordered pair listing; counts run from `len` down to 1.
    #[staticmethod]
    fn from_listing(pairs: Vec<(String, String)>) -> PyResult<Self> {
        core::RankedPairs::from_listing(
            &pairs
                .iter()
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect::<Vec<_>>(),
        )
        .map(Self)
        .map_err(py_err)
    }

    /// Counts and ranks the tuples of every tree.
    #[staticmethod]
    fn aggregate(trees: Vec<PyRef<'_, PyAspectTree>>) -> Self {
        Self(core::aggregate(
            trees.iter().flat_map(|t| core::extract_tuples(&t.0)),
        ))
    }

    #[staticmethod]
    fn from_tsv(text: &str) -> PyResult<Self> {
        core::RankedPairs::from_tsv(text).map(Self).map_err(py_err)
    }

    fn to_tsv(&self) -> String {
        self.0.to_tsv()
    }

    fn top(&self, n: usize) -> PyResult<Self> {
        core::top_n(&self.0, n).map(Self).map_err(py_err)
    }

    fn entries(&self) -> Vec<(String, String, u64)> {
        self.0
            .iter()
            .map(|p| (p.nucleus.clone(), p.satellite.clone(), p.count))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "AspectForest", module = "aspect_hierarchy")]
struct PyAspectForest(core::AspectForest);

#[pymethods]
impl PyAspectForest {
    #[staticmethod]
    fn build(pairs: &PyRankedPairs) -> Self {
        Self(core::build_hierarchy(&pairs.0))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::AspectForest::from_json(&parse_json(text)?)
            .map(Self)
            .map_err(py_err)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    #[pyo3(signature = (annotate_counts = false))]
    fn to_dot(&self, annotate_counts: bool) -> String {
        core::export_dot(&self.0, annotate_counts)
    }

    /// Distinct `(parent, child)` label pairs, sorted.
    fn pairs(&self) -> Vec<(String, String)> {
        core::hierarchy_pairs(&self.0).into_iter().collect()
    }

    fn roots(&self) -> Vec<String> {
        self.0
            .roots()
            .iter()
            .map(|&r| self.0.node(r).label.clone())
            .collect()
    }

    fn children(&self, label: &str) -> PyResult<Vec<String>> {
        let id = self
            .0
            .canonical(label)
            .ok_or_else(|| PyValueError::new_err(format!("no node labelled {label:?}")))?;
        Ok(self
            .0
            .child_labels(id)
            .into_iter()
            .map(str::to_string)
            .collect())
    }

    /// `(nucleus, satellite, reason)` for every pair the fold declined.
    fn skip_log(&self) -> Vec<(String, String, String)> {
        self.0
            .skip_log()
            .iter()
            .map(|s| (s.nucleus.clone(), s.satellite.clone(), s.reason.to_string()))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "KnowledgeGraph", module = "aspect_hierarchy")]
struct PyKnowledgeGraph(core::KnowledgeGraph);

#[pymethods]
impl PyKnowledgeGraph {
    /// `edges` are `(subject, relation, object)`; `related_to` is one of
    /// `hierarchical`, `substitution`, `ignore`.
    #[new]
    #[pyo3(signature = (edges, related_to = "hierarchical"))]
    fn new(edges: Vec<(String, String, String)>, related_to: &str) -> PyResult<Self> {
        Ok(Self(core::KnowledgeGraph::from_edges(
            edges,
            relation_config(related_to)?,
        )))
    }

    /// Assertion dump, plain or gzipped.
    #[staticmethod]
    #[pyo3(signature = (path, related_to = "hierarchical"))]
    fn load(path: PathBuf, related_to: &str) -> PyResult<Self> {
        core::load_kg(path, relation_config(related_to)?)
            .map(Self)
            .map_err(py_err)
    }

    #[pyo3(signature = (a, b, max_hops = DEFAULT_MAX_HOPS))]
    fn distance(&self, a: &str, b: &str, max_hops: u32) -> Option<u32> {
        core::hierarchical_distance(&self.0, a, b, max_hops)
    }

    /// `(covered, considered, fraction)` over the top `n` pairs.
    #[pyo3(signature = (pairs, n, max_hops = DEFAULT_MAX_HOPS))]
    fn coverage(
        &self,
        pairs: &PyRankedPairs,
        n: usize,
        max_hops: u32,
    ) -> PyResult<(usize, usize, f64)> {
        let report = core::coverage(&self.0, &pairs.0, n, max_hops).map_err(py_err)?;
        Ok((report.covered, report.total, report.coverage))
    }

    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn __contains__(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    fn __len__(&self) -> usize {
        self.0.concept_count()
    }
}

/// Full pipeline into `out`; returns the written paths.
#[pyfunction]
#[pyo3(signature = (out, kg, input = None, trees = None, top_n = None, max_hops = DEFAULT_MAX_HOPS, workers = 1, sample = None, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn run(
    out: PathBuf,
    kg: PathBuf,
    input: Option<PathBuf>,
    trees: Option<PathBuf>,
    top_n: Option<Vec<usize>>,
    max_hops: u32,
    workers: usize,
    sample: Option<usize>,
    seed: u64,
) -> PyResult<Vec<PathBuf>> {
    let mut config = PipelineConfig::new(out);
    config.kg = Some(kg);
    config.input = input;
    config.trees = trees;
    if let Some(top_n) = top_n {
        config.top_n = top_n;
    }
    config.max_hops = max_hops;
    config.workers = workers;
    config.sample_size = sample;
    config.sample_seed = seed;
    run_pipeline(&config).map_err(|e| match e.exit_code() {
        2 | 3 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    })
}

#[pymodule]
#[pyo3(name = "aspect_hierarchy")]
pub fn aspect_hierarchy_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tag, m)?)?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(extract_aspects, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_class::<PyDiscourseTree>()?;
    m.add_class::<PyAspectTree>()?;
    m.add_class::<PyRankedPairs>()?;
    m.add_class::<PyAspectForest>()?;
    m.add_class::<PyKnowledgeGraph>()?;
    m.add("DEFAULT_MAX_HOPS", DEFAULT_MAX_HOPS)?;
    Ok(())
}
