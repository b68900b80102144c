//! Review corpora (JSON Lines), tree-JSON files, and corpus statistics.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};
use unicode_normalization::UnicodeNormalization;

use crate::aspect_extraction::AspectDiscourseTree;
use crate::error::{Error, Result};
use crate::segmentation::{sentence_count, DiscourseTree, LexiconTagger, Tagger};

/// Aspect-count thresholds reported by [`compute_stats`].
pub const ASPECT_THRESHOLDS: [usize; 2] = [2, 10];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Review {
    pub id: String,
    pub text: String,
}

/// Loads one review per non-empty line. Without `id_field`, ids are the
/// zero-based line index. Text is NFC-normalized.
pub fn load_reviews(
    path: impl AsRef<Path>,
    text_field: &str,
    id_field: Option<&str>,
) -> Result<Vec<Review>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reviews = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let record: Map<String, Value> = serde_json::from_str(&line)
            .map_err(|e| Error::line(lineno, format!("malformed JSON record: {e}")))?;
        let text = match record.get(text_field) {
            Some(Value::String(s)) => s.nfc().collect::<String>(),
            Some(_) => {
                return Err(Error::line(
                    lineno,
                    format!("field {text_field} is not a string"),
                ))
            }
            None => return Err(Error::line(lineno, format!("missing field {text_field}"))),
        };
        if text.trim().is_empty() {
            return Err(Error::line(lineno, format!("field {text_field} is empty")));
        }
        let id = match id_field {
            None => i.to_string(),
            Some(field) => match record.get(field) {
                Some(Value::String(s)) if !s.is_empty() => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                Some(_) => {
                    return Err(Error::line(
                        lineno,
                        format!("field {field} must be a non-empty string or number"),
                    ))
                }
                None => return Err(Error::line(lineno, format!("missing field {field}"))),
            },
        };
        if !seen.insert(id.clone()) {
            return Err(Error::line(lineno, format!("duplicate review id {id:?}")));
        }
        reviews.push(Review { id, text });
    }
    Ok(reviews)
}

/// Uniform sample of `size` items without replacement, kept in original order.
pub fn sample<T: Clone>(items: &[T], size: usize, seed: u64) -> Result<Vec<T>> {
    if size > items.len() {
        return Err(Error::InvalidInput(format!(
            "sample size {size} exceeds corpus size {}",
            items.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, items.len(), size).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| items[i].clone()).collect())
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::schema("root", format!("{}: not valid JSON: {e}", path.display())))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads and validates a tree-JSON file, tagging EDUs with the built-in lexicon.
pub fn load_discourse_tree(path: impl AsRef<Path>) -> Result<DiscourseTree> {
    load_discourse_tree_with(path, &LexiconTagger::builtin())
}

pub fn load_discourse_tree_with(
    path: impl AsRef<Path>,
    tagger: &dyn Tagger,
) -> Result<DiscourseTree> {
    DiscourseTree::from_json(&read_json(path.as_ref())?, tagger)
}

pub fn save_discourse_tree(tree: &DiscourseTree, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), &tree.to_json())
}

pub fn load_adt(path: impl AsRef<Path>) -> Result<AspectDiscourseTree> {
    AspectDiscourseTree::from_json(&read_json(path.as_ref())?)
}

pub fn save_adt(tree: &AspectDiscourseTree, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), &tree.to_json())
}

/// File stem for a document id: `[A-Za-z0-9_-]` pass through, other bytes become `%XX`.
pub fn encode_doc_id(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub fn decode_doc_id(stem: &str) -> Result<String> {
    let bytes = stem.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = stem
                .get(i + 1..i + 3)
                .ok_or_else(|| Error::InvalidInput(format!("bad escape in file name {stem:?}")))?;
            out.push(
                u8::from_str_radix(hex, 16).map_err(|_| {
                    Error::InvalidInput(format!("bad escape in file name {stem:?}"))
                })?,
            );
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out)
        .map_err(|_| Error::InvalidInput(format!("file name {stem:?} does not decode to UTF-8")))
}

/// `*.json` files of a directory as `(doc_id, path)`, sorted by file name.
pub fn list_tree_files(dir: impl AsRef<Path>) -> Result<Vec<(String, PathBuf)>> {
    let dir = dir.as_ref();
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            Ok((decode_doc_id(stem)?, p))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub review_count: usize,
    pub avg_words: f64,
    pub avg_sentences: f64,
    pub reviews_with_min_aspects: BTreeMap<usize, usize>,
}

impl CorpusStats {
    /// Flat object; threshold counts appear as `reviews_with_min_<k>_aspects`.
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("review_count".into(), self.review_count.into());
        obj.insert("avg_words".into(), self.avg_words.into());
        obj.insert("avg_sentences".into(), self.avg_sentences.into());
        for (k, n) in &self.reviews_with_min_aspects {
            obj.insert(format!("reviews_with_min_{k}_aspects"), (*n).into());
        }
        Value::Object(obj)
    }
}

/// Averages words (whitespace-separated) and sentences over all reviews and
/// counts reviews reaching each aspect threshold. Reviews absent from
/// `aspect_counts` count as having no aspects.
pub fn compute_stats(
    reviews: &[Review],
    aspect_counts: &BTreeMap<String, usize>,
) -> Result<CorpusStats> {
    let ids: HashSet<&str> = reviews.iter().map(|r| r.id.as_str()).collect();
    if let Some(unknown) = aspect_counts.keys().find(|k| !ids.contains(k.as_str())) {
        return Err(Error::InvalidInput(format!(
            "aspect count given for unknown review id {unknown:?}"
        )));
    }
    let n = reviews.len();
    let mean = |total: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    let words = reviews
        .iter()
        .map(|r| r.text.split_whitespace().count())
        .sum();
    let sentences = reviews.iter().map(|r| sentence_count(&r.text)).sum();
    let reviews_with_min_aspects = ASPECT_THRESHOLDS
        .iter()
        .map(|&k| {
            (
                k,
                reviews
                    .iter()
                    .filter(|r| aspect_counts.get(&r.id).copied().unwrap_or(0) >= k)
                    .count(),
            )
        })
        .collect();
    Ok(CorpusStats {
        review_count: n,
        avg_words: mean(words),
        avg_sentences: mean(sentences),
        reviews_with_min_aspects,
    })
}
