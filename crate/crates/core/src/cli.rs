//! Command-line orchestration: one subcommand per stage plus `run`.
//!
//! Stages read and write plain files in the output directory so any stage can
//! be rerun from disk:
//!
//! | stage      | reads                       | writes                                   |
//! |------------|-----------------------------|------------------------------------------|
//! | `segment`  | reviews JSONL               | `trees/<doc>.json`                       |
//! | `aspects`  | tree-JSON directory         | `adts/<doc>.json`                        |
//! | `tuples`   | ADT directory               | `tuples.tsv`, `ranked_pairs.tsv`         |
//! | `build`    | `ranked_pairs.tsv`          | `forest.json`, `forest.dot`, `skip_log.tsv` |
//! | `coverage` | `ranked_pairs.tsv`, KG dump | `coverage.json`, `coverage.tsv`          |
//! | `stats`    | reviews or trees            | `corpus_stats.json`                      |

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::Value;
use thiserror::Error;

use crate::aspect_extraction::{extract_adt, AspectDiscourseTree};
use crate::corpus_io::{self, compute_stats, encode_doc_id, list_tree_files, load_reviews, Review};
use crate::coverage_eval::{
    coverage, coverage_tsv, load_kg, CoverageReport, RelationClass, RelationConfig,
    DEFAULT_MAX_HOPS,
};
use crate::error::Error;
use crate::hierarchy_builder::{build_hierarchy, export_dot};
use crate::segmentation::{Connectives, DiscourseTree, LexiconTagger, Segmenter};
use crate::tuple_extraction::{extract_tuples, tuple_dump, AspectTuple, PairCounts, RankedPairs};

pub const DEFAULT_TOP_N: [usize; 6] = [5, 10, 20, 30, 40, 50];

pub mod files {
    pub const TREES_DIR: &str = "trees";
    pub const ADTS_DIR: &str = "adts";
    pub const TUPLES: &str = "tuples.tsv";
    pub const RANKED_PAIRS: &str = "ranked_pairs.tsv";
    pub const FOREST_JSON: &str = "forest.json";
    pub const FOREST_DOT: &str = "forest.dot";
    pub const SKIP_LOG: &str = "skip_log.tsv";
    pub const COVERAGE_JSON: &str = "coverage.json";
    pub const COVERAGE_TSV: &str = "coverage.tsv";
    pub const CORPUS_STATS: &str = "corpus_stats.json";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Segment,
    Aspects,
    Tuples,
    Build,
    Coverage,
    Stats,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Segment => "segment",
            Stage::Aspects => "aspects",
            Stage::Tuples => "tuples",
            Stage::Build => "build",
            Stage::Coverage => "coverage",
            Stage::Stats => "stats",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Input { stage: Stage, source: Error },
    #[error("{stage}: {source}")]
    Stage { stage: Stage, source: Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input { .. } => 3,
            CliError::Stage { .. } => 4,
        }
    }
}

trait StageExt<T> {
    fn input(self, stage: Stage) -> Result<T, CliError>;
    fn stage(self, stage: Stage) -> Result<T, CliError>;
}

impl<T> StageExt<T> for crate::Result<T> {
    fn input(self, stage: Stage) -> Result<T, CliError> {
        self.map_err(|source| CliError::Input { stage, source })
    }

    fn stage(self, stage: Stage) -> Result<T, CliError> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "aspect-hierarchy",
    version,
    about = "Aspect hierarchies from discourse trees of reviews"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus statistics (review count, average words/sentences, aspect thresholds)
    Stats(PipelineArgs),
    /// Segment reviews into EDUs and write naive discourse trees
    Segment(PipelineArgs),
    /// Turn discourse trees into aspect discourse trees
    Aspects(PipelineArgs),
    /// Extract nucleus/satellite tuples from aspect trees and rank pairs
    Tuples(PipelineArgs),
    /// Build the aspect hierarchy from ranked pairs
    Build(PipelineArgs),
    /// Score ranked pairs against a knowledge graph
    Coverage(PipelineArgs),
    /// Full pipeline
    Run(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelatedToArg {
    Hierarchical,
    Substitution,
    Ignore,
}

impl From<RelatedToArg> for RelationClass {
    fn from(arg: RelatedToArg) -> Self {
        match arg {
            RelatedToArg::Hierarchical => RelationClass::Hierarchical,
            RelatedToArg::Substitution => RelationClass::Substitution,
            RelatedToArg::Ignore => RelationClass::Ignore,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Reviews (JSON Lines), an ADT directory (`tuples`) or a ranked-pairs TSV (`build`, `coverage`)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory of tree-JSON discourse trees
    #[arg(long)]
    pub trees: Option<PathBuf>,
    /// Knowledge-graph assertion dump (TSV, optionally gzipped)
    #[arg(long)]
    pub kg: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "top-n", value_delimiter = ',', default_values_t = DEFAULT_TOP_N)]
    pub top_n: Vec<usize>,
    #[arg(long = "max-hops", default_value_t = DEFAULT_MAX_HOPS)]
    pub max_hops: u32,
    /// Number of documents to sample
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long = "relatedto-class", value_enum, default_value_t = RelatedToArg::Hierarchical)]
    pub relatedto_class: RelatedToArg,
    #[arg(long = "text-field", default_value = "reviewText")]
    pub text_field: String,
    #[arg(long = "id-field")]
    pub id_field: Option<String>,
    /// Tagger lexicon TSV replacing the built-in one
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Connective list replacing the built-in one
    #[arg(long)]
    pub connectives: Option<PathBuf>,
    /// Label hierarchy edges in the DOT output with pair counts
    #[arg(long = "annotate-counts")]
    pub annotate_counts: bool,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub trees: Option<PathBuf>,
    pub kg: Option<PathBuf>,
    pub out: PathBuf,
    pub sample_size: Option<usize>,
    pub sample_seed: u64,
    pub top_n: Vec<usize>,
    pub max_hops: u32,
    pub related_to: RelationClass,
    pub text_field: String,
    pub id_field: Option<String>,
    pub lexicon: Option<PathBuf>,
    pub connectives: Option<PathBuf>,
    pub workers: usize,
    pub annotate_counts: bool,
}

impl PipelineConfig {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: None,
            trees: None,
            kg: None,
            out: out.into(),
            sample_size: None,
            sample_seed: 0,
            top_n: DEFAULT_TOP_N.to_vec(),
            max_hops: DEFAULT_MAX_HOPS,
            related_to: RelationClass::Hierarchical,
            text_field: "reviewText".into(),
            id_field: None,
            lexicon: None,
            connectives: None,
            workers: 1,
            annotate_counts: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.top_n.is_empty() {
            return Err(CliError::Config("--top-n needs at least one value".into()));
        }
        if self.top_n.contains(&0) {
            return Err(CliError::Config("--top-n values must be positive".into()));
        }
        if self.top_n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!(
                "--top-n values must be strictly increasing, got {:?}",
                self.top_n
            )));
        }
        if self.max_hops == 0 {
            return Err(CliError::Config("--max-hops must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        Ok(())
    }

    fn relation_config(&self) -> RelationConfig {
        RelationConfig::with_related_to(self.related_to)
    }

    fn segmenter(&self) -> Result<Segmenter, CliError> {
        let tagger = match &self.lexicon {
            Some(p) => LexiconTagger::from_file(p).input(Stage::Config)?,
            None => LexiconTagger::builtin(),
        };
        let connectives = match &self.connectives {
            Some(p) => Connectives::from_file(p).input(Stage::Config)?,
            None => Connectives::builtin(),
        };
        Ok(Segmenter {
            tagger,
            connectives,
        })
    }

    fn require<'a>(&self, value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
        value
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("{flag} is required")))
    }
}

impl From<PipelineArgs> for PipelineConfig {
    fn from(a: PipelineArgs) -> Self {
        PipelineConfig {
            input: a.input,
            trees: a.trees,
            kg: a.kg,
            out: a.out,
            sample_size: a.sample,
            sample_seed: a.seed,
            top_n: a.top_n,
            max_hops: a.max_hops,
            related_to: a.relatedto_class.into(),
            text_field: a.text_field,
            id_field: a.id_field,
            lexicon: a.lexicon,
            connectives: a.connectives,
            workers: a.workers,
            annotate_counts: a.annotate_counts,
        }
    }
}

/// Files written by a command; removed again unless the command commits.
struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
    created_dirs: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        let mut out = Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            created_dirs: Vec::new(),
            committed: false,
        };
        out.ensure_dir(dir)?;
        Ok(out)
    }

    fn ensure_dir(&mut self, dir: &Path) -> Result<(), CliError> {
        if !dir.exists() {
            fs::create_dir_all(dir)
                .map_err(|e| Error::io(dir, e))
                .stage(Stage::Write)?;
            self.created_dirs.push(dir.to_path_buf());
        }
        Ok(())
    }

    fn subdir(&mut self, name: &str) -> Result<PathBuf, CliError> {
        let dir = self.dir.join(name);
        self.ensure_dir(&dir)?;
        Ok(dir)
    }

    fn write(&mut self, path: PathBuf, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        fs::write(&path, contents)
            .map_err(|e| Error::io(&path, e))
            .stage(Stage::Write)?;
        self.written.push(path);
        Ok(())
    }

    fn write_file(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        self.write(self.dir.join(name), contents)
    }

    fn write_json(&mut self, path: PathBuf, value: &Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
        text.push('\n');
        self.write(path, text)
    }

    fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
        for dir in self.created_dirs.iter().rev() {
            let _ = fs::remove_dir(dir);
        }
    }
}

/// One document's discourse tree with its review text.
#[derive(Debug, Clone)]
pub struct Document {
    pub review: Review,
    pub tree: DiscourseTree,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))
}

fn apply_sample<T: Clone>(config: &PipelineConfig, items: Vec<T>) -> Result<Vec<T>, CliError> {
    match config.sample_size {
        None => Ok(items),
        Some(size) if size > items.len() => Err(CliError::Config(format!(
            "--sample {size} exceeds corpus size {}",
            items.len()
        ))),
        Some(size) => {
            Ok(corpus_io::sample(&items, size, config.sample_seed).expect("size checked above"))
        }
    }
}

/// Loads pre-parsed trees from `--trees`, or segments reviews from `--input`.
fn load_documents(
    config: &PipelineConfig,
    segmenter: &Segmenter,
) -> Result<Vec<Document>, CliError> {
    if let Some(dir) = &config.trees {
        let files = apply_sample(config, list_tree_files(dir).input(Stage::Load)?)?;
        return files
            .par_iter()
            .map(|(id, path)| {
                let tree = corpus_io::load_discourse_tree_with(path, &segmenter.tagger)
                    .input(Stage::Load)?;
                let text = tree
                    .edus()
                    .iter()
                    .map(|e| e.text.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                Ok(Document {
                    review: Review {
                        id: id.clone(),
                        text,
                    },
                    tree,
                })
            })
            .collect();
    }
    let path = config.require(&config.input, "--input (reviews) or --trees")?;
    let reviews =
        load_reviews(path, &config.text_field, config.id_field.as_deref()).input(Stage::Load)?;
    let reviews = apply_sample(config, reviews)?;
    reviews
        .into_par_iter()
        .map(|review| {
            let tree = segmenter.naive_tree(&review.text).stage(Stage::Segment)?;
            Ok(Document { review, tree })
        })
        .collect()
}

fn load_adts(dir: &Path) -> Result<Vec<(String, AspectDiscourseTree)>, CliError> {
    list_tree_files(dir)
        .input(Stage::Load)?
        .into_par_iter()
        .map(|(id, path)| Ok((id, corpus_io::load_adt(&path).input(Stage::Load)?)))
        .collect()
}

fn rank(per_doc: &[(String, Vec<AspectTuple>)]) -> RankedPairs {
    per_doc
        .par_iter()
        .fold(PairCounts::new, |mut counts, (_, tuples)| {
            counts.extend(tuples);
            counts
        })
        .reduce(PairCounts::new, PairCounts::merge)
        .into_ranked()
}

fn dump(per_doc: &[(String, Vec<AspectTuple>)]) -> String {
    tuple_dump(per_doc.iter().map(|(id, t)| (id.as_str(), t.as_slice())))
}

fn coverage_reports(
    config: &PipelineConfig,
    ranked: &RankedPairs,
) -> Result<Vec<CoverageReport>, CliError> {
    let kg_path = config.require(&config.kg, "--kg")?;
    let kg = load_kg(kg_path, config.relation_config()).input(Stage::Load)?;
    config
        .top_n
        .par_iter()
        .map(|&n| coverage(&kg, ranked, n, config.max_hops).stage(Stage::Coverage))
        .collect()
}

fn reports_json(reports: &[CoverageReport]) -> Value {
    serde_json::to_value(reports).expect("coverage reports serialize")
}

fn stats_json(docs: &[Document], adts: &[AspectDiscourseTree]) -> Result<Value, CliError> {
    let reviews: Vec<Review> = docs.iter().map(|d| d.review.clone()).collect();
    let counts: BTreeMap<String, usize> = docs
        .iter()
        .zip(adts)
        .map(|(d, a)| (d.review.id.clone(), a.distinct_aspects()))
        .collect();
    Ok(compute_stats(&reviews, &counts)
        .stage(Stage::Stats)?
        .to_json())
}

/// Runs every stage and writes, in order: tuple dump, ranked pairs, forest
/// JSON and DOT, skip log, coverage (JSON and TSV) and corpus statistics.
/// Returns the written paths.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    config.require(&config.kg, "--kg")?;
    let segmenter = config.segmenter()?;
    pool(config.workers)?.install(|| {
        let docs = load_documents(config, &segmenter)?;
        let adts: Vec<AspectDiscourseTree> =
            docs.par_iter().map(|d| extract_adt(&d.tree)).collect();
        let per_doc: Vec<(String, Vec<AspectTuple>)> = docs
            .par_iter()
            .zip(&adts)
            .map(|(d, a)| (d.review.id.clone(), extract_tuples(a)))
            .collect();
        let ranked = rank(&per_doc);
        let forest = build_hierarchy(&ranked);
        let reports = coverage_reports(config, &ranked)?;
        let stats = stats_json(&docs, &adts)?;

        let mut out = Outputs::new(&config.out)?;
        out.write_file(files::TUPLES, dump(&per_doc))?;
        out.write_file(files::RANKED_PAIRS, ranked.to_tsv())?;
        out.write_json(config.out.join(files::FOREST_JSON), &forest.to_json())?;
        out.write_file(
            files::FOREST_DOT,
            export_dot(&forest, config.annotate_counts),
        )?;
        out.write_file(files::SKIP_LOG, forest.skip_log_tsv())?;
        out.write_json(
            config.out.join(files::COVERAGE_JSON),
            &reports_json(&reports),
        )?;
        out.write_file(files::COVERAGE_TSV, coverage_tsv(&reports))?;
        out.write_json(config.out.join(files::CORPUS_STATS), &stats)?;
        Ok(out.commit())
    })
}

pub fn run_stats(config: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let segmenter = config.segmenter()?;
    pool(config.workers)?.install(|| {
        let docs = load_documents(config, &segmenter)?;
        let adts: Vec<AspectDiscourseTree> =
            docs.par_iter().map(|d| extract_adt(&d.tree)).collect();
        let stats = stats_json(&docs, &adts)?;
        let mut out = Outputs::new(&config.out)?;
        out.write_json(config.out.join(files::CORPUS_STATS), &stats)?;
        Ok(out.commit())
    })
}

pub fn run_segment(config: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    if config.trees.is_some() {
        return Err(CliError::Config(
            "segment reads reviews from --input, not --trees".into(),
        ));
    }
    let segmenter = config.segmenter()?;
    pool(config.workers)?.install(|| {
        let docs = load_documents(config, &segmenter)?;
        let mut out = Outputs::new(&config.out)?;
        let dir = out.subdir(files::TREES_DIR)?;
        for doc in &docs {
            out.write_json(
                dir.join(format!("{}.json", encode_doc_id(&doc.review.id))),
                &doc.tree.to_json(),
            )?;
        }
        Ok(out.commit())
    })
}

pub fn run_aspects(config: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    config.require(&config.trees, "--trees")?;
    let segmenter = config.segmenter()?;
    pool(config.workers)?.install(|| {
        let docs = load_documents(config, &segmenter)?;
        let adts: Vec<AspectDiscourseTree> =
            docs.par_iter().map(|d| extract_adt(&d.tree)).collect();
        let mut out = Outputs::new(&config.out)?;
        let dir = out.subdir(files::ADTS_DIR)?;
        for (doc, adt) in docs.iter().zip(&adts) {
            out.write_json(
                dir.join(format!("{}.json", encode_doc_id(&doc.review.id))),
                &adt.to_json(),
            )?;
        }
        Ok(out.commit())
    })
}

pub fn run_tuples(config: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let dir = config.require(&config.input, "--input (ADT directory)")?;
    pool(config.workers)?.install(|| {
        let adts = apply_sample(config, load_adts(dir)?)?;
        let per_doc: Vec<(String, Vec<AspectTuple>)> = adts
            .par_iter()
            .map(|(id, a)| (id.clone(), extract_tuples(a)))
            .collect();
        let ranked = rank(&per_doc);
        let mut out = Outputs::new(&config.out)?;
        out.write_file(files::TUPLES, dump(&per_doc))?;
        out.write_file(files::RANKED_PAIRS, ranked.to_tsv())?;
        Ok(out.commit())
    })
}

fn read_ranked(config: &PipelineConfig) -> Result<RankedPairs, CliError> {
    let path = config.require(&config.input, "--input (ranked pairs TSV)")?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::io(path, e))
        .input(Stage::Load)?;
    RankedPairs::from_tsv(&text).input(Stage::Load)
}

pub fn run_build(config: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let ranked = read_ranked(config)?;
    let forest = build_hierarchy(&ranked);
    let mut out = Outputs::new(&config.out)?;
    out.write_json(config.out.join(files::FOREST_JSON), &forest.to_json())?;
    out.write_file(
        files::FOREST_DOT,
        export_dot(&forest, config.annotate_counts),
    )?;
    out.write_file(files::SKIP_LOG, forest.skip_log_tsv())?;
    Ok(out.commit())
}

pub fn run_coverage(config: &PipelineConfig) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let ranked = read_ranked(config)?;
    let reports = pool(config.workers)?.install(|| coverage_reports(config, &ranked))?;
    let mut out = Outputs::new(&config.out)?;
    out.write_json(
        config.out.join(files::COVERAGE_JSON),
        &reports_json(&reports),
    )?;
    out.write_file(files::COVERAGE_TSV, coverage_tsv(&reports))?;
    Ok(out.commit())
}

pub fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::Stats(args) => run_stats(&args.into()),
        Command::Segment(args) => run_segment(&args.into()),
        Command::Aspects(args) => run_aspects(&args.into()),
        Command::Tuples(args) => run_tuples(&args.into()),
        Command::Build(args) => run_build(&args.into()),
        Command::Coverage(args) => run_coverage(&args.into()),
        Command::Run(args) => run_pipeline(&args.into()),
    }
}
