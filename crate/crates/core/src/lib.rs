//! Noun phrase detection for Ukrainian text parsed into Universal
//! Dependencies trees.
//!
//! The pipeline reads CoNLL-U ([`conllu`]), builds dependency trees
//! ([`tree`]), grows noun phrases from potential heads ([`extract`]),
//! optionally widens them with gazetteer and NER entity spans ([`entity`]),
//! and scores the result against gold annotations ([`eval`]).

pub mod annotate;
pub mod conllu;
pub mod entity;
pub mod error;
pub mod eval;
pub mod extract;
pub mod pipeline;
pub mod records;
pub mod tree;

pub use annotate::{tokenize, AnnotationStore, ClusterInput};
pub use conllu::{
    parse_conllu, parse_conllu_str, parse_conllu_with_doc, read_conllu_file, write_conllu,
    Features, Sentence, Token,
};
pub use entity::{
    filter_spans, load_external_spans, load_gazetteer, load_gazetteer_dir, match_gazetteer,
    merge_spans, parse_external_spans, EntityCategory, EntitySpan, Gazetteer, NerConfig,
    SpanSource,
};
pub use error::{Error, Result};
pub use eval::{
    baseline_extract, evaluate_variants, match_full, match_partial, metrics, score,
    ConfusionCounts, GoldAnnotation, MatchMode, Metrics, MetricsReport, Span, VariantTable,
};
pub use extract::{
    extract_document, extract_sentence, is_potential_head, may_join, ExtractionConfig, NounPhrase,
};
pub use pipeline::{predict, Corpus, EntitySources, PipelineConfig, Variant};
pub use records::{
    parse_gold, prediction_records, read_gold_file, write_gold, write_predictions, PredictionRecord,
};
pub use tree::{build_tree, build_trees_lenient, DependencyTree};
