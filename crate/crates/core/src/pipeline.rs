//! The three extraction variants run over a parsed corpus.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::entity::{filter_spans, match_gazetteer, merge_spans, EntitySpan, Gazetteer, NerConfig};
use crate::error::{Error, Result};
use crate::eval::baseline_extract;
use crate::extract::{extract_document, ExtractionConfig, NounPhrase};
use crate::tree::{build_trees_lenient, DependencyTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Tree extraction widened by gazetteer and NER spans.
    #[serde(rename = "ud+ner")]
    UdNer,
    /// Tree extraction alone.
    #[serde(rename = "ud")]
    Ud,
    /// Every noun and personal pronoun as its own phrase.
    #[serde(rename = "baseline")]
    Baseline,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::UdNer, Variant::Ud, Variant::Baseline];

    /// Row label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Variant::UdNer => "UD+NER",
            Variant::Ud => "UD",
            Variant::Baseline => "–",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::UdNer => "ud+ner",
            Variant::Ud => "ud",
            Variant::Baseline => "baseline",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "ud+ner" | "udner" | "ud-ner" => Ok(Variant::UdNer),
            "ud" => Ok(Variant::Ud),
            "baseline" | "-" | "–" | "none" => Ok(Variant::Baseline),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub extraction: ExtractionConfig,
    pub ner: NerConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.extraction.validate()?;
        self.ner.validate()
    }
}

/// Parsed sentences plus the trees of those that are well-formed.
#[derive(Debug)]
pub struct Corpus {
    sentences: Vec<Sentence>,
    trees: Vec<DependencyTree>,
    skipped: Vec<Error>,
}

impl Corpus {
    /// Malformed sentences stay in the corpus but get no tree.
    pub fn new(sentences: Vec<Sentence>) -> Self {
        let (trees, skipped) = build_trees_lenient(sentences.clone());
        Corpus {
            sentences,
            trees,
            skipped,
        }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn trees(&self) -> &[DependencyTree] {
        &self.trees
    }

    /// Structural errors of sentences without a tree.
    pub fn skipped(&self) -> &[Error] {
        &self.skipped
    }

    pub fn document_count(&self) -> usize {
        let mut docs: Vec<&str> = self.sentences.iter().map(|s| s.doc_id.as_str()).collect();
        docs.sort_unstable();
        docs.dedup();
        docs.len()
    }
}

/// Entity inputs of the UD+NER variant.
#[derive(Debug, Clone, Copy, Default)]
pub struct EntitySources<'a> {
    pub gazetteer: Option<&'a Gazetteer>,
    pub external: &'a [EntitySpan],
}

impl EntitySources<'_> {
    /// Gazetteer hits plus the external spans that pass the threshold.
    pub fn spans(&self, sentences: &[Sentence], cfg: &NerConfig) -> Vec<EntitySpan> {
        let mut spans: Vec<EntitySpan> = match self.gazetteer {
            Some(g) => sentences
                .iter()
                .flat_map(|s| match_gazetteer(s, g))
                .collect(),
            None => Vec::new(),
        };
        spans.extend(filter_spans(self.external.to_vec(), cfg));
        spans
    }
}

pub fn predict(
    variant: Variant,
    corpus: &Corpus,
    entities: &EntitySources<'_>,
    cfg: &PipelineConfig,
) -> Vec<NounPhrase> {
    match variant {
        Variant::Baseline => corpus
            .sentences()
            .iter()
            .flat_map(baseline_extract)
            .collect(),
        Variant::Ud => extract_document(corpus.trees(), &cfg.extraction),
        Variant::UdNer => {
            let groups = extract_document(corpus.trees(), &cfg.extraction);
            if !cfg.ner.merge_enabled {
                return groups;
            }
            let sentences: Vec<Sentence> = corpus
                .trees()
                .iter()
                .map(|t| t.sentence().clone())
                .collect();
            let spans = entities.spans(&sentences, &cfg.ner);
            merge_spans(&groups, &spans, &sentences, &cfg.extraction)
        }
    }
}
